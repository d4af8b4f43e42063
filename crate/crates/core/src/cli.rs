//! The `hairy` command-line tool.
//!
//! Exit status: 0 on success, 1 when a check or construction fails, 2 on
//! usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cantor::{Layout, Scheme};
use crate::generate::{perturbed, random_cascade};
use crate::hair::{check_shcs_definition, check_usc_limit, peak_density_stats, CheckSchedule, DecayBound, HairJson, LengthModel};
use crate::homeo::shuffle_run;
use crate::matching::build_matched_nests;
use crate::rational::int;
use crate::render::{export_heights, render_figure, RenderSpec};

#[derive(Debug, Parser)]
#[command(name = "hairy", version, about = "Finite-depth straight hairy Cantor sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LayoutArg {
    True,
    Uniform,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Canonical,
    MiddleThird,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Canonical => Scheme::Canonical,
            SchemeArg::MiddleThird => Scheme::MiddleThird,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the canonical example as SVG, heights CSV, or model JSON,
    /// chosen by the output extension.
    Example {
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "true")]
        layout: LayoutArg,
    },
    /// Build matched nests for two models on the same Cantor approximation.
    Match {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run shuffle stages on a middle-third model and write the certificate.
    Uniformize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        stages: usize,
        #[arg(long)]
        certificate: PathBuf,
        /// Where to write the shuffled model.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the defining properties, upper semicontinuity along every
    /// address, and peak density of a model.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write the canonical heights CSV.
    Heights {
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded random cascade model.
    Random {
        #[arg(long, value_enum, default_value = "middle-third")]
        scheme: SchemeArg,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multiply a model by seeded factors in [0.9, 1.1], one per interval of
    /// the given level.
    Perturb {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A run that completed but whose checks did not all pass.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn read_model(path: &Path) -> anyhow::Result<LengthModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: HairJson = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(LengthModel::from_json(&json)?)
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

#[derive(Serialize)]
struct CheckOutput {
    definition: crate::hair::ShcsReport,
    usc_failures: Vec<String>,
    peaks: crate::hair::PeakStats,
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Example { depth, out, layout } => {
            let model = LengthModel::canonical(depth)?;
            let ext = out.extension().and_then(|e| e.to_str()).unwrap_or("");
            match ext {
                "svg" => {
                    let spec = RenderSpec {
                        graph_depths: (1..=depth.min(4)).collect(),
                        layout: match layout {
                            LayoutArg::True => Layout::TrueCantor,
                            LayoutArg::Uniform => Layout::AddressUniform,
                        },
                        ..RenderSpec::default()
                    };
                    write(&out, &render_figure(&model, &spec)?)
                }
                "csv" => write(&out, &export_heights(&model, depth)?),
                "json" => write_json(&out, &model.to_json()),
                _ => bail!("unsupported output extension {ext:?}; use .svg, .csv or .json"),
            }
        }
        Command::Match { x, y, levels, out } => {
            let (lx, ly) = (read_model(&x)?, read_model(&y)?);
            let pair = build_matched_nests(&lx, &ly, levels)?;
            pair.verify(&lx, &ly)?;
            write_json(&out, &pair.to_json())
        }
        Command::Uniformize {
            input,
            stages,
            certificate,
            out,
        } => {
            let model = read_model(&input)?;
            let run = shuffle_run(&model, stages)?;
            write_json(&certificate, &run.certificate)?;
            if let Some(out) = out {
                write_json(&out, &run.model.to_json())?;
            }
            if !run.certificate.passed() {
                return Err(CheckFailed("shuffle certificate has failing inequalities".into()).into());
            }
            Ok(())
        }
        Command::Check { input } => {
            let model = read_model(&input)?;
            let depth = model.depth();
            let schedule = CheckSchedule::every_level(depth);
            let definition = if depth >= 3 {
                check_shcs_definition(&model, &schedule)?
            } else {
                check_shcs_definition(
                    &model,
                    &CheckSchedule {
                        levels: schedule.levels,
                        bound: DecayBound::Fixed(int(1)),
                    },
                )?
            };
            let cantor = model.cantor();
            let mut usc_failures = Vec::new();
            for leaf in 0..cantor.leaf_count() {
                let address = cantor.index_to_address(depth, leaf);
                if !check_usc_limit(&model, &address)?.passed {
                    usc_failures.push(address.to_string());
                }
            }
            let report = CheckOutput {
                definition,
                usc_failures,
                peaks: peak_density_stats(&model),
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            let mut failures = Vec::new();
            let d = &report.definition;
            if let Some(w) = &d.positivity.first_zero {
                failures.push(format!("(i) zero hair at {}", w.address));
            }
            for (name, check) in [("(ii)", &d.endpoint_decay), ("(iii)", &d.two_sided)] {
                if let Some(stage) = check.first_failure {
                    let w = &check.stages[stage - 1];
                    let at = w.at.as_ref().map(|a| a.address.to_string()).unwrap_or_default();
                    failures.push(format!("{name} fails at stage {stage}, interval {at}: {} > {}", w.witness, w.bound));
                }
            }
            if let Some(a) = report.usc_failures.first() {
                failures.push(format!("upper semicontinuity fails along {a}"));
            }
            if failures.is_empty() {
                Ok(())
            } else {
                Err(CheckFailed(failures.join("; ")).into())
            }
        }
        Command::Heights { depth, out } => write(&out, &export_heights(&LengthModel::canonical(depth)?, depth)?),
        Command::Random {
            scheme,
            depth,
            seed,
            out,
        } => write_json(&out, &random_cascade(scheme.into(), depth, seed)?.to_json()),
        Command::Perturb {
            input,
            level,
            seed,
            out,
        } => write_json(&out, &perturbed(&read_model(&input)?, level, seed)?.to_json()),
    }
}
