//! Block shuffles on the middle-third Cantor set.
//!
//! Stage `n` picks a level `m_n` below the previous stage level `m_{n-1}`
//! and, inside every level-`m_{n-1}` block, rearranges the level-`m_n`
//! children by translation: sorted by maximum, then laid out as ranks
//! `1, 3, 5, ..., 6, 4, 2`. Small maxima end up at both ends and neighbouring
//! maxima end up close, which is what the endpoint-decay and two-sided limit
//! properties need.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::cantor::Scheme;
use crate::error::{Error, Result};
use crate::hair::{check_shcs_definition, CheckSchedule, DecayBound, LengthModel, ShcsReport};
use crate::rational::{int, pow3_inv, serde_rational, serde_rational_vec, Rational};

/// One checked strict inequality `lhs < rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    #[serde(with = "serde_rational")]
    pub lhs: Rational,
    #[serde(with = "serde_rational")]
    pub rhs: Rational,
    pub holds: bool,
}

impl Inequality {
    fn less(lhs: Rational, rhs: &Rational) -> Self {
        let holds = lhs < *rhs;
        Inequality {
            lhs,
            rhs: rhs.clone(),
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParentCertificate {
    /// 1-based index of the block at the previous stage level.
    pub parent: usize,
    /// `sigma[p]` is the 1-based index of the child moved to position `p`.
    pub sigma: Vec<usize>,
    /// Child maxima after the move, recomputed from the new hair values.
    #[serde(with = "serde_rational_vec")]
    pub maxima: Vec<Rational>,
    /// First and last child maxima against `1/n`.
    pub boundary: Vec<Inequality>,
    /// `|max_i - max_{i+1}|` against `1/n`.
    pub adjacent: Vec<Inequality>,
    /// Whether the child maxima before the move cover `[0, max]` within
    /// `1/(4n)`.
    pub net: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageCertificate {
    pub stage: usize,
    pub previous_level: usize,
    pub level: usize,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub parents: Vec<ParentCertificate>,
    /// Largest translation applied to any block.
    pub displacement: Inequality,
    /// Every hair stays inside its block of the previous stage level.
    pub fixes_previous_blocks: bool,
}

impl StageCertificate {
    pub fn passed(&self) -> bool {
        self.fixes_previous_blocks
            && self.displacement.holds
            && self
                .parents
                .iter()
                .all(|p| p.boundary.iter().chain(&p.adjacent).all(|q| q.holds))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShuffleStage {
    pub stage: usize,
    pub previous_level: usize,
    pub level: usize,
    /// Translation of every block at `level`, indexed by its position before
    /// the move.
    pub offsets: Vec<Rational>,
    /// Image position of every deepest interval.
    pub leaf_map: Vec<usize>,
    pub certificate: StageCertificate,
}

impl ShuffleStage {
    /// Image of `x` under the stage map: blocks translate, gaps are filled in
    /// linearly between the images of their endpoints, and points off `[0, 1]`
    /// are fixed.
    pub fn apply(&self, model: &LengthModel, x: &Rational) -> Rational {
        let cantor = model.cantor();
        let leaves = cantor.leaves();
        let (zero, one) = (Rational::zero(), Rational::one());
        if *x < zero || *x > one {
            return x.clone();
        }
        let offset_of = |leaf: usize| &self.offsets[cantor.ancestor(cantor.depth(), leaf, self.level)];
        let pos = leaves.partition_point(|l| l.hi < *x);
        if pos < leaves.len() && leaves[pos].lo <= *x {
            return x + offset_of(pos);
        }
        // gap between pos - 1 and pos
        let (a, b) = (&leaves[pos - 1].hi, &leaves[pos].lo);
        let (fa, fb) = (a + offset_of(pos - 1), b + offset_of(pos));
        &fa + (fb - &fa) * (x - a) / (b - a)
    }
}

/// Child order for one parent: stable sort by maximum, then odd ranks
/// ascending followed by even ranks descending. Equal maxima keep their
/// order.
pub fn arrangement(maxima: &[Rational]) -> Vec<usize> {
    if maxima.windows(2).all(|w| w[0] == w[1]) {
        return (0..maxima.len()).collect();
    }
    let mut order: Vec<usize> = (0..maxima.len()).collect();
    order.sort_by(|&a, &b| maxima[a].cmp(&maxima[b]));
    let rising = order.iter().step_by(2);
    let falling = order.iter().skip(1).step_by(2).rev();
    rising.chain(falling).copied().collect()
}

fn arranged_ok(maxima: &[Rational], sigma: &[usize], bound: &Rational) -> bool {
    let first = &maxima[sigma[0]];
    let last = &maxima[sigma[sigma.len() - 1]];
    first < bound
        && last < bound
        && sigma.windows(2).all(|w| abs(&maxima[w[0]] - &maxima[w[1]]) < *bound)
}

fn abs(r: Rational) -> Rational {
    if r < Rational::zero() {
        -r
    } else {
        r
    }
}

fn is_net(maxima: &[Rational], n: usize) -> bool {
    let mut sorted = maxima.to_vec();
    sorted.sort();
    let radius = int(1) / int(4 * n as i64);
    sorted[0] < radius && sorted.windows(2).all(|w| &w[1] - &w[0] < &radius * int(2))
}

/// Runs stage `n` on `model`, whose previous stage level is `previous`.
pub fn shuffle_stage(model: &LengthModel, n: usize, previous: usize) -> Result<(ShuffleStage, LengthModel)> {
    let cantor = model.cantor();
    if cantor.scheme() != Scheme::MiddleThird {
        return Err(Error::Contract("shuffles act on the middle-third scheme".into()));
    }
    if n == 0 {
        return Err(Error::Domain("stages are numbered from 1".into()));
    }
    let depth = model.depth();
    let bound = int(1) / int(n as i64);
    let parents = cantor.level(previous).len();
    let level = (previous + 1..=depth)
        .find(|&m| {
            let maxima = model.level_maxima(m);
            (0..parents).all(|j| {
                let kids = &maxima[cantor.descendant_range(previous, j, m)];
                arranged_ok(kids, &arrangement(kids), &bound)
            })
        })
        .ok_or_else(|| {
            Error::Resource(format!(
                "stage {n}: no level between {} and depth {depth} separates block maxima by less than 1/{n}; \
                 a deeper model is needed",
                previous + 1
            ))
        })?;

    let maxima = model.level_maxima(level);
    let leaves = cantor.leaves();
    let mut values = vec![Rational::zero(); leaves.len()];
    let mut leaf_map = vec![0; leaves.len()];
    let mut offsets = vec![Rational::zero(); maxima.len()];
    let mut sigmas = Vec::with_capacity(parents);
    let mut nets = Vec::with_capacity(parents);
    for j in 0..parents {
        let kids = cantor.descendant_range(previous, j, level);
        let sigma = arrangement(&maxima[kids.clone()]);
        nets.push(is_net(&maxima[kids.clone()], n));
        for (p, &s) in sigma.iter().enumerate() {
            let (old, new) = (kids.start + s, kids.start + p);
            offsets[old] = &cantor.level(level)[new].lo - &cantor.level(level)[old].lo;
            let (from, to) = (cantor.leaf_range(level, old), cantor.leaf_range(level, new));
            for (a, b) in from.zip(to) {
                values[b] = model.value(a).clone();
                leaf_map[a] = b;
            }
        }
        sigmas.push(sigma.iter().map(|s| kids.start + s + 1).collect::<Vec<_>>());
    }
    let next = LengthModel::from_leaf_values(model.cantor_arc().clone(), values)?;

    let after = next.level_maxima(level);
    let parent_certs = (0..parents)
        .map(|j| {
            let kids = cantor.descendant_range(previous, j, level);
            let m = &after[kids.clone()];
            ParentCertificate {
                parent: j + 1,
                sigma: sigmas[j].clone(),
                maxima: m.to_vec(),
                boundary: vec![
                    Inequality::less(m[0].clone(), &bound),
                    Inequality::less(m[m.len() - 1].clone(), &bound),
                ],
                adjacent: m.windows(2).map(|w| Inequality::less(abs(&w[0] - &w[1]), &bound)).collect(),
                net: nets[j],
            }
        })
        .collect();
    let displacement = offsets.iter().map(|o| abs(o.clone())).max().unwrap_or_else(Rational::zero);
    let fixes_previous_blocks = leaf_map
        .iter()
        .enumerate()
        .all(|(a, &b)| cantor.ancestor(depth, a, previous) == cantor.ancestor(depth, b, previous));
    let certificate = StageCertificate {
        stage: n,
        previous_level: previous,
        level,
        bound,
        parents: parent_certs,
        // the bound holds with equality when a block crosses its whole parent
        displacement: Inequality {
            holds: displacement <= pow3_inv(previous as u32),
            lhs: displacement,
            rhs: pow3_inv(previous as u32),
        },
        fixes_previous_blocks,
    };
    Ok((
        ShuffleStage {
            stage: n,
            previous_level: previous,
            level,
            offsets,
            leaf_map,
            certificate,
        },
        next,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShuffleCertificate {
    /// `m_0 = 0, m_1, ..., m_S`.
    pub levels: Vec<usize>,
    pub stages: Vec<StageCertificate>,
    /// Definition checks on the final model with schedule `levels` and
    /// decay constant 1.
    pub final_check: ShcsReport,
}

impl ShuffleCertificate {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(StageCertificate::passed) && self.final_check.passed()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShuffleRun {
    pub stages: Vec<ShuffleStage>,
    pub model: LengthModel,
    pub certificate: ShuffleCertificate,
}

impl ShuffleRun {
    /// Largest translation of each stage.
    pub fn displacements(&self) -> Vec<Rational> {
        self.stages.iter().map(|s| s.certificate.displacement.lhs.clone()).collect()
    }
}

/// Runs `stages` shuffle stages starting from `m_0 = 0`.
pub fn shuffle_run(model: &LengthModel, stages: usize) -> Result<ShuffleRun> {
    if stages == 0 {
        return Err(Error::Domain("at least one stage is needed".into()));
    }
    let mut current = model.clone();
    let mut levels = vec![0];
    let mut done = Vec::with_capacity(stages);
    for n in 1..=stages {
        let (stage, next) = shuffle_stage(&current, n, levels[n - 1])?;
        levels.push(stage.level);
        done.push(stage);
        current = next;
    }
    let final_check = check_shcs_definition(
        &current,
        &CheckSchedule {
            levels: levels.clone(),
            bound: DecayBound::Fixed(int(1)),
        },
    )?;
    let certificate = ShuffleCertificate {
        levels,
        stages: done.iter().map(|s| s.certificate.clone()).collect(),
        final_check,
    };
    Ok(ShuffleRun {
        stages: done,
        model: current,
        certificate,
    })
}
