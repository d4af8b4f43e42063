//! SVG rendering of hair sets and CSV export/import of hair heights.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::cantor::{Address, CantorApprox, Layout, Scheme};
use crate::error::{Error, Result};
use crate::hair::{canonical_graph_in, LengthModel};
use crate::rational::{format_decimal, format_rational, int, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    /// Depths of the overlaid graphs `l_1, l_2, ...`.
    pub graph_depths: Vec<usize>,
    /// Stroke colors for the graphs, cycled if shorter than `graph_depths`.
    pub colors: Vec<String>,
    pub layout: Layout,
    /// Pixels per unit.
    pub scale: u32,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            graph_depths: vec![1, 2, 3, 4],
            colors: ["blue", "brown", "red", "green"].map(String::from).to_vec(),
            layout: Layout::TrueCantor,
            scale: 800,
        }
    }
}

const MARGIN: u32 = 20;

/// One black segment per deepest interval from `(x, 0)` to `(x, l(x))` at the
/// interval midpoint, with the canonical graphs of `spec.graph_depths`
/// drawn on top. Output bytes depend only on the inputs.
pub fn render_figure(model: &LengthModel, spec: &RenderSpec) -> Result<String> {
    if let Some(&d) = spec.graph_depths.iter().find(|&&d| d == 0 || d > model.depth()) {
        return Err(Error::Contract(format!(
            "graph depth {d} is outside 1..={}",
            model.depth()
        )));
    }
    if !spec.graph_depths.is_empty() && spec.colors.is_empty() {
        return Err(Error::Contract("graphs need at least one color".into()));
    }
    let scale = int(spec.scale as i64);
    let margin = int(MARGIN as i64);
    let px = |x: &Rational| format_decimal(&(&margin + x * &scale), 3);
    let py = |y: &Rational| format_decimal(&(&margin + (int(1) - y) * &scale), 3);
    let side = spec.scale + 2 * MARGIN;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{side}" height="{side}" viewBox="0 0 {side} {side}">"#
    );
    let _ = writeln!(out, r#"<g id="hairs" stroke="black" stroke-width="0.5">"#);
    let positions = model.cantor().layout_level(spec.layout, model.depth());
    for (iv, v) in positions.iter().zip(model.values()) {
        let x = px(&iv.midpoint());
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#,
            py(&int(0)),
            py(v)
        );
    }
    let _ = writeln!(out, "</g>");
    for (k, &d) in spec.graph_depths.iter().enumerate() {
        let graph = canonical_graph_in(spec.layout, d)?;
        let mut points = Vec::with_capacity(graph.vertices().len() + 2);
        let first = &graph.vertices()[0];
        let last = &graph.vertices()[graph.vertices().len() - 1];
        points.push(format!("{},{}", px(&int(0)), py(&first.1)));
        for (x, y) in graph.vertices() {
            points.push(format!("{},{}", px(x), py(y)));
        }
        points.push(format!("{},{}", px(&int(1)), py(&last.1)));
        let _ = writeln!(
            out,
            r#"<polyline id="graph-{d}" fill="none" stroke="{}" stroke-width="1" points="{}"/>"#,
            spec.colors[k % spec.colors.len()],
            points.join(" ")
        );
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

pub const HEIGHTS_HEADER: &str = "address,x_lo,x_hi,height,height_exact";

fn dotted(address: &Address) -> String {
    address
        .entries()
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(".")
}

/// One row per interval of `depth`: dotted address, exact endpoints, the
/// interval maximum to six decimals, and exactly.
pub fn export_heights(model: &LengthModel, depth: usize) -> Result<String> {
    if depth > model.depth() {
        return Err(Error::Domain(format!(
            "depth {depth} exceeds the model depth {}",
            model.depth()
        )));
    }
    let cantor = model.cantor();
    let mut out = String::from(HEIGHTS_HEADER);
    out.push('\n');
    for (i, (iv, h)) in cantor.level(depth).iter().zip(model.level_maxima(depth)).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            dotted(&cantor.index_to_address(depth, i)),
            format_rational(&iv.lo),
            format_rational(&iv.hi),
            format_decimal(h, 6),
            format_rational(h)
        );
    }
    Ok(out)
}

/// Rebuilds a model from [`export_heights`] output; rows must list every
/// interval of one level in order.
pub fn import_heights(csv: &str, scheme: Scheme) -> Result<LengthModel> {
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == HEIGHTS_HEADER => {}
        other => {
            return Err(Error::Parse(format!("expected header {HEIGHTS_HEADER:?}, found {other:?}")));
        }
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse(format!("row {}: expected 5 fields", n + 1)));
        }
        let address = if fields[0].is_empty() {
            Address::new(Vec::new())
        } else {
            Address::new(
                fields[0]
                    .split('.')
                    .map(|e| e.parse::<u32>().map_err(|_| Error::Parse(format!("row {}: bad address", n + 1))))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        rows.push((address, parse_rational(fields[1])?, parse_rational(fields[2])?, parse_rational(fields[4])?));
    }
    let depth = rows.first().map(|r| r.0.len()).ok_or_else(|| Error::Parse("no rows".into()))?;
    let cantor = Arc::new(CantorApprox::build(scheme, depth)?);
    if rows.len() != cantor.leaf_count() {
        return Err(Error::Parse(format!(
            "{} rows for {} intervals at depth {depth}",
            rows.len(),
            cantor.leaf_count()
        )));
    }
    let mut values = Vec::with_capacity(rows.len());
    for (i, (address, lo, hi, h)) in rows.into_iter().enumerate() {
        let iv = &cantor.leaves()[i];
        if address != cantor.index_to_address(depth, i) || lo != iv.lo || hi != iv.hi {
            return Err(Error::Parse(format!("row {} does not match interval {address}", i + 1)));
        }
        values.push(h);
    }
    LengthModel::from_leaf_values(cantor, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::random_cascade;

    #[test]
    fn figure_has_one_segment_per_hair_and_is_deterministic() {
        let l = LengthModel::canonical(4).unwrap();
        let spec = RenderSpec::default();
        let a = render_figure(&l, &spec).unwrap();
        assert_eq!(a.matches("<line ").count(), 105);
        assert_eq!(a.matches("<polyline ").count(), 4);
        for c in ["blue", "brown", "red", "green"] {
            assert!(a.contains(&format!("stroke=\"{c}\"")));
        }
        assert_eq!(a, render_figure(&l, &spec).unwrap());
        let too_deep = RenderSpec { graph_depths: vec![5], ..RenderSpec::default() };
        assert!(render_figure(&l, &too_deep).is_err());
    }

    #[test]
    fn uniform_layout_puts_the_tallest_hair_at_one_half() {
        let l = LengthModel::canonical(4).unwrap();
        let spec = RenderSpec { layout: Layout::AddressUniform, scale: 1000, ..RenderSpec::default() };
        let svg = render_figure(&l, &spec).unwrap();
        // x = 20 + 0.5 * 1000, tip at y = 1
        assert!(svg.contains(r#"<line x1="520.000" y1="1020.000" x2="520.000" y2="20.000"/>"#));
    }

    #[test]
    fn heights_csv_rows() {
        let l = LengthModel::canonical(4).unwrap();
        let csv = export_heights(&l, 4).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], HEIGHTS_HEADER);
        assert_eq!(lines.len(), 106);
        assert!(lines[1].starts_with("1.1.1.1,"));
        assert!(lines[1].ends_with(",0.041667,1/24"));
        let shallow = export_heights(&l, 1).unwrap();
        assert_eq!(shallow.lines().nth(1), Some("1,0/1,1/1,1.000000,1/1"));
        assert!(export_heights(&l, 5).is_err());
    }

    #[test]
    fn heights_round_trip() {
        let l = LengthModel::canonical(4).unwrap();
        assert_eq!(import_heights(&export_heights(&l, 4).unwrap(), Scheme::Canonical).unwrap(), l);
        let r = random_cascade(Scheme::MiddleThird, 5, 9).unwrap();
        assert_eq!(import_heights(&export_heights(&r, 5).unwrap(), Scheme::MiddleThird).unwrap(), r);
        assert!(import_heights("address,x\n", Scheme::Canonical).is_err());
    }
}
