//! Length functions on finite Cantor approximations.
//!
//! A [`LengthModel`] stores one exact value per deepest interval (the finite
//! stand-in for `l` on the points of `C` inside that interval) together with
//! the interval maxima `Max(l, I)` at every level.

use std::ops::Range;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cantor::{Address, CantorApprox, CantorJson, Interval, Layout, Scheme};
use crate::error::{Error, Result};
use crate::rational::{int, rat, serde_rational, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct LengthModel {
    cantor: Arc<CantorApprox>,
    values: Vec<Rational>,
    interval_max: Vec<Vec<Rational>>,
}

/// A point `(x, y)` of a hair, `0 <= y <= l(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HairPoint {
    pub leaf: usize,
    pub y: Rational,
}

impl LengthModel {
    /// Builds a model from one value per deepest interval, computing the
    /// interval maxima bottom-up.
    pub fn from_leaf_values(cantor: Arc<CantorApprox>, values: Vec<Rational>) -> Result<Self> {
        if values.len() != cantor.leaf_count() {
            return Err(Error::Contract(format!(
                "{} values for {} deepest intervals",
                values.len(),
                cantor.leaf_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| v.is_negative()) {
            return Err(Error::Contract(format!("negative length at leaf {i}")));
        }
        let interval_max = compute_interval_max(&cantor, &values);
        Ok(LengthModel {
            cantor,
            values,
            interval_max,
        })
    }

    /// Assembles a model without recomputing the maxima. Use
    /// [`LengthModel::validate`] to check it.
    pub fn from_raw_parts(
        cantor: Arc<CantorApprox>,
        values: Vec<Rational>,
        interval_max: Vec<Vec<Rational>>,
    ) -> Self {
        LengthModel {
            cantor,
            values,
            interval_max,
        }
    }

    /// The canonical example: `l_n(x) = prod_j (1 - |i_j / j - 1|)` along the
    /// address of each deepest interval.
    pub fn canonical(depth: usize) -> Result<Self> {
        let cantor = Arc::new(CantorApprox::build(Scheme::Canonical, depth)?);
        let mut current = vec![int(1)];
        for level in 1..=depth {
            let b = Scheme::Canonical.branching(level);
            let factors: Vec<Rational> = (1..=b as i64).map(|i| canonical_factor(i, level as i64)).collect();
            current = current
                .iter()
                .flat_map(|v| factors.iter().map(move |f| v * f))
                .collect();
        }
        Self::from_leaf_values(cantor, current)
    }

    pub fn cantor(&self) -> &CantorApprox {
        &self.cantor
    }

    pub fn cantor_arc(&self) -> &Arc<CantorApprox> {
        &self.cantor
    }

    pub fn depth(&self) -> usize {
        self.cantor.depth()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, leaf: usize) -> &Rational {
        &self.values[leaf]
    }

    pub fn interval_max(&self, level: usize, index: usize) -> &Rational {
        &self.interval_max[level][index]
    }

    pub fn level_maxima(&self, level: usize) -> &[Rational] {
        &self.interval_max[level]
    }

    pub fn point_value(&self, address: &Address) -> Result<&Rational> {
        if address.len() != self.depth() {
            return Err(Error::Address(format!(
                "{address} does not have length {}",
                self.depth()
            )));
        }
        Ok(&self.values[self.cantor.address_index(address)?])
    }

    /// Same Cantor set, values multiplied by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        Self::from_leaf_values(
            self.cantor.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// Same Cantor set, values replaced leaf by leaf.
    pub fn with_values(&self, values: Vec<Rational>) -> Result<Self> {
        Self::from_leaf_values(self.cantor.clone(), values)
    }

    /// Leftmost maximum over the leaves in `range`.
    pub fn max_in_leaves(&self, range: Range<usize>) -> (Rational, usize) {
        leftmost_max(&self.values, range)
    }

    /// `Max(l, I)` over the deepest intervals contained in `interval`, with the
    /// leftmost maximizing leaf.
    pub fn max_over(&self, interval: &Interval) -> Result<(Rational, usize)> {
        let leaves = self.cantor.leaves();
        let start = leaves.partition_point(|iv| iv.lo < interval.lo);
        let end = leaves.partition_point(|iv| iv.hi <= interval.hi);
        if start >= end {
            return Err(Error::Domain(format!(
                "{interval} contains no level-{} interval",
                self.depth()
            )));
        }
        Ok(self.max_in_leaves(start..end))
    }

    /// Checks non-negativity and that each stored maximum equals the maximum
    /// over its children.
    pub fn validate(&self) -> Result<()> {
        let recomputed = compute_interval_max(&self.cantor, &self.values);
        if self.values.iter().any(|v| v.is_negative()) {
            return Err(Error::Contract("negative length value".into()));
        }
        for (level, (stored, fresh)) in self.interval_max.iter().zip(&recomputed).enumerate() {
            if let Some(i) = stored.iter().zip(fresh).position(|(a, b)| a != b) {
                return Err(Error::Contract(format!(
                    "interval maximum at level {level}, index {i} is {} but its children give {}",
                    stored[i], fresh[i]
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> HairJson {
        HairJson {
            cantor: self.cantor.to_json(),
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| AddressValue {
                    address: self.cantor.index_to_address(self.depth(), i),
                    l: v.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &HairJson) -> Result<Self> {
        let cantor = Arc::new(CantorApprox::from_json(&json.cantor)?);
        let mut values: Vec<Option<Rational>> = vec![None; cantor.leaf_count()];
        for entry in &json.values {
            if entry.address.len() != cantor.depth() {
                return Err(Error::Parse(format!(
                    "address {} does not reach depth {}",
                    entry.address,
                    cantor.depth()
                )));
            }
            let i = cantor.address_index(&entry.address)?;
            if values[i].replace(entry.l.clone()).is_some() {
                return Err(Error::Parse(format!("address {} listed twice", entry.address)));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    Error::Parse(format!(
                        "missing value for address {}",
                        cantor.index_to_address(cantor.depth(), i)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_leaf_values(cantor, values)
    }
}

fn compute_interval_max(cantor: &CantorApprox, values: &[Rational]) -> Vec<Vec<Rational>> {
    let depth = cantor.depth();
    let mut levels = vec![Vec::new(); depth + 1];
    levels[depth] = values.to_vec();
    for level in (0..depth).rev() {
        let b = cantor.scheme().branching(level + 1);
        levels[level] = levels[level + 1]
            .chunks(b)
            .map(|children| children.iter().max().cloned().unwrap_or_else(Rational::zero))
            .collect();
    }
    levels
}

pub(crate) fn leftmost_max(values: &[Rational], range: Range<usize>) -> (Rational, usize) {
    let mut best = range.start;
    for i in range {
        if values[i] > values[best] {
            best = i;
        }
    }
    (values[best].clone(), best)
}

/// `1 - |i/j - 1|`
fn canonical_factor(i: i64, j: i64) -> Rational {
    int(1) - (rat(i, j) - int(1)).abs()
}

/// `l_n` at a canonical address of length `n`, exactly.
pub fn canonical_length(address: &Address) -> Result<Rational> {
    address.validate(Scheme::Canonical)?;
    Ok(address
        .entries()
        .iter()
        .enumerate()
        .fold(int(1), |acc, (j, &i)| acc * canonical_factor(i as i64, j as i64 + 1)))
}

/// A continuous piecewise-linear function, constant outside its vertex range.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    vertices: Vec<(Rational, Rational)>,
}

impl PiecewiseLinear {
    /// Vertices must be sorted by `x`; repeated `x` values must repeat `y`.
    pub fn new(vertices: Vec<(Rational, Rational)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Contract("piecewise-linear function without vertices".into()));
        }
        for w in vertices.windows(2) {
            if w[0].0 > w[1].0 || (w[0].0 == w[1].0 && w[0].1 != w[1].1) {
                return Err(Error::Contract(format!(
                    "vertices ({}, {}) and ({}, {}) are out of order",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(PiecewiseLinear { vertices })
    }

    pub fn vertices(&self) -> &[(Rational, Rational)] {
        &self.vertices
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let v = &self.vertices;
        let pos = v.partition_point(|(vx, _)| vx <= x);
        if pos == 0 {
            return v[0].1.clone();
        }
        if pos == v.len() {
            return v[v.len() - 1].1.clone();
        }
        let (x0, y0) = &v[pos - 1];
        let (x1, y1) = &v[pos];
        if x0 == x {
            return y0.clone();
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// `l_n` on the real line: the product recursion on kept intervals, linear
/// across gaps, constant outside `[0, 1]`.
pub fn canonical_graph(n: usize) -> Result<PiecewiseLinear> {
    canonical_graph_in(Layout::TrueCantor, n)
}

/// [`canonical_graph`] with the kept intervals placed by `layout`.
pub fn canonical_graph_in(layout: Layout, n: usize) -> Result<PiecewiseLinear> {
    if n == 0 {
        return Err(Error::Domain("graph depth must be at least 1".into()));
    }
    let model = LengthModel::canonical(n)?;
    plateau_graph(&model.cantor().layout_level(layout, n), model.values())
}

/// Piecewise-linear function taking `values[i]` on `intervals[i]` and
/// interpolating linearly across the gaps.
pub fn plateau_graph(intervals: &[Interval], values: &[Rational]) -> Result<PiecewiseLinear> {
    let mut vertices = Vec::with_capacity(2 * intervals.len());
    for (iv, v) in intervals.iter().zip(values) {
        vertices.push((iv.lo.clone(), v.clone()));
        if iv.hi != iv.lo {
            vertices.push((iv.hi.clone(), v.clone()));
        }
    }
    PiecewiseLinear::new(vertices)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UscReport {
    /// `Max(l, I_k)` for the prefixes `k = 0..=depth`.
    #[serde(with = "crate::rational::serde_rational_vec")]
    pub sequence: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub point_value: Rational,
    /// First level whose maximum exceeds its parent's, or where the final
    /// term differs from the point value.
    pub first_violation: Option<usize>,
    pub passed: bool,
}

/// Follows the prefixes of `address` and reports the nested interval maxima.
pub fn check_usc_limit(model: &LengthModel, address: &Address) -> Result<UscReport> {
    let depth = model.depth();
    if address.len() != depth {
        return Err(Error::Contract(format!(
            "address {address} must have length {depth}"
        )));
    }
    let cantor = model.cantor();
    let mut sequence = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let idx = cantor.address_index(&address.prefix(k))?;
        sequence.push(model.interval_max(k, idx).clone());
    }
    let point_value = model.point_value(address)?.clone();
    let mut first_violation = (1..=depth).find(|&k| sequence[k] > sequence[k - 1]);
    if first_violation.is_none() && sequence[depth] != point_value {
        first_violation = Some(depth);
    }
    Ok(UscReport {
        passed: first_violation.is_none(),
        sequence,
        point_value,
        first_violation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakStats {
    #[serde(with = "serde_rational")]
    pub sup: Rational,
    /// Largest gap between consecutive distinct values, with 0 and `sup`
    /// included as anchors.
    #[serde(with = "serde_rational")]
    pub max_gap: Rational,
}

pub fn peak_density_stats(model: &LengthModel) -> PeakStats {
    let mut distinct: Vec<Rational> = model.values().to_vec();
    distinct.push(Rational::zero());
    distinct.sort();
    distinct.dedup();
    let sup = distinct.last().cloned().unwrap_or_else(Rational::zero);
    let max_gap = distinct
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .max()
        .unwrap_or_else(Rational::zero);
    PeakStats { sup, max_gap }
}

/// How fast the witness quantities of [`check_shcs_definition`] must decay.
#[derive(Debug, Clone, PartialEq)]
pub enum DecayBound {
    /// Witness at stage `s` must be at most `C / s`, with
    /// `C = stage * witness(stage)`.
    Calibrated { stage: usize },
    /// Witness at stage `s` must be at most `C / s` for the given `C`.
    Fixed(Rational),
}

/// Which levels act as parent/child pairs in [`check_shcs_definition`].
///
/// Stage `s` (1-based) compares intervals of level `levels[s - 1]` with their
/// descendants at level `levels[s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSchedule {
    pub levels: Vec<usize>,
    pub bound: DecayBound,
}

impl CheckSchedule {
    /// Every level is a stage, calibrated at stage 3.
    pub fn every_level(depth: usize) -> Self {
        CheckSchedule {
            levels: (0..=depth).collect(),
            bound: DecayBound::Calibrated { stage: 3 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityCheck {
    pub passed: bool,
    pub zero_leaves: usize,
    /// Leftmost deepest interval whose value is zero.
    pub first_zero: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub level: usize,
    pub index: usize,
    pub address: Address,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageWitness {
    pub stage: usize,
    pub parent_level: usize,
    pub child_level: usize,
    #[serde(with = "serde_rational")]
    pub witness: Rational,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub at: Option<Witness>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCheck {
    #[serde(with = "serde_rational")]
    pub constant: Rational,
    pub stages: Vec<StageWitness>,
    pub first_failure: Option<usize>,
}

impl DecayCheck {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShcsReport {
    /// (i): positive values are present in every deepest interval.
    pub positivity: PositivityCheck,
    /// (ii): maxima of first/last children decay.
    pub endpoint_decay: DecayCheck,
    /// (iii): an interior maximizing child is matched by its neighbours up to
    /// a decaying gap.
    pub two_sided: DecayCheck,
}

impl ShcsReport {
    pub fn passed(&self) -> bool {
        self.positivity.passed && self.endpoint_decay.passed() && self.two_sided.passed()
    }
}

/// Finite-depth verdicts for the three defining properties of a straight
/// hairy Cantor set.
pub fn check_shcs_definition(model: &LengthModel, schedule: &CheckSchedule) -> Result<ShcsReport> {
    let cantor = model.cantor();
    let levels = &schedule.levels;
    if levels.first() != Some(&0)
        || levels.windows(2).any(|w| w[0] >= w[1])
        || levels.last().is_some_and(|&l| l > model.depth())
    {
        return Err(Error::Contract(format!(
            "schedule levels {levels:?} must increase from 0 up to at most {}",
            model.depth()
        )));
    }
    if let DecayBound::Calibrated { stage } = schedule.bound {
        if stage == 0 || stage >= levels.len() {
            return Err(Error::Contract(format!(
                "calibration stage {stage} needs a schedule with at least {} levels",
                stage + 1
            )));
        }
    }

    let witness_at = |level: usize, index: usize| Witness {
        level,
        index,
        address: cantor.index_to_address(level, index),
        interval: cantor.level(level)[index].clone(),
    };

    let depth = model.depth();
    let zero_leaves: Vec<usize> = (0..cantor.leaf_count())
        .filter(|&i| model.value(i).is_zero())
        .collect();
    let positivity = PositivityCheck {
        passed: zero_leaves.is_empty(),
        zero_leaves: zero_leaves.len(),
        first_zero: zero_leaves.first().map(|&i| witness_at(depth, i)),
    };

    let mut boundary = Vec::new();
    let mut interior = Vec::new();
    for s in 1..levels.len() {
        let (pl, cl) = (levels[s - 1], levels[s]);
        let mut worst_b: (Rational, Option<(usize, usize)>) = (Rational::zero(), None);
        let mut worst_i: (Rational, Option<(usize, usize)>) = (Rational::zero(), None);
        for parent in 0..cantor.level(pl).len() {
            let kids = cantor.descendant_range(pl, parent, cl);
            let maxima = model.level_maxima(cl);
            for edge in [kids.start, kids.end - 1] {
                if worst_b.1.is_none() || maxima[edge] > worst_b.0 {
                    worst_b = (maxima[edge].clone(), Some((cl, edge)));
                }
            }
            let (top, arg) = leftmost_max(maxima, kids.clone());
            if arg != kids.start && arg != kids.end - 1 {
                let gap = (&top - &maxima[arg - 1]).max(&top - &maxima[arg + 1]);
                if worst_i.1.is_none() || gap > worst_i.0 {
                    worst_i = (gap, Some((cl, arg)));
                }
            }
        }
        boundary.push((s, pl, cl, worst_b));
        interior.push((s, pl, cl, worst_i));
    }

    // (stage, parent level, child level, (witness, (level, index) attaining it))
    type Row = (usize, usize, usize, (Rational, Option<(usize, usize)>));
    let finish = |rows: Vec<Row>| {
        let constant = match &schedule.bound {
            DecayBound::Fixed(c) => c.clone(),
            DecayBound::Calibrated { stage } => &rows[stage - 1].3 .0 * int(*stage as i64),
        };
        let stages: Vec<StageWitness> = rows
            .into_iter()
            .map(|(s, pl, cl, (w, at))| {
                let bound = &constant / int(s as i64);
                StageWitness {
                    stage: s,
                    parent_level: pl,
                    child_level: cl,
                    passed: w <= bound,
                    witness: w,
                    bound,
                    at: at.map(|(l, i)| witness_at(l, i)),
                }
            })
            .collect();
        let first_failure = stages.iter().find(|w| !w.passed).map(|w| w.stage);
        DecayCheck {
            constant,
            stages,
            first_failure,
        }
    };

    Ok(ShcsReport {
        positivity,
        endpoint_decay: finish(boundary),
        two_sided: finish(interior),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AddressValue {
    pub address: Address,
    #[serde(with = "serde_rational")]
    pub l: Rational,
}

/// JSON hair-set form: `{"cantor": {..}, "values": [{"address": [..], "l": "p/q"}, ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HairJson {
    pub cantor: CantorJson,
    pub values: Vec<AddressValue>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(a: &[u32]) -> Address {
        Address::new(a.to_vec())
    }

    #[test]
    fn product_formula_spot_values() {
        assert_eq!(canonical_length(&addr(&[1, 2, 3, 4])).unwrap(), int(1));
        assert_eq!(canonical_length(&addr(&[1, 1, 1, 1])).unwrap(), rat(1, 24));
        assert_eq!(canonical_length(&addr(&[1, 1, 2, 3])).unwrap(), rat(1, 4));
        assert!(canonical_length(&addr(&[1, 4])).is_err());
        assert!(canonical_length(&addr(&[2])).is_err());
    }

    #[test]
    fn graph_plateaus_match_the_figure() {
        let l1 = canonical_graph(1).unwrap();
        assert_eq!(l1.eval(&rat(1, 3)), int(1));
        assert_eq!(l1.eval(&int(-5)), int(1));
        let l2 = canonical_graph(2).unwrap();
        assert_eq!(l2.eval(&rat(1, 2)), int(1));
        assert_eq!(l2.eval(&rat(1, 10)), rat(1, 2));
        assert_eq!(l2.eval(&int(0)), rat(1, 2));
        // linear across the gap (1/5, 2/5)
        assert_eq!(l2.eval(&rat(3, 10)), rat(3, 4));
        let l3 = canonical_graph(3).unwrap();
        assert_eq!(l3.eval(&rat(1, 10)), rat(1, 2));
        // the figure's own x-coordinates
        let fig3 = canonical_graph_in(Layout::AddressUniform, 3).unwrap();
        assert_eq!(fig3.eval(&rat(1, 8)), rat(1, 2));
        let fig2 = canonical_graph_in(Layout::AddressUniform, 2).unwrap();
        assert_eq!(fig2.vertices()[1], (rat(1, 4), rat(1, 2)));
        assert_eq!(fig2.vertices()[2], (rat(3, 8), int(1)));
        assert!(canonical_graph(0).is_err());
    }

    #[test]
    fn max_over_intervals() {
        let m = LengthModel::canonical(4).unwrap();
        let (v, leaf) = m.max_over(&Interval::new(int(0), int(1)).unwrap()).unwrap();
        assert_eq!(v, int(1));
        assert!(m.cantor().leaves()[leaf].contains_point(&rat(1, 2)));
        let (v, _) = m.max_over(&Interval::new(int(0), rat(1, 5)).unwrap()).unwrap();
        assert_eq!(v, rat(1, 2));
        let empty = Interval::new(rat(21, 100), rat(22, 100)).unwrap();
        assert!(matches!(m.max_over(&empty), Err(Error::Domain(_))));
    }

    #[test]
    fn usc_limit_reports() {
        let m = LengthModel::canonical(4).unwrap();
        let r = check_usc_limit(&m, &addr(&[1, 2, 3, 4])).unwrap();
        assert!(r.passed);
        assert_eq!(r.sequence, vec![int(1); 5]);
        let r = check_usc_limit(&m, &addr(&[1, 1, 1, 1])).unwrap();
        assert!(r.passed);
        assert_eq!(r.sequence.last().unwrap(), &rat(1, 24));

        let mut maxima: Vec<Vec<Rational>> = (0..=4).map(|k| m.level_maxima(k).to_vec()).collect();
        maxima[2][0] = int(2);
        let broken = LengthModel::from_raw_parts(m.cantor_arc().clone(), m.values().to_vec(), maxima);
        assert!(broken.validate().is_err());
        let r = check_usc_limit(&broken, &addr(&[1, 1, 1, 1])).unwrap();
        assert!(!r.passed);
        assert_eq!(r.first_violation, Some(2));
        assert!(check_usc_limit(&m, &addr(&[1, 1])).is_err());
    }

    #[test]
    fn peak_stats() {
        let m4 = LengthModel::canonical(4).unwrap();
        let m6 = LengthModel::canonical(6).unwrap();
        let s4 = peak_density_stats(&m4);
        let s6 = peak_density_stats(&m6);
        assert_eq!(s4.sup, int(1));
        assert!(s6.max_gap < s4.max_gap);
        let zero = m4.with_values(vec![int(0); 105]).unwrap();
        let s = peak_density_stats(&zero);
        assert_eq!((s.sup, s.max_gap), (int(0), int(0)));
    }

    #[test]
    fn endpoint_address_decays_factorially() {
        let m = LengthModel::canonical(7).unwrap();
        assert_eq!(m.point_value(&addr(&[1; 7])).unwrap(), &rat(1, 5040));
    }

    #[test]
    fn definition_checks_on_canonical_and_fixtures() {
        let m = LengthModel::canonical(6).unwrap();
        let schedule = CheckSchedule::every_level(6);
        let r = check_shcs_definition(&m, &schedule).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert_eq!(r.endpoint_decay.constant, int(1));
        for st in &r.endpoint_decay.stages {
            assert_eq!(st.witness, rat(1, st.stage as i64));
        }

        let mut zeroed = m.values().to_vec();
        let hole = m.cantor().address_index(&addr(&[1, 2, 3, 4, 5, 6])).unwrap();
        zeroed[hole] = int(0);
        let r = check_shcs_definition(&m.with_values(zeroed).unwrap(), &schedule).unwrap();
        assert!(!r.positivity.passed);
        assert_eq!(r.positivity.first_zero.as_ref().unwrap().index, hole);

        let mut spiked = m.values().to_vec();
        spiked[0] = int(1);
        let r = check_shcs_definition(&m.with_values(spiked).unwrap(), &schedule).unwrap();
        assert!(r.positivity.passed);
        assert!(!r.endpoint_decay.passed());
        let failing = &r.endpoint_decay.stages[r.endpoint_decay.first_failure.unwrap() - 1];
        assert_eq!(failing.at.as_ref().unwrap().index, 0);

        assert!(check_shcs_definition(&LengthModel::canonical(2).unwrap(), &CheckSchedule::every_level(2)).is_err());
    }

    #[test]
    fn hair_json_round_trip() {
        let m = LengthModel::canonical(3).unwrap();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let back: HairJson = serde_json::from_str(&text).unwrap();
        assert_eq!(LengthModel::from_json(&back).unwrap(), m);
        let mut missing = back.clone();
        missing.values.pop();
        assert!(LengthModel::from_json(&missing).is_err());
    }
}
