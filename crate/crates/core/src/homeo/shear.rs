//! Vertical shears driven by matched nests.
//!
//! Step `n` multiplies every hair over a level-`n` block of the `X` nest by
//! that block's recorded ratio `eta`. Below the bump of the current model the
//! column `{x} × [0, 1]` is scaled by `eta`; above it the column is mapped
//! linearly onto the remaining segment, so `y = 0` and `y = 1` stay fixed.

use std::ops::Range;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::bump::PartitionBump;
use crate::cantor::Interval;
use crate::error::{Error, Result};
use crate::hair::LengthModel;
use crate::matching::MatchedNestPair;
use crate::rational::{int, pow2_inv, rat, serde_rational, serde_rational_vec, Rational};

/// Piecewise-constant factor of one step: the recorded ratio on each block of
/// the `X` nest, 1 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaFunction {
    level: usize,
    hulls: Vec<Interval>,
    leaves: Vec<Range<usize>>,
    values: Vec<Rational>,
}

impl EtaFunction {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.leaves
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let pos = self.hulls.partition_point(|h| h.hi < *x);
        match self.hulls.get(pos) {
            Some(h) if h.contains_point(x) => self.values[pos].clone(),
            _ => Rational::one(),
        }
    }
}

/// The step-`n` factor of `pair`, checked to lie strictly within
/// `1 ± 2^-(n+1)`.
pub fn make_eta(pair: &MatchedNestPair, n: usize) -> Result<EtaFunction> {
    if n == 0 || n > pair.levels() {
        return Err(Error::Domain(format!("level {n} is not in 1..={}", pair.levels())));
    }
    let xs = pair.x_level(n);
    for (side, parent) in [("X", pair.x_level(n - 1)), ("Y", pair.y_level(n - 1))] {
        if let Some(j) = parent.maxima.iter().position(Zero::is_zero) {
            return Err(Error::Contract(format!(
                "level {}: {side} block {j} has maximum zero",
                n - 1
            )));
        }
    }
    let delta = pow2_inv(n as u32 + 1);
    let one = Rational::one();
    for (i, r) in pair.ratios(n).iter().enumerate() {
        let dev = if *r > one { r - &one } else { &one - r };
        if dev >= delta {
            return Err(Error::Contract(format!(
                "level {n}: factor {r} of block {i} is not within 1 ± {delta}"
            )));
        }
    }
    Ok(EtaFunction {
        level: n,
        hulls: (0..xs.len()).map(|i| pair.x_hull(n, i)).collect(),
        leaves: xs.blocks.clone(),
        values: pair.ratios(n).to_vec(),
    })
}

/// Image of height `y` in a column with factor `eta` and bump value `b`.
pub fn shear_column(y: &Rational, eta: &Rational, b: &Rational) -> Rational {
    if y <= b {
        eta * y
    } else {
        let one = Rational::one();
        &one - (&one - eta * b) / (&one - b) * (&one - y)
    }
}

/// Inverse of [`shear_column`] for the same `eta` and `b`.
pub fn unshear_column(y: &Rational, eta: &Rational, b: &Rational) -> Rational {
    let knot = eta * b;
    if *y <= knot {
        y / eta
    } else {
        let one = Rational::one();
        &one - (&one - b) / (&one - &knot) * (&one - y)
    }
}

fn in_unit_square(x: &Rational, y: &Rational) -> bool {
    let (zero, one) = (Rational::zero(), Rational::one());
    *x >= zero && *x <= one && *y >= zero && *y <= one
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerticalShear {
    pub level: usize,
    pub bump: PartitionBump,
    pub eta: EtaFunction,
}

impl VerticalShear {
    pub fn apply(&self, (x, y): &(Rational, Rational)) -> (Rational, Rational) {
        if !in_unit_square(x, y) {
            return (x.clone(), y.clone());
        }
        (x.clone(), shear_column(y, &self.eta.eval(x), &self.bump.eval(x)))
    }

    pub fn apply_inverse(&self, (x, y): &(Rational, Rational)) -> (Rational, Rational) {
        if !in_unit_square(x, y) {
            return (x.clone(), y.clone());
        }
        (x.clone(), unshear_column(y, &self.eta.eval(x), &self.bump.eval(x)))
    }

    /// Smallest slope of any column map, over every `(eta, bump)` pair the
    /// shear uses.
    pub fn min_slope(&self) -> Rational {
        let one = Rational::one();
        let mut min = one.clone();
        for (bump, eta) in self.bump.bumps().iter().zip(&self.eta.values) {
            let mut levels: Vec<&Rational> = bump.envelope().iter().collect();
            levels.sort();
            levels.dedup();
            for b in levels {
                let above = (&one - eta * b) / (&one - b);
                min = min.min(eta.clone()).min(above);
            }
        }
        min
    }
}

/// `H_n ∘ ... ∘ H_1`, with each hair's cumulative factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedVerticalMap {
    shears: Vec<VerticalShear>,
    factors: Vec<Rational>,
}

impl ComposedVerticalMap {
    pub fn shears(&self) -> &[VerticalShear] {
        &self.shears
    }

    /// Product of all step factors on each deepest interval.
    pub fn factors(&self) -> &[Rational] {
        &self.factors
    }

    pub fn apply(&self, p: &(Rational, Rational)) -> (Rational, Rational) {
        self.shears.iter().fold(p.clone(), |q, h| h.apply(&q))
    }

    pub fn apply_inverse(&self, p: &(Rational, Rational)) -> (Rational, Rational) {
        self.shears.iter().rev().fold(p.clone(), |q, h| h.apply_inverse(&q))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub level: usize,
    /// Largest `|phi_n(p) - phi_{n-1}(p)|` over the sample points.
    #[serde(with = "serde_rational")]
    pub max_displacement: Rational,
    #[serde(with = "serde_rational")]
    pub displacement_bound: Rational,
    #[serde(with = "serde_rational")]
    pub min_slope: Rational,
    #[serde(with = "serde_rational")]
    pub slope_bound: Rational,
    /// Largest hair after the step; stays at 1/2.
    #[serde(with = "serde_rational")]
    pub peak: Rational,
}

impl StepReport {
    pub fn passed(&self) -> bool {
        self.max_displacement <= self.displacement_bound
            && self.min_slope >= self.slope_bound
            && self.peak == rat(1, 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub grid: usize,
    pub tips: usize,
    pub steps: Vec<StepReport>,
    /// `prod_{k <= n} (1 - 2^-k)` for `n = 1..=N`.
    #[serde(with = "serde_rational_vec")]
    pub lipschitz: Vec<Rational>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.steps.iter().all(StepReport::passed)
    }
}

/// Side length of the sample grid used by [`compose_and_bound`].
pub const GRID: usize = 200;

/// Composes the first `n` shears of `pair` acting on `lx`, after scaling
/// `lx` so its maximum is 1/2, and checks every step on a `GRID × GRID` grid
/// of the unit square plus all hair tips.
pub fn compose_and_bound(pair: &MatchedNestPair, lx: &LengthModel, n: usize) -> Result<(ComposedVerticalMap, BoundReport)> {
    if n > pair.levels() {
        return Err(Error::Domain(format!("pair has only {} levels", pair.levels())));
    }
    if lx.cantor() != pair.cantor() {
        return Err(Error::Contract("model and pair use different Cantor approximations".into()));
    }
    let top = lx.interval_max(0, 0).clone();
    if top.is_zero() {
        return Err(Error::Contract("model has maximum zero".into()));
    }
    let scale = rat(1, 2) / top;
    let normalized = lx.scaled(&scale)?;
    let mut current: Vec<Rational> = normalized.values().to_vec();
    let mut factors = vec![Rational::one(); current.len()];

    let step = int(1) / int(GRID as i64 - 1);
    let mut points: Vec<(Rational, Rational)> = Vec::with_capacity(GRID * GRID + current.len());
    for i in 0..GRID {
        for j in 0..GRID {
            points.push((&step * int(i as i64), &step * int(j as i64)));
        }
    }
    let leaves = lx.cantor().leaves();
    let tips = leaves.len();
    for (leaf, v) in leaves.iter().zip(&current) {
        points.push((leaf.midpoint(), v.clone()));
    }

    let mut shears = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);
    for k in 1..=n {
        let eta = make_eta(pair, k)?;
        let model = normalized.with_values(current.clone())?;
        let bump = PartitionBump::new(&model, &pair.x_level(k).blocks)?;
        let shear = VerticalShear { level: k, bump, eta };
        let mut max_displacement = Rational::zero();
        for p in points.iter_mut() {
            let q = shear.apply(p);
            let d = if q.1 > p.1 { &q.1 - &p.1 } else { &p.1 - &q.1 };
            if d > max_displacement {
                max_displacement = d;
            }
            *p = q;
        }
        for (block, eta) in shear.eta.leaves.iter().zip(&shear.eta.values) {
            for t in block.clone() {
                current[t] *= eta;
                factors[t] *= eta;
            }
        }
        steps.push(StepReport {
            level: k,
            max_displacement,
            displacement_bound: pow2_inv(k as u32),
            min_slope: shear.min_slope(),
            slope_bound: int(1) - pow2_inv(k as u32),
            peak: current.iter().max().cloned().unwrap_or_else(Rational::zero),
        });
        shears.push(shear);
    }

    // tips must land on the transferred heights
    for (t, p) in points[GRID * GRID..].iter().enumerate() {
        if p.1 != current[t] {
            return Err(Error::Contract(format!("hair {t} is not carried to its transferred tip")));
        }
    }

    Ok((
        ComposedVerticalMap { shears, factors },
        BoundReport {
            grid: GRID,
            tips,
            steps,
            lipschitz: lipschitz_products(n),
        },
    ))
}

fn lipschitz_products(n: usize) -> Vec<Rational> {
    let mut acc = Rational::one();
    (1..=n)
        .map(|k| {
            acc *= int(1) - pow2_inv(k as u32);
            acc.clone()
        })
        .collect()
}

/// Partial products `prod_{k <= n} (1 - 2^-k)` for `n = 1..=count`, computed
/// exactly and rounded once.
pub fn injectivity_products(count: usize) -> Vec<f64> {
    lipschitz_products(count).iter().map(crate::rational::to_f64).collect()
}

/// Length model of `phi_n(X)`: on each level-`n` block of the `X` nest, `lx`
/// times the ratio of the recorded `Y` and `X` maxima.
pub fn transfer_length(pair: &MatchedNestPair, n: usize, lx: &LengthModel) -> Result<LengthModel> {
    if n > pair.levels() {
        return Err(Error::Domain(format!("pair has only {} levels", pair.levels())));
    }
    if lx.cantor() != pair.cantor() {
        return Err(Error::Contract("model and pair use different Cantor approximations".into()));
    }
    // telescoping product of the step factors from level 0
    let root = &pair.y_level(0).maxima[0] / &pair.x_level(0).maxima[0];
    let mut factor = vec![root; lx.cantor().leaf_count()];
    for k in 1..=n {
        let eta = make_eta(pair, k)?;
        for (block, e) in eta.leaves.iter().zip(&eta.values) {
            for t in block.clone() {
                factor[t] *= e;
            }
        }
    }
    let values = lx.values().iter().zip(&factor).map(|(v, f)| v * f).collect();
    lx.with_values(values)
}
