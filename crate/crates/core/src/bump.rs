//! Bump functions: the running-max envelope of a length model over an
//! interval, rising to the maximizer and falling after it.
//!
//! At finite depth a bump is a step function over the deepest intervals
//! inside its interval. In a gap the envelope keeps the value of the
//! neighbor on the far side from the maximizer, so it stays monotone on both
//! sides.

use std::fmt::Write as _;
use std::ops::Range;

use num_traits::Zero;

use crate::cantor::Interval;
use crate::error::{Error, Result};
use crate::hair::{leftmost_max, LengthModel};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct BumpFunction {
    interval: Interval,
    /// Deepest intervals covered, left to right.
    pieces: Vec<Interval>,
    /// Position of the maximizer within `pieces`.
    maximizer: usize,
    source: Vec<Rational>,
    envelope: Vec<Rational>,
}

impl BumpFunction {
    /// Assembles a bump from explicit data without recomputing the envelope.
    /// Used for hand-built fixtures; [`verify_bump`] checks the result.
    pub fn from_parts(
        pieces: Vec<Interval>,
        maximizer: usize,
        source: Vec<Rational>,
        envelope: Vec<Rational>,
    ) -> Result<Self> {
        if pieces.is_empty() || pieces.len() != source.len() || pieces.len() != envelope.len() {
            return Err(Error::Contract("bump data must be non-empty and of equal lengths".into()));
        }
        if maximizer >= pieces.len() {
            return Err(Error::Contract(format!("maximizer {maximizer} out of range")));
        }
        if pieces.windows(2).any(|w| w[0].hi > w[1].lo) {
            return Err(Error::Contract("bump pieces must be sorted and disjoint".into()));
        }
        let interval = Interval::new(pieces[0].lo.clone(), pieces[pieces.len() - 1].hi.clone())?;
        Ok(BumpFunction {
            interval,
            pieces,
            maximizer,
            source,
            envelope,
        })
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn maximizer(&self) -> &Interval {
        &self.pieces[self.maximizer]
    }

    pub fn maximizer_position(&self) -> usize {
        self.maximizer
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn envelope(&self) -> &[Rational] {
        &self.envelope
    }

    pub fn source(&self) -> &[Rational] {
        &self.source
    }

    pub fn max(&self) -> &Rational {
        &self.envelope[self.maximizer]
    }

    /// `(x, value)` at both ends of every piece, left to right.
    pub fn breakpoints(&self) -> Vec<(Rational, Rational)> {
        self.pieces
            .iter()
            .zip(&self.envelope)
            .flat_map(|(p, v)| [(p.lo.clone(), v.clone()), (p.hi.clone(), v.clone())])
            .collect()
    }

    /// Value at `x`, or `None` outside the bump's interval.
    pub fn eval(&self, x: &Rational) -> Option<&Rational> {
        if !self.interval.contains_point(x) {
            return None;
        }
        // first piece whose right end is >= x
        let pos = self.pieces.partition_point(|p| p.hi < *x);
        let pos = pos.min(self.pieces.len() - 1);
        if self.pieces[pos].lo <= *x {
            return Some(&self.envelope[pos]);
        }
        // x sits in the gap before `pos`
        if pos <= self.maximizer {
            Some(&self.envelope[pos - 1])
        } else {
            Some(&self.envelope[pos])
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.breakpoints() {
            let _ = writeln!(out, "{},{}", format_rational(&x), format_rational(&v));
        }
        out
    }
}

/// Envelope of `values` rising to `m` and falling after it.
pub fn envelope(values: &[Rational], m: usize) -> Vec<Rational> {
    let mut out = values.to_vec();
    for i in 1..=m {
        if out[i] < out[i - 1] {
            out[i] = out[i - 1].clone();
        }
    }
    for i in (m..values.len().saturating_sub(1)).rev() {
        if out[i] < out[i + 1] {
            out[i] = out[i + 1].clone();
        }
    }
    out
}

/// Bump of `model` over the deepest intervals in `leaves`, anchored at the
/// deepest interval `m`.
pub fn bump_over_leaves(model: &LengthModel, leaves: Range<usize>, m: usize) -> Result<BumpFunction> {
    if leaves.is_empty() {
        return Err(Error::Domain("a bump needs at least one deepest interval".into()));
    }
    if !leaves.contains(&m) {
        return Err(Error::Contract(format!("maximizer {m} lies outside {leaves:?}")));
    }
    let (max, _) = leftmost_max(model.values(), leaves.clone());
    if model.values()[m] != max {
        return Err(Error::Contract(format!(
            "deepest interval {m} has value {} below the maximum {max}",
            model.values()[m]
        )));
    }
    let source = model.values()[leaves.clone()].to_vec();
    let local = m - leaves.start;
    let env = envelope(&source, local);
    let pieces = model.cantor().leaves()[leaves].to_vec();
    let interval = Interval::new(pieces[0].lo.clone(), pieces[pieces.len() - 1].hi.clone())?;
    Ok(BumpFunction {
        interval,
        pieces,
        maximizer: local,
        source,
        envelope: env,
    })
}

/// Bump over the deepest intervals contained in `interval`, anchored at the
/// deepest interval `m`.
pub fn make_bump(model: &LengthModel, interval: &Interval, m: usize) -> Result<BumpFunction> {
    bump_over_leaves(model, leaves_in(model, interval)?, m)
}

/// [`make_bump`] anchored at the leftmost maximizer.
pub fn make_bump_leftmost(model: &LengthModel, interval: &Interval) -> Result<BumpFunction> {
    let leaves = leaves_in(model, interval)?;
    let (_, m) = model.max_in_leaves(leaves.clone());
    bump_over_leaves(model, leaves, m)
}

fn leaves_in(model: &LengthModel, interval: &Interval) -> Result<Range<usize>> {
    let leaves = model.cantor().leaves();
    let start = leaves.partition_point(|l| l.lo < interval.lo);
    let end = leaves.partition_point(|l| l.hi <= interval.hi);
    if start >= end {
        return Err(Error::Domain(format!(
            "no deepest interval lies inside [{}, {}]",
            interval.lo, interval.hi
        )));
    }
    Ok(start..end)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpReport {
    /// First position where the envelope breaks monotonicity, with a
    /// description.
    pub inversion: Option<(usize, String)>,
    /// First position where the envelope falls below the source value.
    pub undercut: Option<usize>,
    pub max_matches: bool,
    /// Largest jump between consecutive envelope values.
    pub max_jump: Rational,
    /// Largest jump between consecutive source values.
    pub source_max_jump: Rational,
}

impl BumpReport {
    pub fn monotone(&self) -> bool {
        self.inversion.is_none()
    }

    pub fn continuity_ok(&self) -> bool {
        self.max_jump <= self.source_max_jump
    }

    pub fn passed(&self) -> bool {
        self.monotone() && self.undercut.is_none() && self.max_matches && self.continuity_ok()
    }
}

pub fn verify_bump(b: &BumpFunction) -> BumpReport {
    let env = &b.envelope;
    let m = b.maximizer;
    let mut inversion = None;
    for i in 1..env.len() {
        let bad = if i <= m { env[i] < env[i - 1] } else { env[i] > env[i - 1] };
        if bad {
            let side = if i <= m { "before" } else { "after" };
            inversion = Some((
                i,
                format!(
                    "envelope goes from {} to {} at piece {i}, {side} the maximizer",
                    env[i - 1],
                    env[i]
                ),
            ));
            break;
        }
    }
    let undercut = env.iter().zip(&b.source).position(|(e, s)| e < s);
    let source_max = b.source.iter().max().cloned().unwrap_or_else(Rational::zero);
    let max_matches = env[m] == b.source[m] && env[m] == source_max && env.iter().all(|e| *e <= source_max);
    BumpReport {
        inversion,
        undercut,
        max_matches,
        max_jump: max_jump(env),
        source_max_jump: max_jump(&b.source),
    }
}

fn max_jump(values: &[Rational]) -> Rational {
    values
        .windows(2)
        .map(|w| {
            let d = &w[1] - &w[0];
            if d < Rational::zero() {
                -d
            } else {
                d
            }
        })
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Bumps over the blocks of a partition, zero off the blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionBump {
    bumps: Vec<BumpFunction>,
}

impl PartitionBump {
    /// One bump per block of deepest-interval ranges, each anchored at its
    /// leftmost maximizer.
    pub fn new(model: &LengthModel, blocks: &[Range<usize>]) -> Result<Self> {
        let bumps = blocks
            .iter()
            .map(|b| {
                let (_, m) = model.max_in_leaves(b.clone());
                bump_over_leaves(model, b.clone(), m)
            })
            .collect::<Result<Vec<_>>>()?;
        if bumps.windows(2).any(|w| w[0].interval.hi >= w[1].interval.lo) {
            return Err(Error::Contract("partition blocks must be sorted and disjoint".into()));
        }
        Ok(PartitionBump { bumps })
    }

    pub fn bumps(&self) -> &[BumpFunction] {
        &self.bumps
    }

    /// The bump whose interval contains `x`.
    pub fn bump_at(&self, x: &Rational) -> Option<&BumpFunction> {
        let pos = self.bumps.partition_point(|b| b.interval.hi < *x);
        self.bumps.get(pos).filter(|b| b.interval.contains_point(x))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.bump_at(x)
            .and_then(|b| b.eval(x))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Values at the two ends of every block, which the decay condition
    /// forces towards zero as the partition refines.
    pub fn boundary_values(&self) -> Vec<(Rational, Rational)> {
        self.bumps
            .iter()
            .map(|b| (b.envelope[0].clone(), b.envelope[b.envelope.len() - 1].clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn whole(model: &LengthModel) -> Interval {
        model.cantor().level(0)[0].clone()
    }

    #[test]
    fn canonical_envelope_rises_like_the_figure() {
        let l = LengthModel::canonical(4).unwrap();
        let b = make_bump_leftmost(&l, &whole(&l)).unwrap();
        assert_eq!(&b.envelope()[..4], &[rat(1, 24), rat(1, 12), rat(1, 8), rat(1, 6)]);
        assert_eq!(*b.max(), int(1));
        assert!(b.maximizer().contains_point(&rat(1, 2)));
        let report = verify_bump(&b);
        assert!(report.passed(), "{report:?}");
        // mirrored descent
        assert_eq!(b.envelope().last().unwrap(), &rat(1, 24));
    }

    #[test]
    fn single_piece_is_constant() {
        let l = LengthModel::canonical(3).unwrap();
        let leaf = l.cantor().leaves()[4].clone();
        let b = make_bump(&l, &leaf, 4).unwrap();
        assert_eq!(b.envelope(), &[l.value(4).clone()]);
        assert_eq!(b.eval(&leaf.midpoint()), Some(l.value(4)));
    }

    #[test]
    fn first_fifth_peaks_at_one_half() {
        let l = LengthModel::canonical(4).unwrap();
        let b = make_bump_leftmost(&l, &Interval::new(int(0), rat(1, 5)).unwrap()).unwrap();
        assert_eq!(*b.max(), rat(1, 2));
        assert!(b.maximizer_position() > 0 && b.maximizer_position() < b.pieces().len() - 1);
    }

    #[test]
    fn wrong_maximizer_is_rejected() {
        let l = LengthModel::canonical(4).unwrap();
        assert!(matches!(make_bump(&l, &whole(&l), 0), Err(Error::Contract(_))));
        assert!(matches!(
            make_bump(&l, &Interval::new(rat(1, 5), rat(2, 5)).unwrap(), 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dip_before_the_maximizer_is_reported() {
        let pieces: Vec<Interval> = (0..4).map(|i| Interval::new(int(2 * i), int(2 * i + 1)).unwrap()).collect();
        let source = vec![int(1), int(2), int(1), int(3)];
        let b = BumpFunction::from_parts(pieces, 3, source.clone(), source).unwrap();
        let report = verify_bump(&b);
        assert!(!report.passed());
        let (at, msg) = report.inversion.unwrap();
        assert_eq!(at, 2);
        assert!(msg.contains("before the maximizer"), "{msg}");
    }

    #[test]
    fn finer_models_jump_less() {
        let jump = |d| {
            let l = LengthModel::canonical(d).unwrap();
            verify_bump(&make_bump_leftmost(&l, &whole(&l)).unwrap()).max_jump
        };
        assert!(jump(6) < jump(4));
    }

    #[test]
    fn gaps_take_the_outer_neighbor() {
        let l = LengthModel::canonical(3).unwrap();
        let b = make_bump_leftmost(&l, &whole(&l)).unwrap();
        let p = b.pieces();
        let m = b.maximizer_position();
        let gap_left = (&p[0].hi + &p[1].lo) / int(2);
        assert_eq!(b.eval(&gap_left), Some(&b.envelope()[0]));
        let gap_right = (&p[m].hi + &p[m + 1].lo) / int(2);
        assert_eq!(b.eval(&gap_right), Some(&b.envelope()[m + 1]));
        assert_eq!(b.eval(&int(2)), None);
    }

    #[test]
    fn partition_bump_matches_blockwise_bumps() {
        let l = LengthModel::canonical(4).unwrap();
        let c = l.cantor();
        let blocks: Vec<_> = (0..3).map(|i| c.leaf_range(2, i)).collect();
        let pb = PartitionBump::new(&l, &blocks).unwrap();
        for (i, block) in blocks.iter().enumerate() {
            let single = make_bump_leftmost(&l, &c.level(2)[i]).unwrap();
            assert_eq!(pb.bumps()[i], single);
            assert_eq!(pb.eval(&c.leaves()[block.start].midpoint()), single.envelope()[0]);
        }
        assert_eq!(pb.eval(&rat(3, 10)), int(0));
        assert_eq!(pb.boundary_values().len(), 3);
    }

    proptest! {
        #[test]
        fn envelope_dominates_and_is_idempotent(vals in prop::collection::vec(1i64..50, 1..40)) {
            let values: Vec<Rational> = vals.iter().map(|&v| int(v)).collect();
            let (max, m) = leftmost_max(&values, 0..values.len());
            let env = envelope(&values, m);
            prop_assert!(env.iter().zip(&values).all(|(e, v)| e >= v));
            prop_assert_eq!(&env[m], &max);
            prop_assert_eq!(envelope(&env, m), env.clone());
            let pieces: Vec<Interval> = (0..values.len() as i64).map(|i| Interval::new(int(2 * i), int(2 * i + 1)).unwrap()).collect();
            let b = BumpFunction::from_parts(pieces, m, values, env).unwrap();
            prop_assert!(verify_bump(&b).passed());
        }
    }

    #[test]
    fn idempotent_on_a_model() {
        let l = LengthModel::canonical(4).unwrap();
        let b = make_bump_leftmost(&l, &whole(&l)).unwrap();
        let again = l.with_values(b.envelope().to_vec()).unwrap();
        let b2 = make_bump(&again, &whole(&again), b.maximizer_position()).unwrap();
        assert_eq!(b2.envelope(), b.envelope());
    }
}
