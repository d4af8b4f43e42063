//! Finite-depth approximations of Cantor sets in `[0, 1]`.
//!
//! Two interval schemes are supported. In both, every interval of level
//! `k - 1` is cut into `2b - 1` equal parts and the odd-numbered parts are
//! kept, where `b` is the branching factor of level `k`:
//!
//! * [`Scheme::Canonical`]: `b = 2k - 1`, i.e. `4k - 3` parts. Level 1 is
//!   `[0, 1]` again (a single child), level 2 has three intervals of length
//!   `1/5`, and level `k` has `(2k - 1)!!` intervals.
//! * [`Scheme::MiddleThird`]: `b = 2` at every level.
//!
//! Level 0 is always the single interval `[0, 1]`. Intervals at each level are
//! stored left to right, so the children of interval `p` at level `k` are the
//! contiguous block `p * b .. (p + 1) * b` of level `k + 1`.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, serde_rational, Rational};

/// Default limit on the number of intervals in the deepest level.
pub const DEFAULT_INTERVAL_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Canonical,
    MiddleThird,
}

impl Scheme {
    /// Number of children each level-`level - 1` interval has at `level`.
    pub fn branching(self, level: usize) -> usize {
        assert!(level >= 1, "level 0 has no parent");
        match self {
            Scheme::Canonical => 2 * level - 1,
            Scheme::MiddleThird => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Canonical => "canonical",
            Scheme::MiddleThird => "middle_third",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Horizontal placement of the intervals of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// The exact construction.
    #[default]
    TrueCantor,
    /// Each parent of width `W` with `b` children gets children of width
    /// `2W / (3b - 1)` separated by gaps of half that width. This is the
    /// plotting layout of the classic figure of the canonical example.
    AddressUniform,
}

/// A closed interval with exact endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("interval with lo {lo} > hi {hi}")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn contains_point(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A path `(i_1, ..., i_k)` through the construction, entries 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(pub Vec<u32>);

impl Address {
    pub fn new(entries: impl Into<Vec<u32>>) -> Self {
        Address(entries.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, k: usize) -> Address {
        Address(self.0[..k].to_vec())
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Checks the entry ranges for `scheme`.
    pub fn validate(&self, scheme: Scheme) -> Result<()> {
        for (j, &entry) in self.0.iter().enumerate() {
            let max = scheme.branching(j + 1) as u32;
            if entry < 1 || entry > max {
                return Err(Error::Address(format!(
                    "entry {} of {self} is {entry}, expected 1..={max} for the {scheme} scheme",
                    j + 1
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

/// Selects the descendants at level `p` of interval `j` (1-based) at level
/// `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChildSelector {
    pub p: usize,
    pub q: usize,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorApprox {
    scheme: Scheme,
    depth: usize,
    levels: Vec<Vec<Interval>>,
}

impl CantorApprox {
    pub fn build(scheme: Scheme, depth: usize) -> Result<Self> {
        Self::build_with_cap(scheme, depth, DEFAULT_INTERVAL_CAP)
    }

    pub fn build_with_cap(scheme: Scheme, depth: usize, cap: usize) -> Result<Self> {
        let mut count: usize = 1;
        for level in 1..=depth {
            count = count
                .checked_mul(scheme.branching(level))
                .filter(|&c| c <= cap)
                .ok_or_else(|| {
                    Error::Resource(format!(
                        "{scheme} depth {depth} needs more than {cap} intervals at level {level}"
                    ))
                })?;
        }

        let mut levels = Vec::with_capacity(depth + 1);
        levels.push(vec![Interval {
            lo: int(0),
            hi: int(1),
        }]);
        for level in 1..=depth {
            let b = scheme.branching(level);
            let parts = int(2 * b as i64 - 1);
            let parents: &Vec<Interval> = &levels[level - 1];
            let mut next = Vec::with_capacity(parents.len() * b);
            for parent in parents {
                let width = parent.length() / &parts;
                for t in 0..b {
                    let lo = &parent.lo + &width * int(2 * t as i64);
                    let hi = &lo + &width;
                    next.push(Interval { lo, hi });
                }
            }
            levels.push(next);
        }
        Ok(CantorApprox {
            scheme,
            depth,
            levels,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn levels(&self) -> &[Vec<Interval>] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &[Interval] {
        &self.levels[k]
    }

    /// The deepest level.
    pub fn leaves(&self) -> &[Interval] {
        &self.levels[self.depth]
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[self.depth].len()
    }

    /// `sup C - inf C` at the finite depth.
    pub fn diameter(&self) -> Rational {
        let leaves = self.leaves();
        &leaves[leaves.len() - 1].hi - &leaves[0].lo
    }

    /// Indices at level `to` of the descendants of interval `index` at level
    /// `from` (`from <= to`).
    pub fn descendant_range(&self, from: usize, index: usize, to: usize) -> Range<usize> {
        debug_assert!(from <= to && to <= self.depth);
        let span: usize = (from + 1..=to).map(|k| self.scheme.branching(k)).product();
        index * span..(index + 1) * span
    }

    /// Leaf indices below interval `index` of level `level`.
    pub fn leaf_range(&self, level: usize, index: usize) -> Range<usize> {
        self.descendant_range(level, index, self.depth)
    }

    /// Index at level `to` of the ancestor of interval `index` at level `from`.
    pub fn ancestor(&self, from: usize, index: usize, to: usize) -> usize {
        debug_assert!(to <= from);
        let span: usize = (to + 1..=from).map(|k| self.scheme.branching(k)).product();
        index / span
    }

    /// Position of an address in its level.
    pub fn address_index(&self, address: &Address) -> Result<usize> {
        address.validate(self.scheme)?;
        if address.len() > self.depth {
            return Err(Error::Address(format!(
                "{address} is longer than the depth {}",
                self.depth
            )));
        }
        let mut index = 0usize;
        for (j, &entry) in address.entries().iter().enumerate() {
            index = index * self.scheme.branching(j + 1) + (entry as usize - 1);
        }
        Ok(index)
    }

    pub fn address_to_interval(&self, address: &Address) -> Result<&Interval> {
        let index = self.address_index(address)?;
        Ok(&self.levels[address.len()][index])
    }

    pub fn index_to_address(&self, level: usize, mut index: usize) -> Address {
        let mut entries = vec![0u32; level];
        for k in (1..=level).rev() {
            let b = self.scheme.branching(k);
            entries[k - 1] = (index % b) as u32 + 1;
            index /= b;
        }
        Address(entries)
    }

    /// Index of the deepest interval containing `x`, if any.
    pub fn leaf_containing(&self, x: &Rational) -> Option<usize> {
        let leaves = self.leaves();
        let pos = leaves.partition_point(|iv| &iv.lo <= x);
        if pos == 0 {
            return None;
        }
        leaves[pos - 1].contains_point(x).then_some(pos - 1)
    }

    /// Whether `x` is an endpoint of the set at the current depth, i.e. one
    /// side of `x` is a discarded gap or the exterior of `[0, 1]`.
    ///
    /// `x` must be an endpoint of some deepest interval. Points that remain
    /// interval endpoints at every deeper level are exactly the endpoints of
    /// the limiting Cantor set.
    pub fn is_endpoint(&self, x: &Rational) -> Result<bool> {
        let leaves = self.leaves();
        let pos = leaves.partition_point(|iv| &iv.hi < x);
        let Some(iv) = leaves.get(pos).filter(|iv| &iv.lo == x || &iv.hi == x) else {
            return Err(Error::Domain(format!(
                "{x} is not an endpoint of a level-{} interval",
                self.depth
            )));
        };
        if &iv.lo == x {
            let left_open = pos == 0 || &leaves[pos - 1].hi < x;
            if left_open {
                return Ok(true);
            }
        }
        if &iv.hi == x {
            let right_open = pos + 1 == leaves.len() || &leaves[pos + 1].lo > x;
            if right_open {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The set `K(p; q, j)` of 1-based level-`p` indices inside interval `j`
    /// of level `q`.
    pub fn children(&self, sel: ChildSelector) -> Result<Vec<usize>> {
        let ChildSelector { p, q, j } = sel;
        if p <= q {
            return Err(Error::Domain(format!("child selector needs p > q, got p={p}, q={q}")));
        }
        if p > self.depth {
            return Err(Error::Domain(format!("level {p} exceeds depth {}", self.depth)));
        }
        if j == 0 || j > self.levels[q].len() {
            return Err(Error::Domain(format!(
                "parent index {j} out of range 1..={} at level {q}",
                self.levels[q].len()
            )));
        }
        Ok(self.descendant_range(q, j - 1, p).map(|i| i + 1).collect())
    }

    /// Intervals of `level` placed according to `layout`.
    pub fn layout_level(&self, layout: Layout, level: usize) -> Vec<Interval> {
        match layout {
            Layout::TrueCantor => self.levels[level].clone(),
            Layout::AddressUniform => {
                let mut current = vec![Interval {
                    lo: int(0),
                    hi: int(1),
                }];
                for k in 1..=level {
                    let b = self.scheme.branching(k) as i64;
                    current = current
                        .iter()
                        .flat_map(|p| {
                            let w = p.length() * int(2) / int(3 * b - 1);
                            (0..b).map(move |t| {
                                let lo = &p.lo + &w * Rational::new((3 * t).into(), 2.into());
                                Interval {
                                    hi: &lo + &w,
                                    lo,
                                }
                            })
                        })
                        .collect();
                }
                current
            }
        }
    }

    /// Smallest interval containing leaves `range`.
    pub fn hull(&self, range: &Range<usize>) -> Interval {
        let leaves = self.leaves();
        Interval {
            lo: leaves[range.start].lo.clone(),
            hi: leaves[range.end - 1].hi.clone(),
        }
    }

    pub fn to_json(&self) -> CantorJson {
        CantorJson {
            scheme: self.scheme,
            depth: self.depth,
            levels: self.levels.clone(),
        }
    }

    /// Rebuilds from the scheme and depth in `json` and checks that the
    /// stored levels agree exactly.
    pub fn from_json(json: &CantorJson) -> Result<Self> {
        let built = CantorApprox::build(json.scheme, json.depth)?;
        if built.levels != json.levels {
            return Err(Error::Parse(format!(
                "stored levels do not match the {} construction at depth {}",
                json.scheme, json.depth
            )));
        }
        Ok(built)
    }
}

/// JSON form: `{"scheme": .., "depth": n, "levels": [[{"lo": "p/q", "hi": "p/q"}, ..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CantorJson {
    pub scheme: Scheme,
    pub depth: usize,
    pub levels: Vec<Vec<Interval>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn iv(lo: Rational, hi: Rational) -> Interval {
        Interval { lo, hi }
    }

    #[test]
    fn canonical_depth_one_is_the_unit_interval() {
        let c = CantorApprox::build(Scheme::Canonical, 1).unwrap();
        assert_eq!(c.leaves(), &[iv(int(0), int(1))]);
    }

    #[test]
    fn canonical_depth_two_keeps_odd_fifths() {
        let c = CantorApprox::build(Scheme::Canonical, 2).unwrap();
        assert_eq!(
            c.leaves(),
            &[
                iv(int(0), rat(1, 5)),
                iv(rat(2, 5), rat(3, 5)),
                iv(rat(4, 5), int(1))
            ]
        );
    }

    #[test]
    fn middle_third_depth_two() {
        let c = CantorApprox::build(Scheme::MiddleThird, 2).unwrap();
        assert_eq!(
            c.leaves(),
            &[
                iv(int(0), rat(1, 9)),
                iv(rat(2, 9), rat(1, 3)),
                iv(rat(2, 3), rat(7, 9)),
                iv(rat(8, 9), int(1))
            ]
        );
    }

    #[test]
    fn interval_cap_rejects_factorial_growth() {
        assert!(CantorApprox::build(Scheme::Canonical, 7).is_ok());
        let err = CantorApprox::build(Scheme::Canonical, 8).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
        assert!(CantorApprox::build_with_cap(Scheme::MiddleThird, 4, 15).is_err());
    }

    #[test]
    fn addresses() {
        let c = CantorApprox::build(Scheme::Canonical, 4).unwrap();
        assert_eq!(c.address_to_interval(&Address::new([1])).unwrap(), &iv(int(0), int(1)));
        assert_eq!(
            c.address_to_interval(&Address::new([1, 2])).unwrap(),
            &iv(rat(2, 5), rat(3, 5))
        );
        assert_eq!(c.address_to_interval(&Address::new([1, 1, 1, 1])).unwrap().lo, int(0));
        assert!(matches!(
            c.address_to_interval(&Address::new([1, 4])),
            Err(Error::Address(_))
        ));
        assert!(matches!(
            c.address_to_interval(&Address::new([2])),
            Err(Error::Address(_))
        ));
        assert!(c.address_to_interval(&Address::new([1, 1, 1, 1, 1])).is_err());
        for k in 0..=4 {
            for i in 0..c.level(k).len() {
                let a = c.index_to_address(k, i);
                assert_eq!(c.address_index(&a).unwrap(), i);
            }
        }
    }

    #[test]
    fn endpoints() {
        let c = CantorApprox::build(Scheme::Canonical, 2).unwrap();
        assert!(c.is_endpoint(&rat(1, 5)).unwrap());
        assert!(c.is_endpoint(&int(0)).unwrap());
        assert!(matches!(c.is_endpoint(&rat(1, 2)), Err(Error::Domain(_))));
        let m = CantorApprox::build(Scheme::MiddleThird, 1).unwrap();
        assert!(m.is_endpoint(&rat(1, 3)).unwrap());
    }

    #[test]
    fn child_selectors() {
        let m = CantorApprox::build(Scheme::MiddleThird, 3).unwrap();
        assert_eq!(
            m.children(ChildSelector { p: 3, q: 1, j: 2 }).unwrap(),
            vec![5, 6, 7, 8]
        );
        assert!(m.children(ChildSelector { p: 2, q: 2, j: 1 }).is_err());
        let c = CantorApprox::build(Scheme::Canonical, 2).unwrap();
        assert_eq!(c.children(ChildSelector { p: 2, q: 1, j: 1 }).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn json_round_trip_rejects_tampering() {
        let c = CantorApprox::build(Scheme::MiddleThird, 2).unwrap();
        let mut json = c.to_json();
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.starts_with(r#"{"scheme":"middle_third","depth":2,"levels":[[{"lo":"0/1","hi":"1/1"}]"#));
        let back: CantorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(CantorApprox::from_json(&back).unwrap(), c);
        json.levels[2][0].hi = rat(1, 10);
        assert!(CantorApprox::from_json(&json).is_err());
    }
}
