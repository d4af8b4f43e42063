//! Paired partition nests with matched maximum ratios.
//!
//! Given two length models `X` and `Y` on the same Cantor approximation,
//! [`build_matched_nests`] refines both sides level by level. At every step
//! one side (`Y` when the parent level is even, `X` when it is odd) is cut
//! freely into blocks of small diameter, and the other side is fitted so that
//! each child reproduces the free side's drop `Max(child) / Max(parent)` to
//! within a factor `1 ± 2^-(n+2)`.
//!
//! Partitions are stored as contiguous ranges of deepest-interval indices, so
//! every partition boundary is an endpoint of the approximation.

use std::cell::Cell;
use std::collections::HashSet;
use std::ops::Range;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cantor::{CantorApprox, Interval, Scheme};
use crate::error::{Error, Result};
use crate::hair::{leftmost_max, LengthModel};
use crate::rational::{int, pow2_inv, serde_rational, serde_rational_vec, Rational};

/// One level of a nest.
#[derive(Debug, Clone, PartialEq)]
pub struct NestLevel {
    /// Deepest-interval index range of each block, left to right.
    pub blocks: Vec<Range<usize>>,
    /// Index of the enclosing block one level up (all zero at level 0).
    pub parents: Vec<usize>,
    pub maxima: Vec<Rational>,
    /// Leftmost deepest interval attaining each block maximum.
    pub maximizers: Vec<usize>,
}

impl NestLevel {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedNestPair {
    cantor: Arc<CantorApprox>,
    x: Vec<NestLevel>,
    y: Vec<NestLevel>,
    /// `ratios[n][i]` for child `i` of level `n >= 1`; `ratios[0]` is empty.
    ratios: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    X,
    Y,
}

impl MatchedNestPair {
    pub fn cantor(&self) -> &CantorApprox {
        &self.cantor
    }

    /// Number of refinement levels (level 0 excluded).
    pub fn levels(&self) -> usize {
        self.x.len() - 1
    }

    pub fn x_level(&self, n: usize) -> &NestLevel {
        &self.x[n]
    }

    pub fn y_level(&self, n: usize) -> &NestLevel {
        &self.y[n]
    }

    /// Ratio `(MaxY(child)/MaxY(parent)) / (MaxX(child)/MaxX(parent))` for
    /// child `i` of level `n >= 1`.
    pub fn ratio(&self, n: usize, i: usize) -> &Rational {
        &self.ratios[n][i]
    }

    pub fn ratios(&self, n: usize) -> &[Rational] {
        &self.ratios[n]
    }

    pub fn x_hull(&self, n: usize, i: usize) -> Interval {
        self.cantor.hull(&self.x[n].blocks[i])
    }

    pub fn y_hull(&self, n: usize, i: usize) -> Interval {
        self.cantor.hull(&self.y[n].blocks[i])
    }

    /// Re-derives every invariant from the stored blocks and the raw leaf
    /// values of both models.
    pub fn verify(&self, lx: &LengthModel, ly: &LengthModel) -> Result<()> {
        let diam = self.cantor.diameter();
        for n in 0..=self.levels() {
            let (xs, ys) = (&self.x[n], &self.y[n]);
            if xs.len() != ys.len() || xs.parents != ys.parents {
                return Err(Error::Contract(format!("level {n}: block structure differs")));
            }
            let bound = &diam * pow2_inv(n as u32);
            for (side, level, model) in [("X", xs, lx), ("Y", ys, ly)] {
                check_partition(&self.cantor, n, side, level, if n == 0 { None } else { Some(&self.levels_of(side)[n - 1]) })?;
                for (i, block) in level.blocks.iter().enumerate() {
                    if n > 0 && self.cantor.hull(block).length() >= bound {
                        return Err(Error::Contract(format!(
                            "level {n}: {side} block {i} has diameter >= 2^-{n} |C|"
                        )));
                    }
                    let (m, arg) = model.max_in_leaves(block.clone());
                    if m != level.maxima[i] || arg != level.maximizers[i] {
                        return Err(Error::Contract(format!(
                            "level {n}: stored {side} maximum of block {i} is stale"
                        )));
                    }
                }
            }
            if n == 0 {
                continue;
            }
            let delta = pow2_inv(n as u32 + 1);
            for i in 0..xs.len() {
                let j = xs.parents[i];
                let r = ratio_of(&ys.maxima[i], &self.y[n - 1].maxima[j], &xs.maxima[i], &self.x[n - 1].maxima[j]);
                if r != self.ratios[n][i] {
                    return Err(Error::Contract(format!("level {n}: recorded ratio {i} is stale")));
                }
                if !in_window(&r, &delta) {
                    return Err(Error::Contract(format!(
                        "level {n}: ratio {r} of block {i} is outside 1 ± {delta}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn levels_of(&self, side: &str) -> &[NestLevel] {
        if side == "X" {
            &self.x
        } else {
            &self.y
        }
    }

    pub fn to_json(&self) -> PairJson {
        let side = |levels: &[NestLevel], n: usize| -> Vec<BlockJson> {
            let lv = &levels[n];
            (0..lv.len())
                .map(|i| {
                    let hull = self.cantor.hull(&lv.blocks[i]);
                    BlockJson {
                        leaves: [lv.blocks[i].start, lv.blocks[i].end],
                        lo: hull.lo,
                        hi: hull.hi,
                        parent: lv.parents[i],
                        max: lv.maxima[i].clone(),
                    }
                })
                .collect()
        };
        PairJson {
            scheme: self.cantor.scheme(),
            depth: self.cantor.depth(),
            levels: (0..=self.levels())
                .map(|n| LevelJson {
                    x: side(&self.x, n),
                    y: side(&self.y, n),
                    ratios: self.ratios[n].clone(),
                })
                .collect(),
        }
    }
}

fn check_partition(
    cantor: &CantorApprox,
    n: usize,
    side: &str,
    level: &NestLevel,
    parent: Option<&NestLevel>,
) -> Result<()> {
    let bad = |what: String| Err(Error::Contract(format!("level {n}: {side} {what}")));
    let mut next = 0;
    for (i, block) in level.blocks.iter().enumerate() {
        if block.start != next || block.is_empty() {
            return bad(format!("block {i} does not continue the partition"));
        }
        next = block.end;
        if let Some(parent) = parent {
            let p = &parent.blocks[level.parents[i]];
            if block.start < p.start || block.end > p.end {
                return bad(format!("block {i} leaves its parent"));
            }
        }
    }
    if next != cantor.leaf_count() {
        return bad("partition does not cover the set".into());
    }
    Ok(())
}

/// `(my_child / my_parent) / (mx_child / mx_parent)`
fn ratio_of(my_child: &Rational, my_parent: &Rational, mx_child: &Rational, mx_parent: &Rational) -> Rational {
    (my_child * mx_parent) / (my_parent * mx_child)
}

fn in_window(r: &Rational, delta: &Rational) -> bool {
    let one = int(1);
    &(&one - delta) < r && r < &(&one + delta)
}

/// Builds `levels` refinement levels of matched nests for `lx` and `ly`.
pub fn build_matched_nests(lx: &LengthModel, ly: &LengthModel, levels: usize) -> Result<MatchedNestPair> {
    if !Arc::ptr_eq(lx.cantor_arc(), ly.cantor_arc()) && lx.cantor() != ly.cantor() {
        return Err(Error::Contract("the two models must share one Cantor approximation".into()));
    }
    let cantor = lx.cantor_arc().clone();
    let all = 0..cantor.leaf_count();
    let root = |m: &LengthModel| {
        let (max, arg) = m.max_in_leaves(all.clone());
        NestLevel {
            blocks: vec![all.clone()],
            parents: vec![0],
            maxima: vec![max],
            maximizers: vec![arg],
        }
    };
    let mut x = vec![root(lx)];
    let mut y = vec![root(ly)];
    if x[0].maxima[0].is_zero() || y[0].maxima[0].is_zero() {
        return Err(Error::Contract("both models need a positive maximum".into()));
    }
    let mut ratios = vec![Vec::new()];
    let diam = cantor.diameter();

    for n in 0..levels {
        let free_side = if n % 2 == 0 { Side::Y } else { Side::X };
        let free_bound = &diam * pow2_inv(n as u32 + 2);
        let fitted_bound = &diam * pow2_inv(n as u32 + 1);
        let delta = pow2_inv(n as u32 + 2);
        let (free_model, fitted_model, free_parent, fitted_parent) = match free_side {
            Side::Y => (ly, lx, &y[n], &x[n]),
            Side::X => (lx, ly, &x[n], &y[n]),
        };

        let mut free_blocks = Vec::new();
        let mut fitted_blocks = Vec::new();
        let mut parents = Vec::new();
        for j in 0..free_parent.len() {
            let free_kids = split_free(&cantor, free_parent.blocks[j].clone(), &free_bound)
                .map_err(|detail| Error::InsufficientDepth { level: n + 1, detail })?;
            let fit = Fit {
                cantor: &cantor,
                free: free_model.values(),
                fitted: fitted_model.values(),
                free_side,
                delta: &delta,
                diam_bound: &fitted_bound,
                visits: Cell::new(0),
                furthest: Cell::new(0),
            };
            let fitted_kids = fit
                .run(
                    &free_kids,
                    free_parent.maximizers[j],
                    &free_parent.maxima[j],
                    fitted_parent.blocks[j].clone(),
                    fitted_parent.maximizers[j],
                    &fitted_parent.maxima[j],
                )
                .map_err(|detail| Error::InsufficientDepth {
                    level: n + 1,
                    detail: format!("parent block {j}: {detail}"),
                })?;
            parents.extend(std::iter::repeat_n(j, free_kids.len()));
            free_blocks.extend(free_kids);
            fitted_blocks.extend(fitted_kids);
        }

        let level_of = |model: &LengthModel, blocks: Vec<Range<usize>>| {
            let (maxima, maximizers) = blocks.iter().map(|b| model.max_in_leaves(b.clone())).unzip();
            NestLevel {
                blocks,
                parents: parents.clone(),
                maxima,
                maximizers,
            }
        };
        let (xl, yl) = match free_side {
            Side::Y => (level_of(lx, fitted_blocks), level_of(ly, free_blocks)),
            Side::X => (level_of(lx, free_blocks), level_of(ly, fitted_blocks)),
        };
        let r: Vec<Rational> = (0..xl.len())
            .map(|i| {
                let j = parents[i];
                ratio_of(&yl.maxima[i], &y[n].maxima[j], &xl.maxima[i], &x[n].maxima[j])
            })
            .collect();
        for (i, block) in xl.blocks.iter().chain(&yl.blocks).enumerate() {
            if cantor.hull(block).length() >= fitted_bound {
                return Err(Error::InsufficientDepth {
                    level: n + 1,
                    detail: format!("block {} is too wide for the diameter bound", i % xl.len()),
                });
            }
        }
        x.push(xl);
        y.push(yl);
        ratios.push(r);
    }
    Ok(MatchedNestPair { cantor, x, y, ratios })
}

/// Greedy split of `parent` into the fewest contiguous runs whose hulls are
/// shorter than `bound`.
fn split_free(cantor: &CantorApprox, parent: Range<usize>, bound: &Rational) -> Result<Vec<Range<usize>>, String> {
    let leaves = cantor.leaves();
    let mut out = Vec::new();
    let mut start = parent.start;
    while start < parent.end {
        if leaves[start].length() >= *bound {
            return Err(format!(
                "deepest interval {start} is not shorter than the diameter bound {bound}"
            ));
        }
        let mut end = start + 1;
        while end < parent.end && &leaves[end].hi - &leaves[start].lo < *bound {
            end += 1;
        }
        out.push(start..end);
        start = end;
    }
    Ok(out)
}

struct Fit<'a> {
    cantor: &'a CantorApprox,
    free: &'a [Rational],
    fitted: &'a [Rational],
    free_side: Side,
    delta: &'a Rational,
    diam_bound: &'a Rational,
    visits: Cell<usize>,
    furthest: Cell<usize>,
}

/// Upper bound on search states explored per fitted parent.
const SEARCH_BUDGET: usize = 20_000;

#[derive(Debug, PartialEq, Eq)]
enum Window {
    Below,
    Inside,
    Above,
}

impl Fit<'_> {
    /// Cuts the fitted parent into as many blocks as `free_kids`, block by
    /// block hitting the ratio window.
    fn run(
        &self,
        free_kids: &[Range<usize>],
        free_argmax: usize,
        free_max: &Rational,
        parent: Range<usize>,
        fitted_argmax: usize,
        fitted_max: &Rational,
    ) -> Result<Vec<Range<usize>>, String> {
        let k = free_kids.len();
        if k == 1 {
            return Ok(vec![parent]);
        }
        if parent.len() < k {
            return Err(format!("{} deepest intervals cannot hold {k} blocks", parent.len()));
        }
        let pivot = free_kids
            .iter()
            .position(|b| b.contains(&free_argmax))
            .expect("maximizer lies in a child");
        let targets: Vec<Rational> = free_kids
            .iter()
            .map(|b| leftmost_max(self.free, b.clone()).0 / free_max)
            .collect();
        let classify = |i: usize, block_max: &Rational| -> Window {
            // drop of the fitted block relative to the target drop
            let ratio = block_max / fitted_max / &targets[i];
            let one = int(1);
            // X fitted: r = 1/ratio, Y fitted: r = ratio; both are monotone in block_max
            let r = match self.free_side {
                Side::Y if ratio.is_zero() => return Window::Below,
                Side::Y => &one / &ratio,
                Side::X => ratio,
            };
            let (lo, hi) = (&one - self.delta, &one + self.delta);
            let too_small = match self.free_side {
                Side::Y => r >= hi,
                Side::X => r <= lo,
            };
            let too_big = match self.free_side {
                Side::Y => r <= lo,
                Side::X => r >= hi,
            };
            if too_small {
                Window::Below
            } else if too_big {
                Window::Above
            } else {
                Window::Inside
            }
        };

        let leaves = self.cantor.leaves();
        let narrow = |s: usize, e: usize| &leaves[e].hi - &leaves[s].lo < *self.diam_bound;

        // Left of the pivot: block i covers start..=end, scanning rightwards.
        let mut left_cuts = Vec::new();
        let mut dead: HashSet<(usize, usize)> = HashSet::new();
        let ok = self.search(
            0,
            parent.start,
            pivot,
            &mut left_cuts,
            &mut dead,
            &|i, s| {
                let mut cands: Vec<usize> = Vec::new();
                if fitted_argmax < s + (pivot - i) {
                    return Vec::new();
                }
                let last = fitted_argmax - (pivot - i);
                let mut run: Option<Rational> = None;
                for e in s..=last {
                    if !narrow(s, e) {
                        break;
                    }
                    let v = &self.fitted[e];
                    if run.as_ref().is_none_or(|r| v > r) {
                        run = Some(v.clone());
                    }
                    match classify(i, run.as_ref().unwrap()) {
                        Window::Below => {}
                        Window::Inside => cands.push(e),
                        Window::Above => break,
                    }
                }
                prefer(&mut cands, free_kids[i].end - 1);
                cands.into_iter().map(|e| (e, e + 1)).collect()
            },
        );
        if self.exhausted() {
            return Err(format!("cut search gave up after {SEARCH_BUDGET} states"));
        }
        if !ok {
            let i = self.furthest.get();
            return Err(format!(
                "no admissible cut left of the maximizer for child {i}, target drop {}",
                targets[i]
            ));
        }

        // Right of the pivot, scanning leftwards from the parent's end.
        let mut right_cuts = Vec::new();
        self.furthest.set(0);
        let mut dead: HashSet<(usize, usize)> = HashSet::new();
        let right = k - 1 - pivot;
        let ok = self.search(
            0,
            parent.end - 1,
            right,
            &mut right_cuts,
            &mut dead,
            &|step, e| {
                let i = k - 1 - step;
                let mut cands: Vec<usize> = Vec::new();
                let first = fitted_argmax + (i - pivot);
                if e < first {
                    return Vec::new();
                }
                let mut run: Option<Rational> = None;
                for s in (first..=e).rev() {
                    if !narrow(s, e) {
                        break;
                    }
                    let v = &self.fitted[s];
                    if run.as_ref().is_none_or(|r| v >= r) {
                        run = Some(v.clone());
                    }
                    match classify(i, run.as_ref().unwrap()) {
                        Window::Below => {}
                        Window::Inside => cands.push(s),
                        Window::Above => break,
                    }
                }
                prefer(&mut cands, free_kids[i].start);
                cands.into_iter().map(|s| (s, s - 1)).collect()
            },
        );
        if self.exhausted() {
            return Err(format!("cut search gave up after {SEARCH_BUDGET} states"));
        }
        if !ok {
            let i = k - 1 - self.furthest.get();
            return Err(format!(
                "no admissible cut right of the maximizer for child {i}, target drop {}",
                targets[i]
            ));
        }

        let mut blocks = Vec::with_capacity(k);
        let mut start = parent.start;
        for &end in &left_cuts {
            blocks.push(start..end + 1);
            start = end + 1;
        }
        let mut tail = Vec::new();
        let mut end = parent.end;
        for &s in &right_cuts {
            tail.push(s..end);
            end = s;
        }
        blocks.push(start..end);
        blocks.extend(tail.into_iter().rev());
        Ok(blocks)
    }

    fn exhausted(&self) -> bool {
        self.visits.get() >= SEARCH_BUDGET
    }

    /// Depth-first search over cut positions. `candidates(i, cursor)` lists
    /// `(cut, next_cursor)` pairs for block `i` in preference order.
    fn search(
        &self,
        i: usize,
        cursor: usize,
        count: usize,
        cuts: &mut Vec<usize>,
        dead: &mut HashSet<(usize, usize)>,
        candidates: &dyn Fn(usize, usize) -> Vec<(usize, usize)>,
    ) -> bool {
        if i == count {
            return true;
        }
        if dead.contains(&(i, cursor)) || self.exhausted() {
            return false;
        }
        self.visits.set(self.visits.get() + 1);
        self.furthest.set(self.furthest.get().max(i));
        for (cut, next) in candidates(i, cursor) {
            cuts.push(cut);
            if self.search(i + 1, next, count, cuts, dead, candidates) {
                return true;
            }
            cuts.pop();
        }
        dead.insert((i, cursor));
        false
    }
}

/// Moves the cut aligned with the free side to the front, keeping the rest
/// in scan order.
fn prefer(cands: &mut Vec<usize>, aligned: usize) {
    if let Some(pos) = cands.iter().position(|&c| c == aligned) {
        let c = cands.remove(pos);
        cands.insert(0, c);
    }
}

/// Order-preserving correspondence between the recorded endpoints of the two
/// nests, extended by linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiMap {
    knots: Vec<(Rational, Rational)>,
}

impl PsiMap {
    pub fn knots(&self) -> &[(Rational, Rational)] {
        &self.knots
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let k = &self.knots;
        let pos = k.partition_point(|(kx, _)| kx <= x);
        if pos == 0 {
            return &k[0].1 + (x - &k[0].0);
        }
        if pos == k.len() {
            let (lx, ly) = &k[k.len() - 1];
            return ly + (x - lx);
        }
        let (x0, y0) = &k[pos - 1];
        let (x1, y1) = &k[pos];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// `psi(u^X_{n,i}) = u^Y_{n,i}`, `psi(v^X_{n,i}) = v^Y_{n,i}` for all recorded
/// blocks.
pub fn base_psi(pair: &MatchedNestPair) -> Result<PsiMap> {
    let mut knots = Vec::new();
    for n in 0..=pair.levels() {
        for i in 0..pair.x[n].len() {
            let (hx, hy) = (pair.x_hull(n, i), pair.y_hull(n, i));
            knots.push((hx.lo, hy.lo));
            knots.push((hx.hi, hy.hi));
        }
    }
    knots.sort();
    knots.dedup();
    for w in knots.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Contract(format!(
                "endpoint {} is sent to both {} and {}",
                w[0].0, w[0].1, w[1].1
            )));
        }
        if w[0].1 >= w[1].1 {
            return Err(Error::Contract(format!(
                "endpoints {} < {} are not kept in order",
                w[0].0, w[1].0
            )));
        }
    }
    Ok(PsiMap { knots })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockJson {
    /// Half-open range of deepest-interval indices.
    pub leaves: [usize; 2],
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
    pub parent: usize,
    #[serde(with = "serde_rational")]
    pub max: Rational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelJson {
    pub x: Vec<BlockJson>,
    pub y: Vec<BlockJson>,
    #[serde(with = "serde_rational_vec")]
    pub ratios: Vec<Rational>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairJson {
    pub scheme: Scheme,
    pub depth: usize,
    pub levels: Vec<LevelJson>,
}
