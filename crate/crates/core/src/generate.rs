//! Seeded model generators for experiments, fixtures and the CLI.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cantor::{CantorApprox, Scheme};
use crate::error::{Error, Result};
use crate::hair::LengthModel;
use crate::rational::{rat, Rational};

/// Multiplies every value by a factor drawn per interval of `level`,
/// uniformly from the grid `{900, ..., 1100} / 1000`.
pub fn perturbed(model: &LengthModel, level: usize, seed: u64) -> Result<LengthModel> {
    if level > model.depth() {
        return Err(Error::Domain(format!(
            "perturbation level {level} exceeds depth {}",
            model.depth()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cantor = model.cantor();
    let factors: Vec<Rational> = (0..cantor.level(level).len())
        .map(|_| rat(rng.gen_range(900..=1100), 1000))
        .collect();
    let values = (0..cantor.leaf_count())
        .map(|leaf| model.value(leaf) * &factors[cantor.ancestor(cantor.depth(), leaf, level)])
        .collect();
    model.with_values(values)
}

/// A multiplicative cascade: every interval below level 0 draws a factor
/// from `{1, ..., 64} / 64`, and a leaf's value is the product of the
/// factors on its path. All values are positive.
pub fn random_cascade(scheme: Scheme, depth: usize, seed: u64) -> Result<LengthModel> {
    let cantor = Arc::new(CantorApprox::build(scheme, depth)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = vec![rat(1, 1)];
    for level in 1..=depth {
        let b = scheme.branching(level);
        let mut next = Vec::with_capacity(current.len() * b);
        for v in &current {
            for _ in 0..b {
                next.push(v * rat(rng.gen_range(1..=64), 64));
            }
        }
        current = next;
    }
    LengthModel::from_leaf_values(cantor, current)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_stays_in_band_and_is_seeded() {
        let base = LengthModel::canonical(4).unwrap();
        let a = perturbed(&base, 2, 7).unwrap();
        let b = perturbed(&base, 2, 7).unwrap();
        assert_eq!(a, b);
        for (x, y) in base.values().iter().zip(a.values()) {
            let f = y / x;
            assert!(f >= rat(9, 10) && f <= rat(11, 10));
        }
        assert!(perturbed(&base, 5, 1).is_err());
    }

    #[test]
    fn cascade_is_positive() {
        let m = random_cascade(Scheme::MiddleThird, 6, 3).unwrap();
        assert_eq!(m.values().len(), 64);
        assert!(m.values().iter().all(|v| *v > rat(0, 1)));
    }
}
