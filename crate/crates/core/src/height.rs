//! Whitney maps on finite metric spaces, height functions along chains, and
//! the embedding of abstract hair data as vertical columns.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, serde_rational, serde_rational_vec, Rational};

/// Finite metric space with exact rational distances.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<Rational>>,
}

impl FiniteMetricSpace {
    /// Checks the metric axioms exactly on `dist`.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rational>>) -> Result<Self> {
        let n = dist.len();
        if labels.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::Contract(format!("distance matrix must be {n} x {n} with {n} labels")));
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::Contract(format!("d({i},{i}) is not zero")));
            }
            for j in 0..n {
                if dist[i][j] < Rational::zero() || dist[i][j] != dist[j][i] {
                    return Err(Error::Contract(format!("d({i},{j}) is negative or asymmetric")));
                }
                for k in 0..n {
                    if dist[i][k] > &dist[i][j] + &dist[j][k] {
                        return Err(Error::Contract(format!(
                            "triangle inequality fails for {i}, {j}, {k}"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { labels, dist })
    }

    /// Integer points in the plane under the taxicab metric.
    pub fn from_points_l1(points: &[(i64, i64)]) -> Result<Self> {
        let dist = points
            .iter()
            .map(|a| points.iter().map(|b| int((a.0 - b.0).abs() + (a.1 - b.1).abs())).collect())
            .collect();
        let labels = points.iter().map(|(x, y)| format!("({x},{y})")).collect();
        FiniteMetricSpace::new(labels, dist)
    }

    /// `n` distinct integer points drawn from a `4n × 4n` grid, L1 metric.
    pub fn seeded(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let side = 4 * n.max(1) as i64;
        let mut points: Vec<(i64, i64)> = Vec::with_capacity(n);
        while points.len() < n {
            let p = (rng.gen_range(0..side), rng.gen_range(0..side));
            if !points.contains(&p) {
                points.push(p);
            }
        }
        FiniteMetricSpace::from_points_l1(&points)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }
}

/// Sum of pairwise distances over the distinct points of `subset`.
pub fn whitney_measure(space: &FiniteMetricSpace, subset: &[usize]) -> Result<Rational> {
    let mut pts = subset.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.is_empty() {
        return Err(Error::Domain("the Whitney measure of the empty set is undefined".into()));
    }
    if let Some(&bad) = pts.iter().find(|&&p| p >= space.len()) {
        return Err(Error::Domain(format!("point {bad} is not in the space")));
    }
    let mut total = Rational::zero();
    for (a, &i) in pts.iter().enumerate() {
        for &j in &pts[a + 1..] {
            total += space.dist(i, j);
        }
    }
    Ok(total)
}

/// Points grouped into chains, each listed from base to peak.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractHairData {
    pub space: FiniteMetricSpace,
    pub chains: Vec<Vec<usize>>,
}

impl AbstractHairData {
    /// Checks that every chain is non-empty and repeat-free and that the
    /// chains partition the points.
    pub fn validate(&self) -> Result<()> {
        let mut owner = vec![None; self.space.len()];
        for (c, chain) in self.chains.iter().enumerate() {
            if chain.is_empty() {
                return Err(Error::Contract(format!("chain {c} is empty")));
            }
            for &p in chain {
                if p >= self.space.len() {
                    return Err(Error::Contract(format!("chain {c} names unknown point {p}")));
                }
                match owner[p] {
                    Some(o) if o == c => {
                        return Err(Error::Contract(format!("chain {c} visits point {p} twice")));
                    }
                    Some(o) => {
                        return Err(Error::Contract(format!("point {p} lies on chains {o} and {c}")));
                    }
                    None => owner[p] = Some(c),
                }
            }
        }
        if let Some(p) = owner.iter().position(Option::is_none) {
            return Err(Error::Contract(format!("point {p} lies on no chain")));
        }
        Ok(())
    }

    pub fn base(&self, chain: usize) -> usize {
        self.chains[chain][0]
    }

    pub fn peak(&self, chain: usize) -> usize {
        *self.chains[chain].last().expect("chains are non-empty")
    }

    pub fn bases(&self) -> Vec<usize> {
        (0..self.chains.len()).map(|c| self.base(c)).collect()
    }

    /// `n` seeded points split at random into chains of length 1 to 5.
    pub fn seeded(n: usize, seed: u64) -> Result<Self> {
        let space = FiniteMetricSpace::seeded(n, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut chains = Vec::new();
        let mut rest = &order[..];
        while !rest.is_empty() {
            let take = rng.gen_range(1..=5).min(rest.len());
            chains.push(rest[..take].to_vec());
            rest = &rest[take..];
        }
        Ok(AbstractHairData { space, chains })
    }

    pub fn to_json(&self) -> HairDataJson {
        HairDataJson {
            points: self.space.labels.clone(),
            dist: self
                .space
                .dist
                .iter()
                .map(|row| row.iter().map(crate::rational::format_rational).collect())
                .collect(),
            chains: self.chains.clone(),
        }
    }

    pub fn from_json(json: &HairDataJson) -> Result<Self> {
        let dist = json
            .dist
            .iter()
            .map(|row| row.iter().map(|s| crate::rational::parse_rational(s)).collect())
            .collect::<Result<Vec<Vec<Rational>>>>()?;
        let data = AbstractHairData {
            space: FiniteMetricSpace::new(json.points.clone(), dist)?,
            chains: json.chains.clone(),
        };
        data.validate()?;
        Ok(data)
    }
}

/// `{"points": [labels], "dist": [["p/q", ..], ..], "chains": [[indices], ..]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HairDataJson {
    pub points: Vec<String>,
    pub dist: Vec<Vec<String>>,
    pub chains: Vec<Vec<usize>>,
}

/// `h(x) = mu([b(x), x])`: the Whitney measure of the chain prefix ending at
/// each point.
pub fn height_function(data: &AbstractHairData) -> Result<Vec<Rational>> {
    data.validate()?;
    let space = &data.space;
    let mut h = vec![Rational::zero(); space.len()];
    for chain in &data.chains {
        let mut acc = Rational::zero();
        for (k, &p) in chain.iter().enumerate() {
            for &q in &chain[..k] {
                acc += space.dist(p, q);
            }
            h[p] = acc.clone();
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub base: usize,
    #[serde(with = "serde_rational")]
    pub x: Rational,
    /// Heights along the chain, base first.
    #[serde(with = "serde_rational_vec")]
    pub heights: Vec<Rational>,
}

/// Image of abstract hair data in the plane: each chain becomes a vertical
/// column over `g(base)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedHairs {
    pub points: Vec<(Rational, Rational)>,
    pub columns: Vec<Column>,
}

/// `Phi(x) = (g(b(x)), h(x))`, with injectivity checked over all point pairs.
pub fn abstract_uniformize(data: &AbstractHairData, g: &BTreeMap<usize, Rational>) -> Result<EmbeddedHairs> {
    let h = height_function(data)?;
    let mut xs = Vec::with_capacity(data.chains.len());
    for c in 0..data.chains.len() {
        let b = data.base(c);
        let x = g
            .get(&b)
            .ok_or_else(|| Error::Contract(format!("g is not defined on base {b}")))?;
        xs.push(x.clone());
    }
    for a in 0..xs.len() {
        for b in a + 1..xs.len() {
            if xs[a] == xs[b] {
                return Err(Error::Contract(format!(
                    "g sends bases {} and {} to the same point",
                    data.base(a),
                    data.base(b)
                )));
            }
        }
    }
    let mut points = vec![(Rational::zero(), Rational::zero()); data.space.len()];
    let mut columns = Vec::with_capacity(xs.len());
    for (c, chain) in data.chains.iter().enumerate() {
        for &p in chain {
            points[p] = (xs[c].clone(), h[p].clone());
        }
        columns.push(Column {
            base: data.base(c),
            x: xs[c].clone(),
            heights: chain.iter().map(|&p| h[p].clone()).collect(),
        });
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(Error::Contract(format!("points {i} and {j} have the same image")));
            }
        }
    }
    Ok(EmbeddedHairs { points, columns })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    NotFalsifiableAtFiniteScale,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub verdict: Verdict,
    pub detail: String,
}

/// Finite readings of the axioms for abstract hair data that the data can
/// actually refute.
pub fn check_axioms(data: &AbstractHairData) -> Vec<AxiomCheck> {
    let structure = data.validate();
    let check = |axiom, ok: bool, detail: String| AxiomCheck {
        axiom,
        verdict: if ok { Verdict::Holds } else { Verdict::Fails },
        detail,
    };
    let mut out = vec![check(
        "A1",
        structure.is_ok(),
        match &structure {
            Ok(()) => "every component is a point or a repeat-free chain".into(),
            Err(e) => e.to_string(),
        },
    )];
    let points = data.chains.iter().filter(|c| c.len() == 1).count();
    out.push(check(
        "A2",
        points > 0,
        format!("{points} point components"),
    ));
    out.push(check(
        "A3",
        structure.is_ok(),
        "each chain meets the base set at its first element".into(),
    ));
    out.push(AxiomCheck {
        axiom: "A4",
        verdict: Verdict::NotFalsifiableAtFiniteScale,
        detail: "arc convergence in the Hausdorff topology needs convergent sequences".into(),
    });
    let arcs = data.chains.len() - points;
    out.push(check(
        "A6'",
        arcs > 0,
        format!("{arcs} arc components contribute peaks"),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    #[test]
    fn measure_basics() {
        let s = FiniteMetricSpace::from_points_l1(&[(0, 0), (3, 1), (1, 5)]).unwrap();
        assert_eq!(whitney_measure(&s, &[1]).unwrap(), int(0));
        assert_eq!(whitney_measure(&s, &[0, 1]).unwrap(), int(4));
        assert_eq!(whitney_measure(&s, &[0, 1, 1]).unwrap(), int(4));
        assert!(matches!(whitney_measure(&s, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn metric_axioms_are_enforced() {
        let bad = vec![vec![int(0), int(1), int(5)], vec![int(1), int(0), int(1)], vec![int(5), int(1), int(0)]];
        assert!(FiniteMetricSpace::new(vec!["a".into(), "b".into(), "c".into()], bad).is_err());
        let asym = vec![vec![int(0), int(1)], vec![int(2), int(0)]];
        assert!(FiniteMetricSpace::new(vec!["a".into(), "b".into()], asym).is_err());
    }

    #[test]
    fn three_point_chain_heights() {
        let s = FiniteMetricSpace::from_points_l1(&[(0, 0), (2, 0), (2, 3)]).unwrap();
        let d = AbstractHairData { space: s, chains: vec![vec![0, 1, 2]] };
        let h = height_function(&d).unwrap();
        // gaps 2 and 3, end-to-end 5
        assert_eq!(h, vec![int(0), int(2), int(10)]);
    }

    #[test]
    fn singletons_have_zero_height_and_sit_on_the_axis() {
        let s = FiniteMetricSpace::seeded(5, 1).unwrap();
        let d = AbstractHairData { space: s, chains: (0..5).map(|i| vec![i]).collect() };
        assert!(height_function(&d).unwrap().iter().all(Zero::is_zero));
        let g: BTreeMap<usize, Rational> = (0..5).map(|i| (i, rat(i as i64, 5))).collect();
        let e = abstract_uniformize(&d, &g).unwrap();
        assert!(e.points.iter().all(|p| p.1.is_zero()));
    }

    #[test]
    fn repeats_and_collisions_are_rejected() {
        let s = FiniteMetricSpace::seeded(3, 2).unwrap();
        let d = AbstractHairData { space: s.clone(), chains: vec![vec![0, 1, 0], vec![2]] };
        assert!(matches!(height_function(&d), Err(Error::Contract(_))));
        let d = AbstractHairData { space: s, chains: vec![vec![0, 1], vec![2]] };
        let g: BTreeMap<usize, Rational> = [(0, int(1)), (2, int(1))].into_iter().collect();
        assert!(matches!(abstract_uniformize(&d, &g), Err(Error::Contract(_))));
    }

    #[test]
    fn seeded_instance_embeds_injectively() {
        let d = AbstractHairData::seeded(20, 7).unwrap();
        let h = height_function(&d).unwrap();
        for chain in &d.chains {
            assert!(h[chain[0]].is_zero());
            assert!(chain.windows(2).all(|w| h[w[0]] < h[w[1]]));
        }
        let g: BTreeMap<usize, Rational> = d.bases().into_iter().enumerate().map(|(i, b)| (b, rat(i as i64, 7))).collect();
        let e = abstract_uniformize(&d, &g).unwrap();
        for (c, chain) in d.chains.iter().enumerate() {
            for &p in chain {
                assert_eq!(e.points[p].0, g[&d.base(c)]);
            }
        }
        let checks = check_axioms(&d);
        let a4 = checks.iter().find(|c| c.axiom == "A4").unwrap();
        assert_eq!(a4.verdict, Verdict::NotFalsifiableAtFiniteScale);
    }

    #[test]
    fn json_round_trip() {
        let d = AbstractHairData::seeded(9, 3).unwrap();
        let text = serde_json::to_string(&d.to_json()).unwrap();
        let back = AbstractHairData::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, d);
    }

    proptest! {
        #[test]
        fn measure_is_strictly_monotone(seed in 0u64..200, a in 1u32..255, extra in 0u32..8) {
            let s = FiniteMetricSpace::seeded(8, seed).unwrap();
            let small: Vec<usize> = (0..8).filter(|i| a & (1 << i) != 0).collect();
            let mut big = small.clone();
            if !big.contains(&(extra as usize)) {
                big.push(extra as usize);
                prop_assert!(whitney_measure(&s, &small).unwrap() < whitney_measure(&s, &big).unwrap());
            }
        }

        #[test]
        fn heights_depend_only_on_prefixes(seed in 0u64..100, cut in 1usize..5) {
            let d = AbstractHairData::seeded(15, seed).unwrap();
            let h = height_function(&d).unwrap();
            let c = d.chains.iter().position(|c| c.len() > cut);
            if let Some(c) = c {
                let prefix: Vec<usize> = d.chains[c][..cut].to_vec();
                let dropped: Vec<usize> = d.chains[c][cut..].to_vec();
                let mut chains = d.chains.clone();
                chains[c] = prefix.clone();
                chains.extend(dropped.into_iter().map(|p| vec![p]));
                let t = AbstractHairData { space: d.space.clone(), chains };
                let h2 = height_function(&t).unwrap();
                for p in prefix {
                    prop_assert_eq!(&h[p], &h2[p]);
                }
            }
        }
    }
}
