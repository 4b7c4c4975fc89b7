//! Treatment assignment mechanisms.
//!
//! Cluster-level complete randomization and matched-pairs randomization act
//! on an isolated set: the treated isolated units get their whole closed
//! in-neighborhood treated, everything else stays at control. Bernoulli
//! assignment is the baseline coin-flip design without isolated-set
//! structure.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::isolation::IsolatedSet;
use crate::seeds;

/// A realized treatment vector with its isolated-set split.
///
/// Invariants: `s1` and `s0` partition the isolated set; every unit in the
/// closed in-neighborhood of an `s1` member has `z = 1`, of an `s0` member
/// has `z = 0` (guaranteed by neighborhood disjointness), and units outside
/// all treated in-neighborhoods have `z = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    z: Vec<u8>,
    s1: Vec<usize>,
    s0: Vec<usize>,
    strata: Option<Vec<Vec<usize>>>,
}

impl Assignment {
    /// Per-unit treatment indicators.
    pub fn z(&self) -> &[u8] {
        &self.z
    }

    /// Treated isolated units.
    pub fn s1(&self) -> &[usize] {
        &self.s1
    }

    /// Control isolated units.
    pub fn s0(&self) -> &[usize] {
        &self.s0
    }

    /// Matched strata when built by matched-pairs randomization.
    pub fn strata(&self) -> Option<&[Vec<usize>]> {
        self.strata.as_deref()
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `unit,z,arm` table. Arms: `treated_isolated`, `control_isolated`,
    /// `spillover` (treated outside the isolated set), `background`.
    pub fn to_csv(&self) -> String {
        let mut arm = vec!["background"; self.z.len()];
        for (i, &zi) in self.z.iter().enumerate() {
            if zi == 1 {
                arm[i] = "spillover";
            }
        }
        for &i in &self.s1 {
            arm[i] = "treated_isolated";
        }
        for &i in &self.s0 {
            arm[i] = "control_isolated";
        }
        let mut out = String::from("unit,z,arm\n");
        for (i, (&zi, a)) in self.z.iter().zip(&arm).enumerate() {
            out.push_str(&format!("{i},{zi},{a}\n"));
        }
        out
    }
}

/// Uniform split of `members` into a treated half of size `floor(len/2)`
/// and the rest, both in member order.
pub(crate) fn complete_random_split<R: Rng>(
    members: &[usize],
    rng: &mut R,
) -> (Vec<usize>, Vec<usize>) {
    let k = members.len() / 2;
    let chosen = rand::seq::index::sample(rng, members.len(), k);
    let mut treated = vec![false; members.len()];
    for idx in chosen.iter() {
        treated[idx] = true;
    }
    let mut s1 = Vec::with_capacity(k);
    let mut s0 = Vec::with_capacity(members.len() - k);
    for (idx, &unit) in members.iter().enumerate() {
        if treated[idx] {
            s1.push(unit);
        } else {
            s0.push(unit);
        }
    }
    (s1, s0)
}

fn treat_neighborhoods(g: &DirectedGraph, s1: &[usize]) -> Vec<u8> {
    let mut z = vec![0u8; g.n()];
    for &i in s1 {
        for j in g.closed_in_neighborhood(i) {
            z[j] = 1;
        }
    }
    z
}

/// Complete randomization at the cluster level: a uniformly random
/// `floor(|S|/2)`-subset of the isolated set is treated, and each treated
/// unit's closed in-neighborhood is set to treatment.
pub fn cluster_complete_randomization(
    g: &DirectedGraph,
    s: &IsolatedSet,
    seed: u64,
) -> Result<Assignment> {
    if s.len() < 2 {
        return Err(Error::IsolatedSetTooSmall { size: s.len() });
    }
    let mut rng = seeds::rng(seed);
    let (s1, s0) = complete_random_split(s.members(), &mut rng);
    let z = treat_neighborhoods(g, &s1);
    Ok(Assignment {
        z,
        s1,
        s0,
        strata: None,
    })
}

/// Matched-pairs randomization: sort the isolated set by in-degree
/// descending (ties by unit index), pair adjacent units, fold the leftover
/// unit of an odd set into a final three-unit stratum, and treat exactly one
/// uniformly chosen unit per stratum. Treated units then get their closed
/// in-neighborhoods treated as under complete randomization.
pub fn matched_pairs_randomization(
    g: &DirectedGraph,
    s: &IsolatedSet,
    seed: u64,
) -> Result<Assignment> {
    if s.len() < 2 {
        return Err(Error::IsolatedSetTooSmall { size: s.len() });
    }
    let mut rng = seeds::rng(seed);
    let mut sorted = s.members().to_vec();
    sorted.sort_unstable_by(|&a, &b| {
        g.in_degree(b)
            .cmp(&g.in_degree(a))
            .then(a.cmp(&b))
    });

    let n_strata = sorted.len() / 2;
    let mut strata: Vec<Vec<usize>> = Vec::with_capacity(n_strata);
    for k in 0..n_strata {
        let mut stratum = vec![sorted[2 * k], sorted[2 * k + 1]];
        if k == n_strata - 1 && sorted.len() % 2 == 1 {
            stratum.push(sorted[2 * k + 2]);
        }
        strata.push(stratum);
    }

    let mut s1 = Vec::with_capacity(n_strata);
    let mut s0 = Vec::new();
    for stratum in &strata {
        let pick = rng.random_range(0..stratum.len());
        for (idx, &unit) in stratum.iter().enumerate() {
            if idx == pick {
                s1.push(unit);
            } else {
                s0.push(unit);
            }
        }
    }
    let z = treat_neighborhoods(g, &s1);
    Ok(Assignment {
        z,
        s1,
        s0,
        strata: Some(strata),
    })
}

/// Deterministic assignment for a given isolated-set split: treats the
/// closed in-neighborhood of every `s1` member. Useful for replaying a
/// recorded split or enumerating all splits exhaustively. The caller
/// guarantees `s1` and `s0` come from one isolated set.
pub fn assignment_from_split(g: &DirectedGraph, s1: &[usize], s0: &[usize]) -> Assignment {
    Assignment {
        z: treat_neighborhoods(g, s1),
        s1: s1.to_vec(),
        s0: s0.to_vec(),
        strata: None,
    }
}

/// Wraps a raw treatment vector as an assignment without isolated-set
/// structure (the Bernoulli-design shape).
pub fn assignment_from_z(z: Vec<u8>) -> Assignment {
    Assignment {
        z,
        s1: Vec::new(),
        s0: Vec::new(),
        strata: None,
    }
}

/// Independent Bernoulli(p) coin flips per unit; no isolated-set structure.
pub fn bernoulli_assignment(n: usize, p: f64, seed: u64) -> Result<Assignment> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bernoulli p must lie strictly in (0,1), got {p}"
        )));
    }
    let mut rng = seeds::rng(seed);
    let z = (0..n).map(|_| u8::from(rng.random_bool(p))).collect();
    Ok(Assignment {
        z,
        s1: Vec::new(),
        s0: Vec::new(),
        strata: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isolation::{random_isolation, weighted_random_isolation, WeightVector};

    fn p5() -> DirectedGraph {
        DirectedGraph::from_edges(5, (0..4).map(|i| (i, i + 1)), false).unwrap()
    }

    /// Forces the isolated set {0, 3} on the 5-path (1-indexed {1, 4}).
    fn p5_set_03() -> (DirectedGraph, IsolatedSet) {
        let g = p5();
        for seed in 0.. {
            let s = random_isolation(&g, seed);
            let mut m = s.members().to_vec();
            m.sort_unstable();
            if m == [0, 3] {
                return (g, s);
            }
        }
        unreachable!()
    }

    #[test]
    fn cr_on_p5_produces_the_two_blocks() {
        let (g, s) = p5_set_03();
        let mut seen = std::collections::HashSet::new();
        for seed in 0..200 {
            let a = cluster_complete_randomization(&g, &s, seed).unwrap();
            assert_eq!(a.s1().len(), 1);
            seen.insert(a.z().to_vec());
        }
        let mut expect = std::collections::HashSet::new();
        expect.insert(vec![1, 1, 0, 0, 0]);
        expect.insert(vec![0, 0, 1, 1, 1]);
        assert_eq!(seen, expect);
    }

    #[test]
    fn cr_split_sizes_floor() {
        let g = DirectedGraph::from_edges(7, std::iter::empty(), false).unwrap();
        let s = random_isolation(&g, 3); // all 7 units
        let a = cluster_complete_randomization(&g, &s, 1).unwrap();
        assert_eq!(a.s1().len(), 3);
        assert_eq!(a.s0().len(), 4);
    }

    #[test]
    fn full_and_zero_exposure_hold_by_construction() {
        let g = p5();
        for seed in 0..100 {
            let s = weighted_random_isolation(&g, &WeightVector::uniform(5), seed);
            if s.len() < 2 {
                continue;
            }
            let a = cluster_complete_randomization(&g, &s, seed ^ 0xabc).unwrap();
            for &i in a.s1() {
                assert!(g.closed_in_neighborhood(i).iter().all(|&j| a.z()[j] == 1));
            }
            for &i in a.s0() {
                assert!(g.closed_in_neighborhood(i).iter().all(|&j| a.z()[j] == 0));
            }
            // Units outside treated neighborhoods stay at control.
            let mut inside = vec![false; g.n()];
            for &i in a.s1() {
                for j in g.closed_in_neighborhood(i) {
                    inside[j] = true;
                }
            }
            for i in 0..g.n() {
                if !inside[i] {
                    assert_eq!(a.z()[i], 0);
                }
            }
        }
    }

    #[test]
    fn singleton_set_is_an_error() {
        let edges = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j)));
        let g = DirectedGraph::from_edges(4, edges, false).unwrap();
        let s = random_isolation(&g, 0);
        assert_eq!(s.len(), 1);
        assert!(matches!(
            cluster_complete_randomization(&g, &s, 0),
            Err(Error::IsolatedSetTooSmall { size: 1 })
        ));
        assert!(matches!(
            matched_pairs_randomization(&g, &s, 0),
            Err(Error::IsolatedSetTooSmall { size: 1 })
        ));
    }

    #[test]
    fn mpr_pairs_by_descending_degree() {
        // Star-ish graph: degrees 4,1,1,1,1 plus two isolated units 5,6.
        let g = DirectedGraph::from_edges(7, [(0, 1), (0, 2), (0, 3), (0, 4)], false).unwrap();
        // Isolated set on an edgeless subset works too; craft S directly from
        // the edgeless graph for stratum checks.
        let edgeless = DirectedGraph::from_edges(4, std::iter::empty(), false).unwrap();
        let s = random_isolation(&edgeless, 0);
        let a = matched_pairs_randomization(&edgeless, &s, 1).unwrap();
        let strata = a.strata().unwrap();
        assert_eq!(strata.len(), 2);
        assert!(strata.iter().all(|st| st.len() == 2));
        drop(g);
    }

    #[test]
    fn mpr_odd_set_has_final_triple() {
        let g = DirectedGraph::from_edges(5, std::iter::empty(), false).unwrap();
        let s = random_isolation(&g, 0); // all 5 units
        let a = matched_pairs_randomization(&g, &s, 2).unwrap();
        let strata = a.strata().unwrap();
        assert_eq!(strata.len(), 2);
        assert_eq!(strata[0].len(), 2);
        assert_eq!(strata[1].len(), 3);
        assert_eq!(a.s1().len(), 2);
        for stratum in strata {
            let treated = stratum.iter().filter(|&&u| a.s1().contains(&u)).count();
            assert_eq!(treated, 1);
        }
    }

    #[test]
    fn mpr_sorts_by_degree_then_index() {
        // P5's set {0,3}: degrees 1 and 2, so 3 sorts first.
        let (g, s) = p5_set_03();
        let a = matched_pairs_randomization(&g, &s, 5).unwrap();
        let strata = a.strata().unwrap();
        assert_eq!(strata, &[vec![3, 0]]);
    }

    #[test]
    fn mpr_exactly_one_treated_per_stratum_over_many_draws() {
        let g = DirectedGraph::from_edges(9, std::iter::empty(), false).unwrap();
        let s = random_isolation(&g, 0);
        for seed in 0..1000 {
            let a = matched_pairs_randomization(&g, &s, seed).unwrap();
            for stratum in a.strata().unwrap() {
                let treated = stratum.iter().filter(|&&u| a.z()[u] == 1).count();
                assert_eq!(treated, 1);
            }
        }
    }

    #[test]
    fn bernoulli_rejects_degenerate_p() {
        assert!(bernoulli_assignment(10, 0.0, 0).is_err());
        assert!(bernoulli_assignment(10, 1.0, 0).is_err());
    }

    #[test]
    fn bernoulli_mean_near_half() {
        let a = bernoulli_assignment(10_000, 0.5, 11).unwrap();
        let mean = a.z().iter().map(|&z| z as f64).sum::<f64>() / 10_000.0;
        assert!((0.48..=0.52).contains(&mean), "mean = {mean}");
    }

    #[test]
    fn bernoulli_is_deterministic() {
        let a = bernoulli_assignment(100, 0.3, 5).unwrap();
        let b = bernoulli_assignment(100, 0.3, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cr_marginal_treatment_probability() {
        // |S| = 5 under CR: each member treated with probability 2/5.
        let g = DirectedGraph::from_edges(5, std::iter::empty(), false).unwrap();
        let s = random_isolation(&g, 0);
        let draws = 10_000;
        let mut counts = vec![0usize; 5];
        for seed in 0..draws {
            let a = cluster_complete_randomization(&g, &s, seed).unwrap();
            for &i in a.s1() {
                counts[i] += 1;
            }
        }
        let expect = 2.0 / 5.0;
        let se = (expect * (1.0 - expect) / draws as f64).sqrt();
        for &c in &counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - expect).abs() < 5.0 * se, "freq = {freq}");
        }
    }

    #[test]
    fn csv_arms_are_classified() {
        let (g, s) = p5_set_03();
        let a = cluster_complete_randomization(&g, &s, 0).unwrap();
        let csv = a.to_csv();
        assert!(csv.starts_with("unit,z,arm\n"));
        assert!(csv.contains("treated_isolated"));
        assert!(csv.contains("control_isolated"));
        assert!(csv.contains("spillover"));
    }
}
