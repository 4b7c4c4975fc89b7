//! Random isolation samplers.
//!
//! `random_isolation` repeatedly picks a unit uniformly from the remaining
//! pool, adds it to the isolated set, and removes every unit whose exposure
//! the pick could disturb. `weighted_random_isolation` replaces the uniform
//! pick with per-round roulette probabilities `w_j / sum of remaining w`,
//! realized by drawing one Beta(w_i, 1) key per unit up front and repeatedly
//! taking the argmax over the remaining pool.
//!
//! The exact set distribution for small graphs is available from
//! [`isolated_set_distribution`], which enumerates selection sequences with
//! roulette probabilities; it is a separate code path from the key-based
//! samplers and is used to certify them.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::seeds;

/// Smallest weight entry kept after construction; zeros are floored here so
/// keys stay finite.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Unit cap for exact enumeration of isolated-set distributions.
pub const ENUMERATION_LIMIT: usize = 20;

/// Nonnegative per-unit sampling weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    /// Validates entries (finite, nonnegative) and floors them at
    /// [`WEIGHT_FLOOR`] so no entry is exactly zero.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "weight[{i}] = {v} must be finite and nonnegative"
                )));
            }
        }
        let w = values.into_iter().map(|v| v.max(WEIGHT_FLOOR)).collect();
        Ok(Self { w })
    }

    /// All-ones weights.
    pub fn uniform(n: usize) -> Self {
        Self { w: vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `unit,weight` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("unit,weight\n");
        for (i, w) in self.w.iter().enumerate() {
            out.push_str(&format!("{i},{w}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line == "unit,weight" {
                continue;
            }
            let (unit, weight) = line.split_once(',').ok_or(Error::CsvParse {
                line: line_no,
                msg: "expected `unit,weight`".into(),
            })?;
            let unit: usize = unit.trim().parse().map_err(|_| Error::CsvParse {
                line: line_no,
                msg: format!("bad unit `{unit}`"),
            })?;
            if unit != values.len() {
                return Err(Error::CsvParse {
                    line: line_no,
                    msg: format!("units must be consecutive from 0, got {unit}"),
                });
            }
            let weight: f64 = weight.trim().parse().map_err(|_| Error::CsvParse {
                line: line_no,
                msg: format!("bad weight `{weight}`"),
            })?;
            values.push(weight);
        }
        Self::new(values)
    }
}

/// Ordered isolated set: closed in-neighborhoods of members are pairwise
/// disjoint and no further unit could be added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolatedSet {
    members: Vec<usize>,
    source_seed: u64,
}

impl IsolatedSet {
    /// Members in selection order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Seed the sampler ran with.
    pub fn source_seed(&self) -> u64 {
        self.source_seed
    }

    /// `order,unit` table in selection order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("order,unit\n");
        for (k, u) in self.members.iter().enumerate() {
            out.push_str(&format!("{k},{u}\n"));
        }
        out
    }
}

/// Uniform random isolation: each round picks uniformly from the remaining
/// pool. Equal in distribution to weighted isolation with uniform weights.
pub fn random_isolation(g: &DirectedGraph, seed: u64) -> IsolatedSet {
    let mut rng = seeds::rng(seed);
    let n = g.n();
    let mut members = Vec::new();
    // Swap-remove pool keeps the per-round pick exactly uniform.
    let mut pool: Vec<usize> = (0..n).collect();
    let mut pos: Vec<usize> = (0..n).collect();
    let mut alive = vec![true; n];

    while !pool.is_empty() {
        let k = rng.random_range(0..pool.len());
        let picked = pool[k];
        members.push(picked);
        for u in g.removal_set(picked) {
            if alive[u] {
                alive[u] = false;
                let at = pos[u];
                let last = pool.len() - 1;
                pool.swap(at, last);
                pos[pool[at]] = at;
                pool.pop();
            }
        }
    }
    IsolatedSet {
        members,
        source_seed: seed,
    }
}

/// Weighted random isolation via Beta(w, 1) keys.
///
/// Keys are `log(U) / w` with `U` uniform on (0, 1], the log of
/// `X = U^(1/w) ~ Beta(w, 1)`, compared in the log domain so large weights
/// do not underflow. Larger key wins; float ties break toward the smaller
/// unit index. Per round this selects unit `j` from the remaining pool with
/// probability `w_j / sum of remaining w`.
pub fn weighted_random_isolation(g: &DirectedGraph, w: &WeightVector, seed: u64) -> IsolatedSet {
    assert_eq!(w.len(), g.n(), "weight vector length must match unit count");
    let mut rng = seeds::rng(seed);
    let n = g.n();
    let keys: Vec<f64> = w
        .values()
        .iter()
        .map(|&wi| {
            let u = 1.0 - rng.random::<f64>(); // (0, 1]
            u.ln() / wi
        })
        .collect();

    // Scanning units in descending key order and keeping the still-alive
    // ones is the same as repeatedly taking the argmax over the pool.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| {
        keys[b]
            .partial_cmp(&keys[a])
            .expect("keys are finite")
            .then(a.cmp(&b))
    });

    let mut alive = vec![true; n];
    let mut members = Vec::new();
    for i in order {
        if !alive[i] {
            continue;
        }
        members.push(i);
        for u in g.removal_set(i) {
            alive[u] = false;
        }
    }
    IsolatedSet {
        members,
        source_seed: seed,
    }
}

/// Draws `n_samples` independent key pairs for weights `(w_i, w_j)` and
/// returns the fraction of pairs where key i wins. The population value is
/// `w_i / (w_i + w_j)`.
pub fn beta_key_law_check(w_i: f64, w_j: f64, n_samples: usize, seed: u64) -> f64 {
    assert!(w_i > 0.0 && w_j > 0.0);
    let mut rng = seeds::rng(seed);
    let mut wins = 0usize;
    for _ in 0..n_samples {
        let key_i = (1.0 - rng.random::<f64>()).ln() / w_i;
        let key_j = (1.0 - rng.random::<f64>()).ln() / w_j;
        if key_i > key_j {
            wins += 1;
        }
    }
    wins as f64 / n_samples as f64
}

/// Network-derived candidate weight families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightFamily {
    /// `w_i = max(d_i, 1)^l` from in-degrees.
    Degree,
    /// `w_i = max(v_i, floor)^l` where `v` is the principal eigenvector of
    /// the squared graph.
    Spectral,
}

impl WeightFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightFamily::Degree => "degree",
            WeightFamily::Spectral => "spectral",
        }
    }
}

/// Canonical id string for a candidate, e.g. `degree^2`.
pub fn weight_id(family: WeightFamily, exponent: i32) -> String {
    format!("{}^{}", family.as_str(), exponent)
}

/// Parses `degree^<l>` / `spectral^<l>` ids.
pub fn parse_weight_id(id: &str) -> Result<(WeightFamily, i32)> {
    let (family, exp) = id
        .split_once('^')
        .ok_or_else(|| Error::UnknownWeightId(id.into()))?;
    let family = match family.trim() {
        "degree" => WeightFamily::Degree,
        "spectral" => WeightFamily::Spectral,
        _ => return Err(Error::UnknownWeightId(id.into())),
    };
    let exponent: i32 = exp
        .trim()
        .parse()
        .map_err(|_| Error::UnknownWeightId(id.into()))?;
    Ok((family, exponent))
}

/// Builds a candidate weight vector. Degrees of zero are floored at 1 before
/// exponentiation so negative exponents stay finite; spectral entries are
/// floored at [`WEIGHT_FLOOR`]. Exponent 0 gives the uniform weight in both
/// families.
pub fn candidate_weights(g: &DirectedGraph, family: WeightFamily, exponent: i32) -> WeightVector {
    let raw: Vec<f64> = match family {
        WeightFamily::Degree => g
            .in_degrees()
            .iter()
            .map(|&d| (d.max(1) as f64).powi(exponent))
            .collect(),
        WeightFamily::Spectral => {
            let sq = g.squared_graph();
            principal_for_weights(&sq)
                .iter()
                .map(|&v| v.max(WEIGHT_FLOOR).powi(exponent))
                .collect()
        }
    };
    WeightVector::new(raw).expect("candidate weights are finite and nonnegative")
}

fn principal_for_weights(g: &DirectedGraph) -> Vec<f64> {
    use crate::graph::{principal_eigenvector, EIGEN_MAX_ITER, EIGEN_TOL};
    principal_eigenvector(g, EIGEN_TOL, EIGEN_MAX_ITER)
        .expect("candidate weights need a nonempty graph")
        .vector
}

/// Exact distribution of the isolated set under weighted isolation,
/// by recursion over selection sequences with per-round roulette
/// probabilities and memoization on the remaining pool. Returns
/// `(members sorted ascending, probability)` pairs in a deterministic order.
///
/// This is the certification oracle for the key-based sampler; it shares no
/// sampling code with it.
pub fn isolated_set_distribution(
    g: &DirectedGraph,
    w: &WeightVector,
) -> Result<Vec<(Vec<usize>, f64)>> {
    let n = g.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    assert_eq!(w.len(), n);
    let removal_masks: Vec<u64> = (0..n)
        .map(|i| {
            g.removal_set(i)
                .into_iter()
                .fold(0u64, |m, u| m | (1u64 << u))
        })
        .collect();
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut memo: HashMap<u64, Vec<(u64, f64)>> = HashMap::new();
    let dist = final_set_distribution(full, w.values(), &removal_masks, &mut memo);

    let mut out: Vec<(Vec<usize>, f64)> = dist
        .into_iter()
        .map(|(mask, p)| {
            let members: Vec<usize> = (0..n).filter(|&i| mask & (1u64 << i) != 0).collect();
            (members, p)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Distribution of the final selected mask starting from `pool`.
fn final_set_distribution(
    pool: u64,
    w: &[f64],
    removal_masks: &[u64],
    memo: &mut HashMap<u64, Vec<(u64, f64)>>,
) -> Vec<(u64, f64)> {
    if pool == 0 {
        return vec![(0, 1.0)];
    }
    if let Some(hit) = memo.get(&pool) {
        return hit.clone();
    }
    let total: f64 = (0..w.len())
        .filter(|&j| pool & (1u64 << j) != 0)
        .map(|j| w[j])
        .sum();
    let mut acc: HashMap<u64, f64> = HashMap::new();
    for j in 0..w.len() {
        if pool & (1u64 << j) == 0 {
            continue;
        }
        let p_pick = w[j] / total;
        let rest = final_set_distribution(pool & !removal_masks[j], w, removal_masks, memo);
        for (mask, p) in rest {
            *acc.entry(mask | (1u64 << j)).or_insert(0.0) += p_pick * p;
        }
    }
    let mut result: Vec<(u64, f64)> = acc.into_iter().collect();
    result.sort_by_key(|&(mask, _)| mask);
    memo.insert(pool, result.clone());
    result
}

/// Checks the defining isolated-set invariants: pairwise-disjoint closed
/// in-neighborhoods and maximality (the removal sets of the members cover
/// every unit). Used heavily in tests.
pub fn check_isolated_set(g: &DirectedGraph, s: &IsolatedSet) -> bool {
    let mut covered_in = vec![false; g.n()];
    for &i in s.members() {
        for j in g.closed_in_neighborhood(i) {
            if covered_in[j] {
                return false;
            }
            covered_in[j] = true;
        }
    }
    let mut removed = vec![false; g.n()];
    for &i in s.members() {
        for j in g.removal_set(i) {
            removed[j] = true;
        }
    }
    removed.into_iter().all(|r| r)
}
