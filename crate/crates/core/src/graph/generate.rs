//! Synthetic network generators.
//!
//! All generators return undirected graphs stored symmetrically and are
//! bit-reproducible for a given `(model, n, params, seed)`. Default
//! parameters target the reference summary statistics at n = 1200 (mean
//! degrees roughly 6 for BA, 6.7 for RG, 10 for SW, 6.9 for ER, 5.3 for
//! SBM).

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::seeds;

/// Network model families with their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkModel {
    /// Preferential attachment: an initial clique of `m` units, then each
    /// arrival attaches `m` edges to distinct existing units with
    /// probability proportional to degree.
    BarabasiAlbert { m: usize },
    /// Units placed uniformly in the unit square; edge when within `radius`.
    RandomGeometric { radius: f64 },
    /// Ring lattice of even degree `k`, each edge rewired with probability
    /// `beta` to a uniform non-duplicate target.
    SmallWorld { k: usize, beta: f64 },
    /// Independent edge probability `p` per pair.
    ErdosRenyi { p: f64 },
    /// Block sizes plus a symmetric block probability matrix.
    StochasticBlock {
        sizes: Vec<usize>,
        probs: Vec<Vec<f64>>,
    },
}

impl NetworkModel {
    /// Short family id: `ba`, `rg`, `sw`, `er`, `sbm`.
    pub fn family(&self) -> &'static str {
        match self {
            NetworkModel::BarabasiAlbert { .. } => "ba",
            NetworkModel::RandomGeometric { .. } => "rg",
            NetworkModel::SmallWorld { .. } => "sw",
            NetworkModel::ErdosRenyi { .. } => "er",
            NetworkModel::StochasticBlock { .. } => "sbm",
        }
    }

    /// Default parameters for a family id at a given size.
    pub fn default_for(family: &str, n: usize) -> Result<NetworkModel> {
        match family {
            "ba" => Ok(NetworkModel::BarabasiAlbert { m: 3 }),
            // Radius for mean degree ~6.7 after boundary loss in the unit square.
            "rg" => Ok(NetworkModel::RandomGeometric {
                radius: 1.02 * (6.7 / (std::f64::consts::PI * (n.max(2) - 1) as f64)).sqrt(),
            }),
            "sw" => Ok(NetworkModel::SmallWorld { k: 10, beta: 0.2 }),
            // Mean degree ~6.9 (p ~ 0.00575 at n = 1200).
            "er" => Ok(NetworkModel::ErdosRenyi {
                p: (6.9 / (n.max(2) - 1) as f64).min(1.0),
            }),
            "sbm" => {
                let base = n / 3;
                let sizes = vec![base, base, n - 2 * base];
                let probs = vec![
                    vec![0.01, 0.0016, 0.0016],
                    vec![0.0016, 0.01, 0.0016],
                    vec![0.0016, 0.0016, 0.01],
                ];
                Ok(NetworkModel::StochasticBlock { sizes, probs })
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown network family `{other}`"
            ))),
        }
    }
}

/// Generates an undirected network of `n` units. Deterministic given
/// `(model, n, seed)`.
pub fn generate(model: &NetworkModel, n: usize, seed: u64) -> Result<DirectedGraph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = seeds::rng(seed);
    let edges = match model {
        NetworkModel::BarabasiAlbert { m } => barabasi_albert(n, *m, &mut rng)?,
        NetworkModel::RandomGeometric { radius } => random_geometric(n, *radius, &mut rng)?,
        NetworkModel::SmallWorld { k, beta } => small_world(n, *k, *beta, &mut rng)?,
        NetworkModel::ErdosRenyi { p } => erdos_renyi(n, *p, &mut rng)?,
        NetworkModel::StochasticBlock { sizes, probs } => {
            stochastic_block(n, sizes, probs, &mut rng)?
        }
    };
    DirectedGraph::from_edges(n, edges, false)
}

fn barabasi_albert<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if m < 1 {
        return Err(Error::InvalidParameter("BA needs m >= 1".into()));
    }
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "BA needs n >= m, got n={n}, m={m}"
        )));
    }
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(m * (m - 1) / 2 + (n - m) * m);
    // Endpoint bag: each unit appears once per incident edge.
    let mut bag: Vec<usize> = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in i + 1..m {
            edges.push((i, j));
            bag.push(i);
            bag.push(j);
        }
    }
    let mut targets: Vec<usize> = Vec::with_capacity(m);
    for v in m..n {
        targets.clear();
        while targets.len() < m {
            let candidate = if bag.is_empty() {
                rng.random_range(0..v)
            } else {
                bag[rng.random_range(0..bag.len())]
            };
            if candidate != v && !targets.contains(&candidate) {
                targets.push(candidate);
            }
        }
        for &t in &targets {
            edges.push((v, t));
            bag.push(v);
            bag.push(t);
        }
    }
    Ok(edges)
}

fn random_geometric<R: Rng>(n: usize, radius: f64, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "RG radius must lie in (0,1], got {radius}"
        )));
    }
    let points: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let r2 = radius * radius;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            if dx * dx + dy * dy <= r2 {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

fn small_world<R: Rng>(n: usize, k: usize, beta: f64, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if k == 0 || k % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "SW ring degree k must be even and positive, got {k}"
        )));
    }
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "SW needs k < n, got k={k}, n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "SW rewire probability must lie in [0,1], got {beta}"
        )));
    }
    let norm = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut present: HashSet<(usize, usize)> = HashSet::new();
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * k / 2);
    for i in 0..n {
        for j in 1..=k / 2 {
            let e = norm(i, (i + j) % n);
            edges.push(e);
            present.insert(e);
        }
    }
    // Rewire pass; the edge count is preserved exactly.
    for idx in 0..edges.len() {
        if !rng.random_bool(beta) {
            continue;
        }
        let (i, old) = edges[idx];
        let mut accepted = None;
        for _ in 0..100 {
            let t = rng.random_range(0..n);
            if t == i {
                continue;
            }
            let e = norm(i, t);
            if present.contains(&e) {
                continue;
            }
            accepted = Some(e);
            break;
        }
        if let Some(e) = accepted {
            present.remove(&norm(i, old));
            present.insert(e);
            edges[idx] = e;
        }
    }
    Ok(edges)
}

fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "ER edge probability must lie in [0,1], got {p}"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

fn stochastic_block<R: Rng>(
    n: usize,
    sizes: &[usize],
    probs: &[Vec<f64>],
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if sizes.iter().sum::<usize>() != n {
        return Err(Error::InvalidParameter(format!(
            "SBM block sizes must sum to n={n}"
        )));
    }
    let b = sizes.len();
    if probs.len() != b || probs.iter().any(|row| row.len() != b) {
        return Err(Error::InvalidParameter(
            "SBM probability matrix must be square with one row per block".into(),
        ));
    }
    for (r, row) in probs.iter().enumerate() {
        for (c, &p) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "SBM probability [{r}][{c}] = {p} out of [0,1]"
                )));
            }
            if (p - probs[c][r]).abs() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "SBM probability matrix must be symmetric".into(),
                ));
            }
        }
    }
    let mut block = vec![0usize; n];
    let mut start = 0;
    for (b_idx, &size) in sizes.iter().enumerate() {
        for u in start..start + size {
            block[u] = b_idx;
        }
        start += size;
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(probs[block[i]][block[j]]) {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}
