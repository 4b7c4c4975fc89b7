//! In-degree probability mass functions over a fixed reference support.
//!
//! All PMFs compared in the surrogate share the support `0..=d_max(G)` so
//! that L2 distances against the population PMF are well-defined.

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// Empirical in-degree PMF on the support `0..=d_max_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePmf {
    probs: Vec<f64>,
    empty: bool,
}

impl DegreePmf {
    /// Probability per degree, indexed by degree.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest degree in the support.
    pub fn support_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// True when built from an empty subset; all probabilities are zero and
    /// the consumer decides the penalty.
    pub fn is_empty_subset(&self) -> bool {
        self.empty
    }
}

/// Empirical PMF of `{d_i : i in subset}` over the support `0..=d_max_ref`.
/// The population PMF uses `subset = all units`. An empty subset yields a
/// flagged-empty PMF rather than an error.
pub fn degree_pmf(g: &DirectedGraph, subset: &[usize], d_max_ref: usize) -> Result<DegreePmf> {
    let mut probs = vec![0.0; d_max_ref + 1];
    if subset.is_empty() {
        return Ok(DegreePmf { probs, empty: true });
    }
    for &i in subset {
        let d = g.in_degree(i);
        if d > d_max_ref {
            return Err(Error::DegreeOutOfSupport {
                degree: d,
                d_max_ref,
            });
        }
        probs[d] += 1.0;
    }
    let total = subset.len() as f64;
    for p in &mut probs {
        *p /= total;
    }
    Ok(DegreePmf {
        probs,
        empty: false,
    })
}

/// Squared L2 distance between two PMFs on the same support.
pub fn l2_pmf_distance_sq(p: &DegreePmf, q: &DegreePmf) -> Result<f64> {
    if p.probs.len() != q.probs.len() {
        return Err(Error::SupportMismatch {
            left: p.probs.len(),
            right: q.probs.len(),
        });
    }
    Ok(p.probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}
