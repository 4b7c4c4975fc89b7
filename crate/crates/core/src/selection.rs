//! MSE surrogate and adaptive weight selection.
//!
//! One surrogate draw samples an isolated set under a candidate weight,
//! splits it by complete randomization, and scores the degree-PMF mismatch
//! of the two arms against the population plus the inverse arm sizes:
//!
//! ```text
//! m = ||P_S1 - P_G||^2 + ||P_S0 - P_G||^2 + 1/|S1| + 1/|S0|
//! ```
//!
//! Averaging over draws estimates the surrogate for that weight; the
//! candidate with the smallest mean wins. A set-only variant skips the
//! split and scores `||P_S - P_G||^2 + 1/|S|`, which is cheaper and useful
//! for analysis on tiny graphs. Exact values by enumeration are available
//! for small graphs as the certification oracle of the Monte Carlo path.
//!
//! A draw whose isolated set cannot be split (fewer than 2 units) carries a
//! degeneracy flag; any degenerate draw disqualifies its candidate, since
//! the split statistic is undefined there and such weights shrink the
//! usable sample drastically.

use itertools::Itertools;
use rayon::prelude::*;

use crate::assignment::complete_random_split;
use crate::error::{Error, Result};
use crate::graph::{degree_pmf, l2_pmf_distance_sq, DegreePmf, DirectedGraph};
use crate::isolation::{isolated_set_distribution, weighted_random_isolation, WeightVector};
use crate::seeds;

/// Default number of pre-experiment draws per candidate.
pub const DEFAULT_N_PRE: usize = 1000;

/// Whether a surrogate draw splits the isolated set by complete
/// randomization (the full statistic) or scores the set as a whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurrogateMode {
    /// Arm statistic: both arm PMFs plus inverse arm sizes.
    WithCr,
    /// Set statistic: set PMF plus inverse set size; never degenerate.
    NoCr,
}

impl SurrogateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SurrogateMode::WithCr => "with_cr",
            SurrogateMode::NoCr => "no_cr",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "with_cr" => Ok(SurrogateMode::WithCr),
            "no_cr" => Ok(SurrogateMode::NoCr),
            other => Err(Error::Config(format!("unknown surrogate mode `{other}`"))),
        }
    }
}

/// One scored draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateSample {
    /// PMF mismatch part of the statistic.
    pub l2_term: f64,
    /// Inverse-size part of the statistic.
    pub size_term: f64,
    /// Size of the sampled isolated set.
    pub s_size: usize,
    /// Set when the set could not be split in `WithCr` mode.
    pub degenerate: bool,
}

impl SurrogateSample {
    pub fn total(&self) -> f64 {
        self.l2_term + self.size_term
    }
}

/// Samples one isolated set (and in `WithCr` mode one split) and scores it.
/// `population` must be the degree PMF of all units on the support
/// `0..=max degree`.
pub fn surrogate_draw(
    g: &DirectedGraph,
    w: &WeightVector,
    population: &DegreePmf,
    mode: SurrogateMode,
    seed: u64,
) -> SurrogateSample {
    let d_max = population.support_max();
    let s = weighted_random_isolation(g, w, seeds::mix(seed, 0));
    match mode {
        SurrogateMode::NoCr => {
            let pmf = degree_pmf(g, s.members(), d_max).expect("subset degrees fit the support");
            SurrogateSample {
                l2_term: l2_pmf_distance_sq(&pmf, population).expect("same support"),
                size_term: 1.0 / s.len() as f64,
                s_size: s.len(),
                degenerate: false,
            }
        }
        SurrogateMode::WithCr => {
            if s.len() < 2 {
                return SurrogateSample {
                    l2_term: 0.0,
                    size_term: 0.0,
                    s_size: s.len(),
                    degenerate: true,
                };
            }
            let mut rng = seeds::rng(seeds::mix(seed, 1));
            let (s1, s0) = complete_random_split(s.members(), &mut rng);
            let p1 = degree_pmf(g, &s1, d_max).expect("subset degrees fit the support");
            let p0 = degree_pmf(g, &s0, d_max).expect("subset degrees fit the support");
            SurrogateSample {
                l2_term: l2_pmf_distance_sq(&p1, population).expect("same support")
                    + l2_pmf_distance_sq(&p0, population).expect("same support"),
                size_term: 1.0 / s1.len() as f64 + 1.0 / s0.len() as f64,
                s_size: s.len(),
                degenerate: false,
            }
        }
    }
}

/// Monte Carlo estimate of the surrogate for one weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateEstimate {
    /// Mean statistic, or +inf when any draw was degenerate.
    pub mean: f64,
    /// Standard error of the mean (+inf when disqualified).
    pub se: f64,
    /// Mean of the PMF-mismatch term over non-degenerate draws.
    pub mean_l2: f64,
    /// Mean of the inverse-size term over non-degenerate draws.
    pub mean_size: f64,
    /// Mean isolated-set size over non-degenerate draws.
    pub mean_s_size: f64,
    pub n_draws: usize,
    pub degenerate_draws: usize,
}

/// Averages `n_pre` independent surrogate draws. Draws run in parallel over
/// per-draw seed substreams and are reduced in draw order, so the result
/// does not depend on thread scheduling.
pub fn estimate_surrogate(
    g: &DirectedGraph,
    w: &WeightVector,
    population: &DegreePmf,
    mode: SurrogateMode,
    n_pre: usize,
    seed: u64,
) -> SurrogateEstimate {
    assert!(n_pre >= 1, "need at least one draw");
    let samples: Vec<SurrogateSample> = (0..n_pre)
        .into_par_iter()
        .map(|j| surrogate_draw(g, w, population, mode, seeds::mix(seed, j as u64)))
        .collect();

    let degenerate_draws = samples.iter().filter(|s| s.degenerate).count();
    let good: Vec<&SurrogateSample> = samples.iter().filter(|s| !s.degenerate).collect();
    let (mut mean_l2, mut mean_size, mut mean_s_size) = (0.0, 0.0, 0.0);
    if !good.is_empty() {
        let k = good.len() as f64;
        mean_l2 = good.iter().map(|s| s.l2_term).sum::<f64>() / k;
        mean_size = good.iter().map(|s| s.size_term).sum::<f64>() / k;
        mean_s_size = good.iter().map(|s| s.s_size as f64).sum::<f64>() / k;
    }
    if degenerate_draws > 0 {
        return SurrogateEstimate {
            mean: f64::INFINITY,
            se: f64::INFINITY,
            mean_l2,
            mean_size,
            mean_s_size,
            n_draws: n_pre,
            degenerate_draws,
        };
    }
    let k = samples.len() as f64;
    let mean = mean_l2 + mean_size;
    let var = samples
        .iter()
        .map(|s| (s.total() - mean).powi(2))
        .sum::<f64>()
        / k;
    SurrogateEstimate {
        mean,
        se: (var / k).sqrt(),
        mean_l2,
        mean_size,
        mean_s_size,
        n_draws: n_pre,
        degenerate_draws,
    }
}

#[derive(Debug, Clone)]
pub struct SelectionOptions {
    pub mode: SurrogateMode,
    pub n_pre: usize,
    /// Reuse the same draw seeds across candidates (variance reduction for
    /// comparisons). Off by default: candidates draw independently.
    pub common_random_numbers: bool,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self {
            mode: SurrogateMode::WithCr,
            n_pre: DEFAULT_N_PRE,
            common_random_numbers: false,
        }
    }
}

/// Per-candidate outcome of a selection run.
#[derive(Debug, Clone)]
pub struct CandidateResult {
    pub id: String,
    pub estimate: SurrogateEstimate,
}

/// Result of a weight-selection run.
#[derive(Debug, Clone)]
pub struct SelectionReport {
    pub candidates: Vec<CandidateResult>,
    pub chosen_index: usize,
    pub chosen_id: String,
    pub chosen_weights: WeightVector,
}

impl SelectionReport {
    /// `candidate,m_l,se,n_draws,chosen` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("candidate,m_l,se,n_draws,chosen\n");
        for (idx, c) in self.candidates.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.id,
                c.estimate.mean,
                c.estimate.se,
                c.estimate.n_draws,
                u8::from(idx == self.chosen_index),
            ));
        }
        out
    }
}

/// Estimates the surrogate for every candidate and returns the argmin (ties
/// break toward the smaller candidate index). Candidates with any
/// degenerate draw carry an infinite mean and cannot win; if every
/// candidate is degenerate the selection errors.
pub fn select_weight(
    g: &DirectedGraph,
    candidates: &[(String, WeightVector)],
    opts: &SelectionOptions,
    seed: u64,
) -> Result<SelectionReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter(
            "weight selection needs at least one candidate".into(),
        ));
    }
    let population = population_pmf(g)?;
    let results: Vec<CandidateResult> = candidates
        .iter()
        .enumerate()
        .map(|(l, (id, w))| {
            let base = if opts.common_random_numbers {
                seeds::mix(seed, seeds::tag("draws"))
            } else {
                seeds::mix_all(seed, &[seeds::tag("candidate"), l as u64])
            };
            CandidateResult {
                id: id.clone(),
                estimate: estimate_surrogate(g, w, &population, opts.mode, opts.n_pre, base),
            }
        })
        .collect();

    let mut chosen_index = None;
    let mut best = f64::INFINITY;
    for (idx, r) in results.iter().enumerate() {
        if r.estimate.mean < best {
            best = r.estimate.mean;
            chosen_index = Some(idx);
        }
    }
    let chosen_index = chosen_index.ok_or(Error::AllCandidatesDegenerate)?;
    Ok(SelectionReport {
        chosen_id: results[chosen_index].id.clone(),
        chosen_weights: candidates[chosen_index].1.clone(),
        candidates: results,
        chosen_index,
    })
}

/// The recommended candidate set: `degree^l` and `spectral^l` for
/// `l in -1..=4`.
pub fn default_candidate_set(g: &DirectedGraph) -> Vec<(String, WeightVector)> {
    use crate::isolation::{candidate_weights, weight_id, WeightFamily};
    let mut out = Vec::with_capacity(12);
    for family in [WeightFamily::Degree, WeightFamily::Spectral] {
        for l in -1..=4 {
            out.push((weight_id(family, l), candidate_weights(g, family, l)));
        }
    }
    out
}

/// Population degree PMF on the support `0..=max degree`.
pub fn population_pmf(g: &DirectedGraph) -> Result<DegreePmf> {
    let all: Vec<usize> = (0..g.n()).collect();
    degree_pmf(g, &all, g.max_in_degree())
}

/// Exact surrogate value by enumerating every selection sequence (and in
/// `WithCr` mode every split). Feasible for small graphs only; this is the
/// oracle that certifies the Monte Carlo estimates. A positive-probability
/// degenerate set makes the `WithCr` value +inf.
pub fn surrogate_exact(g: &DirectedGraph, w: &WeightVector, mode: SurrogateMode) -> Result<f64> {
    let population = population_pmf(g)?;
    let d_max = population.support_max();
    let dist = isolated_set_distribution(g, w)?;
    let mut acc = 0.0;
    for (members, prob) in dist {
        match mode {
            SurrogateMode::NoCr => {
                let pmf = degree_pmf(g, &members, d_max)?;
                acc += prob * (l2_pmf_distance_sq(&pmf, &population)? + 1.0 / members.len() as f64);
            }
            SurrogateMode::WithCr => {
                if members.len() < 2 {
                    return Ok(f64::INFINITY);
                }
                let n1 = members.len() / 2;
                let mut split_acc = 0.0;
                let mut split_count = 0usize;
                for treated in members.iter().copied().combinations(n1) {
                    let controls: Vec<usize> = members
                        .iter()
                        .copied()
                        .filter(|u| !treated.contains(u))
                        .collect();
                    let p1 = degree_pmf(g, &treated, d_max)?;
                    let p0 = degree_pmf(g, &controls, d_max)?;
                    split_acc += l2_pmf_distance_sq(&p1, &population)?
                        + l2_pmf_distance_sq(&p0, &population)?
                        + 1.0 / treated.len() as f64
                        + 1.0 / controls.len() as f64;
                    split_count += 1;
                }
                acc += prob * split_acc / split_count as f64;
            }
        }
    }
    Ok(acc)
}
