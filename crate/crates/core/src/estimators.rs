//! Treatment effect estimators.
//!
//! The restricted estimators (`rdim`, `rmat`) read only the outcomes of
//! isolated-set units; the Bernoulli-design estimators (`ber_ht`,
//! `ber_hajek`) weight by exact exposure probabilities; `naive_dim` is the
//! interference-blind difference in means over all units.

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// Observed data handed to an estimator: outcomes realized under exactly
/// one treatment vector, the assignment that produced them, and the graph.
#[derive(Debug, Clone, Copy)]
pub struct EstimateInput<'a> {
    pub y: &'a [f64],
    pub assignment: &'a Assignment,
    pub graph: &'a DirectedGraph,
}

fn mean_over(y: &[f64], units: &[usize]) -> f64 {
    units.iter().map(|&i| y[i]).sum::<f64>() / units.len() as f64
}

/// Restricted difference in means: mean outcome of treated isolated units
/// minus mean outcome of control isolated units. Reads only isolated-set
/// outcomes.
pub fn rdim(input: &EstimateInput) -> Result<f64> {
    let s1 = input.assignment.s1();
    let s0 = input.assignment.s0();
    if s1.is_empty() {
        return Err(Error::EmptyArm { arm: "treated" });
    }
    if s0.is_empty() {
        return Err(Error::EmptyArm { arm: "control" });
    }
    Ok(mean_over(input.y, s1) - mean_over(input.y, s0))
}

/// Restricted matched estimator: per-stratum difference between the treated
/// unit and the mean of the controls, combined with stratum-size weights
/// `n_k / |S|`. Requires an assignment built by matched-pairs randomization.
pub fn rmat(input: &EstimateInput) -> Result<f64> {
    let strata = input.assignment.strata().ok_or(Error::MissingStrata)?;
    if strata.is_empty() {
        return Err(Error::MissingStrata);
    }
    let total: usize = strata.iter().map(Vec::len).sum();
    let z = input.assignment.z();
    let mut acc = 0.0;
    for stratum in strata {
        let mut treated = None;
        let mut control_sum = 0.0;
        let mut control_count = 0usize;
        for &u in stratum {
            if z[u] == 1 {
                if treated.replace(input.y[u]).is_some() {
                    return Err(Error::InvalidParameter(
                        "stratum has more than one treated unit".into(),
                    ));
                }
            } else {
                control_sum += input.y[u];
                control_count += 1;
            }
        }
        let treated = treated.ok_or(Error::EmptyArm { arm: "treated" })?;
        if control_count == 0 {
            return Err(Error::EmptyArm { arm: "control" });
        }
        let diff = treated - control_sum / control_count as f64;
        acc += stratum.len() as f64 / total as f64 * diff;
    }
    Ok(acc)
}

/// Naive difference in means over all units, grouped by realized treatment.
pub fn naive_dim(input: &EstimateInput) -> Result<f64> {
    let mut sum = [0.0f64; 2];
    let mut count = [0usize; 2];
    for (i, &zi) in input.assignment.z().iter().enumerate() {
        sum[zi as usize] += input.y[i];
        count[zi as usize] += 1;
    }
    if count[1] == 0 {
        return Err(Error::EmptyArm { arm: "treated" });
    }
    if count[0] == 0 {
        return Err(Error::EmptyArm { arm: "control" });
    }
    Ok(sum[1] / count[1] as f64 - sum[0] / count[0] as f64)
}

fn check_bernoulli_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bernoulli p must lie strictly in (0,1), got {p}"
        )));
    }
    Ok(())
}

/// Exposure indicators and probabilities under an independent Bernoulli(p)
/// design: unit `i` is fully exposed to treatment (control) when its whole
/// closed in-neighborhood is treated (control), with probability
/// `p^|closed neighborhood|` (resp. `(1-p)^...`).
fn exposures(input: &EstimateInput, p: f64) -> Vec<(bool, bool, f64, f64)> {
    let z = input.assignment.z();
    (0..input.graph.n())
        .map(|i| {
            let closed = input.graph.closed_in_neighborhood(i);
            let all_treated = closed.iter().all(|&j| z[j] == 1);
            let all_control = closed.iter().all(|&j| z[j] == 0);
            let k = closed.len() as i32;
            (all_treated, all_control, p.powi(k), (1.0 - p).powi(k))
        })
        .collect()
}

/// Horvitz-Thompson estimator under the Bernoulli(p) design.
pub fn ber_ht(input: &EstimateInput, p: f64) -> Result<f64> {
    check_bernoulli_p(p)?;
    let n = input.graph.n() as f64;
    let mut acc = 0.0;
    for (i, (treated, control, pi1, pi0)) in exposures(input, p).into_iter().enumerate() {
        if treated {
            acc += input.y[i] / pi1;
        }
        if control {
            acc -= input.y[i] / pi0;
        }
    }
    Ok(acc / n)
}

/// A Hajek estimate; an arm with no exposed units contributes 0 and is
/// flagged rather than erroring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HajekEstimate {
    pub value: f64,
    pub treated_arm_empty: bool,
    pub control_arm_empty: bool,
}

impl HajekEstimate {
    pub fn flagged(&self) -> bool {
        self.treated_arm_empty || self.control_arm_empty
    }
}

/// Hajek estimator: the Horvitz-Thompson arm sums normalized by the summed
/// exposure weights instead of `n`.
pub fn ber_hajek(input: &EstimateInput, p: f64) -> Result<HajekEstimate> {
    check_bernoulli_p(p)?;
    let mut num = [0.0f64; 2];
    let mut den = [0.0f64; 2];
    for (i, (treated, control, pi1, pi0)) in exposures(input, p).into_iter().enumerate() {
        if treated {
            num[1] += input.y[i] / pi1;
            den[1] += 1.0 / pi1;
        }
        if control {
            num[0] += input.y[i] / pi0;
            den[0] += 1.0 / pi0;
        }
    }
    let arm = |k: usize| if den[k] > 0.0 { num[k] / den[k] } else { 0.0 };
    Ok(HajekEstimate {
        value: arm(1) - arm(0),
        treated_arm_empty: den[1] == 0.0,
        control_arm_empty: den[0] == 0.0,
    })
}

/// Finite-population variance of the restricted difference in means given
/// the isolated set, from oracle potential outcomes:
/// `V2(1)/|S1| + V2(0)/|S0| - V2(effects)/|S|`, with each `V2` the
/// (|S|-1)-denominator sample variance over the whole isolated set and
/// `|S1| = floor(|S|/2)` as under cluster-level complete randomization.
pub fn neyman_conditional_variance(
    s: &[usize],
    y_treated: &[f64],
    y_control: &[f64],
) -> Result<f64> {
    if s.len() < 2 {
        return Err(Error::IsolatedSetTooSmall { size: s.len() });
    }
    let n1 = (s.len() / 2) as f64;
    let n0 = s.len() as f64 - n1;
    let over_s = |f: &dyn Fn(usize) -> f64| -> f64 {
        let mean = s.iter().map(|&i| f(i)).sum::<f64>() / s.len() as f64;
        s.iter().map(|&i| (f(i) - mean).powi(2)).sum::<f64>() / (s.len() as f64 - 1.0)
    };
    let v1 = over_s(&|i| y_treated[i]);
    let v0 = over_s(&|i| y_control[i]);
    let vt = over_s(&|i| y_treated[i] - y_control[i]);
    Ok(v1 / n1 + v0 / n0 - vt / s.len() as f64)
}
