//! Finite-population potential-outcome models.
//!
//! All randomness is frozen at build time from a model seed (design-based
//! setting: once built, the treatment vector is the only varying input and
//! `evaluate` is a pure function). Three model kinds:
//!
//! - `ugander_mult`: multiplicative direct/spillover effects scaled by
//!   degree and a Laplacian homophily covariate; respects neighborhood
//!   interference (a unit's outcome depends only on treatments in its closed
//!   in-neighborhood).
//! - `linear_cascade`: a linear model whose treatment and noise terms
//!   propagate through powers of the normalized adjacency operator,
//!   truncated at 10 steps; violates neighborhood interference.
//! - `contagion`: synchronous threshold dynamics iterated to a fixed point;
//!   violates neighborhood interference and produces binary outcomes.
//!
//! For directed graphs, unit `i` aggregates over its in-neighbors (the
//! units that interfere with it); zero in-degree makes every such ratio
//! term 0. On symmetric graphs this matches the usual undirected forms.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{laplacian_homophily_vector, DirectedGraph};
use crate::seeds;

/// Truncation depth of the linear cascade.
pub const LINEAR_TRUNCATION: usize = 10;
/// Default step cap for the contagion fixed point.
pub const CONTAGION_MAX_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeKind {
    UganderMult,
    LinearCascade,
    Contagion,
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::UganderMult => "ugander",
            OutcomeKind::LinearCascade => "linear",
            OutcomeKind::Contagion => "contagion",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ugander" | "ugander_mult" => Ok(OutcomeKind::UganderMult),
            "linear" | "linear_cascade" => Ok(OutcomeKind::LinearCascade),
            "contagion" => Ok(OutcomeKind::Contagion),
            other => Err(Error::Config(format!("unknown outcome model `{other}`"))),
        }
    }
}

/// Baseline `(a + b h_i + sigma eps_i) d_i / mean(d)` with multiplicative
/// direct effect `delta_i` and spillover `gamma_i * (treated in-neighbor
/// fraction)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UganderParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub delta_mean: f64,
    /// Variance (not standard deviation) of the per-unit direct effect.
    pub delta_var: f64,
    pub gamma_mean: f64,
    /// Variance of the per-unit spillover effect.
    pub gamma_var: f64,
}

impl Default for UganderParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.5,
            sigma: 0.1,
            delta_mean: 0.5,
            delta_var: 0.01,
            gamma_mean: 1.0,
            gamma_var: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        Self {
            alpha: -1.0,
            beta: 0.8,
            gamma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContagionParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub max_steps: usize,
}

impl Default for ContagionParams {
    fn default() -> Self {
        Self {
            alpha: -1.0,
            beta: 1.5,
            delta: 1.0,
            gamma: 1.0,
            max_steps: CONTAGION_MAX_STEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Ugander(UganderParams),
    Linear(LinearParams),
    Contagion(ContagionParams),
}

impl ModelParams {
    pub fn kind(&self) -> OutcomeKind {
        match self {
            ModelParams::Ugander(_) => OutcomeKind::UganderMult,
            ModelParams::Linear(_) => OutcomeKind::LinearCascade,
            ModelParams::Contagion(_) => OutcomeKind::Contagion,
        }
    }

    pub fn default_for(kind: OutcomeKind) -> Self {
        match kind {
            OutcomeKind::UganderMult => ModelParams::Ugander(UganderParams::default()),
            OutcomeKind::LinearCascade => ModelParams::Linear(LinearParams::default()),
            OutcomeKind::Contagion => ModelParams::Contagion(ContagionParams::default()),
        }
    }
}

/// Per-unit draws materialized once at build time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenState {
    /// Standard normal perturbations (all kinds).
    pub eps: Vec<f64>,
    /// Direct effects (ugander only, empty otherwise).
    pub delta: Vec<f64>,
    /// Spillover effects (ugander only, empty otherwise).
    pub gamma: Vec<f64>,
    /// Initial binary states (contagion only, empty otherwise).
    pub y0: Vec<u8>,
}

impl FrozenState {
    /// `unit,eps,delta,gamma,y0` table; absent columns stay blank.
    pub fn to_csv(&self) -> String {
        let n = self.eps.len();
        let mut out = String::from("unit,eps,delta,gamma,y0\n");
        for i in 0..n {
            let delta = self.delta.get(i).map(f64::to_string).unwrap_or_default();
            let gamma = self.gamma.get(i).map(f64::to_string).unwrap_or_default();
            let y0 = self.y0.get(i).map(u8::to_string).unwrap_or_default();
            out.push_str(&format!("{i},{},{delta},{gamma},{y0}\n", self.eps[i]));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut eps = Vec::new();
        let mut delta = Vec::new();
        let mut gamma = Vec::new();
        let mut y0 = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with("unit,") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::CsvParse {
                    line: line_no,
                    msg: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let unit: usize = fields[0].parse().map_err(|_| Error::CsvParse {
                line: line_no,
                msg: format!("bad unit `{}`", fields[0]),
            })?;
            if unit != eps.len() {
                return Err(Error::CsvParse {
                    line: line_no,
                    msg: "units must be consecutive from 0".into(),
                });
            }
            let parse_f64 = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::CsvParse {
                    line: line_no,
                    msg: format!("bad number `{s}`"),
                })
            };
            eps.push(parse_f64(fields[1])?);
            if !fields[2].is_empty() {
                delta.push(parse_f64(fields[2])?);
            }
            if !fields[3].is_empty() {
                gamma.push(parse_f64(fields[3])?);
            }
            if !fields[4].is_empty() {
                y0.push(fields[4].parse().map_err(|_| Error::CsvParse {
                    line: line_no,
                    msg: format!("bad binary state `{}`", fields[4]),
                })?);
            }
        }
        Ok(FrozenState {
            eps,
            delta,
            gamma,
            y0,
        })
    }
}

/// A frozen potential-outcome generator bound to a graph.
#[derive(Debug, Clone)]
pub struct OutcomeModel {
    params: ModelParams,
    graph: DirectedGraph,
    frozen: FrozenState,
    /// Laplacian homophily covariate (ugander only).
    homophily: Vec<f64>,
    mean_degree: f64,
    seed: u64,
}

/// Draws the frozen state and builds the model. Two builds with the same
/// seed produce identical state.
pub fn build_model(params: ModelParams, g: &DirectedGraph, seed: u64) -> Result<OutcomeModel> {
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    if let ModelParams::Linear(p) = &params {
        if (1.0 - p.beta).abs() < 1e-12 {
            return Err(Error::InvalidParameter(
                "linear model needs beta != 1".into(),
            ));
        }
    }
    let n = g.n();
    let mut rng = seeds::rng(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let eps: Vec<f64> = (0..n).map(|_| std_normal.sample(&mut rng)).collect();

    let mut frozen = FrozenState {
        eps,
        delta: Vec::new(),
        gamma: Vec::new(),
        y0: Vec::new(),
    };
    let mut homophily = Vec::new();
    match &params {
        ModelParams::Ugander(p) => {
            for var in [p.delta_var, p.gamma_var] {
                if var < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "effect variance must be nonnegative, got {var}"
                    )));
                }
            }
            let delta_dist = Normal::new(p.delta_mean, p.delta_var.sqrt()).expect("valid normal");
            let gamma_dist = Normal::new(p.gamma_mean, p.gamma_var.sqrt()).expect("valid normal");
            frozen.delta = (0..n).map(|_| delta_dist.sample(&mut rng)).collect();
            frozen.gamma = (0..n).map(|_| gamma_dist.sample(&mut rng)).collect();
            homophily = laplacian_homophily_vector(g)?.vector;
        }
        ModelParams::Linear(_) => {}
        ModelParams::Contagion(_) => {
            frozen.y0 = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
        }
    }
    Ok(OutcomeModel {
        params,
        graph: g.clone(),
        frozen,
        homophily,
        mean_degree: g.mean_in_degree(),
        seed,
    })
}

/// Rebuilds a model from an externally supplied frozen state (for example
/// one exported with [`FrozenState::to_csv`]).
pub fn build_model_with_frozen(
    params: ModelParams,
    g: &DirectedGraph,
    frozen: FrozenState,
    seed: u64,
) -> Result<OutcomeModel> {
    let n = g.n();
    let check = |len: usize, name: &str| -> Result<()> {
        if len != n {
            return Err(Error::InvalidParameter(format!(
                "frozen `{name}` has {len} entries, expected {n}"
            )));
        }
        Ok(())
    };
    check(frozen.eps.len(), "eps")?;
    let mut homophily = Vec::new();
    match params.kind() {
        OutcomeKind::UganderMult => {
            check(frozen.delta.len(), "delta")?;
            check(frozen.gamma.len(), "gamma")?;
            homophily = laplacian_homophily_vector(g)?.vector;
        }
        OutcomeKind::LinearCascade => {}
        OutcomeKind::Contagion => check(frozen.y0.len(), "y0")?,
    }
    Ok(OutcomeModel {
        params,
        graph: g.clone(),
        frozen,
        homophily,
        mean_degree: g.mean_in_degree(),
        seed,
    })
}

impl OutcomeModel {
    pub fn kind(&self) -> OutcomeKind {
        self.params.kind()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn frozen(&self) -> &FrozenState {
        &self.frozen
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Homophily covariate used by the ugander kind (empty otherwise).
    pub fn homophily(&self) -> &[f64] {
        &self.homophily
    }

    /// Fraction of in-neighbors of `i` with the given values set; 0 when
    /// `d_i = 0`.
    fn in_fraction(&self, x: &[f64], i: usize) -> f64 {
        let d = self.graph.in_degree(i);
        if d == 0 {
            return 0.0;
        }
        let sum: f64 = self.graph.in_neighbors(i).iter().map(|&j| x[j]).sum();
        sum / d as f64
    }

    /// Normalized in-adjacency operator: `out_i = (sum over in-neighbors of
    /// x_j) / d_i`, zero rows kept zero.
    fn apply_normalized(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.graph.n() {
            let d = self.graph.in_degree(i);
            if d == 0 {
                out[i] = 0.0;
            } else {
                let sum: f64 = self.graph.in_neighbors(i).iter().map(|&j| x[j]).sum();
                out[i] = sum / d as f64;
            }
        }
    }

    /// Potential outcomes under treatment vector `z`. Pure and deterministic
    /// given the frozen state.
    pub fn evaluate(&self, z: &[u8]) -> Result<Vec<f64>> {
        let n = self.graph.n();
        assert_eq!(z.len(), n, "treatment vector length must match unit count");
        match &self.params {
            ModelParams::Ugander(p) => {
                let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
                let mut y = vec![0.0; n];
                for i in 0..n {
                    let d = self.graph.in_degree(i);
                    let baseline = if d == 0 {
                        0.0
                    } else {
                        (p.a + p.b * self.homophily[i] + p.sigma * self.frozen.eps[i]) * d as f64
                            / self.mean_degree
                    };
                    let frac = self.in_fraction(&zf, i);
                    y[i] = baseline
                        * (1.0 + self.frozen.delta[i] * zf[i] + self.frozen.gamma[i] * frac);
                }
                Ok(y)
            }
            ModelParams::Linear(p) => {
                let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
                let base = p.alpha / (1.0 - p.beta);
                let mut y: Vec<f64> = vec![base; n];
                for i in 0..n {
                    y[i] += p.gamma * zf[i] + self.frozen.eps[i];
                }
                // Cascade both the treatment and the noise through powers of
                // the normalized operator.
                let mut zpow = zf;
                let mut epow = self.frozen.eps.clone();
                let mut buf = vec![0.0; n];
                let mut coeff = 1.0;
                for _ in 1..=LINEAR_TRUNCATION {
                    coeff *= p.beta;
                    self.apply_normalized(&zpow, &mut buf);
                    std::mem::swap(&mut zpow, &mut buf);
                    self.apply_normalized(&epow, &mut buf);
                    std::mem::swap(&mut epow, &mut buf);
                    for i in 0..n {
                        y[i] += coeff * (p.gamma * zpow[i] + epow[i]);
                    }
                }
                Ok(y)
            }
            ModelParams::Contagion(p) => {
                let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
                let z_frac: Vec<f64> = (0..n).map(|i| self.in_fraction(&zf, i)).collect();
                let mut state: Vec<u8> = self.frozen.y0.clone();
                let mut next = vec![0u8; n];
                for _ in 0..p.max_steps {
                    let sf: Vec<f64> = state.iter().map(|&v| v as f64).collect();
                    for i in 0..n {
                        let drive = p.alpha
                            + p.beta * self.in_fraction(&sf, i)
                            + p.delta * z_frac[i]
                            + p.gamma * zf[i]
                            + self.frozen.eps[i];
                        next[i] = u8::from(drive > 0.0);
                    }
                    if next == state {
                        return Ok(state.iter().map(|&v| v as f64).collect());
                    }
                    std::mem::swap(&mut state, &mut next);
                }
                Err(Error::ContagionNonConvergence {
                    max_steps: p.max_steps,
                    last: state,
                    prev: next,
                })
            }
        }
    }

    /// Per-unit treatment effects `Y_i(all treated) - Y_i(all control)`.
    pub fn unit_effects(&self) -> Result<Vec<f64>> {
        let n = self.graph.n();
        let y1 = self.evaluate(&vec![1u8; n])?;
        let y0 = self.evaluate(&vec![0u8; n])?;
        Ok(y1.iter().zip(&y0).map(|(a, b)| a - b).collect())
    }

    /// Total treatment effect: the average unit effect.
    pub fn true_tte(&self) -> Result<f64> {
        let effects = self.unit_effects()?;
        Ok(effects.iter().sum::<f64>() / effects.len() as f64)
    }

    /// Mean unit effect over a subset.
    pub fn subset_effect(&self, subset: &[usize]) -> Result<f64> {
        assert!(!subset.is_empty(), "subset must be nonempty");
        let effects = self.unit_effects()?;
        Ok(subset.iter().map(|&i| effects[i]).sum::<f64>() / subset.len() as f64)
    }
}
