//! Monte Carlo experiment harness.
//!
//! Composes (network, outcome model, design, estimator) into replicated
//! runs and reports the MSE / squared-bias / variance decomposition per
//! method against the true total treatment effect. Fully deterministic:
//! the config plus master seed fixes every byte of the output.
//!
//! Replications run in parallel over per-replication seed substreams and
//! are reduced in replication order, so summaries are identical whether
//! they run serially or concurrently.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::{
    bernoulli_assignment, cluster_complete_randomization, matched_pairs_randomization,
};
use crate::error::{Error, Result};
use crate::estimators::{ber_hajek, ber_ht, naive_dim, rdim, rmat, EstimateInput};
use crate::graph::{generate, load_edge_list, DirectedGraph, NetworkModel};
use crate::isolation::{parse_weight_id, weighted_random_isolation, WeightVector};
use crate::outcomes::{
    build_model, ContagionParams, LinearParams, ModelParams, OutcomeKind, OutcomeModel,
    UganderParams, CONTAGION_MAX_STEPS,
};
use crate::seeds;
use crate::selection::{select_weight, SelectionOptions, SelectionReport, SurrogateMode};

/// Default Bernoulli treatment probability for the baseline designs.
pub const DEFAULT_BERNOULLI_P: f64 = 0.5;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

/// Experiment description, loadable from TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub model: ModelConfig,
    /// Method ids like `RI+rdim`, `AWRI+rmat`, `BER+ht`.
    pub methods: Vec<String>,
    pub replications: usize,
    /// Master seed; all per-method and per-replication streams derive from it.
    pub seed: u64,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub scaling: Option<ScalingConfig>,
    #[serde(default = "default_bernoulli_p")]
    pub bernoulli_p: f64,
}

fn default_bernoulli_p() -> f64 {
    DEFAULT_BERNOULLI_P
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Load a fixed network from an edge-list file instead of generating.
    #[serde(default)]
    pub file: Option<PathBuf>,
    /// Generator family: `ba`, `rg`, `sw`, `er`, `sbm`.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    // Family-specific overrides; defaults apply when absent.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub probs: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    /// `ugander`, `linear`, or `contagion`.
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
    // ugander
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub delta_mean: Option<f64>,
    #[serde(default)]
    pub delta_var: Option<f64>,
    #[serde(default)]
    pub gamma_mean: Option<f64>,
    #[serde(default)]
    pub gamma_var: Option<f64>,
    // linear & contagion
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Candidate ids (`degree^<l>`, `spectral^<l>`). Empty means the
    /// recommended default set.
    #[serde(default)]
    pub candidates: Vec<String>,
    #[serde(default = "default_n_pre")]
    pub n_pre: usize,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub common_random_numbers: bool,
}

fn default_n_pre() -> usize {
    crate::selection::DEFAULT_N_PRE
}

fn default_mode() -> String {
    "with_cr".into()
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            candidates: Vec::new(),
            n_pre: default_n_pre(),
            mode: default_mode(),
            common_random_numbers: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub grid: Vec<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

// ---------------------------------------------------------------------------
// Methods
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Design {
    Bernoulli,
    RandomIsolation,
    AdaptiveWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorId {
    Ht,
    Hajek,
    Dim,
    Rdim,
    Rmat,
}

/// A design/estimator pairing like `AWRI+rdim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Method {
    pub design: Design,
    pub estimator: EstimatorId,
}

impl Method {
    pub fn parse(id: &str) -> Result<Method> {
        let (design, estimator) = id
            .split_once('+')
            .ok_or_else(|| Error::UnknownMethod(id.into()))?;
        let method = match (design, estimator) {
            ("BER", "ht") => Method {
                design: Design::Bernoulli,
                estimator: EstimatorId::Ht,
            },
            ("BER", "hajek") => Method {
                design: Design::Bernoulli,
                estimator: EstimatorId::Hajek,
            },
            ("BER", "dim") => Method {
                design: Design::Bernoulli,
                estimator: EstimatorId::Dim,
            },
            ("RI", "rdim") => Method {
                design: Design::RandomIsolation,
                estimator: EstimatorId::Rdim,
            },
            ("RI", "rmat") => Method {
                design: Design::RandomIsolation,
                estimator: EstimatorId::Rmat,
            },
            ("AWRI", "rdim") => Method {
                design: Design::AdaptiveWeighted,
                estimator: EstimatorId::Rdim,
            },
            ("AWRI", "rmat") => Method {
                design: Design::AdaptiveWeighted,
                estimator: EstimatorId::Rmat,
            },
            _ => return Err(Error::UnknownMethod(id.into())),
        };
        Ok(method)
    }

    pub fn id(&self) -> String {
        let design = match self.design {
            Design::Bernoulli => "BER",
            Design::RandomIsolation => "RI",
            Design::AdaptiveWeighted => "AWRI",
        };
        let estimator = match self.estimator {
            EstimatorId::Ht => "ht",
            EstimatorId::Hajek => "hajek",
            EstimatorId::Dim => "dim",
            EstimatorId::Rdim => "rdim",
            EstimatorId::Rmat => "rmat",
        };
        format!("{design}+{estimator}")
    }
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Per-method moment summary over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub mse: f64,
    pub bias_sq: f64,
    pub var: f64,
    pub mean_s: f64,
    pub mean_s1: f64,
    /// Replications that errored (degenerate set, empty arm, model
    /// non-convergence); excluded from the moments, never silently dropped.
    pub degenerate: usize,
}

/// One replication's record.
#[derive(Debug, Clone)]
pub struct RepOutcome {
    pub estimate: Option<f64>,
    pub s_size: usize,
    pub s1_size: usize,
    /// Mean unit effect over the drawn isolated set (oracle quantity,
    /// recorded for decomposition diagnostics).
    pub tau_s: Option<f64>,
    /// A Hajek arm had no exposed units and contributed 0.
    pub hajek_flagged: bool,
    pub error: Option<String>,
}

/// A method's summary plus its raw replication records.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub summary: ExperimentSummary,
    pub reps: Vec<RepOutcome>,
}

/// One output row of a simulation or scaling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub network: String,
    pub model: String,
    pub n: usize,
    pub replications: usize,
    pub summary: ExperimentSummary,
}

fn summarize(reps: &[RepOutcome], tte: f64) -> ExperimentSummary {
    let ok: Vec<&RepOutcome> = reps.iter().filter(|r| r.estimate.is_some()).collect();
    let degenerate = reps.len() - ok.len();
    if ok.is_empty() {
        return ExperimentSummary {
            mse: f64::NAN,
            bias_sq: f64::NAN,
            var: f64::NAN,
            mean_s: 0.0,
            mean_s1: 0.0,
            degenerate,
        };
    }
    let k = ok.len() as f64;
    let errors: Vec<f64> = ok.iter().map(|r| r.estimate.unwrap() - tte).collect();
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / k;
    let mean_err = errors.iter().sum::<f64>() / k;
    let bias_sq = mean_err * mean_err;
    ExperimentSummary {
        mse,
        bias_sq,
        var: mse - bias_sq,
        mean_s: ok.iter().map(|r| r.s_size as f64).sum::<f64>() / k,
        mean_s1: ok.iter().map(|r| r.s1_size as f64).sum::<f64>() / k,
        degenerate,
    }
}

/// Runs one method for `replications` draws. `awri_weights` must be the
/// pre-selected weight vector when the design is adaptive (weight selection
/// is a pre-experiment step run once per configuration, not per
/// replication).
pub fn run_method(
    g: &DirectedGraph,
    model: &OutcomeModel,
    method: Method,
    replications: usize,
    bernoulli_p: f64,
    awri_weights: Option<&WeightVector>,
    master_seed: u64,
) -> Result<MethodRun> {
    let tte = model.true_tte()?;
    let effects = model.unit_effects()?;
    let method_tag = seeds::tag(&method.id());
    let uniform = WeightVector::uniform(g.n());
    let weights = match method.design {
        Design::RandomIsolation => Some(&uniform),
        Design::AdaptiveWeighted => Some(awri_weights.ok_or_else(|| {
            Error::InvalidParameter("adaptive design needs pre-selected weights".into())
        })?),
        Design::Bernoulli => None,
    };

    let reps: Vec<RepOutcome> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let rep_seed = seeds::mix_all(master_seed, &[method_tag, r as u64]);
            run_replication(g, model, method, weights, bernoulli_p, &effects, rep_seed)
        })
        .collect();

    Ok(MethodRun {
        method,
        summary: summarize(&reps, tte),
        reps,
    })
}

fn run_replication(
    g: &DirectedGraph,
    model: &OutcomeModel,
    method: Method,
    weights: Option<&WeightVector>,
    bernoulli_p: f64,
    effects: &[f64],
    rep_seed: u64,
) -> RepOutcome {
    let mut outcome = RepOutcome {
        estimate: None,
        s_size: 0,
        s1_size: 0,
        tau_s: None,
        hajek_flagged: false,
        error: None,
    };
    let result = (|| -> Result<f64> {
        let assignment = match method.design {
            Design::Bernoulli => bernoulli_assignment(g.n(), bernoulli_p, seeds::mix(rep_seed, 1))?,
            Design::RandomIsolation | Design::AdaptiveWeighted => {
                let s = weighted_random_isolation(g, weights.unwrap(), seeds::mix(rep_seed, 0));
                outcome.s_size = s.len();
                if !s.is_empty() {
                    outcome.tau_s = Some(
                        s.members().iter().map(|&i| effects[i]).sum::<f64>() / s.len() as f64,
                    );
                }
                match method.estimator {
                    EstimatorId::Rmat => matched_pairs_randomization(g, &s, seeds::mix(rep_seed, 1))?,
                    _ => cluster_complete_randomization(g, &s, seeds::mix(rep_seed, 1))?,
                }
            }
        };
        outcome.s1_size = assignment.s1().len();
        let y = model.evaluate(assignment.z())?;
        let input = EstimateInput {
            y: &y,
            assignment: &assignment,
            graph: g,
        };
        match method.estimator {
            EstimatorId::Rdim => rdim(&input),
            EstimatorId::Rmat => rmat(&input),
            EstimatorId::Dim => naive_dim(&input),
            EstimatorId::Ht => ber_ht(&input, bernoulli_p),
            EstimatorId::Hajek => {
                let h = ber_hajek(&input, bernoulli_p)?;
                outcome.hajek_flagged = h.flagged();
                Ok(h.value)
            }
        }
    })();
    match result {
        Ok(est) => outcome.estimate = Some(est),
        Err(e) => outcome.error = Some(e.to_string()),
    }
    outcome
}

/// Builds the network described by the config (file or generator) at the
/// given size and seed.
pub fn build_network(cfg: &NetworkConfig, n: usize, seed: u64) -> Result<DirectedGraph> {
    if let Some(path) = &cfg.file {
        let file = std::fs::File::open(path)?;
        return load_edge_list(std::io::BufReader::new(file), false);
    }
    let family = cfg
        .model
        .as_deref()
        .ok_or_else(|| Error::Config("network needs `file` or `model`".into()))?;
    let model = resolve_network_model(cfg, family, n)?;
    generate(&model, n, seed)
}

fn resolve_network_model(cfg: &NetworkConfig, family: &str, n: usize) -> Result<NetworkModel> {
    let mut model = NetworkModel::default_for(family, n)?;
    match &mut model {
        NetworkModel::BarabasiAlbert { m } => {
            if let Some(v) = cfg.m {
                *m = v;
            }
        }
        NetworkModel::RandomGeometric { radius } => {
            if let Some(v) = cfg.radius {
                *radius = v;
            }
        }
        NetworkModel::SmallWorld { k, beta } => {
            if let Some(v) = cfg.k {
                *k = v;
            }
            if let Some(v) = cfg.beta {
                *beta = v;
            }
        }
        NetworkModel::ErdosRenyi { p } => {
            if let Some(v) = cfg.p {
                *p = v;
            }
        }
        NetworkModel::StochasticBlock { sizes, probs } => {
            if let Some(v) = &cfg.sizes {
                *sizes = v.clone();
            }
            if let Some(v) = &cfg.probs {
                *probs = v.clone();
            }
        }
    }
    Ok(model)
}

/// Materializes the outcome-model parameters from the config.
pub fn resolve_model_params(cfg: &ModelConfig) -> Result<ModelParams> {
    let kind = OutcomeKind::parse(&cfg.kind)?;
    let params = match kind {
        OutcomeKind::UganderMult => {
            let d = UganderParams::default();
            ModelParams::Ugander(UganderParams {
                a: cfg.a.unwrap_or(d.a),
                b: cfg.b.unwrap_or(d.b),
                sigma: cfg.sigma.unwrap_or(d.sigma),
                delta_mean: cfg.delta_mean.unwrap_or(d.delta_mean),
                delta_var: cfg.delta_var.unwrap_or(d.delta_var),
                gamma_mean: cfg.gamma_mean.unwrap_or(d.gamma_mean),
                gamma_var: cfg.gamma_var.unwrap_or(d.gamma_var),
            })
        }
        OutcomeKind::LinearCascade => {
            let d = LinearParams::default();
            ModelParams::Linear(LinearParams {
                alpha: cfg.alpha.unwrap_or(d.alpha),
                beta: cfg.beta.unwrap_or(d.beta),
                gamma: cfg.gamma.unwrap_or(d.gamma),
            })
        }
        OutcomeKind::Contagion => {
            let d = ContagionParams::default();
            ModelParams::Contagion(ContagionParams {
                alpha: cfg.alpha.unwrap_or(d.alpha),
                beta: cfg.beta.unwrap_or(d.beta),
                delta: cfg.delta.unwrap_or(d.delta),
                gamma: cfg.gamma.unwrap_or(d.gamma),
                max_steps: cfg.max_steps.unwrap_or(CONTAGION_MAX_STEPS),
            })
        }
    };
    Ok(params)
}

/// Resolves the candidate list from the config (default set when empty).
pub fn resolve_candidates(
    g: &DirectedGraph,
    cfg: &SelectionConfig,
) -> Result<Vec<(String, WeightVector)>> {
    if cfg.candidates.is_empty() {
        return Ok(crate::selection::default_candidate_set(g));
    }
    cfg.candidates
        .iter()
        .map(|id| {
            let (family, l) = parse_weight_id(id)?;
            Ok((id.clone(), crate::isolation::candidate_weights(g, family, l)))
        })
        .collect()
}

fn selection_options(cfg: &SelectionConfig) -> Result<SelectionOptions> {
    Ok(SelectionOptions {
        mode: SurrogateMode::parse(&cfg.mode)?,
        n_pre: cfg.n_pre,
        common_random_numbers: cfg.common_random_numbers,
    })
}

/// Runs weight selection for a config (the adaptive designs' pre-experiment
/// step). The selection seed derives from the master seed only, so every
/// adaptive method in the run shares one selected weight.
pub fn run_selection(
    g: &DirectedGraph,
    cfg: &ExperimentConfig,
    extra_tag: u64,
) -> Result<SelectionReport> {
    let candidates = resolve_candidates(g, &cfg.selection)?;
    let opts = selection_options(&cfg.selection)?;
    let seed = seeds::mix_all(cfg.seed, &[seeds::tag("selection"), extra_tag]);
    select_weight(g, &candidates, &opts, seed)
}

fn network_label(cfg: &NetworkConfig) -> String {
    if let Some(path) = &cfg.file {
        path.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "file".into())
    } else {
        cfg.model.clone().unwrap_or_else(|| "unknown".into())
    }
}

fn run_methods_at(
    g: &DirectedGraph,
    cfg: &ExperimentConfig,
    model_seed: u64,
    selection_tag: u64,
) -> Result<Vec<SummaryRow>> {
    let methods: Vec<Method> = cfg
        .methods
        .iter()
        .map(|id| Method::parse(id))
        .collect::<Result<_>>()?;
    let params = resolve_model_params(&cfg.model)?;
    let model = build_model(params, g, model_seed)?;

    let needs_selection = methods
        .iter()
        .any(|m| m.design == Design::AdaptiveWeighted);
    let selected = if needs_selection {
        Some(run_selection(g, cfg, selection_tag)?.chosen_weights)
    } else {
        None
    };

    let network = network_label(&cfg.network);
    let model_label = cfg.model.kind.clone();
    methods
        .into_iter()
        .map(|method| {
            let run = run_method(
                g,
                &model,
                method,
                cfg.replications,
                cfg.bernoulli_p,
                selected.as_ref(),
                cfg.seed,
            )?;
            Ok(SummaryRow {
                method: method.id(),
                network: network.clone(),
                model: model_label.clone(),
                n: g.n(),
                replications: cfg.replications,
                summary: run.summary,
            })
        })
        .collect()
}

/// Runs every configured method once on the configured network and model.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let g = build_network(&cfg.network, cfg.network.n, cfg.network.seed)?;
    run_methods_at(&g, cfg, cfg.model.seed, 0)
}

/// Scaling study: regenerates the network (and refreshes the frozen model
/// state) at every grid size with per-size derived seeds, then runs all
/// methods. Weight selection also reruns per size, since the weights are a
/// function of the network.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let scaling = cfg
        .scaling
        .as_ref()
        .ok_or_else(|| Error::Config("scaling run needs a [scaling] grid".into()))?;
    if scaling.grid.is_empty() {
        return Err(Error::Config("scaling grid is empty".into()));
    }
    if cfg.network.file.is_some() {
        return Err(Error::Config(
            "scaling runs regenerate networks; use a generator model, not a file".into(),
        ));
    }
    let mut rows = Vec::new();
    for &n in &scaling.grid {
        let net_seed = seeds::mix_all(cfg.network.seed, &[seeds::tag("scaling-net"), n as u64]);
        let model_seed = seeds::mix_all(cfg.model.seed, &[seeds::tag("scaling-model"), n as u64]);
        let g = build_network(&cfg.network, n, net_seed)?;
        rows.extend(run_methods_at(&g, cfg, model_seed, n as u64)?);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

const REPORT_HEADER: &str = "method,network,model,n,R,mse,bias_sq,var,mean_s,mean_s1,degenerate";

/// Renders summary rows. CSV keeps full float precision and a stable column
/// order; markdown rounds to three decimals for reading.
pub fn emit_report(rows: &[SummaryRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from(REPORT_HEADER);
            out.push('\n');
            for r in rows {
                let s = &r.summary;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.method,
                    r.network,
                    r.model,
                    r.n,
                    r.replications,
                    s.mse,
                    s.bias_sq,
                    s.var,
                    s.mean_s,
                    s.mean_s1,
                    s.degenerate
                )
                .unwrap();
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str(
                "| method | network | model | n | R | MSE | Bias^2 | Var | mean |S| | mean |S1| | degenerate |\n",
            );
            out.push_str("|---|---|---|---|---|---|---|---|---|---|---|\n");
            for r in rows {
                let s = &r.summary;
                writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {:.3} | {:.3} | {:.3} | {:.1} | {:.1} | {} |",
                    r.method,
                    r.network,
                    r.model,
                    r.n,
                    r.replications,
                    s.mse,
                    s.bias_sq,
                    s.var,
                    s.mean_s,
                    s.mean_s1,
                    s.degenerate
                )
                .unwrap();
            }
            out
        }
    }
}

/// Parses a CSV report back into rows (full-precision round trip).
pub fn parse_report_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() || line == REPORT_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::CsvParse {
                line: line_no,
                msg: format!("expected 11 fields, got {}", fields.len()),
            });
        }
        let parse_f64 = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::CsvParse {
                line: line_no,
                msg: format!("bad number `{s}`"),
            })
        };
        let parse_usize = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::CsvParse {
                line: line_no,
                msg: format!("bad count `{s}`"),
            })
        };
        rows.push(SummaryRow {
            method: fields[0].into(),
            network: fields[1].into(),
            model: fields[2].into(),
            n: parse_usize(fields[3])?,
            replications: parse_usize(fields[4])?,
            summary: ExperimentSummary {
                mse: parse_f64(fields[5])?,
                bias_sq: parse_f64(fields[6])?,
                var: parse_f64(fields[7])?,
                mean_s: parse_f64(fields[8])?,
                mean_s1: parse_f64(fields[9])?,
                degenerate: parse_usize(fields[10])?,
            },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            network: NetworkConfig {
                file: None,
                model: Some("ba".into()),
                n: 80,
                seed: 5,
                m: Some(3),
                radius: None,
                k: None,
                beta: None,
                p: None,
                sizes: None,
                probs: None,
            },
            model: ModelConfig {
                kind: "ugander".into(),
                seed: 9,
                a: None,
                b: None,
                sigma: None,
                delta_mean: None,
                delta_var: None,
                gamma_mean: None,
                gamma_var: None,
                alpha: None,
                beta: None,
                gamma: None,
                delta: None,
                max_steps: None,
            },
            methods: vec!["RI+rdim".into(), "BER+dim".into()],
            replications: 50,
            seed: 1234,
            selection: SelectionConfig {
                candidates: vec!["degree^0".into(), "degree^2".into()],
                n_pre: 50,
                mode: "with_cr".into(),
                common_random_numbers: false,
            },
            scaling: None,
            bernoulli_p: 0.5,
        }
    }

    #[test]
    fn method_ids_round_trip() {
        for id in [
            "BER+ht", "BER+hajek", "BER+dim", "RI+rdim", "RI+rmat", "AWRI+rdim", "AWRI+rmat",
        ] {
            assert_eq!(Method::parse(id).unwrap().id(), id);
        }
        assert!(Method::parse("GCR+ht").is_err());
        assert!(Method::parse("RI+dim").is_err());
        assert!(Method::parse("nonsense").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = base_config();
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back.methods, cfg.methods);
        assert_eq!(back.seed, cfg.seed);
        assert_eq!(back.network.n, cfg.network.n);
    }

    #[test]
    fn toml_defaults_fill_in() {
        let text = r#"
            methods = ["RI+rdim"]
            replications = 10
            seed = 3
            [network]
            model = "er"
            n = 30
            seed = 1
            [model]
            kind = "linear"
            seed = 2
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.bernoulli_p, DEFAULT_BERNOULLI_P);
        assert_eq!(cfg.selection.n_pre, crate::selection::DEFAULT_N_PRE);
        assert!(cfg.scaling.is_none());
    }

    #[test]
    fn decomposition_identity_holds_exactly() {
        let cfg = base_config();
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            let s = &row.summary;
            assert!((s.mse - (s.bias_sq + s.var)).abs() < 1e-10);
            assert!(s.mse.is_finite());
        }
    }

    #[test]
    fn identical_configs_give_identical_csv() {
        let cfg = base_config();
        let a = emit_report(&run_experiment(&cfg).unwrap(), ReportFormat::Csv);
        let b = emit_report(&run_experiment(&cfg).unwrap(), ReportFormat::Csv);
        assert_eq!(a, b);
    }

    #[test]
    fn serial_and_parallel_runs_agree() {
        let cfg = base_config();
        let parallel = emit_report(&run_experiment(&cfg).unwrap(), ReportFormat::Csv);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = pool.install(|| emit_report(&run_experiment(&cfg).unwrap(), ReportFormat::Csv));
        assert_eq!(parallel, serial);
    }

    #[test]
    fn constant_outcome_model_zeroes_every_method() {
        // a = b = sigma = 0 makes every potential outcome exactly 0, so
        // every estimator lands on the (zero) truth in every replication.
        let mut cfg = base_config();
        cfg.model.a = Some(0.0);
        cfg.model.b = Some(0.0);
        cfg.model.sigma = Some(0.0);
        cfg.methods = vec![
            "RI+rdim".into(),
            "RI+rmat".into(),
            "BER+dim".into(),
            "BER+ht".into(),
            "BER+hajek".into(),
        ];
        let rows = run_experiment(&cfg).unwrap();
        for row in rows {
            assert_eq!(row.summary.mse, 0.0, "{}", row.method);
            assert_eq!(row.summary.bias_sq, 0.0);
            assert_eq!(row.summary.var, 0.0);
        }
    }

    #[test]
    fn single_replication_has_zero_variance() {
        let mut cfg = base_config();
        cfg.replications = 1;
        let rows = run_experiment(&cfg).unwrap();
        for row in rows {
            assert_eq!(row.summary.var, 0.0);
        }
    }

    #[test]
    fn report_round_trips_through_csv() {
        let cfg = base_config();
        let rows = run_experiment(&cfg).unwrap();
        let csv = emit_report(&rows, ReportFormat::Csv);
        let back = parse_report_csv(&csv).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn empty_report_is_header_only() {
        let csv = emit_report(&[], ReportFormat::Csv);
        assert_eq!(csv, format!("{REPORT_HEADER}\n"));
        assert!(parse_report_csv(&csv).unwrap().is_empty());
    }

    #[test]
    fn markdown_renders_triples() {
        let cfg = base_config();
        let rows = run_experiment(&cfg).unwrap();
        let md = emit_report(&rows, ReportFormat::Markdown);
        assert!(md.contains("| MSE | Bias^2 | Var |"));
        assert!(md.lines().count() >= 4);
    }

    #[test]
    fn awri_methods_share_one_selection() {
        let mut cfg = base_config();
        cfg.methods = vec!["AWRI+rdim".into(), "AWRI+rmat".into()];
        cfg.replications = 20;
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.summary.mse.is_finite());
            assert!(row.summary.mean_s > 0.0);
        }
    }

    #[test]
    fn unknown_method_is_rejected() {
        let mut cfg = base_config();
        cfg.methods = vec!["CC+dim".into()];
        assert!(matches!(
            run_experiment(&cfg),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn scaling_runs_one_row_per_method_per_size() {
        let mut cfg = base_config();
        cfg.replications = 10;
        cfg.methods = vec!["RI+rdim".into()];
        cfg.scaling = Some(ScalingConfig {
            grid: vec![40, 80],
        });
        let rows = run_scaling(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].n, 40);
        assert_eq!(rows[1].n, 80);
    }

    #[test]
    fn errored_replications_are_counted_not_hidden() {
        // Contagion with a tiny step cap errors often enough to count.
        let mut cfg = base_config();
        cfg.model.kind = "contagion".into();
        cfg.model.max_steps = Some(1);
        cfg.methods = vec!["RI+rdim".into()];
        cfg.replications = 30;
        match run_experiment(&cfg) {
            Ok(rows) => {
                // Either the model fixed-points in one step everywhere or
                // some replications error; both are acceptable, but counts
                // must reconcile.
                assert!(rows[0].summary.degenerate <= 30);
            }
            Err(Error::ContagionNonConvergence { .. }) => {
                // true_tte itself failed: also a legitimate surface.
            }
            Err(other) => panic!("unexpected error {other}"),
        }
    }
}
