//! Command line front end: network generation, isolation sampling, weight
//! selection, assignment, and Monte Carlo experiments, all driven by a TOML
//! config and a master seed. Outputs are deterministic byte-for-byte given
//! the same config and seed.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use awri::assignment::{cluster_complete_randomization, matched_pairs_randomization};
use awri::graph::write_edge_list;
use awri::harness::{
    build_network, emit_report, run_experiment, run_scaling, run_selection, ExperimentConfig,
    ReportFormat,
};
use awri::isolation::{candidate_weights, parse_weight_id, weighted_random_isolation};
use awri::seeds;

#[derive(Parser)]
#[command(
    name = "awri",
    about = "Randomized isolation designs for network experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for tabular reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Markdown => ReportFormat::Markdown,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured network and print its edge list.
    GenerateNetwork,
    /// Draw one isolated set under the given weights.
    Isolate {
        /// Weight id such as degree^0 (uniform), degree^2, spectral^1.
        #[arg(long, default_value = "degree^0")]
        weights: String,
    },
    /// Run adaptive weight selection over the configured candidates.
    SelectWeight,
    /// Draw an isolated set and a treatment assignment.
    Assign {
        #[arg(long, default_value = "degree^0")]
        weights: String,
        /// cr: cluster-level complete randomization; mpr: matched pairs.
        #[arg(long, default_value = "cr")]
        mechanism: String,
    },
    /// Run the configured methods and report MSE decompositions.
    Simulate,
    /// Run the scaling grid and report per-size MSE decompositions.
    Scaling,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .context("this subcommand needs --config <file>")?;
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing output {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;

    let output = match &cli.command {
        Command::GenerateNetwork => {
            let g = build_network(&cfg.network, cfg.network.n, cfg.network.seed)?;
            write_edge_list(&g, g.is_symmetric())
        }
        Command::Isolate { weights } => {
            let g = build_network(&cfg.network, cfg.network.n, cfg.network.seed)?;
            let (family, l) = parse_weight_id(weights)?;
            let w = candidate_weights(&g, family, l);
            let s = weighted_random_isolation(&g, &w, seeds::mix(cfg.seed, seeds::tag("isolate")));
            s.to_csv()
        }
        Command::SelectWeight => {
            let g = build_network(&cfg.network, cfg.network.n, cfg.network.seed)?;
            let report = run_selection(&g, &cfg, 0)?;
            report.to_csv()
        }
        Command::Assign { weights, mechanism } => {
            let g = build_network(&cfg.network, cfg.network.n, cfg.network.seed)?;
            let (family, l) = parse_weight_id(weights)?;
            let w = candidate_weights(&g, family, l);
            let s = weighted_random_isolation(&g, &w, seeds::mix(cfg.seed, seeds::tag("isolate")));
            let assignment_seed = seeds::mix(cfg.seed, seeds::tag("assign"));
            let a = match mechanism.as_str() {
                "cr" => cluster_complete_randomization(&g, &s, assignment_seed)?,
                "mpr" => matched_pairs_randomization(&g, &s, assignment_seed)?,
                other => anyhow::bail!("unknown mechanism `{other}` (expected cr or mpr)"),
            };
            a.to_csv()
        }
        Command::Simulate => {
            let rows = run_experiment(&cfg)?;
            emit_report(&rows, cli.format.into())
        }
        Command::Scaling => {
            let rows = run_scaling(&cfg)?;
            emit_report(&rows, cli.format.into())
        }
    };
    emit(&cli, &output)
}
