//! Flag parsing and config-file merging.
//!
//! Primary parameters come from flags; an optional JSON config file is
//! merged underneath (explicit flags win). All randomness flows through
//! `--seed`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::path::PathBuf;

use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "phasesep",
    version,
    about = "Separate amplitude and phase variation in 1-D point process collections"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Simulate a warped Cox scenario, writing the truth bundle and the
    /// warped patterns.
    Simulate(RunArgs),
    /// Estimate the structural mean and warps from a pattern collection
    /// and register it.
    Register(RunArgs),
    /// Run a Monte-Carlo study (consistency, rate, clt, unbiasedness).
    Evaluate(RunArgs),
    /// End-to-end scenario run emitting figure-style CSVs.
    Reproduce(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    Bimodal,
    Triangular,
    WarpedUniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyName {
    Consistency,
    Rate,
    Clt,
    Unbiasedness,
}

#[derive(Args, Clone, Debug, Default)]
pub struct RunArgs {
    /// Scenario: bimodal, triangular, or warped-uniform
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioName>,
    /// Number of point processes
    #[arg(long)]
    pub n: Option<usize>,
    /// Poisson intensity multiplier
    #[arg(long)]
    pub tau: Option<f64>,
    /// Global smoothing bandwidth on the canonical domain (overrides the
    /// power rule)
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Bandwidth exponent of the power rule sigma_i = m_i^(-alpha)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Master RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// CDF grid size
    #[arg(long)]
    pub grid: Option<usize>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Input pattern collection (register)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Study kind (evaluate)
    #[arg(long, value_enum)]
    pub study: Option<StudyName>,
    /// Replicates per study cell
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Comma-separated n values for study cells
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// tau rule for study cells: "nsq" (tau = n^2) or a fixed number
    #[arg(long)]
    pub tau_rule: Option<String>,
    /// JSON config file merged under explicit flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ConfigFile {
    scenario: Option<ScenarioName>,
    n: Option<usize>,
    tau: Option<f64>,
    sigma: Option<f64>,
    alpha: Option<f64>,
    seed: Option<u64>,
    grid: Option<usize>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    input: Option<PathBuf>,
    study: Option<StudyName>,
    replicates: Option<usize>,
    n_list: Option<Vec<usize>>,
    tau_rule: Option<String>,
}

impl RunArgs {
    /// Loads `--config` (when given) and fills in any flag not set on the
    /// command line.
    pub fn merged(mut self) -> CliResult<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("config {}: {e}", path.display())))?;
        let file: ConfigFile = serde_json::from_str(&text).map_err(|e| {
            CliError::Validation(format!("config {}: line {}: {e}", path.display(), e.line()))
        })?;
        self.scenario = self.scenario.or(file.scenario);
        self.n = self.n.or(file.n);
        self.tau = self.tau.or(file.tau);
        self.sigma = self.sigma.or(file.sigma);
        self.alpha = self.alpha.or(file.alpha);
        self.seed = self.seed.or(file.seed);
        self.grid = self.grid.or(file.grid);
        self.threads = self.threads.or(file.threads);
        self.out = self.out.or(file.out);
        self.input = self.input.or(file.input);
        self.study = self.study.or(file.study);
        self.replicates = self.replicates.or(file.replicates);
        self.n_list = self.n_list.or(file.n_list);
        self.tau_rule = self.tau_rule.or(file.tau_rule);
        Ok(self)
    }

    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::Usage("--seed is required".into()))
    }

    pub fn validate_positive(&self) -> CliResult<()> {
        if let Some(n) = self.n {
            if n == 0 {
                return Err(CliError::Validation("--n must be positive".into()));
            }
        }
        if let Some(tau) = self.tau {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(CliError::Validation("--tau must be positive".into()));
            }
        }
        if let Some(sigma) = self.sigma {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(CliError::Validation("--sigma must be positive".into()));
            }
        }
        if let Some(alpha) = self.alpha {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(CliError::Validation("--alpha must be positive".into()));
            }
        }
        if let Some(grid) = self.grid {
            if grid < 2 {
                return Err(CliError::Validation("--grid must be at least 2".into()));
            }
        }
        if let Some(r) = self.replicates {
            if r == 0 {
                return Err(CliError::Validation("--replicates must be positive".into()));
            }
        }
        Ok(())
    }
}
