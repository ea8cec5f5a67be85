//! Experiment parameters: one flat key set shared by the JSON config file and
//! the command-line flags. A flag beats the file; the file beats the defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dph_core::noisegd::{LogBase, PrivacyBudget};
use dph_core::LearnerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Environment variable consulted for the master seed when neither a flag nor
/// the config file sets one.
pub const SEED_ENV: &str = "DPH_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Approx,
    Pure,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Approx => "approx",
            Algo::Pure => "pure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBaseArg {
    Two,
    Natural,
}

impl From<LogBaseArg> for LogBase {
    fn from(v: LogBaseArg) -> Self {
        match v {
            LogBaseArg::Two => LogBase::Two,
            LogBaseArg::Natural => LogBase::Natural,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// JSON file with any of these keys; flags given here take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Fraction of epsilon spent on the descent runs of the approximate learner.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Projection dimension; derived from the other parameters when absent.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long = "c-jl", alias = "c_jl")]
    #[serde(alias = "c-jl")]
    pub c_jl: Option<f64>,
    #[arg(long = "net-cap", alias = "net_cap")]
    #[serde(alias = "net-cap")]
    pub net_cap: Option<u64>,
    #[arg(long = "log-base", alias = "log_base", value_enum)]
    #[serde(alias = "log-base")]
    pub log_base: Option<LogBaseArg>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Number of packing codewords.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long = "n-test", alias = "n_test")]
    #[serde(alias = "n-test")]
    pub n_test: Option<usize>,

    /// Output file (CSV or dataset); standard output when absent where allowed.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dataset CSV to read.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Model JSON to write (learn) or read (eval).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Generating-direction sidecar: written by `gen`, read only by `eval`.
    #[arg(long)]
    pub wstar: Option<PathBuf>,

    /// Use dataset coordinates as given instead of normalizing each row.
    #[arg(long = "no-normalize", alias = "no_normalize")]
    #[serde(default, alias = "no-normalize")]
    pub no_normalize: bool,
    /// Record wall-clock milliseconds. Off by default so outputs are byte-reproducible.
    #[arg(long = "record-time", alias = "record_time")]
    #[serde(default, alias = "record-time")]
    pub record_time: bool,
}

macro_rules! prefer {
    ($cli:ident, $file:ident; $($field:ident),* ; $($flag:ident),*) => {
        Params {
            config: $cli.config.clone(),
            $($field: $cli.$field.clone().or($file.$field.clone()),)*
            $($flag: $cli.$flag || $file.$flag,)*
        }
    };
}

impl Params {
    /// Reads the config file if one was named, applies flag overrides and
    /// resolves the master seed (flag, then file, then `env_seed`, then 0).
    /// The binary passes the value of `DPH_SEED` as `env_seed`.
    pub fn resolve(self, env_seed: Option<&str>) -> Result<Params> {
        let file = match &self.config {
            Some(path) => load_config(path)?,
            None => Params::default(),
        };
        let cli = self;
        let mut merged = prefer!(cli, file;
            algo, alpha, beta, gamma, epsilon, delta, split, n, d, m, rho, c_jl, net_cap, log_base,
            trials, seed, epsilons, ns, k, tau, points, n_test, out, data, model, wstar;
            no_normalize, record_time);
        if merged.seed.is_none() {
            merged.seed = Some(match env_seed {
                Some(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("{SEED_ENV}={v:?} is not a u64")))?,
                None => 0,
            });
        }
        Ok(merged)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.1)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(0.1)
    }

    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(dph_core::loss::DEFAULT_RHO)
    }

    pub fn c_jl(&self) -> f64 {
        self.c_jl.unwrap_or(8.0)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(1)
    }

    pub fn n_test(&self) -> usize {
        self.n_test.unwrap_or(10_000)
    }
}

pub fn load_config(path: &Path) -> Result<Params> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn require<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| CliError::config(format!("missing parameter `{name}`")))
}

pub fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::config(format!("`{name}` must lie in (0, 1), got {v}")))
    }
}

pub fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "`{name}` must be positive and finite, got {v}"
        )))
    }
}

pub fn check_count(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(CliError::config(format!("`{name}` must be at least {min}, got {v}")))
    }
}

/// Everything a learner needs except the data and the dimension, validated.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerParams {
    pub algo: Algo,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub split: f64,
    pub rho: f64,
    pub c_jl: f64,
    pub m: Option<usize>,
    pub net_cap: Option<u64>,
    pub log_base: LogBase,
}

impl LearnerParams {
    pub fn from_params(p: &Params, algo: Algo) -> Result<Self> {
        let lp = LearnerParams {
            algo,
            alpha: p.alpha(),
            beta: p.beta(),
            gamma: require(&p.gamma, "gamma")?,
            epsilon: require(&p.epsilon, "epsilon")?,
            delta: match algo {
                Algo::Approx => require(&p.delta, "delta")?,
                Algo::Pure => 0.0,
            },
            split: p.split.unwrap_or(0.5),
            rho: p.rho(),
            c_jl: p.c_jl(),
            m: p.m,
            net_cap: p.net_cap,
            log_base: p.log_base.map(LogBase::from).unwrap_or_default(),
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("alpha", self.alpha)?;
        check_open_unit("beta", self.beta)?;
        check_open_unit("gamma", self.gamma)?;
        check_positive("epsilon", self.epsilon)?;
        check_positive("c_jl", self.c_jl)?;
        check_open_unit("split", self.split)?;
        if !(self.rho > 0.0 && self.rho < 0.225) {
            return Err(CliError::config(format!(
                "`rho` must lie in (0, 0.225), got {}",
                self.rho
            )));
        }
        if self.algo == Algo::Approx {
            check_open_unit("delta", self.delta)?;
        } else if self.delta != 0.0 {
            return Err(CliError::config("the pure learner takes no delta"));
        }
        if let Some(m) = self.m {
            check_count("m", m, 1)?;
        }
        Ok(())
    }

    /// Same parameters with a different epsilon.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let out = LearnerParams {
            epsilon,
            ..self.clone()
        };
        out.validate()?;
        Ok(out)
    }

    pub fn learner_config(&self, seed: u64) -> Result<LearnerConfig> {
        let budget = match self.algo {
            Algo::Approx => PrivacyBudget::with_split(self.epsilon, self.delta, self.split)?,
            Algo::Pure => PrivacyBudget::pure(self.epsilon)?,
        };
        let mut cfg = LearnerConfig::new(self.alpha, self.beta, self.gamma, budget, seed)?;
        cfg.rho = self.rho;
        cfg.c_jl = self.c_jl;
        cfg.m_override = self.m;
        cfg.log_base = self.log_base;
        if let Some(cap) = self.net_cap {
            cfg.net_cap = cap;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Stable textual form used for hashing seeds and run ids.
    pub fn canonical(&self) -> String {
        format!(
            "algo={};alpha={};beta={};gamma={};epsilon={};delta={};split={};rho={};c_jl={};m={};net_cap={};log_base={:?}",
            self.algo.as_str(),
            self.alpha,
            self.beta,
            self.gamma,
            self.epsilon,
            self.delta,
            self.split,
            self.rho,
            self.c_jl,
            self.m.map_or("auto".to_string(), |m| m.to_string()),
            self.net_cap.map_or("default".to_string(), |c| c.to_string()),
            self.log_base,
        )
    }
}
