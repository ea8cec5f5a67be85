//! End-to-end private learners: project with a random sign matrix, learn in
//! the projected space, lift the result back with `A^T`.
//!
//! The private step (noisy descent or the exponential mechanism) only ever
//! receives the projected dataset. The returned direction is renormalized to
//! unit length, which changes no sign and costs no privacy.

use alloc::vec::Vec;

use crate::data::{Dataset, Hypothesis};
use crate::error::{invalid, Error, Result};
use crate::linalg::norm;
use crate::loss::{SurrogateLoss, DEFAULT_RHO};
use crate::netmech::{build_net_capped, exp_mech_over_net, UtilitySpec, DEFAULT_NET_CAP};
use crate::noisegd::{procedure_f_with, FOptions, LogBase, PrivacyBudget};
use crate::projection::{choose_m_capped, project_dataset, ProjectionMatrix, DEFAULT_M_MAX};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub budget: PrivacyBudget,
    pub rho: f64,
    pub c_jl: f64,
    pub m_override: Option<usize>,
    pub m_max: usize,
    pub net_cap: u64,
    pub log_base: LogBase,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn new(alpha: f64, beta: f64, gamma: f64, budget: PrivacyBudget, seed: u64) -> Result<Self> {
        let cfg = Self {
            alpha,
            beta,
            gamma,
            budget,
            rho: DEFAULT_RHO,
            c_jl: 8.0,
            m_override: None,
            m_max: DEFAULT_M_MAX,
            net_cap: DEFAULT_NET_CAP,
            log_base: LogBase::Two,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m_override = Some(m);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(name, "must lie in (0, 1)"));
            }
        }
        if !(self.rho > 0.0 && self.rho < 0.225) {
            return Err(invalid("rho", "must lie in (0, 0.225)"));
        }
        if !(self.c_jl > 0.0 && self.c_jl.is_finite()) {
            return Err(invalid("c_jl", "must be positive"));
        }
        if self.m_override == Some(0) {
            return Err(invalid("m_override", "must be positive"));
        }
        Ok(())
    }

    /// `alpha beta^2 / (64 n)`.
    pub fn beta_jl(&self, n: usize) -> f64 {
        self.alpha * self.beta * self.beta / (64.0 * n as f64)
    }

    /// Target dimension for a dataset of size `n`: the override if set, else
    /// `ceil(c_jl ln(1 / beta_jl) / (rho gamma)^2)`.
    pub fn target_dim(&self, n: usize) -> Result<usize> {
        match self.m_override {
            Some(m) => Ok(m),
            None => choose_m_capped(self.rho * self.gamma, self.beta_jl(n), self.c_jl, self.m_max),
        }
    }
}

/// Public record of how a learner ran. Derived only from public parameters
/// and the private output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LearnerMetadata {
    pub m: usize,
    pub m_overridden: bool,
    pub beta_jl: f64,
    pub projection_seed: u64,
    pub projection_resampled: bool,
    pub runs: Option<usize>,
    pub sigma2: Option<f64>,
    pub eps_run: Option<f64>,
    pub delta_run: Option<f64>,
    pub eps_select: f64,
    pub net_size: Option<u64>,
    pub net_spacing: Option<f64>,
    /// The lifted vector was zero and could not be renormalized.
    pub degenerate_output: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerOutput {
    /// Unit-norm classifier in the input space.
    pub hypothesis: Hypothesis,
    /// The projected-space hypothesis before lifting.
    pub projected: Hypothesis,
    pub metadata: LearnerMetadata,
}

/// Samples `A` and projects. On a zero projection the matrix is resampled
/// once with `seed + 1`.
pub fn projection_stage(s: &Dataset, m: usize, seed: u64) -> Result<(ProjectionMatrix, Dataset, bool)> {
    let a = ProjectionMatrix::sample(s.dim(), m, seed)?;
    match project_dataset(&a, s) {
        Ok(sa) => Ok((a, sa, false)),
        Err(Error::ProjectedToZero { .. }) => {
            let a = ProjectionMatrix::sample(s.dim(), m, seed.wrapping_add(1))?;
            let sa = project_dataset(&a, s)?;
            Ok((a, sa, true))
        }
        Err(e) => Err(e),
    }
}

fn lift(a: &ProjectionMatrix, w: &[f64]) -> Result<(Hypothesis, bool)> {
    let mut v = a.transpose_apply(w)?;
    let n = norm(&v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
        Ok((Hypothesis::ambient(v), false))
    } else {
        Ok((Hypothesis::ambient(v), true))
    }
}

fn start(s: &Dataset, cfg: &LearnerConfig) -> Result<(ProjectionMatrix, Dataset, LearnerMetadata)> {
    cfg.validate()?;
    let n = s.len();
    let m = cfg.target_dim(n)?;
    let projection_seed = derive_seed(cfg.seed, 0);
    let (a, sa, resampled) = projection_stage(s, m, projection_seed)?;
    let meta = LearnerMetadata {
        m,
        m_overridden: cfg.m_override.is_some(),
        beta_jl: cfg.beta_jl(n),
        projection_seed: a.seed(),
        projection_resampled: resampled,
        ..LearnerMetadata::default()
    };
    Ok((a, sa, meta))
}

/// `(epsilon, delta)`-private learner: noisy descent on the surrogate loss in
/// the projected space, boosted by [`procedure_f_with`].
pub fn learn_approx_dp(s: &Dataset, cfg: &LearnerConfig) -> Result<LearnerOutput> {
    if cfg.budget.delta <= 0.0 {
        return Err(Error::InvalidBudget("delta = 0: use the pure learner"));
    }
    let (a, sa, mut meta) = start(s, cfg)?;
    let out = approx_private_stage(&sa, cfg)?;
    meta.runs = Some(out.runs);
    meta.sigma2 = Some(out.sigma2);
    meta.eps_run = Some(out.eps_run);
    meta.delta_run = Some(out.delta_run);
    meta.eps_select = out.eps_select;
    let (hypothesis, degenerate) = lift(&a, &out.hypothesis.w)?;
    meta.degenerate_output = degenerate;
    Ok(LearnerOutput {
        hypothesis,
        projected: out.hypothesis,
        metadata: meta,
    })
}

/// The only part of [`learn_approx_dp`] that touches data; it sees `S_A` only.
pub fn approx_private_stage(sa: &Dataset, cfg: &LearnerConfig) -> Result<crate::noisegd::FOutput> {
    let loss = SurrogateLoss::for_margin(cfg.gamma, cfg.rho)?;
    let opts = FOptions {
        log_base: cfg.log_base,
        ..FOptions::default()
    };
    procedure_f_with(sa, &loss, &cfg.budget, cfg.beta, derive_seed(cfg.seed, 1), opts)
}

/// `(epsilon, 0)`-private learner: the exponential mechanism over a
/// `gamma / 10` net of the projected ball, utility `-(margin-miss fraction)`.
pub fn learn_pure_dp(s: &Dataset, cfg: &LearnerConfig) -> Result<LearnerOutput> {
    let (a, sa, mut meta) = start(s, cfg)?;
    let (w, net_size, spacing) = pure_private_stage(&sa, cfg)?;
    meta.net_size = Some(net_size);
    meta.net_spacing = Some(spacing);
    meta.eps_select = cfg.budget.epsilon;
    let (hypothesis, degenerate) = lift(&a, &w)?;
    meta.degenerate_output = degenerate;
    Ok(LearnerOutput {
        hypothesis,
        projected: Hypothesis::projected(w),
        metadata: meta,
    })
}

/// The data-touching part of [`learn_pure_dp`]; returns the chosen center,
/// the net size and its spacing.
pub fn pure_private_stage(sa: &Dataset, cfg: &LearnerConfig) -> Result<(Vec<f64>, u64, f64)> {
    let threshold = cfg.gamma / 10.0;
    let net = build_net_capped(sa.dim(), threshold, cfg.net_cap)?;
    let n = sa.len() as f64;
    let spec = UtilitySpec::new(
        move |d: &Dataset, c: &[f64]| {
            let miss = d.iter().filter(|e| e.signed_margin(c) < threshold).count();
            -(miss as f64) / n
        },
        1.0 / n,
    )?;
    let sel = exp_mech_over_net(&net, &spec, sa, cfg.budget.epsilon, derive_seed(cfg.seed, 1))?;
    Ok((sel.candidate, net.count(), net.spacing()))
}

/// Sample-size suggestion `ceil(c_n ln(e / (alpha beta gamma delta'))^3 / (alpha epsilon gamma^2))`
/// with `delta' = min(delta, 1/2)` (or `1/2` for pure privacy). The cubic log
/// factor is a working choice, not a derived constant.
pub fn suggest_n(alpha: f64, beta: f64, gamma: f64, epsilon: f64, delta: Option<f64>, c_n: f64) -> Result<u64> {
    for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(invalid(name, "must lie in (0, 1)"));
        }
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon", "must be positive and finite"));
    }
    if !(c_n > 0.0) {
        return Err(invalid("c_n", "must be positive"));
    }
    let d = match delta {
        Some(d) if d > 0.0 => d.min(0.5),
        Some(_) => return Err(invalid("delta", "must be positive when given")),
        None => 0.5,
    };
    let l = libm::log(core::f64::consts::E / (alpha * beta * gamma * d));
    Ok(libm::ceil(suggest_n_raw(l, alpha, gamma, epsilon, c_n)) as u64)
}

fn suggest_n_raw(log_term: f64, alpha: f64, gamma: f64, epsilon: f64, c_n: f64) -> f64 {
    c_n * log_term * log_term * log_term / (alpha * epsilon * gamma * gamma)
}
