//! Private empirical risk minimization on the projected data: projected noisy
//! stochastic subgradient descent, repeated a few times, with the exponential
//! mechanism choosing among the runs.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Dataset, Hypothesis};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, norm_sq};
use crate::loss::SurrogateLoss;
use crate::netmech::sample_from_utilities;
use crate::rng::{derive_seed, SplitMix64};

/// Radius of the hypothesis ball `C`.
pub const BALL_RADIUS: f64 = 1.0;
/// Diameter `|C|_2` of the hypothesis ball.
pub const BALL_DIAMETER: f64 = 2.0 * BALL_RADIUS;

/// An `(epsilon, delta)` budget plus the fraction of epsilon spent on the
/// descent runs inside [`procedure_f`] (the rest pays for the selection step).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
    pub split: f64,
}

impl PrivacyBudget {
    /// `epsilon` may be `+inf` (no privacy, useful for diagnostics).
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        Self::with_split(epsilon, delta, 0.5)
    }

    pub fn with_split(epsilon: f64, delta: f64, split: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidBudget("epsilon must be positive"));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidBudget("delta must lie in [0, 1)"));
        }
        if !(split > 0.0 && split < 1.0) {
            return Err(Error::InvalidBudget("split must lie in (0, 1)"));
        }
        Ok(Self { epsilon, delta, split })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }
}

/// Which logarithm turns `8 / beta` into a run count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Two,
    Natural,
}

/// Number of descent runs, `ceil(log(8 / beta))`.
pub fn run_count(beta: f64, base: LogBase) -> Result<usize> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(crate::error::invalid("beta", "must lie in (0, 1)"));
    }
    let x = 8.0 / beta;
    let l = match base {
        LogBase::Two => libm::log2(x),
        LogBase::Natural => libm::log(x),
    };
    Ok(libm::ceil(l) as usize)
}

/// `32 L^2 n^2 ln(n / delta') ln(1 / delta') / epsilon'^2`.
pub fn suggested_sigma2(lipschitz: f64, n: usize, eps_prime: f64, delta_prime: f64) -> Result<f64> {
    if !(lipschitz > 0.0) || n == 0 {
        return Err(Error::InvalidBudget("lipschitz constant and n must be positive"));
    }
    if !(eps_prime > 0.0) {
        return Err(Error::InvalidBudget("epsilon' must be positive"));
    }
    if !(delta_prime > 0.0 && delta_prime < 1.0) {
        return Err(Error::InvalidBudget("delta' must lie in (0, 1)"));
    }
    let n = n as f64;
    if !(n / delta_prime > 1.0) {
        return Err(Error::InvalidBudget("n / delta' must exceed 1"));
    }
    Ok(
        32.0 * lipschitz * lipschitz * n * n * libm::log(n / delta_prime) * libm::log(1.0 / delta_prime)
            / (eps_prime * eps_prime),
    )
}

/// Parameters of one descent run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdSchedule {
    pub sigma2: f64,
    pub iterations: u64,
    pub n: usize,
    pub m: usize,
    pub lipschitz: f64,
}

impl GdSchedule {
    pub fn new(n: usize, m: usize, lipschitz: f64, eps_prime: f64, delta_prime: f64) -> Result<Self> {
        let sigma2 = suggested_sigma2(lipschitz, n, eps_prime, delta_prime)?;
        let iterations = (n as u64).saturating_mul(n as u64) - 1;
        Ok(Self {
            sigma2,
            iterations,
            n,
            m,
            lipschitz,
        })
    }

    /// Step size `|C| / sqrt(t (n^2 L^2 + m sigma^2))`, `t >= 1`.
    #[inline]
    pub fn eta(&self, t: u64) -> f64 {
        let n = self.n as f64;
        let l = self.lipschitz;
        BALL_DIAMETER / libm::sqrt(t as f64 * (n * n * l * l + self.m as f64 * self.sigma2))
    }
}

/// Euclidean projection onto the ball of radius `r`, in place.
#[inline]
pub fn project_ball_in_place(w: &mut [f64], r: f64) {
    let n = norm(w);
    if n > r {
        let f = r / n;
        w.iter_mut().for_each(|v| *v *= f);
    }
}

/// Euclidean projection onto the ball of radius `r`.
pub fn project_ball(w: &[f64], r: f64) -> Vec<f64> {
    let mut out = w.to_vec();
    project_ball_in_place(&mut out, r);
    out
}

/// Overrides for diagnostics and tests. The defaults run the private algorithm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GdHooks {
    /// Replace the calibrated noise variance.
    pub sigma2: Option<f64>,
    /// Replace the `n^2 - 1` iteration count.
    pub iterations: Option<u64>,
    /// Use the exact full-data subgradient instead of one sampled example.
    pub full_batch: bool,
}

/// Result of a descent run with its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct GdRun {
    pub w: Vec<f64>,
    pub schedule: GdSchedule,
    /// Largest iterate norm seen (always at most the ball radius).
    pub max_iterate_norm: f64,
}

/// Projected noisy SGD on the total loss, returning the last iterate.
pub fn noise_gd(data: &Dataset, loss: &SurrogateLoss, eps_run: f64, delta_run: f64, seed: u64) -> Result<Hypothesis> {
    noise_gd_with(data, loss, eps_run, delta_run, seed, GdHooks::default()).map(|r| Hypothesis::projected(r.w))
}

pub fn noise_gd_with(
    data: &Dataset,
    loss: &SurrogateLoss,
    eps_run: f64,
    delta_run: f64,
    seed: u64,
    hooks: GdHooks,
) -> Result<GdRun> {
    if !(eps_run > 0.0) {
        return Err(Error::InvalidBudget("epsilon per run must be positive"));
    }
    if !(delta_run > 0.0 && delta_run < 1.0) {
        return Err(Error::InvalidBudget("delta per run must lie in (0, 1)"));
    }
    let n = data.len();
    if n < 2 {
        return Err(crate::error::invalid("n", "noisy descent needs at least two examples"));
    }
    let m = data.dim();
    let mut schedule = GdSchedule::new(n, m, loss.slope(), eps_run, delta_run)?;
    if let Some(s2) = hooks.sigma2 {
        if !(s2 >= 0.0) {
            return Err(crate::error::invalid("sigma2", "must be nonnegative"));
        }
        schedule.sigma2 = s2;
    }
    if let Some(t) = hooks.iterations {
        schedule.iterations = t;
    }
    let sigma = libm::sqrt(schedule.sigma2);
    let nf = n as f64;
    let examples = data.examples();

    let mut rng = SplitMix64::new(seed);
    let mut w = vec![0.0; m];
    let mut step = vec![0.0; m];
    let mut max_iterate_norm = 0.0f64;
    for t in 1..=schedule.iterations {
        let eta = schedule.eta(t);
        let sq = if hooks.full_batch {
            if sigma > 0.0 {
                step.iter_mut().for_each(|s| *s = sigma * rng.normal());
            } else {
                step.iter_mut().for_each(|s| *s = 0.0);
            }
            for e in examples {
                loss.add_subgradient(&w, &e.x, e.y.sign(), 1.0, &mut step);
            }
            axpy(-eta, &step, &mut w);
            norm_sq(&w)
        } else {
            // Single pass: w -= eta (b + n * g), accumulating the new norm.
            let e = &examples[rng.index(n)];
            let y = e.y.sign();
            let gx = nf * y * loss.margin_derivative(y * dot(&w, &e.x));
            let mut sq = 0.0;
            for (wi, &xi) in w.iter_mut().zip(&e.x) {
                let b = if sigma > 0.0 { sigma * rng.normal() } else { 0.0 };
                *wi -= eta * (b + gx * xi);
                sq += *wi * *wi;
            }
            sq
        };
        let mut len = libm::sqrt(sq);
        if len > BALL_RADIUS {
            let f = BALL_RADIUS / len;
            w.iter_mut().for_each(|v| *v *= f);
            len = norm(&w);
        }
        max_iterate_norm = max_iterate_norm.max(len);
    }
    Ok(GdRun {
        w,
        schedule,
        max_iterate_norm,
    })
}

/// Exponential-mechanism choice among candidate hypotheses with utility
/// `-total_loss` and sensitivity `(gamma_hi + 1) L`, the largest single-example loss.
pub fn select_by_loss(
    candidates: &[Vec<f64>],
    data: &Dataset,
    loss: &SurrogateLoss,
    epsilon: f64,
    seed: u64,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let utilities = candidates
        .iter()
        .map(|w| loss.total_loss(w, data).map(|l| -l))
        .collect::<Result<Vec<_>>>()?;
    sample_from_utilities(&utilities, loss.max_value(), epsilon, seed)
}

/// Options for [`procedure_f_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FOptions {
    pub log_base: LogBase,
    /// Replace `ceil(log(8 / beta))`.
    pub runs: Option<usize>,
    /// Replace the selection epsilon `(1 - split) epsilon`.
    pub selection_epsilon: Option<f64>,
    pub hooks: GdHooks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FOutput {
    pub hypothesis: Hypothesis,
    pub runs: usize,
    pub eps_run: f64,
    pub delta_run: f64,
    pub eps_select: f64,
    pub sigma2: f64,
    pub selected: usize,
    pub candidates: Vec<Vec<f64>>,
}

/// Runs the noisy descent `k = ceil(log2(8 / beta))` times with
/// `(split * epsilon / k, delta / k)` each, then spends `(1 - split) * epsilon`
/// selecting one output.
pub fn procedure_f(
    data: &Dataset,
    loss: &SurrogateLoss,
    budget: &PrivacyBudget,
    beta: f64,
    seed: u64,
) -> Result<Hypothesis> {
    procedure_f_with(data, loss, budget, beta, seed, FOptions::default()).map(|o| o.hypothesis)
}

pub fn procedure_f_with(
    data: &Dataset,
    loss: &SurrogateLoss,
    budget: &PrivacyBudget,
    beta: f64,
    seed: u64,
    opts: FOptions,
) -> Result<FOutput> {
    if budget.delta <= 0.0 {
        return Err(Error::InvalidBudget("approximate DP needs delta > 0"));
    }
    let k = match opts.runs {
        Some(k) if k >= 1 => k,
        Some(_) => return Err(crate::error::invalid("runs", "must be at least 1")),
        None => run_count(beta, opts.log_base)?,
    };
    let eps_run = budget.split * budget.epsilon / k as f64;
    let delta_run = budget.delta / k as f64;
    let eps_select = opts.selection_epsilon.unwrap_or((1.0 - budget.split) * budget.epsilon);

    let mut candidates = Vec::with_capacity(k);
    let mut sigma2 = 0.0;
    for i in 0..k {
        let run = noise_gd_with(
            data,
            loss,
            eps_run,
            delta_run,
            derive_seed(seed, i as u64 + 1),
            opts.hooks,
        )?;
        sigma2 = run.schedule.sigma2;
        candidates.push(run.w);
    }
    let selected = select_by_loss(&candidates, data, loss, eps_select, derive_seed(seed, 0))?;
    Ok(FOutput {
        hypothesis: Hypothesis::projected(candidates[selected].clone()),
        runs: k,
        eps_run,
        delta_run,
        eps_select,
        sigma2,
        selected,
        candidates,
    })
}
