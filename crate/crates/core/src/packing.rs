//! Measurements behind the packing lower bound: sign-vector codewords far apart
//! in Hamming distance, the margin-conditioned uniform distributions around
//! them, and the quantities the argument relies on (margin mass near the
//! hyperplane, sign disagreement versus angle, cross-distribution error).

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{ci95, mc_error, Dataset, ExampleSource, Hypothesis, MarginDistribution};
use crate::error::{invalid, Error, Result};
use crate::linalg::dot;
use crate::rng::{counter_u64, derive_seed, SplitMix64};

/// `K` codewords in `{±1/sqrt(d)}^d` with pairwise Hamming distance at least `ceil(d/10)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingEnsemble {
    d: usize,
    gamma: f64,
    signs: Vec<Vec<bool>>,
    codewords: Vec<Vec<f64>>,
    min_hamming: usize,
    attempts: u64,
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Rejection sampling of uniform sign vectors.
pub fn make_packing_codewords(d: usize, k: usize, gamma: f64, seed: u64, max_attempts: u64) -> Result<PackingEnsemble> {
    if d < 20 {
        return Err(invalid("d", "must be at least 20"));
    }
    if k < 2 {
        return Err(invalid("K", "must be at least 2"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid("gamma", "must lie in [0, 1)"));
    }
    let need = d.div_ceil(10);
    let mut signs: Vec<Vec<bool>> = Vec::with_capacity(k);
    let mut attempts = 0u64;
    let mut counter = 0u64;
    while signs.len() < k {
        if attempts == max_attempts {
            return Err(Error::PackingFailed { attempts });
        }
        attempts += 1;
        let mut cand = Vec::with_capacity(d);
        while cand.len() < d {
            let bits = counter_u64(seed, counter);
            counter += 1;
            let take = (d - cand.len()).min(64);
            cand.extend((0..take).map(|j| (bits >> j) & 1 == 1));
        }
        if signs.iter().all(|s| hamming(s, &cand) >= need) {
            signs.push(cand);
        }
    }
    let min_hamming = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .map(|(i, j)| hamming(&signs[i], &signs[j]))
        .min()
        .unwrap_or(d);
    let c = 1.0 / libm::sqrt(d as f64);
    let codewords = signs
        .iter()
        .map(|s| s.iter().map(|&b| if b { c } else { -c }).collect())
        .collect();
    Ok(PackingEnsemble {
        d,
        gamma,
        signs,
        codewords,
        min_hamming,
        attempts,
    })
}

impl PackingEnsemble {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn codeword(&self, i: usize) -> &[f64] {
        &self.codewords[i]
    }

    pub fn codewords(&self) -> &[Vec<f64>] {
        &self.codewords
    }

    pub fn signs(&self, i: usize) -> &[bool] {
        &self.signs[i]
    }

    pub fn min_hamming(&self) -> usize {
        self.min_hamming
    }

    pub fn attempts(&self) -> u64 {
        self.attempts
    }

    /// The margin-conditioned distribution around codeword `i`.
    pub fn distribution(&self, i: usize) -> Result<MarginDistribution> {
        if i >= self.len() {
            return Err(invalid("i", "codeword index out of range"));
        }
        MarginDistribution::new(self.codewords[i].clone(), self.gamma)
    }
}

/// `n_samples` draws from the distribution around codeword `i`.
pub fn sample_packing_dist(ensemble: &PackingEnsemble, i: usize, n_samples: usize, seed: u64) -> Result<Dataset> {
    ensemble.distribution(i)?.sample(n_samples, seed)
}

/// Monte-Carlo estimate of `Pr[|<w, x>| < gamma]` for uniform `x` on the
/// sphere (any fixed unit `w`; the first basis vector is used), with a 95% half-width.
pub fn estimate_p_gamma(d: usize, gamma: f64, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    if d == 0 {
        return Err(invalid("d", "must be positive"));
    }
    if n_samples < 10_000 {
        return Err(invalid("n_samples", "must be at least 1e4"));
    }
    let mut rng = SplitMix64::new(seed);
    let mut x = vec![0.0; d];
    let mut inside = 0usize;
    for _ in 0..n_samples {
        rng.unit_vector(&mut x);
        if x[0].abs() < gamma {
            inside += 1;
        }
    }
    let p = inside as f64 / n_samples as f64;
    Ok((p, ci95(p, n_samples)))
}

/// Sign disagreement of two unit vectors on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disagreement {
    /// Monte-Carlo `Pr[sign<w_i, x> != sign<w_j, x>]`.
    pub estimate: f64,
    pub ci: f64,
    /// `arccos(<w_i, w_j>) / pi`.
    pub analytic: f64,
}

impl Disagreement {
    pub fn agreement_estimate(&self) -> f64 {
        1.0 - self.estimate
    }

    pub fn agreement_analytic(&self) -> f64 {
        1.0 - self.analytic
    }
}

pub fn sign_disagreement(wi: &[f64], wj: &[f64], n_samples: usize, seed: u64) -> Result<Disagreement> {
    if wi.len() != wj.len() {
        return Err(Error::DimensionMismatch {
            expected: wi.len(),
            found: wj.len(),
        });
    }
    if wi.is_empty() || n_samples == 0 {
        return Err(invalid(
            "n_samples",
            "need a nonempty dimension and at least one sample",
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let mut x = vec![0.0; wi.len()];
    let mut differ = 0usize;
    for _ in 0..n_samples {
        rng.unit_vector(&mut x);
        if (dot(wi, &x) < 0.0) != (dot(wj, &x) < 0.0) {
            differ += 1;
        }
    }
    let c = dot(wi, wj) / (crate::linalg::norm(wi) * crate::linalg::norm(wj));
    let estimate = differ as f64 / n_samples as f64;
    Ok(Disagreement {
        estimate,
        ci: ci95(estimate, n_samples),
        analytic: libm::acos(c.clamp(-1.0, 1.0)) / core::f64::consts::PI,
    })
}

/// Monte-Carlo errors of `candidate` on the distributions around codewords `i` and `j`.
pub fn disjointness_experiment(
    ensemble: &PackingEnsemble,
    i: usize,
    j: usize,
    candidate: &Hypothesis,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let (err_i, _) = mc_error(&ensemble.distribution(i)?, candidate, n_samples, derive_seed(seed, 0))?;
    let (err_j, _) = mc_error(&ensemble.distribution(j)?, candidate, n_samples, derive_seed(seed, 1))?;
    Ok((err_i, err_j))
}

/// One row of [`packing_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingRow {
    pub epsilon: f64,
    pub n: usize,
    pub trial: usize,
    pub err_i: f64,
    pub err_j: f64,
    pub success: bool,
}

/// Error threshold that counts as success in a packing sweep.
pub const SUCCESS_ERROR: f64 = 0.1;

/// For every `(epsilon, n, trial)`: train `learner` on `n` draws around
/// codeword 0 and measure its error around codewords 0 and 1.
pub fn packing_sweep<L>(
    ensemble: &PackingEnsemble,
    mut learner: L,
    epsilons: &[f64],
    ns: &[usize],
    trials: usize,
    n_test: usize,
    seed: u64,
) -> Result<Vec<PackingRow>>
where
    L: FnMut(&Dataset, f64, u64) -> Result<Hypothesis>,
{
    let mut rows = Vec::with_capacity(epsilons.len() * ns.len() * trials);
    for (ei, &epsilon) in epsilons.iter().enumerate() {
        for (ni, &n) in ns.iter().enumerate() {
            for trial in 0..trials {
                let cell = derive_seed(derive_seed(derive_seed(seed, ei as u64), ni as u64), trial as u64);
                let train = sample_packing_dist(ensemble, 0, n, derive_seed(cell, 0))?;
                let h = learner(&train, epsilon, derive_seed(cell, 1))?;
                let (err_i, err_j) = disjointness_experiment(ensemble, 0, 1, &h, n_test, derive_seed(cell, 2))?;
                rows.push(PackingRow {
                    epsilon,
                    n,
                    trial,
                    err_i,
                    err_j,
                    success: err_i <= SUCCESS_ERROR,
                });
            }
        }
    }
    Ok(rows)
}

/// For each epsilon (in first-seen order), the smallest `n` whose success rate
/// reaches `min_rate`, or `None` if no tested `n` does.
pub fn success_frontier(rows: &[PackingRow], min_rate: f64) -> Vec<(f64, Option<usize>)> {
    let mut eps: Vec<f64> = Vec::new();
    for r in rows {
        if !eps.contains(&r.epsilon) {
            eps.push(r.epsilon);
        }
    }
    eps.into_iter()
        .map(|e| {
            let mut ns: Vec<usize> = rows.iter().filter(|r| r.epsilon == e).map(|r| r.n).collect();
            ns.sort_unstable();
            ns.dedup();
            let frontier = ns.into_iter().find(|&n| {
                let cell: Vec<_> = rows.iter().filter(|r| r.epsilon == e && r.n == n).collect();
                let ok = cell.iter().filter(|r| r.success).count();
                ok as f64 >= min_rate * cell.len() as f64
            });
            (e, frontier)
        })
        .collect()
}
