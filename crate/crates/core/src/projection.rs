//! Random sign projections (`A_ij = ±1/sqrt(m)`) and Monte-Carlo checks of
//! how well they preserve norms and margins.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Dataset, ExampleSource, LabeledExample};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm, norm_sq};
use crate::rng::{counter_u64, derive_seed, SplitMix64};

/// Default cap on the target dimension returned by [`choose_m`].
pub const DEFAULT_M_MAX: usize = 1_000_000;

/// `ceil(c_jl * ln(1 / beta_jl) / gamma^2)`, capped at [`DEFAULT_M_MAX`].
pub fn choose_m(gamma: f64, beta_jl: f64, c_jl: f64) -> Result<usize> {
    choose_m_capped(gamma, beta_jl, c_jl, DEFAULT_M_MAX)
}

pub fn choose_m_capped(gamma: f64, beta_jl: f64, c_jl: f64, m_max: usize) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", "must lie in (0, 1)"));
    }
    if !(beta_jl > 0.0 && beta_jl < 1.0) {
        return Err(invalid("beta_jl", "must lie in (0, 1)"));
    }
    if !(c_jl > 0.0 && c_jl.is_finite()) {
        return Err(invalid("c_jl", "must be positive"));
    }
    let raw = libm::ceil(c_jl * libm::log(1.0 / beta_jl) / (gamma * gamma));
    if !(raw <= m_max as f64) {
        return Err(Error::Overflow {
            requested: raw,
            cap: m_max,
        });
    }
    Ok((raw as usize).max(1))
}

/// A linear map `R^d -> R^m`. Implemented by [`ProjectionMatrix`] and, for
/// tests and diagnostics, by [`IdentityMap`].
pub trait LinearMap {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

/// Word `word` of row `row` of the sign matrix keyed by `seed`; bit `k`
/// set means column `64 * word + k` is positive.
#[inline]
fn sign_word(seed: u64, words_per_row: usize, row: usize, word: usize) -> u64 {
    counter_u64(seed, (row * words_per_row + word) as u64)
}

#[inline]
fn words_per_row(d: usize) -> usize {
    d.div_ceil(64)
}

/// An `m x d` matrix with entries `±1/sqrt(m)`, fully determined by
/// `(seed, m, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    m: usize,
    d: usize,
    seed: u64,
    entries: Vec<f64>,
}

impl ProjectionMatrix {
    pub fn sample(d: usize, m: usize, seed: u64) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(invalid("d/m", "dimensions must be positive"));
        }
        let scale = 1.0 / libm::sqrt(m as f64);
        let wpr = words_per_row(d);
        let mut entries = Vec::with_capacity(m * d);
        for i in 0..m {
            for w in 0..wpr {
                let bits = sign_word(seed, wpr, i, w);
                let cols = (d - 64 * w).min(64);
                entries.extend((0..cols).map(|k| if (bits >> k) & 1 == 1 { scale } else { -scale }));
            }
        }
        Ok(Self { m, d, seed, entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    /// `A^T v` for `v` in `R^m`.
    pub fn transpose_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.d];
        for (i, &vi) in v.iter().enumerate() {
            crate::linalg::axpy(vi, self.row(i), &mut out);
        }
        Ok(out)
    }
}

impl LinearMap for ProjectionMatrix {
    fn in_dim(&self) -> usize {
        self.d
    }

    fn out_dim(&self) -> usize {
        self.m
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.d, "input dimension");
        (0..self.m).map(|i| dot(self.row(i), x)).collect()
    }
}

/// The identity on `R^d`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMap(pub usize);

impl LinearMap for IdentityMap {
    fn in_dim(&self) -> usize {
        self.0
    }

    fn out_dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// Convenience wrapper matching [`ProjectionMatrix::sample`].
pub fn sample_projection(d: usize, m: usize, seed: u64) -> Result<ProjectionMatrix> {
    ProjectionMatrix::sample(d, m, seed)
}

/// `Ax / |Ax|`.
pub fn project_normalize<M: LinearMap + ?Sized>(a: &M, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.in_dim(),
            found: x.len(),
        });
    }
    let mut ax = a.apply(x);
    let n = norm(&ax);
    if !(n >= 1e-12) {
        return Err(Error::ProjectedToZero { index: 0 });
    }
    ax.iter_mut().for_each(|v| *v /= n);
    Ok(ax)
}

/// Projects and renormalizes every example; labels and order are kept.
pub fn project_dataset<M: LinearMap + ?Sized>(a: &M, s: &Dataset) -> Result<Dataset> {
    s.check_dim(a.in_dim())?;
    let examples = s
        .iter()
        .enumerate()
        .map(|(index, e)| {
            project_normalize(a, &e.x)
                .map(|x| LabeledExample { x, y: e.y })
                .map_err(|err| match err {
                    Error::ProjectedToZero { .. } => Error::ProjectedToZero { index },
                    other => other,
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(examples)
}

/// `|Ax|^2` for the matrix keyed by `(seed, m, d)` without materializing it.
pub fn projected_norm_sq(seed: u64, m: usize, x: &[f64]) -> f64 {
    let d = x.len();
    let wpr = words_per_row(d);
    let mut total = 0.0;
    for i in 0..m {
        let mut acc = 0.0;
        for (w, chunk) in x.chunks(64).enumerate() {
            let bits = sign_word(seed, wpr, i, w);
            for (k, &v) in chunk.iter().enumerate() {
                let flip = ((!bits >> k) & 1) << 63;
                acc += f64::from_bits(v.to_bits() ^ flip);
            }
        }
        total += acc * acc;
    }
    total / m as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionReport {
    pub n_tested: usize,
    pub violations: usize,
    pub violation_fraction: f64,
    pub tau: f64,
}

/// Fraction of (fresh matrix, uniform unit vector) pairs with `||Ax|^2 - 1| > tau`.
pub fn distortion_test(d: usize, m: usize, tau: f64, n_points: usize, seed: u64) -> Result<DistortionReport> {
    if d == 0 || m == 0 {
        return Err(invalid("d/m", "dimensions must be positive"));
    }
    if n_points < 1000 {
        return Err(invalid("n_points", "must be at least 1000"));
    }
    if !(tau >= 0.0) {
        return Err(invalid("tau", "must be nonnegative"));
    }
    let mut x = vec![0.0; d];
    let mut violations = 0;
    for p in 0..n_points as u64 {
        let point_seed = derive_seed(seed, 2 * p);
        let matrix_seed = derive_seed(seed, 2 * p + 1);
        SplitMix64::new(point_seed).unit_vector(&mut x);
        let sq = projected_norm_sq(matrix_seed, m, &x);
        if (sq - norm_sq(&x)).abs() > tau {
            violations += 1;
        }
    }
    Ok(DistortionReport {
        n_tested: n_points,
        violations,
        violation_fraction: violations as f64 / n_points as f64,
        tau,
    })
}

/// Estimates the probability that a draw from `dist` keeps both its norm
/// (within `rho * gamma`) and its margin (at least `(1 - 4 rho) gamma` with
/// respect to the normalized image of `w_star`) under the fixed map `a`.
#[allow(clippy::too_many_arguments)]
pub fn good_set_test<M, S>(
    a: &M,
    w_star: &[f64],
    dist: &S,
    gamma: f64,
    rho: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64>
where
    M: LinearMap + ?Sized,
    S: ExampleSource + ?Sized,
{
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be positive"));
    }
    if !(rho > 0.0 && rho < 0.25) {
        return Err(invalid("rho", "must lie in (0, 1/4)"));
    }
    let w_a = project_normalize(a, w_star)?;
    let threshold = (1.0 - 4.0 * rho) * gamma;
    let sample = dist.sample(n_samples, seed)?;
    let mut good = 0usize;
    for (index, e) in sample.iter().enumerate() {
        let ax = a.apply(&e.x);
        let ax_sq = norm_sq(&ax);
        let x_sq = norm_sq(&e.x);
        if ax_sq < 1e-24 {
            return Err(Error::ProjectedToZero { index });
        }
        let norm_ok = (ax_sq - x_sq).abs() <= rho * gamma * x_sq;
        let margin = e.y.sign() * dot(&w_a, &ax) / libm::sqrt(ax_sq);
        if norm_ok && margin >= threshold {
            good += 1;
        }
    }
    Ok(good as f64 / n_samples as f64)
}
