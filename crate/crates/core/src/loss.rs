//! Scaled hinge surrogate for the margin-miss indicator.
//!
//! `loss(s) = max(0, (gamma_hi - s) / (gamma_hi - gamma_lo))` for the signed
//! margin `s = y <w, x>`. It is zero at or above `gamma_hi`, equals one at
//! `gamma_lo`, and is Lipschitz in `w` with constant `1 / (gamma_hi - gamma_lo)`
//! for points in the unit ball. With `gamma_hi = 0.96 gamma` and
//! `gamma_lo = gamma / 10` the slope is `100 / (86 gamma)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::linalg::dot;

/// Default distortion fraction.
pub const DEFAULT_RHO: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateLoss {
    gamma_hi: f64,
    gamma_lo: f64,
    width: f64,
}

impl SurrogateLoss {
    pub fn new(gamma_hi: f64, gamma_lo: f64) -> Result<Self> {
        if !(gamma_lo > 0.0 && gamma_lo < gamma_hi && gamma_hi <= 1.0) {
            return Err(invalid("gamma_hi/gamma_lo", "need 0 < gamma_lo < gamma_hi <= 1"));
        }
        Ok(Self {
            gamma_hi,
            gamma_lo,
            width: gamma_hi - gamma_lo,
        })
    }

    /// `gamma_hi = (1 - 4 rho) gamma`, `gamma_lo = gamma / 10`.
    pub fn for_margin(gamma: f64, rho: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(invalid("gamma", "must lie in (0, 1]"));
        }
        if !(rho > 0.0 && rho < 0.225) {
            return Err(invalid("rho", "must lie in (0, 0.225)"));
        }
        Self::new((1.0 - 4.0 * rho) * gamma, gamma / 10.0)
    }

    pub fn gamma_hi(&self) -> f64 {
        self.gamma_hi
    }

    pub fn gamma_lo(&self) -> f64 {
        self.gamma_lo
    }

    /// Lipschitz constant `L`.
    pub fn slope(&self) -> f64 {
        1.0 / self.width
    }

    /// Largest value on unit-ball inputs, `(gamma_hi + 1) L`.
    pub fn max_value(&self) -> f64 {
        (self.gamma_hi + 1.0) / self.width
    }

    /// Loss as a function of the signed margin.
    #[inline]
    pub fn at_margin(&self, s: f64) -> f64 {
        if s < self.gamma_hi {
            (self.gamma_hi - s) / self.width
        } else {
            0.0
        }
    }

    #[inline]
    pub fn value(&self, w: &[f64], x: &[f64], y: f64) -> f64 {
        self.at_margin(y * dot(w, x))
    }

    /// Subgradient in `w`: `-L y x` below `gamma_hi`, zero at or above it.
    pub fn subgradient(&self, w: &[f64], x: &[f64], y: f64) -> Vec<f64> {
        let mut g = vec![0.0; w.len()];
        self.add_subgradient(w, x, y, 1.0, &mut g);
        g
    }

    /// Derivative of the loss in the signed margin: `-L` below `gamma_hi`, else 0.
    #[inline]
    pub fn margin_derivative(&self, s: f64) -> f64 {
        if s < self.gamma_hi {
            -1.0 / self.width
        } else {
            0.0
        }
    }

    /// `out += scale * subgradient`.
    #[inline]
    pub fn add_subgradient(&self, w: &[f64], x: &[f64], y: f64, scale: f64, out: &mut [f64]) {
        let d = self.margin_derivative(y * dot(w, x));
        if d != 0.0 {
            crate::linalg::axpy(scale * y * d, x, out);
        }
    }

    /// Sum (not mean) of the loss over the dataset.
    pub fn total_loss(&self, w: &[f64], data: &Dataset) -> Result<f64> {
        data.check_dim(w.len())?;
        Ok(data.iter().map(|e| self.at_margin(e.signed_margin(w))).sum())
    }
}

/// Fraction of examples with `y <w, x> < threshold`.
pub fn margin_miss_fraction(w: &[f64], data: &Dataset, threshold: f64) -> Result<f64> {
    data.check_dim(w.len())?;
    let miss = data.iter().filter(|e| e.signed_margin(w) < threshold).count();
    Ok(miss as f64 / data.len() as f64)
}
