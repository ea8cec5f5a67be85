//! Labeled examples, datasets, hypotheses and the basic error/margin
//! measurements used throughout the crate.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm};
use crate::rng::SplitMix64;

/// Inputs with norm below this are rejected by normalization.
pub const ZERO_NORM: f64 = 1e-12;
const UNIT_SLACK: f64 = 1e-12;

/// Binary label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    /// Label of `sign(v)`; zero maps to `Positive`.
    pub fn from_sign(v: f64) -> Self {
        if v < 0.0 {
            Label::Negative
        } else {
            Label::Positive
        }
    }

    pub fn from_i64(v: i64) -> Option<Self> {
        match v {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub x: Vec<f64>,
    pub y: Label,
}

impl LabeledExample {
    pub fn new(x: Vec<f64>, y: Label) -> Self {
        Self { x, y }
    }

    /// `y * <w, x>`
    #[inline]
    pub fn signed_margin(&self, w: &[f64]) -> f64 {
        self.y.sign() * dot(w, &self.x)
    }
}

/// An immutable, non-empty collection of examples sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<LabeledExample>,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset without touching the vectors.
    pub fn new(examples: Vec<LabeledExample>) -> Result<Self> {
        let dim = examples.first().ok_or(Error::EmptyDataset)?.x.len();
        if dim == 0 {
            return Err(invalid("d", "examples must have at least one coordinate"));
        }
        if let Some(bad) = examples.iter().find(|e| e.x.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.x.len(),
            });
        }
        Ok(Self { examples, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn iter(&self) -> core::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    pub fn into_examples(self) -> Vec<LabeledExample> {
        self.examples
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a LabeledExample;
    type IntoIter = core::slice::Iter<'a, LabeledExample>;

    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}

/// Which space a hypothesis lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Ambient,
    Projected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub w: Vec<f64>,
    pub space: Space,
}

impl Hypothesis {
    pub fn ambient(w: Vec<f64>) -> Self {
        Self {
            w,
            space: Space::Ambient,
        }
    }

    pub fn projected(w: Vec<f64>) -> Self {
        Self {
            w,
            space: Space::Projected,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    #[inline]
    pub fn classify(&self, x: &[f64]) -> Label {
        Label::from_sign(dot(&self.w, x))
    }
}

/// Scales every vector to unit Euclidean norm. Labels and order are kept.
pub fn normalize_dataset<I>(raw: I) -> Result<Dataset>
where
    I: IntoIterator<Item = (Vec<f64>, Label)>,
{
    let mut examples = Vec::new();
    for (index, (mut x, y)) in raw.into_iter().enumerate() {
        normalize_in_place(&mut x).map_err(|_| Error::ZeroVector { index })?;
        examples.push(LabeledExample { x, y });
    }
    Dataset::new(examples)
}

fn normalize_in_place(x: &mut [f64]) -> Result<()> {
    let n = norm(x);
    if !(n >= ZERO_NORM) {
        return Err(Error::ZeroVector { index: 0 });
    }
    // Vectors already unit to within UNIT_SLACK are left untouched, which makes
    // normalization idempotent bit-for-bit.
    if (n - 1.0).abs() > UNIT_SLACK {
        x.iter_mut().for_each(|v| *v /= n);
    }
    Ok(())
}

/// Appends a constant coordinate to every point and renormalizes, so a
/// halfspace with bias becomes homogeneous in one more dimension.
///
/// Returns the transformed dataset and the factor `min(1, min_norm) / (2 + 2 * theta_bound)`
/// by which the caller's margin must be multiplied.
pub fn augment_affine(dataset: &Dataset, theta_bound: f64, min_norm: f64) -> Result<(Dataset, f64)> {
    if !(theta_bound >= 0.0) || !theta_bound.is_finite() {
        return Err(invalid("theta_bound", "must be a finite nonnegative number"));
    }
    if !(min_norm > 0.0) {
        return Err(invalid("min_norm", "must be positive"));
    }
    let raw = dataset.iter().map(|e| {
        let mut x = Vec::with_capacity(e.x.len() + 1);
        x.extend_from_slice(&e.x);
        x.push(1.0);
        (x, e.y)
    });
    let augmented = normalize_dataset(raw)?;
    let factor = min_norm.min(1.0) / (2.0 + 2.0 * theta_bound);
    Ok((augmented, factor))
}

/// Smallest normalized signed margin `y <w, x> / (|w| |x|)` over the dataset.
pub fn empirical_margin(dataset: &Dataset, h: &Hypothesis) -> Result<f64> {
    dataset.check_dim(h.dim())?;
    let wn = norm(&h.w);
    if !(wn > 0.0) {
        return Err(invalid("h", "hypothesis must be nonzero"));
    }
    Ok(dataset
        .iter()
        .map(|e| e.signed_margin(&h.w) / (wn * norm(&e.x)))
        .fold(f64::INFINITY, f64::min))
}

/// Fraction of examples with `y <w, x> <= 0` (points on the hyperplane count as errors).
pub fn empirical_error(dataset: &Dataset, h: &Hypothesis) -> Result<f64> {
    dataset.check_dim(h.dim())?;
    let wrong = dataset.iter().filter(|e| e.signed_margin(&h.w) <= 0.0).count();
    Ok(wrong as f64 / dataset.len() as f64)
}

/// A source of labeled examples (the stand-in for an unknown distribution).
pub trait ExampleSource {
    fn dim(&self) -> usize;

    /// Draws one example. Sources that can fail (rejection samplers) report
    /// it through `Err`.
    fn draw(&self, rng: &mut SplitMix64) -> Result<LabeledExample>;

    /// Draws `n` examples from the stream keyed by `seed`.
    fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut rng = SplitMix64::new(seed);
        let examples = (0..n).map(|_| self.draw(&mut rng)).collect::<Result<Vec<_>>>()?;
        Dataset::new(examples)
    }
}

/// Uniform distribution on the unit sphere conditioned on `|<w*, x>| >= gamma`,
/// labeled by `sign(<w*, x>)`. Sampled by rejection.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginDistribution {
    w_star: Vec<f64>,
    gamma: f64,
}

/// Attempts after which a rejection sampler checks its acceptance rate.
const ACCEPTANCE_PROBE: u64 = 10_000;
/// Minimum acceptance rate tolerated by rejection samplers.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

impl MarginDistribution {
    /// `w_star` is normalized; `gamma` must lie in `[0, 1)`.
    pub fn new(mut w_star: Vec<f64>, gamma: f64) -> Result<Self> {
        if w_star.is_empty() {
            return Err(invalid("w_star", "must be nonempty"));
        }
        normalize_in_place(&mut w_star)?;
        if !(0.0..1.0).contains(&gamma) {
            return Err(invalid("gamma", "must lie in [0, 1)"));
        }
        Ok(Self { w_star, gamma })
    }

    /// A distribution around a direction drawn uniformly from the sphere.
    pub fn random(d: usize, gamma: f64, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be positive"));
        }
        let mut w = vec![0.0; d];
        SplitMix64::new(seed).unit_vector(&mut w);
        Self::new(w, gamma)
    }

    pub fn w_star(&self) -> &[f64] {
        &self.w_star
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl ExampleSource for MarginDistribution {
    fn dim(&self) -> usize {
        self.w_star.len()
    }

    fn draw(&self, rng: &mut SplitMix64) -> Result<LabeledExample> {
        let mut x = vec![0.0; self.dim()];
        let mut attempts = 0u64;
        loop {
            attempts += 1;
            rng.unit_vector(&mut x);
            let p = dot(&self.w_star, &x);
            if p.abs() >= self.gamma && p != 0.0 {
                return Ok(LabeledExample {
                    x,
                    y: Label::from_sign(p),
                });
            }
            if attempts >= ACCEPTANCE_PROBE {
                // Every attempt so far was rejected: the rate is below 1 / ACCEPTANCE_PROBE.
                return Err(Error::LowAcceptance { rate: 0.0 });
            }
        }
    }

    fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut rng = SplitMix64::new(seed);
        let d = self.dim();
        let mut examples = Vec::with_capacity(n);
        let mut attempts = 0u64;
        let mut x = vec![0.0; d];
        while examples.len() < n {
            attempts += 1;
            rng.unit_vector(&mut x);
            let p = dot(&self.w_star, &x);
            if p.abs() >= self.gamma && p != 0.0 {
                examples.push(LabeledExample {
                    x: x.clone(),
                    y: Label::from_sign(p),
                });
            }
            if attempts.is_multiple_of(ACCEPTANCE_PROBE) {
                let rate = examples.len() as f64 / attempts as f64;
                if rate < MIN_ACCEPTANCE {
                    return Err(Error::LowAcceptance { rate });
                }
            }
        }
        Dataset::new(examples)
    }
}

/// Monte-Carlo misclassification rate of `h` on fresh draws from `dist`, with
/// the half-width of a 95% normal confidence interval.
pub fn mc_error<S: ExampleSource + ?Sized>(
    dist: &S,
    h: &Hypothesis,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_samples < 100 {
        return Err(invalid("n_samples", "must be at least 100"));
    }
    if h.dim() != dist.dim() {
        return Err(Error::DimensionMismatch {
            expected: dist.dim(),
            found: h.dim(),
        });
    }
    let sample = dist.sample(n_samples, seed)?;
    let p = empirical_error(&sample, h)?;
    Ok((p, ci95(p, n_samples)))
}

/// Half-width of the 95% normal interval for a proportion.
pub fn ci95(p: f64, n: usize) -> f64 {
    1.96 * libm::sqrt(p * (1.0 - p) / n as f64)
}
