//! Grid nets over the unit ball and the exponential mechanism.
//!
//! Sampling uses the Gumbel-max form of the mechanism: candidate `i` gets the
//! score `epsilon * u_i / (2 * sensitivity) + G_i` with `G_i` a standard
//! Gumbel variable derived from `(seed, i)`, and the highest score wins. This
//! draws from the softmax exactly while visiting each candidate once, so nets
//! never need to be materialized.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::loss::margin_miss_fraction;
use crate::rng::{counter_u64, unit_open};

/// Default cap on the number of net centers.
pub const DEFAULT_NET_CAP: u64 = 10_000_000;

/// Largest candidate set accepted by [`exp_mech_exact_probs`].
pub const EXACT_PROBS_MAX: usize = 100_000;

/// A utility function together with its sensitivity.
#[derive(Debug, Clone, Copy)]
pub struct UtilitySpec<F> {
    pub utility: F,
    pub sensitivity: f64,
}

impl<F> UtilitySpec<F> {
    pub fn new(utility: F, sensitivity: f64) -> Result<Self> {
        if !(sensitivity > 0.0 && sensitivity.is_finite()) {
            return Err(invalid("sensitivity", "must be positive and finite"));
        }
        Ok(Self { utility, sensitivity })
    }
}

/// Outcome of one exponential-mechanism draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<C> {
    pub index: usize,
    pub candidate: C,
    pub utility: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0) {
        return Err(invalid("epsilon", "must be nonnegative"));
    }
    Ok(())
}

/// Standard Gumbel noise for candidate `index`.
#[inline]
fn gumbel(seed: u64, index: u64) -> f64 {
    -libm::log(-libm::log(unit_open(counter_u64(seed, index))))
}

/// Streaming argmax over `(utility, candidate)` pairs. With infinite epsilon
/// the highest utility wins outright; exact ties go to the first index.
struct GumbelMax<C> {
    scale: f64,
    argmax: bool,
    seed: u64,
    best: Option<(f64, Selection<C>)>,
}

impl<C> GumbelMax<C> {
    fn new(epsilon: f64, sensitivity: f64, seed: u64) -> Self {
        Self {
            scale: epsilon / (2.0 * sensitivity),
            argmax: epsilon.is_infinite(),
            seed,
            best: None,
        }
    }

    #[inline]
    fn offer(&mut self, index: usize, candidate: C, utility: f64) {
        let score = if self.argmax {
            utility
        } else {
            self.scale * utility + gumbel(self.seed, index as u64)
        };
        let better = match &self.best {
            None => true,
            Some((s, _)) => score > *s,
        };
        if better {
            self.best = Some((
                score,
                Selection {
                    index,
                    candidate,
                    utility,
                },
            ));
        }
    }

    fn finish(self) -> Result<Selection<C>> {
        self.best.map(|(_, s)| s).ok_or(Error::EmptyCandidates)
    }
}

/// Draws one candidate with probability proportional to
/// `exp(epsilon * u(data, c) / (2 * sensitivity))`.
pub fn exp_mech_sample<D, C, I, F>(
    candidates: I,
    spec: &UtilitySpec<F>,
    data: &D,
    epsilon: f64,
    seed: u64,
) -> Result<Selection<C>>
where
    D: ?Sized,
    I: IntoIterator<Item = C>,
    F: Fn(&D, &C) -> f64,
{
    check_epsilon(epsilon)?;
    let mut gm = GumbelMax::new(epsilon, spec.sensitivity, seed);
    for (index, c) in candidates.into_iter().enumerate() {
        let u = (spec.utility)(data, &c);
        gm.offer(index, c, u);
    }
    gm.finish()
}

/// Exponential mechanism over a precomputed utility vector; returns the index.
pub fn sample_from_utilities(utilities: &[f64], sensitivity: f64, epsilon: f64, seed: u64) -> Result<usize> {
    check_epsilon(epsilon)?;
    let mut gm = GumbelMax::new(epsilon, sensitivity, seed);
    for (i, &u) in utilities.iter().enumerate() {
        gm.offer(i, (), u);
    }
    gm.finish().map(|s| s.index)
}

/// Exact selection probabilities (log-sum-exp normalized).
pub fn exp_mech_exact_probs<D, C, I, F>(
    candidates: I,
    spec: &UtilitySpec<F>,
    data: &D,
    epsilon: f64,
) -> Result<Vec<f64>>
where
    D: ?Sized,
    I: IntoIterator<Item = C>,
    F: Fn(&D, &C) -> f64,
{
    check_epsilon(epsilon)?;
    let mut utilities = Vec::new();
    for c in candidates {
        if utilities.len() == EXACT_PROBS_MAX {
            return Err(invalid("candidates", "at most 1e5 candidates for exact probabilities"));
        }
        utilities.push((spec.utility)(data, &c));
    }
    if utilities.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let top = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if epsilon.is_infinite() {
        let winners = utilities.iter().filter(|&&u| u == top).count() as f64;
        return Ok(utilities
            .iter()
            .map(|&u| if u == top { 1.0 / winners } else { 0.0 })
            .collect());
    }
    let scale = epsilon / (2.0 * spec.sensitivity);
    let mut weights: Vec<f64> = utilities.iter().map(|&u| libm::exp(scale * (u - top))).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(weights)
}

/// One draw's utility gap to the best candidate, next to the bound
/// `(2 sensitivity / epsilon) ln(|O| / failure_prob)` that the gap exceeds with
/// probability at most `failure_prob`.
pub fn exp_mech_accuracy_check<D, C, I, F>(
    candidates: I,
    spec: &UtilitySpec<F>,
    data: &D,
    epsilon: f64,
    failure_prob: f64,
    seed: u64,
) -> Result<(f64, f64)>
where
    D: ?Sized,
    I: IntoIterator<Item = C>,
    F: Fn(&D, &C) -> f64,
{
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    if !(failure_prob > 0.0 && failure_prob < 1.0) {
        return Err(invalid("failure_prob", "must lie in (0, 1)"));
    }
    let utilities: Vec<f64> = candidates.into_iter().map(|c| (spec.utility)(data, &c)).collect();
    let chosen = sample_from_utilities(&utilities, spec.sensitivity, epsilon, seed)?;
    let top = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bound = 2.0 * spec.sensitivity / epsilon * libm::log(utilities.len() as f64 / failure_prob);
    Ok((top - utilities[chosen], bound))
}

/// `-(1/n) * #{ y <w, x> < threshold }`.
pub fn net_utility(data: &Dataset, w: &[f64], threshold: f64) -> Result<f64> {
    margin_miss_fraction(w, data, threshold).map(|f| -f)
}

/// Axis-aligned grid net of the unit ball: points `s * k` for integer vectors
/// `k`, spacing `s = 2r / sqrt(m)`, kept when their norm is at most `1 + r`.
/// Every point of the unit ball is within `r` of a retained center.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    m: usize,
    radius: f64,
    spacing: f64,
    outer_sq: f64,
    count: u64,
}

/// Upper bound on the number of grid points within `outer` of the origin:
/// their cells all fit inside the ball of radius `outer + s sqrt(m) / 2`.
fn predicted_count(m: usize, spacing: f64, outer: f64) -> f64 {
    let mf = m as f64;
    let reach = outer + spacing * libm::sqrt(mf) / 2.0;
    let log_vol = 0.5 * mf * libm::log(core::f64::consts::PI) - libm::lgamma(0.5 * mf + 1.0) + mf * libm::log(reach);
    libm::exp(log_vol - mf * libm::log(spacing))
}

pub fn build_net(m: usize, r: f64) -> Result<Net> {
    build_net_capped(m, r, DEFAULT_NET_CAP)
}

pub fn build_net_capped(m: usize, r: f64, cap: u64) -> Result<Net> {
    if m == 0 {
        return Err(invalid("m", "must be positive"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("r", "must lie in (0, 1)"));
    }
    let spacing = 2.0 * r / libm::sqrt(m as f64);
    let outer = 1.0 + r;
    let predicted = predicted_count(m, spacing, outer);
    if !(predicted <= cap as f64) {
        return Err(Error::NetTooLarge { predicted, cap });
    }
    // Grid points exactly on the outer sphere are kept despite rounding.
    let mut net = Net {
        m,
        radius: r,
        spacing,
        outer_sq: outer * outer * (1.0 + 1e-12),
        count: 0,
    };
    let mut count = 0u64;
    net.for_each_center(|_| count += 1);
    net.count = count;
    Ok(net)
}

impl Net {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Largest `b >= 0` with `(b s)^2 <= budget`, or `None` if even `0` fails.
    fn bound(&self, budget: f64) -> Option<i64> {
        if budget < 0.0 {
            return None;
        }
        let s = self.spacing;
        let mut b = libm::floor(libm::sqrt(budget) / s) as i64;
        let sq = |k: i64| (k as f64 * s) * (k as f64 * s);
        while sq(b + 1) <= budget {
            b += 1;
        }
        while b > 0 && sq(b) > budget {
            b -= 1;
        }
        Some(b)
    }

    /// Visits every center in lexicographic order of the integer grid index.
    pub fn for_each_center<G: FnMut(&[f64])>(&self, mut visit: G) {
        let m = self.m;
        let s = self.spacing;
        let mut k = vec![0i64; m];
        let mut hi = vec![0i64; m];
        // partial[i]: squared norm of the first i coordinates.
        let mut partial = vec![0.0f64; m + 1];
        let mut point = vec![0.0f64; m];
        let mut level = 0usize;
        let b = self.bound(self.outer_sq).unwrap_or(0);
        k[0] = -b;
        hi[0] = b;
        loop {
            if k[level] > hi[level] {
                if level == 0 {
                    return;
                }
                level -= 1;
                k[level] += 1;
                continue;
            }
            let c = k[level] as f64 * s;
            point[level] = c;
            partial[level + 1] = partial[level] + c * c;
            if level + 1 == m {
                visit(&point);
                k[level] += 1;
            } else {
                level += 1;
                let b = self.bound(self.outer_sq - partial[level]).unwrap_or(0);
                k[level] = -b;
                hi[level] = b;
            }
        }
    }

    /// Materializes the centers; intended for small nets.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.count as usize);
        self.for_each_center(|c| out.push(c.to_vec()));
        out
    }
}

/// Exponential mechanism over the centers of `net`, streaming.
pub fn exp_mech_over_net<D, F>(
    net: &Net,
    spec: &UtilitySpec<F>,
    data: &D,
    epsilon: f64,
    seed: u64,
) -> Result<Selection<Vec<f64>>>
where
    D: ?Sized,
    F: Fn(&D, &[f64]) -> f64,
{
    check_epsilon(epsilon)?;
    let mut gm: GumbelMax<()> = GumbelMax::new(epsilon, spec.sensitivity, seed);
    let mut best_point: Option<Vec<f64>> = None;
    let mut index = 0usize;
    net.for_each_center(|c| {
        let u = (spec.utility)(data, c);
        let before = gm.best.as_ref().map(|(_, s)| s.index);
        gm.offer(index, (), u);
        if gm.best.as_ref().map(|(_, s)| s.index) != before {
            match &mut best_point {
                Some(p) => p.copy_from_slice(c),
                None => best_point = Some(c.to_vec()),
            }
        }
        index += 1;
    });
    let sel = gm.finish()?;
    Ok(Selection {
        index: sel.index,
        candidate: best_point.unwrap_or_default(),
        utility: sel.utility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Label, LabeledExample};

    fn by_value() -> UtilitySpec<fn(&(), &f64) -> f64> {
        UtilitySpec::new((|_: &(), u: &f64| *u) as fn(&(), &f64) -> f64, 1.0).unwrap()
    }

    #[test]
    fn exact_probabilities_two_candidates() {
        let p = exp_mech_exact_probs([0.0, -0.5], &by_value(), &(), 2.0).unwrap();
        let expected = 1.0 / (1.0 + libm::exp(-0.5));
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] - 0.62246).abs() < 1e-5 && (p[1] - 0.37754).abs() < 1e-5);
        assert_eq!(exp_mech_exact_probs([3.0], &by_value(), &(), 1.0).unwrap(), vec![1.0]);
        let uniform = exp_mech_exact_probs([0.0, -1.0, -5.0], &by_value(), &(), 0.0).unwrap();
        assert!(uniform.iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn empty_candidates() {
        let none: [f64; 0] = [];
        assert_eq!(
            exp_mech_sample(none, &by_value(), &(), 1.0, 0).unwrap_err(),
            Error::EmptyCandidates
        );
        assert_eq!(
            exp_mech_exact_probs(none, &by_value(), &(), 1.0).unwrap_err(),
            Error::EmptyCandidates
        );
        assert_eq!(
            exp_mech_accuracy_check(none, &by_value(), &(), 1.0, 0.1, 0).unwrap_err(),
            Error::EmptyCandidates
        );
    }

    #[test]
    fn infinite_epsilon_is_argmax() {
        let sel = exp_mech_sample([-1.0, 0.0, 0.0, -3.0], &by_value(), &(), f64::INFINITY, 9).unwrap();
        assert_eq!(sel.index, 1);
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = exp_mech_sample([0.0, -0.2, -0.1], &by_value(), &(), 1.0, 77).unwrap();
        let b = exp_mech_sample([0.0, -0.2, -0.1], &by_value(), &(), 1.0, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn accuracy_bound_value() {
        let mut us = vec![-1.0; 100];
        us[0] = 0.0;
        let (gap, bound) = exp_mech_accuracy_check(us, &by_value(), &(), 5.0, 0.1, 3).unwrap();
        assert!((bound - 0.4 * libm::log(1000.0)).abs() < 1e-12);
        assert!((bound - 2.763).abs() < 1e-3);
        assert!(gap == 0.0 || gap == 1.0);
        let (gap, _) = exp_mech_accuracy_check([2.0], &by_value(), &(), 5.0, 0.1, 3).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn net_one_dimension() {
        let net = build_net(1, 0.5).unwrap();
        assert_eq!(net.spacing(), 1.0);
        // Brute force over integer multiples of the spacing.
        let oracle = (-10i64..=10).filter(|k| (*k as f64).abs() <= 1.5).count() as u64;
        assert_eq!(net.count(), oracle);
        assert_eq!(net.centers(), vec![vec![-1.0], vec![0.0], vec![1.0]]);
    }

    #[test]
    fn net_count_matches_brute_force() {
        for (m, r) in [(2usize, 0.1f64), (3, 0.2), (4, 0.3)] {
            let net = build_net(m, r).unwrap();
            let s = net.spacing();
            let kmax = (1.0 + r) / s + 1.0;
            let kmax = kmax as i64;
            let mut count = 0u64;
            let side = (2 * kmax + 1) as usize;
            for flat in 0..side.pow(m as u32) {
                let mut rest = flat;
                let mut sq = 0.0;
                for _ in 0..m {
                    let k = (rest % side) as i64 - kmax;
                    rest /= side;
                    sq += (k as f64 * s).powi(2);
                }
                if libm::sqrt(sq) <= 1.0 + r + 1e-12 {
                    count += 1;
                }
            }
            assert_eq!(net.count(), count, "m={m} r={r}");
            assert!(net.centers().iter().all(|c| crate::linalg::norm(c) <= 1.0 + r + 1e-12));
        }
    }

    #[test]
    fn net_too_large() {
        assert!(matches!(build_net(30, 0.05), Err(Error::NetTooLarge { .. })));
        assert!(matches!(build_net_capped(3, 0.05, 100), Err(Error::NetTooLarge { .. })));
    }

    #[test]
    fn net_utility_examples() {
        let ds = Dataset::new(vec![
            LabeledExample::new(vec![1.0, 0.0], Label::Positive),
            LabeledExample::new(vec![-1.0, 0.0], Label::Negative),
            LabeledExample::new(vec![0.6, 0.8], Label::Positive),
            LabeledExample::new(vec![0.05, 0.9987], Label::Positive),
        ])
        .unwrap();
        assert_eq!(net_utility(&ds, &[1.0, 0.0], 0.1).unwrap(), -0.25);
        assert_eq!(net_utility(&ds, &[1.0, 0.0], 0.01).unwrap(), 0.0);
        assert_eq!(net_utility(&ds, &[-1.0, 0.0], 0.01).unwrap(), -1.0);
    }

    #[test]
    fn net_stream_matches_materialized_sampling() {
        let net = build_net(2, 0.2).unwrap();
        let spec = UtilitySpec::new(|_: &(), c: &[f64]| -(c[0] - 0.3).abs(), 1.0).unwrap();
        let streamed = exp_mech_over_net(&net, &spec, &(), 3.0, 11).unwrap();
        let listed = exp_mech_sample(
            net.centers(),
            &UtilitySpec::new(|_: &(), c: &Vec<f64>| -(c[0] - 0.3).abs(), 1.0).unwrap(),
            &(),
            3.0,
            11,
        )
        .unwrap();
        assert_eq!(streamed.index, listed.index);
        assert_eq!(streamed.candidate, listed.candidate);
    }
}
