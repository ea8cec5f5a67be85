//! Exit criteria. Prints one PASS/FAIL line per criterion and exits nonzero if
//! any fails. Pass criterion numbers or words from their names to run a subset.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use dph_core::data::mc_error;
use dph_core::learners::{learn_approx_dp, learn_pure_dp};
use dph_core::loss::margin_miss_fraction;
use dph_core::netmech::{
    build_net, exp_mech_accuracy_check, exp_mech_exact_probs, exp_mech_sample, net_utility, UtilitySpec,
};
use dph_core::noisegd::{noise_gd_with, GdHooks};
use dph_core::packing::{estimate_p_gamma, make_packing_codewords, packing_sweep, sign_disagreement, success_frontier};
use dph_core::projection::distortion_test;
use dph_core::rng::{derive_seed, SplitMix64};
use dph_core::{
    Dataset, ExampleSource, Hypothesis, Label, LabeledExample, LearnerConfig, MarginDistribution, PrivacyBudget,
    SurrogateLoss,
};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let criteria: [Criterion; 13] = [
        (1, "loss exactness", Duration::from_secs(5), c1_loss_exactness),
        (
            2,
            "lipschitz and gradient",
            Duration::from_secs(10),
            c2_lipschitz_gradient,
        ),
        (
            3,
            "exponential mechanism exactness",
            Duration::from_secs(30),
            c3_exp_mech_exactness,
        ),
        (
            4,
            "exponential mechanism accuracy",
            Duration::from_secs(30),
            c4_exp_mech_accuracy,
        ),
        (5, "jl distortion", Duration::from_secs(120), c5_jl_distortion),
        (6, "net covering", Duration::from_secs(60), c6_net_covering),
        (7, "noise-gd sanity", Duration::from_secs(60), c7_noise_gd_sanity),
        (
            8,
            "approx learner end to end",
            Duration::from_secs(300),
            c8_approx_learner,
        ),
        (9, "pure learner end to end", Duration::from_secs(300), c9_pure_learner),
        (10, "scaling in epsilon", Duration::from_secs(1200), c10_scaling),
        (11, "margin mass", Duration::from_secs(60), c11_margin_mass),
        (12, "packing construction", Duration::from_secs(120), c12_packing),
        (13, "cli determinism", Duration::MAX, c13_determinism),
    ];
    if args.iter().any(|a| a == "--list") {
        for (id, name, _, _) in criteria {
            println!("criterion {id} ({name}): test");
        }
        return;
    }
    // A number selects that criterion; other words match criterion names.
    let filters: Vec<&str> = args
        .iter()
        .filter(|a| !a.starts_with('-'))
        .map(String::as_str)
        .collect();
    let selected = |id: u32, name: &str| {
        filters.is_empty()
            || filters.iter().any(|f| match f.parse::<u32>() {
                Ok(n) => n == id,
                Err(_) => name.contains(f),
            })
    };
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        if !selected(id, name) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = took < limit;
        let ok = out.ok && in_time;
        let timing = if in_time {
            format!("{:.1}s", took.as_secs_f64())
        } else {
            format!("{:.1}s over limit", took.as_secs_f64())
        };
        println!(
            "{} criterion {id} ({name}): {} [{timing}]",
            if ok { "PASS" } else { "FAIL" },
            out.detail
        );
        if !ok {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

fn ball_point(rng: &mut SplitMix64, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    rng.unit_vector(&mut v);
    let r = rng.uniform().powf(1.0 / d as f64);
    v.iter_mut().for_each(|x| *x *= r);
    v
}

fn dotp(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The piecewise loss with the constants written out.
fn printed_loss(gamma: f64, s: f64) -> f64 {
    if s < 96.0 * gamma / 100.0 {
        100.0 / (86.0 * gamma) * (96.0 * gamma / 100.0 - s)
    } else {
        0.0
    }
}

fn c1_loss_exactness() -> Outcome {
    let mut rng = SplitMix64::new(101);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let gamma = 0.01 + 0.99 * rng.uniform();
        let sl = SurrogateLoss::for_margin(gamma, 0.01).unwrap();
        let w = ball_point(&mut rng, 5);
        let x = ball_point(&mut rng, 5);
        let y = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        worst = worst.max((sl.value(&w, &x, y) - printed_loss(gamma, y * dotp(&w, &x))).abs());
    }
    let sl = SurrogateLoss::for_margin(0.2, 0.01).unwrap();
    let at_zero = sl.at_margin(0.0);
    let at_neg = sl.at_margin(-0.5);
    let ok = worst <= 1e-12 && (at_zero - 96.0 / 86.0).abs() <= 1e-12 && (at_neg - 4.0232558).abs() <= 1e-7;
    outcome(
        ok,
        format!("max |diff| {worst:.2e} over 1e5 inputs, loss(0) {at_zero:.9}, loss(-0.5) {at_neg:.9}"),
    )
}

fn c2_lipschitz_gradient() -> Outcome {
    let mut rng = SplitMix64::new(202);
    let mut lip_ok = true;
    let mut worst_ratio = 0.0f64;
    for _ in 0..10_000 {
        let gamma = 0.05 + 0.95 * rng.uniform();
        let sl = SurrogateLoss::for_margin(gamma, 0.01).unwrap();
        let bound = 100.0 / (86.0 * gamma);
        let (w1, w2, x) = (
            ball_point(&mut rng, 6),
            ball_point(&mut rng, 6),
            ball_point(&mut rng, 6),
        );
        let y = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        let gap = dist(&w1, &w2);
        if gap == 0.0 {
            continue;
        }
        let ratio = (sl.value(&w1, &x, y) - sl.value(&w2, &x, y)).abs() / gap;
        worst_ratio = worst_ratio.max(ratio / bound);
        lip_ok &= ratio <= bound + 1e-12;
    }
    let mut worst_rel = 0.0f64;
    let mut checked = 0;
    let h = 1e-6;
    while checked < 10_000 {
        let gamma = 0.05 + 0.95 * rng.uniform();
        let sl = SurrogateLoss::for_margin(gamma, 0.01).unwrap();
        let (w, x) = (ball_point(&mut rng, 6), ball_point(&mut rng, 6));
        let y = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        if (y * dotp(&w, &x) - sl.gamma_hi()).abs() < 1e-3 {
            continue;
        }
        checked += 1;
        let g = sl.subgradient(&w, &x, y);
        let fd: Vec<f64> = (0..w.len())
            .map(|i| {
                let (mut a, mut b) = (w.clone(), w.clone());
                a[i] += h;
                b[i] -= h;
                (sl.value(&a, &x, y) - sl.value(&b, &x, y)) / (2.0 * h)
            })
            .collect();
        let scale = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = dist(&fd, &g);
        worst_rel = worst_rel.max(if scale > 0.0 { err / scale } else { err });
    }
    outcome(
        lip_ok && worst_rel <= 1e-6,
        format!("max slope / bound {worst_ratio:.6} over 1e4 pairs, max finite-difference rel err {worst_rel:.2e}"),
    )
}

fn tiny_domain() -> Vec<LabeledExample> {
    vec![
        LabeledExample::new(vec![1.0, 0.0], Label::Positive),
        LabeledExample::new(vec![0.6, 0.8], Label::Negative),
        LabeledExample::new(vec![-0.8, 0.6], Label::Positive),
        LabeledExample::new(vec![0.0, -1.0], Label::Negative),
    ]
}

fn all_index_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| (0..k).map(move |i| [v.clone(), vec![i]].concat()))
            .collect();
    }
    out
}

fn c3_exp_mech_exactness() -> Outcome {
    let utilities = [0.0, -0.5];
    let spec = UtilitySpec::new(|u: &[f64], i: &usize| u[*i], 1.0).unwrap();
    let probs = exp_mech_exact_probs(0..2, &spec, &utilities[..], 2.0).unwrap();
    let oracle0 = 1.0 / (1.0 + (-0.5f64).exp());
    let probs_ok =
        (probs[0] - 0.62246).abs() < 5e-6 && (probs[1] - 0.37754).abs() < 5e-6 && (probs[0] - oracle0).abs() < 1e-12;

    let draws = 100_000u64;
    let hits = (0..draws)
        .filter(|&s| exp_mech_sample(0..2, &spec, &utilities[..], 2.0, s).unwrap().index == 0)
        .count();
    let f0 = hits as f64 / draws as f64;
    let tv = (f0 - probs[0]).abs();

    let domain = tiny_domain();
    let centers = build_net(2, 0.3).unwrap().centers();
    let eps: f64 = 2.0;
    let (mut pairs, mut violations) = (0usize, 0usize);
    for n in 1..=5 {
        let spec = UtilitySpec::new(
            |d: &Dataset, c: &Vec<f64>| net_utility(d, c, 0.03).unwrap(),
            1.0 / n as f64,
        )
        .unwrap();
        let tuples = all_index_tuples(n, domain.len());
        let probs: Vec<Vec<f64>> = tuples
            .iter()
            .map(|t| {
                let ds = Dataset::new(t.iter().map(|&i| domain[i].clone()).collect()).unwrap();
                exp_mech_exact_probs(centers.iter().cloned(), &spec, &ds, eps).unwrap()
            })
            .collect();
        for (a, ta) in tuples.iter().enumerate() {
            for (b, tb) in tuples.iter().enumerate() {
                if ta.iter().zip(tb).filter(|(x, y)| x != y).count() != 1 {
                    continue;
                }
                pairs += 1;
                violations += probs[a]
                    .iter()
                    .zip(&probs[b])
                    .filter(|(pa, pb)| **pa > eps.exp() * **pb * (1.0 + 1e-12))
                    .count();
            }
        }
    }
    outcome(
        probs_ok && tv <= 0.01 && violations == 0,
        format!(
            "probs [{:.5}, {:.5}], sampler TV {tv:.4} over 1e5 draws, {violations} ratio violations in {pairs} neighbor pairs",
            probs[0], probs[1]
        ),
    )
}

fn c4_exp_mech_accuracy() -> Outcome {
    let utilities: Vec<f64> = (0..100).map(|i| -(i as f64) / 100.0).collect();
    let spec = UtilitySpec::new(|u: &[f64], i: &usize| u[*i], 0.01).unwrap();
    let delta = 0.05;
    let trials = 10_000u64;
    let mut bad = 0;
    for seed in 0..trials {
        let (gap, bound) = exp_mech_accuracy_check(0..100, &spec, &utilities[..], 0.5, delta, seed).unwrap();
        if gap > bound {
            bad += 1;
        }
    }
    let rate = bad as f64 / trials as f64;
    let limit = delta + 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    outcome(
        rate <= limit,
        format!("violation rate {rate:.4} (limit {limit:.4}) over 1e4 trials, 100 candidates"),
    )
}

fn c5_jl_distortion() -> Outcome {
    let tau = 0.05;
    let m = (8.0 * (1.0f64 / 0.01).ln() / (tau * tau)).ceil() as usize;
    let points = 10_000;
    let rep = distortion_test(32, m, tau, points, 505).unwrap();
    let limit = 0.01 + 3.0 * (0.01 * 0.99 / points as f64).sqrt();
    outcome(
        m == 14_737 && rep.violation_fraction <= limit,
        format!(
            "m {m}, violation fraction {} (limit {limit:.4}) over 1e4 points",
            rep.violation_fraction
        ),
    )
}

fn c6_net_covering() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (m, r) in [(3usize, 0.05f64), (4, 0.1)] {
        let centers = build_net(m, r).unwrap().centers();
        let mut rng = SplitMix64::new(606 + m as u64);
        let mut failures = 0;
        for _ in 0..10_000 {
            let p = ball_point(&mut rng, m);
            let best = centers.iter().map(|c| dist(c, &p)).fold(f64::INFINITY, f64::min);
            if best > r {
                failures += 1;
            }
        }
        ok &= failures == 0;
        details.push(format!(
            "(m={m}, r={r}): {failures} failures over {} centers",
            centers.len()
        ));
    }
    outcome(ok, details.join(", "))
}

/// Full-batch projected subgradient descent on the total loss with step
/// `0.1 / (n sqrt(t))`, returning the smallest total loss seen.
#[allow(clippy::needless_range_loop)]
fn subgradient_oracle(data: &Dataset, loss: &SurrogateLoss, iters: usize) -> f64 {
    let m = data.dim();
    let mut w = vec![0.0; m];
    let mut best = f64::INFINITY;
    for t in 1..=iters {
        let mut g = vec![0.0; m];
        let mut total = 0.0;
        for e in data.iter() {
            let y = e.y.sign();
            let s = y * dotp(&w, &e.x);
            if s < loss.gamma_hi() {
                total += (loss.gamma_hi() - s) * loss.slope();
                for i in 0..m {
                    g[i] -= loss.slope() * y * e.x[i];
                }
            }
        }
        best = best.min(total);
        if total == 0.0 {
            break;
        }
        let step = 0.1 / (t as f64).sqrt() / data.len() as f64;
        for i in 0..m {
            w[i] -= step * g[i];
        }
        let len = dotp(&w, &w).sqrt();
        if len > 1.0 {
            w.iter_mut().for_each(|v| *v /= len);
        }
    }
    best
}

fn c7_noise_gd_sanity() -> Outcome {
    let (m, gamma, n) = (20, 0.3, 500);
    let data = MarginDistribution::random(m, gamma, 707)
        .unwrap()
        .sample(n, 708)
        .unwrap();
    let loss = SurrogateLoss::for_margin(gamma, 0.01).unwrap();
    let hooks = GdHooks {
        sigma2: Some(0.0),
        iterations: None,
        full_batch: true,
    };
    let run = noise_gd_with(&data, &loss, 1.0, 1e-5, 709, hooks).unwrap();
    let got = loss.total_loss(&run.w, &data).unwrap() / n as f64;
    let oracle = subgradient_oracle(&data, &loss, 20_000) / n as f64;
    let miss = margin_miss_fraction(&run.w, &data, gamma / 10.0).unwrap();
    outcome(
        (got - oracle).abs() <= 1e-6 && miss <= 0.1 / 4.0,
        format!("average loss {got:.3e} vs oracle {oracle:.3e}, miss at gamma/10 {miss}"),
    )
}

/// Runs `learn` on fresh data for each seed and counts errors at most
/// `target`, stopping once the required count is reached or out of reach.
fn end_to_end<F>(d: usize, gamma: f64, n: usize, target: f64, need: usize, seeds: u64, learn: F) -> Outcome
where
    F: Fn(&Dataset, u64) -> Hypothesis,
{
    let mut errs = Vec::new();
    let mut good = 0;
    for s in 0..seeds {
        let base = derive_seed(0xacce, s);
        let dist = MarginDistribution::random(d, gamma, derive_seed(base, 0)).unwrap();
        let train = dist.sample(n, derive_seed(base, 1)).unwrap();
        let h = learn(&train, derive_seed(base, 2));
        let (err, _) = mc_error(&dist, &h, 50_000, derive_seed(base, 3)).unwrap();
        errs.push(format!("{err:.3}"));
        if err <= target {
            good += 1;
        }
        let left = (seeds - s - 1) as usize;
        if good >= need || good + left < need {
            break;
        }
    }
    let ok = good >= need;
    let stop = if errs.len() < seeds as usize {
        format!(", decided after {} seeds", errs.len())
    } else {
        String::new()
    };
    outcome(
        ok,
        format!(
            "{good} seeds with error <= {target} (need {need}/{seeds}){stop}; errors [{}]",
            errs.join(", ")
        ),
    )
}

fn c8_approx_learner() -> Outcome {
    end_to_end(50, 0.3, 4000, 0.1, 8, 10, |s, seed| {
        let cfg = LearnerConfig::new(0.1, 0.1, 0.3, PrivacyBudget::new(2.0, 1e-5).unwrap(), seed)
            .unwrap()
            .with_m(60);
        learn_approx_dp(s, &cfg).unwrap().hypothesis
    })
}

fn c9_pure_learner() -> Outcome {
    end_to_end(30, 0.5, 2000, 0.15, 8, 10, |s, seed| {
        let cfg = LearnerConfig::new(0.15, 0.1, 0.5, PrivacyBudget::pure(2.0).unwrap(), seed)
            .unwrap()
            .with_m(3);
        learn_pure_dp(s, &cfg).unwrap().hypothesis
    })
}

fn c10_scaling() -> Outcome {
    let epsilons = [0.5, 1.0, 2.0, 4.0];
    let gamma = 0.3;
    let ens = make_packing_codewords(20, 2, gamma, 1010, 1000).unwrap();
    let rows = packing_sweep(
        &ens,
        |s, e, seed| {
            let cfg = LearnerConfig::new(0.1, 0.1, gamma, PrivacyBudget::pure(e)?, seed)?.with_m(3);
            Ok(learn_pure_dp(s, &cfg)?.hypothesis)
        },
        &epsilons,
        &[100, 200, 400, 800, 1600],
        10,
        5000,
        1011,
    )
    .unwrap();
    let frontier = success_frontier(&rows, 0.5);
    let finite: Option<Vec<usize>> = frontier.iter().map(|(_, n)| *n).collect();
    let frontier_ok = finite.as_ref().is_some_and(|f| f.windows(2).all(|w| w[1] <= w[0]));
    let shown: Vec<String> = frontier
        .iter()
        .map(|(e, n)| format!("{e}:{}", n.map_or("none".into(), |v| v.to_string())))
        .collect();

    let mut medians = Vec::new();
    for &eps in &epsilons {
        let mut errs: Vec<f64> = (0..20u64)
            .map(|s| {
                let base = derive_seed(0x5ca1e, s);
                let dist = MarginDistribution::random(50, gamma, derive_seed(base, 0)).unwrap();
                let train = dist.sample(300, derive_seed(base, 1)).unwrap();
                let cfg = LearnerConfig::new(
                    0.1,
                    0.1,
                    gamma,
                    PrivacyBudget::new(eps, 1e-5).unwrap(),
                    derive_seed(base, 2),
                )
                .unwrap()
                .with_m(20);
                let h = learn_approx_dp(&train, &cfg).unwrap().hypothesis;
                mc_error(&dist, &h, 5000, derive_seed(base, 3)).unwrap().0
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        medians.push((errs[9] + errs[10]) / 2.0);
    }
    let medians_ok = medians.windows(2).all(|w| w[1] <= w[0]);
    let shown_med: Vec<String> = medians.iter().map(|m| format!("{m:.3}")).collect();
    outcome(
        frontier_ok && medians_ok,
        format!(
            "pure frontier n*(eps) [{}] ({}), approx medians [{}] ({})",
            shown.join(", "),
            if frontier_ok {
                "non-increasing"
            } else if finite.is_none() {
                "no finite frontier"
            } else {
                "increasing"
            },
            shown_med.join(", "),
            if medians_ok { "non-increasing" } else { "increasing" },
        ),
    )
}

fn c11_margin_mass() -> Outcome {
    let (p, ci) = estimate_p_gamma(40, 0.005, 100_000, 1111).unwrap();
    outcome(p + ci < 0.2, format!("p_gamma {p:.4} +- {ci:.4} at d=40, gamma=0.005"))
}

fn c12_packing() -> Outcome {
    let ens = make_packing_codewords(1000, 50, 0.05, 1212, 100_000).unwrap();
    let mut min_ham = usize::MAX;
    let mut max_ip = f64::NEG_INFINITY;
    for i in 0..ens.len() {
        for j in i + 1..ens.len() {
            let ham = ens.signs(i).iter().zip(ens.signs(j)).filter(|(a, b)| a != b).count();
            min_ham = min_ham.min(ham);
            max_ip = max_ip.max(dotp(ens.codeword(i), ens.codeword(j)));
        }
    }
    let mut worst = 0.0f64;
    for k in 0..20 {
        let (i, j) = (k, (k + 1 + 7 * k) % 50);
        let j = if j == i { (j + 1) % 50 } else { j };
        let (wi, wj) = (ens.codeword(i), ens.codeword(j));
        let analytic = dotp(wi, wj).clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
        let got = sign_disagreement(wi, wj, 100_000, derive_seed(1213, k as u64)).unwrap();
        worst = worst.max((got.estimate - analytic).abs());
    }
    outcome(
        min_ham >= 100 && max_ip <= 0.8 + 1e-12 && worst <= 0.01,
        format!("min hamming {min_ham}, max inner product {max_ip:.3}, max |MC - arccos/pi| {worst:.4} over 20 pairs"),
    )
}

fn dph(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_dph"))
        .args(args)
        .current_dir(dir)
        .env_remove("DPH_SEED")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "dph {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn c13_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let invocations: Vec<(Vec<&str>, &str)> = vec![
        (
            vec![
                "gen",
                "--d",
                "12",
                "--n",
                "80",
                "--gamma",
                "0.3",
                "--seed",
                "5",
                "--out",
                "data{}.csv",
            ],
            "data{}.csv",
        ),
        (
            vec![
                "gen",
                "--d",
                "12",
                "--n",
                "80",
                "--gamma",
                "0.3",
                "--seed",
                "5",
                "--out",
                "data{}.csv",
            ],
            "data{}.csv.wstar.json",
        ),
        (
            vec![
                "learn-approx",
                "--data",
                "data1.csv",
                "--model",
                "a{}.json",
                "--gamma",
                "0.3",
                "--epsilon",
                "1",
                "--delta",
                "1e-5",
                "--m",
                "5",
                "--seed",
                "6",
            ],
            "a{}.json",
        ),
        (
            vec![
                "learn-pure",
                "--data",
                "data1.csv",
                "--model",
                "p{}.json",
                "--gamma",
                "0.3",
                "--epsilon",
                "1",
                "--m",
                "2",
                "--seed",
                "6",
                "--out",
                "p{}.csv",
            ],
            "p{}.json",
        ),
        (
            vec![
                "learn-pure",
                "--data",
                "data1.csv",
                "--model",
                "q{}.json",
                "--gamma",
                "0.3",
                "--epsilon",
                "1",
                "--m",
                "2",
                "--seed",
                "6",
                "--out",
                "q{}.csv",
            ],
            "q{}.csv",
        ),
        (
            vec![
                "eval",
                "--model",
                "a1.json",
                "--wstar",
                "data1.csv.wstar.json",
                "--n-test",
                "2000",
                "--seed",
                "7",
                "--out",
                "e{}.csv",
            ],
            "e{}.csv",
        ),
        (
            vec![
                "sweep",
                "--algo",
                "approx",
                "--d",
                "10",
                "--gamma",
                "0.4",
                "--epsilons",
                "1,2",
                "--ns",
                "20,30",
                "--trials",
                "2",
                "--m",
                "3",
                "--delta",
                "1e-4",
                "--n-test",
                "500",
                "--seed",
                "8",
                "--out",
                "s{}.csv",
            ],
            "s{}.csv",
        ),
        (
            vec![
                "packing",
                "--d",
                "20",
                "--gamma",
                "0.3",
                "--epsilons",
                "1,2",
                "--ns",
                "30",
                "--trials",
                "2",
                "--n-test",
                "500",
                "--seed",
                "9",
                "--out",
                "k{}.csv",
            ],
            "k{}.csv",
        ),
        (
            vec![
                "jl-test", "--d", "16", "--m", "64", "--tau", "0.3", "--points", "1000", "--seed", "10", "--out",
                "j{}.csv",
            ],
            "j{}.csv",
        ),
    ];
    let mut differing = Vec::new();
    for (args, output) in &invocations {
        let mut files = Vec::new();
        for run in ["1", "2"] {
            let args: Vec<String> = args.iter().map(|a| a.replace("{}", run)).collect();
            let argv: Vec<&str> = args.iter().map(String::as_str).collect();
            let stdout = dph(d, &argv);
            files.push((std::fs::read(d.join(output.replace("{}", run))).unwrap(), stdout));
        }
        if files[0] != files[1] {
            differing.push(format!("{} -> {output}", args[0]));
        }
    }
    let stdout_runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            dph(
                d,
                &["jl-test", "--d", "8", "--m", "32", "--tau", "0.3", "--points", "1000"],
            )
        })
        .collect();
    if stdout_runs[0] != stdout_runs[1] || stdout_runs[0].is_empty() {
        differing.push("jl-test stdout".into());
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} invocations byte-identical on rerun", invocations.len() + 1)
        } else {
            format!("differing outputs: {}", differing.join("; "))
        },
    )
}
