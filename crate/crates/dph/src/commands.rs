//! One function per subcommand.

use std::time::Instant;

use dph_core::data::{ci95, empirical_error, mc_error, ExampleSource, MarginDistribution};
use dph_core::loss::margin_miss_fraction;
use dph_core::packing::{make_packing_codewords, packing_sweep};
use dph_core::projection::distortion_test;
use dph_core::rng::{derive_seed, hash_bytes};
use dph_core::Hypothesis;

use crate::config::{check_count, check_open_unit, check_positive, require, Algo, LearnerParams, Params};
use crate::error::{CliError, Result};
use crate::harness::{projected_miss, run_learner, sweep, ResultRow, HEADER};
use crate::io::{
    read_dataset, read_json, write_dataset, write_json, write_table, wstar_path, ModelFile, ModelMetadata, Sink,
    WStarFile,
};

/// Codeword sampling gives up after this many rejected candidates.
const PACKING_MAX_ATTEMPTS: u64 = 1_000_000;

/// Synthetic margin data: `d`, `n`, `gamma`, `seed`, `out`; the generating
/// direction goes to `wstar` (default `<out>.wstar.json`).
pub fn gen(p: &Params) -> Result<()> {
    let d = require(&p.d, "d")?;
    let n = require(&p.n, "n")?;
    let gamma = require(&p.gamma, "gamma")?;
    let out = require(&p.out, "out")?;
    check_count("d", d, 1)?;
    check_count("n", n, 1)?;
    check_open_unit("gamma", gamma)?;
    let seed = p.seed();
    let dist = MarginDistribution::random(d, gamma, derive_seed(seed, 0))?;
    let data = dist.sample(n, derive_seed(seed, 1))?;
    write_dataset(&out, &data)?;
    let side = p.wstar.clone().unwrap_or_else(|| wstar_path(&out));
    write_json(
        &side,
        &WStarFile {
            d,
            gamma,
            seed,
            w_star: dist.w_star().to_vec(),
        },
    )
}

/// Trains on `data`, writes `model`, and appends a row (training error) to `out` if given.
pub fn learn(p: &Params, algo: Algo) -> Result<()> {
    let lp = LearnerParams::from_params(p, algo)?;
    let data_path = require(&p.data, "data")?;
    let model_path = require(&p.model, "model")?;
    let data = read_dataset(&data_path, !p.no_normalize)?;
    let seed = p.seed();
    let start = Instant::now();
    let out = run_learner(&lp, &data, seed)?;
    let millis = p.record_time.then(|| start.elapsed().as_millis() as u64);
    let model = ModelFile {
        algo: algo.as_str().into(),
        d: data.dim(),
        n: data.len(),
        alpha: lp.alpha,
        beta: lp.beta,
        gamma: lp.gamma,
        epsilon: lp.epsilon,
        delta: lp.delta,
        seed,
        w: out.hypothesis.w.clone(),
        w_projected: out.projected.w.clone(),
        metadata: ModelMetadata::new(&out.metadata, millis),
    };
    write_json(&model_path, &model)?;
    if p.out.is_some() {
        let err = empirical_error(&data, &out.hypothesis)?;
        let mut row = ResultRow::new(&lp, data.dim(), data.len(), 0, seed);
        row.run_id = format!("{:016x}", hash_bytes(seed, lp.canonical().as_bytes()));
        row.m = Some(out.metadata.m);
        row.err = Some(err);
        row.err_ci = Some(ci95(err, data.len()));
        row.miss_gamma10 = Some(projected_miss(&out, &data, lp.gamma)?);
        row.millis = millis.unwrap_or(0);
        write_table(&Sink::from_option(&p.out), &HEADER, &[row.record()], true)?;
    }
    Ok(())
}

/// Error of `model` on a labeled file (`data`) or, given the sidecar
/// (`wstar`), Monte-Carlo error on `n_test` fresh draws.
pub fn eval(p: &Params) -> Result<()> {
    let model_path = require(&p.model, "model")?;
    let model: ModelFile = read_json(&model_path)?;
    let algo = match model.algo.as_str() {
        "approx" => Algo::Approx,
        "pure" => Algo::Pure,
        other => return Err(CliError::config(format!("unknown algo {other:?} in model"))),
    };
    let h = Hypothesis::ambient(model.w.clone());
    let seed = p.seed();
    let (err, ci, miss, n) = match (&p.data, &p.wstar) {
        (Some(path), _) => {
            let data = read_dataset(path, !p.no_normalize)?;
            let err = empirical_error(&data, &h)?;
            let miss = margin_miss_fraction(&h.w, &data, model.gamma / 10.0)?;
            (err, ci95(err, data.len()), miss, data.len())
        }
        (None, Some(path)) => {
            let side: WStarFile = read_json(path)?;
            let dist = MarginDistribution::new(side.w_star, side.gamma)?;
            let n_test = p.n_test();
            check_count("n_test", n_test, 100)?;
            let (err, ci) = mc_error(&dist, &h, n_test, seed)?;
            let test = dist.sample(n_test, derive_seed(seed, 1))?;
            let miss = margin_miss_fraction(&h.w, &test, model.gamma / 10.0)?;
            (err, ci, miss, n_test)
        }
        (None, None) => return Err(CliError::config("eval needs `data` or `wstar`")),
    };
    let lp = LearnerParams {
        algo,
        alpha: model.alpha,
        beta: model.beta,
        gamma: model.gamma,
        epsilon: model.epsilon,
        delta: model.delta,
        split: 0.5,
        rho: dph_core::loss::DEFAULT_RHO,
        c_jl: 8.0,
        m: Some(model.metadata.m),
        net_cap: None,
        log_base: Default::default(),
    };
    let mut row = ResultRow::new(&lp, model.d, n, 0, model.seed);
    let mut key = std::fs::read(&model_path).map_err(|e| CliError::io(&model_path, e))?;
    key.extend_from_slice(format!("eval;n={n};seed={seed}").as_bytes());
    row.run_id = format!("{:016x}", hash_bytes(0, &key));
    row.err = Some(err);
    row.err_ci = Some(ci);
    row.miss_gamma10 = Some(miss);
    write_table(&Sink::from_option(&p.out), &HEADER, &[row.record()], true)
}

/// Cross product of `epsilons` x `ns` x `trials` on synthetic data; resumable.
pub fn sweep_cmd(p: &Params) -> Result<()> {
    let out = require(&p.out, "out")?;
    sweep(p, &out).map(|_| ())
}

pub const PACKING_HEADER: [&str; 6] = ["epsilon", "n", "trial", "err_i", "err_j", "success"];

/// Pure learner trained on codeword 0's distribution, scored on codewords 0 and 1.
pub fn packing(p: &Params) -> Result<()> {
    let d = require(&p.d, "d")?;
    let gamma = require(&p.gamma, "gamma")?;
    let epsilons = require(&p.epsilons, "epsilons")?;
    let ns = require(&p.ns, "ns")?;
    let k = p.k.unwrap_or(2);
    check_count("d", d, 20)?;
    check_count("k", k, 2)?;
    check_open_unit("gamma", gamma)?;
    check_count("n_test", p.n_test(), 100)?;
    for &e in &epsilons {
        check_positive("epsilon", e)?;
    }
    for &n in &ns {
        check_count("n", n, 1)?;
    }
    let mut q = p.clone();
    q.epsilon = Some(epsilons.first().copied().unwrap_or(1.0));
    q.delta = None;
    q.m = Some(p.m.unwrap_or(3));
    let base = LearnerParams::from_params(&q, Algo::Pure)?;
    let seed = p.seed();
    let ens = make_packing_codewords(d, k, gamma, derive_seed(seed, 0), PACKING_MAX_ATTEMPTS)?;
    let rows = packing_sweep(
        &ens,
        |s, eps, learner_seed| {
            let lp = base
                .with_epsilon(eps)
                .map_err(|_| dph_core::Error::InvalidBudget("epsilon"))?;
            let cfg = lp.learner_config(learner_seed).map_err(|e| match e {
                CliError::Domain(d) => d,
                _ => dph_core::Error::InvalidBudget("epsilon"),
            })?;
            dph_core::learn_pure_dp(s, &cfg).map(|o| o.hypothesis)
        },
        &epsilons,
        &ns,
        p.trials(),
        p.n_test(),
        derive_seed(seed, 1),
    )?;
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.epsilon.to_string(),
                r.n.to_string(),
                r.trial.to_string(),
                r.err_i.to_string(),
                r.err_j.to_string(),
                r.success.to_string(),
            ]
        })
        .collect();
    write_table(&Sink::from_option(&p.out), &PACKING_HEADER, &records, false)
}

pub const JL_HEADER: [&str; 5] = ["d", "m", "tau", "points", "violation_fraction"];

/// Norm-distortion violation rate of fresh sign matrices on uniform unit vectors.
pub fn jl_test(p: &Params) -> Result<()> {
    let d = require(&p.d, "d")?;
    let m = require(&p.m, "m")?;
    let tau = require(&p.tau, "tau")?;
    let points = p.points.unwrap_or(10_000);
    check_count("d", d, 1)?;
    check_count("m", m, 1)?;
    check_count("points", points, 1_000)?;
    check_positive("tau", tau)?;
    let report = distortion_test(d, m, tau, points, p.seed())?;
    let record = vec![
        d.to_string(),
        m.to_string(),
        tau.to_string(),
        points.to_string(),
        report.violation_fraction.to_string(),
    ];
    write_table(&Sink::from_option(&p.out), &JL_HEADER, &[record], false)
}
