//! Result rows and resumable sweeps.
//!
//! Every row is a pure function of its recorded seed and parameters. The seed
//! of a sweep cell is `hash_bytes(master_seed, canonical)`, where `canonical`
//! is the text returned by [`cell_canonical`]; the run id is that seed in
//! 16-digit lowercase hex. From the cell seed `s` the data distribution uses
//! `derive_seed(s, 0)`, the training sample `derive_seed(s, 1)`, the learner
//! `derive_seed(s, 2)` and the test sample `derive_seed(s, 3)`.

use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

use dph_core::data::{mc_error, ExampleSource, MarginDistribution};
use dph_core::learners::{learn_approx_dp, learn_pure_dp};
use dph_core::loss::margin_miss_fraction;
use dph_core::projection::{project_dataset, ProjectionMatrix};
use dph_core::rng::{derive_seed, hash_bytes};
use dph_core::{Dataset, LearnerOutput};

use crate::config::{check_count, require, Algo, LearnerParams, Params};
use crate::error::{CliError, Result};
use crate::io::{read_table, write_table, Sink};

pub const HEADER: [&str; 17] = [
    "run_id",
    "algo",
    "d",
    "m",
    "n",
    "alpha",
    "beta",
    "gamma",
    "epsilon",
    "delta",
    "trial",
    "seed",
    "err",
    "err_ci",
    "miss_gamma10",
    "millis",
    "status",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub run_id: String,
    pub algo: Algo,
    pub d: usize,
    pub m: Option<usize>,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub trial: usize,
    pub seed: u64,
    pub err: Option<f64>,
    pub err_ci: Option<f64>,
    pub miss_gamma10: Option<f64>,
    pub millis: u64,
    /// `ok` or the name of the error that stopped the row.
    pub status: String,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

impl ResultRow {
    pub fn new(p: &LearnerParams, d: usize, n: usize, trial: usize, seed: u64) -> Self {
        ResultRow {
            run_id: format!("{seed:016x}"),
            algo: p.algo,
            d,
            m: p.m,
            n,
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            epsilon: p.epsilon,
            delta: p.delta,
            trial,
            seed,
            err: None,
            err_ci: None,
            miss_gamma10: None,
            millis: 0,
            status: "ok".into(),
        }
    }

    pub fn record(&self) -> Vec<String> {
        vec![
            self.run_id.clone(),
            self.algo.as_str().into(),
            self.d.to_string(),
            opt(self.m),
            self.n.to_string(),
            self.alpha.to_string(),
            self.beta.to_string(),
            self.gamma.to_string(),
            self.epsilon.to_string(),
            self.delta.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            opt(self.err),
            opt(self.err_ci),
            opt(self.miss_gamma10),
            self.millis.to_string(),
            self.status.clone(),
        ]
    }
}

/// Runs the configured learner.
pub fn run_learner(p: &LearnerParams, data: &Dataset, seed: u64) -> Result<LearnerOutput> {
    let cfg = p.learner_config(seed)?;
    Ok(match p.algo {
        Algo::Approx => learn_approx_dp(data, &cfg)?,
        Algo::Pure => learn_pure_dp(data, &cfg)?,
    })
}

/// Margin-miss fraction at `gamma / 10` of the projected output on the projected training set.
pub fn projected_miss(out: &LearnerOutput, data: &Dataset, gamma: f64) -> Result<f64> {
    let a = ProjectionMatrix::sample(data.dim(), out.metadata.m, out.metadata.projection_seed)?;
    let sa = project_dataset(&a, data)?;
    Ok(margin_miss_fraction(&out.projected.w, &sa, gamma / 10.0)?)
}

/// One sweep cell on synthetic margin data.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub params: LearnerParams,
    pub d: usize,
    pub n: usize,
    pub n_test: usize,
    pub trial: usize,
}

pub fn cell_canonical(cell: &Cell) -> String {
    format!(
        "{};d={};n={};n_test={};trial={}",
        cell.params.canonical(),
        cell.d,
        cell.n,
        cell.n_test,
        cell.trial
    )
}

pub fn cell_seed(master: u64, cell: &Cell) -> u64 {
    hash_bytes(master, cell_canonical(cell).as_bytes())
}

/// Executes a cell. Learner and sampling failures become the row status.
pub fn run_cell(cell: &Cell, seed: u64, record_time: bool) -> ResultRow {
    let mut row = ResultRow::new(&cell.params, cell.d, cell.n, cell.trial, seed);
    let start = Instant::now();
    let outcome = (|| -> Result<(f64, f64, f64, usize)> {
        let dist = MarginDistribution::random(cell.d, cell.params.gamma, derive_seed(seed, 0))?;
        let train = dist.sample(cell.n, derive_seed(seed, 1))?;
        let out = run_learner(&cell.params, &train, derive_seed(seed, 2))?;
        let (err, ci) = mc_error(&dist, &out.hypothesis, cell.n_test, derive_seed(seed, 3))?;
        let miss = projected_miss(&out, &train, cell.params.gamma)?;
        Ok((err, ci, miss, out.metadata.m))
    })();
    match outcome {
        Ok((err, ci, miss, m)) => {
            row.err = Some(err);
            row.err_ci = Some(ci);
            row.miss_gamma10 = Some(miss);
            row.m = Some(m);
        }
        Err(e) => row.status = e.name().to_string(),
    }
    if record_time {
        row.millis = start.elapsed().as_millis() as u64;
    }
    row
}

/// The cells of a sweep in execution order: epsilons outermost, then sample sizes, then trials.
pub fn plan_sweep(p: &Params) -> Result<Vec<Cell>> {
    let algo = require(&p.algo, "algo")?;
    let epsilons = match (&p.epsilons, p.epsilon) {
        (Some(e), _) => e.clone(),
        (None, Some(e)) => vec![e],
        (None, None) => return Err(CliError::config("missing parameter `epsilons`")),
    };
    let ns = match (&p.ns, p.n) {
        (Some(v), _) => v.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => return Err(CliError::config("missing parameter `ns`")),
    };
    let d = require(&p.d, "d")?;
    check_count("d", d, 1)?;
    check_count("trials", p.trials(), 1)?;
    check_count("n_test", p.n_test(), 100)?;
    let mut base = p.clone();
    base.epsilon = Some(epsilons.first().copied().unwrap_or(1.0));
    let base = LearnerParams::from_params(&base, algo)?;
    let mut cells = Vec::new();
    for &epsilon in &epsilons {
        let params = base.with_epsilon(epsilon)?;
        for &n in &ns {
            check_count("n", n, 1)?;
            for trial in 0..p.trials() {
                cells.push(Cell {
                    params: params.clone(),
                    d,
                    n,
                    n_test: p.n_test(),
                    trial,
                });
            }
        }
    }
    Ok(cells)
}

/// Runs every planned cell whose run id is not already in `out`, appending
/// rows as they finish, then rewrites the file sorted by run id.
pub fn sweep(p: &Params, out: &Path) -> Result<usize> {
    let cells = plan_sweep(p)?;
    let master = p.seed();
    let mut done: HashSet<String> = HashSet::new();
    let mut kept: Vec<Vec<String>> = Vec::new();
    if std::fs::metadata(out).map(|m| m.len() > 0).unwrap_or(false) {
        let (header, rows) = read_table(out)?;
        if header != HEADER {
            return Err(CliError::Parse {
                path: out.to_path_buf(),
                line: 1,
                msg: "unexpected CSV header".into(),
            });
        }
        // A row cut short by an interruption is dropped and recomputed.
        for r in rows.into_iter().filter(|r| r.len() == HEADER.len()) {
            if done.insert(r[0].clone()) {
                kept.push(r);
            }
        }
    }
    let sink = Sink::File(out.to_path_buf());
    write_table(&sink, &HEADER, &kept, false)?;
    let mut ran = 0;
    for cell in &cells {
        let seed = cell_seed(master, cell);
        if done.contains(&format!("{seed:016x}")) {
            continue;
        }
        let row = run_cell(cell, seed, p.record_time);
        write_table(&sink, &HEADER, &[row.record()], true)?;
        kept.push(row.record());
        ran += 1;
    }
    kept.sort_by(|a, b| a[0].cmp(&b[0]));
    write_table(&sink, &HEADER, &kept, false)?;
    Ok(ran)
}
