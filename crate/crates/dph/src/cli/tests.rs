use std::path::Path;

use dph_core::data::empirical_margin;
use dph_core::Hypothesis;

use super::{run, Outcome};
use crate::config::{Algo, LearnerParams, Params};
use crate::harness::{cell_seed, plan_sweep, run_cell, HEADER};
use crate::io::{read_dataset, read_json, read_table, ModelFile, WStarFile};

fn at(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn dph_env(args: &[&str], env_seed: Option<&str>) -> Outcome {
    run(std::iter::once("dph").chain(args.iter().copied()), env_seed)
}

fn dph(args: &[&str]) -> Outcome {
    dph_env(args, None)
}

fn ok(out: Outcome) {
    assert_eq!(out.code, 0, "{}", out.stderr);
}

#[test]
fn gen_writes_margin_data_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (at(dir.path(), "a.csv"), at(dir.path(), "b.csv"));
    ok(dph(&[
        "gen", "--d", "50", "--n", "1000", "--gamma", "0.3", "--seed", "1", "--out", &a,
    ]));
    let data = read_dataset(Path::new(&a), true).unwrap();
    assert_eq!(data.len(), 1000);
    let side: WStarFile = read_json(&dir.path().join("a.csv.wstar.json")).unwrap();
    assert_eq!(side.d, 50);
    assert!(empirical_margin(&data, &Hypothesis::ambient(side.w_star)).unwrap() >= 0.3);
    ok(dph(&[
        "gen", "--d", "50", "--n", "1000", "--gamma", "0.3", "--seed", "1", "--out", &b,
    ]));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_rejects_empty_request() {
    let dir = tempfile::tempdir().unwrap();
    let a = at(dir.path(), "a.csv");
    let out = dph(&["gen", "--d", "5", "--n", "0", "--gamma", "0.3", "--out", &a]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("INVALID_CONFIG"));
    assert!(!Path::new(&a).exists());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dph(&["gen", "--nonsense"]).code, 1);
    assert_eq!(dph(&["frobnicate"]).code, 1);
    let cfg = at(dir.path(), "c.json");
    std::fs::write(&cfg, r#"{"d": 3, "mystery": 1}"#).unwrap();
    let out = dph(&["gen", "--config", &cfg]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("mystery"));
}

#[test]
fn net_too_large_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let (a, m) = (at(dir.path(), "a.csv"), at(dir.path(), "m.json"));
    ok(dph(&["gen", "--d", "10", "--n", "50", "--gamma", "0.3", "--out", &a]));
    let out = dph(&[
        "learn-pure",
        "--data",
        &a,
        "--model",
        &m,
        "--gamma",
        "0.3",
        "--epsilon",
        "1",
        "--m",
        "30",
    ]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.starts_with("NET_TOO_LARGE"));
}

#[test]
fn approx_model_is_unit_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = at(dir.path(), "a.csv");
    ok(dph(&["gen", "--d", "15", "--n", "60", "--gamma", "0.3", "--out", &a]));
    let learn = |m: &str| {
        dph(&[
            "learn-approx",
            "--data",
            &a,
            "--model",
            m,
            "--gamma",
            "0.3",
            "--epsilon",
            "1",
            "--delta",
            "1e-4",
            "--m",
            "4",
            "--seed",
            "3",
        ])
    };
    let (m1, m2) = (at(dir.path(), "m1.json"), at(dir.path(), "m2.json"));
    ok(learn(&m1));
    ok(learn(&m2));
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());
    let model: ModelFile = read_json(Path::new(&m1)).unwrap();
    assert_eq!(model.w.len(), 15);
    let norm: f64 = model.w.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-9);
    assert_eq!(model.metadata.runs, Some(7));
}

#[test]
fn flags_beat_config_and_config_beats_env() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, out) = (at(dir.path(), "c.json"), at(dir.path(), "cfg.csv"));
    let json = format!(r#"{{"d": 5, "n": 20, "gamma": 0.2, "seed": 9, "out": {out:?}}}"#);
    std::fs::write(&cfg, json).unwrap();
    ok(dph_env(&["gen", "--config", &cfg, "--n", "30"], Some("41")));
    assert_eq!(read_dataset(Path::new(&out), true).unwrap().len(), 30);
    let side: WStarFile = read_json(&dir.path().join("cfg.csv.wstar.json")).unwrap();
    assert_eq!(side.seed, 9);

    let env_out = at(dir.path(), "env.csv");
    ok(dph_env(
        &["gen", "--d", "5", "--n", "10", "--gamma", "0.2", "--out", &env_out],
        Some("41"),
    ));
    let side: WStarFile = read_json(&dir.path().join("env.csv.wstar.json")).unwrap();
    assert_eq!(side.seed, 41);

    let bad = dph_env(
        &["gen", "--d", "5", "--n", "10", "--gamma", "0.2", "--out", &env_out],
        Some("x"),
    );
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("DPH_SEED"));
}

#[test]
fn bad_dataset_rows_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (bad, zero, m) = (
        at(dir.path(), "bad.csv"),
        at(dir.path(), "zero.csv"),
        at(dir.path(), "m.json"),
    );
    std::fs::write(&bad, "1,0.5,0.5\n2,0.1,0.2\n").unwrap();
    let out = dph(&[
        "learn-pure",
        "--data",
        &bad,
        "--model",
        &m,
        "--gamma",
        "0.5",
        "--epsilon",
        "1",
        "--m",
        "2",
    ]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.starts_with("PARSE"), "{}", out.stderr);
    std::fs::write(&zero, "1,0,0\n").unwrap();
    let out = dph(&[
        "learn-pure",
        "--data",
        &zero,
        "--model",
        &m,
        "--gamma",
        "0.5",
        "--epsilon",
        "1",
        "--m",
        "2",
    ]);
    assert!(out.stderr.starts_with("ZERO_VECTOR"));
}

fn sweep(out: &str) -> Outcome {
    dph(&[
        "sweep",
        "--algo",
        "pure",
        "--d",
        "10",
        "--gamma",
        "0.4",
        "--epsilons",
        "1,2",
        "--ns",
        "20,40",
        "--trials",
        "3",
        "--m",
        "2",
        "--n-test",
        "200",
        "--seed",
        "7",
        "--out",
        out,
    ])
}

#[test]
fn sweep_counts_rows_and_resumes_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (full, part) = (at(dir.path(), "full.csv"), at(dir.path(), "part.csv"));
    ok(sweep(&full));
    let text = std::fs::read_to_string(&full).unwrap();
    let (header, rows) = read_table(Path::new(&full)).unwrap();
    assert_eq!(header, HEADER);
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r[16] == "ok"));
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));

    // Interrupted: header, five complete rows and half of the sixth.
    let lines: Vec<&str> = text.lines().collect();
    let mut partial = lines[..6].join("\n");
    partial.push('\n');
    partial.push_str(&lines[6][..lines[6].len() / 2]);
    std::fs::write(&part, partial).unwrap();
    ok(sweep(&part));
    assert_eq!(std::fs::read_to_string(&part).unwrap(), text);

    ok(sweep(&full));
    assert_eq!(std::fs::read_to_string(&full).unwrap(), text);
}

#[test]
fn sweep_rows_rerun_from_their_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = at(dir.path(), "s.csv");
    ok(sweep(&out));
    let (_, rows) = read_table(Path::new(&out)).unwrap();
    let params = Params {
        algo: Some(Algo::Pure),
        d: Some(10),
        gamma: Some(0.4),
        epsilons: Some(vec![1.0, 2.0]),
        ns: Some(vec![20, 40]),
        trials: Some(3),
        m: Some(2),
        n_test: Some(200),
        seed: Some(7),
        ..Params::default()
    };
    let cells = plan_sweep(&params).unwrap();
    assert_eq!(cells.len(), 12);
    for cell in &cells {
        let seed = cell_seed(7, cell);
        let row = rows.iter().find(|r| r[11] == seed.to_string()).expect("row present");
        assert_eq!(run_cell(cell, seed, false).record(), *row);
    }
}

#[test]
fn sweep_records_failures_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = at(dir.path(), "f.csv");
    ok(dph(&[
        "sweep",
        "--algo",
        "pure",
        "--d",
        "10",
        "--gamma",
        "0.3",
        "--epsilon",
        "1",
        "--ns",
        "10",
        "--trials",
        "2",
        "--m",
        "30",
        "--out",
        &out,
    ]));
    let (_, rows) = read_table(Path::new(&out)).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[16] == "NET_TOO_LARGE" && r[12].is_empty()));
}

#[test]
fn learner_params_validate_before_sampling() {
    let mut p = Params {
        gamma: Some(1.5),
        epsilon: Some(1.0),
        delta: Some(1e-5),
        ..Params::default()
    };
    assert!(LearnerParams::from_params(&p, Algo::Approx).is_err());
    p.gamma = Some(0.5);
    assert!(LearnerParams::from_params(&p, Algo::Approx).is_ok());
    assert!(LearnerParams::from_params(
        &Params {
            delta: None,
            ..p.clone()
        },
        Algo::Approx
    )
    .is_err());
}

#[test]
fn packing_and_jl_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (p, j) = (at(dir.path(), "p.csv"), at(dir.path(), "j.csv"));
    ok(dph(&[
        "packing",
        "--d",
        "20",
        "--gamma",
        "0.3",
        "--epsilons",
        "1,4",
        "--ns",
        "30",
        "--trials",
        "2",
        "--n-test",
        "500",
        "--out",
        &p,
    ]));
    let (header, rows) = read_table(Path::new(&p)).unwrap();
    assert_eq!(header, ["epsilon", "n", "trial", "err_i", "err_j", "success"]);
    assert_eq!(rows.len(), 4);
    ok(dph(&[
        "jl-test", "--d", "16", "--m", "64", "--tau", "0.5", "--points", "1000", "--out", &j,
    ]));
    let (header, rows) = read_table(Path::new(&j)).unwrap();
    assert_eq!(header, ["d", "m", "tau", "points", "violation_fraction"]);
    assert_eq!(rows[0][..4], ["16", "64", "0.5", "1000"]);
}
