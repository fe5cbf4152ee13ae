use std::fs;
use std::path::Path;
use std::process::Command;

use relu_regress::harness::{
    apply_override, cmd_bench, cmd_eval, cmd_gen, cmd_probe, cmd_ptas, cmd_train, ExperimentConfig, ModelRef,
    BENCH_HEADER,
};
use relu_regress::data::read_csv;
use relu_regress::Error;
use serde_json::{json, Value};

fn config_value(out: &Path) -> Value {
    json!({
        "seed": 3,
        "marginal": {"kind": "gaussian", "d": 3},
        "labels": {"kind": "zeroing_band", "a": 0.3},
        "w_star": {"explicit": [1.0, 0.0, 0.0]},
        "m_train": 20000, "m_fresh": 5000, "m_holdout": 5000,
        "solver": {"max_iters": 200},
        "ptas": {"eta_accuracy": 0.7},
        "out_dir": out
    })
}

fn config(out: &Path) -> ExperimentConfig {
    ExperimentConfig::from_value(config_value(out)).unwrap()
}

fn write_config(path: &Path, v: &Value) {
    fs::write(path, serde_json::to_string_pretty(v).unwrap()).unwrap();
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_gen(&config(a.path())).unwrap();
    cmd_gen(&config(b.path())).unwrap();
    for f in ["train.csv", "fresh.csv", "holdout.csv", "train.csv.meta.json", "ground_truth.json"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let train = fs::read(a.path().join("train.csv")).unwrap();
    let fresh = fs::read(a.path().join("fresh.csv")).unwrap();
    assert_ne!(train[..1000], fresh[..1000]);
}

#[test]
fn zero_model_loss_is_mean_square_label() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    cmd_gen(&cfg).unwrap();
    let report = cmd_eval(&cfg, &ModelRef::Zero).unwrap();
    let holdout = read_csv(cfg.holdout_path(), 3).unwrap();
    let expected = holdout.labels().iter().map(|y| y * y).sum::<f64>() / holdout.len() as f64;
    assert!((report.eval.unwrap().holdout_loss - expected).abs() <= 1e-12 * expected.max(1.0));
}

#[test]
fn train_and_ptas_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    cmd_gen(&cfg).unwrap();
    let train = cmd_train(&cfg).unwrap();
    let model_bytes = fs::read(cfg.model_path()).unwrap();
    cmd_train(&cfg).unwrap();
    assert_eq!(model_bytes, fs::read(cfg.model_path()).unwrap());
    let opt = train.opt_ref.unwrap();
    assert!(train.train.as_ref().unwrap().holdout_loss < 10.0 * opt + 0.01);

    let ptas = cmd_ptas(&cfg).unwrap();
    let m = ptas.ptas.as_ref().unwrap();
    let weighted: f64 = m.holdout_fractions.iter().zip(&m.holdout.losses).map(|(f, l)| f * l).sum();
    assert!((weighted - m.holdout.total).abs() <= 1e-10);
    assert_eq!(m.holdout.counts.iter().sum::<usize>(), cfg.m_holdout);
    let hyp = fs::read(dir.path().join("hypothesis.json")).unwrap();
    cmd_ptas(&cfg).unwrap();
    assert_eq!(hyp, fs::read(dir.path().join("hypothesis.json")).unwrap());

    let eval = cmd_eval(&cfg, &ModelRef::Path(dir.path().join("hypothesis.json"))).unwrap();
    assert_eq!(eval.eval.unwrap().holdout_loss, m.holdout.total);

    // the report echoes a config that re-parses to the one that ran
    let echoed: Value = serde_json::from_slice(&fs::read(dir.path().join("report_ptas.json")).unwrap()).unwrap();
    assert_eq!(ExperimentConfig::from_value(echoed["config"].clone()).unwrap(), cfg);
}

#[test]
fn gamma_sweep_keeps_best_holdout() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = config_value(dir.path());
    apply_override(&mut v, "gamma_sweep=[0.5, 1.0, 2.0]").unwrap();
    let cfg = ExperimentConfig::from_value(v).unwrap();
    cmd_gen(&cfg).unwrap();
    cmd_train(&cfg).unwrap();
    let m = cmd_ptas(&cfg).unwrap().ptas.unwrap();
    assert_eq!(m.sweep.len(), 3);
    let best = m.sweep.iter().map(|p| p.holdout_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(m.holdout.total, best);
}

#[test]
fn huge_gamma_is_logged_in_notes() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = config_value(dir.path());
    apply_override(&mut v, "ptas.gamma=1e9").unwrap();
    apply_override(&mut v, "ptas.degree=2").unwrap();
    let cfg = ExperimentConfig::from_value(v).unwrap();
    cmd_gen(&cfg).unwrap();
    cmd_train(&cfg).unwrap();
    let m = cmd_ptas(&cfg).unwrap().ptas.unwrap();
    assert_eq!(m.train_counts, [0, cfg.m_train, 0]);
    assert!(m.notes.iter().any(|n| n.contains("plus")));
}

#[test]
fn missing_inputs_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    cmd_gen(&cfg).unwrap();
    fs::remove_file(cfg.fresh_path()).unwrap();
    match cmd_train(&cfg) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "data.fresh"),
        other => panic!("{other:?}"),
    }
    match cmd_ptas(&cfg) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "data.model"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn probe_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = config_value(dir.path());
    apply_override(&mut v, "probe={\"m\": 20000, \"pairs\": 10}").unwrap();
    apply_override(&mut v, "activation={\"kind\": \"identity\"}").unwrap();
    let cfg = ExperimentConfig::from_value(v.clone()).unwrap();
    let p = cmd_probe(&cfg).unwrap().probe.unwrap();
    assert_eq!(p.pairs.len(), 10);
    assert!(p.mu_hat > 0.9 && p.mu_hat < 1.1, "{}", p.mu_hat);
    assert!(dir.path().join("probe.json").is_file());

    apply_override(&mut v, "probe.pairs=0").unwrap();
    assert!(matches!(ExperimentConfig::from_value(v), Err(Error::InvalidSpec(_))));
    let no_probe = config(dir.path());
    assert!(matches!(cmd_probe(&no_probe), Err(Error::Config { .. })));
}

#[test]
fn bench_rows_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = config_value(dir.path());
    base.as_object_mut().unwrap().remove("out_dir");
    apply_override(&mut base, "labels={\"kind\": \"clean\"}").unwrap();
    let suite = json!({
        "out_dir": dir.path().join("bench"),
        "base": base,
        "runs": [
            {"label": "a"},
            {"label": "b", "overrides": ["seed=4"]},
            {"label": "broken", "overrides": ["solver.step_size=0.9"]},
            {"label": "c", "config": {"seed": 5}}
        ]
    });
    let path = dir.path().join("suite.json");
    write_config(&path, &suite);
    let (csv, rows) = cmd_bench(&path, &[]).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[2].status.contains("solver.step_size"));
    for r in [&rows[0], &rows[1], &rows[3]] {
        assert_eq!(r.status, "ok");
        assert!(r.ratio_const.unwrap().is_finite());
        assert!(r.ratio_ptas.unwrap().is_finite());
    }
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), BENCH_HEADER.join(","));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn empty_bench_suite_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.json");
    write_config(&path, &json!({"out_dir": dir.path(), "runs": []}));
    let (csv, rows) = cmd_bench(&path, &[]).unwrap();
    assert!(rows.is_empty());
    assert_eq!(fs::read_to_string(csv).unwrap(), format!("{}\n", BENCH_HEADER.join(",")));
}

#[test]
fn zero_sample_count_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = config_value(dir.path());
    apply_override(&mut v, "m_train=0").unwrap();
    assert!(matches!(ExperimentConfig::from_value(v), Err(Error::InvalidSpec(_))));
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relu-regress"))
}

#[test]
fn binary_exit_codes_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    write_config(&cfg_path, &config_value(&dir.path().join("run")));

    let out = bin().args(["gen", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin()
        .args(["eval", "--model", "zero", "--config"])
        .arg(&cfg_path)
        .env("RELU_REGRESS_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["eval"]["holdout_loss"].as_f64().unwrap() > 0.0);

    let out = bin()
        .args(["train", "--override", "solver.step_size=0.5", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.step_size"));

    let out = bin().args(["frobnicate", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // a zero teacher with γ given explicitly leaves a zero direction to refine around
    let zero_cfg = dir.path().join("zero.json");
    let mut v = config_value(&dir.path().join("zero"));
    apply_override(&mut v, "w_star.explicit=[0.0, 0.0, 0.0]").unwrap();
    apply_override(&mut v, "ptas.gamma=1.0").unwrap();
    write_config(&zero_cfg, &v);
    for cmd in ["gen", "train"] {
        assert!(bin().args([cmd, "--config"]).arg(&zero_cfg).output().unwrap().status.success());
    }
    let out = bin().args(["ptas", "--config"]).arg(&zero_cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
