//! Runs a small benchmark suite through the harness and prints the resulting CSV.
//! Each run is generated, trained and (when configured) refined under its own
//! directory; the rows compare both learners against the teacher's loss.
//!
//! cargo run --release --example bench_suite

use relu_regress::harness::cmd_bench;
use serde_json::json;

fn main() -> relu_regress::Result<()> {
    let dir = std::env::temp_dir().join("relu_regress_bench_example");
    let suite = json!({
        "out_dir": dir,
        "base": {
            "seed": 5,
            "marginal": {"kind": "gaussian", "d": 3},
            "labels": {"kind": "clean"},
            "w_star": {"explicit": [1.0, 0.0, 0.0]},
            "m_train": 50000, "m_fresh": 10000, "m_holdout": 20000,
            "ptas": {"eta_accuracy": 0.6}
        },
        "runs": [
            {"label": "clean"},
            {"label": "zeroing", "config": {"labels": {"kind": "zeroing_band", "a": 0.3}}},
            {"label": "adversarial", "overrides": ["labels={\"kind\":\"fraction_adversarial\",\"rho\":0.1,\"b\":0.5}"]},
            {"label": "bad_step", "overrides": ["solver.step_size=0.5"]}
        ]
    });
    std::fs::create_dir_all(&dir).map_err(|e| relu_regress::Error::Io { path: dir.clone(), source: e })?;
    let suite_path = dir.join("suite.json");
    std::fs::write(&suite_path, serde_json::to_string_pretty(&suite)?)
        .map_err(|e| relu_regress::Error::Io { path: suite_path.clone(), source: e })?;

    let (csv, rows) = cmd_bench(&suite_path, &[])?;
    print!("{}", std::fs::read_to_string(&csv).unwrap_or_default());
    println!("{} rows, {} ok", rows.len(), rows.iter().filter(|r| r.status == "ok").count());
    Ok(())
}
