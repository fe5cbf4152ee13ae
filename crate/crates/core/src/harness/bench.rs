use std::collections::BTreeSet;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{apply_override, load_json};
use super::{cmd_gen, cmd_ptas, cmd_train, ExperimentConfig};
use crate::error::{Error, Result};
use crate::ptas::OPT_FLOOR;

pub const BENCH_HEADER: [&str; 10] = [
    "label",
    "status",
    "opt_ref",
    "loss_const",
    "loss_ptas",
    "ratio_const",
    "ratio_ptas",
    "time_gen_ms",
    "time_train_ms",
    "time_ptas_ms",
];

/// A list of runs sharing a base config. Each run's config is the base deep-merged with
/// the run's `config`, then its `overrides`; `out_dir` defaults to
/// `<suite out_dir>/<label>`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    pub out_dir: PathBuf,
    #[serde(default)]
    pub base: Value,
    #[serde(default)]
    pub runs: Vec<BenchRun>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRun {
    pub label: String,
    #[serde(default)]
    pub config: Value,
    #[serde(default)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchRow {
    pub label: String,
    /// `ok`, or the error that stopped the run.
    pub status: String,
    pub opt_ref: Option<f64>,
    pub loss_const: Option<f64>,
    pub loss_ptas: Option<f64>,
    pub ratio_const: Option<f64>,
    pub ratio_ptas: Option<f64>,
    pub time_gen_ms: Option<f64>,
    pub time_train_ms: Option<f64>,
    pub time_ptas_ms: Option<f64>,
}

impl BenchRow {
    fn record(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        vec![
            self.label.clone(),
            self.status.clone(),
            f(self.opt_ref),
            f(self.loss_const),
            f(self.loss_ptas),
            f(self.ratio_const),
            f(self.ratio_ptas),
            f(self.time_gen_ms),
            f(self.time_train_ms),
            f(self.time_ptas_ms),
        ]
    }
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) if !p.is_null() => *b = p.clone(),
        _ => {}
    }
}

fn run_config(suite: &BenchSuite, run: &BenchRun) -> Result<ExperimentConfig> {
    let mut value = if suite.base.is_null() {
        Value::Object(Default::default())
    } else {
        suite.base.clone()
    };
    merge(&mut value, &run.config);
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::config("base", "run config must be a JSON object"))?;
    obj.insert("label".into(), Value::String(run.label.clone()));
    if !obj.contains_key("out_dir") {
        let dir = suite.out_dir.join(&run.label);
        obj.insert("out_dir".into(), Value::String(dir.to_string_lossy().into_owned()));
    }
    for o in &run.overrides {
        apply_override(&mut value, o)?;
    }
    ExperimentConfig::from_value(value)
}

fn run_row(suite: &BenchSuite, run: &BenchRun, row: &mut BenchRow) -> Result<()> {
    let cfg = run_config(suite, run)?;
    let t = Instant::now();
    cmd_gen(&cfg)?;
    row.time_gen_ms = Some(t.elapsed().as_secs_f64() * 1e3);
    let t = Instant::now();
    let train = cmd_train(&cfg)?;
    row.time_train_ms = Some(t.elapsed().as_secs_f64() * 1e3);
    let opt = train.opt_ref.expect("train reports opt_ref");
    let denom = opt.max(OPT_FLOOR);
    let loss_const = train.train.expect("train metrics").holdout_loss;
    row.opt_ref = Some(opt);
    row.loss_const = Some(loss_const);
    row.ratio_const = Some(loss_const / denom);
    if cfg.ptas.is_some() {
        let t = Instant::now();
        let ptas = cmd_ptas(&cfg)?;
        row.time_ptas_ms = Some(t.elapsed().as_secs_f64() * 1e3);
        let loss = ptas.ptas.expect("ptas metrics").holdout.total;
        row.loss_ptas = Some(loss);
        row.ratio_ptas = Some(loss / denom);
    }
    Ok(())
}

/// Runs every entry of the suite at `path` and writes `<out_dir>/bench.csv`. A failing
/// run yields a row whose status holds the error; the remaining runs still execute.
/// Returns the csv path and the rows.
pub fn cmd_bench(path: impl AsRef<Path>, overrides: &[String]) -> Result<(PathBuf, Vec<BenchRow>)> {
    let mut value = load_json(path)?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let suite: BenchSuite = serde_json::from_value(value)?;
    fs::create_dir_all(&suite.out_dir).map_err(|e| Error::io(&suite.out_dir, e))?;

    let mut seen = BTreeSet::new();
    let mut rows = Vec::with_capacity(suite.runs.len());
    for run in &suite.runs {
        let mut row = BenchRow {
            label: run.label.clone(),
            ..BenchRow::default()
        };
        let outcome = if run.label.is_empty() || run.label.contains(['/', '\\']) {
            Err(Error::config("label", "must be non-empty and free of path separators"))
        } else if !seen.insert(run.label.clone()) {
            Err(Error::config("label", "duplicate label"))
        } else {
            run_row(&suite, run, &mut row)
        };
        row.status = match outcome {
            Ok(()) => "ok".into(),
            Err(e) => {
                log::warn!("bench run `{}` failed: {e}", run.label);
                format!("error: {e}")
            }
        };
        rows.push(row);
    }

    let csv_path = suite.out_dir.join("bench.csv");
    let file = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    let csv_err = |e: csv::Error| Error::io(&csv_path, e.into());
    w.write_record(BENCH_HEADER).map_err(csv_err)?;
    for row in &rows {
        w.write_record(row.record()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    Ok((csv_path, rows))
}
