//! Config-driven experiment runner behind the `relu-regress` binary.
//!
//! Every command reads an [`ExperimentConfig`], writes its artefacts under `out_dir`
//! and returns a [`RunReport`] that echoes the fully resolved config. Given the same
//! config the artefacts are byte-identical across runs; only wall-time fields differ.

mod bench;
mod config;

pub use bench::{cmd_bench, BenchRow, BenchRun, BenchSuite, BENCH_HEADER};
pub use config::{
    apply_override, DataPaths, ExperimentConfig, WStarSpec, STREAM_FRESH, STREAM_HOLDOUT, STREAM_PROBE,
    STREAM_TEACHER, STREAM_TRAIN,
};

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::{generate, read_csv, write_csv, Dataset};
use crate::error::{Error, Result};
use crate::numerics::{dist, Rng};
use crate::ptas::{piecewise_loss, ptas_train, region_losses, PiecewiseHypothesis, PtasConfig, RegionLosses};
use crate::surrogate::{
    chow_distance, chow_model, chow_true, pgd_train, probe_pairs, select_min_gradient, square_loss, Activation,
    LinearModel, PairRatios, ProbeSpec,
};

/// Writes `value` as pretty JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn ensure_out_dir(cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn load_set(path: &Path, field: &str, d: usize) -> Result<Dataset> {
    if !path.is_file() {
        return Err(Error::config(field, format!("no dataset at {}", path.display())));
    }
    read_csv(path, d)
}

/// Square loss of the ReLU teacher on `ds`. The teacher comes from the dataset's
/// provenance sidecar when present and from the config otherwise.
pub fn teacher_loss(cfg: &ExperimentConfig, ds: &Dataset) -> Result<f64> {
    let w_star = match &ds.provenance {
        Some(p) => p.w_star.clone(),
        None => cfg.resolve_w_star(),
    };
    square_loss(&LinearModel::new(w_star, Activation::Relu), ds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub w_star: Vec<f64>,
    pub opt_ref_train: f64,
    pub opt_ref_fresh: f64,
    pub opt_ref_holdout: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenMetrics {
    pub rows: [usize; 3],
    pub ground_truth: GroundTruthFile,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMetrics {
    pub holdout_loss: f64,
    pub w_distance: f64,
    /// Chow distance between the labels and the selected model on the fresh set.
    pub chow_distance_fresh: f64,
    pub iterations: usize,
    /// Iteration number of the iterate chosen on the fresh set.
    pub selected_iteration: usize,
    pub fresh_grad_norm: f64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub holdout_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtasMetrics {
    pub gamma: f64,
    pub degree: usize,
    pub opt_used: f64,
    pub loss_const: f64,
    pub holdout: RegionLosses,
    /// Fraction of holdout samples in the minus, band and plus regions.
    pub holdout_fractions: [f64; 3],
    pub train_counts: [usize; 3],
    pub band_l1_norm: f64,
    pub band_l1_bound_ok: bool,
    pub sweep: Vec<SweepPoint>,
    pub notes: Vec<String>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub model: String,
    pub rows: usize,
    pub holdout_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub activation: Activation,
    pub spec: ProbeSpec,
    pub mu_hat: f64,
    pub beta_hat: f64,
    pub pairs: Vec<PairRatios>,
}

/// Outcome of one command together with the resolved config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_ref: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gen: Option<GenMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ptas: Option<PtasMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeReport>,
}

impl RunReport {
    fn new(command: &str, cfg: &ExperimentConfig) -> Self {
        RunReport {
            command: command.into(),
            config: cfg.clone(),
            opt_ref: None,
            gen: None,
            train: None,
            ptas: None,
            eval: None,
            probe: None,
        }
    }

    fn save(self) -> Result<Self> {
        write_json(self.config.out_dir.join(format!("report_{}.json", self.command)), &self)?;
        Ok(self)
    }
}

/// Generates the train, fresh and holdout sets on streams 0, 1 and 2 of the seed.
pub fn cmd_gen(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let start = Instant::now();
    let w_star = cfg.resolve_w_star();
    let mut opt = [0.0; 3];
    let sets = [
        (STREAM_TRAIN, cfg.m_train, cfg.train_path()),
        (STREAM_FRESH, cfg.m_fresh, cfg.fresh_path()),
        (STREAM_HOLDOUT, cfg.m_holdout, cfg.holdout_path()),
    ];
    for (i, (stream, m, path)) in sets.iter().enumerate() {
        let mut rng = Rng::with_stream(cfg.seed, *stream);
        let (ds, gt) = generate(&cfg.marginal, &cfg.labels, &w_star, *m, &mut rng)?;
        write_csv(&ds, path)?;
        opt[i] = gt.opt_ref;
        log::info!("wrote {} rows to {}", m, path.display());
    }
    let ground_truth = GroundTruthFile {
        w_star,
        opt_ref_train: opt[0],
        opt_ref_fresh: opt[1],
        opt_ref_holdout: opt[2],
    };
    write_json(cfg.out_dir.join("ground_truth.json"), &ground_truth)?;
    let mut report = RunReport::new("gen", cfg);
    report.opt_ref = Some(opt[2]);
    report.gen = Some(GenMetrics {
        rows: [cfg.m_train, cfg.m_fresh, cfg.m_holdout],
        ground_truth,
        wall_time_ms: elapsed_ms(start),
    });
    report.save()
}

/// Gradient descent on the train set, iterate selection on the fresh set, evaluation on
/// the holdout set. Writes `model.json` (the selected model) and `trace.json`.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let d = cfg.marginal.d;
    let train = load_set(&cfg.train_path(), "data.train", d)?;
    let fresh = load_set(&cfg.fresh_path(), "data.fresh", d)?;
    let holdout = load_set(&cfg.holdout_path(), "data.holdout", d)?;
    let start = Instant::now();
    let mut trace = pgd_train(&train, cfg.activation, &cfg.solver)?;
    let sel = select_min_gradient(&trace, &fresh)?;
    trace.selected_iter = sel.index;
    let wall_time_ms = elapsed_ms(start);
    trace.wall_time_ms = wall_time_ms;
    let model = sel.model;
    write_json(cfg.model_path(), &model)?;
    write_json(cfg.out_dir.join("trace.json"), &trace.to_json())?;

    let w_star = holdout
        .provenance
        .as_ref()
        .map(|p| p.w_star.clone())
        .unwrap_or_else(|| cfg.resolve_w_star());
    let metrics = TrainMetrics {
        holdout_loss: square_loss(&model, &holdout)?,
        w_distance: dist(&model.w, &w_star),
        chow_distance_fresh: chow_distance(&chow_true(&fresh)?, &chow_model(&model, &fresh)?)?,
        iterations: trace.steps_taken(),
        selected_iteration: sel.iteration,
        fresh_grad_norm: sel.fresh_grad_norm,
        wall_time_ms,
    };
    log::info!("holdout loss {:.6e} after {} iterations", metrics.holdout_loss, metrics.iterations);
    let mut report = RunReport::new("train", cfg);
    report.opt_ref = Some(teacher_loss(cfg, &holdout)?);
    report.train = Some(metrics);
    report.save()
}

fn read_linear_model(path: &Path) -> Result<LinearModel> {
    if !path.is_file() {
        return Err(Error::config("data.model", format!("no model at {}", path.display())));
    }
    Ok(serde_json::from_value(config::load_json(path)?)?)
}

/// Refines the trained model into a piecewise hypothesis and writes `hypothesis.json`.
/// With a non-empty `gamma_sweep` every multiplier is tried and the lowest holdout loss
/// is kept (earliest on ties).
pub fn cmd_ptas(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let d = cfg.marginal.d;
    let train = load_set(&cfg.train_path(), "data.train", d)?;
    let holdout = load_set(&cfg.holdout_path(), "data.holdout", d)?;
    let const_model = read_linear_model(&cfg.model_path())?;
    let base = cfg.ptas.clone().unwrap_or_default();
    let start = Instant::now();

    let candidates: Vec<PtasConfig> = if cfg.gamma_sweep.is_empty() {
        vec![base]
    } else {
        cfg.gamma_sweep
            .iter()
            .map(|&g| PtasConfig { gamma: Some(g), ..base.clone() })
            .collect()
    };
    let mut best: Option<(f64, PiecewiseHypothesis)> = None;
    let mut sweep = Vec::new();
    for c in &candidates {
        let h = ptas_train(&train, &holdout, c, &const_model)?;
        let loss = piecewise_loss(&h, &holdout)?;
        sweep.push(SweepPoint { gamma: h.provenance.gamma, holdout_loss: loss });
        if best.as_ref().is_none_or(|(l, _)| loss < *l) {
            best = Some((loss, h));
        }
    }
    let (_, h) = best.expect("at least one candidate");
    let wall_time_ms = elapsed_ms(start);
    write_json(cfg.out_dir.join("hypothesis.json"), &h)?;

    let losses = region_losses(&h, &holdout)?;
    let n = holdout.len() as f64;
    let metrics = PtasMetrics {
        gamma: h.provenance.gamma,
        degree: h.provenance.degree,
        opt_used: h.provenance.opt_used,
        loss_const: square_loss(&const_model, &holdout)?,
        holdout_fractions: losses.counts.map(|c| c as f64 / n),
        holdout: losses,
        train_counts: h.provenance.train_counts,
        band_l1_norm: h.provenance.band_l1_norm,
        band_l1_bound_ok: h.provenance.band_l1_bound_ok,
        sweep: if cfg.gamma_sweep.is_empty() { Vec::new() } else { sweep },
        notes: h.provenance.notes.clone(),
        wall_time_ms,
    };
    for note in &metrics.notes {
        log::warn!("ptas: {note}");
    }
    let mut report = RunReport::new("ptas", cfg);
    report.opt_ref = Some(teacher_loss(cfg, &holdout)?);
    report.ptas = Some(metrics);
    report.save()
}

/// Model argument of `eval`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelRef {
    Zero,
    Path(PathBuf),
}

impl ModelRef {
    pub fn parse(s: &str) -> Self {
        if s == "zero" {
            ModelRef::Zero
        } else {
            ModelRef::Path(PathBuf::from(s))
        }
    }
}

/// A loaded predictor: a single-neuron model or a piecewise hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Linear(LinearModel),
    Piecewise(PiecewiseHypothesis),
}

impl Predictor {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::config("model", format!("no model at {}", path.display())));
        }
        let v: Value = config::load_json(path)?;
        if v.get("band_poly").is_some() {
            Ok(Predictor::Piecewise(serde_json::from_value(v)?))
        } else {
            Ok(Predictor::Linear(serde_json::from_value(v)?))
        }
    }

    pub fn loss(&self, ds: &Dataset) -> Result<f64> {
        match self {
            Predictor::Linear(m) => square_loss(m, ds),
            Predictor::Piecewise(h) => piecewise_loss(h, ds),
        }
    }
}

/// Holdout square loss of a saved model, or of the zero predictor.
pub fn cmd_eval(cfg: &ExperimentConfig, model: &ModelRef) -> Result<RunReport> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let holdout = load_set(&cfg.holdout_path(), "data.holdout", cfg.marginal.d)?;
    let (name, predictor) = match model {
        ModelRef::Zero => ("zero".to_string(), Predictor::Linear(LinearModel::zero(cfg.marginal.d, cfg.activation))),
        ModelRef::Path(p) => (p.display().to_string(), Predictor::load(p)?),
    };
    let mut report = RunReport::new("eval", cfg);
    report.opt_ref = Some(teacher_loss(cfg, &holdout)?);
    report.eval = Some(EvalMetrics {
        model: name,
        rows: holdout.len(),
        holdout_loss: predictor.loss(&holdout)?,
    });
    report.save()
}

/// Strong-convexity and Chow-learnability probes of the configured activation and
/// marginal on stream 4. Writes `probe.json`.
pub fn cmd_probe(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    ensure_out_dir(cfg)?;
    let spec = cfg.probe.ok_or_else(|| Error::config("probe", "missing probe section"))?;
    let mut rng = Rng::with_stream(cfg.seed, STREAM_PROBE);
    let pairs = probe_pairs(cfg.activation, &cfg.marginal, &spec, &mut rng)?;
    let mu_hat = pairs.iter().map(|p| p.strong_convexity).fold(f64::INFINITY, f64::min);
    let beta_hat = pairs.iter().map(|p| p.chow_learnability).fold(f64::NEG_INFINITY, f64::max);
    let probe = ProbeReport {
        activation: cfg.activation,
        spec,
        mu_hat,
        beta_hat,
        pairs,
    };
    write_json(cfg.out_dir.join("probe.json"), &probe)?;
    log::info!("mu_hat = {mu_hat:.4}, beta_hat = {beta_hat:.4}");
    let mut report = RunReport::new("probe", cfg);
    report.probe = Some(probe);
    report.save()
}
