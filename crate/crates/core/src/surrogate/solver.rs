use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{surrogate_gradient, Activation, LinearModel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{norm, project_ball};

/// Parameters of the gradient-descent solver.
///
/// With `use_projection` every step is followed by projection onto the ball of radius
/// `weight_bound` and the step size must be below 1/4. Without it (the fast variant
/// for strongly convex activations) the step size must not exceed 1/16.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub step_size: f64,
    pub weight_bound: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub use_projection: bool,
    /// Iterate recording stride; `None` picks 1 up to 10⁴ iterations and `⌈T/10⁴⌉` beyond.
    pub record_stride: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_size: 0.2,
            weight_bound: 2.0,
            max_iters: 1000,
            grad_tol: 0.0,
            use_projection: true,
            record_stride: None,
        }
    }
}

impl SolverConfig {
    /// Fast variant: no projection, step size 1/16.
    pub fn fast(max_iters: usize) -> Self {
        SolverConfig {
            step_size: 1.0 / 16.0,
            use_projection: false,
            max_iters,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let step = self.step_size;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::config("solver.step_size", "must be positive"));
        }
        if self.use_projection && step >= 0.25 {
            return Err(Error::config("solver.step_size", "projected variant requires step_size < 1/4"));
        }
        if !self.use_projection && step > 1.0 / 16.0 {
            return Err(Error::config("solver.step_size", "projection-free variant requires step_size <= 1/16"));
        }
        if !(self.weight_bound > 0.0) {
            return Err(Error::config("solver.weight_bound", "must be positive"));
        }
        if self.grad_tol.is_nan() || self.grad_tol < 0.0 {
            return Err(Error::config("solver.grad_tol", "must be >= 0"));
        }
        if self.record_stride == Some(0) {
            return Err(Error::config("solver.record_stride", "must be >= 1"));
        }
        Ok(())
    }

    fn stride(&self) -> usize {
        self.record_stride
            .unwrap_or_else(|| if self.max_iters <= 10_000 { 1 } else { self.max_iters.div_ceil(10_000) })
    }
}

/// Iterations after which the projected method has visited a point whose empirical
/// Chow gap is at most `8εW + 2ε²`: `⌈32W² / (4εW + ε²)⌉`.
pub fn projected_iteration_budget(weight_bound: f64, eps: f64) -> usize {
    let w = weight_bound;
    (32.0 * w * w / (4.0 * eps * w + eps * eps)).ceil() as usize
}

/// Iteration count for the projection-free variant under `μ`-strong convexity:
/// `⌈2 ln(9W/ε) / |ln(1 − μη/6)|⌉`.
pub fn strongly_convex_iteration_budget(weight_bound: f64, eps: f64, mu: f64, step_size: f64) -> usize {
    let contraction = (1.0 - mu * step_size / 6.0).ln().abs();
    (2.0 * (9.0 * weight_bound / eps).ln() / contraction).ceil() as usize
}

/// Recorded optimisation path.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub config: SolverConfig,
    pub activation: Activation,
    /// Recorded iterates, in iteration order.
    pub iterates: Vec<Vec<f64>>,
    /// Iteration number of each recorded iterate.
    pub iterations: Vec<usize>,
    /// In-sample gradient norm of each recorded iterate.
    pub grad_norms: Vec<f64>,
    pub final_model: LinearModel,
    /// Index into the recorded iterates of the current pick; in-sample argmin until a
    /// fresh-sample selection replaces it.
    pub selected_iter: usize,
    pub wall_time_ms: f64,
}

/// Serialized form of a trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceJson {
    pub config: SolverConfig,
    pub grad_norms: Vec<f64>,
    pub selected_iter: usize,
    pub final_w: Vec<f64>,
    pub wall_time_ms: f64,
}

impl TrainTrace {
    pub fn steps_taken(&self) -> usize {
        *self.iterations.last().expect("trace always holds the final iterate")
    }

    pub fn to_json(&self) -> TraceJson {
        TraceJson {
            config: self.config.clone(),
            grad_norms: self.grad_norms.clone(),
            selected_iter: self.selected_iter,
            final_w: self.final_model.w.clone(),
            wall_time_ms: self.wall_time_ms,
        }
    }

    pub fn model_at(&self, index: usize) -> LinearModel {
        LinearModel::new(self.iterates[index].clone(), self.activation)
    }
}

/// Gradient descent on the empirical surrogate loss from `w = 0`.
///
/// Each step is `w ← Π(w − η∇L̂(w))`, with `Π` the ball projection when enabled and the
/// identity otherwise. Runs for `max_iters` steps or until the gradient norm at the
/// current iterate is at most `grad_tol`. Iterates are recorded at the configured
/// stride; the final iterate and every iterate that sets a new gradient-norm minimum
/// are always recorded.
pub fn pgd_train(ds: &Dataset, activation: Activation, cfg: &SolverConfig) -> Result<TrainTrace> {
    cfg.validate()?;
    activation.validate()?;
    ds.require_nonempty()?;
    let start = Instant::now();
    let stride = cfg.stride();
    let mut w = vec![0.0; ds.dim()];
    let mut trace = TrainTrace {
        config: cfg.clone(),
        activation,
        iterates: Vec::new(),
        iterations: Vec::new(),
        grad_norms: Vec::new(),
        final_model: LinearModel::zero(ds.dim(), activation),
        selected_iter: 0,
        wall_time_ms: 0.0,
    };
    let mut best = f64::INFINITY;
    for t in 0..=cfg.max_iters {
        let model = LinearModel::new(w, activation);
        let g = surrogate_gradient(&model, ds)?;
        let gn = norm(&g);
        if !gn.is_finite() {
            return Err(Error::Numeric(format!("gradient diverged at iteration {t}")));
        }
        let last = t == cfg.max_iters || gn <= cfg.grad_tol;
        if t % stride == 0 || gn < best || last {
            if gn < best {
                trace.selected_iter = trace.iterates.len();
            }
            trace.iterates.push(model.w.clone());
            trace.iterations.push(t);
            trace.grad_norms.push(gn);
        }
        best = best.min(gn);
        if last {
            trace.final_model = model;
            break;
        }
        let mut next: Vec<f64> = model.w.iter().zip(&g).map(|(wi, gi)| wi - cfg.step_size * gi).collect();
        if cfg.use_projection {
            next = project_ball(&next, cfg.weight_bound);
        }
        w = next;
    }
    trace.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(trace)
}

/// Result of picking an iterate on a fresh sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Index into the trace's recorded iterates.
    pub index: usize,
    pub iteration: usize,
    pub fresh_grad_norm: f64,
    pub model: LinearModel,
}

/// Picks the recorded iterate with the smallest surrogate-gradient norm on `fresh`;
/// ties go to the earliest iterate.
pub fn select_min_gradient(trace: &TrainTrace, fresh: &Dataset) -> Result<Selection> {
    if trace.iterates.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut best: Option<(usize, f64)> = None;
    for i in 0..trace.iterates.len() {
        let gn = norm(&surrogate_gradient(&trace.model_at(i), fresh)?);
        if best.is_none_or(|(_, b)| gn < b) {
            best = Some((i, gn));
        }
    }
    let (index, fresh_grad_norm) = best.expect("non-empty trace");
    Ok(Selection {
        index,
        iteration: trace.iterations[index],
        fresh_grad_norm,
        model: trace.model_at(index),
    })
}
