//! Convex surrogate loss for generalized linear models and its Chow-parameter view.
//!
//! For a non-decreasing 1-Lipschitz activation `σ` with anti-derivative `σ̃`, the
//! surrogate `L(w) = E[σ̃(⟨w,x⟩) − y⟨w,x⟩]` is convex and its gradient
//! `E[(σ(⟨w,x⟩) − y) x]` equals `χ^{σ_w} − χ`, the gap between the model's and the
//! labels' degree-1 Chow parameters.

mod probe;
mod solver;

pub use probe::{
    chow_learnability_probe, probe_pairs, strong_convexity_probe, PairRatios, ProbeOutcome,
    ProbeSpec,
};
pub use solver::{
    pgd_train, projected_iteration_budget, select_min_gradient, strongly_convex_iteration_budget,
    Selection, SolverConfig, TraceJson, TrainTrace,
};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{check_dim, Result};
use crate::numerics::{dist, dot, par};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
    LeakyRelu { alpha: f64 },
}

impl Activation {
    #[inline]
    pub fn eval(self, a: f64) -> f64 {
        match self {
            Activation::Relu => a.max(0.0),
            Activation::Identity => a,
            Activation::LeakyRelu { alpha } => {
                if a > 0.0 {
                    a
                } else {
                    alpha * a
                }
            }
        }
    }

    /// Anti-derivative with `σ̃(0) = 0`.
    #[inline]
    pub fn antiderivative(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    0.5 * a * a
                } else {
                    0.0
                }
            }
            Activation::Identity => 0.5 * a * a,
            Activation::LeakyRelu { alpha } => {
                if a > 0.0 {
                    0.5 * a * a
                } else {
                    0.5 * alpha * a * a
                }
            }
        }
    }

    pub fn validate(self) -> Result<()> {
        if let Activation::LeakyRelu { alpha } = self {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(crate::Error::InvalidSpec(format!(
                    "leaky relu slope {alpha} must lie in (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// `x ↦ σ(⟨w, x⟩)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub activation: Activation,
}

impl LinearModel {
    pub fn new(w: Vec<f64>, activation: Activation) -> Self {
        LinearModel { w, activation }
    }

    pub fn zero(d: usize, activation: Activation) -> Self {
        LinearModel {
            w: vec![0.0; d],
            activation,
        }
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.activation.eval(dot(&self.w, x))
    }

    fn check(&self, ds: &Dataset) -> Result<()> {
        ds.require_nonempty()?;
        check_dim(ds.dim(), self.w.len())
    }
}

/// Mean squared error `(1/m) Σ (σ(⟨w,xᵢ⟩) − yᵢ)²`.
pub fn square_loss(model: &LinearModel, ds: &Dataset) -> Result<f64> {
    model.check(ds)?;
    let s = par::sum(ds.len(), |i| {
        let r = model.predict(ds.x(i)) - ds.y(i);
        r * r
    });
    Ok(s / ds.len() as f64)
}

/// Empirical surrogate `(1/m) Σ (σ̃(⟨w,xᵢ⟩) − yᵢ⟨w,xᵢ⟩)`. Can be negative.
pub fn surrogate_loss(model: &LinearModel, ds: &Dataset) -> Result<f64> {
    model.check(ds)?;
    let act = model.activation;
    let s = par::sum(ds.len(), |i| {
        let z = dot(&model.w, ds.x(i));
        act.antiderivative(z) - ds.y(i) * z
    });
    Ok(s / ds.len() as f64)
}

/// `(1/m) Σ (σ(⟨w,xᵢ⟩) − yᵢ) xᵢ`.
pub fn surrogate_gradient(model: &LinearModel, ds: &Dataset) -> Result<Vec<f64>> {
    model.check(ds)?;
    let d = ds.dim();
    let mut g = par::sum_vec(ds.len(), d, |i, acc| {
        let x = ds.x(i);
        let r = model.predict(x) - ds.y(i);
        for (a, xj) in acc.iter_mut().zip(x) {
            *a += r * xj;
        }
    });
    let m = ds.len() as f64;
    g.iter_mut().for_each(|v| *v /= m);
    Ok(g)
}

/// Label Chow parameters `(1/m) Σ yᵢ xᵢ`.
pub fn chow_true(ds: &Dataset) -> Result<Vec<f64>> {
    ds.require_nonempty()?;
    let mut c = par::sum_vec(ds.len(), ds.dim(), |i, acc| {
        let y = ds.y(i);
        for (a, xj) in acc.iter_mut().zip(ds.x(i)) {
            *a += y * xj;
        }
    });
    let m = ds.len() as f64;
    c.iter_mut().for_each(|v| *v /= m);
    Ok(c)
}

/// Model Chow parameters `(1/m) Σ σ(⟨w,xᵢ⟩) xᵢ`.
pub fn chow_model(model: &LinearModel, ds: &Dataset) -> Result<Vec<f64>> {
    model.check(ds)?;
    let mut c = par::sum_vec(ds.len(), ds.dim(), |i, acc| {
        let x = ds.x(i);
        let p = model.predict(x);
        for (a, xj) in acc.iter_mut().zip(x) {
            *a += p * xj;
        }
    });
    let m = ds.len() as f64;
    c.iter_mut().for_each(|v| *v /= m);
    Ok(c)
}

pub fn chow_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    Ok(dist(a, b))
}

/// Squared `L²(D)` distance between two models on the sample: `(1/m) Σ (σ_u − σ_v)²`.
pub fn function_distance(u: &LinearModel, v: &LinearModel, ds: &Dataset) -> Result<f64> {
    u.check(ds)?;
    v.check(ds)?;
    let s = par::sum(ds.len(), |i| {
        let x = ds.x(i);
        let r = u.predict(x) - v.predict(x);
        r * r
    });
    Ok(s / ds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, LabelModel, MarginalSpec};
    use crate::numerics::{gaussian_vec, Rng};
    use proptest::prelude::*;

    const ACTS: [Activation; 3] = [
        Activation::Relu,
        Activation::Identity,
        Activation::LeakyRelu { alpha: 0.2 },
    ];

    fn ds1(samples: &[(f64, f64)]) -> Dataset {
        let s: Vec<(Vec<f64>, f64)> = samples.iter().map(|&(x, y)| (vec![x], y)).collect();
        Dataset::from_samples(1, &s).unwrap()
    }

    fn ds2(samples: &[([f64; 2], f64)]) -> Dataset {
        let s: Vec<(Vec<f64>, f64)> = samples.iter().map(|(x, y)| (x.to_vec(), *y)).collect();
        Dataset::from_samples(2, &s).unwrap()
    }

    fn random_instance(rng: &mut Rng, act: Activation) -> (LinearModel, Dataset) {
        let d = 1 + (rng.uniform() * 5.0) as usize;
        let m = 5 + (rng.uniform() * 40.0) as usize;
        let samples: Vec<(Vec<f64>, f64)> =
            (0..m).map(|_| (gaussian_vec(rng, d), rng.uniform())).collect();
        let w = gaussian_vec(rng, d);
        (LinearModel::new(w, act), Dataset::from_samples(d, &samples).unwrap())
    }

    #[test]
    fn square_loss_examples() {
        let zero_labels = ds1(&[(1.0, 0.0), (-2.0, 0.0)]);
        assert_eq!(square_loss(&LinearModel::zero(1, Activation::Relu), &zero_labels).unwrap(), 0.0);
        let e1 = LinearModel::new(vec![1.0], Activation::Relu);
        assert_eq!(square_loss(&e1, &ds1(&[(1.0, 1.0), (-1.0, 0.0)])).unwrap(), 0.0);
        assert_eq!(square_loss(&e1, &ds1(&[(2.0, 0.0)])).unwrap(), 4.0);
        assert!(square_loss(&LinearModel::zero(2, Activation::Relu), &zero_labels).is_err());
    }

    #[test]
    fn surrogate_loss_examples() {
        let mut rng = Rng::new(1);
        let (_, ds) = random_instance(&mut rng, Activation::Relu);
        let zero = LinearModel::zero(ds.dim(), Activation::Relu);
        assert_eq!(surrogate_loss(&zero, &ds).unwrap(), 0.0);
        let one = ds1(&[(1.0, 1.0)]);
        for c in [-1.0, 0.5, 1.0, 3.0] {
            let l = surrogate_loss(&LinearModel::new(vec![c], Activation::Identity), &one).unwrap();
            assert!((l - (0.5 * c * c - c)).abs() < 1e-15);
        }
        let l = surrogate_loss(&LinearModel::new(vec![2.0], Activation::Relu), &one).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn gradient_examples() {
        let ds = ds2(&[([1.0, 0.0], 1.0), ([-1.0, 0.0], 0.0)]);
        let g = surrogate_gradient(&LinearModel::zero(2, Activation::Relu), &ds).unwrap();
        assert_eq!(g, vec![-0.5, 0.0]);
        let g = surrogate_gradient(&LinearModel::new(vec![1.0, 0.0], Activation::Relu), &ds).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
        assert_eq!(chow_true(&ds).unwrap(), vec![0.5, 0.0]);
    }

    #[test]
    fn chow_examples() {
        let ds = ds2(&[([1.0, 3.0], 0.0), ([-1.0, 2.0], 0.0)]);
        assert_eq!(chow_true(&ds).unwrap(), vec![0.0, 0.0]);
        assert_eq!(chow_model(&LinearModel::zero(2, Activation::Relu), &ds).unwrap(), vec![0.0, 0.0]);
        assert_eq!(chow_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((chow_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            chow_distance(&[0.3, -1.0], &[2.0, 0.5]).unwrap(),
            chow_distance(&[2.0, 0.5], &[0.3, -1.0]).unwrap()
        );
        assert!(chow_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn chow_parameters_under_isotropy() {
        let d = 4;
        let w_star = [0.5, -0.3, 0.2, 0.1];
        let (ds, _) =
            generate(&MarginalSpec::gaussian(d), &LabelModel::clean(), &[0.0; 4], 1_000_000, &mut Rng::new(31))
                .unwrap();
        // identity labels y = ⟨w*, x⟩
        let ys: Vec<f64> = ds.iter().map(|(x, _)| dot(x, &w_star)).collect();
        let lin = Dataset::new(d, ds.features().to_vec(), ys).unwrap();
        for (c, w) in chow_true(&lin).unwrap().iter().zip(&w_star) {
            assert!((c - w).abs() < 0.01);
        }
        let ident = LinearModel::new(w_star.to_vec(), Activation::Identity);
        for (c, w) in chow_model(&ident, &ds).unwrap().iter().zip(&w_star) {
            assert!((c - w).abs() < 0.01);
        }
        // E[ReLU(x₁) x₁] = 1/2
        let relu = LinearModel::new(vec![1.0, 0.0, 0.0, 0.0], Activation::Relu);
        let c = chow_model(&relu, &ds).unwrap();
        assert!((c[0] - 0.5).abs() < 0.01);
        for v in &c[1..] {
            assert!(v.abs() < 0.01);
        }
    }

    #[test]
    fn gradient_equals_chow_gap() {
        let mut rng = Rng::new(2);
        for k in 0..200 {
            let (model, ds) = random_instance(&mut rng, ACTS[k % 3]);
            let g = surrogate_gradient(&model, &ds).unwrap();
            let cm = chow_model(&model, &ds).unwrap();
            let ct = chow_true(&ds).unwrap();
            for j in 0..g.len() {
                assert!((g[j] - (cm[j] - ct[j])).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Rng::new(3);
        let h = 1e-5;
        for k in 0..200 {
            let (model, ds) = random_instance(&mut rng, ACTS[k % 3]);
            let g = surrogate_gradient(&model, &ds).unwrap();
            for j in 0..g.len() {
                let mut plus = model.clone();
                plus.w[j] += h;
                let mut minus = model.clone();
                minus.w[j] -= h;
                let fd = (surrogate_loss(&plus, &ds).unwrap() - surrogate_loss(&minus, &ds).unwrap()) / (2.0 * h);
                assert!((fd - g[j]).abs() <= 1e-6, "coord {j}: {fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn surrogate_is_midpoint_convex() {
        let mut rng = Rng::new(4);
        for k in 0..1000 {
            let act = ACTS[k % 3];
            let (u, ds) = random_instance(&mut rng, act);
            let v = LinearModel::new(gaussian_vec(&mut rng, ds.dim()), act);
            let mid: Vec<f64> = u.w.iter().zip(&v.w).map(|(a, b)| 0.5 * (a + b)).collect();
            let lm = surrogate_loss(&LinearModel::new(mid, act), &ds).unwrap();
            let avg = 0.5 * (surrogate_loss(&u, &ds).unwrap() + surrogate_loss(&v, &ds).unwrap());
            assert!(lm <= avg + 1e-9);
        }
    }

    #[test]
    fn corollary_bound_on_whitened_data() {
        let mut rng = Rng::new(5);
        for _ in 0..50 {
            let (model, ds) = random_instance(&mut rng, Activation::Relu);
            if ds.len() <= ds.dim() + 1 {
                continue;
            }
            let Ok(white) = ds.whiten() else { continue };
            let gap = chow_distance(&chow_true(&white).unwrap(), &chow_model(&model, &white).unwrap()).unwrap();
            assert!(gap <= square_loss(&model, &white).unwrap().sqrt() + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn activations_are_monotone_and_lipschitz(a in -50f64..50.0, b in -50f64..50.0) {
            for act in ACTS {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let diff = act.eval(hi) - act.eval(lo);
                prop_assert!(diff >= 0.0 && diff <= hi - lo + 1e-12);
                prop_assert!((act.eval(a) - act.eval(b)) * (a - b) >= 0.0);
            }
        }

        #[test]
        fn antiderivative_matches_activation(a in -20f64..20.0) {
            let h = 1e-6;
            for act in ACTS {
                prop_assert_eq!(act.antiderivative(0.0), 0.0);
                let fd = (act.antiderivative(a + h) - act.antiderivative(a - h)) / (2.0 * h);
                prop_assert!((fd - act.eval(a)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn leaky_slope_validation() {
        assert!(Activation::LeakyRelu { alpha: 1.5 }.validate().is_err());
        assert!(Activation::LeakyRelu { alpha: 0.1 }.validate().is_ok());
    }
}
