//! Localized refinement of a constant-factor ReLU fit.
//!
//! Around the direction `w` of a constant-factor solution the space is cut into three
//! slabs by the threshold `t = γ·√opt`:
//!
//! ```text
//!   T₋ = {⟨w,x⟩ < −t}      → 0
//!   T  = {|⟨w,x⟩| ≤ t}     → P(x), a degree-k polynomial fitted by least squares
//!   T₊ = {⟨w,x⟩ > t}       → ⟨w₊,x⟩, a linear least-squares fit
//! ```

mod monomial;

pub use monomial::{monomial_count, monomial_features, MonomialBasis, MultiPoly, Term, MAX_FEATURES};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{dot, norm, project_ball, LeastSquares};
use crate::surrogate::{square_loss, LinearModel};

/// Lower clamp applied to the estimated `opt`.
pub const OPT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PtasConfig {
    /// Target approximation slack `η ∈ (0, 1]`.
    pub eta_accuracy: f64,
    /// Band multiplier; defaults to `√ln(1/η)`.
    pub gamma: Option<f64>,
    /// Polynomial degree; defaults to `min(⌈1/η³⌉, degree_cap)`.
    pub degree: Option<usize>,
    pub degree_cap: usize,
    /// Known `opt`; estimated from the holdout set when absent.
    pub opt_estimate: Option<f64>,
    /// Statistical slack, echoed in reports.
    pub epsilon: f64,
    /// Radius the linear part is projected onto.
    pub plus_weight_bound: f64,
}

impl Default for PtasConfig {
    fn default() -> Self {
        PtasConfig {
            eta_accuracy: 0.5,
            gamma: None,
            degree: None,
            degree_cap: 12,
            opt_estimate: None,
            epsilon: 0.01,
            plus_weight_bound: 1.0,
        }
    }
}

impl PtasConfig {
    pub fn validate(&self) -> Result<()> {
        let eta = self.eta_accuracy;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::config("ptas.eta_accuracy", "must lie in (0, 1]"));
        }
        if self.degree_cap == 0 {
            return Err(Error::config("ptas.degree_cap", "must be >= 1"));
        }
        if self.degree == Some(0) {
            return Err(Error::config("ptas.degree", "must be >= 1"));
        }
        if let Some(o) = self.opt_estimate {
            if !(o > 0.0 && o.is_finite()) {
                return Err(Error::config("ptas.opt_estimate", "must be positive"));
            }
        }
        if !(self.plus_weight_bound > 0.0) {
            return Err(Error::config("ptas.plus_weight_bound", "must be positive"));
        }
        self.resolved_gamma().map(|_| ())
    }

    pub fn resolved_gamma(&self) -> Result<f64> {
        let g = self.gamma.unwrap_or_else(|| (1.0 / self.eta_accuracy).ln().sqrt());
        if g > 0.0 && !g.is_nan() {
            Ok(g)
        } else {
            Err(Error::config("ptas.gamma", format!("band multiplier {g} must be positive")))
        }
    }

    /// Degree actually used, and whether the cap cut it down.
    pub fn resolved_degree(&self) -> (usize, bool) {
        if let Some(k) = self.degree {
            return (k, false);
        }
        let raw = (self.eta_accuracy.powi(-3) - 1e-9).ceil().max(1.0);
        let cap = self.degree_cap as f64;
        if raw > cap {
            (self.degree_cap, true)
        } else {
            (raw as usize, false)
        }
    }
}

/// The three slabs around a direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Minus,
    Band,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPartition {
    pub w: Vec<f64>,
    pub t: f64,
}

impl RegionPartition {
    pub fn new(w: Vec<f64>, t: f64) -> Result<Self> {
        if norm(&w) == 0.0 {
            return Err(Error::ZeroDirection);
        }
        if !(t > 0.0) {
            return Err(Error::InvalidSpec(format!("band threshold {t} must be positive")));
        }
        Ok(RegionPartition { w, t })
    }

    /// The band is closed: `|⟨w,x⟩| = t` belongs to it.
    #[inline]
    pub fn classify(&self, x: &[f64]) -> Region {
        let z = dot(&self.w, x);
        if z > self.t {
            Region::Plus
        } else if z < -self.t {
            Region::Minus
        } else {
            Region::Band
        }
    }
}

/// Sample indices per slab, each in increasing order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionIndices {
    pub minus: Vec<usize>,
    pub band: Vec<usize>,
    pub plus: Vec<usize>,
}

pub fn partition(w: &[f64], t: f64, ds: &Dataset) -> Result<RegionIndices> {
    check_dim(ds.dim(), w.len())?;
    let p = RegionPartition::new(w.to_vec(), t)?;
    let mut out = RegionIndices::default();
    for i in 0..ds.len() {
        match p.classify(ds.x(i)) {
            Region::Minus => out.minus.push(i),
            Region::Band => out.band.push(i),
            Region::Plus => out.plus.push(i),
        }
    }
    Ok(out)
}

/// Holdout loss of the constant-factor model, floored at [`OPT_FLOOR`]. An `O(opt) + ε`
/// upper estimate of the best achievable ReLU loss.
pub fn estimate_opt(holdout: &Dataset, model: &LinearModel) -> Result<f64> {
    Ok(square_loss(model, holdout)?.max(OPT_FLOOR))
}

/// Least-squares polynomial fitted on the band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandFit {
    pub poly: MultiPoly,
    pub l1_norm: f64,
    /// `l1_norm ≤ 4^(k+1)`.
    pub l1_bound_ok: bool,
}

/// Regresses `y` on all monomials of total degree `≤ k` over the band samples.
///
/// Non-constant features are standardized with the band mean and standard deviation
/// before the solve and the coefficients are mapped back; features that are constant on
/// the band get a zero coefficient.
pub fn fit_band_poly(ds: &Dataset, idx_band: &[usize], k: usize) -> Result<BandFit> {
    if idx_band.is_empty() {
        return Err(Error::EmptyRegion("band"));
    }
    let basis = MonomialBasis::new(ds.dim(), k)?;
    let nf = basis.len();
    let nb = idx_band.len() as f64;
    let mut feat = vec![0.0; nf];

    let mut mean = vec![0.0; nf];
    for &i in idx_band {
        basis.fill(ds.x(i), &mut feat);
        for (m, f) in mean.iter_mut().zip(&feat) {
            *m += f;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nb);
    let mut var = vec![0.0; nf];
    for &i in idx_band {
        basis.fill(ds.x(i), &mut feat);
        for j in 0..nf {
            let c = feat[j] - mean[j];
            var[j] += c * c;
        }
    }
    let scale: Vec<f64> = var
        .iter()
        .zip(&mean)
        .enumerate()
        .map(|(j, (v, m))| {
            let sd = (v / nb).sqrt();
            if j == 0 || sd <= 1e-12 * (1.0 + m.abs()) {
                0.0
            } else {
                sd
            }
        })
        .collect();

    let mut ls = LeastSquares::new(nf);
    let mut z = vec![0.0; nf];
    for &i in idx_band {
        basis.fill(ds.x(i), &mut feat);
        z[0] = 1.0;
        for j in 1..nf {
            z[j] = if scale[j] > 0.0 { (feat[j] - mean[j]) / scale[j] } else { 0.0 };
        }
        ls.push_row(&z, ds.y(i));
    }
    let beta = ls.solve()?;
    let mut coeffs = vec![0.0; nf];
    coeffs[0] = beta[0];
    for j in 1..nf {
        if scale[j] > 0.0 {
            coeffs[j] = beta[j] / scale[j];
            coeffs[0] -= beta[j] * mean[j] / scale[j];
        }
    }
    let poly = MultiPoly::from_coeffs(&basis, coeffs);
    let l1_norm = poly.coeff_l1();
    Ok(BandFit {
        l1_bound_ok: l1_norm <= 4f64.powi(k as i32 + 1),
        poly,
        l1_norm,
    })
}

/// Unconstrained linear least squares of `y` on `x` (no intercept) over `indices`.
pub fn plus_region_least_squares(ds: &Dataset, indices: &[usize]) -> Result<Vec<f64>> {
    if indices.is_empty() {
        return Err(Error::EmptyRegion("plus"));
    }
    let mut ls = LeastSquares::new(ds.dim());
    for &i in indices {
        ls.push_row(ds.x(i), ds.y(i));
    }
    ls.solve()
}

/// [`plus_region_least_squares`] projected onto the ball of radius `radius`.
pub fn fit_plus_region(ds: &Dataset, idx_plus: &[usize], radius: f64) -> Result<Vec<f64>> {
    Ok(project_ball(&plus_region_least_squares(ds, idx_plus)?, radius))
}

/// Resolved parameters and anomalies of a refinement run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtasProvenance {
    pub config: PtasConfig,
    pub gamma: f64,
    pub degree: usize,
    pub degree_capped: bool,
    pub opt_used: f64,
    pub opt_estimated: bool,
    pub band_l1_norm: f64,
    pub band_l1_bound_ok: bool,
    pub train_counts: [usize; 3],
    pub notes: Vec<String>,
}

/// `h(x) = ⟨w₊,x⟩` on `T₊`, `P(x)` on `T`, `0` on `T₋`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseHypothesis {
    #[serde(flatten)]
    pub partition: RegionPartition,
    pub w_plus: Vec<f64>,
    pub band_poly: MultiPoly,
    pub provenance: PtasProvenance,
}

pub fn eval_piecewise(h: &PiecewiseHypothesis, x: &[f64]) -> Result<f64> {
    check_dim(h.partition.w.len(), x.len())?;
    Ok(match h.partition.classify(x) {
        Region::Minus => 0.0,
        Region::Band => h.band_poly.eval(x),
        Region::Plus => dot(&h.w_plus, x),
    })
}

/// Per-slab sample counts and mean square losses on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLosses {
    /// Minus, band, plus.
    pub counts: [usize; 3],
    /// Mean square loss within each slab; zero for an empty slab.
    pub losses: [f64; 3],
    /// Overall mean square loss.
    pub total: f64,
}

impl RegionLosses {
    /// `Σ (count_r / m)·loss_r`.
    pub fn weighted_total(&self) -> f64 {
        let m: usize = self.counts.iter().sum();
        self.counts
            .iter()
            .zip(&self.losses)
            .map(|(&c, &l)| c as f64 / m as f64 * l)
            .sum()
    }
}

pub fn region_losses(h: &PiecewiseHypothesis, ds: &Dataset) -> Result<RegionLosses> {
    ds.require_nonempty()?;
    check_dim(h.partition.w.len(), ds.dim())?;
    let mut counts = [0usize; 3];
    let mut sums = [0.0f64; 3];
    let mut total = 0.0;
    for (x, y) in ds.iter() {
        let r = match h.partition.classify(x) {
            Region::Minus => 0,
            Region::Band => 1,
            Region::Plus => 2,
        };
        let e = eval_piecewise(h, x)? - y;
        counts[r] += 1;
        sums[r] += e * e;
        total += e * e;
    }
    let mut losses = [0.0; 3];
    for r in 0..3 {
        if counts[r] > 0 {
            losses[r] = sums[r] / counts[r] as f64;
        }
    }
    Ok(RegionLosses {
        counts,
        losses,
        total: total / ds.len() as f64,
    })
}

pub fn piecewise_loss(h: &PiecewiseHypothesis, ds: &Dataset) -> Result<f64> {
    Ok(region_losses(h, ds)?.total)
}

/// Builds the three-piece hypothesis around `const_model`'s direction.
///
/// `opt` comes from `cfg.opt_estimate` or, when absent, from [`estimate_opt`] on
/// `holdout`. Empty slabs degrade as follows, each recorded in the provenance notes:
/// an empty `T₊` gives `w₊ = 0`, an empty `T₋` needs nothing, and an empty band gives
/// the zero polynomial so the hypothesis is two-piece.
pub fn ptas_train(
    train: &Dataset,
    holdout: &Dataset,
    cfg: &PtasConfig,
    const_model: &LinearModel,
) -> Result<PiecewiseHypothesis> {
    cfg.validate()?;
    train.require_nonempty()?;
    check_dim(train.dim(), const_model.w.len())?;
    let gamma = cfg.resolved_gamma()?;
    let (degree, degree_capped) = cfg.resolved_degree();
    let mut notes = Vec::new();
    if degree_capped {
        notes.push(format!("degree capped at {degree}"));
    }
    let (opt_used, opt_estimated) = match cfg.opt_estimate {
        Some(o) => (o, false),
        None => (estimate_opt(holdout, const_model)?, true),
    };
    let t = gamma * opt_used.sqrt();
    let idx = partition(&const_model.w, t, train)?;

    let (band_poly, band_l1_norm, band_l1_bound_ok) = if idx.band.is_empty() {
        notes.push("empty band: zero polynomial".into());
        (MultiPoly::zero(train.dim()), 0.0, true)
    } else {
        let fit = fit_band_poly(train, &idx.band, degree)?;
        (fit.poly, fit.l1_norm, fit.l1_bound_ok)
    };
    let w_plus = if idx.plus.is_empty() {
        notes.push("empty plus region: w_plus = 0".into());
        vec![0.0; train.dim()]
    } else {
        fit_plus_region(train, &idx.plus, cfg.plus_weight_bound)?
    };
    if idx.minus.is_empty() {
        notes.push("empty minus region".into());
    }

    Ok(PiecewiseHypothesis {
        partition: RegionPartition::new(const_model.w.clone(), t)?,
        w_plus,
        band_poly,
        provenance: PtasProvenance {
            config: cfg.clone(),
            gamma,
            degree,
            degree_capped,
            opt_used,
            opt_estimated,
            band_l1_norm,
            band_l1_bound_ok,
            train_counts: [idx.minus.len(), idx.band.len(), idx.plus.len()],
            notes,
        },
    })
}
