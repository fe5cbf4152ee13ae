//! Synthetic datasets: isotropic marginals, ReLU teacher labels and adversarial
//! corruption, plus CSV persistence.

mod csvio;

pub use csvio::{meta_path, read_csv, write_csv};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{self, dot, norm, Mat, Rng};

/// Marginal distribution family. Every kind is isotropic: zero mean, identity covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalKind {
    /// Standard normal.
    Gaussian,
    /// Uniform on the ball of radius `√(d+2)`.
    UniformBallIsotropic,
    /// Independent Laplace coordinates with scale `1/√2`.
    LaplaceProductIsotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalSpec {
    pub kind: MarginalKind,
    pub d: usize,
}

impl MarginalSpec {
    pub fn new(kind: MarginalKind, d: usize) -> Self {
        MarginalSpec { kind, d }
    }

    pub fn gaussian(d: usize) -> Self {
        Self::new(MarginalKind::Gaussian, d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidSpec("marginal dimension must be positive".into()));
        }
        Ok(())
    }

    /// Draws one point into `out` (length `d`).
    pub fn sample_into(&self, rng: &mut Rng, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.d);
        match self.kind {
            MarginalKind::Gaussian => out.iter_mut().for_each(|v| *v = rng.gaussian()),
            MarginalKind::UniformBallIsotropic => {
                let d = self.d as f64;
                loop {
                    out.iter_mut().for_each(|v| *v = rng.gaussian());
                    let n = norm(out);
                    if n > 0.0 {
                        let radius = (d + 2.0).sqrt() * rng.uniform().powf(1.0 / d);
                        out.iter_mut().for_each(|v| *v *= radius / n);
                        break;
                    }
                }
            }
            MarginalKind::LaplaceProductIsotropic => {
                let scale = std::f64::consts::FRAC_1_SQRT_2;
                for v in out.iter_mut() {
                    let e = rng.exponential() * scale;
                    *v = if rng.coin() { -e } else { e };
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        let mut x = vec![0.0; self.d];
        self.sample_into(rng, &mut x);
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    /// `y = ReLU(⟨w*, x⟩)`.
    Clean,
    /// The `ρ·m` samples with largest `|⟨w*, x⟩|` are pushed by `b` toward the far end
    /// of the label range.
    BoundedAdditive,
    /// `y = 0` whenever `0 < ⟨w*, x⟩ < a`.
    ZeroingBand,
    /// Each sample is independently pushed by `b`, as in `BoundedAdditive`, with
    /// probability `ρ`.
    FractionAdversarial,
}

/// Range that corrupted labels are clamped into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRange {
    /// `[0, 1]`
    #[default]
    Unit,
    /// `[-1, 1]`
    Symmetric,
}

impl LabelRange {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            LabelRange::Unit => (0.0, 1.0),
            LabelRange::Symmetric => (-1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelModel {
    pub kind: LabelKind,
    /// Corruption fraction.
    #[serde(default)]
    pub rho: f64,
    /// Corruption magnitude.
    #[serde(default)]
    pub b: f64,
    /// Half-width of the zeroed band.
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub range: LabelRange,
}

impl LabelModel {
    pub fn clean() -> Self {
        LabelModel {
            kind: LabelKind::Clean,
            rho: 0.0,
            b: 0.0,
            a: 0.0,
            range: LabelRange::Unit,
        }
    }

    pub fn zeroing_band(a: f64) -> Self {
        LabelModel {
            kind: LabelKind::ZeroingBand,
            a,
            ..Self::clean()
        }
    }

    pub fn bounded_additive(rho: f64, b: f64) -> Self {
        LabelModel {
            kind: LabelKind::BoundedAdditive,
            rho,
            b,
            ..Self::clean()
        }
    }

    pub fn fraction_adversarial(rho: f64, b: f64) -> Self {
        LabelModel {
            kind: LabelKind::FractionAdversarial,
            rho,
            b,
            ..Self::clean()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidSpec(format!("corruption fraction {} not in [0, 1]", self.rho)));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidSpec(format!("corruption magnitude {} must be >= 0", self.b)));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidSpec(format!("band half-width {} must be >= 0", self.a)));
        }
        Ok(())
    }

    /// Pushes a clean value toward the end of the label range it is farthest from.
    fn push(&self, clean: f64) -> f64 {
        let (lo, hi) = self.range.bounds();
        let mid = 0.5 * (lo + hi);
        let shifted = if clean >= mid { clean - self.b } else { clean + self.b };
        shifted.clamp(lo, hi)
    }
}

/// Where a generated dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub marginal: MarginalSpec,
    pub labels: LabelModel,
    pub w_star: Vec<f64>,
    pub seed: u64,
}

/// Labelled samples stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    pub provenance: Option<Provenance>,
}

impl Dataset {
    pub fn new(d: usize, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("dataset dimension must be positive".into()));
        }
        check_dim(ys.len() * d, xs.len())?;
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("dataset contains non-finite values".into()));
        }
        Ok(Dataset {
            d,
            xs,
            ys,
            provenance: None,
        })
    }

    pub fn from_samples(d: usize, samples: &[(Vec<f64>, f64)]) -> Result<Self> {
        let mut xs = Vec::with_capacity(samples.len() * d);
        let mut ys = Vec::with_capacity(samples.len());
        for (x, y) in samples {
            check_dim(d, x.len())?;
            xs.extend_from_slice(x);
            ys.push(*y);
        }
        Dataset::new(d, xs, ys)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    #[inline]
    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn y(&self, i: usize) -> f64 {
        self.ys[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.ys
    }

    pub fn features(&self) -> &[f64] {
        &self.xs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.xs.chunks_exact(self.d).zip(self.ys.iter().copied())
    }

    /// Samples at `indices`, in that order. Provenance is dropped.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut xs = Vec::with_capacity(indices.len() * self.d);
        let mut ys = Vec::with_capacity(indices.len());
        for &i in indices {
            xs.extend_from_slice(self.x(i));
            ys.push(self.y(i));
        }
        Dataset {
            d: self.d,
            xs,
            ys,
            provenance: None,
        }
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::InvalidSpec("dataset has no samples".into()))
        } else {
            Ok(())
        }
    }

    /// Mean of `y²`, the square loss of the zero predictor.
    pub fn mean_sq_label(&self) -> f64 {
        self.ys.iter().map(|y| y * y).sum::<f64>() / self.len() as f64
    }

    /// Copy with features mapped through `Σ̂^{-1/2}`, where `Σ̂ = (1/m) Σ x xᵀ`,
    /// so the empirical second-moment matrix becomes the identity. Labels are kept.
    pub fn whiten(&self) -> Result<Dataset> {
        self.require_nonempty()?;
        let d = self.d;
        let m = self.len() as f64;
        let mut cov = Mat::zeros(d, d);
        let sums = numerics::par::sum_vec(self.len(), d * d, |i, acc| {
            let x = self.x(i);
            for p in 0..d {
                for q in 0..d {
                    acc[p * d + q] += x[p] * x[q];
                }
            }
        });
        for p in 0..d {
            for q in 0..d {
                cov.set(p, q, sums[p * d + q] / m);
            }
        }
        let s = numerics::sym_inv_sqrt(&cov)?;
        let mut xs = Vec::with_capacity(self.xs.len());
        for x in self.xs.chunks_exact(d) {
            xs.extend(s.mul_vec(x));
        }
        Ok(Dataset {
            d,
            xs,
            ys: self.ys.clone(),
            provenance: None,
        })
    }
}

/// Teacher vector and the teacher's empirical loss on the generated sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub w_star: Vec<f64>,
    pub opt_ref: f64,
}

#[inline]
fn relu(z: f64) -> f64 {
    z.max(0.0)
}

/// Samples `m` points from `marginal`, labels them with `ReLU(⟨w*, x⟩)` and applies the
/// corruption in `labels`.
///
/// All features are drawn before any corruption randomness, so changing the label
/// model never changes the features for a given stream.
pub fn generate(
    marginal: &MarginalSpec,
    labels: &LabelModel,
    w_star: &[f64],
    m: usize,
    rng: &mut Rng,
) -> Result<(Dataset, GroundTruth)> {
    marginal.validate()?;
    labels.validate()?;
    check_dim(marginal.d, w_star.len())?;
    if norm(w_star) > 1.0 + 1e-12 {
        return Err(Error::InvalidSpec(format!("‖w*‖ = {} exceeds 1", norm(w_star))));
    }
    if m == 0 {
        return Err(Error::InvalidSpec("sample count must be at least 1".into()));
    }
    let seed = rng.seed();
    let d = marginal.d;
    let mut xs = vec![0.0; m * d];
    for x in xs.chunks_exact_mut(d) {
        marginal.sample_into(rng, x);
    }
    let z: Vec<f64> = xs.chunks_exact(d).map(|x| dot(x, w_star)).collect();
    let clean: Vec<f64> = z.iter().map(|&v| relu(v)).collect();
    let mut ys = clean.clone();
    match labels.kind {
        LabelKind::Clean => {}
        LabelKind::ZeroingBand => {
            for (y, &v) in ys.iter_mut().zip(&z) {
                if v > 0.0 && v < labels.a {
                    *y = 0.0;
                }
            }
        }
        LabelKind::BoundedAdditive => {
            let count = (labels.rho * m as f64).round() as usize;
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| z[j].abs().total_cmp(&z[i].abs()).then(i.cmp(&j)));
            for &i in order.iter().take(count) {
                ys[i] = labels.push(clean[i]);
            }
        }
        LabelKind::FractionAdversarial => {
            for i in 0..m {
                if rng.bernoulli(labels.rho) {
                    ys[i] = labels.push(clean[i]);
                }
            }
        }
    }
    let opt_ref = clean
        .iter()
        .zip(&ys)
        .map(|(c, y)| (c - y) * (c - y))
        .sum::<f64>()
        / m as f64;
    let mut ds = Dataset::new(d, xs, ys)?;
    ds.provenance = Some(Provenance {
        marginal: *marginal,
        labels: *labels,
        w_star: w_star.to_vec(),
        seed,
    });
    Ok((
        ds,
        GroundTruth {
            w_star: w_star.to_vec(),
            opt_ref,
        },
    ))
}

/// Norm of the empirical mean and the largest absolute entry of `Σ̂ − I` for `m` draws.
pub fn isotropy_check(marginal: &MarginalSpec, m: usize, rng: &mut Rng) -> Result<(f64, f64)> {
    marginal.validate()?;
    let d = marginal.d;
    if m < 10 * d * d {
        return Err(Error::InvalidSpec(format!("isotropy check needs m >= 10·d² = {}", 10 * d * d)));
    }
    let mut mean = vec![0.0; d];
    let mut second = vec![0.0; d * d];
    let mut x = vec![0.0; d];
    for _ in 0..m {
        marginal.sample_into(rng, &mut x);
        for p in 0..d {
            mean[p] += x[p];
            for q in 0..d {
                second[p * d + q] += x[p] * x[q];
            }
        }
    }
    let mf = m as f64;
    mean.iter_mut().for_each(|v| *v /= mf);
    let mut dev: f64 = 0.0;
    for p in 0..d {
        for q in 0..d {
            let cov = second[p * d + q] / mf - mean[p] * mean[q];
            let target = if p == q { 1.0 } else { 0.0 };
            dev = dev.max((cov - target).abs());
        }
    }
    Ok((norm(&mean), dev))
}

/// Unit vector in a uniformly random direction.
pub fn random_unit(d: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let g = numerics::gaussian_vec(rng, d);
        let n = norm(&g);
        if n > 0.0 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}
