//! Univariate polynomial approximation of `ReLU` on `[-s, s]`.
//!
//! Two constructors are provided: truncated Chebyshev expansion and the minimax
//! polynomial computed by Remez exchange. Both are built on `[-1, 1]` and carried to
//! `[-s, s]` through the homogeneity `ReLU(t) = s·ReLU(t/s)`. Polynomials are handed
//! out in the monomial basis ([`UniPoly`]); the Chebyshev form ([`ChebSeries`]) is kept
//! alongside and stays accurate past degree ~20, where monomial evaluation does not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{least_squares, Mat};

pub const MAX_DEGREE: usize = 64;

/// Gauss–Chebyshev nodes used for the expansion coefficients.
pub const QUADRATURE_NODES: usize = 8192;

/// Points in the Remez reference grid on `[-1, 1]` (Chebyshev–Lobatto, odd so `0` is included).
pub const REMEZ_GRID: usize = 8193;

/// Anything that can be evaluated at a real point.
pub trait Univariate {
    fn eval(&self, t: f64) -> f64;
}

#[inline]
fn relu(t: f64) -> f64 {
    t.max(0.0)
}

/// `Σ coeffs[i]·tⁱ`. The degree is `coeffs.len() − 1` and is not trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "UniPolyJson", try_from = "UniPolyJson")]
pub struct UniPoly {
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct UniPolyJson {
    degree: usize,
    coeffs: Vec<f64>,
}

impl From<UniPoly> for UniPolyJson {
    fn from(p: UniPoly) -> Self {
        UniPolyJson {
            degree: p.degree(),
            coeffs: p.coeffs,
        }
    }
}

impl TryFrom<UniPolyJson> for UniPoly {
    type Error = String;

    fn try_from(j: UniPolyJson) -> std::result::Result<Self, String> {
        if j.coeffs.len() != j.degree + 1 {
            return Err(format!("degree {} needs {} coefficients, got {}", j.degree, j.degree + 1, j.coeffs.len()));
        }
        UniPoly::new(j.coeffs).map_err(|e| e.to_string())
    }
}

impl UniPoly {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSpec("polynomial needs at least one coefficient".into()));
        }
        Ok(UniPoly { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

impl Univariate for UniPoly {
    fn eval(&self, t: f64) -> f64 {
        eval_unipoly(self, t)
    }
}

/// Horner evaluation.
pub fn eval_unipoly(p: &UniPoly, t: f64) -> f64 {
    p.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// `Σ|aᵢ|`.
pub fn coeff_l1(p: &UniPoly) -> f64 {
    p.coeffs.iter().map(|c| c.abs()).sum()
}

/// `Σ coeffs[j]·T_j(t / half_width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebSeries {
    pub coeffs: Vec<f64>,
    pub half_width: f64,
}

impl ChebSeries {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Monomial coefficients in `t`.
    pub fn to_monomial(&self) -> UniPoly {
        let n = self.degree();
        // rows of T_j in the monomial basis of u
        let mut prev = vec![0.0; n + 1];
        let mut cur = vec![0.0; n + 1];
        let mut out = vec![0.0; n + 1];
        prev[0] = 1.0;
        out[0] += self.coeffs[0];
        if n >= 1 {
            cur[1] = 1.0;
            out[1] += self.coeffs[1];
        }
        for j in 2..=n {
            let mut next = vec![0.0; n + 1];
            for i in 0..n {
                next[i + 1] += 2.0 * cur[i];
            }
            for i in 0..=n {
                next[i] -= prev[i];
            }
            for i in 0..=n {
                out[i] += self.coeffs[j] * next[i];
            }
            prev = std::mem::replace(&mut cur, next);
        }
        let mut scale = 1.0;
        for c in out.iter_mut() {
            *c /= scale;
            scale *= self.half_width;
        }
        UniPoly { coeffs: out }
    }
}

impl Univariate for ChebSeries {
    /// Clenshaw recurrence.
    fn eval(&self, t: f64) -> f64 {
        let u = t / self.half_width;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        u * b1 - b2 + self.coeffs[0]
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSpec("degree must be at least 1".into()));
    }
    if n > MAX_DEGREE {
        return Err(Error::DegreeOverflow(n));
    }
    Ok(())
}

fn check_half_width(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidSpec(format!("half-width {s} must be positive")));
    }
    Ok(())
}

/// Degree-`n` truncated Chebyshev expansion of `ReLU` on `[-s, s]`.
pub fn chebyshev_relu_series(n: usize, s: f64) -> Result<ChebSeries> {
    check_degree(n)?;
    check_half_width(s)?;
    let nodes = QUADRATURE_NODES;
    let mut coeffs = vec![0.0; n + 1];
    for k in 0..nodes {
        let theta = std::f64::consts::PI * (k as f64 + 0.5) / nodes as f64;
        let f = relu(theta.cos());
        if f == 0.0 {
            continue;
        }
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c += f * (j as f64 * theta).cos();
        }
    }
    for (j, c) in coeffs.iter_mut().enumerate() {
        *c *= 2.0 / nodes as f64;
        if j == 0 {
            *c *= 0.5;
        }
        *c *= s;
    }
    Ok(ChebSeries { coeffs, half_width: s })
}

/// Monomial form of [`chebyshev_relu_series`].
pub fn chebyshev_relu_approx(n: usize, s: f64) -> Result<UniPoly> {
    Ok(chebyshev_relu_series(n, s)?.to_monomial())
}

/// Output of [`remez_relu_approx`].
#[derive(Debug, Clone, PartialEq)]
pub struct RemezApprox {
    pub poly: UniPoly,
    pub series: ChebSeries,
    /// Largest `|p − ReLU|` over the reference grid.
    pub achieved_error: f64,
    /// Length of the longest sign-alternating run of grid points whose error is
    /// within 5% of `achieved_error`.
    pub alternations: usize,
    pub iterations: usize,
}

fn lobatto_grid(g: usize) -> Vec<f64> {
    (0..g)
        .map(|i| {
            if 2 * i == g - 1 {
                0.0
            } else {
                -(std::f64::consts::PI * i as f64 / (g - 1) as f64).cos()
            }
        })
        .collect()
}

fn cheb_eval_unit(coeffs: &[f64], u: f64) -> f64 {
    ChebSeries {
        coeffs: coeffs.to_vec(),
        half_width: 1.0,
    }
    .eval(u)
}

/// Alternating extrema of `err` over the grid: one per maximal same-sign run.
fn alternating_extrema(err: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut last_sign = 0i8;
    for (i, &e) in err.iter().enumerate() {
        let sign = if e >= 0.0 { 1 } else { -1 };
        if sign != last_sign {
            out.push(i);
            last_sign = sign;
        } else {
            let cur = out.last_mut().expect("run started");
            if e.abs() > err[*cur].abs() {
                *cur = i;
            }
        }
    }
    out
}

/// Trims an alternating candidate set down to `keep` points, preserving alternation.
fn trim_reference(mut cand: Vec<usize>, err: &[f64], keep: usize) -> Vec<usize> {
    while cand.len() > keep {
        let k = cand.len();
        if k == keep + 1 {
            if err[cand[0]].abs() < err[cand[k - 1]].abs() {
                cand.remove(0);
            } else {
                cand.pop();
            }
            continue;
        }
        let i = (0..k)
            .min_by(|&a, &b| err[cand[a]].abs().total_cmp(&err[cand[b]].abs()))
            .expect("non-empty");
        if i == 0 || i == k - 1 {
            cand.remove(i);
        } else {
            let nb = if err[cand[i - 1]].abs() < err[cand[i + 1]].abs() { i - 1 } else { i + 1 };
            let (lo, hi) = if nb < i { (nb, i) } else { (i, nb) };
            cand.remove(hi);
            cand.remove(lo);
        }
    }
    cand
}

fn count_alternations(err: &[f64], level: f64) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for &e in err {
        if e.abs() >= level {
            let sign = if e > 0.0 { 1 } else { -1 };
            if sign != last {
                count += 1;
                last = sign;
            }
        }
    }
    count
}

/// Minimax degree-`n` approximation of `ReLU` on `[-s, s]` by discrete Remez exchange.
pub fn remez_relu_approx(n: usize, s: f64, iters: usize) -> Result<RemezApprox> {
    check_degree(n)?;
    check_half_width(s)?;
    if iters < 10 {
        return Err(Error::InvalidSpec("remez needs at least 10 iterations".into()));
    }
    let grid = lobatto_grid(REMEZ_GRID);
    let target: Vec<f64> = grid.iter().map(|&u| relu(u)).collect();
    let npts = n + 2;
    let mut reference: Vec<usize> = (0..npts)
        .map(|j| {
            let u = -(std::f64::consts::PI * j as f64 / (npts - 1) as f64).cos();
            let pos = grid.partition_point(|&g| g < u);
            pos.min(grid.len() - 1)
        })
        .collect();
    reference.dedup();
    if reference.len() != npts {
        return Err(Error::NoConvergence("initial reference collapsed".into()));
    }

    let mut best: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    let mut iterations = 0;
    for it in 0..iters {
        iterations = it + 1;
        let mut rows = Vec::with_capacity(npts * npts);
        for (r, &gi) in reference.iter().enumerate() {
            let u = grid[gi];
            let (mut t0, mut t1) = (1.0, u);
            for j in 0..=n {
                let tj = match j {
                    0 => 1.0,
                    1 => u,
                    _ => {
                        let t2 = 2.0 * u * t1 - t0;
                        t0 = t1;
                        t1 = t2;
                        t2
                    }
                };
                rows.push(tj);
            }
            rows.push(if r % 2 == 0 { 1.0 } else { -1.0 });
        }
        let m = Mat::new(npts, npts, rows)?;
        let rhs: Vec<f64> = reference.iter().map(|&gi| target[gi]).collect();
        let sol = least_squares(&m, &rhs)?;
        let coeffs = sol[..=n].to_vec();
        let level = sol[n + 1].abs();
        let err: Vec<f64> = grid
            .iter()
            .zip(&target)
            .map(|(&u, &f)| cheb_eval_unit(&coeffs, u) - f)
            .collect();
        let max_err = err.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        if best.as_ref().is_none_or(|(_, b, _)| max_err < *b) {
            best = Some((coeffs, max_err, err.clone()));
        }
        if max_err - level <= 1e-12 * max_err.max(f64::MIN_POSITIVE) {
            break;
        }
        let cand = alternating_extrema(&err);
        if cand.len() < npts {
            break;
        }
        let next = trim_reference(cand, &err, npts);
        if next == reference {
            break;
        }
        reference = next;
    }

    let (coeffs, max_err, err) = best.expect("at least one iteration");
    let alternations = count_alternations(&err, 0.95 * max_err);
    if alternations < npts {
        return Err(Error::NoConvergence(format!(
            "degree {n}: {alternations} alternations after {iterations} iterations, need {npts}"
        )));
    }
    let series = ChebSeries {
        coeffs: coeffs.iter().map(|c| c * s).collect(),
        half_width: s,
    };
    Ok(RemezApprox {
        poly: series.to_monomial(),
        series,
        achieved_error: max_err * s,
        alternations,
        iterations,
    })
}

/// `max |p(t) − ReLU(t)|` over `grid` uniformly spaced points of `[-s, s]`.
pub fn sup_error_grid(p: &impl Univariate, s: f64, grid: usize) -> f64 {
    assert!(grid >= 1000, "grid must have at least 1000 points");
    (0..grid)
        .map(|i| {
            let t = -s + 2.0 * s * i as f64 / (grid - 1) as f64;
            (p.eval(t) - relu(t)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn poly(c: &[f64]) -> UniPoly {
        UniPoly::new(c.to_vec()).unwrap()
    }

    #[test]
    fn horner() {
        assert_eq!(eval_unipoly(&poly(&[0.0, 1.0]), 3.0), 3.0);
        assert_eq!(eval_unipoly(&poly(&[1.0]), -7.5), 1.0);
        assert_eq!(eval_unipoly(&poly(&[0.25, 0.5]), -1.0), -0.25);
    }

    #[test]
    fn sup_error_examples() {
        assert_eq!(sup_error_grid(&poly(&[0.0, 1.0]), 1.0, 1001), 1.0);
        assert!((sup_error_grid(&poly(&[0.25, 0.5]), 1.0, 1001) - 0.25).abs() < 1e-15);
        assert_eq!(sup_error_grid(&poly(&[0.0]), 1.0, 1001), 1.0);
    }

    #[test]
    fn l1_norm() {
        assert_eq!(coeff_l1(&poly(&[0.25, 0.5])), 0.75);
        assert_eq!(coeff_l1(&poly(&[0.0])), 0.0);
        assert_eq!(coeff_l1(&poly(&[-1.0, 2.0, -3.0])), 6.0);
    }

    /// Chebyshev coefficient by adaptive-free composite Simpson on θ, split at the kink.
    fn cheb_coeff_oracle(j: usize) -> f64 {
        let n = 20_000;
        let h = (PI / 2.0) / n as f64;
        let f = |th: f64| th.cos() * (j as f64 * th).cos();
        let mut s = f(0.0) + f(PI / 2.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let integral = s * h / 3.0;
        if j == 0 {
            integral / PI
        } else {
            2.0 * integral / PI
        }
    }

    #[test]
    fn chebyshev_degree_one() {
        let p = chebyshev_relu_approx(1, 1.0).unwrap();
        let (c0, c1) = (cheb_coeff_oracle(0), cheb_coeff_oracle(1));
        assert!((c0 - 1.0 / PI).abs() < 1e-10 && (c1 - 0.5).abs() < 1e-10);
        assert!((p.coeffs()[0] - c0).abs() < 1e-8);
        assert!((p.coeffs()[1] - c1).abs() < 1e-8);
    }

    #[test]
    fn chebyshev_coefficients_match_quadrature_oracle() {
        let series = chebyshev_relu_series(12, 1.0).unwrap();
        for j in 0..=12 {
            assert!((series.coeffs[j] - cheb_coeff_oracle(j)).abs() < 1e-8, "coefficient {j}");
        }
    }

    #[test]
    fn chebyshev_improves_with_degree() {
        let e8 = sup_error_grid(&chebyshev_relu_series(8, 1.0).unwrap(), 1.0, 4001);
        let e16 = sup_error_grid(&chebyshev_relu_series(16, 1.0).unwrap(), 1.0, 4001);
        assert!(e16 <= e8);
    }

    #[test]
    fn chebyshev_homogeneity() {
        let s = 2.5;
        let ps = chebyshev_relu_approx(6, s).unwrap();
        let p1 = chebyshev_relu_approx(6, 1.0).unwrap();
        for i in 0..=20 {
            let t = -1.0 + 0.1 * i as f64;
            assert!((eval_unipoly(&ps, s * t) - s * eval_unipoly(&p1, t)).abs() < 1e-10);
        }
    }

    #[test]
    fn monomial_conversion_agrees_with_clenshaw() {
        let series = chebyshev_relu_series(10, 0.7).unwrap();
        let mono = series.to_monomial();
        for i in 0..=40 {
            let t = -0.7 + 0.035 * i as f64;
            assert!((series.eval(t) - mono.eval(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn remez_degree_one_is_classical() {
        let r = remez_relu_approx(1, 1.0, 20).unwrap();
        assert!((r.achieved_error - 0.25).abs() < 1e-12);
        let c = r.poly.coeffs();
        assert!((c[0] - 0.25).abs() < 1e-12 && (c[1] - 0.5).abs() < 1e-12);
        assert!(r.alternations >= 3);
    }

    #[test]
    fn remez_degree_two_beats_linear() {
        let r = remez_relu_approx(2, 1.0, 50).unwrap();
        assert!(r.achieved_error < 0.25);
    }

    #[test]
    fn remez_dominates_truncation_and_scales() {
        for n in [3, 6, 10, 17] {
            let r1 = remez_relu_approx(n, 1.0, 100).unwrap();
            let cheb = sup_error_grid(&chebyshev_relu_series(n, 1.0).unwrap(), 1.0, 20_001);
            assert!(r1.achieved_error <= cheb + 1e-9, "n={n}");
            let r3 = remez_relu_approx(n, 3.0, 100).unwrap();
            assert!((r3.achieved_error - 3.0 * r1.achieved_error).abs() <= 1e-8 * r3.achieved_error);
            assert!(r1.alternations >= n + 2);
        }
    }

    #[test]
    fn rate_and_growth_bounds() {
        for n in [4, 5, 8, 13, 16, 24, 32, 48, 64] {
            let s = 1.5;
            let r = remez_relu_approx(n, s, 100).unwrap();
            assert!(r.achieved_error <= 3.0 * s / n as f64, "n={n}");
            for i in 1..=300 {
                let t = s + 3.0 * s * i as f64 / 300.0;
                for t in [t, -t] {
                    let e = (r.series.eval(t) - relu(t)).abs();
                    let bound = 2.0 * r.achieved_error * (2.0 * t.abs() / s).powi(n as i32);
                    assert!(e <= bound, "n={n} t={t}: {e} > {bound}");
                }
            }
        }
    }

    #[test]
    fn sherstov_l1_bound() {
        for n in 1..=16 {
            let r = remez_relu_approx(n, 1.0, 100).unwrap();
            assert!(coeff_l1(&r.poly) <= 4f64.powi(n as i32) * (1.0 + r.achieved_error), "n={n}");
        }
    }

    #[test]
    fn degree_guards() {
        assert!(matches!(chebyshev_relu_approx(65, 1.0), Err(Error::DegreeOverflow(65))));
        assert!(matches!(remez_relu_approx(70, 1.0, 20), Err(Error::DegreeOverflow(70))));
        assert!(remez_relu_approx(3, 1.0, 5).is_err());
        assert!(chebyshev_relu_approx(0, 1.0).is_err());
    }

    #[test]
    fn json_shape() {
        let v = serde_json::to_value(poly(&[0.25, 0.5])).unwrap();
        assert_eq!(v, serde_json::json!({"degree": 1, "coeffs": [0.25, 0.5]}));
        let back: UniPoly = serde_json::from_value(v).unwrap();
        assert_eq!(back, poly(&[0.25, 0.5]));
        assert!(serde_json::from_value::<UniPoly>(serde_json::json!({"degree": 3, "coeffs": [1.0]})).is_err());
    }
}
