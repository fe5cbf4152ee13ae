//! Linear-algebra, sampling and reduction primitives shared by the solvers.

mod linalg;
pub mod par;
mod rng;

pub use linalg::{
    least_squares, sym_inv_sqrt, LeastSquares, Mat, RANK_TOL,
};
pub use rng::Rng;

/// Inner product of two equal-length slices.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
#[inline]
pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `‖a − b‖₂`.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean projection onto the closed ball of radius `radius` centred at the origin.
///
/// Points already inside are returned unchanged. Points outside are rescaled onto the
/// sphere; the scale is nudged down until the recomputed norm is at most `radius`, so a
/// second projection is a bit-exact no-op.
pub fn project_ball(v: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius > 0.0, "ball radius must be positive");
    let n = norm(v);
    if n <= radius {
        return v.to_vec();
    }
    let mut scale = radius / n;
    loop {
        let out: Vec<f64> = v.iter().map(|x| x * scale).collect();
        if norm(&out) <= radius {
            return out;
        }
        scale *= 1.0 - f64::EPSILON;
    }
}

/// A standard-normal vector of length `d`.
pub fn gaussian_vec(rng: &mut Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gaussian()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::Rng;
    use proptest::prelude::*;

    #[test]
    fn project_inside_boundary_and_outside() {
        assert_eq!(project_ball(&[3.0, 4.0], 10.0), vec![3.0, 4.0]);
        assert_eq!(project_ball(&[3.0, 4.0], 5.0), vec![3.0, 4.0]);
        assert_eq!(project_ball(&[3.0, 4.0], 2.5), vec![1.5, 2.0]);
    }

    #[test]
    fn gaussian_stream_is_reproducible() {
        let mut a = Rng::new(42);
        let first = gaussian_vec(&mut a, 3);
        let second = gaussian_vec(&mut a, 3);
        assert_ne!(first, second);
        let mut b = Rng::new(42);
        assert_eq!(gaussian_vec(&mut b, 3), first);
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::new(2024);
        let n = 1_000_000;
        let d = 3;
        let mut sum = vec![0.0; d];
        let mut sq = vec![0.0; d];
        for _ in 0..n {
            let g = gaussian_vec(&mut rng, d);
            for j in 0..d {
                sum[j] += g[j];
                sq[j] += g[j] * g[j];
            }
        }
        for j in 0..d {
            let mean = sum[j] / n as f64;
            let var = sq[j] / n as f64 - mean * mean;
            assert!(mean.abs() < 0.01, "mean {mean}");
            assert!((0.99..1.01).contains(&var), "var {var}");
        }
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_idempotent(
            v in prop::collection::vec(-1e3f64..1e3, 1..12),
            radius in 1e-3f64..50.0,
        ) {
            let p = project_ball(&v, radius);
            prop_assert!(norm(&p) <= radius + 1e-12);
            let pp = project_ball(&p, radius);
            prop_assert_eq!(p, pp);
        }
    }
}
