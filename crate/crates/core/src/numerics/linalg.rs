use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{check_dim, Error, Result};

/// Relative singular-value cutoff used by the least-squares solver.
pub const RANK_TOL: f64 = 1e-10;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidSpec("matrix must have at least one row and column".into()));
        }
        check_dim(rows * cols, data.len())?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("matrix has non-finite entries".into()));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Mat::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| super::dot(self.row(i), v)).collect()
    }

    fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// Streaming least-squares solver.
///
/// Rows are folded into an upper-triangular factor `R` and the rotated right-hand side
/// `Qᵀb` with Givens rotations, so memory stays `O(n²)` regardless of the row count.
/// [`LeastSquares::solve`] returns the minimum-norm minimiser, truncating singular
/// values of `R` below [`RANK_TOL`] times the largest.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    n: usize,
    r: Vec<f64>,
    qtb: Vec<f64>,
    residual_sq: f64,
    rows: usize,
    scratch: Vec<f64>,
}

impl LeastSquares {
    pub fn new(n: usize) -> Self {
        LeastSquares {
            n,
            r: vec![0.0; n * n],
            qtb: vec![0.0; n],
            residual_sq: 0.0,
            rows: 0,
            scratch: vec![0.0; n],
        }
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn rows_seen(&self) -> usize {
        self.rows
    }

    pub fn push_row(&mut self, row: &[f64], y: f64) {
        let n = self.n;
        assert_eq!(row.len(), n, "row width does not match solver width");
        self.rows += 1;
        let a = &mut self.scratch;
        a.copy_from_slice(row);
        let mut rhs = y;
        for j in 0..n {
            let aj = a[j];
            if aj == 0.0 {
                continue;
            }
            let rjj = self.r[j * n + j];
            let h = rjj.hypot(aj);
            let c = rjj / h;
            let s = aj / h;
            self.r[j * n + j] = h;
            a[j] = 0.0;
            let rrow = &mut self.r[j * n + j + 1..(j + 1) * n];
            for (rk, ak) in rrow.iter_mut().zip(&mut a[j + 1..]) {
                let rv = *rk;
                let av = *ak;
                *rk = c * rv + s * av;
                *ak = c * av - s * rv;
            }
            let qv = self.qtb[j];
            self.qtb[j] = c * qv + s * rhs;
            rhs = c * rhs - s * qv;
        }
        self.residual_sq += rhs * rhs;
    }

    /// Squared residual norm of the least-squares fit (full-rank case).
    pub fn residual_sq(&self) -> f64 {
        self.residual_sq
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let r = DMatrix::from_row_slice(n, n, &self.r);
        let svd = SVD::new(r, true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        if smax == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let tol = RANK_TOL * smax;
        let rhs = DVector::from_column_slice(&self.qtb);
        let x = svd
            .solve(&rhs, tol)
            .map_err(|e| Error::Numeric(format!("least squares: {e}")))?;
        let out: Vec<f64> = x.iter().copied().collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("least squares produced non-finite coefficients".into()));
        }
        Ok(out)
    }
}

/// Minimum-norm solution of `min ‖Ax − b‖₂`.
pub fn least_squares(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    check_dim(a.rows(), b.len())?;
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidSpec("right-hand side has non-finite entries".into()));
    }
    let mut ls = LeastSquares::new(a.cols());
    for (i, &bi) in b.iter().enumerate() {
        ls.push_row(a.row(i), bi);
    }
    ls.solve()
}

/// Inverse square root of a symmetric positive-definite matrix.
pub fn sym_inv_sqrt(m: &Mat) -> Result<Mat> {
    check_dim(m.rows(), m.cols())?;
    let eig = SymmetricEigen::new(m.to_dmatrix());
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Numeric("matrix is not positive definite".into()));
    }
    let n = m.rows();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n)
                .map(|k| eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)] / eig.eigenvalues[k].sqrt())
                .sum();
            out.set(i, j, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gaussian_vec, norm, Rng};

    fn residual(a: &Mat, x: &[f64], b: &[f64]) -> Vec<f64> {
        a.mul_vec(x).iter().zip(b).map(|(p, y)| p - y).collect()
    }

    #[test]
    fn exact_fit() {
        let a = Mat::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let x = least_squares(&a, &[2.0, 4.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_min_norm() {
        let a = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let x = least_squares(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-14);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Mat::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(
            least_squares(&a, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    /// Independent oracle: solve the normal equations `AᵀA x = Aᵀb` by Gaussian elimination.
    fn normal_equations(a: &Mat, b: &[f64]) -> Vec<f64> {
        let n = a.cols();
        let mut g = vec![vec![0.0; n + 1]; n];
        for i in 0..a.rows() {
            let r = a.row(i);
            for p in 0..n {
                for q in 0..n {
                    g[p][q] += r[p] * r[q];
                }
                g[p][n] += r[p] * b[i];
            }
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| g[x][col].abs().total_cmp(&g[y][col].abs()))
                .unwrap();
            g.swap(col, piv);
            for row in 0..n {
                if row != col {
                    let f = g[row][col] / g[col][col];
                    for k in col..=n {
                        g[row][k] -= f * g[col][k];
                    }
                }
            }
        }
        (0..n).map(|i| g[i][n] / g[i][i]).collect()
    }

    fn gaussian_problem(seed: u64) -> (Mat, Vec<f64>) {
        let mut rng = Rng::new(seed);
        let rows: Vec<Vec<f64>> = (0..50).map(|_| gaussian_vec(&mut rng, 3)).collect();
        let a = Mat::from_rows(&rows).unwrap();
        let truth = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..50)
            .map(|i| crate::numerics::dot(a.row(i), &truth) + 0.1 * rng.gaussian())
            .collect();
        (a, b)
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let (a, b) = gaussian_problem(11);
        let x = least_squares(&a, &b).unwrap();
        let oracle = normal_equations(&a, &b);
        for (u, v) in x.iter().zip(&oracle) {
            assert!((u - v).abs() < 1e-8, "{u} vs {v}");
        }
        // residual orthogonal to the column space
        let res = residual(&a, &x, &b);
        for j in 0..3 {
            let col: Vec<f64> = (0..50).map(|i| a.get(i, j)).collect();
            let ip = crate::numerics::dot(&col, &res);
            assert!(ip.abs() < 1e-8 * norm(&col) * norm(&b));
        }
    }

    #[test]
    fn locally_optimal() {
        let (a, b) = gaussian_problem(12);
        let x = least_squares(&a, &b).unwrap();
        let best = norm(&residual(&a, &x, &b));
        let mut rng = Rng::new(99);
        for _ in 0..100 {
            let mut delta = gaussian_vec(&mut rng, 3);
            let s = 1e-3 / norm(&delta);
            delta.iter_mut().for_each(|v| *v *= s);
            let xp: Vec<f64> = x.iter().zip(&delta).map(|(u, d)| u + d).collect();
            assert!(best <= norm(&residual(&a, &xp, &b)));
        }
    }

    #[test]
    fn underdetermined_returns_min_norm() {
        // x0 + x1 = 2 has min-norm solution (1, 1)
        let a = Mat::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let x = least_squares(&a, &[2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_square_root() {
        let m = Mat::from_rows(&[vec![4.0, 0.0], vec![0.0, 9.0]]).unwrap();
        let s = sym_inv_sqrt(&m).unwrap();
        assert!((s.get(0, 0) - 0.5).abs() < 1e-14);
        assert!((s.get(1, 1) - 1.0 / 3.0).abs() < 1e-14);
        assert!(s.get(0, 1).abs() < 1e-14);
    }
}
