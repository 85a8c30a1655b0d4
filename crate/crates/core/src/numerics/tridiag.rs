use crate::measure::Grid;
use crate::{Error, Result};

/// The system `(I - lambda tau D2_N) x = b` on a cell-centered grid, where
/// `D2_N` is the three-point Laplacian closed by reflected ghost cells carrying
/// the boundary slopes `x'(0) = q0`, `x'(1) = q1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagSystem {
    cells: usize,
    h: f64,
    coupling: f64,
    q0: f64,
    q1: f64,
}

impl TridiagSystem {
    /// `lambda_tau` is the product `lambda * tau`; the coupling is
    /// `a = lambda_tau / h^2`.
    pub fn new(grid: Grid, lambda_tau: f64, q0: f64, q1: f64) -> Result<Self> {
        if !(lambda_tau.is_finite() && lambda_tau >= 0.0) {
            return Err(Error::param("lambda_tau", "must be finite and nonnegative"));
        }
        let h = grid.spacing();
        Ok(Self {
            cells: grid.len(),
            h,
            coupling: lambda_tau / (h * h),
            q0,
            q1,
        })
    }

    pub fn homogeneous(grid: Grid, lambda_tau: f64) -> Result<Self> {
        Self::new(grid, lambda_tau, 0.0, 0.0)
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn len(&self) -> usize {
        self.cells
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dense copy of the matrix (row-major), for checks.
    pub fn dense_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.cells;
        let a = self.coupling;
        let mut rows = vec![vec![0.0; m]; m];
        for (i, row) in rows.iter_mut().enumerate() {
            let mut diag = 1.0;
            if i > 0 {
                row[i - 1] = -a;
                diag += a;
            }
            if i + 1 < m {
                row[i + 1] = -a;
                diag += a;
            }
            row[i] = diag;
        }
        rows
    }

    /// Right-hand side with the boundary flux terms folded in.
    pub fn boundary_rhs(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = b.to_vec();
        let flux = self.coupling * self.h;
        rhs[0] -= flux * self.q0;
        rhs[self.cells - 1] += flux * self.q1;
        rhs
    }
}

/// Thomas algorithm for the symmetric, diagonally dominant system; O(M).
pub fn neumann_tridiag_solve(sys: &TridiagSystem, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != sys.cells {
        return Err(Error::LengthMismatch {
            expected: sys.cells,
            got: b.len(),
        });
    }
    let mut x = sys.boundary_rhs(b);
    let mut scratch = vec![0.0; sys.cells];
    solve_in_place(sys.coupling, &mut x, &mut scratch);
    Ok(x)
}

/// Solves the homogeneous-Neumann system in place; `scratch` holds the
/// modified super-diagonal.
pub(crate) fn solve_in_place(a: f64, d: &mut [f64], scratch: &mut [f64]) {
    let m = d.len();
    if a == 0.0 {
        return;
    }
    let diag = |i: usize| if i == 0 || i == m - 1 { 1.0 + a } else { 1.0 + 2.0 * a };
    let mut denom = diag(0);
    scratch[0] = -a / denom;
    d[0] /= denom;
    for i in 1..m {
        denom = diag(i) + a * scratch[i - 1];
        scratch[i] = -a / denom;
        d[i] = (d[i] + a * d[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        d[i] -= scratch[i] * d[i + 1];
    }
}

/// `(D2_N v)_i` with homogeneous reflected ghosts.
pub fn neumann_laplacian(v: &[f64], h: f64) -> Vec<f64> {
    let m = v.len();
    let inv = 1.0 / (h * h);
    (0..m)
        .map(|i| {
            let left = if i == 0 { v[0] } else { v[i - 1] };
            let right = if i + 1 == m { v[m - 1] } else { v[i + 1] };
            (left - 2.0 * v[i] + right) * inv
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn zero_coupling_is_identity() {
        let grid = Grid::new(5).unwrap();
        let sys = TridiagSystem::homogeneous(grid, 0.0).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        assert_eq!(neumann_tridiag_solve(&sys, &b).unwrap(), b);
    }

    #[test]
    fn constants_are_preserved() {
        let grid = Grid::new(50).unwrap();
        let sys = TridiagSystem::homogeneous(grid, 0.3).unwrap();
        let x = neumann_tridiag_solve(&sys, &vec![2.5; 50]).unwrap();
        assert!(x.iter().all(|v| (v - 2.5).abs() < 1e-13));
    }

    #[test]
    fn matches_dense_lu() {
        let grid = Grid::new(4).unwrap();
        let h = grid.spacing();
        let sys = TridiagSystem::homogeneous(grid, h * h).unwrap();
        assert_eq!(sys.coupling(), 1.0);
        let b = vec![0.0, 0.0, 1.0, 0.0];
        let x = neumann_tridiag_solve(&sys, &b).unwrap();
        let reference = dense_solve(sys.dense_matrix(), b);
        for (u, v) in x.iter().zip(&reference) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_is_consistent_with_matrix() {
        let grid = Grid::new(6).unwrap();
        let h = grid.spacing();
        let sys = TridiagSystem::homogeneous(grid, 0.01).unwrap();
        let v: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let lap = neumann_laplacian(&v, h);
        let dense = sys.dense_matrix();
        for i in 0..6 {
            let av: f64 = (0..6).map(|j| dense[i][j] * v[j]).sum();
            assert!((av - (v[i] - 0.01 * lap[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_length_mismatch() {
        let sys = TridiagSystem::homogeneous(Grid::new(3).unwrap(), 1.0).unwrap();
        assert!(neumann_tridiag_solve(&sys, &[1.0, 2.0]).is_err());
    }
}
