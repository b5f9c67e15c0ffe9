//! Minimal dense symmetric-matrix helpers (Cholesky factor, solves).

use crate::error::{DivError, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix,
/// stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    pub dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factor a row-major symmetric matrix. Fails on asymmetry or a
    /// non-positive pivot.
    pub fn factor(matrix: &[f64], dim: usize) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(DivError::Factorization(format!(
                "matrix length {} does not match dim {dim}",
                matrix.len()
            )));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = matrix[i * dim + j];
                let b = matrix[j * dim + i];
                if (a - b).abs() > 1e-10 * (1.0 + a.abs().max(b.abs())) {
                    return Err(DivError::Factorization(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let mut l = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut sum = matrix[i * dim + j];
                for k in 0..j {
                    sum -= l[i * dim + k] * l[j * dim + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(DivError::Factorization(format!(
                            "matrix not positive-definite (pivot {sum:.3e} at {i})"
                        )));
                    }
                    l[i * dim + j] = sum.sqrt();
                } else {
                    l[i * dim + j] = sum / l[j * dim + j];
                }
            }
        }
        Ok(Cholesky { dim, lower: l })
    }

    pub fn from_diagonal(vars: &[f64]) -> Result<Self> {
        let dim = vars.len();
        let mut l = vec![0.0; dim * dim];
        for (i, &v) in vars.iter().enumerate() {
            if v <= 0.0 || !v.is_finite() {
                return Err(DivError::Factorization(format!(
                    "diagonal variance {v:.3e} at {i} not positive"
                )));
            }
            l[i * dim + i] = v.sqrt();
        }
        Ok(Cholesky { dim, lower: l })
    }

    /// y = L z
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let mut s = 0.0;
            for k in 0..=i {
                s += self.lower[i * d + k] * z[k];
            }
            out[i] = s;
        }
    }

    /// Solves L w = v (forward substitution).
    pub fn solve_lower(&self, v: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let mut s = v[i];
            for k in 0..i {
                s -= self.lower[i * d + k] * out[k];
            }
            out[i] = s / self.lower[i * d + i];
        }
    }

    /// log det of the original matrix.
    pub fn log_det(&self) -> f64 {
        let d = self.dim;
        (0..d).map(|i| self.lower[i * d + i].ln()).sum::<f64>() * 2.0
    }

    /// v^T M^{-1} v via one triangular solve.
    pub fn inv_quadratic_form(&self, v: &[f64]) -> f64 {
        let mut w = vec![0.0; self.dim];
        self.solve_lower(v, &mut w);
        w.iter().map(|x| x * x).sum()
    }

    /// Solves M x = v for the original matrix M = L L^T.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut y = vec![0.0; d];
        self.solve_lower(v, &mut y);
        let mut x = vec![0.0; d];
        for i in (0..d).rev() {
            let mut s = y[i];
            for k in (i + 1)..d {
                s -= self.lower[k * d + i] * x[k];
            }
            x[i] = s / self.lower[i * d + i];
        }
        x
    }
}
