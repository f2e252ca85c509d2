//! Small dense and banded linear algebra helpers.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let (mut values, _) = symmetric_eigen(m)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Unsorted eigenvalues and the matching unit eigenvectors (columns).
pub fn symmetric_eigen(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("symmetric eigendecomposition did not converge".into()))?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// A square tridiagonal matrix: `sub[i] = A[i+1][i]`, `diag[i] = A[i][i]`,
/// `sup[i] = A[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Entry `(i, j)`; zero off the three bands.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.sub[j]
        } else if i + 1 == j {
            self.sup[i]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting. Row
    /// swaps fill in one extra superdiagonal.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if b.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut dl = self.sub.clone();
        let mut d = self.diag.clone();
        let mut du = self.sup.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    return Err(singular(i));
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                x[i + 1] -= fact * x[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                du[i] = temp;
                let temp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = temp - fact * x[i + 1];
            }
            dl[i] = 0.0;
        }
        if d[n - 1] == 0.0 {
            return Err(singular(n - 1));
        }
        x[n - 1] /= d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(
                "tridiagonal solve produced non-finite values".into(),
            ));
        }
        Ok(x)
    }
}

fn singular(row: usize) -> Error {
    Error::Numeric(format!("singular linearization (zero pivot in row {row})"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_sorted() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, -1.0]);
        let e = sorted_eigenvalues(m).unwrap();
        let expected = [-1.0, 1.0, 3.0];
        for (a, b) in e.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn tridiagonal_matches_dense_lu() {
        // Zero diagonal entries force pivoting.
        let t = Tridiagonal {
            sub: vec![1.0, 3.0, -2.0, 0.5, 4.0],
            diag: vec![0.0, 1e-3, 2.0, 0.0, -1.0, 3.0],
            sup: vec![2.0, -1.0, 0.7, 1.5, 2.5],
        };
        let b = [1.0, -2.0, 0.5, 3.0, 0.0, 1.0];
        let x = t.solve(&b).unwrap();
        let dense = t
            .to_dense()
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&b))
            .unwrap();
        for (a, c) in x.iter().zip(dense.iter()) {
            assert!((a - c).abs() < 1e-12 * (1.0 + c.abs()), "{a} vs {c}");
        }
    }

    #[test]
    fn singular_system() {
        let t = Tridiagonal {
            sub: vec![1.0],
            diag: vec![1.0, 1.0],
            sup: vec![1.0],
        };
        assert!(matches!(t.solve(&[1.0, 2.0]), Err(Error::Numeric(_))));
    }
}
