//! Dense symmetric linear algebra shared by the basis and operator modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{FlrdError, Result};

/// Relative tolerance for positive semi-definiteness: eigenvalues down to
/// `-PSD_TOLERANCE * trace` are treated as zero.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// `(T + Tᵀ) / 2`.
pub fn symmetrize(t: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = t.clone();
    let n = s.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (t[(i, j)] + t[(j, i)]);
            s[(i, j)] = m;
            s[(j, i)] = m;
        }
    }
    s
}

/// Upper-triangular `R` with `Rᵀ R = G`.
///
/// Fails with the 1-based index of the first leading minor whose pivot is not
/// strictly positive.
pub fn cholesky_upper(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    assert_eq!(n, g.ncols(), "cholesky of a non-square matrix");
    let mut r = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = g[(j, j)];
        for p in 0..j {
            pivot -= r[(p, j)] * r[(p, j)];
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(FlrdError::SingularGram { minor: j + 1, pivot });
        }
        let d = pivot.sqrt();
        r[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = g[(j, i)];
            for p in 0..j {
                s -= r[(p, j)] * r[(p, i)];
            }
            r[(j, i)] = s / d;
        }
    }
    Ok(r)
}

/// Inverse of a nonsingular upper-triangular matrix.
pub fn upper_triangular_inverse(r: &DMatrix<f64>) -> DMatrix<f64> {
    let n = r.nrows();
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for col in 0..n {
        inv[(col, col)] = 1.0 / r[(col, col)];
        for i in (0..col).rev() {
            let mut s = 0.0;
            for p in (i + 1)..=col {
                s += r[(i, p)] * inv[(p, col)];
            }
            inv[(i, col)] = -s / r[(i, i)];
        }
    }
    inv
}

fn psd_tolerance(t: &DMatrix<f64>) -> f64 {
    PSD_TOLERANCE * t.trace().abs()
}

/// Symmetric eigendecomposition after explicit symmetrization. Errors when the
/// smallest eigenvalue falls below `-1e-8 * trace`.
pub fn psd_eigen(t: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let sym = symmetrize(t);
    let tolerance = psd_tolerance(&sym);
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min.is_nan() {
        return Err(FlrdError::NonFinite("eigendecomposition"));
    }
    if min < -tolerance {
        return Err(FlrdError::NotPsd {
            min_eigenvalue: min,
            tolerance,
        });
    }
    Ok(eig)
}

enum Factor {
    Cholesky(DMatrix<f64>),
    Spectral {
        vectors: DMatrix<f64>,
        inv_values: DVector<f64>,
    },
}

/// Factorization of `T + γI` for a symmetric positive semi-definite `T`.
///
/// Solves run a Cholesky solve followed by one step of iterative refinement.
/// If Cholesky breaks down (γ tiny against rounding in `T`), the factor falls
/// back to the eigendecomposition of `T` with negative eigenvalues clamped.
pub struct RegularizedFactor {
    shifted: DMatrix<f64>,
    factor: Factor,
}

impl RegularizedFactor {
    pub fn new(t: &DMatrix<f64>, gamma: f64) -> Result<Self> {
        crate::error::check_penalty("gamma", gamma)?;
        let sym = symmetrize(t);
        let mut shifted = sym.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += gamma;
        }
        let factor = match cholesky_upper(&shifted) {
            Ok(r) => Factor::Cholesky(r),
            Err(_) => {
                let eig = psd_eigen(&sym)?;
                let inv_values = eig.eigenvalues.map(|l| 1.0 / (l.max(0.0) + gamma));
                Factor::Spectral {
                    vectors: eig.eigenvectors,
                    inv_values,
                }
            }
        };
        Ok(Self { shifted, factor })
    }

    fn raw_solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.factor {
            Factor::Cholesky(r) => {
                let y = r
                    .tr_solve_upper_triangular(b)
                    .expect("cholesky factor has a positive diagonal");
                r.solve_upper_triangular(&y)
                    .expect("cholesky factor has a positive diagonal")
            }
            Factor::Spectral {
                vectors,
                inv_values,
            } => {
                let mut proj = vectors.transpose() * b;
                for (mut row, &s) in proj.row_iter_mut().zip(inv_values.iter()) {
                    row *= s;
                }
                vectors * proj
            }
        }
    }

    /// Solves `(T + γI) X = B`.
    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let x = self.raw_solve(b);
        match self.factor {
            Factor::Cholesky(_) => {
                let residual = b - &self.shifted * &x;
                x + self.raw_solve(&residual)
            }
            // the clamped spectral inverse is not the inverse of `shifted`
            Factor::Spectral { .. } => x,
        }
    }

    pub fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        let b = DMatrix::from_column_slice(v.len(), 1, v.as_slice());
        let x = self.solve_matrix(&b);
        DVector::from_column_slice(x.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reports_failing_minor() {
        let g = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 2.0, 1.0]);
        match cholesky_upper(&g) {
            Err(FlrdError::SingularGram { minor, .. }) => assert_eq!(minor, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn triangular_inverse_matches_identity() {
        let r = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, -1.0, 0.0, 3.0, 0.5, 0.0, 0.0, 0.25]);
        let inv = upper_triangular_inverse(&r);
        let prod = &r * &inv;
        assert!((prod - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn spectral_fallback_clamps_rounding_negatives() {
        // eigenvalue -1e-10 is within PSD tolerance but sinks T + γI below zero
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-10]));
        let f = RegularizedFactor::new(&t, 1e-11).unwrap();
        let w = f.solve(&DVector::from_vec(vec![1.0, 1.0]));
        assert!((w[0] - 1.0 / (1.0 + 1e-11)).abs() < 1e-12);
        assert!((w[1] - 1e11).abs() < 1e-1);
    }

    #[test]
    fn rejects_indefinite_beyond_tolerance() {
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        assert!(matches!(
            RegularizedFactor::new(&t, 0.1),
            Err(FlrdError::NotPsd { .. })
        ));
    }
}
