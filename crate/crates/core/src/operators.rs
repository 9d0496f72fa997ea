//! Empirical covariance operators, Tikhonov-regularized resolvents and the
//! Schur-complement systems of the doubly penalized estimator.
//!
//! Everything here works in orthonormal coordinates: a curve with raw
//! coefficients `c` on the `W` basis is represented by `z = R_W c`, its
//! derivative by `z' = R_L c'`. In these coordinates inner products are dot
//! products, the tensor product `u ⊗ v` is the matrix `v uᵀ`, and adjoints
//! are transposes.

use nalgebra::{DMatrix, DVector};

use crate::basis::GramPair;
use crate::curves::FunctionalDataset;
use crate::error::{check_penalty, FlrdError, Result};
use crate::linalg::{psd_eigen, symmetrize, RegularizedFactor};

/// Second moments of `(y, X, X')` for a centered sample.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    pub n: usize,
    /// `Γ_n` on `W`.
    pub gamma: DMatrix<f64>,
    /// `Γ'_n = (1/n) Σ X'_k ⊗_L X_k`, maps `L → W`.
    pub gamma_prime: DMatrix<f64>,
    /// `Γ'*_n = (1/n) Σ X_k ⊗_W X'_k`, maps `W → L`.
    pub gamma_prime_star: DMatrix<f64>,
    /// `Γ''_n` on `L`.
    pub gamma_prime_prime: DMatrix<f64>,
    pub delta: DVector<f64>,
    pub delta_prime: DVector<f64>,
}

/// Orthonormal coordinates of every curve and derivative in the sample,
/// one observation per row.
pub(crate) fn orthonormal_rows(
    dataset: &FunctionalDataset,
    grams: &GramPair,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if dataset.spec() != grams.spec {
        return Err(FlrdError::BasisMismatch {
            expected: grams.spec,
            found: dataset.spec(),
        });
    }
    let deriv = grams.derivative()?;
    let n = dataset.len();
    let kw = grams.spec.k;
    let kl = deriv.spec.k;
    let raw = DMatrix::from_fn(n, kw, |i, j| dataset.curves()[i].coefficients()[j]);
    let raw_d = DMatrix::from_fn(n, kl, |i, j| dataset.derivatives()[i].coefficients()[j]);
    let z = raw * grams.ortho_w.r.transpose();
    let zp = raw_d * deriv.ortho_l.r.transpose();
    Ok((z, zp))
}

/// Empirical counterparts `Γ_n, Γ'_n, Γ'*_n, Γ''_n, δ_n, δ'_n`, all
/// normalized by `1/n`.
pub fn empirical_covariances(dataset: &FunctionalDataset, grams: &GramPair) -> Result<CovarianceSet> {
    if !dataset.is_centered() {
        return Err(FlrdError::NotCentered);
    }
    let (z, zp) = orthonormal_rows(dataset, grams)?;
    let n = dataset.len();
    let inv_n = 1.0 / n as f64;
    let y = DVector::from_column_slice(dataset.responses());
    let gamma = symmetrize(&(z.tr_mul(&z) * inv_n));
    let gamma_prime = z.tr_mul(&zp) * inv_n;
    let gamma_prime_star = gamma_prime.transpose();
    let gamma_prime_prime = symmetrize(&(zp.tr_mul(&zp) * inv_n));
    let delta = z.tr_mul(&y) * inv_n;
    let delta_prime = zp.tr_mul(&y) * inv_n;
    Ok(CovarianceSet {
        n,
        gamma,
        gamma_prime,
        gamma_prime_star,
        gamma_prime_prime,
        delta,
        delta_prime,
    })
}

/// `w = (T + γI)⁻¹ v` for symmetric positive semi-definite `T`.
pub fn reg_inverse_apply(t: &DMatrix<f64>, gamma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
    check_penalty("gamma", gamma)?;
    psd_eigen(t)?;
    Ok(RegularizedFactor::new(t, gamma)?.solve(v))
}

/// The two Schur-complement systems at first penalty `alpha`.
#[derive(Debug, Clone)]
pub struct SchurSystem {
    pub alpha: f64,
    /// `Γ_n − Γ'_n (Γ''_n + αI)⁻¹ Γ'*_n`.
    pub s_phi: DMatrix<f64>,
    /// `δ_n − Γ'_n (Γ''_n + αI)⁻¹ δ'_n`.
    pub u_phi: DVector<f64>,
    /// `Γ''_n − Γ'*_n (Γ_n + αI)⁻¹ Γ'_n`.
    pub s_psi: DMatrix<f64>,
    /// `δ'_n − Γ'*_n (Γ_n + αI)⁻¹ δ_n`.
    pub u_psi: DVector<f64>,
}

fn append_column(m: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut out = DMatrix::<f64>::zeros(r, c + 1);
    out.columns_mut(0, c).copy_from(m);
    out.column_mut(c).copy_from(v);
    out
}

pub fn schur_systems(cov: &CovarianceSet, alpha: f64) -> Result<SchurSystem> {
    check_penalty("alpha", alpha)?;
    let kw = cov.gamma.nrows();
    let kl = cov.gamma_prime_prime.nrows();

    let resolvent_l = RegularizedFactor::new(&cov.gamma_prime_prime, alpha)?;
    let a = resolvent_l.solve_matrix(&append_column(&cov.gamma_prime_star, &cov.delta_prime));
    let s_phi = symmetrize(&(&cov.gamma - &cov.gamma_prime * a.columns(0, kw)));
    let u_phi = &cov.delta - &cov.gamma_prime * a.column(kw);

    let resolvent_w = RegularizedFactor::new(&cov.gamma, alpha)?;
    let b = resolvent_w.solve_matrix(&append_column(&cov.gamma_prime, &cov.delta));
    let s_psi = symmetrize(&(&cov.gamma_prime_prime - &cov.gamma_prime_star * b.columns(0, kl)));
    let u_psi = &cov.delta_prime - &cov.gamma_prime_star * b.column(kl);

    Ok(SchurSystem {
        alpha,
        s_phi,
        u_phi,
        s_psi,
        u_psi,
    })
}

/// Positive square root through the symmetric eigendecomposition, negative
/// rounding eigenvalues clamped to zero.
pub fn operator_sqrt(t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = psd_eigen(t)?;
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, &r) in scaled.column_iter_mut().zip(roots.iter()) {
        col *= r;
    }
    Ok(symmetrize(&(scaled * v.transpose())))
}

/// Operator norm `sup ‖Tx‖ / ‖x‖`: the largest singular value.
pub fn sup_norm(t: &DMatrix<f64>) -> f64 {
    if t.is_empty() {
        return 0.0;
    }
    t.singular_values().max()
}
