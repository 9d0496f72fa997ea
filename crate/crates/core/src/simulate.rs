//! Synthetic samples from `y = ⟨φ, X⟩_W + ⟨ψ, X'⟩_L + ε` with a
//! Karhunen–Loève design for `X`.
//!
//! `Xᵢ = Σ_p √λ_p ξ_{ip} u_p` where `u_p` is the `p`-th `W`-orthonormal basis
//! direction and the scores `ξ` are i.i.d. uniform on `[−√3, √3]` (bounded,
//! unit variance). Noise is Gaussian. Random numbers come from ChaCha20
//! seeded with [`rand::SeedableRng::seed_from_u64`]; per observation the
//! draw order is the `ξ` scores in increasing `p`, then `ε` (drawn even when
//! `σ_ε = 0`), so a seed fixes the dataset bit for bit.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::basis::GramPair;
use crate::curves::{Curve, FunctionalDataset};
use crate::error::{FlrdError, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub n: usize,
    /// `λ_1 ≥ λ_2 ≥ … > 0`; at most the basis dimension.
    pub eigenvalues: Vec<f64>,
    pub true_phi: Curve,
    pub true_psi: Curve,
    pub sigma_eps: f64,
    pub seed: u64,
}

/// `λ_p = p^{-decay}` for `p = 1..=count`.
pub fn polynomial_spectrum(count: usize, decay: f64) -> Vec<f64> {
    (1..=count).map(|p| (p as f64).powf(-decay)).collect()
}

/// Truth pair whose `φ` has orthonormal coordinates `λ_p` along `u_p` and
/// whose `ψ` is half the derivative of that `φ`. Both are smoother than the
/// design, as the convergence rate requires.
pub fn smooth_truth(grams: &GramPair, eigenvalues: &[f64]) -> Result<(Curve, Curve)> {
    let deriv = grams.derivative()?;
    let k = grams.spec.k;
    if eigenvalues.len() > k {
        return Err(FlrdError::InvalidSpectrum(format!(
            "{} eigenvalues for a basis of dimension {k}",
            eigenvalues.len()
        )));
    }
    let mut z = DVector::<f64>::zeros(k);
    z.rows_mut(0, eigenvalues.len())
        .copy_from_slice(eigenvalues);
    let psi_orth = &deriv.d_orth * &z * 0.5;
    Ok((
        Curve::new(grams.spec, grams.ortho_w.from_orthonormal(&z))?,
        Curve::new(deriv.spec, deriv.ortho_l.from_orthonormal(&psi_orth))?,
    ))
}

fn validate(spec: &SyntheticSpec, grams: &GramPair) -> Result<()> {
    let k = grams.spec.k;
    let lam = &spec.eigenvalues;
    if lam.is_empty() {
        return Err(FlrdError::InvalidSpectrum("no eigenvalues".into()));
    }
    if lam.len() > k {
        return Err(FlrdError::InvalidSpectrum(format!(
            "{} eigenvalues for a basis of dimension {k}",
            lam.len()
        )));
    }
    if lam.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(FlrdError::InvalidSpectrum("eigenvalues must be strictly positive".into()));
    }
    if lam.windows(2).any(|w| w[1] > w[0]) {
        return Err(FlrdError::InvalidSpectrum("eigenvalues must be non-increasing".into()));
    }
    if !(spec.sigma_eps >= 0.0 && spec.sigma_eps.is_finite()) {
        return Err(FlrdError::InvalidSpectrum(format!(
            "noise level {} must be finite and non-negative",
            spec.sigma_eps
        )));
    }
    if spec.n == 0 {
        return Err(FlrdError::EmptyData);
    }
    let deriv = grams.derivative()?;
    for (c, s) in [(&spec.true_phi, grams.spec), (&spec.true_psi, deriv.spec)] {
        if c.spec() != s {
            return Err(FlrdError::BasisMismatch {
                expected: s,
                found: c.spec(),
            });
        }
    }
    Ok(())
}

/// Draws the dataset (uncentered) and the noiseless responses
/// `y*ᵢ = ⟨φ, Xᵢ⟩_W + ⟨ψ, X'ᵢ⟩_L`.
pub fn generate(spec: &SyntheticSpec, grams: &GramPair) -> Result<(FunctionalDataset, Vec<f64>)> {
    validate(spec, grams)?;
    let deriv = grams.derivative()?;
    let k = grams.spec.k;
    let phi = grams.ortho_w.to_orthonormal(spec.true_phi.coefficients());
    let psi = deriv.ortho_l.to_orthonormal(spec.true_psi.coefficients());
    // y* = zᵀ (φ + D*ψ) in orthonormal coordinates
    let theta = phi + deriv.d_orth.transpose() * psi;
    let scales: Vec<f64> = spec.eigenvalues.iter().map(|l| l.sqrt()).collect();

    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut curves = Vec::with_capacity(spec.n);
    let mut responses = Vec::with_capacity(spec.n);
    let mut oracle = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let mut z = DVector::<f64>::zeros(k);
        for (p, s) in scales.iter().enumerate() {
            let u: f64 = rng.random();
            z[p] = s * SQRT3 * (2.0 * u - 1.0);
        }
        let eps: f64 = rng.sample(StandardNormal);
        let y_star = z.dot(&theta);
        curves.push(Curve::new(grams.spec, grams.ortho_w.from_orthonormal(&z))?);
        oracle.push(y_star);
        responses.push(y_star + spec.sigma_eps * eps);
    }
    Ok((FunctionalDataset::new(curves, responses)?, oracle))
}
