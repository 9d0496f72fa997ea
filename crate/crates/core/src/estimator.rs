//! The doubly penalized estimator of `(φ, ψ)`, the ridge FLR baseline,
//! prediction and the identifiability null space.

use nalgebra::{DMatrix, DVector};

use crate::basis::{BasisSpec, GramPair};
use crate::curves::{center, Curve, FunctionalDataset};
use crate::error::{check_penalty, FlrdError, Result};
use crate::linalg::{symmetrize, RegularizedFactor};
use crate::operators::{empirical_covariances, schur_systems};

/// Anything that maps a curve on its basis to a scalar prediction.
pub trait Predictor {
    fn spec(&self) -> BasisSpec;
    fn predict(&self, x: &Curve) -> Result<f64>;
}

/// Affine predictor `ŷ = ȳ + wᵀ(c − c̄)` over raw coefficients `c`.
#[derive(Debug, Clone, PartialEq)]
struct LinearForm {
    weights: Vec<f64>,
    mean_curve: Curve,
    mean_response: f64,
}

impl LinearForm {
    fn eval(&self, x: &Curve) -> Result<f64> {
        let centered = x.sub(&self.mean_curve).map_err(|_| FlrdError::BasisMismatch {
            expected: self.mean_curve.spec(),
            found: x.spec(),
        })?;
        let dot: f64 = self
            .weights
            .iter()
            .zip(centered.coefficients())
            .map(|(w, c)| w * c)
            .sum();
        Ok(self.mean_response + dot)
    }
}

/// Fitted `(φ̂, ψ̂)` with the penalties and training means.
#[derive(Debug, Clone, PartialEq)]
pub struct FlrdFit {
    phi_hat: Curve,
    psi_hat: Curve,
    alpha: f64,
    beta: f64,
    degenerate_design: bool,
    form: LinearForm,
}

impl FlrdFit {
    /// Assembles a fit from known components, e.g. when loading a model.
    pub fn from_parts(
        phi_hat: Curve,
        psi_hat: Curve,
        alpha: f64,
        beta: f64,
        mean_curve: Curve,
        mean_response: f64,
        grams: &GramPair,
    ) -> Result<Self> {
        check_penalty("alpha", alpha)?;
        check_penalty("beta", beta)?;
        let deriv = grams.derivative()?;
        for (c, spec) in [
            (&phi_hat, grams.spec),
            (&mean_curve, grams.spec),
            (&psi_hat, deriv.spec),
        ] {
            if c.spec() != spec {
                return Err(FlrdError::BasisMismatch {
                    expected: spec,
                    found: c.spec(),
                });
            }
        }
        if !mean_response.is_finite() {
            return Err(FlrdError::NonFinite("mean response"));
        }
        // ⟨φ, x⟩_W + ⟨ψ, Dx⟩_L = cᵀ (G_W φ + Dᵀ G_L' ψ)
        let w = &grams.g_w * phi_hat.coef_vector()
            + deriv.d_coef.transpose() * (&deriv.g_l * psi_hat.coef_vector());
        Ok(Self {
            phi_hat,
            psi_hat,
            alpha,
            beta,
            degenerate_design: false,
            form: LinearForm {
                weights: w.as_slice().to_vec(),
                mean_curve,
                mean_response,
            },
        })
    }

    pub fn phi_hat(&self) -> &Curve {
        &self.phi_hat
    }

    pub fn psi_hat(&self) -> &Curve {
        &self.psi_hat
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean_curve(&self) -> &Curve {
        &self.form.mean_curve
    }

    pub fn mean_response(&self) -> f64 {
        self.form.mean_response
    }

    /// True when every training curve coincided with the mean curve.
    pub fn degenerate_design(&self) -> bool {
        self.degenerate_design
    }

    /// Coefficient weights `w` of the predictor `ȳ + wᵀ(c − c̄)`.
    pub fn predictor_weights(&self) -> &[f64] {
        &self.form.weights
    }
}

impl Predictor for FlrdFit {
    fn spec(&self) -> BasisSpec {
        self.phi_hat.spec()
    }

    fn predict(&self, x: &Curve) -> Result<f64> {
        self.form.eval(x)
    }
}

fn centered_view(dataset: &FunctionalDataset) -> Result<FunctionalDataset> {
    if dataset.is_centered() {
        Ok(dataset.clone())
    } else {
        Ok(center(dataset)?.0)
    }
}

fn check_fit_inputs(dataset: &FunctionalDataset, grams: &GramPair) -> Result<()> {
    if dataset.len() < 2 {
        return Err(FlrdError::TooFewObservations {
            needed: 2,
            found: dataset.len(),
        });
    }
    if dataset.spec() != grams.spec {
        return Err(FlrdError::BasisMismatch {
            expected: grams.spec,
            found: dataset.spec(),
        });
    }
    Ok(())
}

fn is_degenerate(gamma: &DMatrix<f64>, mean: &Curve, grams: &GramPair) -> bool {
    let scale = grams.ortho_w.to_orthonormal(mean.coefficients()).norm_squared();
    gamma.trace() <= 1e-24 * scale.max(1.0)
}

/// `φ̂ = (S_φ + βI)⁻¹ u_φ`, `ψ̂ = (S_ψ + βI)⁻¹ u_ψ`. Uncentered input is
/// centered first; the removed means are kept for prediction.
pub fn fit_flrd(dataset: &FunctionalDataset, grams: &GramPair, alpha: f64, beta: f64) -> Result<FlrdFit> {
    check_penalty("alpha", alpha)?;
    check_penalty("beta", beta)?;
    check_fit_inputs(dataset, grams)?;
    let centered = centered_view(dataset)?;
    let cov = empirical_covariances(&centered, grams)?;
    let schur = schur_systems(&cov, alpha)?;

    let phi_orth = RegularizedFactor::new(&schur.s_phi, beta)?.solve(&schur.u_phi);
    let psi_orth = RegularizedFactor::new(&schur.s_psi, beta)?.solve(&schur.u_psi);
    let deriv = grams.derivative()?;
    let phi_hat = Curve::new(grams.spec, grams.ortho_w.from_orthonormal(&phi_orth))?;
    let psi_hat = Curve::new(deriv.spec, deriv.ortho_l.from_orthonormal(&psi_orth))?;

    let mut fit = FlrdFit::from_parts(
        phi_hat,
        psi_hat,
        alpha,
        beta,
        centered.mean_curve().clone(),
        centered.mean_response(),
        grams,
    )?;
    fit.degenerate_design = is_degenerate(&cov.gamma, centered.mean_curve(), grams);
    Ok(fit)
}

/// Ridge-penalized functional linear regression `y = ∫ x θ + ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFlrFit {
    theta_hat: Curve,
    beta: f64,
    form: LinearForm,
}

impl RidgeFlrFit {
    pub fn from_parts(
        theta_hat: Curve,
        beta: f64,
        mean_curve: Curve,
        mean_response: f64,
        grams: &GramPair,
    ) -> Result<Self> {
        check_penalty("beta", beta)?;
        for c in [&theta_hat, &mean_curve] {
            if c.spec() != grams.spec {
                return Err(FlrdError::BasisMismatch {
                    expected: grams.spec,
                    found: c.spec(),
                });
            }
        }
        let w = &grams.g_l * theta_hat.coef_vector();
        Ok(Self {
            theta_hat,
            beta,
            form: LinearForm {
                weights: w.as_slice().to_vec(),
                mean_curve,
                mean_response,
            },
        })
    }

    pub fn theta_hat(&self) -> &Curve {
        &self.theta_hat
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean_curve(&self) -> &Curve {
        &self.form.mean_curve
    }

    pub fn mean_response(&self) -> f64 {
        self.form.mean_response
    }
}

impl Predictor for RidgeFlrFit {
    fn spec(&self) -> BasisSpec {
        self.theta_hat.spec()
    }

    fn predict(&self, x: &Curve) -> Result<f64> {
        self.form.eval(x)
    }
}

/// `θ̂ = (Γ_n^L + βI)⁻¹ δ_n^L` with moments taken in the `L` inner product.
pub fn fit_flr_ridge(dataset: &FunctionalDataset, grams: &GramPair, beta: f64) -> Result<RidgeFlrFit> {
    check_penalty("beta", beta)?;
    check_fit_inputs(dataset, grams)?;
    let centered = centered_view(dataset)?;
    let n = centered.len();
    let k = grams.spec.k;
    let raw = DMatrix::from_fn(n, k, |i, j| centered.curves()[i].coefficients()[j]);
    let z = raw * grams.ortho_l0.r.transpose();
    let y = DVector::from_column_slice(centered.responses());
    let inv_n = 1.0 / n as f64;
    let gamma_l = symmetrize(&(z.tr_mul(&z) * inv_n));
    let delta_l = z.tr_mul(&y) * inv_n;
    let theta_orth = RegularizedFactor::new(&gamma_l, beta)?.solve(&delta_l);
    let theta_hat = Curve::new(grams.spec, grams.ortho_l0.from_orthonormal(&theta_orth))?;
    RidgeFlrFit::from_parts(
        theta_hat,
        beta,
        centered.mean_curve().clone(),
        centered.mean_response(),
        grams,
    )
}

/// `(1/m) Σ (yⱼ − ŷⱼ)²`.
pub fn mean_squared_error(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if truth.is_empty() {
        return Err(FlrdError::EmptyData);
    }
    if predictions.len() != truth.len() {
        return Err(FlrdError::LengthMismatch {
            what: "predictions",
            expected: truth.len(),
            found: predictions.len(),
        });
    }
    let sum: f64 = predictions
        .iter()
        .zip(truth)
        .map(|(p, y)| (y - p) * (y - p))
        .sum();
    Ok(sum / truth.len() as f64)
}

/// Predictions for every observation of `dataset`, in original coordinates.
pub fn predict_dataset<P: Predictor + ?Sized>(fit: &P, dataset: &FunctionalDataset) -> Result<Vec<f64>> {
    (0..dataset.len())
        .map(|i| fit.predict(&dataset.original(i)?.0))
        .collect()
}

/// Mean squared error of predictions on a validation set.
pub fn msep<P: Predictor + ?Sized>(fit: &P, validation: &FunctionalDataset) -> Result<f64> {
    if validation.is_empty() {
        return Err(FlrdError::EmptyData);
    }
    let predictions = predict_dataset(fit, validation)?;
    let truth = (0..validation.len())
        .map(|i| validation.original(i).map(|(_, y)| y))
        .collect::<Result<Vec<_>>>()?;
    mean_squared_error(&predictions, &truth)
}

/// `φ = −D*ψ`: the partner of `ψ` in the null space `φ + D*ψ = 0`, where
/// `D*` is the adjoint of differentiation between `W` and `L`.
pub fn make_unidentifiable(psi: &Curve, grams: &GramPair) -> Result<Curve> {
    let deriv = grams.derivative()?;
    if psi.spec() != deriv.spec {
        return Err(FlrdError::BasisMismatch {
            expected: deriv.spec,
            found: psi.spec(),
        });
    }
    let psi_orth = deriv.ortho_l.to_orthonormal(psi.coefficients());
    let phi_orth = -(deriv.d_orth.transpose() * psi_orth);
    Curve::new(grams.spec, grams.ortho_w.from_orthonormal(&phi_orth))
}
