//! Functional linear regression with derivatives.
//!
//! A scalar response is regressed on a curve `X` and its derivative `X'`:
//!
//! ```text
//! y = ⟨φ, X⟩_W + ⟨ψ, X'⟩_L + ε
//! ```
//!
//! where `⟨u, v⟩_L = ∫ uv` and `⟨u, v⟩_W = ∫ uv + ∫ u'v'` on the unit
//! interval. Curves are represented on clamped B-spline bases; `(φ, ψ)` is
//! estimated from the empirical moment equations with two Tikhonov
//! penalties: `α` inside the Schur complements, `β` on the outer solve.
//!
//! Module map:
//! - [`basis`]: B-spline bases, derivative maps, Gram matrices.
//! - [`curves`]: smoothing, differentiation, inner products, centering.
//! - [`operators`]: covariance operators, resolvents, Schur systems.
//! - [`estimator`]: the fit, the ridge baseline, prediction, null space.
//! - [`selection`]: leave-one-out choice of `(α, β)`.
//! - [`simulate`]: synthetic data with a known truth.
//! - [`model_io`]: text serialization of fitted models.

pub mod basis;
pub mod curves;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod model_io;
pub mod operators;
pub mod quadrature;
pub mod selection;
pub mod simulate;

pub use basis::{build_basis, gram_matrices, orthonormal_map, BSplineBasis, BasisSpec, DerivativeMap, GramPair};
pub use curves::{center, differentiate, inner_l, inner_w, smooth, smooth_many, Curve, FunctionalDataset, SampledCurve};
pub use error::{FlrdError, Result};
pub use estimator::{
    fit_flr_ridge, fit_flrd, make_unidentifiable, mean_squared_error, msep, predict_dataset, FlrdFit, Predictor,
    RidgeFlrFit,
};
pub use model_io::FittedModel;
pub use operators::{
    empirical_covariances, operator_sqrt, reg_inverse_apply, schur_systems, sup_norm, CovarianceSet, SchurSystem,
};
pub use selection::{cv_score, grid_search, CvResult};
pub use simulate::{generate, polynomial_spectrum, smooth_truth, SyntheticSpec};
