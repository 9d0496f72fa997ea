//! Flat text serialization of fitted models.
//!
//! One `key value` pair per line; vectors are comma separated. Every float is
//! written with 17 significant digits so that loading reproduces the fitted
//! coefficients exactly.
//!
//! ```text
//! flrd-model 1
//! kind flrd
//! domain_min 1.1000000000000000e3
//! domain_max 2.4000000000000000e3
//! k 100
//! degree 3
//! alpha 7.0000000000000007e-2
//! beta 1.4999999999999999e-1
//! mean_response ...
//! mean_curve c1,c2,...
//! phi c1,c2,...
//! psi c1,c2,...
//! ```
//!
//! Ridge models use `kind ridge`, omit `alpha`, and store `theta` instead of
//! `phi`/`psi`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::basis::{build_basis, gram_matrices, BasisSpec, GramPair};
use crate::curves::Curve;
use crate::error::{FlrdError, Result};
use crate::estimator::{FlrdFit, Predictor, RidgeFlrFit};

const MAGIC: &str = "flrd-model 1";

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Flrd(FlrdFit),
    Ridge(RidgeFlrFit),
}

impl Predictor for FittedModel {
    fn spec(&self) -> BasisSpec {
        match self {
            FittedModel::Flrd(f) => f.spec(),
            FittedModel::Ridge(f) => f.spec(),
        }
    }

    fn predict(&self, x: &Curve) -> Result<f64> {
        match self {
            FittedModel::Flrd(f) => f.predict(x),
            FittedModel::Ridge(f) => f.predict(x),
        }
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

impl FittedModel {
    pub fn to_text(&self) -> String {
        let spec = self.spec();
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let kind = match self {
            FittedModel::Flrd(_) => "flrd",
            FittedModel::Ridge(_) => "ridge",
        };
        let _ = writeln!(out, "kind {kind}");
        let _ = writeln!(out, "domain_min {}", fmt_f64(spec.domain.0));
        let _ = writeln!(out, "domain_max {}", fmt_f64(spec.domain.1));
        let _ = writeln!(out, "k {}", spec.k);
        let _ = writeln!(out, "degree {}", spec.degree);
        match self {
            FittedModel::Flrd(f) => {
                let _ = writeln!(out, "alpha {}", fmt_f64(f.alpha()));
                let _ = writeln!(out, "beta {}", fmt_f64(f.beta()));
                let _ = writeln!(out, "mean_response {}", fmt_f64(f.mean_response()));
                let _ = writeln!(out, "mean_curve {}", fmt_vec(f.mean_curve().coefficients()));
                let _ = writeln!(out, "phi {}", fmt_vec(f.phi_hat().coefficients()));
                let _ = writeln!(out, "psi {}", fmt_vec(f.psi_hat().coefficients()));
            }
            FittedModel::Ridge(f) => {
                let _ = writeln!(out, "beta {}", fmt_f64(f.beta()));
                let _ = writeln!(out, "mean_response {}", fmt_f64(f.mean_response()));
                let _ = writeln!(out, "mean_curve {}", fmt_vec(f.mean_curve().coefficients()));
                let _ = writeln!(out, "theta {}", fmt_vec(f.theta_hat().coefficients()));
            }
        }
        out
    }

    /// Parses a model and rebuilds the Gram matrices of its basis.
    pub fn from_text(text: &str) -> Result<(Self, GramPair)> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => {
                return Err(FlrdError::ModelFormat {
                    line: 1,
                    message: format!("expected header `{MAGIC}`"),
                })
            }
        }
        let mut fields: HashMap<&str, (usize, &str)> = HashMap::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once(' ').ok_or(FlrdError::ModelFormat {
                line: i + 1,
                message: "expected `key value`".into(),
            })?;
            if fields.insert(key, (i + 1, value.trim())).is_some() {
                return Err(FlrdError::ModelFormat {
                    line: i + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        let get = |key: &str| -> Result<(usize, &str)> {
            fields.get(key).copied().ok_or(FlrdError::ModelFormat {
                line: 0,
                message: format!("missing key `{key}`"),
            })
        };
        let scalar = |key: &str| -> Result<f64> {
            let (line, v) = get(key)?;
            v.parse().map_err(|_| FlrdError::ModelFormat {
                line,
                message: format!("`{key}` is not a number: {v}"),
            })
        };
        let count = |key: &str| -> Result<usize> {
            let (line, v) = get(key)?;
            v.parse().map_err(|_| FlrdError::ModelFormat {
                line,
                message: format!("`{key}` is not a count: {v}"),
            })
        };
        let vector = |key: &str| -> Result<Vec<f64>> {
            let (line, v) = get(key)?;
            v.split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| FlrdError::ModelFormat {
                        line,
                        message: format!("`{key}` has a non-numeric entry: {s}"),
                    })
                })
                .collect()
        };

        let domain = (scalar("domain_min")?, scalar("domain_max")?);
        let basis = build_basis(domain, count("k")?, count("degree")?)?;
        let grams = gram_matrices(&basis)?;
        let spec = basis.spec();
        let mean_curve = Curve::new(spec, vector("mean_curve")?)?;
        let mean_response = scalar("mean_response")?;
        let beta = scalar("beta")?;
        let (kind_line, kind) = get("kind")?;
        let model = match kind {
            "flrd" => {
                let dspec = grams.derivative()?.spec;
                FittedModel::Flrd(FlrdFit::from_parts(
                    Curve::new(spec, vector("phi")?)?,
                    Curve::new(dspec, vector("psi")?)?,
                    scalar("alpha")?,
                    beta,
                    mean_curve,
                    mean_response,
                    &grams,
                )?)
            }
            "ridge" => FittedModel::Ridge(RidgeFlrFit::from_parts(
                Curve::new(spec, vector("theta")?)?,
                beta,
                mean_curve,
                mean_response,
                &grams,
            )?),
            other => {
                return Err(FlrdError::ModelFormat {
                    line: kind_line,
                    message: format!("unknown model kind `{other}`"),
                })
            }
        };
        Ok((model, grams))
    }
}
