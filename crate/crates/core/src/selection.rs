//! Leave-one-out selection of the penalty pair `(α, β)`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::basis::GramPair;
use crate::curves::FunctionalDataset;
use crate::error::{check_penalty, FlrdError, Result};
use crate::estimator::{fit_flrd, Predictor};

/// Default grid: 8 log-spaced values in `[1e-4, 1]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-4, 1.0, 8)
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// Order-free canonical permutation: observations sorted by response, then
/// by coefficients. Makes every downstream sum independent of input order.
fn canonical_order(dataset: &FunctionalDataset) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    let cmp = |&a: &usize, &b: &usize| -> Ordering {
        dataset.responses()[a]
            .total_cmp(&dataset.responses()[b])
            .then_with(|| {
                let (ca, cb) = (dataset.curves()[a].coefficients(), dataset.curves()[b].coefficients());
                ca.iter()
                    .zip(cb)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
    };
    idx.sort_by(cmp);
    idx
}

fn loo_score(canonical: &FunctionalDataset, grams: &GramPair, alpha: f64, beta: f64) -> Result<f64> {
    let n = canonical.len();
    let mut sum = 0.0;
    for i in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let fold = canonical.select(&rest)?;
        let fit = fit_flrd(&fold, grams, alpha, beta)?;
        let err = canonical.responses()[i] - fit.predict(&canonical.curves()[i])?;
        sum += err * err;
    }
    Ok(sum / n as f64)
}

fn check_cv_inputs(dataset: &FunctionalDataset) -> Result<FunctionalDataset> {
    if dataset.len() < 3 {
        return Err(FlrdError::TooFewObservations {
            needed: 3,
            found: dataset.len(),
        });
    }
    dataset.select(&canonical_order(dataset))
}

/// Leave-one-out prediction error `(1/n) Σ (yᵢ − ŷ₋ᵢ(Xᵢ))²`, each fold
/// re-centered and refitted.
pub fn cv_score(dataset: &FunctionalDataset, grams: &GramPair, alpha: f64, beta: f64) -> Result<f64> {
    check_penalty("alpha", alpha)?;
    check_penalty("beta", beta)?;
    let canonical = check_cv_inputs(dataset)?;
    loo_score(&canonical, grams, alpha, beta)
}

/// Cross-validation surface over a penalty grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    /// `scores[a][b]` for `alpha_grid[a]`, `beta_grid[b]`.
    pub scores: Vec<Vec<f64>>,
    pub best_alpha: f64,
    pub best_beta: f64,
    pub best_score: f64,
}

impl CvResult {
    /// `alpha,beta,cvmsep` with one row per cell, α-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,beta,cvmsep\n");
        for (a, row) in self.alpha_grid.iter().zip(&self.scores) {
            for (b, s) in self.beta_grid.iter().zip(row) {
                let _ = writeln!(out, "{a:.16e},{b:.16e},{s:.16e}");
            }
        }
        out
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(FlrdError::InvalidGrid(format!("{name} grid is empty")));
    }
    if let Some(v) = grid.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(FlrdError::InvalidGrid(format!(
            "{name} grid value {v} is not strictly positive"
        )));
    }
    Ok(())
}

/// Evaluates [`cv_score`] on every cell, in parallel. Each cell is a pure
/// computation, so the surface is identical to a serial evaluation. Ties
/// go to the lexicographically smallest `(α, β)`.
pub fn grid_search(
    dataset: &FunctionalDataset,
    grams: &GramPair,
    alpha_grid: &[f64],
    beta_grid: &[f64],
) -> Result<CvResult> {
    check_grid("alpha", alpha_grid)?;
    check_grid("beta", beta_grid)?;
    let canonical = check_cv_inputs(dataset)?;
    let cells: Vec<(usize, usize)> = (0..alpha_grid.len())
        .flat_map(|a| (0..beta_grid.len()).map(move |b| (a, b)))
        .collect();
    let flat = cells
        .par_iter()
        .map(|&(a, b)| loo_score(&canonical, grams, alpha_grid[a], beta_grid[b]))
        .collect::<Result<Vec<f64>>>()?;
    select_best(alpha_grid, beta_grid, flat)
}

fn select_best(alpha_grid: &[f64], beta_grid: &[f64], flat: Vec<f64>) -> Result<CvResult> {
    let nb = beta_grid.len();
    let mut best: Option<(f64, f64, f64)> = None;
    for (cell, &score) in flat.iter().enumerate() {
        if !score.is_finite() {
            return Err(FlrdError::NonFinite("cross-validation score"));
        }
        let (a, b) = (alpha_grid[cell / nb], beta_grid[cell % nb]);
        let better = match best {
            None => true,
            Some((ba, bb, bs)) => {
                score < bs || (score == bs && (a, b).partial_cmp(&(ba, bb)) == Some(Ordering::Less))
            }
        };
        if better {
            best = Some((a, b, score));
        }
    }
    let (best_alpha, best_beta, best_score) = best.expect("grids are nonempty");
    Ok(CvResult {
        alpha_grid: alpha_grid.to_vec(),
        beta_grid: beta_grid.to_vec(),
        scores: flat.chunks(nb).map(<[f64]>::to_vec).collect(),
        best_alpha,
        best_beta,
        best_score,
    })
}
