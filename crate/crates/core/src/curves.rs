//! Curves in coefficient space: smoothing of sampled observations, exact
//! differentiation, inner products and centering of datasets.

use nalgebra::{DMatrix, DVector};

use crate::basis::{BSplineBasis, BasisSpec, GramPair};
use crate::error::{FlrdError, Result};

/// Singular values below `RANK_TOLERANCE * σ_max` count as rank loss.
const RANK_TOLERANCE: f64 = 1e-10;

/// Raw observation: values at strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    abscissae: Vec<f64>,
    values: Vec<f64>,
}

impl SampledCurve {
    pub fn new(abscissae: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if abscissae.len() != values.len() {
            return Err(FlrdError::LengthMismatch {
                what: "sampled curve values",
                expected: abscissae.len(),
                found: values.len(),
            });
        }
        if abscissae.len() < 2 {
            return Err(FlrdError::InvalidSamples(format!(
                "need at least 2 points, got {}",
                abscissae.len()
            )));
        }
        if abscissae.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(FlrdError::NonFinite("sampled curve"));
        }
        if let Some(i) = abscissae.windows(2).position(|w| w[0] >= w[1]) {
            return Err(FlrdError::InvalidSamples(format!(
                "abscissae not strictly increasing at position {}",
                i + 1
            )));
        }
        Ok(Self { abscissae, values })
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A function given by raw B-spline coefficients on the basis `spec`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    spec: BasisSpec,
    coef: Vec<f64>,
}

impl Curve {
    pub fn new(spec: BasisSpec, coef: Vec<f64>) -> Result<Self> {
        if coef.len() != spec.k {
            return Err(FlrdError::LengthMismatch {
                what: "curve coefficients",
                expected: spec.k,
                found: coef.len(),
            });
        }
        if coef.iter().any(|c| !c.is_finite()) {
            return Err(FlrdError::NonFinite("curve coefficients"));
        }
        Ok(Self { spec, coef })
    }

    pub fn zeros(spec: BasisSpec) -> Self {
        Self {
            spec,
            coef: vec![0.0; spec.k],
        }
    }

    pub fn spec(&self) -> BasisSpec {
        self.spec
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coef
    }

    pub(crate) fn coef_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coef)
    }

    fn ensure_spec(&self, spec: BasisSpec) -> Result<()> {
        if self.spec == spec {
            Ok(())
        } else {
            Err(FlrdError::BasisMismatch {
                expected: spec,
                found: self.spec,
            })
        }
    }

    pub fn sub(&self, other: &Curve) -> Result<Curve> {
        other.ensure_spec(self.spec)?;
        Ok(Curve {
            spec: self.spec,
            coef: self.coef.iter().zip(&other.coef).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Curve) -> Result<Curve> {
        other.ensure_spec(self.spec)?;
        Ok(Curve {
            spec: self.spec,
            coef: self.coef.iter().zip(&other.coef).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> Curve {
        Curve {
            spec: self.spec,
            coef: self.coef.iter().map(|c| c * factor).collect(),
        }
    }

    /// Point values at domain abscissae.
    pub fn values_at(&self, ts: &[f64]) -> Result<Vec<f64>> {
        let basis = self.spec.build()?;
        ts.iter()
            .map(|&t| basis.spline_value(&self.coef, t))
            .collect()
    }

    /// Samples the curve back into observation form.
    pub fn sample(&self, abscissae: &[f64]) -> Result<SampledCurve> {
        SampledCurve::new(abscissae.to_vec(), self.values_at(abscissae)?)
    }
}

/// Least-squares projection of a sampled curve onto `basis`.
pub fn smooth(raw: &SampledCurve, basis: &BSplineBasis) -> Result<Curve> {
    smooth_many(std::slice::from_ref(raw), basis).map(|mut v| v.remove(0))
}

/// [`smooth`] for a batch of curves; one factorization when they share
/// abscissae.
pub fn smooth_many(raw: &[SampledCurve], basis: &BSplineBasis) -> Result<Vec<Curve>> {
    let k = basis.dim();
    let mut out = Vec::with_capacity(raw.len());
    let mut cached: Option<(Vec<f64>, nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>)> = None;
    for curve in raw {
        let m = curve.len();
        if m < k {
            return Err(FlrdError::Underdetermined { points: m, k });
        }
        let reuse = matches!(&cached, Some((abs, _)) if abs.as_slice() == curve.abscissae());
        if !reuse {
            let mut design = DMatrix::<f64>::zeros(m, k);
            for (row, &t) in curve.abscissae().iter().enumerate() {
                for (col, v) in basis.eval(t)?.into_iter().enumerate() {
                    design[(row, col)] = v;
                }
            }
            let svd = design.svd(true, true);
            let smax = svd.singular_values.max();
            let rank = svd
                .singular_values
                .iter()
                .filter(|&&s| s > RANK_TOLERANCE * smax)
                .count();
            if rank < k {
                return Err(FlrdError::RankDeficient { rank, k });
            }
            cached = Some((curve.abscissae().to_vec(), svd));
        }
        let (_, svd) = cached.as_ref().expect("factorization cached above");
        let y = DVector::from_column_slice(curve.values());
        let coef = svd
            .solve(&y, 0.0)
            .map_err(|_| FlrdError::NonFinite("least-squares solve"))?;
        out.push(Curve::new(basis.spec(), coef.as_slice().to_vec())?);
    }
    Ok(out)
}

/// Exact derivative through the spline coefficients.
pub fn differentiate(curve: &Curve) -> Result<Curve> {
    let basis = curve.spec.build()?;
    let dspec = curve
        .spec
        .derivative()
        .ok_or(FlrdError::UnsupportedDegree(curve.spec.degree))?;
    let coef = basis.differentiate_coefficients(&curve.coef)?;
    Curve::new(dspec, coef)
}

fn bilinear(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (j, &vj) in v.iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        let col = g.column(j);
        let s: f64 = u.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
        acc += s * vj;
    }
    acc
}

/// `∫ u v` on the rescaled unit interval. Works for curves on the basis of
/// `grams` and for curves on its derivative basis.
pub fn inner_l(u: &Curve, v: &Curve, grams: &GramPair) -> Result<f64> {
    v.ensure_spec(u.spec)?;
    let g = if u.spec == grams.spec {
        &grams.g_l
    } else {
        match &grams.derivative {
            Some(d) if d.spec == u.spec => &d.g_l,
            _ => {
                return Err(FlrdError::BasisMismatch {
                    expected: grams.spec,
                    found: u.spec,
                })
            }
        }
    };
    Ok(bilinear(g, &u.coef, &v.coef))
}

/// `∫ u v + ∫ u' v'` on the rescaled unit interval.
pub fn inner_w(u: &Curve, v: &Curve, grams: &GramPair) -> Result<f64> {
    u.ensure_spec(grams.spec)?;
    v.ensure_spec(grams.spec)?;
    if grams.spec.degree == 0 {
        return Err(FlrdError::UnsupportedDegree(0));
    }
    Ok(bilinear(&grams.g_w, &u.coef, &v.coef))
}

/// Sample `(yᵢ, Xᵢ, X′ᵢ)` with its centering state.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    curves: Vec<Curve>,
    derivatives: Vec<Curve>,
    responses: Vec<f64>,
    centered: bool,
    mean_curve: Curve,
    mean_response: f64,
}

impl FunctionalDataset {
    /// Uncentered dataset; derivatives are computed from the coefficients.
    pub fn new(curves: Vec<Curve>, responses: Vec<f64>) -> Result<Self> {
        if curves.is_empty() {
            return Err(FlrdError::EmptyData);
        }
        if curves.len() != responses.len() {
            return Err(FlrdError::LengthMismatch {
                what: "responses",
                expected: curves.len(),
                found: responses.len(),
            });
        }
        if responses.iter().any(|y| !y.is_finite()) {
            return Err(FlrdError::NonFinite("responses"));
        }
        let spec = curves[0].spec;
        for c in &curves {
            c.ensure_spec(spec)?;
        }
        let derivatives = curves.iter().map(differentiate).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            curves,
            derivatives,
            responses,
            centered: false,
            mean_curve: Curve::zeros(spec),
            mean_response: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn spec(&self) -> BasisSpec {
        self.curves[0].spec
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn derivatives(&self) -> &[Curve] {
        &self.derivatives
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Mean removed by centering, in the coordinates of the original data.
    pub fn mean_curve(&self) -> &Curve {
        &self.mean_curve
    }

    pub fn mean_response(&self) -> f64 {
        self.mean_response
    }

    /// Observation `i` in the coordinates of the original, uncentered data.
    pub fn original(&self, i: usize) -> Result<(Curve, f64)> {
        Ok((
            self.curves[i].add(&self.mean_curve)?,
            self.responses[i] + self.mean_response,
        ))
    }

    /// Observations at `indices`, as a fresh uncentered dataset in the
    /// current coordinates.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(FlrdError::EmptyData);
        }
        Ok(Self {
            curves: indices.iter().map(|&i| self.curves[i].clone()).collect(),
            derivatives: indices.iter().map(|&i| self.derivatives[i].clone()).collect(),
            responses: indices.iter().map(|&i| self.responses[i]).collect(),
            centered: false,
            mean_curve: Curve::zeros(self.spec()),
            mean_response: 0.0,
        })
    }
}

/// Removes the empirical mean curve and mean response. Returns the centered
/// dataset together with the means it removed (cumulative over repeated
/// centering, so they always refer to the original data).
pub fn center(dataset: &FunctionalDataset) -> Result<(FunctionalDataset, Curve, f64)> {
    let n = dataset.len();
    if n == 0 {
        return Err(FlrdError::EmptyData);
    }
    let spec = dataset.spec();
    let k = spec.k;
    let nf = n as f64;
    let mut mean = vec![0.0; k];
    for c in &dataset.curves {
        for (m, x) in mean.iter_mut().zip(&c.coef) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    let mean_y = dataset.responses.iter().sum::<f64>() / nf;
    let mean_curve = Curve::new(spec, mean)?;

    let curves = dataset
        .curves
        .iter()
        .map(|c| c.sub(&mean_curve))
        .collect::<Result<Vec<_>>>()?;
    let derivatives = curves.iter().map(differentiate).collect::<Result<Vec<_>>>()?;
    let responses = dataset.responses.iter().map(|y| y - mean_y).collect();

    let total_mean = dataset.mean_curve.add(&mean_curve)?;
    let total_y = dataset.mean_response + mean_y;
    let out = FunctionalDataset {
        curves,
        derivatives,
        responses,
        centered: true,
        mean_curve: total_mean.clone(),
        mean_response: total_y,
    };
    Ok((out, total_mean, total_y))
}
