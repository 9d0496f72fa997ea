//! Clamped B-spline bases on a closed interval, their derivative maps and
//! the Gram matrices of the `L` and `W` inner products.
//!
//! Every basis lives on a user-facing domain `[a, b]` (wavelengths, say) but
//! knots, derivatives and integrals are all taken in the rescaled variable
//! `s = (t - a) / (b - a) ∈ [0, 1]`. Two bases with the same `k` and degree
//! therefore share their Gram matrices whatever their domain.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{FlrdError, Result};
use crate::linalg::{cholesky_upper, upper_triangular_inverse};
use crate::quadrature::GaussLegendre;

/// Tolerance for accepting points a hair outside the domain (rounding in
/// user-supplied abscissae).
const DOMAIN_SLACK: f64 = 1e-12;

/// Identity of a basis: everything needed to rebuild it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    pub domain: (f64, f64),
    pub k: usize,
    pub degree: usize,
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "B-spline(k={}, degree={}, domain=[{}, {}])",
            self.k, self.degree, self.domain.0, self.domain.1
        )
    }
}

impl BasisSpec {
    pub fn new(domain: (f64, f64), k: usize, degree: usize) -> Self {
        Self { domain, k, degree }
    }

    pub fn build(&self) -> Result<BSplineBasis> {
        build_basis(self.domain, self.k, self.degree)
    }

    /// Spec of the basis that carries first derivatives (degree and
    /// dimension both drop by one). `None` for piecewise constants.
    pub fn derivative(&self) -> Option<BasisSpec> {
        (self.degree >= 1).then(|| BasisSpec::new(self.domain, self.k - 1, self.degree - 1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    spec: BasisSpec,
    /// Knots on the rescaled unit interval.
    knots: Vec<f64>,
}

/// Clamped basis with uniformly spaced interior knots.
pub fn build_basis(domain: (f64, f64), k: usize, degree: usize) -> Result<BSplineBasis> {
    let (a, b) = domain;
    if a >= b || !a.is_finite() || !b.is_finite() {
        return Err(FlrdError::InvalidDomain { a, b });
    }
    if k < degree + 1 {
        return Err(FlrdError::InvalidDimension { k, degree });
    }
    let spans = k - degree;
    let mut knots = Vec::with_capacity(k + degree + 1);
    knots.extend(std::iter::repeat_n(0.0, degree + 1));
    knots.extend((1..spans).map(|j| j as f64 / spans as f64));
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    Ok(BSplineBasis {
        spec: BasisSpec::new(domain, k, degree),
        knots,
    })
}

impl BSplineBasis {
    pub fn spec(&self) -> BasisSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.k
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    pub fn domain(&self) -> (f64, f64) {
        self.spec.domain
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Maps a domain point onto `[0, 1]`.
    pub fn rescale(&self, t: f64) -> Result<f64> {
        let (a, b) = self.spec.domain;
        let width = b - a;
        if !t.is_finite() || t < a - DOMAIN_SLACK * width || t > b + DOMAIN_SLACK * width {
            return Err(FlrdError::OutOfDomain { t, a, b });
        }
        Ok(((t - a) / width).clamp(0.0, 1.0))
    }

    /// Inverse of [`rescale`](Self::rescale).
    pub fn unscale(&self, s: f64) -> f64 {
        let (a, b) = self.spec.domain;
        a + s * (b - a)
    }

    /// Knot span index `μ` with `knots[μ] <= s < knots[μ+1]`; the right end of
    /// the unit interval belongs to the last non-empty span.
    fn span(&self, s: f64) -> usize {
        let p = self.spec.degree;
        let last = self.spec.k - 1;
        if s >= self.knots[last + 1] {
            return last;
        }
        // first index in [p, last] whose right knot exceeds s
        let (mut lo, mut hi) = (p, last);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.knots[mid + 1] <= s {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// The `degree + 1` basis functions of degree `p` that are nonzero on
    /// span `mu`, evaluated at `s` (triangular Cox–de Boor scheme).
    fn nonzero_values(&self, mu: usize, s: f64, p: usize) -> Vec<f64> {
        let t = &self.knots;
        let mut n = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        n[0] = 1.0;
        for j in 1..=p {
            left[j] = s - t[mu + 1 - j];
            right[j] = t[mu + j] - s;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Nonzero values and first derivatives (in `s`) on span `mu`. The
    /// returned slices index basis functions `mu - degree ..= mu`.
    fn local_values_and_derivatives(&self, mu: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
        let p = self.spec.degree;
        let values = self.nonzero_values(mu, s, p);
        let mut derivs = vec![0.0; p + 1];
        if p == 0 {
            return (values, derivs);
        }
        let t = &self.knots;
        // lower[r] is B_{mu-p+1+r, p-1}
        let lower = self.nonzero_values(mu, s, p - 1);
        let pf = p as f64;
        for (r, d) in derivs.iter_mut().enumerate() {
            let i = mu - p + r;
            let mut acc = 0.0;
            if r >= 1 {
                let denom = t[i + p] - t[i];
                if denom > 0.0 {
                    acc += lower[r - 1] / denom;
                }
            }
            if r < p {
                let denom = t[i + p + 1] - t[i + 1];
                if denom > 0.0 {
                    acc -= lower[r] / denom;
                }
            }
            *d = pf * acc;
        }
        (values, derivs)
    }

    /// All `k` basis values at domain point `t`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let s = self.rescale(t)?;
        Ok(self.eval_unit(s))
    }

    pub(crate) fn eval_unit(&self, s: f64) -> Vec<f64> {
        let mu = self.span(s);
        let p = self.spec.degree;
        let local = self.nonzero_values(mu, s, p);
        let mut out = vec![0.0; self.spec.k];
        out[mu - p..=mu].copy_from_slice(&local);
        out
    }

    /// All `k` basis derivatives with respect to the rescaled variable.
    pub fn eval_derivative(&self, t: f64) -> Result<Vec<f64>> {
        let s = self.rescale(t)?;
        let mu = self.span(s);
        let p = self.spec.degree;
        let (_, local) = self.local_values_and_derivatives(mu, s);
        let mut out = vec![0.0; self.spec.k];
        out[mu - p..=mu].copy_from_slice(&local);
        Ok(out)
    }

    /// Value of the spline with raw coefficients `coef` at domain point `t`.
    pub fn spline_value(&self, coef: &[f64], t: f64) -> Result<f64> {
        let s = self.rescale(t)?;
        Ok(self.spline_value_unit(coef, s))
    }

    pub(crate) fn spline_value_unit(&self, coef: &[f64], s: f64) -> f64 {
        let mu = self.span(s);
        let p = self.spec.degree;
        let local = self.nonzero_values(mu, s, p);
        local
            .iter()
            .zip(&coef[mu - p..=mu])
            .map(|(b, c)| b * c)
            .sum()
    }

    /// Coefficients of the derivative spline (on the derivative basis).
    pub fn differentiate_coefficients(&self, coef: &[f64]) -> Result<Vec<f64>> {
        let p = self.spec.degree;
        if p == 0 {
            return Err(FlrdError::UnsupportedDegree(0));
        }
        if coef.len() != self.spec.k {
            return Err(FlrdError::LengthMismatch {
                what: "spline coefficients",
                expected: self.spec.k,
                found: coef.len(),
            });
        }
        let t = &self.knots;
        let pf = p as f64;
        Ok((0..self.spec.k - 1)
            .map(|i| pf * (coef[i + 1] - coef[i]) / (t[i + p + 1] - t[i + 1]))
            .collect())
    }

    /// Derivative as a linear map between coefficient spaces.
    pub fn derivative_map(&self) -> DerivativeMap {
        let p = self.spec.degree;
        if p == 0 {
            return DerivativeMap::Vanishing { dim: self.spec.k };
        }
        let k = self.spec.k;
        let t = &self.knots;
        let pf = p as f64;
        let mut matrix = DMatrix::<f64>::zeros(k - 1, k);
        for i in 0..k - 1 {
            let scale = pf / (t[i + p + 1] - t[i + 1]);
            matrix[(i, i)] = -scale;
            matrix[(i, i + 1)] = scale;
        }
        let basis = BSplineBasis {
            spec: BasisSpec::new(self.spec.domain, k - 1, p - 1),
            knots: t[1..t.len() - 1].to_vec(),
        };
        DerivativeMap::Spline { basis, matrix }
    }
}

/// Result of differentiating a basis.
#[derive(Debug, Clone, PartialEq)]
pub enum DerivativeMap {
    /// Piecewise constants: the derivative is the zero map.
    Vanishing { dim: usize },
    /// Derivative lands in `basis`; `matrix` maps coefficients `c ↦ D c`.
    Spline {
        basis: BSplineBasis,
        matrix: DMatrix<f64>,
    },
}

fn assemble_grams(basis: &BSplineBasis) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = basis.spec.k;
    let p = basis.spec.degree;
    let rule = GaussLegendre::new(p + 2);
    let mut g_l = DMatrix::<f64>::zeros(k, k);
    let mut g_d = DMatrix::<f64>::zeros(k, k);
    for mu in p..k {
        let (lo, hi) = (basis.knots[mu], basis.knots[mu + 1]);
        if hi <= lo {
            continue;
        }
        for (s, w) in rule.on_interval(lo, hi) {
            let (v, d) = basis.local_values_and_derivatives(mu, s);
            for r in 0..=p {
                for c in 0..=p {
                    g_l[(mu - p + r, mu - p + c)] += w * v[r] * v[c];
                    g_d[(mu - p + r, mu - p + c)] += w * d[r] * d[c];
                }
            }
        }
    }
    (g_l, g_d)
}

/// Orthonormalizing change of coordinates for a symmetric positive definite
/// Gram matrix: `Uᵀ G U = I` with `U = R⁻¹`, `R` the upper Cholesky factor.
pub fn orthonormal_map(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(upper_triangular_inverse(&cholesky_upper(g)?))
}

/// Orthonormal coordinates for one inner product: `z = R c`, `c = U z`.
#[derive(Debug, Clone)]
pub struct Orthonormalizer {
    pub r: DMatrix<f64>,
    pub u: DMatrix<f64>,
}

impl Orthonormalizer {
    pub fn new(g: &DMatrix<f64>) -> Result<Self> {
        let r = cholesky_upper(g)?;
        let u = upper_triangular_inverse(&r);
        Ok(Self { r, u })
    }

    pub fn to_orthonormal(&self, coef: &[f64]) -> DVector<f64> {
        &self.r * DVector::from_column_slice(coef)
    }

    pub fn from_orthonormal(&self, z: &DVector<f64>) -> Vec<f64> {
        (&self.u * z).as_slice().to_vec()
    }
}

/// Derivative-side data: the derivative basis, its `L` Gram and the
/// derivative operator in raw and orthonormal coordinates.
#[derive(Debug, Clone)]
pub struct DerivativeGrams {
    pub spec: BasisSpec,
    /// `∫ b'_i b'_j` Gram of the derivative basis (degree − 1).
    pub g_l: DMatrix<f64>,
    /// Raw coefficient map from the curve basis to the derivative basis.
    pub d_coef: DMatrix<f64>,
    pub ortho_l: Orthonormalizer,
    /// `D` from `W`-orthonormal to `L`-orthonormal coordinates, so that
    /// the adjoint `D*` is the transpose.
    pub d_orth: DMatrix<f64>,
}

/// Gram matrices of a basis and the orthonormal coordinates derived from them.
#[derive(Debug, Clone)]
pub struct GramPair {
    pub spec: BasisSpec,
    /// `∫ b_i b_j`.
    pub g_l: DMatrix<f64>,
    /// `∫ b_i' b_j'`.
    pub g_d: DMatrix<f64>,
    /// `g_l + g_d`.
    pub g_w: DMatrix<f64>,
    pub ortho_w: Orthonormalizer,
    /// `L`-orthonormal coordinates of the curve basis itself (ridge FLR).
    pub ortho_l0: Orthonormalizer,
    pub derivative: Option<DerivativeGrams>,
}

pub fn gram_matrices(basis: &BSplineBasis) -> Result<GramPair> {
    let (g_l, g_d) = assemble_grams(basis);
    let g_w = &g_l + &g_d;
    let ortho_w = Orthonormalizer::new(&g_w)?;
    let ortho_l0 = Orthonormalizer::new(&g_l)?;
    let derivative = match basis.derivative_map() {
        DerivativeMap::Vanishing { .. } => None,
        DerivativeMap::Spline {
            basis: dbasis,
            matrix,
        } => {
            let (dg_l, _) = assemble_grams(&dbasis);
            let ortho_l = Orthonormalizer::new(&dg_l)?;
            let d_orth = &ortho_l.r * &matrix * &ortho_w.u;
            Some(DerivativeGrams {
                spec: dbasis.spec,
                g_l: dg_l,
                d_coef: matrix,
                ortho_l,
                d_orth,
            })
        }
    };
    Ok(GramPair {
        spec: basis.spec,
        g_l,
        g_d,
        g_w,
        ortho_w,
        ortho_l0,
        derivative,
    })
}

impl GramPair {
    pub fn dim_w(&self) -> usize {
        self.spec.k
    }

    pub fn derivative(&self) -> Result<&DerivativeGrams> {
        self.derivative
            .as_ref()
            .ok_or(FlrdError::UnsupportedDegree(self.spec.degree))
    }

    pub fn dim_l(&self) -> Result<usize> {
        Ok(self.derivative()?.spec.k)
    }

    pub fn u_w(&self) -> &DMatrix<f64> {
        &self.ortho_w.u
    }

    pub fn u_l(&self) -> Result<&DMatrix<f64>> {
        Ok(&self.derivative()?.ortho_l.u)
    }

    pub fn d_coef(&self) -> Result<&DMatrix<f64>> {
        Ok(&self.derivative()?.d_coef)
    }

    pub fn d_orth(&self) -> Result<&DMatrix<f64>> {
        Ok(&self.derivative()?.d_orth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn degenerate_constant_basis() {
        let b = build_basis((0.0, 1.0), 1, 0).unwrap();
        assert_eq!(b.knots(), &[0.0, 1.0]);
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(b.eval(t).unwrap(), vec![1.0]);
        }
        let g = gram_matrices(&b).unwrap();
        assert!((g.g_l[(0, 0)] - 1.0).abs() < 1e-15);
        assert_eq!(g.g_d[(0, 0)], 0.0);
        assert!((g.g_w[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(matches!(b.derivative_map(), DerivativeMap::Vanishing { dim: 1 }));
        assert!(g.derivative().is_err());
    }

    #[test]
    fn bernstein_cubic_values() {
        let b = build_basis((0.0, 1.0), 4, 3).unwrap();
        assert!(close(&b.eval(0.5).unwrap(), &[0.125, 0.375, 0.375, 0.125], 1e-15));
        assert_eq!(b.eval(0.0).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(b.eval(1.0).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            build_basis((0.0, 1.0), 3, 3).unwrap_err(),
            FlrdError::InvalidDimension { k: 3, degree: 3 }
        );
        assert!(matches!(
            build_basis((1.0, 1.0), 5, 3),
            Err(FlrdError::InvalidDomain { .. })
        ));
        assert!(matches!(
            build_basis((2.0, 1.0), 5, 3),
            Err(FlrdError::InvalidDomain { .. })
        ));
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let b = build_basis((1100.0, 2400.0), 100, 3).unwrap();
        assert_eq!(b.dim(), 100);
        assert_eq!(b.knots().len(), 104);
        assert!(matches!(b.eval(1000.0), Err(FlrdError::OutOfDomain { .. })));
        assert!(b.eval(2400.0).is_ok());
    }

    #[test]
    fn identity_derivative_is_one() {
        let b = build_basis((0.0, 1.0), 4, 3).unwrap();
        let d = b.differentiate_coefficients(&[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        assert!(close(&d, &[1.0, 1.0, 1.0], 1e-14));
        let d = b.differentiate_coefficients(&[1.0; 4]).unwrap();
        assert!(close(&d, &[0.0; 3], 0.0));
    }

    #[test]
    fn derivative_basis_matches_uniform_construction() {
        let b = build_basis((0.0, 1.0), 10, 3).unwrap();
        match b.derivative_map() {
            DerivativeMap::Spline { basis, matrix } => {
                let rebuilt = build_basis((0.0, 1.0), 9, 2).unwrap();
                assert!(close(basis.knots(), rebuilt.knots(), 1e-15));
                assert_eq!(matrix.shape(), (9, 10));
            }
            _ => panic!("cubic basis must have a spline derivative"),
        }
    }

    #[test]
    fn inner_products_of_identity_function() {
        let b = build_basis((0.0, 1.0), 4, 3).unwrap();
        let g = gram_matrices(&b).unwrap();
        let c = DVector::from_vec(vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let l = (c.transpose() * &g.g_l * &c)[(0, 0)];
        let w = (c.transpose() * &g.g_w * &c)[(0, 0)];
        assert!((l - 1.0 / 3.0).abs() < 1e-14);
        assert!((w - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_map_diagonal() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let u = orthonormal_map(&g).unwrap();
        assert!((u[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((u[(1, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(u[(0, 1)], 0.0);
        assert_eq!(
            orthonormal_map(&DMatrix::identity(3, 3)).unwrap(),
            DMatrix::identity(3, 3)
        );
    }

    #[test]
    fn orthonormal_map_rejects_indefinite() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(
            orthonormal_map(&g).unwrap_err().kind(),
            "singular-gram"
        );
    }
}
