//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the crate's numerical routines except to build
//! inputs.
#![allow(dead_code)]

use flrd::{build_basis, center, gram_matrices, Curve, FunctionalDataset, GramPair};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_vec(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).abs().max()
}

pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs_diff(a, b) / b.abs().max().max(1e-300)
}

/// Clamped uniform knots on `[0, 1]`.
pub fn knots(k: usize, p: usize) -> Vec<f64> {
    let m = k - p;
    let mut t = vec![0.0; p + 1];
    t.extend((1..m).map(|j| j as f64 / m as f64));
    t.extend(vec![1.0; p + 1]);
    t
}

/// Naive recursive Cox–de Boor value of `B_{i,p}` at `s`, with the last
/// non-empty span closed on the right.
pub fn cox_de_boor(t: &[f64], i: usize, p: usize, s: f64) -> f64 {
    if p == 0 {
        let last = t[t.len() - 1];
        let in_span = t[i] <= s && s < t[i + 1];
        let right_end = s == last && t[i] < t[i + 1] && t[i + 1] == last;
        return if in_span || right_end { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    let d1 = t[i + p] - t[i];
    if d1 > 0.0 {
        v += (s - t[i]) / d1 * cox_de_boor(t, i, p - 1, s);
    }
    let d2 = t[i + p + 1] - t[i + 1];
    if d2 > 0.0 {
        v += (t[i + p + 1] - s) / d2 * cox_de_boor(t, i + 1, p - 1, s);
    }
    v
}

/// Derivative of `B_{i,p}` by the textbook two-term formula.
pub fn cox_de_boor_derivative(t: &[f64], i: usize, p: usize, s: f64) -> f64 {
    if p == 0 {
        return 0.0;
    }
    let pf = p as f64;
    let mut v = 0.0;
    let d1 = t[i + p] - t[i];
    if d1 > 0.0 {
        v += pf / d1 * cox_de_boor(t, i, p - 1, s);
    }
    let d2 = t[i + p + 1] - t[i + 1];
    if d2 > 0.0 {
        v -= pf / d2 * cox_de_boor(t, i + 1, p - 1, s);
    }
    v
}

pub fn basis_values(k: usize, p: usize, s: f64) -> Vec<f64> {
    let t = knots(k, p);
    (0..k).map(|i| cox_de_boor(&t, i, p, s)).collect()
}

pub fn basis_derivatives(k: usize, p: usize, s: f64) -> Vec<f64> {
    let t = knots(k, p);
    (0..k).map(|i| cox_de_boor_derivative(&t, i, p, s)).collect()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (simpson(f, a, m), simpson(f, m, b));
    if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
        return l + r + (l + r - whole) / 15.0;
    }
    adaptive(f, a, m, l, 0.5 * tol, depth - 1) + adaptive(f, m, b, r, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature, split at `breaks` so each piece is smooth.
pub fn integrate(f: &dyn Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            // Sample strictly inside the span so one-sided pieces are used.
            let (a, b) = (w[0], w[1]);
            let eps = (b - a) * 1e-13;
            let g = |x: f64| f(x.clamp(a + eps, b - eps));
            adaptive(&g, a, b, simpson(&g, a, b), 1e-15, 40)
        })
        .sum()
}

pub fn unique_knots(k: usize, p: usize) -> Vec<f64> {
    let mut t = knots(k, p);
    t.dedup();
    t
}

/// `(∫ b_i b_j, ∫ b_i' b_j')` on the unit interval.
pub fn gram_oracle(k: usize, p: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let t = knots(k, p);
    let breaks = unique_knots(k, p);
    let mut g_l = DMatrix::zeros(k, k);
    let mut g_d = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let l = integrate(&|s| cox_de_boor(&t, i, p, s) * cox_de_boor(&t, j, p, s), &breaks);
            let d = integrate(
                &|s| cox_de_boor_derivative(&t, i, p, s) * cox_de_boor_derivative(&t, j, p, s),
                &breaks,
            );
            g_l[(i, j)] = l;
            g_l[(j, i)] = l;
            g_d[(i, j)] = d;
            g_d[(j, i)] = d;
        }
    }
    (g_l, g_d)
}

pub fn grams(k: usize, p: usize) -> GramPair {
    gram_matrices(&build_basis((0.0, 1.0), k, p).unwrap()).unwrap()
}

/// Random uncentered dataset with Gaussian coefficients and responses.
pub fn random_dataset(g: &GramPair, n: usize, seed: u64) -> FunctionalDataset {
    let mut r = rng(seed);
    let curves = (0..n)
        .map(|_| Curve::new(g.spec, normal_vec(&mut r, g.spec.k)).unwrap())
        .collect();
    FunctionalDataset::new(curves, normal_vec(&mut r, n)).unwrap()
}

pub fn random_centered(g: &GramPair, n: usize, seed: u64) -> FunctionalDataset {
    center(&random_dataset(g, n, seed)).unwrap().0
}

pub fn lower_cholesky_transpose(g: &DMatrix<f64>) -> DMatrix<f64> {
    g.clone().cholesky().expect("SPD").l().transpose()
}

/// Brute-force covariances in orthonormal coordinates from a loop of outer
/// products, with nalgebra's Cholesky as the change of coordinates.
pub struct CovOracle {
    pub gamma: DMatrix<f64>,
    pub gamma_prime: DMatrix<f64>,
    pub gamma_prime_star: DMatrix<f64>,
    pub gamma_prime_prime: DMatrix<f64>,
    pub delta: DVector<f64>,
    pub delta_prime: DVector<f64>,
}

pub fn cov_oracle(ds: &FunctionalDataset, g: &GramPair) -> CovOracle {
    let d = g.derivative.as_ref().unwrap();
    let rw = lower_cholesky_transpose(&g.g_w);
    let rl = lower_cholesky_transpose(&d.g_l);
    let (kw, kl) = (g.spec.k, d.spec.k);
    let n = ds.len() as f64;
    let mut o = CovOracle {
        gamma: DMatrix::zeros(kw, kw),
        gamma_prime: DMatrix::zeros(kw, kl),
        gamma_prime_star: DMatrix::zeros(kl, kw),
        gamma_prime_prime: DMatrix::zeros(kl, kl),
        delta: DVector::zeros(kw),
        delta_prime: DVector::zeros(kl),
    };
    for i in 0..ds.len() {
        let c = DVector::from_column_slice(ds.curves()[i].coefficients());
        // derivative coefficients recomputed from the raw map
        let cp = &d.d_coef * &c;
        let z = &rw * c;
        let zp = &rl * cp;
        let y = ds.responses()[i];
        for a in 0..kw {
            for b in 0..kw {
                o.gamma[(a, b)] += z[a] * z[b] / n;
            }
            for b in 0..kl {
                o.gamma_prime[(a, b)] += z[a] * zp[b] / n;
                o.gamma_prime_star[(b, a)] += zp[b] * z[a] / n;
            }
            o.delta[a] += y * z[a] / n;
        }
        for a in 0..kl {
            for b in 0..kl {
                o.gamma_prime_prime[(a, b)] += zp[a] * zp[b] / n;
            }
            o.delta_prime[a] += y * zp[a] / n;
        }
    }
    o
}

pub fn dense_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().lu().try_inverse().expect("invertible")
}

pub fn shifted(m: &DMatrix<f64>, s: f64) -> DMatrix<f64> {
    m + DMatrix::identity(m.nrows(), m.ncols()) * s
}

/// Schur complements by the direct matrix formula with dense inverses.
pub fn schur_oracle(
    o: &CovOracle,
    alpha: f64,
) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let rpp = dense_inverse(&shifted(&o.gamma_prime_prime, alpha));
    let rg = dense_inverse(&shifted(&o.gamma, alpha));
    let s_phi = &o.gamma - &o.gamma_prime * &rpp * &o.gamma_prime_star;
    let u_phi = &o.delta - &o.gamma_prime * &rpp * &o.delta_prime;
    let s_psi = &o.gamma_prime_prime - &o.gamma_prime_star * &rg * &o.gamma_prime;
    let u_psi = &o.delta_prime - &o.gamma_prime_star * &rg * &o.delta;
    (s_phi, u_phi, s_psi, u_psi)
}

/// The whole estimator in raw coefficient space: operators are the
/// non-symmetric matrices `(1/n) Σ cᵢ cᵢᵀ G` acting on coefficient vectors,
/// so no orthonormal coordinates are involved. Input must be centered.
pub fn raw_fit_oracle(ds: &FunctionalDataset, g: &GramPair, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let d = g.derivative.as_ref().unwrap();
    let (kw, kl) = (g.spec.k, d.spec.k);
    let n = ds.len() as f64;
    let mut cc = DMatrix::zeros(kw, kw);
    let mut ccp = DMatrix::zeros(kw, kl);
    let mut cpc = DMatrix::zeros(kl, kw);
    let mut cpcp = DMatrix::zeros(kl, kl);
    let mut delta = DVector::zeros(kw);
    let mut delta_p = DVector::zeros(kl);
    for i in 0..ds.len() {
        let c = DVector::from_column_slice(ds.curves()[i].coefficients());
        let cp = DVector::from_column_slice(ds.derivatives()[i].coefficients());
        let y = ds.responses()[i];
        cc += &c * c.transpose() / n;
        ccp += &c * cp.transpose() / n;
        cpc += &cp * c.transpose() / n;
        cpcp += &cp * cp.transpose() / n;
        delta += &c * (y / n);
        delta_p += &cp * (y / n);
    }
    let gamma = cc * &g.g_w;
    let gamma_p = ccp * &d.g_l;
    let gamma_ps = cpc * &g.g_w;
    let gamma_pp = cpcp * &d.g_l;
    let rpp = dense_inverse(&shifted(&gamma_pp, alpha));
    let rg = dense_inverse(&shifted(&gamma, alpha));
    let s_phi = &gamma - &gamma_p * &rpp * &gamma_ps;
    let u_phi = &delta - &gamma_p * &rpp * &delta_p;
    let s_psi = &gamma_pp - &gamma_ps * &rg * &gamma_p;
    let u_psi = &delta_p - &gamma_ps * &rg * &delta;
    let phi = dense_inverse(&shifted(&s_phi, beta)) * u_phi;
    let psi = dense_inverse(&shifted(&s_psi, beta)) * u_psi;
    (phi.as_slice().to_vec(), psi.as_slice().to_vec())
}

/// Ridge FLR in raw coefficients: `θ = ((1/n) Σ cᵢ cᵢᵀ G_L + β)⁻¹ δ`.
pub fn raw_ridge_oracle(ds: &FunctionalDataset, g: &GramPair, beta: f64) -> Vec<f64> {
    let k = g.spec.k;
    let n = ds.len() as f64;
    let mut cc = DMatrix::zeros(k, k);
    let mut delta = DVector::zeros(k);
    for i in 0..ds.len() {
        let c = DVector::from_column_slice(ds.curves()[i].coefficients());
        cc += &c * c.transpose() / n;
        delta += &c * (ds.responses()[i] / n);
    }
    let theta = dense_inverse(&shifted(&(cc * &g.g_l), beta)) * delta;
    theta.as_slice().to_vec()
}

/// Largest singular value by power iteration on `TᵀT`.
pub fn power_iteration_norm(t: &DMatrix<f64>, iters: usize) -> f64 {
    let tt = t.transpose() * t;
    let mut v = DVector::from_element(t.ncols(), 1.0);
    v[0] += 0.5;
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = &tt * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm / v.norm();
        v = w / norm;
    }
    lambda.sqrt()
}

pub fn random_psd(rng: &mut ChaCha20Rng, k: usize, rank: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(k, rank, |_, _| normal(rng));
    &a * a.transpose()
}

pub fn random_spd(rng: &mut ChaCha20Rng, k: usize) -> DMatrix<f64> {
    shifted(&random_psd(rng, k, k), 0.5)
}
