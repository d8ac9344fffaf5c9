//! Truncations of (1-P)uP and u₂₂, rank-one pole models, Gram matrices, Blaschke products.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{prime_pole_disk, psi, psi_inv};
use crate::core_functions::{poles_residues, rho, FactorSpec, PoleDatum, Window};
use crate::error::{QiError, Result};
use crate::fourier::CoefficientStream;
use crate::special::{binomial, linear_fit};

pub type DenseMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankOneTerm {
    pub coeff: Complex64,
    pub pole: Complex64,
}

/// Principal part Σ_j coeffs[j-1] (v - x)^{-j} of κ at a pole of order ≥ 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplePole {
    pub x: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl MultiplePole {
    /// (α, β) with a₋ₖ contribution α x^{k-1} + β (k-1) x^{k-1}, for order 2.
    pub fn alpha_beta(&self) -> Option<(Complex64, Complex64)> {
        match self.coeffs.as_slice() {
            [e1, e2] => Some((*e1, *e2 / self.x)),
            _ => None,
        }
    }

    /// Contribution Σ_j e_j C(k-1, j-1) x^{k-j} to a₋ₖ.
    pub fn coefficient(&self, k: u64) -> Complex64 {
        let mut acc = c(0.0, 0.0);
        for (j0, e) in self.coeffs.iter().enumerate() {
            let j = j0 as u64 + 1;
            if k >= j {
                acc += e * binomial(k - 1, j - 1) * self.x.powu((k - j) as u32);
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankOneModel {
    pub terms: Vec<RankOneTerm>,
    pub finite_rank_extra: Vec<MultiplePole>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    /// Archimedean-type poles kept: z ≥ -2·arch_terms.
    pub arch_terms: usize,
    /// Prime-type poles kept: |Im z| ≤ prime_height.
    pub prime_height: f64,
}

impl ModelOptions {
    /// Keep |n| ≤ n_terms poles of the smallest prime.
    pub fn with_prime_terms(spec: &FactorSpec, n_terms: usize) -> Self {
        let lmax = spec.primes().iter().map(|p| (*p as f64).ln()).fold(0.0, f64::max);
        let h = if lmax > 0.0 { 2.0 * PI * (n_terms as f64 + 0.5) / lmax } else { 0.5 };
        ModelOptions { arch_terms: 40, prime_height: h }
    }

    /// Height chosen so that about `rank` prime poles enter, moved to the middle of the widest
    /// gap between neighbouring pole heights so that no near-coincident pair is split.
    pub fn for_section_rank(spec: &FactorSpec, rank: usize) -> Self {
        let primes = spec.primes();
        if primes.is_empty() {
            return ModelOptions { arch_terms: 40, prime_height: 0.5 };
        }
        let sum_l: f64 = primes.iter().map(|p| (*p as f64).ln()).sum();
        let target = PI * rank as f64 / sum_l;
        let mut heights: Vec<f64> = Vec::new();
        for p in &primes {
            let period = 2.0 * PI / (*p as f64).ln();
            let mut h = period;
            while h <= 1.3 * target + period {
                heights.push(h);
                h += period;
            }
        }
        heights.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut best = (0.0, target);
        for w in heights.windows(2) {
            if w[0] >= 0.8 * target && w[1] <= 1.25 * target && w[1] - w[0] > best.0 {
                best = (w[1] - w[0], 0.5 * (w[0] + w[1]));
            }
        }
        ModelOptions { arch_terms: 40, prime_height: best.1 }
    }
}

/// v-plane principal part of a z-plane pole datum.
pub fn disk_pole(pd: &PoleDatum) -> Result<(Complex64, Vec<Complex64>)> {
    let x0 = psi_inv(pd.location)?;
    let d = x0 - 1.0;
    let order = pd.order as usize;
    let mut e = vec![c(0.0, 0.0); order];
    // (z - z0)^{-j} = (-(x0-1)/2)^j (x0-1+t)^j t^{-j}
    for j in 1..=order {
        let cj = pd.leading_coefficients[j - 1];
        let pre = cj * (-d / 2.0).powu(j as u32);
        for m in 1..=j {
            e[m - 1] += pre * binomial(j as u64, (j - m) as u64) * d.powu(m as u32);
        }
    }
    Ok((x0, e))
}

impl RankOneModel {
    pub fn from_spec(spec: &FactorSpec, opts: &ModelOptions) -> Result<Self> {
        let w = Window::new(
            -2.0 * opts.arch_terms as f64 - 0.5,
            0.5,
            -opts.prime_height,
            opts.prime_height,
        );
        let poles = poles_residues(spec, w);
        let mut model = RankOneModel::default();
        for pd in &poles {
            let (x0, e) = disk_pole(pd)?;
            if e.len() == 1 {
                model.terms.push(RankOneTerm { coeff: e[0], pole: x0 });
            } else {
                model.finite_rank_extra.push(MultiplePole { x: x0, coeffs: e });
            }
        }
        model.sort();
        Ok(model)
    }

    /// ρ∞ model with the closed-form weights.
    pub fn rho_inf(n_terms: usize) -> Self {
        let mut model = RankOneModel::default();
        for n in 0..n_terms {
            let nf = n as f64;
            let w = 2.0
                * ((2.0 * nf + 0.5) * PI.ln()
                    - crate::special::ln_gamma_real(nf + 1.0)
                    - crate::special::ln_gamma_real(nf + 0.5))
                .exp()
                / (4.0 * nf + 3.0).powi(2)
                * 8.0;
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            model.terms.push(RankOneTerm { coeff: c(sign * w, 0.0), pole: c(crate::conformal::arch_pole_disk(n as u64), 0.0) });
        }
        model.sort();
        model
    }

    /// ρ_p model over |n| ≤ n_terms.
    pub fn rho_p(p: u64, n_terms: usize) -> Self {
        let l = (p as f64).ln();
        let mut model = RankOneModel::default();
        for n in -(n_terms as i64)..=(n_terms as i64) {
            let den = c(4.0 * PI * n as f64, 3.0 * l);
            let coeff = 8.0 * (1.0 - 1.0 / p as f64) * l / (den * den);
            model.terms.push(RankOneTerm { coeff, pole: prime_pole_disk(p, n) });
        }
        model.sort();
        model
    }

    fn sort(&mut self) {
        self.terms.sort_by(|a, b| b.coeff.norm().partial_cmp(&a.coeff.norm()).unwrap());
    }

    /// a₋ₖ for k = 1..=k_max.
    pub fn coefficients(&self, k_max: usize) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); k_max];
        let partial: Vec<Vec<Complex64>> = self
            .terms
            .par_chunks(256)
            .map(|chunk| {
                let mut acc = vec![c(0.0, 0.0); k_max];
                for t in chunk {
                    let mut pw = t.coeff;
                    for a in acc.iter_mut() {
                        *a += pw;
                        pw *= t.pole;
                    }
                }
                acc
            })
            .collect();
        for p in partial {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        for mp in &self.finite_rank_extra {
            for (k, o) in out.iter_mut().enumerate() {
                *o += mp.coefficient(k as u64 + 1);
            }
        }
        out
    }
}

/// Hankel truncation H[i][j] = a₋(i+j+1).
pub fn hankel_truncation(stream: &CoefficientStream, n: usize) -> Result<DenseMatrix> {
    let mut a = Vec::with_capacity(2 * n);
    for k in 1..=(2 * n as i64 - 1) {
        a.push(stream.get(-k).ok_or(QiError::InsufficientRange(-k))?);
    }
    Ok(DMatrix::from_fn(n, n, |i, j| a[i + j]))
}

pub fn hankel_from_coefficients(a: &[Complex64], n: usize) -> Result<DenseMatrix> {
    if a.len() < 2 * n - 1 {
        return Err(QiError::InsufficientRange(-(2 * n as i64 - 1)));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| a[i + j]))
}

pub fn rank_one_materialize(model: &RankOneModel, n: usize) -> DenseMatrix {
    let a = model.coefficients(2 * n);
    DMatrix::from_fn(n, n, |i, j| a[i + j])
}

/// ξ_x truncated to n range coordinates: x^i.
pub fn xi_vector(x: Complex64, n: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(n, c(0.0, 0.0));
    let mut pw = c(1.0, 0.0);
    for i in 0..n {
        v[i] = pw;
        pw *= x;
    }
    v
}

/// η_x truncated to n domain coordinates: conj(x)^j.
pub fn eta_vector(x: Complex64, n: usize) -> DVector<Complex64> {
    xi_vector(x.conj(), n)
}

/// Toeplitz truncation of u₂₂: M[m][j] = c_{j-m}.
pub fn toeplitz_u22(stream: &CoefficientStream, n: usize) -> Result<DenseMatrix> {
    toeplitz_rect(stream, n, n)
}

pub fn toeplitz_rect(stream: &CoefficientStream, rows: usize, cols: usize) -> Result<DenseMatrix> {
    let lo = -(rows as i64 - 1);
    let hi = cols as i64 - 1;
    let mut coeffs = Vec::with_capacity((hi - lo + 1) as usize);
    for k in lo..=hi {
        coeffs.push(stream.get(k).ok_or(QiError::InsufficientRange(k))?);
    }
    Ok(DMatrix::from_fn(rows, cols, |m, j| coeffs[(j as i64 - m as i64 - lo) as usize]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DecayModel {
    PowerLaw { alpha: f64 },
    StretchedExp { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub singular_values: Vec<f64>,
    pub truncation_size: usize,
    pub fitted_decay: DecayFit,
    pub power_law: DecayFit,
    pub stretched_exp: DecayFit,
    pub fit_count: usize,
}

impl SpectralProfile {
    pub fn from_values(mut values: Vec<f64>, truncation_size: usize) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let (power_law, stretched_exp, fit_count) = fit_decay(&values);
        let fitted_decay = if stretched_exp.r_squared > power_law.r_squared { stretched_exp } else { power_law };
        SpectralProfile { singular_values: values, truncation_size, fitted_decay, power_law, stretched_exp, fit_count }
    }

    pub fn count_above(&self, tau: f64) -> usize {
        self.singular_values.iter().filter(|s| **s > tau).count()
    }
}

/// Fits on the top 75% of the values above the double-precision floor n·ε·σ₀.
fn fit_decay(values: &[f64]) -> (DecayFit, DecayFit, usize) {
    let n = values.len().max(1);
    let floor = values.first().copied().unwrap_or(0.0) * n as f64 * f64::EPSILON;
    let nonzero = values.iter().take_while(|v| **v > floor && **v > 0.0).count();
    let m = ((3 * nonzero) / 4).max(3.min(nonzero));
    if m < 2 {
        let flat = DecayFit { model: DecayModel::PowerLaw { alpha: 0.0 }, r_squared: 0.0 };
        return (flat, DecayFit { model: DecayModel::StretchedExp { c: 0.0 }, r_squared: 0.0 }, m);
    }
    let y: Vec<f64> = values[..m].iter().map(|v| v.ln()).collect();
    let lk: Vec<f64> = (1..=m).map(|k| (k as f64).ln()).collect();
    let sk: Vec<f64> = (1..=m).map(|k| (k as f64).sqrt()).collect();
    let (_, b1, r1) = linear_fit(&lk, &y);
    let (_, b2, r2) = linear_fit(&sk, &y);
    (
        DecayFit { model: DecayModel::PowerLaw { alpha: -b1 }, r_squared: r1 },
        DecayFit { model: DecayModel::StretchedExp { c: -b2 }, r_squared: r2 },
        m,
    )
}

pub fn singular_values(m: &DenseMatrix) -> Result<SpectralProfile> {
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(QiError::Precondition("matrix has non-finite entries".into()));
    }
    let sv = m.clone().svd(false, false).singular_values;
    Ok(SpectralProfile::from_values(sv.iter().copied().collect(), m.nrows().min(m.ncols())))
}

/// Hermitian PSD square root, negative eigenvalues clipped.
fn psd_sqrt(g: &DenseMatrix) -> DenseMatrix {
    let h = (g + g.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let d = eig.eigenvalues.map(|l| c(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&d) * v.adjoint()
}

fn derivative_vector(x: Complex64, a: usize) -> Vec<Complex64> {
    let r = x.norm();
    let len = if r < 1e-300 {
        a + 1
    } else {
        (((1e-18f64).ln() / r.ln()).ceil() as usize + 4 * a + 8).min(200_000)
    };
    (0..len)
        .map(|i| if i < a { c(0.0, 0.0) } else { binomial(i as u64, a as u64) * x.powu((i - a) as u32) })
        .collect()
}

/// Exact singular values of the operator Σ c|ξ⟩⟨η| (+ higher-order pole blocks) of a model,
/// via Gram square roots in the span of its pole vectors.
pub fn pole_basis_spectrum(model: &RankOneModel) -> Result<SpectralProfile> {
    let n = model.terms.len();
    let mut blocks: Vec<(Complex64, usize)> = Vec::new();
    for mp in &model.finite_rank_extra {
        for a in 0..mp.coeffs.len() {
            blocks.push((mp.x, a));
        }
    }
    let dim = n + blocks.len();
    if dim == 0 {
        return Ok(SpectralProfile::from_values(vec![], 0));
    }
    let xs: Vec<Complex64> = model.terms.iter().map(|t| t.pole).collect();
    let norms: Vec<f64> = xs.iter().map(|x| (1.0 / (1.0 - x.norm_sqr())).sqrt()).collect();
    let mut gu = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            gu[(i, j)] = 1.0 / (1.0 - xs[i].conj() * xs[j]) / (norms[i] * norms[j]);
        }
    }
    let dvecs: Vec<Vec<Complex64>> = blocks.iter().map(|(x, a)| derivative_vector(*x, *a)).collect();
    for (b, (x, a)) in blocks.iter().enumerate() {
        for i in 0..n {
            // ⟨ξ_y | ξ^{(a)}_x⟩ = ȳ^a / (1 - ȳx)^{a+1}
            let yb = xs[i].conj();
            let val = yb.powu(*a as u32) / (1.0 - yb * x).powu(*a as u32 + 1) / norms[i];
            gu[(i, n + b)] = val;
            gu[(n + b, i)] = val.conj();
        }
        for (b2, _) in blocks.iter().enumerate() {
            let (u, v) = (&dvecs[b], &dvecs[b2]);
            let s: Complex64 = u.iter().zip(v.iter()).map(|(p, q)| p.conj() * q).sum();
            gu[(n + b, n + b2)] = s;
        }
    }
    let gw = gu.map(|z| z.conj());
    let mut k = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for (i, t) in model.terms.iter().enumerate() {
        k[(i, i)] = t.coeff * norms[i] * norms[i];
    }
    let mut base = n;
    for mp in &model.finite_rank_extra {
        // e_j Σ_{a+b=j-1} |ξ^{(a)}⟩⟨η^{(b)}|
        for (j0, e) in mp.coeffs.iter().enumerate() {
            for a in 0..=j0 {
                k[(base + a, base + j0 - a)] += *e;
            }
        }
        base += mp.coeffs.len();
    }
    let ru = psd_sqrt(&gu);
    let rw = psd_sqrt(&gw);
    let t = &ru * k * rw.adjoint();
    let mut prof = singular_values(&t)?;
    prof.truncation_size = dim;
    Ok(prof)
}

/// Gram matrix of ζ_n(k) = 2^{3/2} L^{1/2} x_p(n)^k / (4πn + 3iL) over an index range.
pub struct GramComparison {
    pub indices: Vec<i64>,
    pub series: DenseMatrix,
    pub closed_form: DenseMatrix,
    pub tail_bound: DenseMatrix,
}

pub fn gram_zeta(p: u64, indices: &[i64], k_terms: usize) -> GramComparison {
    let l = (p as f64).ln();
    let m = indices.len();
    let zeta_scale = |n: i64| c(2f64.powf(1.5) * l.sqrt(), 0.0) / c(4.0 * PI * n as f64, 3.0 * l);
    let mut series = DMatrix::from_element(m, m, c(0.0, 0.0));
    let mut closed = series.clone();
    let mut tail = series.clone();
    for (a, &ma) in indices.iter().enumerate() {
        for (b, &nb) in indices.iter().enumerate() {
            let q = prime_pole_disk(p, ma).conj() * prime_pole_disk(p, nb);
            let pre = zeta_scale(ma).conj() * zeta_scale(nb);
            series[(a, b)] = pre * partial_geometric(q, k_terms);
            closed[(a, b)] = 1.0 / c(l, 2.0 * PI * (ma - nb) as f64);
            tail[(a, b)] = c(pre.norm() * q.norm().powi(k_terms as i32) / (1.0 - q.norm()), 0.0);
        }
    }
    GramComparison { indices: indices.to_vec(), series, closed_form: closed, tail_bound: tail }
}

/// Σ_{k<n} q^k summed in blocks: (Σ_{i<B} q^i)(Σ_{j<n/B} q^{jB}) plus the leftover terms.
fn partial_geometric(q: Complex64, n: usize) -> Complex64 {
    let block = (n as f64).sqrt().ceil().max(1.0) as usize;
    let mut inner = c(0.0, 0.0);
    let mut pw = c(1.0, 0.0);
    for _ in 0..block {
        inner += pw;
        pw *= q;
    }
    let qb = pw;
    let full = n / block;
    let mut outer = c(0.0, 0.0);
    let mut pb = c(1.0, 0.0);
    for _ in 0..full {
        outer += pb;
        pb *= qb;
    }
    let mut s = inner * outer;
    for _ in full * block..n {
        s += pb;
        pb *= q;
    }
    s
}

/// ⟨Bδ_m, Bδ_n⟩ for the weight w(x)² = p^{1-x}/(p-1) on [0,1], by Gauss-Legendre quadrature,
/// together with the unnormalized closed form (p-1)/(log p + 2πi(m-n)).
pub fn sqrt_multiplier_gram(p: u64, indices: &[i64]) -> (DenseMatrix, DenseMatrix) {
    let pf = p as f64;
    let l = pf.ln();
    let (gx, gw) = crate::special::gauss_legendre(32);
    let panels = 64;
    let m = indices.len();
    let mut quad = DMatrix::from_element(m, m, c(0.0, 0.0));
    let mut raw = quad.clone();
    for (a, &ma) in indices.iter().enumerate() {
        for (b, &nb) in indices.iter().enumerate() {
            let freq = 2.0 * PI * (ma - nb) as f64;
            let mut s = c(0.0, 0.0);
            for q in 0..panels {
                let x0 = q as f64 / panels as f64;
                let h = 1.0 / panels as f64;
                for (t, w) in gx.iter().zip(&gw) {
                    let x = x0 + 0.5 * h * (t + 1.0);
                    let weight = pf.powf(1.0 - x) / (pf - 1.0);
                    s += weight * Complex64::from_polar(1.0, -freq * x) * (0.5 * h * w);
                }
            }
            quad[(a, b)] = s;
            raw[(a, b)] = (pf - 1.0) / c(l, freq);
        }
    }
    (quad, raw)
}

/// ι_p(v) = -p^{(v+1)/(v-1)}.
pub fn iota(p: u64, v: Complex64) -> Result<Complex64> {
    let w = psi(v)? - 0.5;
    Ok(-(w * (p as f64).ln()).exp())
}

pub struct BlaschkeValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Blaschke factor (|a|/a)(a - v)/(1 - āv), or v for a = 0.
fn blaschke_factor(a: Complex64, v: Complex64) -> Complex64 {
    if a.norm() == 0.0 {
        return v;
    }
    (a.norm() / a) * (a - v) / (1.0 - a.conj() * v)
}

/// Truncated Blaschke product over the zeros x_p(n), |n| ≤ n_trunc.
pub fn blaschke(p: u64, v: Complex64, n_trunc: usize) -> Result<BlaschkeValue> {
    if v.norm() > 1.0 || (v - 1.0).norm() < 1e-14 {
        return Err(QiError::Precondition(format!("Blaschke product needs |v| ≤ 1, v ≠ 1 (got {v})")));
    }
    let nt = n_trunc as i64;
    let mut prod = c(1.0, 0.0);
    for n in -nt..=nt {
        let a = prime_pole_disk(p, n);
        if (a - v).norm() < 1e-15 {
            return Ok(BlaschkeValue { value: c(0.0, 0.0), tail_bound: 0.0 });
        }
        prod *= blaschke_factor(a, v);
    }
    // 1 - b_a(v) = (1-|a|)(a + |a|v) / (a(1 - āv)); the omitted zeros sit within δ of 1
    // and Σ_{|n|>N} (1-|a_n|) ≤ L²/(π² N (1 + |a_N|))
    let l = (p as f64).ln();
    let edge = prime_pole_disk(p, nt.max(1));
    let tail_sum = l * l / (PI * PI * nt.max(1) as f64 * (1.0 + edge.norm()));
    let delta = (edge - 1.0).norm();
    let lever = ((1.0 + v).norm() + 2.0 * delta) / ((1.0 - delta) * ((1.0 - v).norm() - delta).max(1e-12));
    let tail_bound = (tail_sum * lever).exp_m1();
    Ok(BlaschkeValue { value: prod, tail_bound })
}

/// First `len` Taylor coefficients of the truncated Blaschke product.
pub fn blaschke_taylor(p: u64, n_trunc: usize, len: usize) -> Vec<Complex64> {
    let nt = n_trunc as i64;
    let mut f = vec![c(0.0, 0.0); len];
    f[0] = c(1.0, 0.0);
    for n in -nt..=nt {
        let a = prime_pole_disk(p, n);
        let u = a.norm() / a;
        // g = f / (1 - ā v)
        let ab = a.conj();
        let mut prev = c(0.0, 0.0);
        for k in 0..len {
            f[k] += ab * prev;
            prev = f[k];
        }
        // f ← u (a - v) g
        let mut out = vec![c(0.0, 0.0); len];
        for k in 0..len {
            out[k] = u * a * f[k] - if k > 0 { u * f[k - 1] } else { c(0.0, 0.0) };
        }
        f = out;
    }
    f
}

/// Index negation on a symmetric window [-N, N] stored at offset N.
pub fn involution_i(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().rev().copied().collect()
}

/// (Jf)(z) = z^{-1} f(z^{-1}): coefficient k of f moves to -k-1. Input covers [lo, lo+len).
pub fn involution_j(lo: i64, v: &[Complex64]) -> (i64, Vec<Complex64>) {
    let hi = lo + v.len() as i64 - 1;
    (-hi - 1, v.iter().rev().copied().collect())
}

/// Value of the symbol used for tests on the closed disk.
pub fn kappa_times_blaschke(p: u64, v: Complex64, n_trunc: usize) -> Result<(Complex64, f64)> {
    let z = psi(v)?;
    let k = rho(&FactorSpec::p(p), z)?;
    let b = blaschke(p, v, n_trunc)?;
    Ok((k * b.value, b.tail_bound))
}
