//! Near-kernels of truncated u₂₂ and the multiplication maps D(F, F′) between them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core_functions::{FactorSpec, Place};
use crate::error::{QiError, Result};
use crate::fourier::{hybrid_coeffs, quadrature_spec, CoefficientStream, HybridOptions, Method};
use crate::operators::{toeplitz_u22, DenseMatrix};

pub const DEFAULT_EPS: f64 = 1e-3;
const GRID: usize = 1 << 14;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoninReport {
    pub place_set: Vec<Place>,
    pub truncation: usize,
    pub epsilon: f64,
    /// Coefficients on z^{-j-1}, j = 0..truncation.
    pub kernel_basis: Vec<Vec<Complex64>>,
    /// Singular values below epsilon, matching kernel_basis.
    pub kernel_singular_values: Vec<f64>,
    pub dimension_curve: Vec<(usize, usize)>,
    pub map_residuals: Option<Vec<f64>>,
}

pub fn spec_of_places(places: &[Place]) -> Result<FactorSpec> {
    let mut sorted = places.to_vec();
    sorted.sort_by_key(|p| match p {
        Place::Archimedean => 0,
        Place::Prime(q) => *q,
    });
    sorted.dedup();
    let atoms = sorted
        .into_iter()
        .map(|p| match p {
            Place::Archimedean => Ok(FactorSpec::inf()),
            Place::Prime(q) => Place::prime(q).map(FactorSpec::FullRatio),
        })
        .collect::<Result<Vec<_>>>()?;
    if atoms.len() == 1 {
        return Ok(atoms.into_iter().next().unwrap());
    }
    FactorSpec::product(atoms)
}

fn check_places(places: &[Place]) -> Result<()> {
    if !places.contains(&Place::Archimedean) {
        return Err(QiError::Precondition("place set must contain the archimedean place".into()));
    }
    Ok(())
}

/// Two-sided quadrature stream of κ(F) covering |k| < n.
pub fn u22_stream(places: &[Place], n: usize) -> Result<CoefficientStream> {
    let spec = spec_of_places(places)?;
    quadrature_spec(&spec, GRID, -(n as i64 - 1), n as i64 - 1)
}

/// Right singular vectors of an n×n block with σ < eps, as (σ, vector) pairs in ascending σ.
fn near_kernel(m: &DenseMatrix, eps: f64) -> Result<Vec<(f64, Vec<Complex64>)>> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| QiError::Precondition("singular value decomposition failed".into()))?;
    let mut out: Vec<(f64, Vec<Complex64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s < eps)
        .map(|(i, s)| (*s, vt.row(i).iter().map(|z| z.conj()).collect()))
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

fn sweep_sizes(n: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = [n / 4, n / 2].into_iter().filter(|s| *s >= 16).collect();
    sizes.push(n);
    sizes
}

pub fn sonin_kernel(places: &[Place], n: usize, eps: f64) -> Result<SoninReport> {
    check_places(places)?;
    let stream = u22_stream(places, n)?;
    sonin_kernel_from_stream(places, &stream, n, eps)
}

pub fn sonin_kernel_from_stream(places: &[Place], stream: &CoefficientStream, n: usize, eps: f64) -> Result<SoninReport> {
    check_places(places)?;
    if n == 0 || n > crate::diagnostics::MAX_TRUNCATION {
        return Err(QiError::Precondition(format!("truncation {n} outside 1..=512")));
    }
    if !(eps > 0.0) {
        return Err(QiError::Precondition("eps must be positive".into()));
    }
    let sizes = sweep_sizes(n);
    let dims: Vec<(usize, usize)> = sizes
        .par_iter()
        .map(|&m| Ok((m, near_kernel(&toeplitz_u22(stream, m)?, eps)?.len())))
        .collect::<Result<_>>()?;
    let kernel = near_kernel(&toeplitz_u22(stream, n)?, eps)?;
    let (kernel_singular_values, kernel_basis) = kernel.into_iter().unzip();
    Ok(SoninReport {
        place_set: places.to_vec(),
        truncation: n,
        epsilon: eps,
        kernel_basis,
        kernel_singular_values,
        dimension_curve: dims,
        map_residuals: None,
    })
}

fn new_primes(f: &[Place], f_prime: &[Place]) -> Result<Vec<u64>> {
    check_places(f)?;
    check_places(f_prime)?;
    if let Some(p) = f.iter().find(|p| !f_prime.contains(p)) {
        return Err(QiError::Precondition(format!("{p:?} is in F but not in F′")));
    }
    let extra: Vec<u64> = f_prime
        .iter()
        .filter(|p| !f.contains(p))
        .filter_map(|p| match p {
            Place::Prime(q) => Some(*q),
            Place::Archimedean => None,
        })
        .collect();
    if extra.is_empty() {
        return Err(QiError::Precondition("F must be a proper subset of F′".into()));
    }
    Ok(extra)
}

/// L_n^{(-1)}(x), n = 0..len, by the three-term recurrence.
pub fn laguerre_minus_one(x: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    out.push(1.0);
    if len == 1 {
        return out;
    }
    out.push(-x);
    for n in 1..len - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf - x) * out[n] - (nf - 1.0) * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

/// d₀, d₋₁, … of (1 - p^{-ψ(v)}) = 1 - p^{-3/2} Σ L_n^{(-1)}(2 log p) v^{-n}.
fn single_prime_series(p: u64, len: usize) -> Vec<Complex64> {
    let pf = p as f64;
    let scale = pf.powf(-1.5);
    laguerre_minus_one(2.0 * pf.ln(), len)
        .into_iter()
        .enumerate()
        .map(|(n, l)| c(if n == 0 { 1.0 } else { 0.0 } - scale * l, 0.0))
        .collect()
}

fn convolve(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); len];
    for (i, x) in a.iter().enumerate().take(len) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Closed-form coefficients of D(F, F′)∘ψ at k = 0, -1, …, -(len-1).
pub fn d_multiplier_series(f: &[Place], f_prime: &[Place], len: usize) -> Result<Vec<Complex64>> {
    let primes = new_primes(f, f_prime)?;
    let mut acc = vec![c(0.0, 0.0); len.max(1)];
    acc[0] = c(1.0, 0.0);
    for p in primes {
        acc = convolve(&acc, &single_prime_series(p, len), len.max(1));
    }
    acc.truncate(len);
    Ok(acc)
}

fn d_label(f: &[Place], f_prime: &[Place]) -> String {
    let primes: Vec<String> = f_prime
        .iter()
        .filter(|p| !f.contains(p))
        .filter_map(|p| if let Place::Prime(q) = p { Some(format!("(1-{q}^-z)")) } else { None })
        .collect();
    primes.join("*")
}

/// Quadrature coefficients of D(F, F′)∘ψ on |k| ≤ k_max; error bounds are the distance to the
/// closed form on k ≤ 0 and the coefficient itself on k > 0.
pub fn d_multiplier_coeffs(f: &[Place], f_prime: &[Place], k_max: usize) -> Result<CoefficientStream> {
    let primes = new_primes(f, f_prime)?;
    let km = k_max as i64;
    let nk = 2 * k_max + 1;
    // D = Σ_{S} (-1)^{|S|} (∏_S p)^{-z}; each term is periodic on the line
    let mut total = vec![c(0.0, 0.0); nk];
    for mask in 0u32..(1 << primes.len()) {
        let mut q = 1u64;
        for (i, p) in primes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                q *= p;
            }
        }
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        if q == 1 {
            total[k_max] += sign;
            continue;
        }
        let lq = (q as f64).ln();
        let term = move |z: Complex64| -> Result<Complex64> { Ok((-z * lq).exp()) };
        let opts = HybridOptions {
            s_lo: 4.0,
            s_hi: 12.0,
            s_max: 200.0,
            period: Some(2.0 * std::f64::consts::PI / lq),
            mean: 0.0,
            rate: lq,
        };
        let cs = hybrid_coeffs(&term, GRID, -km, km, &opts)?;
        for (t, v) in total.iter_mut().zip(cs) {
            *t += sign * v;
        }
    }
    let closed = d_multiplier_series(f, f_prime, k_max + 1)?;
    let errs: Vec<f64> = (-km..=km)
        .zip(&total)
        .map(|(k, v)| if k <= 0 { (v - closed[(-k) as usize]).norm() } else { v.norm() })
        .collect();
    Ok(CoefficientStream::from_parts(&d_label(f, f_prime), Method::Quadrature, -km, total, errs))
}

/// Largest |c_k| over k > 0.
pub fn positive_leakage(stream: &CoefficientStream) -> f64 {
    stream.values.range(1..).map(|(_, v)| v.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCheck {
    pub residuals: Vec<f64>,
    /// ‖part of Dξ beyond the truncation‖ / ‖Dξ‖ for each kernel vector.
    pub discarded_mass: Vec<f64>,
    /// Eigenvalues of the Gram matrix of the truncated images, ascending.
    pub gram_eigenvalues: Vec<f64>,
}

impl MapCheck {
    pub fn gram_min(&self) -> f64 {
        self.gram_eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Dξ in the range basis: index j of ξ moves to j + n with weight d₋ₙ.
pub fn apply_d(d: &[Complex64], xi: &[Complex64]) -> (Vec<Complex64>, f64) {
    let n = xi.len();
    let full = convolve(xi, d, 2 * n);
    let kept: Vec<Complex64> = full[..n].to_vec();
    let dropped: f64 = full[n..].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    (kept, dropped)
}

pub fn inductive_map_check(f: &[Place], f_prime: &[Place], report: &SoninReport) -> Result<MapCheck> {
    let stream = u22_stream(f_prime, report.truncation)?;
    inductive_map_check_with(f, f_prime, report, &stream)
}

pub fn inductive_map_check_with(
    f: &[Place],
    f_prime: &[Place],
    report: &SoninReport,
    stream_prime: &CoefficientStream,
) -> Result<MapCheck> {
    if report.place_set != f {
        return Err(QiError::Precondition("report was computed for a different place set".into()));
    }
    let n = report.truncation;
    let d = d_multiplier_series(f, f_prime, 2 * n)?;
    let t = toeplitz_u22(stream_prime, n)?;
    let mut residuals = Vec::new();
    let mut discarded = Vec::new();
    let mut images = Vec::new();
    for xi in &report.kernel_basis {
        let norm_xi: f64 = xi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm_xi < 1e-12 {
            return Err(QiError::Precondition("zero kernel vector".into()));
        }
        let (img, dropped) = apply_d(&d, xi);
        let v = nalgebra::DVector::from_vec(img);
        let nv = v.norm();
        if nv < 1e-12 {
            return Err(QiError::Precondition("degenerate image ‖Dξ‖ < 1e-12".into()));
        }
        residuals.push((&t * &v).norm() / nv);
        discarded.push(dropped / (nv * nv + dropped * dropped).sqrt());
        images.push(v);
    }
    let gram_eigenvalues = if images.is_empty() {
        vec![]
    } else {
        let x = DMatrix::from_columns(&images);
        let g = x.adjoint() * x;
        let mut ev: Vec<f64> = g.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    };
    Ok(MapCheck { residuals, discarded_mass: discarded, gram_eigenvalues })
}
