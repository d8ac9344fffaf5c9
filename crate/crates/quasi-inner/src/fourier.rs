//! Fourier coefficients c_k = (1/2π)∫ κ(e^{iθ}) e^{-ikθ} dθ, by quadrature and by residue series.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::conformal::{psi_boundary, theta_of_s, BoundaryGrid};
use crate::core_functions::{rho, FactorSpec, Place};
use crate::error::{QiError, Result};
use crate::operators::{ModelOptions, RankOneModel};
use crate::special::{gauss_legendre, smooth_step};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ResidueSeries,
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientStream {
    pub spec: String,
    pub method: Method,
    pub k_min: i64,
    pub k_max: i64,
    pub values: BTreeMap<i64, Complex64>,
    pub error_bound: BTreeMap<i64, f64>,
}

impl CoefficientStream {
    pub fn get(&self, k: i64) -> Option<Complex64> {
        self.values.get(&k).copied()
    }

    pub fn bound(&self, k: i64) -> Option<f64> {
        self.error_bound.get(&k).copied()
    }

    /// a₋₁, a₋₂, …, a₋ₙ.
    pub fn negative(&self, n: usize) -> Result<Vec<Complex64>> {
        (1..=n as i64).map(|k| self.get(-k).ok_or(QiError::InsufficientRange(-k))).collect()
    }

    pub(crate) fn from_parts(spec: &str, method: Method, k_min: i64, vals: Vec<Complex64>, errs: Vec<f64>) -> Self {
        let k_max = k_min + vals.len() as i64 - 1;
        let values = (k_min..=k_max).zip(vals).collect();
        let error_bound = (k_min..=k_max).zip(errs).collect();
        CoefficientStream { spec: spec.to_string(), method, k_min, k_max, values, error_bound }
    }
}

fn check_range(n: usize, k_min: i64, k_max: i64) -> Result<()> {
    let limit = (n / 4) as i64;
    if k_min > k_max {
        return Err(QiError::Precondition(format!("empty index range [{k_min}, {k_max}]")));
    }
    for k in [k_min, k_max] {
        if k.abs() > limit {
            return Err(QiError::OutOfRange { k, limit });
        }
    }
    Ok(())
}

fn dft(samples: &[Complex64], offset: f64, k_min: i64, k_max: i64) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    (k_min..=k_max)
        .map(|k| {
            let idx = k.rem_euclid(n as i64) as usize;
            buf[idx] / n as f64 * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * offset / n as f64)
        })
        .collect()
}

/// Trapezoidal coefficients from samples on `grid`; the bound is the change against the
/// coarsened grid made of every other sample.
pub fn quadrature_coeffs(
    spec: &str,
    samples: &[Complex64],
    grid: &BoundaryGrid,
    k_min: i64,
    k_max: i64,
) -> Result<CoefficientStream> {
    if samples.len() != grid.n_points {
        return Err(QiError::Precondition(format!("{} samples for a grid of {}", samples.len(), grid.n_points)));
    }
    check_range(grid.n_points, k_min, k_max)?;
    let fine = dft(samples, grid.offset, k_min, k_max);
    let coarse_grid = grid.coarsen()?;
    let coarse_samples: Vec<Complex64> = samples.iter().step_by(2).copied().collect();
    let coarse = dft(&coarse_samples, coarse_grid.offset, k_min, k_max);
    let errs = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).collect();
    Ok(CoefficientStream::from_parts(spec, Method::Quadrature, k_min, fine, errs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridOptions {
    /// Inner edge of the transition from the FFT part to the s-integral.
    pub s_lo: f64,
    pub s_hi: f64,
    /// End of the s-integral; the outer window runs over [s_max/2, s_max].
    pub s_max: f64,
    /// Exact tail summation for a symbol periodic in s with this period.
    pub period: Option<f64>,
    /// Asymptotic mean of the symbol along the line, integrated in closed form.
    pub mean: f64,
    /// Oscillation rate of the symbol in s, used for the panel width.
    pub rate: f64,
}

impl HybridOptions {
    pub fn for_spec(spec: &FactorSpec) -> Self {
        let primes = spec.primes();
        let oscillating = spec.atoms().iter().any(|a| {
            matches!(
                a,
                FactorSpec::FullRatio(Place::Archimedean)
                    | FactorSpec::GaussFactor { .. }
                    | FactorSpec::NormalizedGaussFactor { .. }
            )
        });
        let sum_l: f64 = primes.iter().map(|p| (*p as f64).ln()).sum();
        let single_prime = !oscillating && primes.len() == 1;
        let mean = if oscillating { 0.0 } else { primes.iter().map(|p| 1.0 - 1.0 / *p as f64).product() };
        HybridOptions {
            s_lo: 4.0,
            s_hi: 12.0,
            s_max: if single_prime {
                200.0
            } else if oscillating {
                3000.0 * (1.0 + primes.len() as f64)
            } else {
                4000.0
            },
            period: if single_prime { Some(2.0 * PI / sum_l) } else { None },
            mean: if single_prime { 0.0 } else { mean },
            rate: sum_l + if oscillating { 1.0 } else { 0.0 },
        }
    }

    fn chi(&self, s: f64) -> f64 {
        smooth_step((s.abs() - self.s_lo) / (self.s_hi - self.s_lo))
    }

    fn outer(&self, s: f64) -> f64 {
        if self.period.is_some() {
            1.0
        } else {
            1.0 - smooth_step((s.abs() - 0.5 * self.s_max) / (0.5 * self.s_max))
        }
    }
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    GL.get_or_init(|| gauss_legendre(16))
}

/// Adds Σ g_i e^{-ikθ_i} over k_min..=k_max into acc.
fn accumulate(acc: &mut [Complex64], g: Complex64, theta: f64, k_min: i64) {
    let step = Complex64::from_polar(1.0, -theta);
    let mut e = g * Complex64::from_polar(1.0, -(k_min as f64) * theta);
    for a in acc.iter_mut() {
        *a += e;
        e *= step;
    }
}

fn panel_edges(opts: &HybridOptions, k_abs: f64, end: f64) -> Vec<f64> {
    let mut edges = vec![opts.s_lo];
    let mut s = opts.s_lo;
    while s < end {
        let rate = (2.0 + s).ln() * opts.rate.min(1.0) + opts.rate + 2.0 * k_abs / (1.0 + s * s);
        let h = (2.5 / rate).min(0.25);
        s = (s + h).min(end);
        edges.push(s);
    }
    edges
}

fn sum_accumulators(parts: Vec<Vec<Complex64>>, len: usize) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); len];
    for p in parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// Σ_{j≥0} G(±(u + jT)) for G(s) = e^{-ikθ(s)}/(π(1+s²)), for all k in range.
fn periodized_kernel(u: f64, sign: f64, period: f64, k_min: i64, nk: usize) -> Vec<Complex64> {
    const J0: usize = 64;
    let mut h = vec![c(0.0, 0.0); nk];
    for j in 0..J0 {
        let s = sign * (u + j as f64 * period);
        accumulate(&mut h, c(1.0 / (PI * (1.0 + s * s)), 0.0), theta_of_s(s), k_min);
    }
    let ue = u + J0 as f64 * period;
    let s = sign * ue;
    let th = theta_of_s(s);
    let th_inf = if sign > 0.0 { 2.0 * PI } else { 0.0 };
    for (i, hk) in h.iter_mut().enumerate() {
        let k = k_min + i as i64;
        let kf = k as f64;
        let e = Complex64::from_polar(1.0, -kf * th);
        // ∫_{ue}^∞ G(±u) du = ±(1/2π)∫ e^{-ikθ} dθ from θ(±ue) to θ(±∞)
        let integral = if k == 0 {
            c((th_inf - th) / (2.0 * PI), 0.0)
        } else {
            (Complex64::from_polar(1.0, -kf * th_inf) - e) / (c(0.0, -kf) * 2.0 * PI)
        } * sign;
        let g = e / (PI * (1.0 + s * s));
        let dg = -2.0 * e * c(s, kf) / (PI * (1.0 + s * s).powi(2)) * sign;
        *hk += integral / period + g / 2.0 - dg * period / 12.0;
    }
    h
}

/// Coefficients c_k, k_min..=k_max, of f(ψ(e^{iθ})) with f given on the line z = 1/2 + is.
pub fn hybrid_coeffs<F>(f: &F, n_points: usize, k_min: i64, k_max: i64, opts: &HybridOptions) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let grid = BoundaryGrid::new(n_points, 0.5)?;
    check_range(n_points, k_min, k_max)?;
    let nk = (k_max - k_min + 1) as usize;

    // FFT part: f(1-χ) + mean·χ is smooth on the whole circle
    let samples: Vec<Complex64> = (0..n_points)
        .into_par_iter()
        .map(|j| {
            let z = psi_boundary(grid.theta(j));
            let chi = opts.chi(z.im);
            let inner = if chi < 1.0 { f(z)? * (1.0 - chi) } else { c(0.0, 0.0) };
            Ok(inner + opts.mean * chi)
        })
        .collect::<Result<_>>()?;
    let mut out = dft(&samples, grid.offset, k_min, k_max);

    // s-integral of (f - mean)χW over s_lo ≤ |s| ≤ end
    let k_abs = k_min.abs().max(k_max.abs()) as f64;
    let end = opts.period.map_or(opts.s_max, |_| opts.s_max.max(opts.s_hi));
    let edges = panel_edges(opts, k_abs, end);
    let (gx, gw) = gl16();
    let parts: Vec<Vec<Complex64>> = edges
        .par_windows(2)
        .map(|w| {
            let mut acc = vec![c(0.0, 0.0); nk];
            let h = w[1] - w[0];
            for (x, wt) in gx.iter().zip(gw) {
                let s = w[0] + 0.5 * h * (x + 1.0);
                let weight = 0.5 * h * wt * opts.chi(s) * opts.outer(s) / (PI * (1.0 + s * s));
                if weight == 0.0 {
                    continue;
                }
                for sign in [1.0, -1.0] {
                    let z = c(0.5, sign * s);
                    let g = (f(z)? - opts.mean) * weight;
                    accumulate(&mut acc, g, theta_of_s(sign * s), k_min);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    for (o, v) in out.iter_mut().zip(sum_accumulators(parts, nk)) {
        *o += v;
    }

    if let Some(period) = opts.period {
        // ∫_end^∞ f(±u)G(±u) du = ∫_0^T f(±(end+σ)) Σ_j G(±(end+σ+jT)) dσ
        let panels = 16;
        let hh = period / panels as f64;
        let nodes: Vec<(f64, f64)> = (0..panels)
            .flat_map(|i| gx.iter().zip(gw).map(move |(x, w)| (end + i as f64 * hh + 0.5 * hh * (x + 1.0), 0.5 * hh * w)))
            .collect();
        let parts: Vec<Vec<Complex64>> = nodes
            .par_iter()
            .map(|&(u, w)| {
                let mut acc = vec![c(0.0, 0.0); nk];
                for sign in [1.0, -1.0] {
                    let fv = (f(c(0.5, sign * u))? - opts.mean) * w;
                    let h = periodized_kernel(u, sign, period, k_min, nk);
                    for (a, hv) in acc.iter_mut().zip(h) {
                        *a += fv * hv;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        for (o, v) in out.iter_mut().zip(sum_accumulators(parts, nk)) {
            *o += v;
        }
    }
    Ok(out)
}

/// Hybrid quadrature coefficients of κ = ρ∘ψ with the bound |c(N, S) - c(N/2, 0.7 S)|.
pub fn quadrature_spec(spec: &FactorSpec, n_points: usize, k_min: i64, k_max: i64) -> Result<CoefficientStream> {
    let opts = HybridOptions::for_spec(spec);
    quadrature_spec_with(spec, n_points, k_min, k_max, &opts)
}

pub fn quadrature_spec_with(
    spec: &FactorSpec,
    n_points: usize,
    k_min: i64,
    k_max: i64,
    opts: &HybridOptions,
) -> Result<CoefficientStream> {
    check_range(n_points / 2, k_min, k_max)?;
    let f = |z: Complex64| rho(spec, z);
    let fine = hybrid_coeffs(&f, n_points, k_min, k_max, opts)?;
    let mut rough = *opts;
    rough.s_max *= 0.7;
    let coarse = hybrid_coeffs(&f, n_points / 2, k_min, k_max, &rough)?;
    let errs = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm() + 1e-12).collect();
    Ok(CoefficientStream::from_parts(&spec.to_string(), Method::Quadrature, k_min, fine, errs))
}

/// a₋ₖ of ρ_p, k = 1..=k_max: direct sum over |n| ≤ N plus an Euler-Maclaurin tail.
fn rho_p_series(p: u64, k_max: usize, n_terms: usize) -> (Vec<Complex64>, Vec<f64>) {
    let pf = p as f64;
    let l = pf.ln();
    let amp = 8.0 * (1.0 - 1.0 / pf) * l;
    let n_direct = n_terms.max(8 * k_max + 64);
    let half = n_direct / 2;
    let f = |n: f64, k: usize| -> (Complex64, Complex64, Complex64) {
        let d = c(4.0 * PI * n, 3.0 * l);
        let x = c(4.0 * PI * n, -l) / d;
        let xk1 = x.powu(k as u32 - 1);
        let val = amp * xk1 / (d * d);
        let dx = c(0.0, 16.0 * PI * l) / (d * d);
        let dval = amp * ((k as f64 - 1.0) * x.powu((k as u32).saturating_sub(2)) * dx / (d * d) - 8.0 * PI * xk1 / (d * d * d));
        (val, dval, x)
    };
    let em_tail = |nn: usize, k: usize| -> Complex64 {
        let (v, dv, x) = f(nn as f64, k);
        let integral = (1.0 - 1.0 / pf) / c(0.0, 2.0 * PI * k as f64) * (1.0 - x.powu(k as u32));
        integral - v / 2.0 - dv / 12.0
    };
    let rows: Vec<(Complex64, f64)> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let mut s_half = c(0.0, 0.0);
            let mut s = c(0.0, 0.0);
            for n in 1..=n_direct {
                s += f(n as f64, k).0;
                if n == half {
                    s_half = s;
                }
            }
            let full = s + em_tail(n_direct, k);
            let rough = s_half + em_tail(half, k);
            let f0 = f(0.0, k).0;
            let value = f0 + 2.0 * full.re;
            (c(value.re, 0.0), 2.0 * (full - rough).norm() + 1e-16)
        })
        .collect();
    rows.into_iter().unzip()
}

/// a₋ₖ, k = 1..=k_max, from residues at the poles of ρ inside the disk.
pub fn residue_coeffs(spec: &FactorSpec, k_max: usize, n_terms: usize) -> Result<CoefficientStream> {
    if k_max == 0 {
        return Err(QiError::Precondition("k_max must be positive".into()));
    }
    let primes = spec.primes();
    let atoms = spec.atoms();
    let (vals, errs) = if let [FactorSpec::FullRatio(Place::Prime(p))] = atoms.as_slice() {
        rho_p_series(*p, k_max, n_terms)
    } else if primes.is_empty() {
        let arch = n_terms.clamp(20, 60);
        let small = RankOneModel::from_spec(spec, &ModelOptions { arch_terms: arch, prime_height: 0.5 })?.coefficients(k_max);
        let big = RankOneModel::from_spec(spec, &ModelOptions { arch_terms: 2 * arch, prime_height: 0.5 })?.coefficients(k_max);
        let errs = small.iter().zip(&big).map(|(a, b)| (a - b).norm() + 1e-16 * a.norm()).collect();
        (small, errs)
    } else {
        // weights decay like n^{-s}: extrapolate the omitted tail from two successive doublings
        let coeffs = |n: usize| -> Result<Vec<Complex64>> {
            Ok(RankOneModel::from_spec(spec, &ModelOptions::with_prime_terms(spec, n))?.coefficients(k_max))
        };
        let full = coeffs(n_terms)?;
        let half = coeffs(n_terms / 2)?;
        let quarter = coeffs(n_terms / 4)?;
        let dist = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let (d1, d2) = (dist(&half, &quarter), dist(&full, &half));
        let factor = if d1 > 1.1 * d2 { d2 / (d1 - d2) } else { f64::INFINITY };
        let errs: Vec<f64> = full.iter().zip(&half).map(|(a, b)| (a - b).norm() * factor + 1e-16).collect();
        let worst = errs.iter().copied().fold(0.0, f64::max);
        if worst > 1e-3 {
            return Err(QiError::NonConvergence { tail: worst, tol: 1e-3 });
        }
        (full, errs)
    };
    let mut values = Vec::with_capacity(k_max);
    let mut bounds = Vec::with_capacity(k_max);
    for (v, e) in vals.into_iter().zip(errs).rev() {
        values.push(v);
        bounds.push(e);
    }
    Ok(CoefficientStream::from_parts(&spec.to_string(), Method::ResidueSeries, -(k_max as i64), values, bounds))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamComparison {
    pub max_abs_diff: f64,
    pub at_k: i64,
    /// Largest ratio |a - b| / (bound_a + bound_b) over the common range.
    pub worst_ratio: f64,
    pub consistent: bool,
}

pub fn compare_streams(a: &CoefficientStream, b: &CoefficientStream) -> Result<StreamComparison> {
    let mut cmp = StreamComparison { max_abs_diff: 0.0, at_k: 0, worst_ratio: 0.0, consistent: true };
    let mut any = false;
    for (k, va) in &a.values {
        if let Some(vb) = b.values.get(k) {
            any = true;
            let d = (va - vb).norm();
            if d > cmp.max_abs_diff {
                cmp.max_abs_diff = d;
                cmp.at_k = *k;
            }
            let bound = a.bound(*k).unwrap_or(0.0) + b.bound(*k).unwrap_or(0.0);
            let ratio = if bound > 0.0 { d / bound } else if d == 0.0 { 0.0 } else { f64::INFINITY };
            cmp.worst_ratio = cmp.worst_ratio.max(ratio);
        }
    }
    if !any {
        return Err(QiError::Precondition("streams share no indices".into()));
    }
    cmp.consistent = cmp.worst_ratio <= 1.0;
    Ok(cmp)
}

/// Stream of the principal-part coefficients a₋ₖ of a model.
pub fn model_stream(spec: &str, model: &RankOneModel, k_max: usize) -> CoefficientStream {
    let vals: Vec<Complex64> = model.coefficients(k_max).into_iter().rev().collect();
    CoefficientStream::from_parts(spec, Method::ResidueSeries, -(k_max as i64), vals, vec![0.0; k_max])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::sample_boundary;

    #[test]
    fn constant_symbol() {
        let grid = BoundaryGrid::new(64, 0.5).unwrap();
        let s = vec![c(1.0, 0.0); 64];
        let st = quadrature_coeffs("1", &s, &grid, -16, 16).unwrap();
        assert!((st.get(0).unwrap() - 1.0).norm() < 1e-15);
        assert!(st.values.iter().filter(|(k, _)| **k != 0).all(|(_, v)| v.norm() < 1e-15));
    }

    #[test]
    fn range_limit() {
        let grid = BoundaryGrid::new(64, 0.5).unwrap();
        let s = vec![c(1.0, 0.0); 64];
        assert!(matches!(quadrature_coeffs("1", &s, &grid, -17, 0), Err(QiError::OutOfRange { .. })));
    }

    #[test]
    fn single_mode() {
        let grid = BoundaryGrid::new(256, 0.3).unwrap();
        let s: Vec<Complex64> = grid.points().iter().map(|v| v.powi(-3) * 2.0).collect();
        let st = quadrature_coeffs("x", &s, &grid, -8, 8).unwrap();
        assert!((st.get(-3).unwrap() - 2.0).norm() < 1e-13);
    }

    #[test]
    fn hybrid_unit_symbol() {
        let spec = FactorSpec::Unit;
        let st = quadrature_spec(&spec, 1 << 10, -20, 20).unwrap();
        assert!((st.get(0).unwrap() - 1.0).norm() < 1e-12);
        assert!(st.values.iter().filter(|(k, _)| **k != 0).all(|(_, v)| v.norm() < 1e-12));
    }

    #[test]
    fn hybrid_matches_dft_on_rational_symbol() {
        // (v - 1)² / 4 is a polynomial in v: coefficients 1/4, -1/2, 1/4
        let f = |z: Complex64| -> Result<Complex64> {
            let v = crate::conformal::psi_inv(z)?;
            Ok((v - 1.0) * (v - 1.0) / 4.0)
        };
        let opts = HybridOptions { s_lo: 4.0, s_hi: 12.0, s_max: 4000.0, period: None, mean: 0.0, rate: 0.0 };
        let cs = hybrid_coeffs(&f, 1 << 10, -3, 3, &opts).unwrap();
        assert!((cs[3] - 0.25).norm() < 1e-9);
        assert!((cs[4] + 0.5).norm() < 1e-9);
        assert!((cs[5] - 0.25).norm() < 1e-9);
        assert!(cs[0].norm() < 1e-9);
    }

    #[test]
    fn rho_p_residue_vs_quadrature() {
        let spec = FactorSpec::p(2);
        let r = residue_coeffs(&spec, 30, 2000).unwrap();
        let q = quadrature_spec(&spec, 1 << 12, -30, 30).unwrap();
        let cmp = compare_streams(&r, &q).unwrap();
        assert!(cmp.max_abs_diff < 1e-8, "{cmp:?}");
        let plain = sample_boundary(&spec, &BoundaryGrid::new(1 << 12, 0.5).unwrap()).unwrap();
        let d = quadrature_coeffs("p:2", &plain, &BoundaryGrid::new(1 << 12, 0.5).unwrap(), -30, 30).unwrap();
        assert!(d.bound(-1).unwrap() > 0.0);
    }

    #[test]
    fn rho_inf_residue_vs_quadrature() {
        let spec = FactorSpec::inf();
        let r = residue_coeffs(&spec, 40, 40).unwrap();
        let q = quadrature_spec(&spec, 1 << 12, -40, 40).unwrap();
        let cmp = compare_streams(&r, &q).unwrap();
        assert!(cmp.max_abs_diff < 1e-6, "{cmp:?}");
    }
}
