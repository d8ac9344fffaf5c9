//! Quasi-innerness verdicts from spectral sweeps, the identity suite and the triangular-unitary algebra.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core_functions::{
    abs_rho_inf_imag, pole_part, rho, rho_inf_alt, rho_p_regular_part, FactorSpec, Place,
};
use crate::error::{QiError, Result};
use crate::fourier::residue_coeffs;
use crate::operators::{
    hankel_truncation, pole_basis_spectrum, singular_values, DecayModel, DenseMatrix, ModelOptions, RankOneModel,
    SpectralProfile,
};

pub const TAU_COUNT: f64 = 0.05;
pub const MAX_TRUNCATION: usize = 512;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecayClass {
    RapidDecay,
    PowerLaw { alpha: f64 },
    NonCompact,
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub count_above_tau: usize,
    pub alpha: f64,
    pub power_law_r2: f64,
    pub c: f64,
    pub stretched_exp_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub n_sweep: Vec<usize>,
    pub profiles: Vec<SpectralProfile>,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiInnerVerdict {
    pub spec: String,
    pub compact: bool,
    pub decay_class: DecayClass,
    pub evidence: Evidence,
}

/// Spectrum of the n-truncated off-diagonal compression. Prime-free symbols use the monomial
/// Hankel matrix; symbols with prime poles use the span of about n pole vectors.
pub fn spectral_profile(spec: &FactorSpec, n: usize) -> Result<SpectralProfile> {
    if n == 0 || n > MAX_TRUNCATION {
        return Err(QiError::Precondition(format!("truncation {n} outside 1..={MAX_TRUNCATION}")));
    }
    if spec.primes().is_empty() {
        let stream = residue_coeffs(spec, 2 * n, 40)?;
        singular_values(&hankel_truncation(&stream, n)?)
    } else {
        let model = RankOneModel::from_spec(spec, &ModelOptions::for_section_rank(spec, n))?;
        pole_basis_spectrum(&model)
    }
}

fn sweep_point(n: usize, p: &SpectralProfile) -> SweepPoint {
    let alpha = match p.power_law.model {
        DecayModel::PowerLaw { alpha } => alpha,
        _ => 0.0,
    };
    let cc = match p.stretched_exp.model {
        DecayModel::StretchedExp { c } => c,
        _ => 0.0,
    };
    SweepPoint {
        n,
        count_above_tau: p.count_above(TAU_COUNT),
        alpha,
        power_law_r2: p.power_law.r_squared,
        c: cc,
        stretched_exp_r2: p.stretched_exp.r_squared,
    }
}

const FLAT_ALPHA: f64 = 0.1;
const ALPHA_SPREAD: f64 = 0.3;

pub fn decide(points: &[SweepPoint], profiles: &[SpectralProfile]) -> DecayClass {
    if profiles.iter().all(|p| p.singular_values.first().copied().unwrap_or(0.0) < 1e-14) {
        return DecayClass::RapidDecay;
    }
    let flat = points.iter().filter(|p| p.alpha < FLAT_ALPHA).count();
    let increasing = points.windows(2).all(|w| w[1].count_above_tau > w[0].count_above_tau);
    if flat == points.len() {
        if increasing {
            return DecayClass::NonCompact;
        }
        return DecayClass::Inconclusive { reason: "flat spectra without growing counts".into() };
    }
    if flat > 0 {
        return DecayClass::Inconclusive { reason: "flat and decaying fits across the sweep".into() };
    }
    let first = &points[0];
    let last = &points[points.len() - 1];
    if points.iter().all(|p| p.stretched_exp_r2 > p.power_law_r2) && last.c >= 0.75 * first.c {
        return DecayClass::RapidDecay;
    }
    let lo = points.iter().map(|p| p.alpha).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.alpha).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > ALPHA_SPREAD {
        return DecayClass::Inconclusive { reason: format!("power-law exponent drifts over [{lo:.3}, {hi:.3}]") };
    }
    DecayClass::PowerLaw { alpha: last.alpha }
}

pub fn classify(spec: &FactorSpec, n_sweep: &[usize]) -> Result<QuasiInnerVerdict> {
    if n_sweep.is_empty() || n_sweep.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QiError::Precondition("n_sweep must be non-empty and increasing".into()));
    }
    if let Some(&n) = n_sweep.iter().find(|n| **n > MAX_TRUNCATION || **n < 4) {
        return Err(QiError::Precondition(format!("truncation {n} outside 4..={MAX_TRUNCATION}")));
    }
    let profiles: Vec<SpectralProfile> = n_sweep.par_iter().map(|&n| spectral_profile(spec, n)).collect::<Result<_>>()?;
    let points: Vec<SweepPoint> = n_sweep.iter().zip(&profiles).map(|(n, p)| sweep_point(*n, p)).collect();
    let decay_class = decide(&points, &profiles);
    let compact = matches!(decay_class, DecayClass::RapidDecay | DecayClass::PowerLaw { .. });
    Ok(QuasiInnerVerdict {
        spec: spec.to_string(),
        compact,
        decay_class,
        evidence: Evidence { n_sweep: n_sweep.to_vec(), profiles, points },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub spec: String,
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
    pub all_passed: bool,
}

pub type Evaluator<'a> = dyn Fn(&FactorSpec, Complex64) -> Result<Complex64> + Sync + 'a;

pub fn verify_suite(spec: &FactorSpec, tolerance: f64) -> Result<SuiteReport> {
    verify_suite_with(spec, tolerance, &|s, z| rho(s, z), 0x5eed)
}

/// Every closed-form identity that applies to `spec`, with `eval` standing in for ρ.
pub fn verify_suite_with(spec: &FactorSpec, tolerance: f64, eval: &Evaluator, seed: u64) -> Result<SuiteReport> {
    if !(tolerance > 0.0) {
        return Err(QiError::Precondition("tolerance must be positive".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let samples = 100;
    let mut push = |name: &str, residuals: Vec<f64>| {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let bad = residuals.iter().any(|r| !r.is_finite());
        checks.push(IdentityCheck {
            name: name.to_string(),
            samples: residuals.len(),
            max_residual: if bad { f64::INFINITY } else { max_residual },
            passed: !bad && max_residual < tolerance,
        });
    };
    let points = |rng: &mut StdRng, re: (f64, f64), im: (f64, f64)| -> Vec<Complex64> {
        (0..samples).map(|_| c(rng.random_range(re.0..re.1), rng.random_range(im.0..im.1))).collect()
    };
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(1.0);

    let zs = points(&mut rng, (-4.0, 5.0), (-20.0, 20.0));
    let mut inv = Vec::new();
    let mut conj = Vec::new();
    for z in zs {
        if let (Ok(a), Ok(b)) = (eval(spec, z), eval(spec, 1.0 - z)) {
            inv.push((a * b - 1.0).norm());
            if let Ok(ac) = eval(spec, z.conj()) {
                conj.push(rel(ac, a.conj()));
            }
        }
    }
    push("inversion", inv);
    push("reality", conj);

    let mut unit = Vec::new();
    for _ in 0..samples {
        let s = rng.random_range(-50.0..50.0);
        unit.push((eval(spec, c(0.5, s))?.norm() - 1.0).abs());
    }
    push("unit_modulus", unit);

    let atoms = spec.atoms();
    if atoms.iter().any(|a| matches!(a, FactorSpec::FullRatio(Place::Archimedean))) {
        let inf = FactorSpec::inf();
        let mut fe = Vec::new();
        let mut cos = Vec::new();
        for z in points(&mut rng, (-6.0, 4.0), (-15.0, 15.0)) {
            if let (Ok(a), Ok(b)) = (eval(&inf, z + 2.0), eval(&inf, z)) {
                let term = z * (z + 1.0) * b / (4.0 * PI * PI);
                fe.push((a + term).norm() / a.norm().max(term.norm()).max(1.0));
                if let Ok(alt) = rho_inf_alt(z) {
                    cos.push(rel(alt, b));
                }
            }
        }
        push("functional_equation", fe);
        push("cosine_form", cos);
        let mut modulus = Vec::new();
        for _ in 0..samples {
            let t: f64 = rng.random_range(0.05..50.0);
            let v = eval(&inf, c(0.0, t))?.norm();
            modulus.push((v - abs_rho_inf_imag(t)?).abs() / v.max(1.0));
        }
        push("imaginary_axis_modulus", modulus);
    }
    for p in spec.primes() {
        let ps = FactorSpec::p(p);
        let l = (p as f64).ln();
        let period = c(0.0, 2.0 * PI / l);
        let mut per = Vec::new();
        let mut cothd = Vec::new();
        for z in points(&mut rng, (-3.0, 3.0), (-20.0, 20.0)) {
            if let (Ok(a), Ok(b)) = (eval(&ps, z), eval(&ps, z + period)) {
                per.push(rel(b, a));
                if let Ok(pp) = pole_part(&ps, z, 1) {
                    cothd.push(rel(pp + rho_p_regular_part(p, z), a));
                }
            }
        }
        push(&format!("periodicity_p{p}"), per);
        push(&format!("coth_decomposition_p{p}"), cothd);
        let mut horiz = Vec::new();
        let pf = p as f64;
        for _ in 0..samples {
            let x: f64 = rng.random_range(-3.0..3.0);
            let m: i64 = rng.random_range(-5..5);
            let z = c(x, (2 * m + 1) as f64 * PI / l);
            let exact = (pf.powf(x) + pf) / (pf.powf(1.0 - x) + pf);
            horiz.push(rel(eval(&ps, z)?, c(exact, 0.0)));
        }
        push(&format!("horizontal_line_p{p}"), horiz);
    }
    for a in &atoms {
        if let FactorSpec::GaussFactor { m, .. } | FactorSpec::NormalizedGaussFactor { m, .. } = a {
            let m = *m;
            let mut fac = Vec::new();
            let mut norm = Vec::new();
            for z in points(&mut rng, (-4.0, 4.0), (-10.0, 10.0)) {
                let mut prod_phi = c(1.0, 0.0);
                let mut prod_norm = c(1.0, 0.0);
                let mut ok = true;
                for k in 0..m {
                    match (eval(&FactorSpec::gauss(m, k, false)?, z), eval(&FactorSpec::gauss(m, k, true)?, z)) {
                        (Ok(u), Ok(v)) => {
                            prod_phi *= u;
                            prod_norm *= v;
                        }
                        _ => ok = false,
                    }
                }
                if let (true, Ok(r)) = (ok, eval(&FactorSpec::inf(), z)) {
                    let scale = ((0.5 - z) * (m as f64 / PI).ln()).exp();
                    fac.push(rel(prod_phi, scale * r));
                    norm.push(rel(prod_norm, r));
                }
            }
            push(&format!("gauss_factorization_m{m}"), fac);
            push(&format!("gauss_normalized_product_m{m}"), norm);
        }
    }
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { spec: spec.to_string(), tolerance, checks, all_passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangularReport {
    pub u11_isometry: f64,
    pub u22_coisometry: f64,
    pub u12_partial_isometry: f64,
    pub u12_u22_orthogonal: f64,
    pub u11_u12_orthogonal: f64,
}

impl TriangularReport {
    pub fn max_residual(&self) -> f64 {
        [self.u11_isometry, self.u22_coisometry, self.u12_partial_isometry, self.u12_u22_orthogonal, self.u11_u12_orthogonal]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

/// Residuals of the conditions for [[u11, u12], [0, u22]] to be unitary.
pub fn triangular_unitary_check(u11: &DenseMatrix, u12: &DenseMatrix, u22: &DenseMatrix) -> Result<TriangularReport> {
    if u11.nrows() != u12.nrows() || u12.ncols() != u22.ncols() || u11.nrows() + u22.nrows() != u11.ncols() + u22.ncols() {
        return Err(QiError::Precondition("incompatible block dimensions".into()));
    }
    let norm = |m: DenseMatrix| m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let id = |n: usize| DMatrix::<Complex64>::identity(n, n);
    Ok(TriangularReport {
        u11_isometry: norm(u11.adjoint() * u11 - id(u11.ncols())),
        u22_coisometry: norm(u22 * u22.adjoint() - id(u22.nrows())),
        u12_partial_isometry: norm(u12 * u12.adjoint() - (id(u11.nrows()) - u11 * u11.adjoint())),
        u12_u22_orthogonal: norm(u12 * u22.adjoint()),
        u11_u12_orthogonal: norm(u11.adjoint() * u12),
    })
}

/// Shift (n+1)×n, unit corner (n+1)×(n+1), backward shift n×(n+1).
pub fn canonical_triangular(n: usize) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let one = c(1.0, 0.0);
    let u11 = DMatrix::from_fn(n + 1, n, |i, j| if i == j + 1 { one } else { c(0.0, 0.0) });
    let mut u12 = DMatrix::from_element(n + 1, n + 1, c(0.0, 0.0));
    u12[(0, 0)] = one;
    let u22 = DMatrix::from_fn(n, n + 1, |i, j| if j == i + 1 { one } else { c(0.0, 0.0) });
    (u11, u12, u22)
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> DenseMatrix {
    let gauss = |rng: &mut R| {
        let u1: f64 = rng.random_range(f64::EPSILON..1.0);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    };
    let a = DMatrix::from_fn(n, n, |_, _| c(gauss(rng), gauss(rng)));
    let qr = a.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(n, n, |i, j| if i == j { r[(i, i)] / r[(i, i)].norm() } else { c(0.0, 0.0) });
    q * phases
}
