//! Complex log-Gamma and small numerical helpers shared by the other modules.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{QiError, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// digamma(1/2) = -γ - 2 ln 2
pub const DIGAMMA_HALF: f64 = -1.963_510_026_021_423_5;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const POLE_TOL: f64 = 1e-9;

fn wrap_phase(x: f64) -> f64 {
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    // valid for Re z >= 1/2
    let z1 = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += *c / (z1 + i as f64);
    }
    let t = z1 + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z1 + 0.5) * t.ln() - t + a.ln()
}

/// ln sin(πz) modulo 2πi, stable for large |Im z|.
pub fn ln_sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let f = Complex64::new(z.re - n, z.im);
    let sign_phase = if (n as i64).rem_euclid(2) == 1 { PI } else { 0.0 };
    let core = if f.im.abs() < 20.0 {
        (f * PI).sin().ln()
    } else if f.im > 0.0 {
        // sin(πf) = e^{-iπf}(1 - e^{2πif}) i/2
        let e = (Complex64::i() * 2.0 * PI * f).exp();
        -Complex64::i() * PI * f + Complex64::new(0.5f64.ln(), PI / 2.0) + (1.0 - e).ln()
    } else {
        ln_sin_pi(f.conj()).conj()
    };
    core + Complex64::new(0.0, sign_phase)
}

fn ln_gamma_unwrapped(z: Complex64) -> Result<Complex64> {
    if z.re <= 0.5 && (z.re - z.re.round()).abs() < POLE_TOL && z.im.abs() < POLE_TOL {
        return Err(QiError::GammaPole(z));
    }
    if z.re < 0.5 {
        Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - lanczos_ln_gamma(1.0 - z))
    } else {
        Ok(lanczos_ln_gamma(z))
    }
}

/// Principal-branch log Γ(z): imaginary part reduced to (-π, π].
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    let v = ln_gamma_unwrapped(z)?;
    Ok(Complex64::new(v.re, wrap_phase(v.im)))
}

/// log Γ without the branch reduction, for use inside sums that are exponentiated.
pub(crate) fn log_gamma_raw(z: Complex64) -> Result<Complex64> {
    ln_gamma_unwrapped(z)
}

/// 1/Γ(z), entire; exact zero at the non-positive integers.
pub fn rgamma(z: Complex64) -> Complex64 {
    match ln_gamma_unwrapped(z) {
        Ok(v) => (-v).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma_unwrapped(z)?.exp())
}

/// ln Γ(x) for real x > 0.
pub fn ln_gamma_real(x: f64) -> f64 {
    lanczos_ln_gamma(Complex64::new(x, 0.0)).re
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// C∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut r = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, r);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * r * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (r * p1 - p0) / (r * r - 1.0);
            let dr = p1 / dp;
            r -= dr;
            if dr.abs() < 1e-16 {
                break;
            }
        }
        x[i] = r;
        w[i] = 2.0 / ((1.0 - r * r) * dp * dp);
    }
    (x, w)
}

/// Ordinary least squares y ≈ a + b x; returns (intercept, slope, r²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if syy > 0.0 && sxx > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (my - slope * mx, slope, r2)
}
