//! Local factors γ_v, ratios ρ_v(z) = γ_v(z)/γ_v(1-z), Gauss sub-factors, their poles and
//! closed-form companions.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QiError, Result};
use crate::special::{self, is_prime, ln_gamma_real, log_gamma_raw};

pub const POLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Place {
    Archimedean,
    Prime(u64),
}

impl Place {
    pub fn prime(p: u64) -> Result<Place> {
        if is_prime(p) {
            Ok(Place::Prime(p))
        } else {
            Err(QiError::Spec(format!("{p} is not prime")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FactorSpec {
    /// The constant symbol 1.
    Unit,
    FullRatio(Place),
    GaussFactor { m: u32, k: u32 },
    NormalizedGaussFactor { m: u32, k: u32 },
    Product(Vec<FactorSpec>),
}

impl FactorSpec {
    pub fn inf() -> Self {
        FactorSpec::FullRatio(Place::Archimedean)
    }

    pub fn p(p: u64) -> Self {
        FactorSpec::FullRatio(Place::prime(p).expect("prime"))
    }

    pub fn gauss(m: u32, k: u32, normalized: bool) -> Result<Self> {
        if m == 0 || k >= m {
            return Err(QiError::Spec(format!("gauss indices need 0 <= k < m, got m={m} k={k}")));
        }
        Ok(if normalized {
            FactorSpec::NormalizedGaussFactor { m, k }
        } else {
            FactorSpec::GaussFactor { m, k }
        })
    }

    pub fn product(items: Vec<FactorSpec>) -> Result<Self> {
        if items.is_empty() {
            return Err(QiError::Spec("empty product".into()));
        }
        Ok(FactorSpec::Product(items))
    }

    /// Atomic members, products flattened.
    pub fn atoms(&self) -> Vec<FactorSpec> {
        match self {
            FactorSpec::Product(v) => v.iter().flat_map(|s| s.atoms()).collect(),
            s => vec![s.clone()],
        }
    }

    pub fn primes(&self) -> Vec<u64> {
        self.atoms()
            .iter()
            .filter_map(|a| match a {
                FactorSpec::FullRatio(Place::Prime(p)) => Some(*p),
                _ => None,
            })
            .collect()
    }

    pub fn has_archimedean_part(&self) -> bool {
        self.atoms().iter().any(|a| {
            matches!(
                a,
                FactorSpec::FullRatio(Place::Archimedean)
                    | FactorSpec::GaussFactor { .. }
                    | FactorSpec::NormalizedGaussFactor { .. }
            )
        })
    }
}

impl fmt::Display for FactorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorSpec::Unit => write!(f, "1"),
            FactorSpec::FullRatio(Place::Archimedean) => write!(f, "inf"),
            FactorSpec::FullRatio(Place::Prime(p)) => write!(f, "p:{p}"),
            FactorSpec::NormalizedGaussFactor { m, k } => write!(f, "gauss:{m}:{k}"),
            FactorSpec::GaussFactor { m, k } => write!(f, "phi:{m}:{k}"),
            FactorSpec::Product(v) => {
                let parts: Vec<String> = v.iter().map(|s| s.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
        }
    }
}

impl FromStr for FactorSpec {
    type Err = QiError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('*').map(str::trim).collect();
        let mut atoms = Vec::with_capacity(parts.len());
        for part in &parts {
            let fields: Vec<&str> = part.split(':').collect();
            let bad = || QiError::Spec(format!("cannot parse factor '{part}'"));
            let num = |t: &str| t.parse::<u64>().map_err(|_| bad());
            let atom = match fields.as_slice() {
                ["1"] => FactorSpec::Unit,
                ["inf"] => FactorSpec::inf(),
                ["p", p] => FactorSpec::FullRatio(Place::prime(num(p)?)?),
                ["gauss", m, k] => FactorSpec::gauss(num(m)? as u32, num(k)? as u32, true)?,
                ["phi", m, k] => FactorSpec::gauss(num(m)? as u32, num(k)? as u32, false)?,
                _ => return Err(bad()),
            };
            atoms.push(atom);
        }
        if atoms.len() == 1 {
            Ok(atoms.pop().unwrap())
        } else {
            FactorSpec::product(atoms)
        }
    }
}

/// A pole with its principal part Σ_j coefficients[j-1] (z - location)^{-j}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleDatum {
    pub location: Complex64,
    pub order: u32,
    /// coefficients[0] is the residue, coefficients[j-1] multiplies (z - location)^{-j}.
    pub leading_coefficients: Vec<Complex64>,
}

impl PoleDatum {
    fn simple(location: Complex64, residue: Complex64) -> Self {
        PoleDatum { location, order: 1, leading_coefficients: vec![residue] }
    }

    pub fn residue(&self) -> Complex64 {
        self.leading_coefficients[0]
    }

    pub fn principal_part(&self, z: Complex64) -> Complex64 {
        let w = z - self.location;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pw = Complex64::new(1.0, 0.0);
        for c in &self.leading_coefficients {
            pw /= w;
            acc += c * pw;
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Window { re_min, re_max, im_min, im_max }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// e^w - 1 without cancellation for small w.
pub fn cexpm1(w: Complex64) -> Complex64 {
    let b = w.im;
    let half = (0.5 * b).sin();
    let cosm1 = -2.0 * half * half;
    c(w.re.exp_m1() * b.cos() + cosm1, w.re.exp() * b.sin())
}

fn near_nonpositive_integer(w: Complex64) -> Option<i64> {
    let n = w.re.round();
    if n <= 0.0 && (w.re - n).abs() < POLE_TOL && w.im.abs() < POLE_TOL {
        Some(-n as i64)
    } else {
        None
    }
}

/// Residue of ρ∞ at z = -2n.
pub fn rho_inf_residue(n: u64) -> f64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let nf = n as f64;
    sign * 2.0
        * ((2.0 * nf + 0.5) * PI.ln() - ln_gamma_real(nf + 1.0) - ln_gamma_real(nf + 0.5)).exp()
}

/// Residue of the (optionally normalized) Gauss factor at z = -2k - 2nm.
pub fn gauss_residue(m: u32, k: u32, n: u64, normalized: bool) -> f64 {
    let (mf, kf, nf) = (m as f64, k as f64, n as f64);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let a = (1.0 + 4.0 * kf) / (2.0 * mf) + nf;
    let mut ln_r = -ln_gamma_real(nf + 1.0) - ln_gamma_real(a);
    if normalized {
        let z0 = -2.0 * kf - 2.0 * nf * mf;
        ln_r += (1.0 / (2.0 * mf) - z0 / mf) * (PI / mf).ln();
    }
    sign * 2.0 * mf * ln_r.exp()
}

pub fn gamma_factor(place: Place, z: Complex64) -> Result<Complex64> {
    match place {
        Place::Archimedean => {
            if let Some(n) = near_nonpositive_integer(z / 2.0) {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let res = sign * 2.0 * (n as f64 * PI.ln() - ln_gamma_real(n as f64 + 1.0)).exp();
                return Err(QiError::Pole(PoleDatum::simple(c(-2.0 * n as f64, 0.0), c(res, 0.0))));
            }
            Ok((-z / 2.0 * PI.ln() + log_gamma_raw(z / 2.0)?).exp())
        }
        Place::Prime(p) => {
            let l = (p as f64).ln();
            if let Some(loc) = prime_pole_near(p, z) {
                return Err(QiError::Pole(PoleDatum::simple(loc, c(1.0 / l, 0.0))));
            }
            Ok(-1.0 / cexpm1(-z * l))
        }
    }
}

fn prime_pole_near(p: u64, z: Complex64) -> Option<Complex64> {
    let l = (p as f64).ln();
    let period = 2.0 * PI / l;
    let k = (z.im / period).round();
    let loc = c(0.0, k * period);
    if (z - loc).norm() < POLE_TOL {
        Some(loc)
    } else {
        None
    }
}

fn rho_atom(spec: &FactorSpec, z: Complex64) -> Result<Complex64> {
    match spec {
        FactorSpec::Unit => Ok(c(1.0, 0.0)),
        FactorSpec::FullRatio(Place::Archimedean) => {
            if let Some(n) = near_nonpositive_integer(z / 2.0) {
                let loc = c(-2.0 * n as f64, 0.0);
                return Err(QiError::Pole(PoleDatum::simple(loc, c(rho_inf_residue(n as u64), 0.0))));
            }
            if near_nonpositive_integer((1.0 - z) / 2.0).is_some() {
                return Ok(c(0.0, 0.0));
            }
            let lg = (0.5 - z) * PI.ln() + log_gamma_raw(z / 2.0)? - log_gamma_raw((1.0 - z) / 2.0)?;
            Ok(lg.exp())
        }
        FactorSpec::FullRatio(Place::Prime(p)) => {
            let l = (*p as f64).ln();
            if let Some(loc) = prime_pole_near(*p, z) {
                let r = (1.0 - 1.0 / *p as f64) / l;
                return Err(QiError::Pole(PoleDatum::simple(loc, c(r, 0.0))));
            }
            Ok(cexpm1((z - 1.0) * l) / cexpm1(-z * l))
        }
        FactorSpec::GaussFactor { m, k } | FactorSpec::NormalizedGaussFactor { m, k } => {
            let normalized = matches!(spec, FactorSpec::NormalizedGaussFactor { .. });
            let (mf, kf) = (*m as f64, *k as f64);
            let a = z / (2.0 * mf) + kf / mf;
            let b = (1.0 - z) / (2.0 * mf) + kf / mf;
            if let Some(n) = near_nonpositive_integer(a) {
                let loc = c(-2.0 * kf - 2.0 * n as f64 * mf, 0.0);
                let r = gauss_residue(*m, *k, n as u64, normalized);
                return Err(QiError::Pole(PoleDatum::simple(loc, c(r, 0.0))));
            }
            if near_nonpositive_integer(b).is_some() {
                return Ok(c(0.0, 0.0));
            }
            let mut lg = log_gamma_raw(a)? - log_gamma_raw(b)?;
            if normalized {
                lg += (1.0 / (2.0 * mf) - z / mf) * (PI / mf).ln();
            }
            Ok(lg.exp())
        }
        FactorSpec::Product(_) => unreachable!(),
    }
}

/// ρ(spec, z); pointwise product for products.
pub fn rho(spec: &FactorSpec, z: Complex64) -> Result<Complex64> {
    match spec {
        FactorSpec::Product(items) => {
            let mut acc = c(1.0, 0.0);
            for s in items {
                acc *= rho(s, z)?;
            }
            Ok(acc)
        }
        s => rho_atom(s, z),
    }
}

/// 2 cos(πz/2) (2π)^{-z} Γ(z).
pub fn rho_inf_alt(z: Complex64) -> Result<Complex64> {
    if let Some(n) = near_nonpositive_integer(z / 2.0) {
        let loc = c(-2.0 * n as f64, 0.0);
        return Err(QiError::Pole(PoleDatum::simple(loc, c(rho_inf_residue(n as u64), 0.0))));
    }
    if near_nonpositive_integer(z).is_some() {
        // odd negative integer: removable, cos vanishes against the Gamma pole
        let n = -z.re.round();
        let sign = if ((n as i64 - 1) / 2) % 2 == 0 { -1.0 } else { 1.0 };
        let val = sign * PI * (2.0 * PI).powf(n) / (special::gamma(c(n + 1.0, 0.0))?.re);
        return Ok(c(val, 0.0));
    }
    let cosv = (z * (PI / 2.0)).cos();
    Ok(2.0 * cosv * (-z * (2.0 * PI).ln() + log_gamma_raw(z)?).exp())
}

fn atom_poles(spec: &FactorSpec, w: &Window) -> Vec<PoleDatum> {
    let mut out = Vec::new();
    match spec {
        FactorSpec::Unit => {}
        FactorSpec::FullRatio(Place::Archimedean) => {
            if w.im_min <= 0.0 && w.im_max >= 0.0 {
                let mut n = 0u64;
                while -2.0 * (n as f64) >= w.re_min {
                    let loc = c(-2.0 * n as f64, 0.0);
                    if w.contains(loc) {
                        out.push(PoleDatum::simple(loc, c(rho_inf_residue(n), 0.0)));
                    }
                    n += 1;
                }
            }
        }
        FactorSpec::FullRatio(Place::Prime(p)) => {
            if w.re_min <= 0.0 && w.re_max >= 0.0 {
                let l = (*p as f64).ln();
                let period = 2.0 * PI / l;
                let r = (1.0 - 1.0 / *p as f64) / l;
                let k0 = (w.im_min / period).ceil() as i64;
                let k1 = (w.im_max / period).floor() as i64;
                for k in k0..=k1 {
                    out.push(PoleDatum::simple(c(0.0, k as f64 * period), c(r, 0.0)));
                }
            }
        }
        FactorSpec::GaussFactor { m, k } | FactorSpec::NormalizedGaussFactor { m, k } => {
            let normalized = matches!(spec, FactorSpec::NormalizedGaussFactor { .. });
            if w.im_min <= 0.0 && w.im_max >= 0.0 {
                let mut n = 0u64;
                loop {
                    let loc = -2.0 * *k as f64 - 2.0 * n as f64 * *m as f64;
                    if loc < w.re_min {
                        break;
                    }
                    if w.contains(c(loc, 0.0)) {
                        out.push(PoleDatum::simple(c(loc, 0.0), c(gauss_residue(*m, *k, n, normalized), 0.0)));
                    }
                    n += 1;
                }
            }
        }
        FactorSpec::Product(_) => unreachable!(),
    }
    out
}

/// Principal-part coefficients of f at z0 from samples on a circle of the given radius.
pub fn laurent_on_circle<F>(f: F, z0: Complex64, radius: f64, order: u32, samples: usize) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut coeffs = vec![c(0.0, 0.0); order as usize];
    for s in 0..samples {
        let t = Complex64::from_polar(radius, 2.0 * PI * (s as f64 + 0.5) / samples as f64);
        let v = f(z0 + t)?;
        let mut pw = c(1.0, 0.0);
        for cj in coeffs.iter_mut() {
            pw *= t;
            *cj += v * pw;
        }
    }
    for cj in coeffs.iter_mut() {
        *cj /= samples as f64;
    }
    Ok(coeffs)
}

/// Distance scale within which a pole of `spec` at z0 is isolated.
fn isolation_radius(spec: &FactorSpec) -> f64 {
    let lmax = spec.primes().iter().map(|p| (*p as f64).ln()).fold(0.0, f64::max);
    let mut r: f64 = 1.0;
    if lmax > 0.0 {
        r = r.min(2.0 * PI / lmax);
    }
    0.3 * r
}

pub fn poles_residues(spec: &FactorSpec, window: Window) -> Vec<PoleDatum> {
    let atoms = spec.atoms();
    if atoms.len() == 1 {
        return atom_poles(&atoms[0], &window);
    }
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut groups: Vec<(Complex64, Vec<(usize, PoleDatum)>)> = Vec::new();
    for (i, a) in atoms.iter().enumerate() {
        for pd in atom_poles(a, &window) {
            let key = ((pd.location.re * 1e7).round() as i64, (pd.location.im * 1e7).round() as i64);
            match index.get(&key) {
                Some(&g) => groups[g].1.push((i, pd)),
                None => {
                    index.insert(key, groups.len());
                    groups.push((pd.location, vec![(i, pd)]));
                }
            }
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for (loc, members) in groups {
        let order: u32 = members.iter().map(|(_, p)| p.order).sum();
        if order == 1 {
            let (idx, pd) = &members[0];
            let mut r = pd.residue();
            let mut ok = true;
            for (j, a) in atoms.iter().enumerate() {
                if j != *idx {
                    match rho(a, loc) {
                        Ok(v) => r *= v,
                        Err(_) => ok = false,
                    }
                }
            }
            if ok {
                out.push(PoleDatum::simple(loc, r));
                continue;
            }
        }
        let radius = isolation_radius(spec);
        if let Ok(coeffs) = laurent_on_circle(|z| rho(spec, z), loc, radius, order, 128) {
            out.push(PoleDatum { location: loc, order, leading_coefficients: coeffs });
        }
    }
    out.sort_by(|a, b| {
        (a.location.re, a.location.im)
            .partial_cmp(&(b.location.re, b.location.im))
            .unwrap()
    });
    out
}

/// Closed-form Laurent coefficients of ρ∞·ρ_p at 0: (c₋₂, c₋₁).
pub fn inf_prime_double_pole(p: u64) -> (f64, f64) {
    let pf = p as f64;
    let l = pf.ln();
    let cm2 = 2.0 * (pf - 1.0) / (pf * l);
    let cm1 = ((pf - 3.0) * l
        - (pf - 1.0) * (special::EULER_GAMMA + 2.0 * PI.ln() - special::DIGAMMA_HALF))
        / (pf * l);
    (cm2, cm1)
}

/// ρ_p minus its pole part: -p^{z-1} + (p-1)/(2p).
pub fn rho_p_regular_part(p: u64, z: Complex64) -> Complex64 {
    let pf = p as f64;
    -(((z - 1.0) * pf.ln()).exp()) + (pf - 1.0) / (2.0 * pf)
}

fn coth(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        // w⁻¹ + w/3 - w³/45
        return 1.0 / w + w / 3.0 - w * w * w / 45.0;
    }
    // coth w = 1 + 2/(e^{2w} - 1), with the mirror form for Re w < 0
    if w.re >= 0.0 {
        1.0 + 2.0 / cexpm1(2.0 * w)
    } else {
        -(1.0 + 2.0 / cexpm1(-2.0 * w))
    }
}

const POLE_PART_TOL: f64 = 1e-6;

/// Sum of the polar parts of ρ(spec) at z.
pub fn pole_part(spec: &FactorSpec, z: Complex64, truncation: usize) -> Result<Complex64> {
    if let FactorSpec::FullRatio(Place::Prime(p)) = spec {
        if prime_pole_near(*p, z).is_some() {
            return rho(spec, z);
        }
        let pf = *p as f64;
        return Ok((pf - 1.0) / (2.0 * pf) * coth(z * pf.ln() / 2.0));
    }
    let truncation = truncation.max(1);
    let primes = spec.primes();
    let lmin = primes.iter().map(|p| (*p as f64).ln()).fold(f64::INFINITY, f64::min);
    let height = if primes.is_empty() { 0.5 } else { 2.0 * PI * truncation as f64 / lmin + 0.5 };
    let w = Window::new(-2.0 * truncation as f64 - 1.0, 0.5, -height, height);
    let poles = poles_residues(spec, w);
    let mut sum = c(0.0, 0.0);
    for pd in &poles {
        if (z - pd.location).norm() < POLE_TOL {
            return Err(QiError::Pole(pd.clone()));
        }
    }
    // archimedean-type families: stop once terms fall below 1e-16 of the sum
    let mut real_axis: Vec<&PoleDatum> = poles.iter().filter(|p| p.location.im == 0.0).collect();
    real_axis.sort_by(|a, b| b.location.re.partial_cmp(&a.location.re).unwrap());
    let mut last = 0.0;
    for pd in real_axis {
        let t = pd.principal_part(z);
        sum += t;
        last = t.norm();
        if pd.location.re < -4.0 && last < 1e-16 * sum.norm() {
            last = 0.0;
            break;
        }
    }
    let mut tail = if primes.is_empty() { last } else { 0.0 };
    let mut edge = 0.0f64;
    for pd in poles.iter().filter(|p| p.location.im != 0.0) {
        sum += pd.principal_part(z);
        if pd.location.im.abs() > height - 2.0 * PI / lmin - 0.5 {
            edge = edge.max(pd.residue().norm() / pd.location.im.abs());
        }
    }
    if !primes.is_empty() {
        tail += 4.0 * truncation as f64 * edge;
    }
    if tail > POLE_PART_TOL * sum.norm().max(1.0) {
        return Err(QiError::NonConvergence { tail, tol: POLE_PART_TOL });
    }
    Ok(sum)
}

/// σ_a(t) = (a - 1/2) log|t| - (π/2)|t|.
pub fn stirling_sigma(a: f64, t: f64) -> f64 {
    (a - 0.5) * t.abs().ln() - 0.5 * PI * t.abs()
}

/// |ρ∞(it)| = |t|^{-1/2} (2π coth(π|t|/2))^{1/2}.
pub fn abs_rho_inf_imag(t: f64) -> Result<f64> {
    if t.abs() < POLE_TOL {
        return Err(QiError::Pole(PoleDatum::simple(c(0.0, 0.0), c(2.0, 0.0))));
    }
    let a = t.abs();
    Ok((2.0 * PI / (a * (0.5 * PI * a).tanh())).sqrt())
}
