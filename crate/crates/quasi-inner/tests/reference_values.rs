//! Values frozen from tools/oracle.py (mpmath, 20-30 digits).

use num_complex::Complex64;
use quasi_inner::core_functions::{gamma_factor, laurent_on_circle, pole_part, rho, FactorSpec, Place};
use quasi_inner::fourier::{quadrature_spec, residue_coeffs};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const A_INF: [f64; 3] = [0.138485837285547615, 0.773305157260174238, -0.448613007468660193];
const A_P2: [f64; 3] = [-0.586428601466150552, 0.26467677479570327, -0.0255412237541978217];

#[test]
fn gamma_3_on_critical_line() {
    let v = gamma_factor(Place::Prime(3), c(0.5, 0.7)).unwrap();
    assert!((v - c(1.16192588560895839, -0.797311666275311007)).norm() < 1e-14);
}

#[test]
fn rho_inf_off_line() {
    let v = rho(&FactorSpec::inf(), c(0.3, 1.7)).unwrap();
    assert!((v - c(-0.0280710343376784536, 1.30556113332839554)).norm() < 1e-13);
}

#[test]
fn pole_part_inf_at_minus_half() {
    let v = pole_part(&FactorSpec::inf(), c(-0.5, 0.0), 30).unwrap();
    assert!((v.re + 12.6309773781995976).abs() < 1e-12, "{v}");
    assert!(v.im.abs() < 1e-14);
}

#[test]
fn modulus_at_2i() {
    let v = rho(&FactorSpec::inf(), c(0.0, 2.0)).unwrap().norm_sqr();
    assert!((v - 3.15334809493716235).abs() < 1e-13);
}

#[test]
fn double_pole_at_origin() {
    let spec: FactorSpec = "inf*p:2".parse().unwrap();
    let co = laurent_on_circle(|z| rho(&spec, z), c(0.0, 0.0), 0.25, 2, 256).unwrap();
    assert!((co[1] - c(1.44269504088896341, 0.0)).norm() < 1e-10, "{:?}", co);
}

#[test]
fn coefficients_match_reference() {
    for (spec, want, tol) in [("inf", A_INF, 1e-10), ("p:2", A_P2, 1e-8)] {
        let s: FactorSpec = spec.parse().unwrap();
        let n_terms = if s.primes().is_empty() { 40 } else { 10_000 };
        let r = residue_coeffs(&s, 3, n_terms).unwrap();
        let q = quadrature_spec(&s, 1 << 12, -3, 3).unwrap();
        for k in 1..=3 {
            let w = c(want[k - 1], 0.0);
            assert!((r.get(-(k as i64)).unwrap() - w).norm() < tol, "{spec} residue k={k}");
            assert!((q.get(-(k as i64)).unwrap() - w).norm() < tol, "{spec} quadrature k={k}");
        }
    }
}
