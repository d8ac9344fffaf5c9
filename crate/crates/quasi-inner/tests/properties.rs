use num_complex::Complex64;
use proptest::prelude::*;
use quasi_inner::conformal::{psi, psi_inv, psi_boundary, theta_of_s};
use quasi_inner::core_functions::{rho, FactorSpec};
use quasi_inner::operators::{blaschke, hankel_from_coefficients};

fn specs() -> impl Strategy<Value = FactorSpec> {
    prop::sample::select(vec!["inf", "p:2", "p:3", "p:5", "inf*p:2", "gauss:2:1", "gauss:3:0", "phi:2:1"])
        .prop_map(|s| s.parse().unwrap())
}

proptest! {
    #[test]
    fn inversion(spec in specs(), x in -3.0..4.0f64, y in -15.0..15.0f64) {
        let z = Complex64::new(x, y);
        if let (Ok(a), Ok(b)) = (rho(&spec, z), rho(&spec, 1.0 - z)) {
            if a.norm() < 1e6 && b.norm() < 1e6 {
                prop_assert!((a * b - 1.0).norm() < 1e-9 * a.norm().max(1.0) * b.norm().max(1.0));
            }
        }
    }

    #[test]
    fn unit_modulus_on_line(spec in specs(), s in -80.0..80.0f64) {
        let v = rho(&spec, Complex64::new(0.5, s)).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn psi_round_trip(r in 0.0..0.99f64, t in 0.0..6.28f64) {
        let v = Complex64::from_polar(r, t);
        let back = psi_inv(psi(v).unwrap()).unwrap();
        prop_assert!((back - v).norm() < 1e-10);
    }

    #[test]
    fn boundary_parametrization(s in -1e3..1e3f64) {
        let z = psi_boundary(theta_of_s(s));
        prop_assert!((z - Complex64::new(0.5, s)).norm() < 1e-9 * s.abs().max(1.0));
    }

    #[test]
    fn blaschke_bounded(r in 0.0..0.9f64, t in 0.01..6.27f64) {
        let v = Complex64::from_polar(r, t);
        let b = blaschke(2, v, 200).unwrap();
        prop_assert!(b.value.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn hankel_is_symmetric(vals in prop::collection::vec(-1.0..1.0f64, 15)) {
        let a: Vec<Complex64> = vals.iter().map(|v| Complex64::new(*v, 0.5 * v)).collect();
        let h = hankel_from_coefficients(&a, 8).unwrap();
        prop_assert_eq!(h.clone(), h.transpose());
    }
}
