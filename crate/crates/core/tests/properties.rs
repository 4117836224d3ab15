use proptest::prelude::*;

use rrw_qbd::bounds::{error_bound_e, error_bound_e_tilde};
use rrw_qbd::certificate::{certify, gamma, lyapunov_v, SearchOptions, Variant};
use rrw_qbd::model::{
    check_negative_face_drift, check_stability, jackson_spec, step_distribution, JacksonParams, Region,
};
use rrw_qbd::qbd::{build_blocks, solve_qbd, DEFAULT_TAIL_TOL};

fn jackson() -> impl Strategy<Value = JacksonParams> {
    (0.01..0.3f64, 0.01..0.3f64, 0.1..0.8f64, 0.1..0.8f64, 0.05..0.95f64, 0.05..0.95f64)
        .prop_map(|(a, b, c, d, q1, q2)| JacksonParams::new(a, b, c, d, q1, q2).unwrap())
}

fn comfortably_stable() -> impl Strategy<Value = JacksonParams> {
    jackson().prop_filter("rho below 0.85", |p| {
        let (r1, r2) = p.rho();
        r1 < 0.85 && r2 < 0.85
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jackson_laws_are_distributions(p in jackson()) {
        let spec = jackson_spec(&p);
        for law in spec.laws() {
            prop_assert!((law.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_below_one_implies_stability_and_face_drift(p in jackson()) {
        if p.is_stable() {
            let spec = jackson_spec(&p);
            prop_assert!(check_stability(&spec).stable);
            prop_assert!(check_negative_face_drift(&spec).holds);
        }
    }

    #[test]
    fn blocks_are_stochastic(p in jackson(), n in 1usize..40) {
        let b = build_blocks(&jackson_spec(&p), n).unwrap();
        prop_assert!(b.stochasticity_defect() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn certificate_and_solution_invariants(p in comfortably_stable(), n in 2usize..30) {
        let spec = jackson_spec(&p);
        let (cert, _, _) = certify(&spec, &SearchOptions::default()).unwrap();
        prop_assert!(cert.theta_tilde.dominates(cert.theta));
        prop_assert!(cert.c > 0.0 && cert.c_tilde > 0.0);
        for r in Region::NON_ORIGIN {
            prop_assert!(gamma(&spec, r, cert.theta.as_array()) < 1.0);
        }

        // drift inequality on a patch around every region
        for &(x, y) in &[(0u64, 0u64), (0, 7), (9, 0), (4, 5), (25, 31)] {
            for variant in [Variant::Base, Variant::Tilde] {
                let (c, b) = cert.drift_constants(variant);
                let v = |s| lyapunov_v(&cert, s, variant).value.unwrap();
                let pv: f64 = step_distribution(&spec, (x, y)).iter().map(|&(t, q)| q * v(t)).sum();
                let rhs = (1.0 - c) * v((x, y)) + if (x, y) == (0, 0) { b } else { 0.0 };
                prop_assert!(pv <= rhs * (1.0 + 1e-10));
            }
        }

        let sol = solve_qbd(&spec, n).unwrap();
        prop_assert!(sol.rate.residual < 1e-12);
        prop_assert!(sol.rate.spectral_radius < 1.0);
        prop_assert!(sol.normalization_residual < 1e-10);
        prop_assert!(sol.balance_residual < 1e-10);
        prop_assert!(sol.pi0.iter().chain(&sol.pi1).all(|&x| x >= 0.0));

        let e = error_bound_e(&sol, &cert, DEFAULT_TAIL_TOL).value;
        prop_assert!(e >= 0.0);
        prop_assert!(e <= error_bound_e_tilde(&cert, n));

        let tt = cert.theta_tilde;
        for (k, level) in sol.levels().take(40).enumerate() {
            let env = cert.b_tilde * (-(k as f64) * tt.theta1 - n as f64 * tt.theta2).exp();
            prop_assert!(level[n] <= env);
        }
    }
}
