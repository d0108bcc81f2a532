//! Randomized property tests for the pure building blocks: the two-point
//! deviation functional, the entropy-function catalog, number formatting,
//! and config parsing. Heavier spectral properties live in the acceptance
//! suite.

use proptest::prelude::*;
use szego::coeffs::u_functional;
use szego::harness::{fmt_g12, parse_config};
use szego::testfuncs::{monomial, power_abs, renyi_eta, t_log_abs, TestFunction};

fn quadratic() -> TestFunction {
    monomial(2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Swapping the endpoints swaps the parameterization direction only.
    #[test]
    fn u_is_symmetric_in_its_endpoints(
        s1 in -3.0f64..3.0,
        s2 in -3.0f64..3.0,
    ) {
        let f = quadratic();
        let a = u_functional(s1, s2, &f).unwrap();
        let b = u_functional(s2, s1, &f).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    /// U annihilates affine functions: only curvature contributes.
    #[test]
    fn u_vanishes_on_affine_functions(
        s1 in -3.0f64..3.0,
        s2 in -3.0f64..3.0,
        c in -2.0f64..2.0,
    ) {
        let f = TestFunction::custom(move |t| c * t, None, None, vec![], 1.0, None);
        let v = u_functional(s1, s2, &f).unwrap();
        prop_assert!(v.abs() <= 1e-10 * (1.0 + c.abs() * (s1.abs() + s2.abs())));
    }

    /// U is linear in the test function.
    #[test]
    fn u_is_linear_in_the_test_function(
        s1 in -2.0f64..2.0,
        s2 in -2.0f64..2.0,
        c in -3.0f64..3.0,
    ) {
        let f2 = quadratic();
        let f3 = monomial(3).unwrap();
        let combo = TestFunction::custom(
            move |t| c * t * t + t * t * t,
            None,
            None,
            vec![],
            2.0,
            None,
        );
        let lhs = u_functional(s1, s2, &combo).unwrap();
        let rhs = c * u_functional(s1, s2, &f2).unwrap() + u_functional(s1, s2, &f3).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-7 * (1.0 + lhs.abs() + rhs.abs()));
    }

    /// Power functions make U homogeneous of their own degree.
    #[test]
    fn u_is_homogeneous_for_power_functions(
        s1 in 0.05f64..2.0,
        s2 in 0.05f64..2.0,
        lam_idx in 0usize..2,
        gamma_idx in 0usize..2,
    ) {
        let lam = [0.5, 0.1][lam_idx];
        let gamma = [0.5, 1.0][gamma_idx];
        // gamma = 1 with |t| on one sign is affine, so use distinct points
        // of the same sign for a nondegenerate but well-defined value.
        let f = power_abs(gamma, 1.0).unwrap();
        let a = u_functional(lam * s1, lam * s2, &f).unwrap();
        let b = u_functional(s1, s2, &f).unwrap();
        prop_assert!(
            (a - lam.powf(gamma) * b).abs() <= 1e-6 * (1.0 + b.abs()),
            "lam {} gamma {}: {} vs {}", lam, gamma, a, lam.powf(gamma) * b
        );
    }

    /// The linear-log term drops out of U, leaving exact degree-1 scaling.
    #[test]
    fn u_scales_linearly_for_t_log_t(
        s1 in 0.05f64..2.0,
        s2 in 0.05f64..2.0,
        lam_idx in 0usize..2,
    ) {
        let lam = [0.5, 0.1][lam_idx];
        let h = t_log_abs();
        let a = u_functional(lam * s1, lam * s2, &h).unwrap();
        let b = u_functional(s1, s2, &h).unwrap();
        prop_assert!(
            (a - lam * b).abs() <= 1e-6 * (1.0 + b.abs()),
            "lam {}: {} vs {}", lam, a, lam * b
        );
    }

    /// Entropy functions are symmetric about 1/2 on (0, 1), vanish at the
    /// endpoints, and are nonnegative.
    #[test]
    fn entropy_functions_are_symmetric_and_nonnegative(
        t in 1e-6f64..0.999999,
        gamma_idx in 0usize..3,
    ) {
        let gamma = [0.5, 1.0, 2.0][gamma_idx];
        let eta = renyi_eta(gamma).unwrap();
        let a = eta.eval(t);
        let b = eta.eval(1.0 - t);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        prop_assert!(a >= 0.0);
        prop_assert!(eta.eval(0.0) == 0.0 && eta.eval(1.0) == 0.0);
    }

    /// Formatting produces 12 significant digits: parsing the string back
    /// recovers the value to a relative error bounded by the last digit.
    #[test]
    fn formatted_floats_round_trip_to_twelve_digits(x in -1e14f64..1e14) {
        let s = fmt_g12(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!(
            (back - x).abs() <= 5e-12 * x.abs() + f64::MIN_POSITIVE,
            "{} -> {} -> {}", x, s, back
        );
    }

    /// Any list of sane key=value lines parses back to itself.
    #[test]
    fn config_lines_round_trip(
        keys in prop::collection::vec("[a-z][a-z0-9-]{0,8}", 0..5),
        vals in prop::collection::vec("[a-z0-9.,:-]{1,12}", 5),
    ) {
        let text: String = keys
            .iter()
            .zip(&vals)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let parsed = parse_config(&text).unwrap();
        let expect: Vec<(String, String)> = keys
            .iter()
            .zip(&vals)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        prop_assert_eq!(parsed, expect);
    }
}

#[test]
fn entropy_functions_equal_log_two_at_one_half() {
    for gamma in [0.5, 1.0, 2.0] {
        let eta = renyi_eta(gamma).unwrap();
        let v = eta.eval(0.5);
        assert!(
            (v - std::f64::consts::LN_2).abs() < 1e-14,
            "gamma {gamma}: eta(1/2) = {v}"
        );
    }
}
