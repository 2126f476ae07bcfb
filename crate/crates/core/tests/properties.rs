//! Property tests for the profile invariants and the expression parser.

use orbitpde::expr;
use orbitpde::flux::{
    check_condition, ConditionKind, ConditionWitness, FluxProfile, Verdict,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The eigenvalue ratio stays in (0, 1] across profiles and magnitudes.
    #[test]
    fn eigenvalue_ratio_in_unit_interval(p in 1.05f64..6.0, log_s in -6.0f64..5.0) {
        let s = 10f64.powf(log_s);
        for profile in [FluxProfile::p_laplace(p).unwrap(), FluxProfile::minimal_surface()] {
            let r = profile.eigenvalue_ratio(s);
            prop_assert!(r > 0.0 && r <= 1.0 + 1e-15, "{} at s={s}: {r}", profile.label());
        }
    }

    /// `b + 1 = s a'(s)/a(s)` stays positive (ellipticity).
    #[test]
    fn b_plus_one_positive(p in 1.05f64..6.0, log_s in -6.0f64..5.0) {
        let s = 10f64.powf(log_s);
        for profile in [FluxProfile::p_laplace(p).unwrap(), FluxProfile::minimal_surface()] {
            prop_assert!(profile.b(s) + 1.0 > 0.0);
        }
    }

    /// A verdict that holds on a grid holds on every subset of it.
    #[test]
    fn condition_verdict_monotone_under_subsets(
        c in 0.01f64..0.45,
        mask in proptest::collection::vec(any::<bool>(), 64),
    ) {
        let profile = FluxProfile::minimal_surface();
        let grid = orbitpde::flux::log_grid(1.0, 1e3, 64);
        let w = ConditionWitness::power_law(ConditionKind::II, c, 0, 1.0, 1e3);
        let full = check_condition(&profile, &w, &grid).unwrap();
        if full == Verdict::Holds {
            let sub: Vec<f64> = grid
                .iter()
                .zip(&mask)
                .filter(|(_, &m)| m)
                .map(|(&s, _)| s)
                .collect();
            if !sub.is_empty() {
                prop_assert_eq!(check_condition(&profile, &w, &sub).unwrap(), Verdict::Holds);
            }
        }
    }

    /// The parser rejects junk without panicking, and parseable inputs
    /// evaluate to a finite or NaN number without panicking.
    #[test]
    fn parser_never_panics(src in ".{0,40}") {
        let vars = vec!["r".to_string(), "theta".to_string()];
        if let Ok(e) = expr::parse(&src, &vars) {
            let _ = e.eval(&[1.2, 0.7]);
        }
    }

    /// Round trip: a formatted binary expression re-parses to the same value.
    #[test]
    fn simple_expressions_evaluate(a in -100.0f64..100.0, b in 0.1f64..100.0) {
        let vars: Vec<String> = vec![];
        let src = format!("{a} + {b} * 2 - {b} / 4");
        let e = expr::parse(&src, &vars).unwrap();
        let expect = a + b * 2.0 - b / 4.0;
        prop_assert!((e.eval(&[]) - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }
}
