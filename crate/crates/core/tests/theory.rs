//! Closed-form diagnostics against Monte Carlo and direct computation, and
//! recovery under the coherence condition.

mod common;

use srfe::diagnostics::{coherence_threshold, lemma1_feature_bound, uncertainty_lower_bound};

#[test]
fn threshold_constants() {
    assert!((coherence_threshold(1).unwrap() - 4.0 / 41f64.sqrt()).abs() < 1e-15);
    assert!((uncertainty_lower_bound(1, 1).unwrap() - 4.625).abs() < 1e-12);
    // (1 + √(2 ln 10))² / 0.04 = 247.4...
    assert_eq!(lemma1_feature_bound(0.2, 0.1).unwrap(), 248);
}

#[test]
fn measurement_bound_collapses_at_full_order() {
    assert!(common::collapse_gap() < 1e-12);
}

#[test]
fn expected_gram_matches_sampling() {
    let worst = common::gram_suite(8, 20_000, 11);
    assert!(worst < 3.0, "worst deviation {worst:.2} standard errors");
}

#[test]
fn best_s_term_bounds_hold() {
    assert_eq!(common::kappa_suite(2000, 5), 0);
}

#[test]
fn sample_radius_rarely_exceeded() {
    let rate = common::radius_exceedance(0.7, 3, 100, 0.1, 50);
    assert!(rate <= 0.1, "exceedance {rate}");
}

#[test]
fn planted_vectors_are_recovered() {
    let t = common::planted_suite(2, 3);
    assert!(t.all(), "{t:?}");
    assert!(t.worst_kkt < 1e-6, "{t:?}");
}

#[test]
fn outputs_are_feasible() {
    let t = common::feasibility_suite(25, 8);
    assert!(t.all(), "{t:?}");
}

#[test]
fn monte_carlo_expansion_generalizes() {
    let (n, errors) = common::lemma1_errors(0.2, 0.1, 10, 2000);
    assert_eq!(n, 248);
    assert!(errors.iter().all(|&e| e <= 0.2), "{errors:?}");
}
