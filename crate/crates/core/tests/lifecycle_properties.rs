mod common;

use aurcase::dsl::parse;
use aurcase::lifecycle::{
    check_target, drift_check, rate_upper_bound, readiness_review, DriftOutcome, ExposureLedger, Phase, TargetStatus,
};
use aurcase::validator::{validate, RuleConfig};
use proptest::prelude::*;

use common::{ledger_strategy, oracle_upper_bound, read_fixture, CORPUS};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn matches_oracle_over_the_sweep() {
    for count in 0..=20u64 {
        for exp in 3..=7 {
            let exposure = 10f64.powi(exp);
            for confidence in [0.9, 0.95, 0.99] {
                let got = rate_upper_bound(count, exposure, confidence).unwrap();
                let want = oracle_upper_bound(count, exposure, confidence);
                assert!(rel(got, want) < 1e-6, "k={count} E={exposure} c={confidence}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn closed_form_at_zero_events() {
    let got = rate_upper_bound(0, 1e6, 0.95).unwrap();
    assert!(rel(got, -(0.05f64.ln()) / 1e6) < 1e-9);
    assert!(rel(got, 2.99573e-6) < 1e-5);
}

#[test]
fn one_event_matches_the_two_term_equation() {
    // (1 + m) e^-m = 0.05, solved by bisection on m
    let f = |m: f64| (1.0 + m) * (-m).exp() - 0.05;
    let (mut lo, mut hi) = (0.0, 20.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let got = rate_upper_bound(1, 1e6, 0.95).unwrap();
    assert!(rel(got, lo / 1e6) < 1e-6);
    assert!(rel(got, 4.74386e-6) < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn bound_shrinks_as_exposure_grows(
        a in 1e-3f64..1e9,
        factor in 1.0001f64..1e3,
        confidence in 0.01f64..0.999,
    ) {
        let small = rate_upper_bound(0, a, confidence).unwrap();
        let large = rate_upper_bound(0, a * factor, confidence).unwrap();
        prop_assert!(large < small);
    }

    #[test]
    fn bound_grows_with_count(count in 0u64..200, exposure in 1.0f64..1e8, confidence in 0.5f64..0.999) {
        let a = rate_upper_bound(count, exposure, confidence).unwrap();
        let b = rate_upper_bound(count + 1, exposure, confidence).unwrap();
        prop_assert!(b > a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    #[test]
    fn approval_implies_no_errors_and_met_targets(
        which in 0..CORPUS.len(),
        ledger in ledger_strategy(),
        review_ready in any::<bool>(),
    ) {
        let text = read_fixture(CORPUS[which]);
        let Some(case) = parse(&text, CORPUS[which]).case else { return Ok(()) };
        let config = RuleConfig { review_ready, ..RuleConfig::default() };
        let decision = readiness_review(&case, &ledger, &config);
        prop_assert_eq!(decision.is_approved(), decision.blockers.is_empty());
        if decision.is_approved() {
            prop_assert!(validate(&case, &config).iter().all(|d| !d.is_error()));
            for c in case.criteria().iter().filter(|c| c.rate_bound().is_some()) {
                let check = check_target(c, &ledger, Phase::Predicted).unwrap();
                prop_assert_eq!(check.status, TargetStatus::Met);
            }
        }
    }
}

fn golden_ledger() -> ExposureLedger {
    ExposureLedger::parse(&read_fixture("golden.ledger")).unwrap()
}

#[test]
fn golden_case_is_approved() {
    let case = parse(&read_fixture("golden_cat.aur"), "golden_cat.aur").case.unwrap();
    let decision = readiness_review(&case, &golden_ledger(), &RuleConfig::default());
    assert!(decision.is_approved(), "{:?}", decision.blockers);
    assert_eq!(decision.checks.len(), 1);
    assert!(rel(decision.checks[0].upper_bound.unwrap(), 2.99573e-6) < 1e-5);
}

#[test]
fn missing_reasonableness_blocks() {
    let case = parse(&read_fixture("missing_sc1.aur"), "missing_sc1.aur").case.unwrap();
    let decision = readiness_review(&case, &golden_ledger(), &RuleConfig::default());
    assert!(!decision.is_approved());
    assert!(decision.blockers.iter().any(|b| b.subject == "C1" && b.cause.to_string() == "E002"));
}

#[test]
fn reduced_exposure_blocks_with_unmet_check() {
    let case = parse(&read_fixture("golden_cat.aur"), "golden_cat.aur").case.unwrap();
    let ledger = ExposureLedger::parse(&read_fixture("golden.ledger").replace("1000000", "100000")).unwrap();
    let decision = readiness_review(&case, &ledger, &RuleConfig::default());
    assert!(!decision.is_approved());
    assert_eq!(decision.checks[0].status, TargetStatus::Unmet);
    assert!(rel(decision.checks[0].upper_bound.unwrap(), 2.99573e-5) < 1e-5);
}

#[test]
fn blanked_context_blocks_review() {
    let text = read_fixture("golden_cat.aur").replace("deployment_scale = \"up to 500 vehicles\"", "deployment_scale = \"\"");
    let case = parse(&text, "f.aur").case.unwrap();
    let decision = readiness_review(&case, &golden_ledger(), &RuleConfig::default());
    assert!(decision.blockers.iter().any(|b| b.cause.to_string() == "E011"));
}

#[test]
fn drift_after_deployment() {
    let case = parse(&read_fixture("golden_cat.aur"), "golden_cat.aur").case.unwrap();
    let ac2 = case.criterion("AC2").unwrap();
    let base = read_fixture("golden.ledger");
    let quiet = ExposureLedger::parse(&format!("{base}1.0.0,observed,1000000,miles,injury collision,0\n")).unwrap();
    assert!(matches!(drift_check(ac2, &quiet).unwrap(), DriftOutcome::NoDrift(_)));
    let noisy = ExposureLedger::parse(&format!("{base}1.0.0,observed,100000,miles,injury collision,3\n")).unwrap();
    match drift_check(ac2, &noisy).unwrap() {
        DriftOutcome::Drift(f) => {
            assert!(rel(f.observed_upper_bound, oracle_upper_bound(3, 1e5, 0.95)) < 1e-6);
            assert!(rel(f.observed_upper_bound, 7.75366e-5) < 1e-5);
        }
        other => panic!("expected drift, got {other:?}"),
    }
    assert!(matches!(drift_check(ac2, &golden_ledger()).unwrap(), DriftOutcome::InsufficientData { .. }));
}
