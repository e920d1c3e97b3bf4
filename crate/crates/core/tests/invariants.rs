//! Cross-module invariants, exercised through the public API only: the
//! implication chain between the three summability predicates, purity and
//! budget monotonicity of the detectors, certificate re-checking, and
//! randomized versions of the exact enumeration identities.

use banach_lab::*;
use num::BigRational;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;

fn params_alpha(n: i64, d: i64) -> BTreeMap<String, BigRational> {
    BTreeMap::from([("alpha".to_string(), BigRational::new(n.into(), d.into()))])
}

/// Catalog matrix: every family, in the precision where it is total.
fn matrix() -> Vec<(FormalSeries, &'static str)> {
    let e = Precision::Exact;
    let f = Precision::Float64;
    let none = BTreeMap::new();
    vec![
        (catalog("l2_diagonal", &params_alpha(1, 1), e).unwrap().0, "l2 alpha=1"),
        (catalog("l2_diagonal", &params_alpha(2, 1), e).unwrap().0, "l2 alpha=2"),
        (catalog("l2_diagonal", &params_alpha(1, 2), f).unwrap().0, "l2 alpha=1/2"),
        (catalog("l1_absolute", &none, e).unwrap().0, "l1"),
        (catalog("c0_basis", &none, e).unwrap().0, "c0 basis"),
        (catalog("c0_paired", &none, e).unwrap().0, "c0 paired"),
        (catalog("torus_fourier", &params_alpha(1, 1), e).unwrap().0, "torus alpha=1"),
        (catalog("linf_monomial", &none, e).unwrap().0, "monomial"),
    ]
}

fn family_for(s: &FormalSeries) -> NormingFamily {
    match s.space().kind {
        SpaceKind::MonomialLinf => monomial_test_family(s.space()).unwrap(),
        _ => norming_family(s.space()).unwrap(),
    }
}

fn small_budget() -> Budget {
    Budget { n_max: 64, k_functionals: 16, candidate_count: 8, ..Budget::default() }
}

fn coefficient_menu(n_max: usize, seed: u64) -> Vec<(CoefficientSeq, &'static str)> {
    vec![
        (sample_haar(Seed::new(seed), n_max + 1), "haar signs"),
        (sample_selectors(Seed::new(seed + 1), n_max + 1), "random selectors"),
        (CoefficientSeq::signs_all_plus(), "all plus"),
        (CoefficientSeq::selectors_all_zero(), "all zero"),
    ]
}

#[test]
fn strong_convergence_forces_weak_and_bounded() {
    let b = small_budget();
    for (s, name) in matrix() {
        let fam = family_for(&s);
        for (c, cname) in coefficient_menu(b.n_max, 17) {
            let strong = detect_strong(&s, &c, &b).unwrap();
            let weak = detect_weak(&s, &c, &fam, &b).unwrap();
            let bounded = detect_bounded(&s, &c, &b).unwrap();
            if strong.outcome == Outcome::Converged {
                assert_ne!(
                    weak.outcome,
                    Outcome::Diverged,
                    "{name}/{cname}: strong convergence with weak divergence"
                );
                assert_ne!(
                    bounded.outcome,
                    Outcome::Diverged,
                    "{name}/{cname}: strong convergence with unbounded sums"
                );
            }
            if bounded.outcome == Outcome::Diverged {
                assert_ne!(
                    strong.outcome,
                    Outcome::Converged,
                    "{name}/{cname}: blow-up under a convergent scan"
                );
            }
        }
    }
}

#[test]
fn every_emitted_verdict_survives_its_recheck() {
    let b = small_budget();
    for (s, name) in matrix() {
        let fam = family_for(&s);
        for (c, cname) in coefficient_menu(b.n_max, 29) {
            let strong = detect_strong(&s, &c, &b).unwrap();
            assert!(
                recheck_verdict(&s, &c, None, &strong).unwrap(),
                "{name}/{cname}: strong verdict failed recheck: {:?}",
                strong.certificate
            );
            let weak = detect_weak(&s, &c, &fam, &b).unwrap();
            assert!(
                recheck_verdict(&s, &c, Some(&fam), &weak).unwrap(),
                "{name}/{cname}: weak verdict failed recheck: {:?}",
                weak.certificate
            );
            let bounded = detect_bounded(&s, &c, &b).unwrap();
            assert!(
                recheck_verdict(&s, &c, None, &bounded).unwrap(),
                "{name}/{cname}: bounded verdict failed recheck: {:?}",
                bounded.certificate
            );
        }
    }
}

#[test]
fn detectors_are_pure_functions() {
    let b = small_budget();
    for (s, name) in matrix() {
        let fam = family_for(&s);
        let c = sample_haar(Seed::new(3), b.n_max + 1);
        let first = serde_json::to_string(&detect_weak(&s, &c, &fam, &b).unwrap()).unwrap();
        let second = serde_json::to_string(&detect_weak(&s, &c, &fam, &b).unwrap()).unwrap();
        assert_eq!(first, second, "{name}: weak detector not deterministic");
        let first = serde_json::to_string(&detect_strong(&s, &c, &b).unwrap()).unwrap();
        let second = serde_json::to_string(&detect_strong(&s, &c, &b).unwrap()).unwrap();
        assert_eq!(first, second, "{name}: strong detector not deterministic");
    }
}

#[test]
fn larger_budgets_never_reverse_decisions() {
    let small = small_budget();
    let large = Budget { n_max: 256, k_functionals: 32, candidate_count: 16, ..Budget::default() };
    for (s, name) in matrix() {
        let fam = family_for(&s);
        let c = sample_haar(Seed::new(41), large.n_max + 1);
        for (a, b) in [
            (detect_strong(&s, &c, &small).unwrap(), detect_strong(&s, &c, &large).unwrap()),
            (detect_weak(&s, &c, &fam, &small).unwrap(), detect_weak(&s, &c, &fam, &large).unwrap()),
            (detect_bounded(&s, &c, &small).unwrap(), detect_bounded(&s, &c, &large).unwrap()),
        ] {
            let flipped = (a.outcome == Outcome::Converged && b.outcome == Outcome::Diverged)
                || (a.outcome == Outcome::Diverged && b.outcome == Outcome::Converged);
            assert!(!flipped, "{name}: budget growth flipped {:?} to {:?}", a.outcome, b.outcome);
        }
    }
}

#[test]
fn oracle_summaries_respect_the_implication_chain() {
    let e = Precision::Exact;
    for (name, params) in [
        ("l2_diagonal", params_alpha(1, 1)),
        ("l2_diagonal", params_alpha(3, 1)),
        ("l1_absolute", BTreeMap::new()),
        ("c0_basis", BTreeMap::new()),
        ("c0_paired", BTreeMap::new()),
        ("linf_monomial", BTreeMap::new()),
        ("torus_fourier", params_alpha(1, 1)),
    ] {
        let (_, spec) = catalog(name, &params, e).unwrap();
        spec.summary.validate().unwrap_or_else(|err| {
            panic!("{name}: implication chain broken in the published summary: {err}")
        });
    }
}

#[test]
fn weak_divergence_certificates_are_mutually_exclusive_with_tubes() {
    // an obstruction and a tube at the same tolerance cannot coexist: the
    // obstruction separation exceeds the tube diameter
    let b = small_budget();
    for (s, name) in matrix() {
        let fam = family_for(&s);
        for (c, _) in coefficient_menu(b.n_max, 53) {
            let v = detect_weak(&s, &c, &fam, &b).unwrap();
            if let Certificate::WeakObstruction { separation, eps_f64, .. } = &v.certificate {
                assert!(
                    *separation > 2.0 * eps_f64 - 1e-9,
                    "{name}: obstruction too small to exclude a tube"
                );
                assert_eq!(v.outcome, Outcome::Diverged);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The maximal inequality is a theorem; every exact finite instance must
    /// satisfy it.
    #[test]
    fn prop_levy_inequality_holds(
        entries in proptest::collection::vec((0usize..3, -3i64..=3), 1..6),
        terms_n in 1usize..6,
        (rn, rd) in (0i64..=5, 1i64..=4),
    ) {
        let space = Space::finite_dim(3, PNorm::Two, Precision::Exact).unwrap();
        let base = Vector::from_ints(space, &entries).unwrap();
        let terms: Vec<Vector> = (0..terms_n).map(|_| base.clone()).collect();
        let r = Scalar::ratio(Precision::Exact, rn, rd);
        let rep = levy_check_exhaustive(&terms, &r).unwrap();
        prop_assert!(rep.holds, "lhs {} > rhs {}", rep.lhs, rep.rhs);
    }

    /// Mixed random terms, not just repeated ones.
    #[test]
    fn prop_levy_holds_for_mixed_terms(
        rows in proptest::collection::vec(
            proptest::collection::vec((0usize..4, -2i64..=2), 0..3),
            1..6,
        ),
        (rn, rd) in (0i64..=4, 1i64..=3),
    ) {
        let space = Space::finite_dim(4, PNorm::One, Precision::Exact).unwrap();
        let terms: Vec<Vector> = rows
            .iter()
            .map(|r| Vector::from_ints(space, r).unwrap())
            .collect();
        let r = Scalar::ratio(Precision::Exact, rn, rd);
        let rep = levy_check_exhaustive(&terms, &r).unwrap();
        prop_assert!(rep.holds, "lhs {} > rhs {}", rep.lhs, rep.rhs);
    }

    /// The sign-flip bijection makes the two truncation multisets equal for
    /// every term list and every N <= M.
    #[test]
    fn prop_equidistribution_multisets_match(
        rows in proptest::collection::vec(
            proptest::collection::vec((0usize..3, -2i64..=2), 0..3),
            5..7,
        ),
        n in 0usize..5,
        m in 0usize..5,
    ) {
        let (n, m) = if n <= m { (n, m) } else { (m, n) };
        let space = Space::finite_dim(3, PNorm::Inf, Precision::Exact).unwrap();
        let terms: Vec<Vector> = rows
            .iter()
            .map(|r| Vector::from_ints(space, r).unwrap())
            .collect();
        let rep = equidistribution_check(&terms, n, m).unwrap();
        prop_assert!(rep.multiset_equal);
    }

    /// Flipping block signs on T shifts the partial sums by exactly twice
    /// the T-restricted subseries, whatever the blocks and signs.
    #[test]
    fn prop_flip_identity_exact(
        signs in proptest::collection::vec(prop_oneof![Just(1i64), Just(-1i64)], 20),
        t_ids in proptest::collection::btree_set(0usize..12, 0..6),
    ) {
        let (s, _) = catalog("l2_diagonal", &params_alpha(1, 1), Precision::Exact).unwrap();
        let part = Arc::new(BlockPartition::new(
            vec![vec![0, 1], vec![2, 3, 4], vec![5]],
        ).unwrap());
        let eps = CoefficientSeq::signs(signs, CoeffTail::One).unwrap();
        let t = BlockIdSet::Explicit(t_ids);
        let id = subseries_flip_identity(&s, &part, &t, &eps, 16).unwrap();
        prop_assert!(id.holds);
        prop_assert_eq!(id.max_residual, 0.0);
    }

    /// Fresh verdicts at random seeds always survive their recheck.
    #[test]
    fn prop_recheck_accepts_fresh_verdicts(seed in 0u64..1000, which in 0usize..4) {
        let b = Budget { n_max: 48, k_functionals: 8, candidate_count: 4, ..Budget::default() };
        let names = ["l2_diagonal", "l1_absolute", "c0_basis", "c0_paired"];
        let params = if which == 0 { params_alpha(1, 1) } else { BTreeMap::new() };
        let (s, _) = catalog(names[which], &params, Precision::Exact).unwrap();
        let c = sample_haar(Seed::new(seed), b.n_max + 1);
        let v = detect_strong(&s, &c, &b).unwrap();
        prop_assert!(recheck_verdict(&s, &c, None, &v).unwrap());
        let fam = norming_family(s.space()).unwrap();
        let w = detect_weak(&s, &c, &fam, &b).unwrap();
        prop_assert!(recheck_verdict(&s, &c, Some(&fam), &w).unwrap());
    }
}
