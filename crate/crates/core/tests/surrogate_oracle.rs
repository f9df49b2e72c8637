//! Multi-index enumeration, Taylor coefficients and truncation thresholds against
//! independent reference computations.

use std::collections::BTreeSet;

use nearclifford::surrogate::{
    build_surrogate_with, lambert_lower_bound, lambert_w, mse_threshold, multi_index_count,
    worst_case_threshold, SigmaMode, SurrogateBudget,
};
use nearclifford::{
    build_ansatz, build_surrogate, enumerate_multi_indices, taylor_coefficient, AnsatzSpec, Family,
    MultiIndex, PauliObservable, PauliString, ShiftCache, TaylorSurrogate,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Direct search over `norm · l1^m / m!` in linear space.
fn factorial_search(l1: f64, norm: f64, eps: f64) -> u64 {
    let mut m = 1u64;
    let mut term = norm * l1;
    while term > eps {
        m += 1;
        term *= l1 / m as f64;
    }
    m
}

/// Bisection on `w e^w = x` over `[0, max(1, ln(1+x))·2]`.
fn bisect_w(x: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 2.0 * (1.0 + x).ln().max(1.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.exp() < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #[test]
    fn enumeration_is_exhaustive_and_unique(m in 1u32..6, d in 1usize..7) {
        let got: Vec<Vec<u32>> = enumerate_multi_indices(m, d).map(|a| a.dense(d)).collect();
        let set: BTreeSet<Vec<u32>> = got.iter().cloned().collect();
        prop_assert_eq!(set.len(), got.len());
        prop_assert!(got.iter().all(|v| v.iter().sum::<u32>() < m));
        prop_assert_eq!(got.len() as u128, multi_index_count(m, d));
        let mut sorted = got.clone();
        sorted.sort();
        prop_assert_eq!(sorted, got, "lexicographic order");
    }

    #[test]
    fn threshold_matches_factorial_search(l1 in 0.01f64..30.0, norm in 0.1f64..10.0, e in 1.0f64..12.0) {
        let eps = 10f64.powf(-e);
        prop_assert_eq!(worst_case_threshold(l1, norm, eps).unwrap(), factorial_search(l1, norm, eps));
    }

    #[test]
    fn threshold_monotone(l1 in 0.01f64..30.0, extra in 0.0f64..5.0, e in 1.0f64..12.0) {
        let eps = 10f64.powf(-e);
        prop_assert!(worst_case_threshold(l1, 1.0, eps).unwrap() <= worst_case_threshold(l1 + extra, 1.0, eps).unwrap());
        prop_assert!(worst_case_threshold(l1, 1.0, eps).unwrap() <= worst_case_threshold(l1, 1.0, eps / 10.0).unwrap());
    }

    #[test]
    fn lambert_matches_bisection(x in 0.0f64..1e8) {
        let w = lambert_w(x).unwrap();
        let r = bisect_w(x);
        prop_assert!((w - r).abs() <= 1e-12 * r.max(1.0), "{w} vs {r}");
    }

    #[test]
    fn mse_threshold_at_least_one(d in 2usize..10_000, q in 0.01f64..0.99, e in 1.0f64..10.0) {
        let m = mse_threshold(d, SigmaMode::Nonasymptotic { q }, 10f64.powf(-e), 0.1, 1.0).unwrap();
        prop_assert!(m >= 1);
    }
}

#[test]
fn lambert_bound_approaches_e_l1() {
    let mut last = f64::INFINITY;
    for l1 in [1e2, 1e3, 1e4, 1e5] {
        let gap =
            (lambert_lower_bound(l1, 1.0, 1e-6).unwrap() / (std::f64::consts::E * l1) - 1.0).abs();
        assert!(gap < last, "ratio should tend to 1");
        last = gap;
    }
    assert!(last < 1e-3);
}

fn small_instance(seed: u64, family: Family) -> (nearclifford::Circuit, PauliObservable) {
    let c = build_ansatz(&AnsatzSpec {
        family,
        n_qubits: 3,
        layers: 1,
        seed,
    })
    .unwrap();
    let obs = PauliObservable::random(3, 2, true, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (c, obs)
}

#[test]
fn coefficients_are_linear_in_the_observable() {
    let (c, obs) = small_instance(1, Family::MHea);
    for alpha in enumerate_multi_indices(3, c.n_params()).step_by(37) {
        let a = taylor_coefficient(&c, &obs, &alpha, None).unwrap();
        let b = taylor_coefficient(&c, &obs.scaled(-2.5), &alpha, None).unwrap();
        assert!((b + 2.5 * a).abs() < 1e-12);
    }
}

#[test]
fn second_order_shift_rule_on_one_rotation() {
    // C(θ) = cos θ for R_Y on |0> measured in Z, so C'' (0) = -1.
    let c = nearclifford::Circuit::new(
        1,
        vec![nearclifford::Gate::ParamRot {
            axis: nearclifford::SingleQubitPauli::Y,
            qubit: 0,
            param: 0,
        }],
    )
    .unwrap();
    let z = PauliObservable::single("Z".parse::<PauliString>().unwrap()).unwrap();
    assert_eq!(
        taylor_coefficient(&c, &z, &MultiIndex::unit(0), None).unwrap(),
        0.0
    );
    assert_eq!(
        taylor_coefficient(&c, &z, &MultiIndex::from_pairs([(0, 2)]), None).unwrap(),
        -1.0
    );
    assert_eq!(
        taylor_coefficient(&c, &z, &MultiIndex::from_pairs([(0, 4)]), None).unwrap(),
        1.0
    );
}

#[test]
fn eval_count_within_bound() {
    for family in [Family::MHea, Family::FHea] {
        let (c, obs) = small_instance(2, family);
        for m in 1..=4u32 {
            let s =
                build_surrogate_with(&c, &obs, m, SurrogateBudget::default(), &ShiftCache::new())
                    .unwrap();
            let bound =
                obs.terms().len() as u128 * 2u128.pow(m) * multi_index_count(m, c.n_params());
            assert!((s.n_clifford_evals() as u128) <= bound);
        }
    }
}

#[test]
fn surrogate_exact_at_zero_and_round_trips() {
    let (c, obs) = small_instance(3, Family::RPqc);
    let s = build_surrogate(&c, &obs, 3).unwrap();
    let zero = vec![0.0; c.n_params()];
    let exact = nearclifford::statevector::cost(&c, &obs, &zero).unwrap();
    assert!((s.evaluate(&zero).unwrap() - exact).abs() < 1e-12);
    assert_eq!(TaylorSurrogate::from_json(&s.to_json()).unwrap(), s);
}
