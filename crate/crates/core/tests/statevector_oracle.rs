//! Stabilizer evaluation against the dense simulator, and the simulator's gradient
//! modes against each other.

use std::f64::consts::FRAC_PI_2;

use nearclifford::statevector::{self, GradientMode};
use nearclifford::{
    build_ansatz, cost_at_shift, gradient_at_zero, AnsatzSpec, Circuit, Family, PauliObservable,
    ShiftVector,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family(i: u8) -> Family {
    [Family::MHea, Family::FHea, Family::RPqc][i as usize % 3]
}

prop_compose! {
    fn instance()(fam in 0u8..3, n in 2usize..5, layers in 1usize..3, seed in any::<u64>(), terms in 1usize..4)
        -> (Circuit, PauliObservable)
    {
        let c = build_ansatz(&AnsatzSpec { family: family(fam), n_qubits: n, layers, seed }).unwrap();
        let obs = PauliObservable::random(n, terms, true, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        (c, obs)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clifford_points_agree((c, obs) in instance(), raw in proptest::collection::vec(0i64..4, 60)) {
        let turns = &raw[..c.n_params()];
        let theta: Vec<f64> = turns.iter().map(|&t| t as f64 * FRAC_PI_2).collect();
        let a = cost_at_shift(&c, &obs, &ShiftVector::from_dense(turns), None).unwrap();
        let b = statevector::cost(&c, &obs, &theta).unwrap();
        prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn zero_gradient_agrees((c, obs) in instance()) {
        let fast = gradient_at_zero(&c, &obs).unwrap();
        let dense = statevector::gradient(&c, &obs, &vec![0.0; c.n_params()], GradientMode::ParameterShift).unwrap();
        for (a, b) in fast.iter().zip(&dense) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn adjoint_matches_central_difference((c, obs) in instance(), raw in proptest::collection::vec(-3.0f64..3.0, 60)) {
        let theta = &raw[..c.n_params()];
        let (value, adj) = statevector::adjoint_gradient(&c, &obs, theta).unwrap();
        prop_assert!((value - statevector::cost(&c, &obs, theta).unwrap()).abs() < 1e-12);
        let fd = statevector::gradient(&c, &obs, theta, GradientMode::CentralDifference(1e-5)).unwrap();
        for (a, b) in adj.iter().zip(&fd) {
            prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn evolution_is_unitary((c, _obs) in instance(), raw in proptest::collection::vec(-3.0f64..3.0, 60)) {
        let sv = statevector::run(&c, &raw[..c.n_params()]).unwrap();
        prop_assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sampled_estimate_concentrates() {
    let c = build_ansatz(&AnsatzSpec {
        family: Family::MHea,
        n_qubits: 3,
        layers: 1,
        seed: 0,
    })
    .unwrap();
    let obs = PauliObservable::random(3, 3, true, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let theta: Vec<f64> = (0..c.n_params()).map(|k| 0.1 * k as f64).collect();
    let sv = statevector::run(&c, &theta).unwrap();
    let exact = sv.expectation(&obs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let est = statevector::sampled_expectation(&sv, &obs, 1_000_000, &mut rng).unwrap();
    // Each term has standard error at most 1e-3.
    assert!((est - exact).abs() < 6e-3, "{est} vs {exact}");
}
