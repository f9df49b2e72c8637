//! Encoder invariants over random circuits and observables.

use nearclifford::lce::LcePair;
use nearclifford::statevector::{self, GradientMode};
use nearclifford::{
    beta, build_ansatz, construct_lce, gradient_at_zero, lce_transform, AnsatzSpec, Family,
    PauliObservable, PauliString,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family(i: u8) -> Family {
    [Family::MHea, Family::FHea, Family::RPqc][i as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn single_pauli_component_is_unit(fam in 0u8..3, n in 2usize..12, layers in 1usize..4, seed in any::<u64>(), kf in 0.0f64..1.0) {
        let c = build_ansatz(&AnsatzSpec { family: family(fam), n_qubits: n, layers, seed }).unwrap();
        let p = PauliString::random_nonidentity(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let obs = PauliObservable::single(p).unwrap();
        let k = ((kf * c.n_params() as f64) as usize).min(c.n_params() - 1);
        let pair = construct_lce(&c, &obs, k, 0).unwrap();
        let g = gradient_at_zero(&lce_transform(&c, &pair).unwrap(), &obs).unwrap();
        prop_assert_eq!(g[k], pair.achieved_sign as f64);
        let pos = pair.with_positive_sign(&c, &obs).unwrap();
        prop_assert_eq!(pos.achieved_sign, 1);
        prop_assert_eq!(gradient_at_zero(&lce_transform(&c, &pos).unwrap(), &obs).unwrap()[k], 1.0);
    }

    #[test]
    fn beta_is_the_encoded_gradient(fam in 0u8..3, n in 2usize..8, seed in any::<u64>(), terms in 1usize..5, kf in 0.0f64..1.0, i0f in 0.0f64..1.0) {
        let c = build_ansatz(&AnsatzSpec { family: family(fam), n_qubits: n, layers: 2, seed }).unwrap();
        let obs = PauliObservable::random(n, terms, true, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let k = ((kf * c.n_params() as f64) as usize).min(c.n_params() - 1);
        let i0 = ((i0f * terms as f64) as usize).min(terms - 1);
        let pair = construct_lce(&c, &obs, k, i0).unwrap();
        let g = gradient_at_zero(&lce_transform(&c, &pair).unwrap(), &obs).unwrap();
        let b = beta(&c, &obs, &pair).unwrap();
        prop_assert!((g[k] - b).abs() < 1e-12, "{} vs {b}", g[k]);
        // |β - sign·c_i0| is at most the sum of the other coefficients.
        let rest: f64 = obs.terms().iter().enumerate().filter(|(i, _)| *i != i0).map(|(_, t)| t.0.abs()).sum();
        prop_assert!((b - pair.achieved_sign as f64 * obs.terms()[i0].0).abs() <= rest + 1e-12);
    }

    #[test]
    fn pair_json_round_trip(n in 2usize..6, seed in any::<u64>()) {
        let c = build_ansatz(&AnsatzSpec { family: Family::FHea, n_qubits: n, layers: 1, seed }).unwrap();
        let obs = PauliObservable::random(n, 2, true, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let pair = construct_lce(&c, &obs, (seed % c.n_params() as u64) as usize, 1).unwrap();
        let json = serde_json::to_string(&pair).unwrap();
        prop_assert_eq!(serde_json::from_str::<LcePair>(&json).unwrap(), pair);
    }
}

#[test]
fn encoded_gradient_matches_dense_simulation() {
    for seed in 0..6 {
        let c = build_ansatz(&AnsatzSpec {
            family: family(seed as u8),
            n_qubits: 4,
            layers: 2,
            seed,
        })
        .unwrap();
        let obs =
            PauliObservable::random(4, 3, true, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let pair = construct_lce(&c, &obs, seed as usize % c.n_params(), 0).unwrap();
        let enc = lce_transform(&c, &pair).unwrap();
        let dense = statevector::gradient(
            &enc,
            &obs,
            &vec![0.0; enc.n_params()],
            GradientMode::ParameterShift,
        )
        .unwrap();
        let fast = gradient_at_zero(&enc, &obs).unwrap();
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn out_of_range_indices_rejected() {
    let c = build_ansatz(&AnsatzSpec {
        family: Family::MHea,
        n_qubits: 3,
        layers: 1,
        seed: 0,
    })
    .unwrap();
    let obs = PauliObservable::single("XYZ".parse().unwrap()).unwrap();
    assert!(construct_lce(&c, &obs, c.n_params(), 0).is_err());
    assert!(construct_lce(&c, &obs, 0, 1).is_err());
}
