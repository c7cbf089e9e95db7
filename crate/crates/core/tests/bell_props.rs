use incompat::bell::{
    bell_operator, correlators_from_quantum, seesaw_optimize, BellInequality, CatalogEntry, SeesawConfig,
};
use incompat::povm::{noisy_pauli_family, MeasurementAssembly, Povm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coefficients() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (1usize..5, 1usize..5).prop_flat_map(|(na, nb)| {
        (
            prop::collection::vec(prop::collection::vec(-3i32..4, nb), na),
            prop::collection::vec(-2i32..3, na),
            prop::collection::vec(-2i32..3, nb),
        )
            .prop_map(|(g, a, b)| {
                let f = |v: Vec<i32>| v.into_iter().map(f64::from).collect::<Vec<f64>>();
                (g.into_iter().map(f).collect(), f(a), f(b))
            })
    })
}

fn random_binary_qubits(seed: u64, m: usize) -> MeasurementAssembly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MeasurementAssembly::new((0..m).map(|_| Povm::random(2, 2, &mut rng).unwrap()).collect()).unwrap()
}

#[test]
fn builtin_local_bounds_match_oracle() {
    for name in BellInequality::builtin_names() {
        let i = BellInequality::builtin(name).unwrap();
        assert!((i.local_bound().unwrap() - i.local_bound_by_bob().unwrap()).abs() < 1e-12, "{name}");
        assert!((i.local_bound - 1.0).abs() < 1e-12);
        for r in i.relabelings() {
            assert!((r.local_bound().unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn local_bound_matches_oracle((gamma, alpha, beta) in coefficients()) {
        let raw = CatalogEntry { name: "random".into(), gamma, alpha, beta, claimed_bound: None };
        if let Ok(i) = BellInequality::from_catalog(raw) {
            prop_assert!((i.local_bound().unwrap() - i.local_bound_by_bob().unwrap()).abs() < 1e-9);
            let swapped = i.swap_parties();
            prop_assert!((swapped.local_bound().unwrap() - i.local_bound).abs() < 1e-9);
            prop_assert!((i.flip_alice(1).local_bound().unwrap() - i.local_bound).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn seesaw_is_monotone_and_recomputable(seed in any::<u64>(), name_ix in 0usize..3) {
        let name = BellInequality::builtin_names()[name_ix];
        let ineq = BellInequality::builtin(name).unwrap();
        let alice = random_binary_qubits(seed, ineq.n_a);
        let config = SeesawConfig { restarts: 4, seed, ..SeesawConfig::default() };
        let r = seesaw_optimize(&ineq, &alice, &config).unwrap();
        prop_assert!(r.history.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{:?}", r.history);
        prop_assert!((r.history.last().unwrap() - r.value).abs() < 1e-8);
        let c = correlators_from_quantum(&r.state.density(), &alice, &r.bob_observables).unwrap();
        prop_assert!((ineq.evaluate(&c).unwrap() - r.value).abs() <= 1e-8);
        let alice_obs: Vec<_> = alice.povms().iter().map(|p| p.observable().unwrap()).collect();
        let op = bell_operator(&ineq, &alice_obs, &r.bob_observables).unwrap();
        prop_assert!(r.value <= op.max_eigenvalue().unwrap() + 1e-8);
    }
}

#[test]
fn seesaw_is_reproducible() {
    let ineq = BellInequality::builtin("i3322").unwrap();
    let alice = noisy_pauli_family(0.9).unwrap();
    let config = SeesawConfig { restarts: 5, seed: 11, ..SeesawConfig::default() };
    let a = seesaw_optimize(&ineq, &alice, &config).unwrap();
    let b = seesaw_optimize(&ineq, &alice, &config).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(a.history, b.history);
}
