use incompat::povm::{
    jm_check, noisy_pauli_family, Family, MeasurementAssembly, MeasurementFamily, MotherObservable, Povm,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_assembly(seed: u64, dim: usize, shape: &[usize]) -> MeasurementAssembly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MeasurementAssembly::new(shape.iter().map(|&n| Povm::random(dim, n, &mut rng).unwrap()).collect()).unwrap()
}

fn roundtrip<T: serde::Serialize + serde::de::DeserializeOwned>(v: &T) -> bool {
    let text = serde_json::to_string(v).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    serde_json::to_value(&back).unwrap() == serde_json::to_value(v).unwrap()
}

#[test]
fn witness_bounds_every_sampled_mother() {
    let a = noisy_pauli_family(0.7).unwrap();
    let w = jm_check(&a).unwrap().witness.expect("incompatible at 0.7");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let mother = MotherObservable::random(2, vec![2, 2, 2], &mut rng).unwrap();
        worst = worst.max(w.evaluate(&mother.marginals().unwrap()).unwrap());
    }
    assert!(worst <= w.jm_bound + 1e-9, "{worst} > {}", w.jm_bound);
    assert!(w.value > w.jm_bound);
}

#[test]
fn witness_bounds_deterministic_mothers() {
    let a = noisy_pauli_family(0.8).unwrap();
    let w = jm_check(&a).unwrap().witness.unwrap();
    let compatible = noisy_pauli_family(0.5).unwrap();
    assert!(w.evaluate(&compatible).unwrap() <= w.jm_bound + 1e-9);
    let z = incompat::linalg::HermitianOp::diagonal(&[0.9, 0.2]);
    let commuting = MeasurementAssembly::binary(vec![z.clone(), z.clone(), z]).unwrap();
    let product = MotherObservable::product(&commuting).unwrap();
    assert!(w.evaluate(&product.marginals().unwrap()).unwrap() <= w.jm_bound + 1e-9);
    assert!(MotherObservable::product(&compatible).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jm_is_monotone_in_noise(seed in any::<u64>(), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0, m in 2usize..4) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let family = Family::Depolarized(random_assembly(seed, 2, &vec![2; m]));
        let at_hi = jm_check(&family.at(hi).unwrap()).unwrap();
        let at_lo = jm_check(&family.at(lo).unwrap()).unwrap();
        prop_assert!(at_lo.margin >= at_hi.margin - 1e-6);
        if at_hi.jointly_measurable {
            prop_assert!(at_lo.jointly_measurable);
        }
    }

    #[test]
    fn verdicts_carry_valid_certificates(seed in any::<u64>(), dim in 2usize..4) {
        let a = random_assembly(seed, dim, &[2, 3]);
        let v = jm_check(&a).unwrap();
        match (v.mother, v.witness) {
            (Some(m), None) => {
                let back = m.marginals().unwrap();
                for x in 0..a.len() {
                    for (e, t) in back.povm(x).effects().iter().zip(a.povm(x).effects()) {
                        prop_assert!(e.max_abs_diff(t) < 1e-7);
                    }
                }
            }
            (None, Some(w)) => {
                let (value, bound) = w.recheck(&a).unwrap();
                prop_assert!(value > bound);
            }
            _ => prop_assert!(false, "verdict must carry exactly one certificate"),
        }
    }

    #[test]
    fn json_roundtrips(seed in any::<u64>(), dim in 1usize..4) {
        let a = random_assembly(seed, dim, &[2, 3]);
        prop_assert!(roundtrip(&a));
        prop_assert!(roundtrip(a.povm(1)));
        let parsed = MeasurementAssembly::from_json(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(parsed.outcome_shape(), a.outcome_shape());
        let mother = MotherObservable::random(dim, vec![2, 3], &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(roundtrip(&mother));
        prop_assert!(roundtrip(&Family::Depolarized(a)));
    }
}
