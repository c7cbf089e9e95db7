//! Random dense SDPs with a known dual-feasible point, and random infeasible LMIs.

use incompat::linalg::{ComplexMatrix, HermitianOp};
use incompat::sdp::{solve, verify_infeasible, verify_optimal, SdpProblem, SdpStatus};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(dim: usize, rng: &mut impl Rng) -> HermitianOp {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    HermitianOp::new(g.checked_add(&g.adjoint()).unwrap().scale_real(0.5)).unwrap()
}

fn random_psd(dim: usize, rng: &mut impl Rng) -> HermitianOp {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    HermitianOp::new(g.checked_mul(&g.adjoint()).unwrap()).unwrap()
}

/// maximize c·y s.t. 𝟙 + Σ y_i F_i ⪰ 0 with c_i = −tr(F_i X₀), so y = 0 and
/// X₀ are feasible and the optimum is at most tr X₀.
fn bounded_problem(seed: u64, dim: usize, n: usize) -> (SdpProblem, HermitianOp) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = random_psd(dim, &mut rng).add(&HermitianOp::identity(dim).scale(0.1));
    let mut p = SdpProblem::new(n);
    let b = p.add_block("lmi", HermitianOp::identity(dim));
    for i in 0..n {
        let f = random_hermitian(dim, &mut rng);
        p.objective[i] = -f.inner(&x0);
        p.add_term(b, i, f);
    }
    (p, x0)
}

fn infeasible_problem(seed: u64, dim: usize, n: usize) -> SdpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = SdpProblem::new(n);
    let plus = p.add_block("plus", HermitianOp::identity(dim).scale(-1.0));
    let minus = p.add_block("minus", HermitianOp::identity(dim).scale(-1.0));
    for i in 0..n {
        let f = random_hermitian(dim, &mut rng);
        p.add_term(plus, i, f.clone());
        p.add_term(minus, i, f.scale(-1.0));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn weak_duality_on_bounded_problems(seed in any::<u64>(), dim in 1usize..5, n in 1usize..5) {
        let (p, x0) = bounded_problem(seed, dim, n);
        let s = solve(&p).unwrap();
        prop_assert_eq!(s.status, SdpStatus::Optimal);
        prop_assert!(verify_optimal(&p, &s).passed);
        prop_assert!(s.objective_value <= s.dual_objective + 1e-7);
        // y = 0 is feasible with value 0; X₀ is dual feasible with value tr X₀.
        prop_assert!(s.objective_value >= -1e-8);
        prop_assert!(s.dual_objective <= x0.trace() + 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn infeasible_problems_carry_farkas_certificates(seed in any::<u64>(), dim in 1usize..4, n in 1usize..4) {
        let p = infeasible_problem(seed, dim, n);
        let s = solve(&p).unwrap();
        prop_assert_eq!(s.status, SdpStatus::Infeasible);
        prop_assert!(verify_infeasible(&p, &s).passed);
    }
}
