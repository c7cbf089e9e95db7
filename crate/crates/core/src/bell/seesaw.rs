use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BellInequality, Correlators};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOp, PureState};
use crate::povm::{MeasurementAssembly, MeasurementFamily};
use crate::threshold::bisect;
use crate::tolerance::TOL;

/// Bob's system is a qubit.
const DIM_B: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// A run stops once one full iteration improves the value by less than this.
    pub tol: f64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self { restarts: 100, seed: 0, max_iter: 1000, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeesawResult {
    /// Inequality value of the returned strategy, recomputed from its correlators.
    pub value: f64,
    pub state: PureState,
    pub bob_observables: Vec<HermitianOp>,
    /// Iterations of the best run.
    pub iterations: usize,
    pub restarts_used: usize,
    /// Value after each iteration of the best run, starting from the random
    /// initial strategy.
    pub history: Vec<f64>,
}

fn alice_observables(alice: &MeasurementAssembly) -> Result<Vec<HermitianOp>> {
    alice.povms().iter().map(|p| p.observable()).collect()
}

fn check_shapes(ineq: &BellInequality, alice: &MeasurementAssembly, n_bob: usize) -> Result<()> {
    if alice.len() != ineq.n_a || n_bob != ineq.n_b {
        return Err(Error::DimensionMismatch(format!(
            "{} Alice and {n_bob} Bob settings for a {}x{} inequality",
            alice.len(),
            ineq.n_a,
            ineq.n_b
        )));
    }
    if !alice.is_binary() {
        return Err(Error::InvalidPovm("Alice's measurements must be binary".into()));
    }
    Ok(())
}

/// `Σ γ_xy A_x ⊗ B_y + Σ α_x A_x ⊗ 𝟙 + Σ β_y 𝟙 ⊗ B_y`.
pub fn bell_operator(ineq: &BellInequality, alice: &[HermitianOp], bob: &[HermitianOp]) -> Result<HermitianOp> {
    if alice.len() != ineq.n_a || bob.len() != ineq.n_b {
        return Err(Error::DimensionMismatch("observable counts do not match the inequality".into()));
    }
    let (da, db) = (alice[0].dim(), bob[0].dim());
    let (ia, ib) = (HermitianOp::identity(da), HermitianOp::identity(db));
    let mut op = HermitianOp::zeros(da * db);
    for (x, a) in alice.iter().enumerate() {
        let mut weighted = ib.scale(ineq.alpha[x]);
        for (y, b) in bob.iter().enumerate() {
            weighted = weighted.add(&b.scale(ineq.gamma[x][y]));
        }
        op = op.add(&a.kron(&weighted));
    }
    for (y, b) in bob.iter().enumerate() {
        op = op.add(&ia.kron(&b.scale(ineq.beta[y])));
    }
    Ok(op)
}

/// `⟨A_x B_y⟩ = tr(ρ (M_{0|x} − M_{1|x}) ⊗ B_y)` and the marginals.
pub fn correlators_from_quantum(state: &HermitianOp, alice: &MeasurementAssembly, bob: &[HermitianOp]) -> Result<Correlators> {
    let a_obs = alice_observables(alice)?;
    let da = alice.dim();
    let db = bob.first().ok_or_else(|| Error::DimensionMismatch("no Bob observables".into()))?.dim();
    if bob.iter().any(|b| b.dim() != db) || state.dim() != da * db {
        return Err(Error::DimensionMismatch(format!("state of dimension {} for a {da}x{db} system", state.dim())));
    }
    for b in bob {
        let ev = b.eigenvalues()?;
        if ev[0] > 1.0 + TOL.assertion || ev[db - 1] < -1.0 - TOL.assertion {
            return Err(Error::OutOfRange("Bob observable has spectrum outside [-1, 1]".into()));
        }
    }
    let (ia, ib) = (HermitianOp::identity(da), HermitianOp::identity(db));
    let ab = a_obs.iter().map(|a| bob.iter().map(|b| state.inner(&a.kron(b))).collect()).collect();
    let a = a_obs.iter().map(|a| state.inner(&a.kron(&ib))).collect();
    let b = bob.iter().map(|b| state.inner(&ia.kron(b))).collect();
    Correlators::new(ab, a, b)
}

fn random_bloch_observable(rng: &mut ChaCha8Rng) -> HermitianOp {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    let n = [r * phi.cos(), r * phi.sin(), z];
    HermitianOp::bloch(0.0, n).scale(2.0)
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn expectation(op: &HermitianOp, psi: &[Complex64]) -> Result<f64> {
    let w = op.matrix().mul_vec(psi)?;
    Ok(psi.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum())
}

/// `tr_A((X ⊗ 𝟙)|ψ⟩⟨ψ|) = Cᵀ Xᵀ C̄` for the coefficient matrix `C` of `ψ`.
fn bob_operator(x: &HermitianOp, c: &ComplexMatrix) -> Result<HermitianOp> {
    let m = c.transpose().checked_mul(&x.matrix().transpose())?.checked_mul(&c.conj())?;
    HermitianOp::new(m)
}

struct Run {
    value: f64,
    psi: Vec<Complex64>,
    bob: Vec<HermitianOp>,
    history: Vec<f64>,
}

fn single_run(ineq: &BellInequality, a_obs: &[HermitianOp], config: &SeesawConfig, rng: &mut ChaCha8Rng) -> Result<Run> {
    let da = a_obs[0].dim();
    let mut bob: Vec<HermitianOp> = (0..ineq.n_b).map(|_| random_bloch_observable(rng)).collect();
    let mut psi = random_state(da * DIM_B, rng);
    let mut value = expectation(&bell_operator(ineq, a_obs, &bob)?, &psi)?;
    let mut history = vec![value];
    let id_a = HermitianOp::identity(da);
    for _ in 0..config.max_iter {
        let e = bell_operator(ineq, a_obs, &bob)?.eig()?;
        psi = e.vectors.column(0);
        let c = ComplexMatrix::new(da, DIM_B, psi.clone())?;
        let mut next = 0.0;
        for (y, b) in bob.iter_mut().enumerate() {
            let mut weighted = id_a.scale(ineq.beta[y]);
            for (x, a) in a_obs.iter().enumerate() {
                weighted = weighted.add(&a.scale(ineq.gamma[x][y]));
            }
            let o = bob_operator(&weighted, &c)?;
            *b = o.spectral_map(|v| if v >= 0.0 { 1.0 } else { -1.0 })?;
            next += b.inner(&o);
        }
        let rho_a: Vec<f64> = a_obs.iter().map(|a| expectation(&a.kron(&HermitianOp::identity(DIM_B)), &psi)).collect::<Result<_>>()?;
        next += ineq.alpha.iter().zip(&rho_a).map(|(al, v)| al * v).sum::<f64>();
        let improvement = next - value;
        value = next;
        history.push(value);
        if improvement < config.tol {
            break;
        }
    }
    Ok(Run { value, psi, bob, history })
}

/// Best see-saw value over `config.restarts` random starts, with Alice's
/// measurements fixed and a qubit on Bob's side. Restart `r` draws from the
/// ChaCha8 stream `r` of `config.seed`.
pub fn seesaw_optimize(ineq: &BellInequality, alice_fixed: &MeasurementAssembly, config: &SeesawConfig) -> Result<SeesawResult> {
    check_shapes(ineq, alice_fixed, ineq.n_b)?;
    if config.restarts == 0 {
        return Err(Error::OutOfRange("at least one restart is required".into()));
    }
    let a_obs = alice_observables(alice_fixed)?;
    let mut best: Option<Run> = None;
    for r in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(r as u64);
        let run = single_run(ineq, &a_obs, config, &mut rng)?;
        if best.as_ref().map_or(true, |b| run.value > b.value) {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    let state = PureState::normalized(alice_fixed.dim(), DIM_B, run.psi)?;
    let corr = correlators_from_quantum(&state.density(), alice_fixed, &run.bob)?;
    let value = ineq.evaluate(&corr)?;
    if (value - run.value).abs() > TOL.assertion {
        return Err(Error::CertificateRejected(format!(
            "see-saw value {} does not match its strategy ({value})",
            run.value
        )));
    }
    Ok(SeesawResult {
        value,
        state,
        bob_observables: run.bob,
        iterations: run.history.len() - 1,
        restarts_used: config.restarts,
        history: run.history,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BellThreshold {
    /// Smallest `η` at which a violation was found.
    pub eta: f64,
    /// Largest `η` probed without a violation.
    pub no_violation_at: f64,
    pub evaluations: usize,
    /// Index into `relabelings()` of the member that produced the threshold.
    pub representative: Option<usize>,
}

/// Bisection to width `1e-4` on "see-saw finds a value above the local bound
/// by more than `1e-7`". The result is an upper bound on the true threshold.
pub fn bell_threshold(
    ineq: &BellInequality,
    family: &dyn MeasurementFamily,
    bracket: (f64, f64),
    config: &SeesawConfig,
) -> Result<BellThreshold> {
    let t = bisect(bracket.0, bracket.1, 1e-4, |eta| {
        let r = seesaw_optimize(ineq, &family.at(eta)?, config)?;
        Ok(r.value > ineq.local_bound + 1e-7)
    })?;
    Ok(BellThreshold { eta: t.holds, no_violation_at: t.fails, evaluations: t.evaluations, representative: None })
}

/// Smallest threshold over the inequality's relabelings. Members without a
/// transition inside the bracket are skipped.
pub fn bell_threshold_over_relabelings(
    ineq: &BellInequality,
    family: &dyn MeasurementFamily,
    bracket: (f64, f64),
    config: &SeesawConfig,
) -> Result<BellThreshold> {
    let mut best: Option<BellThreshold> = None;
    for (k, member) in ineq.relabelings().iter().enumerate() {
        match bell_threshold(member, family, bracket, config) {
            Ok(mut t) => {
                t.representative = Some(k);
                if best.as_ref().map_or(true, |b| t.eta < b.eta) {
                    best = Some(t);
                }
            }
            Err(Error::Bracket { .. }) | Err(Error::DimensionMismatch(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or(Error::Bracket { lo: bracket.0, hi: bracket.1 })
}
