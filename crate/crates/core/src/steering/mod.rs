//! Assemblages, local-hidden-state models and the correspondence between
//! hidden-state models and mother observables for pure entangled states.

mod schmidt;

pub use schmidt::{schmidt_form, SchmidtForm};

use serde::{Deserialize, Serialize};

use crate::decomposition::{decompose, outcome_vector, witness_value_and_bound};
use crate::error::{Error, Result};
use crate::linalg::{HermitianOp, PureState};
use crate::povm::{mother_marginal, MeasurementAssembly, MeasurementFamily, MotherObservable};
use crate::sdp::SdpOptions;
use crate::threshold::bisect;
use crate::tolerance::TOL;

#[derive(Serialize, Deserialize)]
struct RawAssemblage {
    dim_b: usize,
    sigma: Vec<Vec<HermitianOp>>,
}

/// Unnormalized conditional states `σ_{a|x}` on Bob's side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAssemblage", into = "RawAssemblage")]
pub struct Assemblage {
    dim_b: usize,
    sigma: Vec<Vec<HermitianOp>>,
}

impl TryFrom<RawAssemblage> for Assemblage {
    type Error = Error;
    fn try_from(raw: RawAssemblage) -> Result<Self> {
        let a = Self::new(raw.sigma)?;
        if a.dim_b != raw.dim_b {
            return Err(Error::DimensionMismatch(format!("declared dim_b {} but elements act on {}", raw.dim_b, a.dim_b)));
        }
        Ok(a)
    }
}

impl From<Assemblage> for RawAssemblage {
    fn from(a: Assemblage) -> Self {
        RawAssemblage { dim_b: a.dim_b, sigma: a.sigma }
    }
}

impl Assemblage {
    /// Checks PSD elements, equal reduced states across settings and unit trace,
    /// all within `1e-8`.
    pub fn new(sigma: Vec<Vec<HermitianOp>>) -> Result<Self> {
        let dim_b = sigma
            .first()
            .and_then(|s| s.first())
            .ok_or_else(|| Error::InvalidAssemblage("no elements".into()))?
            .dim();
        let mut reduced: Option<HermitianOp> = None;
        for (x, per_x) in sigma.iter().enumerate() {
            if per_x.is_empty() {
                return Err(Error::InvalidAssemblage(format!("setting {x} has no outcomes")));
            }
            for s in per_x {
                if s.dim() != dim_b {
                    return Err(Error::DimensionMismatch("assemblage elements of different dimensions".into()));
                }
                let neg = s.psd_distance()?;
                if neg > TOL.assertion {
                    return Err(Error::InvalidAssemblage(format!("element has negative eigenvalue {:.3e}", -neg)));
                }
            }
            let sum = HermitianOp::linear_combination(per_x.iter().map(|s| (1.0, s))).expect("non-empty");
            match &reduced {
                None => reduced = Some(sum),
                Some(r) => {
                    let dev = r.max_abs_diff(&sum);
                    if dev > TOL.assertion {
                        return Err(Error::InvalidAssemblage(format!("signalling: reduced states differ by {dev:.3e}")));
                    }
                }
            }
        }
        let tr = reduced.expect("non-empty").trace();
        if (tr - 1.0).abs() > TOL.assertion {
            return Err(Error::InvalidAssemblage(format!("total trace {tr} is not 1")));
        }
        Ok(Self { dim_b, sigma })
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn sigma(&self) -> &[Vec<HermitianOp>] {
        &self.sigma
    }

    pub fn element(&self, x: usize, a: usize) -> &HermitianOp {
        &self.sigma[x][a]
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.sigma.iter().map(Vec::len).collect()
    }

    /// `ρ_B = Σ_a σ_{a|x}` (the same for every `x`).
    pub fn reduced_state(&self) -> HermitianOp {
        HermitianOp::linear_combination(self.sigma[0].iter().map(|s| (1.0, s))).expect("non-empty")
    }

    /// Largest difference between the reduced states of different settings.
    pub fn signalling(&self) -> f64 {
        let r = self.reduced_state();
        self.sigma
            .iter()
            .map(|per_x| HermitianOp::linear_combination(per_x.iter().map(|s| (1.0, s))).expect("non-empty").max_abs_diff(&r))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &[Vec<HermitianOp>]) -> f64 {
        self.sigma
            .iter()
            .zip(other)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(s, t)| s.max_abs_diff(t)))
            .fold(0.0, f64::max)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `σ_{a|x} = Σ_λ π(λ) p(a|x,λ) σ_λ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LhsModel {
    pub weights: Vec<f64>,
    /// `responses[λ][x][a] = p(a|x,λ)`.
    pub responses: Vec<Vec<Vec<f64>>>,
    pub states: Vec<HermitianOp>,
}

impl LhsModel {
    pub fn new(weights: Vec<f64>, responses: Vec<Vec<Vec<f64>>>, states: Vec<HermitianOp>) -> Result<Self> {
        if weights.is_empty() || weights.len() != responses.len() || weights.len() != states.len() {
            return Err(Error::InvalidModel("weights, responses and states differ in length".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > TOL.construction {
            return Err(Error::InvalidModel(format!("weights are not a probability vector (sum {total})")));
        }
        let shape: Vec<usize> = responses[0].iter().map(Vec::len).collect();
        for r in &responses {
            if r.iter().map(Vec::len).collect::<Vec<_>>() != shape {
                return Err(Error::InvalidModel("response shapes differ between hidden variables".into()));
            }
            for p in r {
                let s: f64 = p.iter().sum();
                if p.iter().any(|&v| v < -TOL.construction) || (s - 1.0).abs() > TOL.construction {
                    return Err(Error::InvalidModel("response is not a probability distribution".into()));
                }
            }
        }
        let dim = states[0].dim();
        for s in &states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch("hidden states of different dimensions".into()));
            }
            if (s.trace() - 1.0).abs() > TOL.certificate || s.psd_distance()? > TOL.certificate {
                return Err(Error::InvalidModel("hidden state is not a density operator".into()));
            }
        }
        Ok(Self { weights, responses, states })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.responses[0].iter().map(Vec::len).collect()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `Σ_λ π(λ) p(a|x,λ) σ_λ` indexed `[x][a]`.
    pub fn reconstruct(&self) -> Vec<Vec<HermitianOp>> {
        self.outcome_counts()
            .iter()
            .enumerate()
            .map(|(x, &n)| {
                (0..n)
                    .map(|a| {
                        self.states.iter().enumerate().fold(HermitianOp::zeros(self.dim()), |acc, (l, s)| {
                            acc.add(&s.scale(self.weights[l] * self.responses[l][x][a]))
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// `σ_⃗a = Σ_λ π(λ) σ_λ Π_x p(a_x|x,λ)`, in mixed-radix order.
    pub fn joint_states(&self) -> Vec<HermitianOp> {
        let shape = self.outcome_counts();
        let count: usize = shape.iter().product();
        (0..count)
            .map(|k| {
                let v = outcome_vector(k, &shape);
                self.states.iter().enumerate().fold(HermitianOp::zeros(self.dim()), |acc, (l, s)| {
                    let p: f64 = v.iter().enumerate().map(|(x, &a)| self.responses[l][x][a]).product();
                    acc.add(&s.scale(self.weights[l] * p))
                })
            })
            .collect()
    }
}

/// Steering inequality `Σ tr(F_{a|x} σ_{a|x}) ≤ lhs_bound` valid for every
/// unsteerable assemblage with unit total trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteeringWitness {
    pub operators: Vec<Vec<HermitianOp>>,
    pub lhs_bound: f64,
    pub value: f64,
}

impl SteeringWitness {
    pub fn evaluate(&self, assemblage: &Assemblage) -> Result<f64> {
        Ok(witness_value_and_bound(&self.operators, assemblage.sigma(), 1.0)?.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteeringVerdict {
    pub unsteerable: bool,
    pub margin: f64,
    pub model: Option<LhsModel>,
    pub witness: Option<SteeringWitness>,
}

/// `σ_{a|x} = tr_A(ρ_AB (M_{a|x} ⊗ 𝟙))`.
pub fn assemblage_from_state(state: &HermitianOp, assembly: &MeasurementAssembly) -> Result<Assemblage> {
    let da = assembly.dim();
    if state.dim() % da != 0 {
        return Err(Error::DimensionMismatch(format!("state of dimension {} is not {da} x d_B", state.dim())));
    }
    check_state(state)?;
    let db = state.dim() / da;
    let id = HermitianOp::identity(db);
    let sigma = assembly
        .povms()
        .iter()
        .map(|p| p.effects().iter().map(|m| conditional_state(state, &m.kron(&id), (da, db))).collect())
        .collect::<Result<_>>()?;
    Assemblage::new(sigma)
}

fn check_state(state: &HermitianOp) -> Result<()> {
    if (state.trace() - 1.0).abs() > TOL.assertion || state.psd_distance()? > TOL.assertion {
        return Err(Error::InvalidState("bipartite state must be PSD with unit trace".into()));
    }
    Ok(())
}

/// `tr_A(ρ (M ⊗ 𝟙))`, symmetrized.
fn conditional_state(state: &HermitianOp, effect: &HermitianOp, dims: (usize, usize)) -> Result<HermitianOp> {
    let prod = state.matrix().checked_mul(effect.matrix())?;
    let (da, db) = dims;
    let out = crate::linalg::ComplexMatrix::from_fn(db, db, |i, j| (0..da).map(|k| prod.get(k * db + i, k * db + j)).sum());
    HermitianOp::new(out)
}

/// Hidden variable `λ = ⃗a` with `π(⃗a) = tr(M_⃗a ρ_A)` and
/// `σ_⃗a = tr_A((M_⃗a ⊗ 𝟙) ρ_AB) / π(⃗a)`; zero-weight outcomes are dropped.
pub fn lhs_from_mother(state: &HermitianOp, mother: &MotherObservable) -> Result<LhsModel> {
    let da = mother.dim();
    if state.dim() % da != 0 {
        return Err(Error::DimensionMismatch(format!("state of dimension {} is not {da} x d_B", state.dim())));
    }
    check_state(state)?;
    let db = state.dim() / da;
    let id = HermitianOp::identity(db);
    let shape = mother.outcome_shape();
    let mut conditionals = Vec::new();
    for (v, m) in mother.iter() {
        let s = conditional_state(state, &m.kron(&id), (da, db))?;
        conditionals.push((v, s.trace(), s));
    }
    let (weights, responses, states) = deterministic_model(conditionals, shape);
    LhsModel::new(normalize(weights), responses, states)
}

fn normalize(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

type ModelParts = (Vec<f64>, Vec<Vec<Vec<f64>>>, Vec<HermitianOp>);

fn deterministic_model(conditionals: Vec<(Vec<usize>, f64, HermitianOp)>, shape: &[usize]) -> ModelParts {
    let mut weights = Vec::new();
    let mut responses = Vec::new();
    let mut states = Vec::new();
    for (v, w, s) in conditionals {
        if w < TOL.zero_weight {
            continue;
        }
        weights.push(w);
        responses.push(
            v.iter()
                .zip(shape)
                .map(|(&a, &n)| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
                .collect(),
        );
        states.push(s.scale(1.0 / w));
    }
    (weights, responses, states)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LhsConfig {
    /// Largest admissible number of deterministic strategies `Π_x n_x`.
    pub strategy_cap: usize,
    pub sdp: SdpOptions,
}

impl Default for LhsConfig {
    fn default() -> Self {
        Self { strategy_cap: 1024, sdp: SdpOptions::default() }
    }
}

pub fn lhs_check(assemblage: &Assemblage) -> Result<SteeringVerdict> {
    lhs_check_with(assemblage, &LhsConfig::default())
}

/// Decides whether the assemblage has a hidden-state model over deterministic
/// strategies `λ(x)`. Models and steering inequalities are re-verified.
pub fn lhs_check_with(assemblage: &Assemblage, config: &LhsConfig) -> Result<SteeringVerdict> {
    let shape = assemblage.outcome_counts();
    let count: usize = shape.iter().product();
    if count > config.strategy_cap {
        return Err(Error::CapExceeded { what: "deterministic strategies", value: count, cap: config.strategy_cap });
    }
    let rho_b = assemblage.reduced_state();
    let result = decompose(assemblage.sigma(), &rho_b, &config.sdp)?;
    if result.feasible {
        let mut conditionals = Vec::with_capacity(count);
        for (k, s) in result.joint.into_iter().enumerate() {
            let s = s.psd_part()?;
            conditionals.push((outcome_vector(k, &shape), s.trace(), s));
        }
        let (weights, responses, states) = deterministic_model(conditionals, &shape);
        let model = LhsModel::new(normalize(weights), responses, states)
            .map_err(|e| Error::CertificateRejected(format!("hidden-state model: {e}")))?;
        let deviation = assemblage.max_abs_diff(&model.reconstruct());
        if deviation > TOL.certificate {
            return Err(Error::CertificateRejected(format!("hidden-state model deviates by {deviation:.3e}")));
        }
        return Ok(SteeringVerdict { unsteerable: true, margin: result.margin, model: Some(model), witness: None });
    }
    let operators: Vec<Vec<HermitianOp>> =
        result.multipliers.iter().map(|ys| ys.iter().map(|y| y.scale(-1.0)).collect()).collect();
    let (value, lhs_bound) = witness_value_and_bound(&operators, assemblage.sigma(), 1.0)?;
    if value <= lhs_bound {
        return Err(Error::CertificateRejected(format!(
            "steering inequality value {value:.3e} does not exceed bound {lhs_bound:.3e}"
        )));
    }
    Ok(SteeringVerdict {
        unsteerable: false,
        margin: result.margin,
        model: None,
        witness: Some(SteeringWitness { operators, lhs_bound, value }),
    })
}

/// Mother observable `M_⃗a = U_A (D⁻¹ U_B† σ_⃗a U_B D⁻¹)ᵀ U_A†` recovered from a
/// hidden-state model of the assemblage of `(U_A ⊗ U_B)(D ⊗ 𝟙)|Φ⟩`.
pub fn mother_from_lhs(model: &LhsModel, schmidt: &SchmidtForm) -> Result<MotherObservable> {
    if model.dim() != schmidt.d {
        return Err(Error::DimensionMismatch(format!("model on dimension {} with Schmidt number {}", model.dim(), schmidt.d)));
    }
    let effects = model.joint_states().iter().map(|s| schmidt.effect_from_conditional(s)).collect::<Result<_>>()?;
    MotherObservable::new(model.outcome_counts(), effects)
}

/// Largest `η` in the bracket at which the family's assemblage on `state` is
/// unsteerable, to absolute width `1e-5`.
pub fn steering_threshold(family: &dyn MeasurementFamily, state: &PureState, bracket: (f64, f64)) -> Result<f64> {
    steering_threshold_with(family, state, bracket, &LhsConfig::default())
}

pub fn steering_threshold_with(
    family: &dyn MeasurementFamily,
    state: &PureState,
    bracket: (f64, f64),
    config: &LhsConfig,
) -> Result<f64> {
    let rho = state.density();
    let t = bisect(bracket.0, bracket.1, 1e-5, |eta| {
        let a = assemblage_from_state(&rho, &family.at(eta)?)?;
        Ok(lhs_check_with(&a, config)?.unsteerable)
    })?;
    Ok(t.holds)
}

/// Marginal POVMs of the mother recovered from a model: convenience for the
/// roundtrip `model → mother → marginals`.
pub fn marginals_from_lhs(model: &LhsModel, schmidt: &SchmidtForm) -> Result<MeasurementAssembly> {
    let mother = mother_from_lhs(model, schmidt)?;
    MeasurementAssembly::new((0..mother.outcome_shape().len()).map(|x| mother_marginal(&mother, x)).collect::<Result<_>>()?)
}
