//! POVMs, measurement assemblies, mother observables and joint measurability.

mod family;
mod jm;

pub use family::{biased_pauli_family, noisy_pauli_family, Family, MeasurementFamily, Restricted};
pub use jm::{
    jm_check, jm_check_with, jm_threshold, jm_threshold_with, mother_marginal, subset_jm_profile, verify_mother, IncompatibilityWitness,
    JmConfig, JmVerdict, SubsetEntry, SubsetProfile,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::{outcome_index, outcome_vector};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOp};
use crate::tolerance::TOL;

/// Largest deviation of `Σ effects` from `𝟙` and of each effect from PSD.
fn povm_defects(dim: usize, effects: &[HermitianOp]) -> Result<(f64, f64)> {
    let mut psd: f64 = 0.0;
    for e in effects {
        if e.dim() != dim {
            return Err(Error::DimensionMismatch(format!("effect of dimension {} in a {dim}-dimensional POVM", e.dim())));
        }
        psd = psd.max(e.psd_distance()?);
    }
    let sum = HermitianOp::linear_combination(effects.iter().map(|e| (1.0, e))).unwrap_or_else(|| HermitianOp::zeros(dim));
    Ok((psd, sum.max_abs_diff(&HermitianOp::identity(dim))))
}

/// A measurement `{M_a}`: PSD effects summing to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<HermitianOp>", into = "Vec<HermitianOp>")]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianOp>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOp>) -> Result<Self> {
        let dim = effects.first().ok_or_else(|| Error::InvalidPovm("no effects".into()))?.dim();
        let (psd, sum) = povm_defects(dim, &effects)?;
        if psd > TOL.assertion {
            return Err(Error::InvalidPovm(format!("effect has negative eigenvalue {:.3e}", -psd)));
        }
        if sum > TOL.assertion {
            return Err(Error::InvalidPovm(format!("effects sum to identity only within {sum:.3e}")));
        }
        Ok(Self { dim, effects })
    }

    /// `{E, 𝟙 − E}`.
    pub fn binary(effect: HermitianOp) -> Result<Self> {
        let rest = HermitianOp::identity(effect.dim()).sub(&effect);
        Self::new(vec![effect, rest])
    }

    /// `{(𝟙 + σ)/2, (𝟙 − σ)/2}` for an observable with spectrum in `[-1, 1]`.
    pub fn from_observable(observable: &HermitianOp) -> Result<Self> {
        let id = HermitianOp::identity(observable.dim());
        Self::binary(id.add(observable).scale(0.5))
    }

    /// Random POVM: random PSD seeds `G_a` whitened by `S^{-1/2}` with `S = Σ G_a`.
    pub fn random(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Result<Self> {
        let seeds: Vec<HermitianOp> = (0..outcomes).map(|_| random_psd(dim, rng)).collect();
        Self::new(whiten(dim, seeds)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianOp] {
        &self.effects
    }

    pub fn effect(&self, a: usize) -> &HermitianOp {
        &self.effects[a]
    }

    /// `M_0 − M_1` for a binary POVM.
    pub fn observable(&self) -> Result<HermitianOp> {
        if self.outcomes() != 2 {
            return Err(Error::InvalidPovm(format!("{} outcomes, binary POVM required", self.outcomes())));
        }
        Ok(self.effects[0].sub(&self.effects[1]))
    }
}

impl TryFrom<Vec<HermitianOp>> for Povm {
    type Error = Error;
    fn try_from(effects: Vec<HermitianOp>) -> Result<Self> {
        Self::new(effects)
    }
}

impl From<Povm> for Vec<HermitianOp> {
    fn from(p: Povm) -> Self {
        p.effects
    }
}

fn random_psd(dim: usize, rng: &mut impl Rng) -> HermitianOp {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    HermitianOp::new(&g * &g.adjoint()).expect("G G† is Hermitian")
}

fn whiten(dim: usize, seeds: Vec<HermitianOp>) -> Result<Vec<HermitianOp>> {
    let sum = HermitianOp::linear_combination(seeds.iter().map(|g| (1.0, g))).unwrap_or_else(|| HermitianOp::zeros(dim));
    let inv_sqrt = sum.spectral_map(|x| if x > 1e-12 { 1.0 / x.sqrt() } else { 0.0 })?;
    seeds.iter().map(|g| g.sandwich(&inv_sqrt)).collect()
}

#[derive(Serialize, Deserialize)]
struct RawAssembly {
    dim: usize,
    povms: Vec<Povm>,
}

/// The POVMs `{M_{a|x}}` of one party, all on the same space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAssembly", into = "RawAssembly")]
pub struct MeasurementAssembly {
    dim: usize,
    povms: Vec<Povm>,
}

impl TryFrom<RawAssembly> for MeasurementAssembly {
    type Error = Error;
    fn try_from(raw: RawAssembly) -> Result<Self> {
        let a = Self::new(raw.povms)?;
        if a.dim != raw.dim {
            return Err(Error::DimensionMismatch(format!("declared dim {} but POVMs act on {}", raw.dim, a.dim)));
        }
        Ok(a)
    }
}

impl From<MeasurementAssembly> for RawAssembly {
    fn from(a: MeasurementAssembly) -> Self {
        RawAssembly { dim: a.dim, povms: a.povms }
    }
}

impl MeasurementAssembly {
    pub fn new(povms: Vec<Povm>) -> Result<Self> {
        let dim = povms.first().ok_or_else(|| Error::InvalidPovm("empty measurement assembly".into()))?.dim();
        if povms.iter().any(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch("POVMs act on different dimensions".into()));
        }
        Ok(Self { dim, povms })
    }

    /// Binary measurements `{E_x, 𝟙 − E_x}`.
    pub fn binary(effects: Vec<HermitianOp>) -> Result<Self> {
        Self::new(effects.into_iter().map(Povm::binary).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.povms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.povms.is_empty()
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    pub fn povm(&self, x: usize) -> &Povm {
        &self.povms[x]
    }

    pub fn outcome_shape(&self) -> Vec<usize> {
        self.povms.iter().map(Povm::outcomes).collect()
    }

    pub fn is_binary(&self) -> bool {
        self.povms.iter().all(|p| p.outcomes() == 2)
    }

    /// The measurements with the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let povms = indices
            .iter()
            .map(|&x| {
                self.povms
                    .get(x)
                    .cloned()
                    .ok_or_else(|| Error::OutOfRange(format!("measurement index {x} of {}", self.len())))
            })
            .collect::<Result<_>>()?;
        Self::new(povms)
    }

    /// `M_{a|x}` as nested vectors indexed `[x][a]`.
    pub fn effects(&self) -> Vec<Vec<HermitianOp>> {
        self.povms.iter().map(|p| p.effects.clone()).collect()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct RawMother {
    dim: usize,
    outcome_shape: Vec<usize>,
    effects: Vec<HermitianOp>,
}

/// A single measurement with outcome vectors `⃗a = (a_1, …, a_m)`, stored in
/// mixed-radix little-endian order (`a_1` varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMother", into = "RawMother")]
pub struct MotherObservable {
    dim: usize,
    outcome_shape: Vec<usize>,
    effects: Vec<HermitianOp>,
}

impl TryFrom<RawMother> for MotherObservable {
    type Error = Error;
    fn try_from(raw: RawMother) -> Result<Self> {
        let m = Self::new(raw.outcome_shape, raw.effects)?;
        if m.dim != raw.dim {
            return Err(Error::DimensionMismatch(format!("declared dim {} but effects act on {}", raw.dim, m.dim)));
        }
        Ok(m)
    }
}

impl From<MotherObservable> for RawMother {
    fn from(m: MotherObservable) -> Self {
        RawMother { dim: m.dim, outcome_shape: m.outcome_shape, effects: m.effects }
    }
}

impl MotherObservable {
    /// Effects must be PSD and sum to `𝟙` within `1e-7`, the tolerance at
    /// which solver-produced mothers are certified.
    pub fn new(outcome_shape: Vec<usize>, effects: Vec<HermitianOp>) -> Result<Self> {
        if outcome_shape.is_empty() || outcome_shape.contains(&0) {
            return Err(Error::InvalidMother(format!("bad outcome shape {outcome_shape:?}")));
        }
        let count: usize = outcome_shape.iter().product();
        if effects.len() != count {
            return Err(Error::InvalidMother(format!("{} effects for outcome shape {outcome_shape:?}", effects.len())));
        }
        let dim = effects[0].dim();
        let (psd, sum) = povm_defects(dim, &effects)?;
        if psd > TOL.certificate {
            return Err(Error::InvalidMother(format!("effect has negative eigenvalue {:.3e}", -psd)));
        }
        if sum > TOL.certificate {
            return Err(Error::InvalidMother(format!("effects sum to identity only within {sum:.3e}")));
        }
        Ok(Self { dim, outcome_shape, effects })
    }

    /// `M_⃗a = Π_x M_{a_x|x}` for pairwise commuting POVMs. Non-commuting inputs
    /// give non-Hermitian products and are rejected.
    pub fn product(assembly: &MeasurementAssembly) -> Result<Self> {
        let shape = assembly.outcome_shape();
        let count: usize = shape.iter().product();
        let d = assembly.dim();
        let effects = (0..count)
            .map(|k| {
                let v = outcome_vector(k, &shape);
                let mut acc = ComplexMatrix::identity(d);
                for (x, &a) in v.iter().enumerate() {
                    acc = acc.checked_mul(assembly.povm(x).effect(a).matrix())?;
                }
                HermitianOp::new(acc)
            })
            .collect::<Result<_>>()?;
        Self::new(shape, effects)
    }

    /// `M_⃗a = 𝟙 / Π_x n_x`.
    pub fn uniform(dim: usize, outcome_shape: Vec<usize>) -> Result<Self> {
        let count: usize = outcome_shape.iter().product();
        let e = HermitianOp::identity(dim).scale(1.0 / count as f64);
        Self::new(outcome_shape, vec![e; count])
    }

    pub fn random(dim: usize, outcome_shape: Vec<usize>, rng: &mut impl Rng) -> Result<Self> {
        let count: usize = outcome_shape.iter().product();
        let seeds = (0..count).map(|_| random_psd(dim, rng)).collect();
        Self::new(outcome_shape, whiten(dim, seeds)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcome_shape(&self) -> &[usize] {
        &self.outcome_shape
    }

    pub fn effects(&self) -> &[HermitianOp] {
        &self.effects
    }

    pub fn effect(&self, outcomes: &[usize]) -> &HermitianOp {
        &self.effects[outcome_index(outcomes, &self.outcome_shape)]
    }

    /// `(⃗a, M_⃗a)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &HermitianOp)> + '_ {
        self.effects.iter().enumerate().map(|(k, e)| (outcome_vector(k, &self.outcome_shape), e))
    }

    /// All marginals as a measurement assembly.
    pub fn marginals(&self) -> Result<MeasurementAssembly> {
        MeasurementAssembly::new((0..self.outcome_shape.len()).map(|x| mother_marginal(self, x)).collect::<Result<_>>()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn povm_validation() {
        let half = HermitianOp::identity(2).scale(0.5);
        assert!(Povm::new(vec![half.clone(), half.clone()]).is_ok());
        assert!(matches!(Povm::new(vec![half.clone()]), Err(Error::InvalidPovm(_))));
        assert!(matches!(Povm::binary(HermitianOp::pauli(3)), Err(Error::InvalidPovm(_))));
        assert!(Povm::new(vec![]).is_err());
    }

    #[test]
    fn assembly_json_roundtrip() {
        let a = noisy_pauli_family(0.6).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.starts_with("{\"dim\":2,\"povms\":[[[[{\"re\":"));
        let b = MeasurementAssembly::from_json(&s).unwrap();
        assert!(a.povm(1).effect(0).max_abs_diff(b.povm(1).effect(0)) < 1e-15);
        assert!(MeasurementAssembly::from_json(r#"{"dim":3,"povms":[]}"#).is_err());
    }

    #[test]
    fn random_povms_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for d in 1..=4 {
            let p = Povm::random(d, 3, &mut rng).unwrap();
            assert_eq!(p.outcomes(), 3);
            let m = MotherObservable::random(d, vec![2, 2, 2], &mut rng).unwrap();
            assert_eq!(m.effects().len(), 8);
        }
    }

    #[test]
    fn uniform_mother_marginals_are_half() {
        let m = MotherObservable::uniform(2, vec![2, 2, 2]).unwrap();
        for x in 0..3 {
            let p = mother_marginal(&m, x).unwrap();
            for a in 0..2 {
                assert!(p.effect(a).max_abs_diff(&HermitianOp::identity(2).scale(0.5)) < 1e-15);
            }
        }
    }

    #[test]
    fn product_mother_of_commuting_povms() {
        let e1 = HermitianOp::diagonal(&[0.9, 0.2]);
        let e2 = HermitianOp::diagonal(&[0.3, 0.6]);
        let a = MeasurementAssembly::binary(vec![e1, e2]).unwrap();
        let m = MotherObservable::product(&a).unwrap();
        for x in 0..2 {
            let p = mother_marginal(&m, x).unwrap();
            for k in 0..2 {
                assert!(p.effect(k).max_abs_diff(a.povm(x).effect(k)) < 1e-15);
            }
        }
    }

    #[test]
    fn mother_json_roundtrip() {
        let m = MotherObservable::uniform(2, vec![2, 3]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: MotherObservable = serde_json::from_str(&s).unwrap();
        assert_eq!(back.outcome_shape(), &[2, 3]);
        assert_eq!(back.effect(&[1, 2]), m.effect(&[1, 2]));
    }
}
