use serde::{Deserialize, Serialize};

use super::{MeasurementAssembly, MeasurementFamily, MotherObservable, Povm};
use crate::decomposition::{decompose, outcome_vector, witness_value_and_bound};
use crate::error::{Error, Result};
use crate::linalg::HermitianOp;
use crate::sdp::SdpOptions;
use crate::threshold::bisect;
use crate::tolerance::TOL;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JmConfig {
    /// Largest admissible number of joint outcomes `Π_x n_x`.
    pub outcome_cap: usize,
    pub sdp: SdpOptions,
}

impl Default for JmConfig {
    fn default() -> Self {
        Self { outcome_cap: 256, sdp: SdpOptions::default() }
    }
}

/// Linear functional `{W_{a|x}}` with `Σ tr(W_{a|x} M_{a|x}) ≤ jm_bound` on every
/// jointly measurable set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IncompatibilityWitness {
    pub operators: Vec<Vec<HermitianOp>>,
    pub jm_bound: f64,
    /// Value on the assembly it was computed for.
    pub value: f64,
    /// `value − jm_bound`.
    pub violation: f64,
}

impl IncompatibilityWitness {
    pub fn evaluate(&self, assembly: &MeasurementAssembly) -> Result<f64> {
        Ok(witness_value_and_bound(&self.operators, &assembly.effects(), assembly.dim() as f64)?.0)
    }

    /// Recomputes value and bound from the operators alone.
    pub fn recheck(&self, assembly: &MeasurementAssembly) -> Result<(f64, f64)> {
        witness_value_and_bound(&self.operators, &assembly.effects(), assembly.dim() as f64)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JmVerdict {
    pub jointly_measurable: bool,
    /// Optimal strict-feasibility margin of the mother-observable SDP.
    pub margin: f64,
    pub mother: Option<MotherObservable>,
    pub witness: Option<IncompatibilityWitness>,
}

pub fn jm_check(assembly: &MeasurementAssembly) -> Result<JmVerdict> {
    jm_check_with(assembly, &JmConfig::default())
}

/// Decides whether the assembly has a mother observable. Mothers and witnesses
/// are re-verified before they are returned.
pub fn jm_check_with(assembly: &MeasurementAssembly, config: &JmConfig) -> Result<JmVerdict> {
    let count: usize = assembly.outcome_shape().iter().product();
    if count > config.outcome_cap {
        return Err(Error::CapExceeded { what: "joint outcomes", value: count, cap: config.outcome_cap });
    }
    let d = assembly.dim();
    let targets = assembly.effects();
    let result = decompose(&targets, &HermitianOp::identity(d), &config.sdp)?;
    if result.feasible {
        let mother = MotherObservable::new(assembly.outcome_shape(), result.joint)
            .map_err(|e| Error::CertificateRejected(format!("mother: {e}")))?;
        let deviation = verify_mother(&mother, assembly)?;
        if deviation > TOL.certificate {
            return Err(Error::CertificateRejected(format!("mother marginals deviate by {deviation:.3e}")));
        }
        return Ok(JmVerdict { jointly_measurable: true, margin: result.margin, mother: Some(mother), witness: None });
    }
    let operators: Vec<Vec<HermitianOp>> =
        result.multipliers.iter().map(|ys| ys.iter().map(|y| y.scale(-1.0)).collect()).collect();
    let (value, jm_bound) = witness_value_and_bound(&operators, &targets, d as f64)?;
    if value <= jm_bound {
        return Err(Error::CertificateRejected(format!("witness value {value:.3e} does not exceed bound {jm_bound:.3e}")));
    }
    Ok(JmVerdict {
        jointly_measurable: false,
        margin: result.margin,
        mother: None,
        witness: Some(IncompatibilityWitness { operators, jm_bound, value, violation: value - jm_bound }),
    })
}

/// `M_{a|x} = Σ_{⃗a: a_x = a} M_⃗a`.
pub fn mother_marginal(mother: &MotherObservable, x: usize) -> Result<Povm> {
    let shape = mother.outcome_shape();
    if x >= shape.len() {
        return Err(Error::OutOfRange(format!("marginal {x} of a mother with {} settings", shape.len())));
    }
    let mut effects = vec![HermitianOp::zeros(mother.dim()); shape[x]];
    for (k, m) in mother.effects().iter().enumerate() {
        let a = outcome_vector(k, shape)[x];
        effects[a] = effects[a].add(m);
    }
    Povm::new(effects)
}

/// Largest entrywise deviation between the mother's marginals and the assembly.
pub fn verify_mother(mother: &MotherObservable, assembly: &MeasurementAssembly) -> Result<f64> {
    if mother.outcome_shape() != assembly.outcome_shape().as_slice() || mother.dim() != assembly.dim() {
        return Err(Error::DimensionMismatch("mother does not match the assembly's outcome shape".into()));
    }
    let mut worst: f64 = 0.0;
    for x in 0..assembly.len() {
        let p = mother_marginal(mother, x)?;
        for (e, t) in p.effects().iter().zip(assembly.povm(x).effects()) {
            worst = worst.max(e.max_abs_diff(t));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetEntry {
    pub subset: Vec<usize>,
    pub jointly_measurable: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetProfile {
    /// Every subset of size at least 2, by size then lexicographically.
    pub entries: Vec<SubsetEntry>,
    pub hollow_triangle: bool,
}

impl SubsetProfile {
    pub fn get(&self, subset: &[usize]) -> Option<bool> {
        self.entries.iter().find(|e| e.subset == subset).map(|e| e.jointly_measurable)
    }
}

/// Joint measurability of every subset of at least two measurements (`m ≤ 4`).
pub fn subset_jm_profile(assembly: &MeasurementAssembly) -> Result<SubsetProfile> {
    let m = assembly.len();
    if m > 4 {
        return Err(Error::CapExceeded { what: "measurements in subset profile", value: m, cap: 4 });
    }
    let mut subsets: Vec<Vec<usize>> =
        (0u32..1 << m).filter(|s| s.count_ones() >= 2).map(|s| (0..m).filter(|&x| s >> x & 1 == 1).collect()).collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut entries = Vec::with_capacity(subsets.len());
    for subset in subsets {
        let v = jm_check(&assembly.subset(&subset)?)?;
        entries.push(SubsetEntry { subset, jointly_measurable: v.jointly_measurable, margin: v.margin });
    }
    let hollow_triangle = m == 3
        && entries.iter().filter(|e| e.subset.len() == 2).all(|e| e.jointly_measurable)
        && entries.iter().any(|e| e.subset.len() == 3 && !e.jointly_measurable);
    Ok(SubsetProfile { entries, hollow_triangle })
}

/// Largest `η` in the bracket at which the family (optionally restricted to
/// `subset`) is jointly measurable, to absolute width `1e-5`.
pub fn jm_threshold(family: &dyn MeasurementFamily, subset: Option<&[usize]>, bracket: (f64, f64)) -> Result<f64> {
    jm_threshold_with(family, subset, bracket, &JmConfig::default())
}

pub fn jm_threshold_with(
    family: &dyn MeasurementFamily,
    subset: Option<&[usize]>,
    bracket: (f64, f64),
    config: &JmConfig,
) -> Result<f64> {
    let t = bisect(bracket.0, bracket.1, 1e-5, |eta| {
        let a = family.at(eta)?;
        let a = match subset {
            Some(s) => a.subset(s)?,
            None => a,
        };
        Ok(jm_check_with(&a, config)?.jointly_measurable)
    })?;
    Ok(t.holds)
}
