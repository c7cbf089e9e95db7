use serde::{Deserialize, Serialize};

use super::BellInequality;
use crate::error::{Error, Result};
use crate::linalg::HermitianOp;
use crate::povm::{noisy_pauli_family, MeasurementAssembly};

/// Upper bound on the Grothendieck constant of order 3.
pub const K3: f64 = 1.5163;

/// Structural tolerance for the noisy-Pauli factorization check.
const STRUCTURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificatePath {
    /// `η K₃ ≤ 1` for inequalities without marginal terms.
    FullCorrelation,
    /// `η I_{C²} ≤ 1` and `Σ|β_y| ≤ (1 − η I_{C²}) / (1 − η)`.
    QubitBound,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoViolationCertificate {
    pub certified: bool,
    /// Margin of the binding condition; non-negative exactly when certified.
    pub slack: f64,
    pub path: CertificatePath,
    pub eta: f64,
}

/// Certificate for the first `n_a` noisy Pauli measurements at `η`.
pub fn no_violation_certificate(ineq: &BellInequality, eta: f64, qubit_value_bound: Option<f64>) -> Result<NoViolationCertificate> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!("eta = {eta} outside [0, 1)")));
    }
    if ineq.n_a > 3 {
        return Err(Error::NotFactorizable(format!("{} Alice settings, the noisy Pauli family has 3", ineq.n_a)));
    }
    let alice = noisy_pauli_family(eta)?.subset(&(0..ineq.n_a).collect::<Vec<_>>())?;
    no_violation_certificate_for(ineq, &alice, qubit_value_bound)
}

/// Certificate for an arbitrary assembly, which must consist of binary qubit
/// POVMs with observables `η n_x·σ`, `|n_x| = 1`, for one common `η ∈ [0, 1)`.
///
/// With `Ĩ` the same inequality evaluated on the projective measurements
/// `n_x·σ`, the value splits as `I = η Ĩ + (1 − η) Σ_y β_y ⟨B_y⟩`.
pub fn no_violation_certificate_for(
    ineq: &BellInequality,
    alice: &MeasurementAssembly,
    qubit_value_bound: Option<f64>,
) -> Result<NoViolationCertificate> {
    let eta = noise_parameter(alice)?;
    if alice.len() != ineq.n_a {
        return Err(Error::DimensionMismatch(format!("{} measurements for {} Alice settings", alice.len(), ineq.n_a)));
    }
    if !(eta < 1.0) {
        return Err(Error::OutOfRange(format!("eta = {eta} outside [0, 1)")));
    }
    if ineq.is_full_correlation() {
        let slack = ineq.local_bound - eta * K3 * ineq.local_bound;
        return Ok(NoViolationCertificate { certified: slack >= 0.0, slack, path: CertificatePath::FullCorrelation, eta });
    }
    let bound = qubit_value_bound.ok_or(Error::MissingQubitBound)?;
    let lb = ineq.local_bound;
    let head = lb - eta * bound;
    let slack = if head < 0.0 {
        head
    } else {
        let marginal: f64 = ineq.beta.iter().map(|b| b.abs()).sum();
        head / (1.0 - eta) - marginal
    };
    Ok(NoViolationCertificate { certified: slack >= 0.0, slack, path: CertificatePath::QubitBound, eta })
}

/// The common `η` of `M_{0|x} − M_{1|x} = η n_x·σ`.
fn noise_parameter(alice: &MeasurementAssembly) -> Result<f64> {
    if alice.dim() != 2 || !alice.is_binary() {
        return Err(Error::NotFactorizable("Alice must hold binary qubit measurements".into()));
    }
    let mut eta: Option<f64> = None;
    for (x, p) in alice.povms().iter().enumerate() {
        let obs = p.observable()?;
        if obs.trace().abs() > STRUCTURE_TOL {
            return Err(Error::NotFactorizable(format!("observable {x} has a trace part")));
        }
        let r = [1, 2, 3].map(|k| 0.5 * obs.inner(&HermitianOp::pauli(k)));
        let len = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        match eta {
            None => eta = Some(len),
            Some(e) if (e - len).abs() > STRUCTURE_TOL => {
                return Err(Error::NotFactorizable(format!("observables have different lengths {e} and {len}")))
            }
            Some(_) => {}
        }
    }
    Ok(eta.expect("non-empty assembly"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::biased_pauli_family;

    #[test]
    fn full_correlation_window() {
        for name in ["chsh", "chained3"] {
            let i = BellInequality::builtin(name).unwrap();
            assert!(no_violation_certificate(&i, 0.65, None).unwrap().certified);
            assert!(!no_violation_certificate(&i, 0.66, None).unwrap().certified);
        }
    }

    #[test]
    fn qubit_bound_path() {
        let i = BellInequality::new("a", vec![vec![0.0]; 3], vec![1.0, 0.0, 0.0], vec![0.0]).unwrap();
        let c = no_violation_certificate(&i, 0.6, Some(1.5)).unwrap();
        assert!(c.certified && c.path == CertificatePath::QubitBound);
        assert!((c.slack - 0.25).abs() < 1e-12);
        assert!(matches!(no_violation_certificate(&i, 0.6, None), Err(Error::MissingQubitBound)));
        assert!(!no_violation_certificate(&i, 0.7, Some(1.5)).unwrap().certified);
    }

    #[test]
    fn structural_check() {
        let i = BellInequality::builtin("i3322").unwrap();
        assert!(matches!(no_violation_certificate_for(&i, &biased_pauli_family(0.5).unwrap(), Some(1.25)), Err(Error::NotFactorizable(_))));
        assert!(no_violation_certificate(&i, 1.0, Some(1.25)).is_err());
    }
}
