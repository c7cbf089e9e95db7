use serde::{Deserialize, Serialize};

use super::{MeasurementAssembly, Povm};
use crate::error::{Error, Result};
use crate::linalg::HermitianOp;

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!("eta = {eta} outside [0, 1]")));
    }
    Ok(())
}

/// `M_{0|x} = (𝟙 + η σ_x)/2` for the three Pauli matrices.
pub fn noisy_pauli_family(eta: f64) -> Result<MeasurementAssembly> {
    check_eta(eta)?;
    let id = HermitianOp::identity(2);
    MeasurementAssembly::binary((1..=3).map(|k| id.add(&HermitianOp::pauli(k).scale(eta)).scale(0.5)).collect())
}

/// `M_{0|x} = (η/2)(𝟙 + σ_x)`.
pub fn biased_pauli_family(eta: f64) -> Result<MeasurementAssembly> {
    check_eta(eta)?;
    let id = HermitianOp::identity(2);
    MeasurementAssembly::binary((1..=3).map(|k| id.add(&HermitianOp::pauli(k)).scale(0.5 * eta)).collect())
}

/// A one-parameter family `η ↦ {M_{a|x}(η)}`.
pub trait MeasurementFamily {
    fn at(&self, eta: f64) -> Result<MeasurementAssembly>;
    fn name(&self) -> String;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    NoisyPauli,
    BiasedPauli,
    /// `η M + (1 − η) tr(M) 𝟙 / d` applied to every effect of a base assembly.
    Depolarized(MeasurementAssembly),
}

impl MeasurementFamily for Family {
    fn at(&self, eta: f64) -> Result<MeasurementAssembly> {
        match self {
            Family::NoisyPauli => noisy_pauli_family(eta),
            Family::BiasedPauli => biased_pauli_family(eta),
            Family::Depolarized(base) => {
                check_eta(eta)?;
                let d = base.dim();
                let id = HermitianOp::identity(d);
                let povms = base
                    .povms()
                    .iter()
                    .map(|p| {
                        Povm::new(
                            p.effects()
                                .iter()
                                .map(|e| e.scale(eta).add(&id.scale((1.0 - eta) * e.trace() / d as f64)))
                                .collect(),
                        )
                    })
                    .collect::<Result<_>>()?;
                MeasurementAssembly::new(povms)
            }
        }
    }

    fn name(&self) -> String {
        match self {
            Family::NoisyPauli => "noisy-pauli".into(),
            Family::BiasedPauli => "biased-pauli".into(),
            Family::Depolarized(_) => "depolarized".into(),
        }
    }
}

/// A family restricted to a subset of its measurements.
#[derive(Debug, Clone)]
pub struct Restricted<F> {
    pub inner: F,
    pub indices: Vec<usize>,
}

impl<F: MeasurementFamily> MeasurementFamily for Restricted<F> {
    fn at(&self, eta: f64) -> Result<MeasurementAssembly> {
        self.inner.at(eta)?.subset(&self.indices)
    }

    fn name(&self) -> String {
        format!("{}{:?}", self.inner.name(), self.indices)
    }
}

impl<F: MeasurementFamily + ?Sized> MeasurementFamily for &F {
    fn at(&self, eta: f64) -> Result<MeasurementAssembly> {
        (**self).at(eta)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noisy_pauli_examples() {
        let a = noisy_pauli_family(0.0).unwrap();
        for p in a.povms() {
            for e in p.effects() {
                assert!(e.max_abs_diff(&HermitianOp::identity(2).scale(0.5)) < 1e-15);
            }
        }
        let a = noisy_pauli_family(1.0).unwrap();
        let ev = a.povm(2).effect(0).eigenvalues().unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-12 && ev[1].abs() < 1e-12);
        let ev = noisy_pauli_family(0.6).unwrap().povm(0).effect(0).eigenvalues().unwrap();
        assert!((ev[0] - 0.8).abs() < 1e-12 && (ev[1] - 0.2).abs() < 1e-12);
        assert!(matches!(noisy_pauli_family(1.2), Err(Error::OutOfRange(_))));
        assert!(noisy_pauli_family(-0.1).is_err());
    }

    #[test]
    fn biased_pauli_examples() {
        let a = biased_pauli_family(0.0).unwrap();
        assert!(a.povm(0).effect(0).max_abs_diff(&HermitianOp::zeros(2)) < 1e-15);
        assert!(a.povm(0).effect(1).max_abs_diff(&HermitianOp::identity(2)) < 1e-15);
        let b = biased_pauli_family(1.0).unwrap();
        let c = noisy_pauli_family(1.0).unwrap();
        assert!(b.povm(1).effect(0).max_abs_diff(c.povm(1).effect(0)) < 1e-15);
        let ev = biased_pauli_family(0.5).unwrap().povm(0).effect(0).eigenvalues().unwrap();
        assert!((ev[0] - 0.5).abs() < 1e-12 && ev[1].abs() < 1e-12);
    }

    #[test]
    fn depolarized_noisy_pauli_matches() {
        let f = Family::Depolarized(noisy_pauli_family(1.0).unwrap());
        let a = f.at(0.3).unwrap();
        let b = noisy_pauli_family(0.3).unwrap();
        assert!(a.povm(2).effect(1).max_abs_diff(b.povm(2).effect(1)) < 1e-14);
        let r = Restricted { inner: Family::NoisyPauli, indices: vec![0, 2] };
        assert_eq!(r.at(0.5).unwrap().len(), 2);
    }
}
