use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOp, PureState};
use crate::tolerance::TOL;

/// `|ψ⟩ = (U_A ⊗ U_B)(D ⊗ 𝟙)|Φ⟩` with `|Φ⟩ = Σ_i |ii⟩` and `D` positive diagonal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchmidtForm {
    pub d: usize,
    /// Schmidt coefficients, descending for decomposed states.
    pub coefficients: Vec<f64>,
    pub d_matrix: HermitianOp,
    pub u_a: ComplexMatrix,
    pub u_b: ComplexMatrix,
}

impl SchmidtForm {
    /// Diagonal form with trivial local unitaries: `Σ_i c_i |ii⟩`.
    pub fn from_diagonal(coefficients: &[f64]) -> Result<Self> {
        let d = coefficients.len();
        if d == 0 {
            return Err(Error::InvalidState("no Schmidt coefficients".into()));
        }
        if let Some(c) = coefficients.iter().find(|&&c| c.is_nan() || c < TOL.construction) {
            return Err(Error::Conditioning(format!("Schmidt coefficient {c:.3e} is not strictly positive")));
        }
        let norm: f64 = coefficients.iter().map(|c| c * c).sum();
        if (norm - 1.0).abs() > TOL.assertion {
            return Err(Error::InvalidState(format!("squared Schmidt coefficients sum to {norm}")));
        }
        Ok(Self {
            d,
            coefficients: coefficients.to_vec(),
            d_matrix: HermitianOp::diagonal(coefficients),
            u_a: ComplexMatrix::identity(d),
            u_b: ComplexMatrix::identity(d),
        })
    }

    pub fn state(&self) -> PureState {
        let d = self.d;
        let c = (&self.u_a * self.d_matrix.matrix()).checked_mul(&self.u_b.transpose()).expect("square");
        PureState::new(d, d, c.data().to_vec()).expect("unitary image of a unit vector")
    }

    /// `U_B D (U_A† M U_A)ᵀ D U_B†`: Bob's conditional state for Alice's effect `M`.
    pub fn conditional_from_effect(&self, effect: &HermitianOp) -> Result<HermitianOp> {
        let local = effect.conjugate_by(&self.u_a.adjoint())?;
        local.transpose().sandwich(&self.d_matrix)?.conjugate_by(&self.u_b)
    }

    /// `U_A (D⁻¹ U_B† σ U_B D⁻¹)ᵀ U_A†`, the inverse of [`Self::conditional_from_effect`].
    pub fn effect_from_conditional(&self, sigma: &HermitianOp) -> Result<HermitianOp> {
        let d_inv = HermitianOp::diagonal(&self.coefficients.iter().map(|c| 1.0 / c).collect::<Vec<_>>());
        let local = sigma.conjugate_by(&self.u_b.adjoint())?.sandwich(&d_inv)?;
        local.transpose().conjugate_by(&self.u_a)
    }
}

/// Schmidt decomposition of a full-rank `d × d` pure state.
pub fn schmidt_form(psi: &PureState) -> Result<SchmidtForm> {
    let d = psi.dim_a();
    if psi.dim_b() != d {
        return Err(Error::DimensionMismatch(format!("{}x{} state, square system required", d, psi.dim_b())));
    }
    let c = psi.coefficient_matrix();
    let gram = HermitianOp::new(c.checked_mul(&c.adjoint())?)?;
    let eig = gram.eig()?;
    let rank = eig.values.iter().filter(|&&l| l.max(0.0).sqrt() > TOL.construction).count();
    if rank < d {
        return Err(Error::RankDeficient { rank, dim: d });
    }
    let coefficients: Vec<f64> = eig.values.iter().map(|l| l.sqrt()).collect();
    let u_a = eig.vectors.clone();
    let c_adj = c.adjoint();
    let mut v_columns = Vec::with_capacity(d);
    for (i, &s) in coefficients.iter().enumerate() {
        let v: Vec<Complex64> = c_adj.mul_vec(&u_a.column(i))?.into_iter().map(|z| z / s).collect();
        v_columns.push(v.into_iter().map(|z| z.conj()).collect());
    }
    let u_b = ComplexMatrix::from_columns(&v_columns)?;
    let form = SchmidtForm { d, d_matrix: HermitianOp::diagonal(&coefficients), coefficients, u_a, u_b };
    let err = form
        .state()
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if err > TOL.assertion {
        return Err(Error::Conditioning(format!("Schmidt reconstruction error {err:.3e}")));
    }
    Ok(form)
}
