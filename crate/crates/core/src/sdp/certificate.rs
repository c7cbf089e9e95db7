//! Solver-independent checks of SDP answers, in complex arithmetic on the
//! original problem data.

use serde::{Deserialize, Serialize};

use super::{SdpProblem, SdpSolution};
use crate::linalg::HermitianOp;

const PSD_TOL: f64 = 1e-8;
const EQ_TOL: f64 = 1e-8;
const DUAL_TOL: f64 = 1e-8;
const GAP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub passed: bool,
    pub primal_psd_violation: f64,
    pub equality_violation: f64,
    pub dual_psd_violation: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub summary: String,
}

/// `Σ_b tr(F0_b X_b) + e·ν`.
pub(crate) fn dual_value(problem: &SdpProblem, x: &[HermitianOp], nu: &[f64]) -> f64 {
    let blocks: f64 = problem.blocks.iter().zip(x).map(|(b, xb)| b.constant.inner(xb)).sum();
    blocks + problem.equalities.iter().zip(nu).map(|(e, v)| e.rhs * v).sum::<f64>()
}

/// `max_i |c_i·w + Σ_b tr(F_ib X_b) − (Eᵀν)_i|` with `w` the objective weight
/// (1 for optimality, 0 for the homogeneous Farkas system).
fn dual_residual(problem: &SdpProblem, x: &[HermitianOp], nu: &[f64], objective_weight: f64) -> f64 {
    let mut res: Vec<f64> = problem.objective.iter().map(|c| c * objective_weight).collect();
    for (b, xb) in problem.blocks.iter().zip(x) {
        for t in &b.terms {
            res[t.var] += t.coefficient.inner(xb);
        }
    }
    for (r, a) in res.iter_mut().zip(problem.equality_adjoint(nu)) {
        *r -= a;
    }
    res.into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn psd_violation(ops: &[HermitianOp]) -> f64 {
    ops.iter().map(|h| h.psd_distance().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

/// Re-checks an `Optimal` answer: primal blocks PSD and equalities within
/// `1e-8`, dual blocks PSD and stationarity within `1e-8`, gap within `1e-7`.
pub fn verify_optimal(problem: &SdpProblem, sol: &SdpSolution) -> CertificateReport {
    let y = &sol.primal;
    let primal_psd_violation = psd_violation(&problem.evaluate_blocks(y));
    let equality_violation = problem.equality_residuals(y).into_iter().map(f64::abs).fold(0.0, f64::max);
    let dual_psd_violation = psd_violation(&sol.dual_blocks);
    let c_scale = 1.0 + problem.objective.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let dual_residual = dual_residual(problem, &sol.dual_blocks, &sol.equality_multipliers, 1.0);
    let pobj: f64 = problem.objective.iter().zip(y).map(|(c, v)| c * v).sum();
    let dobj = dual_value(problem, &sol.dual_blocks, &sol.equality_multipliers);
    let gap = (pobj - dobj).abs();
    let mut failures = Vec::new();
    if primal_psd_violation > PSD_TOL {
        failures.push(format!("primal PSD violation {primal_psd_violation:.2e}"));
    }
    if equality_violation > EQ_TOL {
        failures.push(format!("equality violation {equality_violation:.2e}"));
    }
    if dual_psd_violation > PSD_TOL {
        failures.push(format!("dual PSD violation {dual_psd_violation:.2e}"));
    }
    if dual_residual > DUAL_TOL * c_scale {
        failures.push(format!("dual residual {dual_residual:.2e}"));
    }
    if gap > GAP_TOL * (1.0 + pobj.abs()) {
        failures.push(format!("duality gap {gap:.2e}"));
    }
    CertificateReport {
        passed: failures.is_empty(),
        primal_psd_violation,
        equality_violation,
        dual_psd_violation,
        dual_residual,
        gap,
        summary: if failures.is_empty() { "ok".into() } else { failures.join("; ") },
    }
}

/// Re-checks a Farkas certificate `(X, ν)`: `X ⪰ 0` with unit total trace,
/// `Σ_b tr(F_ib X_b) = (Eᵀν)_i`, and `Σ_b tr(F0_b X_b) + e·ν < 0`. Any such pair
/// rules out every `y` since `Σ_b tr(F_b(y) X_b)` would be both `≥ 0` and `< 0`.
pub fn verify_infeasible(problem: &SdpProblem, sol: &SdpSolution) -> CertificateReport {
    let total: f64 = sol.dual_blocks.iter().map(HermitianOp::trace).sum();
    let mut failures = Vec::new();
    if total <= 0.0 || !total.is_finite() {
        failures.push("certificate has non-positive trace".to_string());
    }
    let norm = if total > 0.0 { total } else { 1.0 };
    let x: Vec<HermitianOp> = sol.dual_blocks.iter().map(|b| b.scale(1.0 / norm)).collect();
    let nu: Vec<f64> = sol.equality_multipliers.iter().map(|v| v / norm).collect();
    let dual_psd_violation = psd_violation(&x);
    let dual_residual = dual_residual(problem, &x, &nu, 0.0);
    let value = dual_value(problem, &x, &nu);
    if dual_psd_violation > PSD_TOL {
        failures.push(format!("certificate PSD violation {dual_psd_violation:.2e}"));
    }
    if dual_residual > DUAL_TOL {
        failures.push(format!("certificate residual {dual_residual:.2e}"));
    }
    if value >= -DUAL_TOL {
        failures.push(format!("certificate value {value:.3e} is not negative"));
    }
    CertificateReport {
        passed: failures.is_empty(),
        primal_psd_violation: 0.0,
        equality_violation: 0.0,
        dual_psd_violation,
        dual_residual,
        gap: value,
        summary: if failures.is_empty() { "ok".into() } else { failures.join("; ") },
    }
}
