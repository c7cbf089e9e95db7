//! Numerical tolerances used across the crate.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity / normalization checks when a value is constructed.
    pub construction: f64,
    /// PSD, completeness and no-signaling checks on derived objects.
    pub assertion: f64,
    /// Independent re-checks of solver certificates (mothers, LHS models).
    pub certificate: f64,
    /// A feasibility margin `t >= -feasibility_margin` counts as feasible.
    pub feasibility_margin: f64,
    /// Eigen-residual target for the Jacobi solver.
    pub eigen: f64,
    /// Probability weights below this are dropped from hidden-variable models.
    pub zero_weight: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        construction: 1e-10,
        assertion: 1e-8,
        certificate: 1e-7,
        feasibility_margin: 1e-7,
        eigen: 1e-9,
        zero_weight: 1e-12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub const TOL: Tolerances = Tolerances::DEFAULT;
