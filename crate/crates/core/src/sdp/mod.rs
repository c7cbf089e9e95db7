//! Small dense semidefinite programs in linear-matrix-inequality form:
//!
//! ```text
//! maximize    c·y
//! subject to  F0_b + Σ_i y_i F_ib  ⪰ 0     for every block b
//!             E y = e
//! ```
//!
//! with Hermitian block data. The dual is
//!
//! ```text
//! minimize    Σ_b tr(F0_b X_b) + e·ν
//! subject to  Σ_b tr(F_ib X_b) − (Eᵀν)_i = −c_i,   X_b ⪰ 0.
//! ```
//!
//! Hermitian blocks are realified to real symmetric blocks of twice the size and
//! handed to a primal-dual path-following interior point method (HKM direction,
//! Mehrotra predictor-corrector). Every `Optimal` and `Infeasible` answer is
//! re-checked in complex arithmetic by [`verify_optimal`] / [`verify_infeasible`]
//! before it is returned.

mod certificate;
mod ipm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::HermitianOp;

pub use certificate::{verify_infeasible, verify_optimal, CertificateReport};

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("malformed problem: {0}")]
    InvalidProblem(String),
    #[error("ill-conditioned KKT system at iteration {iteration}: {detail}")]
    IllConditioned { iteration: usize, detail: String },
    #[error("equality constraints are inconsistent (residual {residual:.3e})")]
    InconsistentEqualities { residual: f64 },
    #[error("certificate failed independent check: {0}")]
    CertificateRejected(String),
    #[error("eigensolver failure: {0}")]
    Eigen(String),
}

/// A variable's coefficient matrix inside one block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockTerm {
    pub var: usize,
    pub coefficient: HermitianOp,
}

/// One LMI block `constant + Σ y_var · coefficient ⪰ 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LmiBlock {
    pub name: String,
    pub dim: usize,
    pub constant: HermitianOp,
    pub terms: Vec<BlockTerm>,
}

/// Sparse row `Σ coefficient·y_var = rhs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearEquality {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpProblem {
    pub n_vars: usize,
    /// Maximized.
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub equalities: Vec<LinearEquality>,
}

impl SdpProblem {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, objective: vec![0.0; n_vars], blocks: Vec::new(), equalities: Vec::new() }
    }

    /// Adds a block with the given constant term; returns its index.
    pub fn add_block(&mut self, name: impl Into<String>, constant: HermitianOp) -> usize {
        self.blocks.push(LmiBlock { name: name.into(), dim: constant.dim(), constant, terms: Vec::new() });
        self.blocks.len() - 1
    }

    pub fn add_term(&mut self, block: usize, var: usize, coefficient: HermitianOp) {
        self.blocks[block].terms.push(BlockTerm { var, coefficient });
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.equalities.push(LinearEquality { terms, rhs });
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.objective.len() != self.n_vars {
            return Err(SdpError::InvalidProblem(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.n_vars
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(SdpError::InvalidProblem("non-finite objective".into()));
        }
        if self.blocks.is_empty() {
            return Err(SdpError::InvalidProblem("no LMI blocks".into()));
        }
        for b in &self.blocks {
            if b.dim == 0 || b.constant.dim() != b.dim {
                return Err(SdpError::InvalidProblem(format!("block '{}' has inconsistent dimension", b.name)));
            }
            for t in &b.terms {
                if t.var >= self.n_vars {
                    return Err(SdpError::InvalidProblem(format!(
                        "block '{}' references variable {} of {}",
                        b.name, t.var, self.n_vars
                    )));
                }
                if t.coefficient.dim() != b.dim {
                    return Err(SdpError::InvalidProblem(format!(
                        "block '{}' coefficient for variable {} has wrong dimension",
                        b.name, t.var
                    )));
                }
            }
        }
        for (k, eq) in self.equalities.iter().enumerate() {
            if !eq.rhs.is_finite() || eq.terms.iter().any(|&(v, c)| v >= self.n_vars || !c.is_finite()) {
                return Err(SdpError::InvalidProblem(format!("equality row {k} is malformed")));
            }
        }
        Ok(())
    }

    /// `F0_b + Σ y_i F_ib` for every block.
    pub fn evaluate_blocks(&self, y: &[f64]) -> Vec<HermitianOp> {
        self.blocks
            .iter()
            .map(|b| {
                let mut acc = b.constant.clone();
                for t in &b.terms {
                    if y[t.var] != 0.0 {
                        acc = acc.add(&t.coefficient.scale(y[t.var]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn equality_residuals(&self, y: &[f64]) -> Vec<f64> {
        self.equalities
            .iter()
            .map(|eq| eq.terms.iter().map(|&(v, c)| c * y[v]).sum::<f64>() - eq.rhs)
            .collect()
    }

    /// `(Eᵀν)_i`.
    pub fn equality_adjoint(&self, nu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vars];
        for (eq, &w) in self.equalities.iter().zip(nu) {
            for &(v, c) in &eq.terms {
                out[v] += c * w;
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> Result<Self, SdpError> {
        let p: SdpProblem = serde_json::from_str(s).map_err(|e| SdpError::InvalidProblem(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    Feasible,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// The LMI variables `y` (without any internal margin variable).
    pub primal: Vec<f64>,
    pub objective_value: f64,
    pub dual_objective: f64,
    /// `X_b` for every block. For `Infeasible` these form the Farkas certificate,
    /// normalized to `Σ_b tr X_b = 1`.
    pub dual_blocks: Vec<HermitianOp>,
    pub equality_multipliers: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    /// Optimal strict-feasibility margin, for problems solved through [`feasibility`].
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SdpOptions {
    pub max_iter: usize,
    /// Relative residual / gap target for termination.
    pub tol: f64,
    /// Margins `t >= -margin_tol` count as feasible.
    pub margin_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-10, margin_tol: crate::tolerance::TOL.feasibility_margin }
    }
}

pub fn solve(problem: &SdpProblem) -> Result<SdpSolution, SdpError> {
    solve_with(problem, &SdpOptions::default())
}

/// Optimizes the problem. If the interior point method does not converge, a
/// margin problem decides whether the LMI is infeasible; if so the Farkas
/// certificate is returned with status `Infeasible`.
pub fn solve_with(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    let run = ipm::run(problem, opts)?;
    if run.converged {
        let sol = run.into_solution(problem, SdpStatus::Optimal, None);
        let report = verify_optimal(problem, &sol);
        if !report.passed {
            return Err(SdpError::CertificateRejected(report.summary));
        }
        return Ok(sol);
    }
    let feas = feasibility_with(problem, None, opts)?;
    if feas.status == SdpStatus::Infeasible {
        return Ok(feas);
    }
    Ok(run.into_solution(problem, SdpStatus::MaxIter, None))
}

pub fn feasibility(problem: &SdpProblem) -> Result<SdpSolution, SdpError> {
    feasibility_with(problem, None, &SdpOptions::default())
}

/// Decides feasibility of the LMI through the margin problem
///
/// ```text
/// maximize t  s.t.  F_b(y) − t·Δ_b ⪰ 0,  t ≤ 1,  E y = e
/// ```
///
/// where `Δ_b` is `directions[b]` (identity by default). Status is `Feasible`
/// when the optimal margin is at least `-margin_tol`, otherwise `Infeasible`
/// with a verified Farkas certificate.
pub fn feasibility_with(
    problem: &SdpProblem,
    directions: Option<&[HermitianOp]>,
    opts: &SdpOptions,
) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    if let Some(dirs) = directions {
        if dirs.len() != problem.blocks.len() || dirs.iter().zip(&problem.blocks).any(|(d, b)| d.dim() != b.dim) {
            return Err(SdpError::InvalidProblem("margin directions do not match the blocks".into()));
        }
    }
    let n = problem.n_vars;
    let mut aug = problem.clone();
    aug.n_vars = n + 1;
    aug.objective = vec![0.0; n + 1];
    aug.objective[n] = 1.0;
    for (b, block) in aug.blocks.iter_mut().enumerate() {
        let dir = match directions {
            Some(d) => d[b].clone(),
            None => HermitianOp::identity(block.dim),
        };
        block.terms.push(BlockTerm { var: n, coefficient: dir.scale(-1.0) });
    }
    let cap = aug.add_block("margin-cap", HermitianOp::identity(1));
    aug.add_term(cap, n, HermitianOp::identity(1).scale(-1.0));

    let run = ipm::run(&aug, opts)?;
    if !run.converged {
        let mut sol = run.into_solution(&aug, SdpStatus::MaxIter, None);
        sol.primal.truncate(n);
        sol.dual_blocks.truncate(problem.blocks.len());
        return Ok(sol);
    }
    let full = run.into_solution(&aug, SdpStatus::Optimal, None);
    let report = verify_optimal(&aug, &full);
    if !report.passed {
        return Err(SdpError::CertificateRejected(format!("margin problem: {}", report.summary)));
    }
    let t = full.primal[n];
    let mut sol = full;
    sol.primal.truncate(n);
    sol.dual_blocks.truncate(problem.blocks.len());
    sol.margin = Some(t);
    sol.objective_value = problem.objective.iter().zip(&sol.primal).map(|(c, y)| c * y).sum();
    if t >= -opts.margin_tol {
        sol.status = SdpStatus::Feasible;
        return Ok(sol);
    }
    // Farkas certificate for the original LMI: normalize Σ tr X = 1.
    let total: f64 = sol.dual_blocks.iter().map(HermitianOp::trace).sum();
    if total <= 0.0 {
        return Err(SdpError::CertificateRejected("empty dual certificate".into()));
    }
    sol.dual_blocks = sol.dual_blocks.iter().map(|x| x.scale(1.0 / total)).collect();
    sol.equality_multipliers.iter_mut().for_each(|v| *v /= total);
    sol.dual_objective = certificate::dual_value(problem, &sol.dual_blocks, &sol.equality_multipliers);
    sol.status = SdpStatus::Infeasible;
    let report = verify_infeasible(problem, &sol);
    if !report.passed {
        return Err(SdpError::CertificateRejected(report.summary));
    }
    Ok(sol)
}
