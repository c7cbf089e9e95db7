//! Shared SDP for "targets are marginals of a joint object".
//!
//! Joint measurability asks for PSD `M_⃗a` with `Σ_{⃗a: a_x = a} M_⃗a = M_{a|x}`;
//! the hidden-state test asks for PSD `σ_λ` (λ a deterministic strategy, i.e. an
//! outcome vector) with `Σ_{λ: λ(x) = a} σ_λ = σ_{a|x}`. Both are the same
//! program over joint outcome vectors, posed here as a margin problem.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_basis, HermitianOp};
use crate::sdp::{feasibility_with, SdpOptions, SdpProblem, SdpStatus};

/// Mixed-radix little-endian decoding: `index = a_1 + n_1 (a_2 + n_2 (...))`.
pub fn outcome_vector(mut index: usize, shape: &[usize]) -> Vec<usize> {
    shape
        .iter()
        .map(|&n| {
            let a = index % n;
            index /= n;
            a
        })
        .collect()
}

pub fn outcome_index(outcomes: &[usize], shape: &[usize]) -> usize {
    outcomes.iter().zip(shape).rev().fold(0, |acc, (&a, &n)| acc * n + a)
}

pub(crate) struct JointDecomposition {
    pub feasible: bool,
    pub margin: f64,
    /// Joint elements indexed by outcome vector (meaningful when feasible).
    pub joint: Vec<HermitianOp>,
    /// Equality multipliers `Y_{a|x}` (meaningful when infeasible); they satisfy
    /// `Σ_x Y_{a_x|x} ⪰ 0` for every outcome vector and `Σ tr(Y_{a|x} T_{a|x}) < 0`.
    pub multipliers: Vec<Vec<HermitianOp>>,
}

/// `targets[x][a]` must share one dimension. `direction` is the margin
/// direction added to every joint element's PSD constraint.
pub(crate) fn decompose(targets: &[Vec<HermitianOp>], direction: &HermitianOp, opts: &SdpOptions) -> Result<JointDecomposition> {
    let d = direction.dim();
    let shape: Vec<usize> = targets.iter().map(Vec::len).collect();
    let joint_count: usize = shape.iter().product();
    let basis = hermitian_basis(d);
    let nb = basis.len();

    let mut problem = SdpProblem::new(joint_count * nb);
    for k in 0..joint_count {
        let b = problem.add_block(format!("joint-{k}"), HermitianOp::zeros(d));
        for (j, e) in basis.iter().enumerate() {
            problem.add_term(b, k * nb + j, e.clone());
        }
    }
    // Rows ordered (x, a, j).
    let vectors: Vec<Vec<usize>> = (0..joint_count).map(|k| outcome_vector(k, &shape)).collect();
    for (x, povm) in targets.iter().enumerate() {
        for (a, target) in povm.iter().enumerate() {
            if target.dim() != d {
                return Err(Error::DimensionMismatch("marginal targets of different dimensions".into()));
            }
            for (j, e) in basis.iter().enumerate() {
                let terms = (0..joint_count).filter(|&k| vectors[k][x] == a).map(|k| (k * nb + j, 1.0)).collect();
                problem.add_equality(terms, e.inner(target));
            }
        }
    }
    let directions = vec![direction.clone(); joint_count];
    let sol = feasibility_with(&problem, Some(&directions), opts)?;
    let margin = sol.margin.unwrap_or(f64::NAN);
    match sol.status {
        SdpStatus::Feasible => {
            let joint = (0..joint_count)
                .map(|k| {
                    HermitianOp::linear_combination((0..nb).map(|j| (sol.primal[k * nb + j], &basis[j])))
                        .expect("non-empty basis")
                })
                .collect();
            Ok(JointDecomposition { feasible: true, margin, joint, multipliers: Vec::new() })
        }
        SdpStatus::Infeasible => {
            let mut row = 0;
            let mut multipliers = Vec::with_capacity(targets.len());
            for povm in targets {
                let mut per_x = Vec::with_capacity(povm.len());
                for _ in povm {
                    let y = HermitianOp::linear_combination(
                        (0..nb).map(|j| (sol.equality_multipliers[row + j], &basis[j])),
                    )
                    .expect("non-empty basis");
                    per_x.push(y);
                    row += nb;
                }
                multipliers.push(per_x);
            }
            Ok(JointDecomposition { feasible: false, margin, joint: Vec::new(), multipliers })
        }
        SdpStatus::MaxIter | SdpStatus::Optimal => Err(Error::Inconclusive(format!(
            "marginal feasibility SDP stopped after {} iterations without a verdict",
            sol.iterations
        ))),
    }
}

/// Value `Σ tr(W_{a|x} T_{a|x})` and the bound `total · max_⃗a λ_max(Σ_x W_{a_x|x})`
/// that holds for every target set admitting a joint decomposition whose
/// elements have total trace `total`.
pub(crate) fn witness_value_and_bound(
    operators: &[Vec<HermitianOp>],
    targets: &[Vec<HermitianOp>],
    total: f64,
) -> Result<(f64, f64)> {
    if operators.len() != targets.len() || operators.iter().zip(targets).any(|(w, t)| w.len() != t.len()) {
        return Err(Error::DimensionMismatch("witness shape does not match the targets".into()));
    }
    let value: f64 = operators
        .iter()
        .zip(targets)
        .flat_map(|(w, t)| w.iter().zip(t).map(|(wi, ti)| wi.inner(ti)))
        .sum();
    let shape: Vec<usize> = operators.iter().map(Vec::len).collect();
    let joint_count: usize = shape.iter().product();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..joint_count {
        let v = outcome_vector(k, &shape);
        let z = HermitianOp::linear_combination(v.iter().enumerate().map(|(x, &a)| (1.0, &operators[x][a])))
            .expect("at least one setting");
        worst = worst.max(z.max_eigenvalue()?);
    }
    Ok((value, total * worst))
}
