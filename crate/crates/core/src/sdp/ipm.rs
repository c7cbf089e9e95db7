use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{SdpError, SdpOptions, SdpProblem, SdpSolution, SdpStatus};
use crate::linalg::{jacobi_symmetric, ComplexMatrix, HermitianOp};

/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.98;
/// Accepted residual level when the iteration stalls before reaching `tol`.
const STALL_ACCEPT: f64 = 1e-8;

struct RealBlock {
    c: DMatrix<f64>,
    terms: Vec<(usize, DMatrix<f64>)>,
}

pub(super) struct IpmRun {
    pub converged: bool,
    pub y: Vec<f64>,
    pub x: Vec<DMatrix<f64>>,
    pub nu: Vec<f64>,
    pub iterations: usize,
    pub pobj: f64,
}

impl IpmRun {
    pub fn into_solution(self, problem: &SdpProblem, status: SdpStatus, margin: Option<f64>) -> SdpSolution {
        let dual_blocks: Vec<HermitianOp> = self.x.iter().map(complexify).collect();
        let dual_objective = super::certificate::dual_value(problem, &dual_blocks, &self.nu);
        SdpSolution {
            status,
            objective_value: self.pobj,
            dual_objective,
            gap: (self.pobj - dual_objective).abs(),
            primal: self.y,
            dual_blocks,
            equality_multipliers: self.nu,
            iterations: self.iterations,
            margin,
        }
    }
}

/// `[[Re H, −Im H], [Im H, Re H]]`.
fn realify(h: &HermitianOp) -> DMatrix<f64> {
    let n = h.dim();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            r[(i, j)] = z.re;
            r[(i + n, j + n)] = z.re;
            r[(i, j + n)] = -z.im;
            r[(i + n, j)] = z.im;
        }
    }
    r
}

/// Hermitian `X_c` with `tr(H X_c) = tr(realify(H) X)` for every Hermitian `H`.
fn complexify(x: &DMatrix<f64>) -> HermitianOp {
    let n = x.nrows() / 2;
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(x[(i, j)] + x[(i + n, j + n)], x[(i + n, j)] - x[(j + n, i)])
    });
    HermitianOp::symmetrize(&m)
}

fn trace_prod(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    // tr(A B) = Σ_ij A_ij B_ji
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

fn min_eig(a: &DMatrix<f64>) -> Result<f64, SdpError> {
    let n = a.nrows();
    let data: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    let (vals, _) = jacobi_symmetric(data, n, false).map_err(|e| SdpError::Eigen(e.to_string()))?;
    Ok(*vals.last().expect("non-empty"))
}

/// Largest `α` with `X + α dX ⪰ 0` (infinite if `dX ⪰ 0`).
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Result<f64, SdpError> {
    let Some(chol) = x.clone().cholesky() else {
        return Ok(0.0);
    };
    let l = chol.l();
    let a = l.solve_lower_triangular(dx).expect("triangular solve");
    let b = l.solve_lower_triangular(&a.transpose()).expect("triangular solve");
    let lam = min_eig(&sym(&b))?;
    Ok(if lam >= 0.0 { f64::INFINITY } else { -1.0 / lam })
}

/// Orthonormalized independent equality rows: `Q y = q_rhs`, with `T` such that
/// multipliers for the original rows are `Tᵀ ν_q`.
struct Equalities {
    q: DMatrix<f64>,
    rhs: DVector<f64>,
    t: DMatrix<f64>,
}

fn preprocess_equalities(problem: &SdpProblem) -> Result<Equalities, SdpError> {
    let n = problem.n_vars;
    let p = problem.equalities.len();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut basis_rhs: Vec<f64> = Vec::new();
    // Each accepted basis row as a combination of original rows.
    let mut combos: Vec<DVector<f64>> = Vec::new();
    for (r, eq) in problem.equalities.iter().enumerate() {
        let mut row = DVector::zeros(n);
        for &(v, c) in &eq.terms {
            row[v] += c;
        }
        let row_norm = row.norm();
        let mut rhs = eq.rhs;
        let mut combo = DVector::zeros(p);
        combo[r] = 1.0;
        for k in 0..basis.len() {
            let proj = basis[k].dot(&row);
            row -= &basis[k] * proj;
            rhs -= proj * basis_rhs[k];
            combo -= &combos[k] * proj;
        }
        // second pass for stability
        for k in 0..basis.len() {
            let proj = basis[k].dot(&row);
            row -= &basis[k] * proj;
            rhs -= proj * basis_rhs[k];
            combo -= &combos[k] * proj;
        }
        let norm = row.norm();
        if norm <= 1e-10 * row_norm.max(1e-300) {
            if rhs.abs() > 1e-8 * (1.0 + eq.rhs.abs()) {
                return Err(SdpError::InconsistentEqualities { residual: rhs.abs() });
            }
            continue;
        }
        basis.push(row / norm);
        basis_rhs.push(rhs / norm);
        combos.push(combo / norm);
    }
    let k = basis.len();
    let mut q = DMatrix::zeros(k, n);
    let mut t = DMatrix::zeros(k, p);
    for i in 0..k {
        q.set_row(i, &basis[i].transpose());
        t.set_row(i, &combos[i].transpose());
    }
    Ok(Equalities { q, rhs: DVector::from_vec(basis_rhs), t })
}

struct Direction {
    dy: DVector<f64>,
    dnu: DVector<f64>,
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
}

pub(super) fn run(problem: &SdpProblem, opts: &SdpOptions) -> Result<IpmRun, SdpError> {
    let n = problem.n_vars;
    let eqs = preprocess_equalities(problem)?;
    let k = eqs.q.nrows();
    let blocks: Vec<RealBlock> = problem
        .blocks
        .iter()
        .map(|b| RealBlock {
            c: realify(&b.constant),
            terms: b.terms.iter().map(|t| (t.var, realify(&t.coefficient))).collect(),
        })
        .collect();
    let c = DVector::from_column_slice(&problem.objective);

    let total_dim: usize = blocks.iter().map(|b| b.c.nrows()).sum();
    let nd = total_dim as f64;
    let mut var_norm = vec![0.0f64; n];
    for b in &blocks {
        for (v, f) in &b.terms {
            var_norm[*v] += f.norm_squared();
        }
    }
    let var_norm: Vec<f64> = var_norm.into_iter().map(f64::sqrt).collect();
    let c_norm = blocks.iter().map(|b| b.c.norm_squared()).sum::<f64>().sqrt();
    let xi = (0..n)
        .map(|i| nd * (1.0 + c[i].abs()) / (1.0 + var_norm[i]))
        .fold(10.0f64.max(nd.sqrt()), f64::max);
    let zeta = var_norm.iter().copied().fold(10.0f64.max(nd.sqrt()).max(c_norm), f64::max);

    let mut x: Vec<DMatrix<f64>> = blocks.iter().map(|b| DMatrix::identity(b.c.nrows(), b.c.nrows()) * xi).collect();
    let mut s: Vec<DMatrix<f64>> = blocks.iter().map(|b| DMatrix::identity(b.c.nrows(), b.c.nrows()) * zeta).collect();
    let mut y = DVector::zeros(n);
    let mut nu = DVector::zeros(k);

    let scale_p = 1.0 + c.norm();
    let scale_d = 1.0 + c_norm;
    let scale_e = 1.0 + eqs.rhs.norm();

    let mut converged = false;
    let mut iterations = 0;
    let mut pobj = 0.0;
    let mut last_residual = f64::INFINITY;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        // Residuals.
        let rd: Vec<DMatrix<f64>> = blocks
            .iter()
            .zip(&s)
            .map(|(b, sb)| {
                let mut f = b.c.clone();
                for (v, fv) in &b.terms {
                    f += fv * y[*v];
                }
                f - sb
            })
            .collect();
        let mut r = -&c + eqs.q.transpose() * &nu;
        for (b, xb) in blocks.iter().zip(&x) {
            for (v, fv) in &b.terms {
                r[*v] -= trace_prod(fv, xb);
            }
        }
        let re = &eqs.rhs - &eqs.q * &y;
        let comp: f64 = x.iter().zip(&s).map(|(a, b)| trace_prod(a, b)).sum();
        let mu = comp / nd;
        pobj = c.dot(&y);
        let dobj = blocks.iter().zip(&x).map(|(b, xb)| trace_prod(&b.c, xb)).sum::<f64>() + eqs.rhs.dot(&nu);

        let relp = r.norm() / scale_p;
        let reld = rd.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt() / scale_d;
        let rele = re.norm() / scale_e;
        let relgap = comp.abs().max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs());
        let residual = relp.max(reld).max(rele).max(relgap);
        last_residual = residual;
        if residual <= opts.tol {
            converged = true;
            break;
        }
        if iter == opts.max_iter {
            break;
        }
        if !residual.is_finite() || y.norm() > 1e12 || x.iter().any(|m| m.norm() > 1e12) {
            break;
        }

        // S⁻¹ per block.
        let mut sinv = Vec::with_capacity(blocks.len());
        for sb in &s {
            let chol = sb.clone().cholesky().ok_or_else(|| SdpError::IllConditioned {
                iteration: iter,
                detail: "slack matrix lost positive definiteness".into(),
            })?;
            sinv.push(chol.inverse());
        }

        // Schur complement M_ij = Σ_b tr(F_ib X_b F_jb S_b⁻¹).
        let mut m = DMatrix::zeros(n, n);
        for ((b, xb), si) in blocks.iter().zip(&x).zip(&sinv) {
            let p: Vec<DMatrix<f64>> = b.terms.iter().map(|(_, f)| xb * f * si).collect();
            for (vi, fi) in &b.terms {
                for (pj, (vj, _)) in p.iter().zip(&b.terms) {
                    m[(*vi, *vj)] += trace_prod(fi, pj);
                }
            }
        }
        let mut kkt = DMatrix::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(&m);
        kkt.view_mut((0, n), (n, k)).copy_from(&eqs.q.transpose());
        kkt.view_mut((n, 0), (k, n)).copy_from(&eqs.q);
        let lu = kkt.clone().full_piv_lu();
        let reg_lu = {
            let diag_max = (0..n).map(|i| m[(i, i)].abs()).fold(1.0, f64::max);
            let mut kr = kkt.clone();
            for i in 0..n {
                kr[(i, i)] += 1e-13 * diag_max;
            }
            for i in n..n + k {
                kr[(i, i)] -= 1e-13;
            }
            kr.full_piv_lu()
        };

        let solve_dir = |sigma_mu: f64, corr: Option<&[DMatrix<f64>]>| -> Result<Direction, SdpError> {
            // T_b = σμ S⁻¹ − X − (X R_d + corr) S⁻¹
            let t: Vec<DMatrix<f64>> = (0..blocks.len())
                .map(|b| {
                    let mut inner = &x[b] * &rd[b];
                    if let Some(cr) = corr {
                        inner += &cr[b];
                    }
                    &sinv[b] * sigma_mu - &x[b] - inner * &sinv[b]
                })
                .collect();
            let mut g = DVector::zeros(n);
            for (bi, b) in blocks.iter().enumerate() {
                for (v, f) in &b.terms {
                    g[*v] += trace_prod(f, &t[bi]);
                }
            }
            let mut rhs = DVector::zeros(n + k);
            rhs.rows_mut(0, n).copy_from(&(g - &r));
            rhs.rows_mut(n, k).copy_from(&re);
            let sol = match lu.solve(&rhs) {
                Some(v) if v.iter().all(|z| z.is_finite()) && (&kkt * &v - &rhs).norm() <= 1e-6 * (1.0 + rhs.norm()) => v,
                _ => reg_lu.solve(&rhs).filter(|v| v.iter().all(|z| z.is_finite())).ok_or_else(|| {
                    SdpError::IllConditioned { iteration: iter, detail: "singular KKT system".into() }
                })?,
            };
            let dy = sol.rows(0, n).into_owned();
            let dnu = sol.rows(n, k).into_owned();
            let mut ds = Vec::with_capacity(blocks.len());
            let mut dx = Vec::with_capacity(blocks.len());
            for (bi, b) in blocks.iter().enumerate() {
                let mut step = rd[bi].clone();
                for (v, f) in &b.terms {
                    step += f * dy[*v];
                }
                let sum_f = &step - &rd[bi];
                dx.push(sym(&(&t[bi] - &x[bi] * sum_f * &sinv[bi])));
                ds.push(step);
            }
            Ok(Direction { dy, dnu, dx, ds })
        };

        let step_lengths = |d: &Direction| -> Result<(f64, f64), SdpError> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for b in 0..blocks.len() {
                ap = ap.min(max_step(&x[b], &d.dx[b])?);
                ad = ad.min(max_step(&s[b], &d.ds[b])?);
            }
            Ok((ap, ad))
        };

        // Predictor.
        let aff = solve_dir(0.0, None)?;
        let (ap, ad) = step_lengths(&aff)?;
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let comp_aff: f64 = (0..blocks.len())
            .map(|b| trace_prod(&(&x[b] + &aff.dx[b] * ap), &(&s[b] + &aff.ds[b] * ad)))
            .sum();
        let sigma = if mu > 0.0 { (comp_aff / comp).clamp(0.0, 1.0).powi(3) } else { 0.0 };

        // Corrector.
        let corr: Vec<DMatrix<f64>> = (0..blocks.len()).map(|b| &aff.dx[b] * &aff.ds[b]).collect();
        let dir = solve_dir(sigma * mu, Some(&corr))?;
        let (ap, ad) = step_lengths(&dir)?;
        let mut ap = (STEP_FRACTION * ap).min(1.0);
        let mut ad = (STEP_FRACTION * ad).min(1.0);
        let mut accepted = None;
        while ap >= 1e-12 || ad >= 1e-12 {
            let xn: Vec<DMatrix<f64>> = (0..blocks.len()).map(|b| &x[b] + &dir.dx[b] * ap).collect();
            let sn: Vec<DMatrix<f64>> = (0..blocks.len()).map(|b| &s[b] + &dir.ds[b] * ad).collect();
            if xn.iter().chain(&sn).all(|m| m.clone().cholesky().is_some()) {
                accepted = Some((xn, sn));
                break;
            }
            ap *= 0.5;
            ad *= 0.5;
        }
        let Some((xn, sn)) = accepted else { break };
        x = xn;
        s = sn;
        nu += &dir.dnu * ap;
        y += &dir.dy * ad;
    }
    if !converged && last_residual <= STALL_ACCEPT {
        converged = true;
    }
    let nu_orig = eqs.t.transpose() * &nu;
    Ok(IpmRun {
        converged,
        y: y.iter().copied().collect(),
        x,
        nu: nu_orig.iter().copied().collect(),
        iterations,
        pobj,
    })
}
