//! Infeasible-start primal-dual path-following on Hermitian block tuples.
//!
//! The method never needs a strictly feasible starting point: the supplied
//! `x_init` may be rank-deficient (pure-state transcripts are), so iteration
//! starts at `x_init + I` and drives the equality residual to zero along the
//! way. Scaling is the symmetric primal-dual choice `W` with `W S W = X`;
//! the centering parameter and iteration cap are fixed at 0.2 and 500.
//!
//! Certification does not rely on reaching exact dual feasibility. For any
//! multiplier vector `y` and any point of the feasible set (which satisfies
//! `0 ⪯ X ⪯ b·I` by the caller's bound promise),
//!
//! ```text
//! ⟨C, X⟩ = yᵀα + ⟨C − A*(y), X⟩ ≤ yᵀα + b·tr((C − A*(y))₊)
//! ```
//!
//! so the right-hand side is a valid upper bound on the optimum at every
//! iteration; the best one seen is reported as `dual_bound`.

use nalgebra::{DMatrix, DVector};

use super::blocks::{
    baxpy, bdot, block_identity, block_zeros, eig_map, eigh, positive_part_trace, BlockProblem,
    BlockSolution, Orthonormalized,
};
use super::SolveStatus;
use crate::hermitian::{c64, real_embed, real_embed_dim, real_unembed, ComplexMatrix};
use crate::tol;

const SIGMA: f64 = 0.2;
const MAX_ITER: usize = 500;
const STEP_DAMP: f64 = 0.98;

/// Largest t with P + t·D ⪰ 0, given P ≻ 0 (up to an eigenvalue floor).
fn max_step(p: &[ComplexMatrix], d: &[ComplexMatrix]) -> f64 {
    let mut worst = f64::INFINITY;
    for (pb, db) in p.iter().zip(d) {
        if pb.nrows() == 0 {
            continue;
        }
        let (vals, vecs) = eigh(pb);
        let vmax = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let floor = (vmax * 1e-14).max(1e-280);
        let half_inv = eig_map(&vals, &vecs, |v| 1.0 / v.max(floor).sqrt());
        let t = &half_inv * db * &half_inv;
        let (tvals, _) = eigh(&t);
        let lam = tvals.first().copied().unwrap_or(0.0);
        if lam < -1e-12 {
            worst = worst.min(-1.0 / lam);
        }
    }
    worst
}

fn symmetrize(blocks: &mut [ComplexMatrix]) {
    for b in blocks.iter_mut() {
        *b = (&*b + b.adjoint()) * c64(0.5, 0.0);
    }
}

fn apply_rows(rows: &[Vec<ComplexMatrix>], x: &[ComplexMatrix]) -> DVector<f64> {
    DVector::from_iterator(rows.len(), rows.iter().map(|r| bdot(r, x)))
}

fn adjoint_rows(rows: &[Vec<ComplexMatrix>], y: &DVector<f64>, dims: &[usize]) -> Vec<ComplexMatrix> {
    let mut out = block_zeros(dims);
    for (r, &c) in rows.iter().zip(y.iter()) {
        baxpy(&mut out, c, r);
    }
    out
}

fn all_finite(blocks: &[ComplexMatrix]) -> bool {
    blocks
        .iter()
        .all(|b| b.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
}

/// Exact projection of the blocks onto the affine manifold spanned by the
/// orthonormal embedded rows.
fn project_affine(dims: &[usize], sys: &Orthonormalized, x: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let offsets = super::blocks::block_offsets(dims);
    let mut xe = DVector::zeros(offsets[dims.len()]);
    for (b, m) in x.iter().enumerate() {
        let e = real_embed(m).expect("square block");
        xe.rows_mut(offsets[b], e.len()).copy_from(&e);
    }
    for (q, &r) in sys.embedded.iter().zip(sys.rhs.iter()) {
        let c = r - q.dot(&xe);
        xe += q * c;
    }
    dims.iter()
        .enumerate()
        .map(|(b, &d)| {
            let seg = DVector::from_column_slice(xe.rows(offsets[b], real_embed_dim(d)).as_slice());
            real_unembed(&seg, d).expect("segment matches block")
        })
        .collect()
}

fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if m.nrows() == 0 {
        return Some(DVector::zeros(0));
    }
    let scale = 1.0 + m.trace() / m.nrows() as f64;
    let mut jitter = 0.0;
    for _ in 0..3 {
        let mut try_m = m.clone();
        if jitter > 0.0 {
            for i in 0..try_m.nrows() {
                try_m[(i, i)] += jitter;
            }
        }
        if let Some(chol) = try_m.cholesky() {
            return Some(chol.solve(rhs));
        }
        jitter = if jitter == 0.0 { 1e-14 * scale } else { jitter * 100.0 };
    }
    m.clone().lu().solve(rhs)
}

pub(crate) fn run(p: &BlockProblem, sys: &Orthonormalized) -> BlockSolution {
    let dims = &p.dims;
    let n_tot: usize = dims.iter().sum();
    let m = sys.rows.len();
    let delta_feas = tol::sdp_feasibility(p.epsilon);
    let tol_primal = 0.4 * delta_feas;

    let mut x = p.x_init.clone();
    for (b, &d) in dims.iter().enumerate() {
        x[b] += ComplexMatrix::identity(d, d);
    }
    symmetrize(&mut x);
    let c_scale = p
        .objective
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    let mut s = block_identity(dims, 1.0 + c_scale);
    let mut y = DVector::<f64>::zeros(m);

    let mut best_bound = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut diagnostics = String::new();

    for iter in 0..MAX_ITER {
        iterations = iter + 1;

        let r_p = &sys.rhs - apply_rows(&sys.rows, &x);
        let primal_res = if r_p.is_empty() { 0.0 } else { r_p.amax() };
        let at_y = adjoint_rows(&sys.rows, &y, dims);
        // Dual residual C + S − A*(y) and the certificate slack C − A*(y).
        let mut slack = Vec::with_capacity(dims.len());
        let mut r_d = Vec::with_capacity(dims.len());
        for b in 0..dims.len() {
            let sl = &p.objective[b] - &at_y[b];
            r_d.push(&sl + &s[b]);
            slack.push(sl);
        }
        let obj = bdot(&p.objective, &x);
        let bound_here = y.dot(&sys.rhs)
            + p.bound_b * slack.iter().map(positive_part_trace).sum::<f64>();
        best_bound = best_bound.min(bound_here);

        if primal_res <= tol_primal && best_bound - obj <= 0.9 * p.epsilon {
            converged = true;
            break;
        }

        // Newton step in the scaled variables.
        let mu = bdot(&x, &s) / n_tot as f64;
        if !mu.is_finite() || mu > 1e60 {
            diagnostics = format!("duality measure diverged (mu = {mu:.3e})");
            break;
        }
        let mut w = Vec::with_capacity(dims.len());
        let mut r_c = Vec::with_capacity(dims.len());
        for b in 0..dims.len() {
            let (xv, xvecs) = eigh(&x[b]);
            let xmax = xv.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let xfloor = (xmax * 1e-14).max(1e-280);
            let x_half = eig_map(&xv, &xvecs, |v| v.max(xfloor).sqrt());
            let t = &x_half * &s[b] * &x_half;
            let (tv, tvecs) = eigh(&t);
            let tmax = tv.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let tfloor = (tmax * 1e-14).max(1e-280);
            let t_inv_half = eig_map(&tv, &tvecs, |v| 1.0 / v.max(tfloor).sqrt());
            w.push(&x_half * t_inv_half * &x_half);

            let (sv, svecs) = eigh(&s[b]);
            let smax = sv.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let sfloor = (smax * 1e-14).max(1e-280);
            let s_inv = eig_map(&sv, &svecs, |v| 1.0 / v.max(sfloor));
            r_c.push(s_inv * c64(SIGMA * mu, 0.0) - &x[b]);
        }

        // Normal equations M Δy = A(R_c) + A(W R_d W) − r_p.
        let w_rows: Vec<Vec<ComplexMatrix>> = crate::par::map_indexed(m, |j| {
            sys.rows[j]
                .iter()
                .enumerate()
                .map(|(b, a)| &w[b] * a * &w[b])
                .collect()
        });
        let mut m_mat = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = bdot(&sys.rows[i], &w_rows[j]);
                m_mat[(i, j)] = v;
                m_mat[(j, i)] = v;
            }
        }
        let wrdw: Vec<ComplexMatrix> = (0..dims.len())
            .map(|b| &w[b] * &r_d[b] * &w[b])
            .collect();
        let rhs_vec = apply_rows(&sys.rows, &r_c) + apply_rows(&sys.rows, &wrdw) - &r_p;
        let dy = match solve_spd(&m_mat, &rhs_vec) {
            Some(v) => v,
            None => {
                diagnostics = format!("normal equations singular at iteration {iter}");
                break;
            }
        };

        let at_dy = adjoint_rows(&sys.rows, &dy, dims);
        let mut ds = Vec::with_capacity(dims.len());
        let mut dx = Vec::with_capacity(dims.len());
        for b in 0..dims.len() {
            let dsb = &at_dy[b] - &r_d[b];
            dx.push(&r_c[b] - &w[b] * &dsb * &w[b]);
            ds.push(dsb);
        }
        symmetrize(&mut dx);
        symmetrize(&mut ds);

        let alpha_p = (STEP_DAMP * max_step(&x, &dx)).min(1.0);
        let alpha_d = (STEP_DAMP * max_step(&s, &ds)).min(1.0);
        for b in 0..dims.len() {
            x[b] += &dx[b] * c64(alpha_p, 0.0);
            s[b] += &ds[b] * c64(alpha_d, 0.0);
        }
        y += dy * alpha_d;
        if !all_finite(&x) || !all_finite(&s) {
            diagnostics = format!("non-finite iterate at iteration {iter}");
            break;
        }
    }

    // Snap the returned point onto the equality manifold exactly; fall back
    // to the raw iterate if the projection broke positivity.
    let projected = project_affine(dims, sys, &x);
    let min_eig = projected
        .iter()
        .filter(|b| b.nrows() > 0)
        .map(|b| eigh(b).0[0])
        .fold(f64::INFINITY, f64::min);
    let x_final = if min_eig >= -tol::TOL_PSD || !all_finite(&projected) {
        projected
    } else {
        diagnostics = format!(
            "affine projection left eigenvalue {min_eig:.3e}; returning unprojected iterate"
        );
        x
    };
    let objective_value = bdot(&p.objective, &x_final);
    let dual_bound = best_bound.max(objective_value);
    let residual_vec = &sys.rhs - apply_rows(&sys.rows, &x_final);
    let residual = if residual_vec.is_empty() {
        0.0
    } else {
        residual_vec.amax()
    };

    let status = if !diagnostics.is_empty() {
        SolveStatus::NumericalFailure
    } else if converged && residual <= delta_feas && dual_bound - objective_value <= p.epsilon {
        SolveStatus::Optimal
    } else {
        if converged {
            diagnostics = format!(
                "certificate degraded after projection: residual {residual:.3e}, gap {:.3e}",
                dual_bound - objective_value
            );
        } else {
            diagnostics = format!(
                "iteration cap reached with residual {residual:.3e}, gap {:.3e}",
                dual_bound - objective_value
            );
        }
        SolveStatus::MaxIter
    };

    BlockSolution {
        x: x_final,
        objective_value,
        dual_bound,
        constraint_residual: residual,
        status,
        iterations,
        diagnostics,
    }
}
