//! Internal block-diagonal problem form and the presolve that every solve
//! runs through: splitting complex equality constraints into real ones and
//! orthonormalizing the constraint rows.
//!
//! The variable is a tuple of Hermitian PSD blocks. A constraint couples any
//! subset of blocks: `Σ_t ⟨A_t, X_{block(t)}⟩ = rhs`. Callers outside this
//! module construct these directly when they know the block structure
//! (consistency systems, image-distance programs); the flat public API
//! discovers blocks first and then lands here too.

use nalgebra::DVector;
use num_complex::Complex64;

use super::SolveStatus;
use crate::hermitian::{c64, hs_inner, real_embed, real_embed_dim, real_unembed, ComplexMatrix};

pub(crate) struct BlockProblem {
    pub dims: Vec<usize>,
    /// One Hermitian matrix per block; the objective is Σ_b ⟨C_b, X_b⟩,
    /// maximized.
    pub objective: Vec<ComplexMatrix>,
    pub constraints: Vec<BlockConstraint>,
    pub x_init: Vec<ComplexMatrix>,
    /// Promise: every feasible point satisfies ‖X_b‖ ≤ bound_b.
    pub bound_b: f64,
    pub epsilon: f64,
}

pub(crate) struct BlockConstraint {
    /// `(block index, matrix)` terms; matrices need not be Hermitian.
    pub terms: Vec<(usize, ComplexMatrix)>,
    pub rhs: Complex64,
}

#[derive(Debug, Clone)]
pub(crate) struct BlockSolution {
    pub x: Vec<ComplexMatrix>,
    pub objective_value: f64,
    pub dual_bound: f64,
    pub constraint_residual: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub diagnostics: String,
}

/// A constraint with Hermitian terms and a real right-hand side.
pub(crate) struct RealRow {
    pub terms: Vec<(usize, ComplexMatrix)>,
    pub rhs: f64,
}

/// Splits each complex constraint into its real and imaginary parts. For
/// Hermitian X, `⟨A, X⟩ = ⟨A_h, X⟩ - i⟨A_s, X⟩` with `A_h = (A+A*)/2` and
/// `A_s = (A-A*)/2i`, both Hermitian and both traces real — so the equality
/// `⟨A, X⟩ = α` is exactly the pair `⟨A_h, X⟩ = Re α`, `⟨A_s, X⟩ = -Im α`.
/// Rows whose matrices vanish are dropped, unless their right-hand side is
/// nonzero, which makes the system infeasible as stated.
pub(crate) fn realify(constraints: &[BlockConstraint]) -> Result<Vec<RealRow>, String> {
    let mut rows = Vec::with_capacity(2 * constraints.len());
    for (idx, con) in constraints.iter().enumerate() {
        let mut herm = Vec::new();
        let mut skew = Vec::new();
        let mut herm_norm = 0.0f64;
        let mut skew_norm = 0.0f64;
        for (b, a) in &con.terms {
            let adj = a.adjoint();
            let h = (a + &adj) * c64(0.5, 0.0);
            let s = (a - &adj) * c64(0.0, -0.5);
            herm_norm += h.norm_squared();
            skew_norm += s.norm_squared();
            herm.push((*b, h));
            skew.push((*b, s));
        }
        for (mats, norm2, rhs) in [
            (herm, herm_norm, con.rhs.re),
            (skew, skew_norm, -con.rhs.im),
        ] {
            if norm2.sqrt() <= 1e-13 {
                if rhs.abs() > 1e-9 {
                    return Err(format!(
                        "constraint {idx} reduces to 0 = {rhs:.3e}; system infeasible as stated"
                    ));
                }
                continue;
            }
            rows.push(RealRow { terms: mats, rhs });
        }
    }
    Ok(rows)
}

/// Constraint rows after orthonormalization, in both matrix and embedded
/// form. The embedded rows are orthonormal, so projecting onto the affine
/// constraint manifold is a plain inner-product sweep.
pub(crate) struct Orthonormalized {
    pub rows: Vec<Vec<ComplexMatrix>>,
    pub embedded: Vec<DVector<f64>>,
    pub rhs: DVector<f64>,
    /// Count of redundant rows removed; kept for diagnostics.
    #[cfg_attr(not(test), allow(dead_code))]
    pub dropped: usize,
}

/// Embeds `(block, matrix)` terms into one real vector over the
/// concatenation of the per-block embeddings.
fn embed_terms(dims: &[usize], offsets: &[usize], terms: &[(usize, ComplexMatrix)]) -> DVector<f64> {
    let total = offsets.last().copied().unwrap_or(0);
    let mut v = DVector::zeros(total);
    for (b, m) in terms {
        let sym = (m + m.adjoint()) * c64(0.5, 0.0);
        let e = real_embed(&sym).expect("square by construction");
        v.rows_mut(offsets[*b], real_embed_dim(dims[*b]))
            .copy_from(&e);
    }
    v
}

pub(crate) fn block_offsets(dims: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(dims.len() + 1);
    let mut acc = 0;
    for &d in dims {
        offsets.push(acc);
        acc += real_embed_dim(d);
    }
    offsets.push(acc);
    offsets
}

fn unembed_blocks(dims: &[usize], offsets: &[usize], v: &DVector<f64>) -> Vec<ComplexMatrix> {
    dims.iter()
        .enumerate()
        .map(|(b, &d)| {
            let seg = DVector::from_column_slice(
                v.rows(offsets[b], real_embed_dim(d)).as_slice(),
            );
            real_unembed(&seg, d).expect("segment length matches dim")
        })
        .collect()
}

/// Modified Gram–Schmidt (two projection passes) over the embedded rows.
/// Rows that fall below `1e-10` of their original norm are linear
/// combinations of earlier rows: they are dropped after checking that their
/// right-hand side agrees with the implied one, since a disagreement means
/// the equalities are contradictory.
pub(crate) fn orthonormalize(dims: &[usize], rows: &[RealRow]) -> Result<Orthonormalized, String> {
    let offsets = block_offsets(dims);
    let mut kept_vecs: Vec<DVector<f64>> = Vec::new();
    let mut kept_rhs: Vec<f64> = Vec::new();
    let mut dropped = 0;
    for (idx, row) in rows.iter().enumerate() {
        let mut v = embed_terms(dims, &offsets, &row.terms);
        let orig_norm = v.norm();
        let mut implied = 0.0;
        for _pass in 0..2 {
            for (q, &r) in kept_vecs.iter().zip(kept_rhs.iter()) {
                let c = q.dot(&v);
                v -= q * c;
                implied += c * r;
            }
        }
        let resid = v.norm();
        if resid <= 1e-10 * orig_norm.max(1.0) {
            if (row.rhs - implied).abs() > 1e-7 * (1.0 + row.rhs.abs()) {
                return Err(format!(
                    "constraint row {idx} is dependent but its right-hand side {:.6e} \
                     contradicts the implied value {implied:.6e}",
                    row.rhs
                ));
            }
            dropped += 1;
            continue;
        }
        kept_rhs.push((row.rhs - implied) / resid);
        kept_vecs.push(v / resid);
    }
    let kept_rows = kept_vecs
        .iter()
        .map(|v| unembed_blocks(dims, &offsets, v))
        .collect();
    Ok(Orthonormalized {
        rows: kept_rows,
        rhs: DVector::from_vec(kept_rhs.clone()),
        embedded: kept_vecs,
        dropped,
    })
}

// --- small block-tuple helpers shared with the interior-point core ---

pub(crate) fn block_zeros(dims: &[usize]) -> Vec<ComplexMatrix> {
    dims.iter().map(|&d| ComplexMatrix::zeros(d, d)).collect()
}

pub(crate) fn block_identity(dims: &[usize], scale: f64) -> Vec<ComplexMatrix> {
    dims.iter()
        .map(|&d| ComplexMatrix::identity(d, d) * c64(scale, 0.0))
        .collect()
}

/// Real Hilbert–Schmidt inner product of two Hermitian block tuples.
pub(crate) fn bdot(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| hs_inner(x, y).re).sum()
}

pub(crate) fn baxpy(target: &mut [ComplexMatrix], coeff: f64, source: &[ComplexMatrix]) {
    for (t, s) in target.iter_mut().zip(source) {
        *t += s * c64(coeff, 0.0);
    }
}

/// Eigendecomposition of a (numerically) Hermitian matrix, ascending.
pub(crate) fn eigh(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let sym = (m + m.adjoint()) * c64(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        values.push(eig.eigenvalues[i]);
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// `V f(Λ) V*` from an eigendecomposition.
pub(crate) fn eig_map(values: &[f64], vectors: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let col = scaled.column(k) * c64(f(v), 0.0);
        scaled.set_column(k, &col);
    }
    scaled * vectors.adjoint()
}

/// Trace of the positive part, `Σ max(λ, 0)`.
pub(crate) fn positive_part_trace(m: &ComplexMatrix) -> f64 {
    eigh(m).0.iter().map(|&v| v.max(0.0)).sum()
}

pub(crate) fn solve_blocks(p: &BlockProblem) -> BlockSolution {
    let fail = |diag: String| BlockSolution {
        x: p.x_init.clone(),
        objective_value: bdot(&p.objective, &p.x_init),
        dual_bound: f64::INFINITY,
        constraint_residual: f64::NAN,
        status: SolveStatus::NumericalFailure,
        iterations: 0,
        diagnostics: diag,
    };
    let rows = match realify(&p.constraints) {
        Ok(r) => r,
        Err(d) => return fail(d),
    };
    let system = match orthonormalize(&p.dims, &rows) {
        Ok(s) => s,
        Err(d) => return fail(d),
    };
    super::ipm::run(p, &system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_complex_matrix;

    #[test]
    fn realify_agrees_with_direct_complex_evaluation() {
        // For random non-Hermitian A and Hermitian X, the two real rows must
        // reproduce the real and imaginary parts of ⟨A, X⟩.
        let a = random_complex_matrix(3, 3, 81);
        let g = random_complex_matrix(3, 3, 82);
        let x = &g * g.adjoint();
        let complex_value = hs_inner(&a, &x);
        let rows = realify(&[BlockConstraint {
            terms: vec![(0, a)],
            rhs: Complex64::ZERO,
        }])
        .unwrap();
        assert_eq!(rows.len(), 2);
        let re = hs_inner(&rows[0].terms[0].1, &x).re;
        let im = -hs_inner(&rows[1].terms[0].1, &x).re;
        assert!((complex_value.re - re).abs() < 1e-12);
        assert!((complex_value.im - im).abs() < 1e-12);
    }

    #[test]
    fn realify_flags_zero_rows_with_nonzero_rhs() {
        let con = BlockConstraint {
            terms: vec![(0, ComplexMatrix::zeros(2, 2))],
            rhs: c64(1.0, 0.0),
        };
        assert!(realify(&[con]).is_err());
    }

    #[test]
    fn realify_keeps_single_row_for_hermitian_constraints() {
        let con = BlockConstraint {
            terms: vec![(0, ComplexMatrix::identity(2, 2))],
            rhs: c64(1.0, 0.0),
        };
        let rows = realify(&[con]).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn orthonormalize_drops_duplicates_and_keeps_consistency() {
        let dims = [2];
        let eye = RealRow {
            terms: vec![(0, ComplexMatrix::identity(2, 2))],
            rhs: 1.0,
        };
        let eye_scaled = RealRow {
            terms: vec![(0, ComplexMatrix::identity(2, 2) * c64(2.0, 0.0))],
            rhs: 2.0,
        };
        let out = orthonormalize(&dims, &[eye, eye_scaled]).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.dropped, 1);
        // A scaled duplicate with a contradictory right-hand side must fail.
        let eye = RealRow {
            terms: vec![(0, ComplexMatrix::identity(2, 2))],
            rhs: 1.0,
        };
        let bad = RealRow {
            terms: vec![(0, ComplexMatrix::identity(2, 2) * c64(2.0, 0.0))],
            rhs: 5.0,
        };
        assert!(orthonormalize(&dims, &[eye, bad]).is_err());
    }

    #[test]
    fn orthonormalized_rows_have_unit_norm_and_orthogonality() {
        let dims = [2, 3];
        let mut rows = Vec::new();
        for s in 0..6u64 {
            rows.push(RealRow {
                terms: vec![
                    (0, {
                        let g = random_complex_matrix(2, 2, 100 + s);
                        &g + g.adjoint()
                    }),
                    (1, {
                        let g = random_complex_matrix(3, 3, 200 + s);
                        &g + g.adjoint()
                    }),
                ],
                rhs: s as f64,
            });
        }
        let out = orthonormalize(&dims, &rows).unwrap();
        assert_eq!(out.embedded.len(), 6);
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((out.embedded[i].dot(&out.embedded[j]) - want).abs() < 1e-10);
            }
        }
        // Matrix form and embedded form represent the same functional.
        let g = random_complex_matrix(2, 2, 300);
        let x0 = &g * g.adjoint();
        let g = random_complex_matrix(3, 3, 301);
        let x1 = &g * g.adjoint();
        let x = [x0, x1];
        let offsets = block_offsets(&dims);
        let xe = {
            let mut v = DVector::zeros(offsets[2]);
            for (b, m) in x.iter().enumerate() {
                let e = crate::hermitian::real_embed(m).unwrap();
                v.rows_mut(offsets[b], e.len()).copy_from(&e);
            }
            v
        };
        for k in 0..6 {
            let via_mat = bdot(&out.rows[k], &x);
            let via_vec = out.embedded[k].dot(&xe);
            assert!((via_mat - via_vec).abs() < 1e-10);
        }
    }
}
