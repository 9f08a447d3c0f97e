//! Support compression for the transcript optimization.
//!
//! The stacked consistency SDP has one block per snapshot, each of dimension
//! dim(F)·dim(G). Most of that space is unreachable: the kept-factor marginal
//! of any consistent snapshot is supported inside a subspace determined by
//! forward evolution alone. Concretely, with `τ₁ = Tr_G(A₀ X₀ A₀*)` and
//! `σ_k = Tr_G(A_{k-1} (P_{k-1} ⊗ I) A_{k-1}*)` (P the projector onto the
//! previous support), every feasible `X_k` satisfies
//! `supp(Tr_G X_k) ⊆ supp(σ_k) =: S_k`, and a PSD matrix whose kept marginal
//! lives in `S_k` is itself supported in `S_k ⊗ G`.
//!
//! Restricting each block to its reachable subspace is therefore lossless,
//! and it is what makes the solver usable as an inner routine: a one-qutrit
//! message after a rank-one opening collapses a 24-dimensional block to
//! dimension 3. All the data of the reduced problem is expressed through the
//! isometries `B_k : S_k → F` (tall matrices of orthonormal support columns)
//! and the compressed rounds `Ã_k = A_k (B_k ⊗ I)`:
//!
//! * interface `k = 1`:  ⟨E^{ij} ⊗ I, Y₁⟩ = (B₁* τ₁ B₁)[i,j]
//! * interface `k ≥ 2`:  ⟨E^{ij} ⊗ I, Y_k⟩ = ⟨Ã*((b_i b_j*) ⊗ I)Ã, Y_{k-1}⟩
//! * objective:          ⟨Ã_r* Ã_r, Y_r⟩
//!
//! where `E^{ij}` runs over the compressed kept basis with `i ≤ j` (the
//! `j < i` constraints are adjoints of these and hold automatically for
//! Hermitian blocks), and `b_i` is the i-th column of `B_k`. Uncompressed
//! marginal components carry no weight: a PSD matrix with zero diagonal
//! block has zero off-diagonal block too, so pinning the `S_k × S_k` corner
//! of the marginal equality pins all of it.

use num_complex::Complex64;

use crate::error::Result;
use crate::hermitian::{
    c64, kron, sorted_hermitian_eigen, ComplexMatrix, HermitianMatrix,
};
use crate::sdp::{BlockConstraint, BlockProblem};
use crate::tol;

use super::{feasible_bound, trivial_snapshots, RoundSequence};

pub(crate) struct CompressedOpt {
    pub problem: BlockProblem,
    /// `B_k` for k = 1..r: orthonormal support columns, dim(F) × s_k.
    isometries: Vec<ComplexMatrix>,
    dim_g: usize,
}

impl CompressedOpt {
    /// Expands solved blocks back to full snapshots on F ⊗ G.
    pub fn lift(&self, blocks: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
        let eye_g = ComplexMatrix::identity(self.dim_g, self.dim_g);
        self.isometries
            .iter()
            .zip(blocks)
            .map(|(b, y)| {
                let lift = kron(b, &eye_g);
                &lift * y * lift.adjoint()
            })
            .collect()
    }
}

/// Orthonormal eigenbasis of the numerically nonzero part of a PSD matrix.
/// The relative cutoff errs toward keeping borderline directions: keeping an
/// extra column only shrinks the compression, while dropping a live one
/// would cut feasible points.
fn support_basis(sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = sorted_hermitian_eigen(&HermitianMatrix::new(sigma.clone())?)?;
    let max = eig.values.last().copied().unwrap_or(0.0);
    let cutoff = max * tol::TOL_RANK_REL;
    let kept: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > cutoff && eig.values[k] > 0.0)
        .collect();
    let n = sigma.nrows();
    Ok(ComplexMatrix::from_fn(n, kept.len(), |i, c| {
        eig.vectors[(i, kept[c])]
    }))
}

/// `E^{ij} ⊗ I_g` on a compressed block of kept dimension `s`.
fn eij_kron_ig(s: usize, dg: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(s * dg, s * dg);
    for g in 0..dg {
        m[(i * dg + g, j * dg + g)] = c64(1.0, 0.0);
    }
    m
}

/// Builds the support-compressed block SDP for the transcript optimization.
/// Returns `None` when some reachable subspace is empty — the rounds
/// annihilate the initial state entirely, so the zero transcript is the only
/// consistent one and the optimum is 0 without any solve.
pub(crate) fn compressed_opt_problem(
    rounds: &RoundSequence,
    epsilon: f64,
) -> Result<Option<CompressedOpt>> {
    let r = rounds.r();
    debug_assert!(r >= 1);
    let dg = rounds.dim_g();
    let eye_g = ComplexMatrix::identity(dg, dg);
    let a = rounds.matrices();

    let trivial = trivial_snapshots(rounds);
    let tau1 = rounds.trace_g(&trivial[0])?;

    // Reachable supports and compressed rounds, forward pass.
    let mut isometries: Vec<ComplexMatrix> = Vec::with_capacity(r);
    let mut compressed: Vec<ComplexMatrix> = Vec::with_capacity(r);
    let b1 = support_basis(&tau1)?;
    if b1.ncols() == 0 {
        return Ok(None);
    }
    compressed.push(&a[1] * kron(&b1, &eye_g));
    isometries.push(b1);
    for k in 2..=r {
        let prev = &compressed[k - 2];
        let sigma = rounds.trace_g(&(prev * prev.adjoint()))?;
        let bk = support_basis(&sigma)?;
        if bk.ncols() == 0 {
            return Ok(None);
        }
        compressed.push(&a[k] * kron(&bk, &eye_g));
        isometries.push(bk);
    }

    let dims: Vec<usize> = isometries.iter().map(|b| b.ncols() * dg).collect();

    let mut constraints = Vec::new();
    let s1 = isometries[0].ncols();
    let tau_c = isometries[0].adjoint() * &tau1 * &isometries[0];
    for i in 0..s1 {
        for j in i..s1 {
            constraints.push(BlockConstraint {
                terms: vec![(0, eij_kron_ig(s1, dg, i, j))],
                rhs: tau_c[(i, j)],
            });
        }
    }
    for k in 2..=r {
        let bk = &isometries[k - 1];
        let sk = bk.ncols();
        let a_prev = &compressed[k - 2];
        // Slices (b_i ⊗ I)* Ã of the previous compressed round; the marginal
        // functional for (i, j) is then the product M_i* M_j.
        let slices: Vec<ComplexMatrix> = (0..sk)
            .map(|i| {
                let bi = ComplexMatrix::from_fn(bk.nrows(), 1, |f, _| bk[(f, i)]);
                kron(&bi, &eye_g).adjoint() * a_prev
            })
            .collect();
        for i in 0..sk {
            for j in i..sk {
                let pull = slices[i].adjoint() * &slices[j];
                constraints.push(BlockConstraint {
                    terms: vec![
                        (k - 1, eij_kron_ig(sk, dg, i, j)),
                        (k - 2, -pull),
                    ],
                    rhs: Complex64::ZERO,
                });
            }
        }
    }

    let mut objective: Vec<ComplexMatrix> =
        dims.iter().map(|&d| ComplexMatrix::zeros(d, d)).collect();
    let last = &compressed[r - 1];
    objective[r - 1] = last.adjoint() * last;

    let x_init: Vec<ComplexMatrix> = isometries
        .iter()
        .zip(&trivial)
        .map(|(b, x)| {
            let lift = kron(b, &eye_g);
            lift.adjoint() * x * lift
        })
        .collect();

    let problem = BlockProblem {
        dims,
        objective,
        constraints,
        x_init,
        bound_b: feasible_bound(rounds),
        epsilon,
    };
    Ok(Some(CompressedOpt {
        problem,
        isometries,
        dim_g: dg,
    }))
}
