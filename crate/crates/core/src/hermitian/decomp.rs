//! Spectral decompositions and the constructions built on them: Jordan
//! splitting into positive and negative parts, operator square roots,
//! fidelity, purification, and the unitary connecting two purifications of
//! the same state.

use super::matrix::{c64, trace_norm, ComplexMatrix, ComplexVector};
use super::validated::HermitianMatrix;
use crate::error::{Error, Result};
use crate::tol;

/// Eigensystem of a Hermitian matrix with eigenvalues sorted ascending and
/// eigenvectors as the matching columns of a unitary.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V diag(values) V*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            let col = scaled.column(k) * c64(v, 0.0);
            scaled.set_column(k, &col);
        }
        scaled * self.vectors.adjoint()
    }

    /// Applies `f` to each eigenvalue and rebuilds.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mapped = HermitianEigen {
            values: self.values.iter().map(|&v| f(v)).collect(),
            vectors: self.vectors.clone(),
        };
        mapped.reconstruct()
    }
}

pub fn sorted_hermitian_eigen(h: &HermitianMatrix) -> Result<HermitianEigen> {
    let n = h.dim();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = (**h).clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("hermitian eigenvalues are finite")
    });
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &idx) in order.iter().enumerate() {
        values.push(eig.eigenvalues[idx]);
        vectors.set_column(k, &eig.eigenvectors.column(idx));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Splits a Hermitian matrix into `(pos, neg)` with `h = pos - neg`, both
/// positive semidefinite with orthogonal supports.
pub fn jordan_decompose(h: &HermitianMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let eig = sorted_hermitian_eigen(h)?;
    let pos = eig.map(|v| v.max(0.0));
    let neg = eig.map(|v| (-v).max(0.0));
    Ok((pos, neg))
}

/// Replaces negative eigenvalues by zero, yielding the nearest positive
/// semidefinite matrix in Frobenius distance.
pub fn psd_clamp(h: &HermitianMatrix) -> Result<ComplexMatrix> {
    Ok(sorted_hermitian_eigen(h)?.map(|v| v.max(0.0)))
}

/// Square root of a positive semidefinite matrix. Eigenvalues below
/// `-TOL_PSD` are rejected; small negatives from roundoff are clamped to 0.
pub fn psd_sqrt(h: &HermitianMatrix) -> Result<ComplexMatrix> {
    let eig = sorted_hermitian_eigen(h)?;
    if let Some(&min) = eig.values.first() {
        if min < -tol::TOL_PSD {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tolerance: tol::TOL_PSD,
            });
        }
    }
    Ok(eig.map(|v| v.max(0.0).sqrt()))
}

/// Fidelity of two positive semidefinite matrices: the trace norm of
/// `sqrt(x) sqrt(y)`. For density matrices this lands in `[0, 1]`, with 1
/// exactly when the states coincide.
pub fn fidelity(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension(format!(
            "fidelity: dimensions {} and {} differ",
            x.dim(),
            y.dim()
        )));
    }
    let sx = psd_sqrt(x)?;
    let sy = psd_sqrt(y)?;
    Ok(trace_norm(&(&sx * &sy)))
}

/// Views a bipartite state vector on `sys ⊗ env` as the `sys_dim × env_dim`
/// coefficient matrix `M[s, e] = v[s * env_dim + e]`.
pub(crate) fn vector_as_matrix(
    v: &ComplexVector,
    sys_dim: usize,
    env_dim: usize,
) -> Result<ComplexMatrix> {
    if v.len() != sys_dim * env_dim {
        return Err(Error::Dimension(format!(
            "state of length {} cannot split as {sys_dim} x {env_dim}",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(sys_dim, env_dim, |s, e| {
        v[s * env_dim + e]
    }))
}

/// Purifies a positive semidefinite matrix into a vector on `sys ⊗ env`
/// (system factor most significant). The environment must have room for the
/// rank of the input; the result has squared norm equal to the input's
/// trace.
pub fn purify(rho: &HermitianMatrix, env_dim: usize) -> Result<ComplexVector> {
    let eig = sorted_hermitian_eigen(rho)?;
    if let Some(&min) = eig.values.first() {
        if min < -tol::TOL_PSD {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tolerance: tol::TOL_PSD,
            });
        }
    }
    let max = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = max * tol::TOL_RANK_REL;
    let kept: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > cutoff)
        .collect();
    if kept.len() > env_dim {
        return Err(Error::PurificationImpossible {
            env_dim,
            rank: kept.len(),
        });
    }
    let d = rho.dim();
    let mut out = ComplexVector::zeros(d * env_dim);
    for (e, &k) in kept.iter().enumerate() {
        let w = eig.values[k].sqrt();
        for s in 0..d {
            out[s * env_dim + e] += eig.vectors[(s, k)] * c64(w, 0.0);
        }
    }
    Ok(out)
}

/// Given two vectors on `sys ⊗ env` with the same reduced state on `sys`,
/// returns the unitary `U` on `env` with `(I ⊗ U) psi ≈ phi`. Fails with
/// [`Error::ReducedStateMismatch`] if the reduced states differ by more than
/// `tol_match` in trace norm, since no such unitary can then exist.
pub fn connecting_unitary(
    psi: &ComplexVector,
    phi: &ComplexVector,
    sys_dim: usize,
    env_dim: usize,
    tol_match: f64,
) -> Result<ComplexMatrix> {
    let mp = vector_as_matrix(psi, sys_dim, env_dim)?;
    let mq = vector_as_matrix(phi, sys_dim, env_dim)?;
    let gap = &mp * mp.adjoint() - &mq * mq.adjoint();
    let distance = trace_norm(&gap);
    if distance > tol_match {
        return Err(Error::ReducedStateMismatch { distance, tol_match });
    }
    // (I ⊗ U) psi has coefficient matrix Mp U^T, so we want the unitary W
    // minimizing ‖Mp W - Mq‖_F and then U = W^T. The minimizer is the
    // unitary polar factor of Mp* Mq.
    let svd = (mp.adjoint() * &mq).svd(true, true);
    let u = svd.u.ok_or(Error::Precondition("svd did not return u".into()))?;
    let v_t = svd
        .v_t
        .ok_or(Error::Precondition("svd did not return v_t".into()))?;
    let w = u * v_t;
    Ok(w.transpose())
}
