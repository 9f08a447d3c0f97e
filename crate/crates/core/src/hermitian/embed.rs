//! Isometric embedding of Hermitian matrices into real vectors.
//!
//! The map sends an `n × n` Hermitian matrix to a length `n²` real vector
//! while preserving the Hilbert–Schmidt inner product: diagonal entries go in
//! directly, each strictly-upper entry contributes `√2·Re` and `√2·Im`. The
//! ellipsoid method runs over these coordinates, so cuts computed on matrices
//! translate to cuts on vectors with the same geometry.

use nalgebra::DVector;

use super::matrix::{c64, ComplexMatrix};
use crate::error::{Error, Result};

pub type RealVector = DVector<f64>;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Length of the embedding of an `n × n` Hermitian matrix.
pub fn real_embed_dim(n: usize) -> usize {
    n * n
}

/// Embeds a Hermitian matrix; only the diagonal and strict upper triangle
/// are read, so the caller's lower triangle is ignored rather than checked.
pub fn real_embed(h: &ComplexMatrix) -> Result<RealVector> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "real_embed: expected square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let n = h.nrows();
    let mut out = RealVector::zeros(real_embed_dim(n));
    let mut k = 0;
    for i in 0..n {
        out[k] = h[(i, i)].re;
        k += 1;
        for j in (i + 1)..n {
            out[k] = SQRT_2 * h[(i, j)].re;
            out[k + 1] = SQRT_2 * h[(i, j)].im;
            k += 2;
        }
    }
    Ok(out)
}

/// Inverse of [`real_embed`] for an `n × n` matrix.
pub fn real_unembed(v: &RealVector, n: usize) -> Result<ComplexMatrix> {
    if v.len() != real_embed_dim(n) {
        return Err(Error::Dimension(format!(
            "real_unembed: vector of length {} does not encode a {n}x{n} matrix",
            v.len()
        )));
    }
    let mut out = ComplexMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        out[(i, i)] = c64(v[k], 0.0);
        k += 1;
        for j in (i + 1)..n {
            let z = c64(v[k] / SQRT_2, v[k + 1] / SQRT_2);
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
            k += 2;
        }
    }
    Ok(out)
}
