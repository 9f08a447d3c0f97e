//! Checked wrappers for the three matrix classes the solvers consume.
//!
//! Each constructor measures how far the input is from its class and rejects
//! it beyond the fixed tolerances in [`crate::tol`]; the wrapped value is the
//! cleaned-up representative (exactly Hermitian, trace exactly 1, the unitary
//! as given). Downstream code can then lean on these invariants instead of
//! re-checking.

use std::ops::Deref;

use super::matrix::{check_finite, ComplexMatrix};
use crate::error::{Error, Result};
use crate::tol;

fn require_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what}: expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Largest entrywise deviation from `m = m*`.
pub(crate) fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A matrix verified Hermitian (within `TOL_HERM`) and stored in exactly
/// symmetrized form `(m + m*) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        require_square(&m, "HermitianMatrix")?;
        check_finite(&m)?;
        let dev = hermitian_deviation(&m);
        if dev > tol::TOL_HERM {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: tol::TOL_HERM,
            });
        }
        Ok(Self((&m + m.adjoint()) * crate::hermitian::matrix::c64(0.5, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }
}

impl Deref for HermitianMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// A density matrix: Hermitian, eigenvalues at least `-TOL_PSD`, trace within
/// `TOL_TRACE` of 1. The stored matrix is symmetrized and rescaled to trace
/// exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let herm = HermitianMatrix::new(m)?;
        let eigs = super::decomp::sorted_hermitian_eigen(&herm)?;
        let min_eig = eigs.values.first().copied().unwrap_or(0.0);
        if min_eig < -tol::TOL_PSD {
            return Err(Error::NotPsd {
                min_eigenvalue: min_eig,
                tolerance: tol::TOL_PSD,
            });
        }
        let tr = herm.trace().re;
        if (tr - 1.0).abs() > tol::TOL_TRACE {
            return Err(Error::NotDensity {
                deviation: (tr - 1.0).abs(),
            });
        }
        let scaled = herm.into_inner() / crate::hermitian::matrix::c64(tr, 0.0);
        Ok(Self(scaled))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }
}

impl Deref for DensityMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// A matrix verified unitary: `‖U*U − I‖` entrywise within `TOL_UNITARY`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        require_square(&m, "UnitaryMatrix")?;
        check_finite(&m)?;
        let gram = m.adjoint() * &m;
        let eye = ComplexMatrix::identity(m.nrows(), m.ncols());
        let dev = (&gram - &eye)
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if dev > tol::TOL_UNITARY {
            return Err(Error::NotUnitary {
                deviation: dev,
                tolerance: tol::TOL_UNITARY,
            });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }
}

impl Deref for UnitaryMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}
