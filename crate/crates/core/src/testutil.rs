//! Seeded random fixtures shared by the unit tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hermitian::{c64, ComplexMatrix, ComplexVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed);
    DMatrix::from_fn(rows, cols, |_, _| {
        c64(r.sample(StandardNormal), r.sample(StandardNormal))
    })
}

/// Haar-distributed unitary via QR of a Gaussian matrix, with the phase
/// convention fixed so the R factor has a positive diagonal.
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let g = random_complex_matrix(n, n, seed);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::ONE
        };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    q
}

/// Random positive semidefinite matrix `G G*` (full rank almost surely).
pub fn random_psd(n: usize, seed: u64) -> ComplexMatrix {
    let g = random_complex_matrix(n, n, seed);
    &g * g.adjoint()
}

/// Random rank-`rank` density matrix.
pub fn random_density(n: usize, rank: usize, seed: u64) -> ComplexMatrix {
    let g = random_complex_matrix(n, rank, seed);
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}

/// Random unit vector.
pub fn random_state(n: usize, seed: u64) -> ComplexVector {
    let mut r = rng(seed);
    let mut v = ComplexVector::from_fn(n, |_, _| {
        c64(r.sample(StandardNormal), r.sample(StandardNormal))
    });
    let norm = v.norm();
    v /= c64(norm, 0.0);
    v
}
