//! Raw complex matrices and the handful of scalar-valued operations used
//! everywhere else: Kronecker products, the Hilbert-Schmidt inner product,
//! the two dual norms, and fixed-point rounding.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, the working representation throughout the crate.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Dense complex (column) vector.
pub type ComplexVector = DVector<Complex64>;

/// Shorthand complex constructor.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Errors unless every entry of `m` is finite.
pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Kronecker product `a ⊗ b`.
///
/// The left operand indexes the most significant part of the result: the
/// `(i·rows(b) + k, j·cols(b) + l)` entry is `a[i,j] · b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Hilbert-Schmidt inner product `tr(a* b)`, conjugate-linear in `a`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    debug_assert_eq!(a.shape(), b.shape());
    let mut acc = Complex64::ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Sum of singular values (dual to [`spectral_norm`]).
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// Rounds every real and imaginary part to the nearest multiple of `2^-t`.
///
/// Entries move by at most `2^-(t+1)`, so the spectral norm moves by less
/// than `dim · 2^-(t+1)`. Requires `t <= 52` so the scale factor stays
/// exactly representable.
pub fn round_to_bits(m: &ComplexMatrix, t: u32) -> Result<ComplexMatrix> {
    if t > 52 {
        return Err(Error::Precondition(format!(
            "round_to_bits requires t <= 52, got {t}"
        )));
    }
    let scale = f64::powi(2.0, t as i32);
    let inv = 1.0 / scale;
    Ok(m.map(|z| c64((z.re * scale).round() * inv, (z.im * scale).round() * inv)))
}
