//! Numeric tolerances shared across the crate.
//!
//! Every validated wrapper and every solver contract measures against the
//! constants below, so a change here is a change to the crate's contracts.
//! The values are deliberate: construction-time checks (`TOL_HERM`,
//! `TOL_PSD`, `TOL_TRACE`, `TOL_UNITARY`) sit a little above accumulated
//! rounding from dense eigen/SVD passes at desk-scale dimensions, while
//! `TOL_CONSISTENCY` leaves room for an interior-point solver to land near
//! the feasible affine subspace without false alarms.

/// Maximum entrywise deviation |A - A*| accepted as Hermitian.
pub const TOL_HERM: f64 = 1e-10;

/// Most-negative eigenvalue accepted as positive semidefinite.
pub const TOL_PSD: f64 = 1e-9;

/// Maximum |tr(rho) - 1| accepted for a density matrix.
pub const TOL_TRACE: f64 = 1e-9;

/// Maximum entrywise deviation |U*U - I| accepted as unitary.
pub const TOL_UNITARY: f64 = 1e-9;

/// Maximum consistency residual accepted when validating a transcript.
pub const TOL_CONSISTENCY: f64 = 1e-7;

/// Default tolerance for reduced-state agreement in `connecting_unitary`.
pub const TOL_MATCH_DEFAULT: f64 = 1e-6;

/// Relative singular/eigenvalue cutoff used for numerical rank decisions.
pub const TOL_RANK_REL: f64 = 1e-12;

/// Feasibility tolerance for an SDP solve at accuracy `epsilon`:
/// min(1e-8, epsilon / 100).
pub fn sdp_feasibility(epsilon: f64) -> f64 {
    (epsilon / 100.0).min(1e-8)
}
