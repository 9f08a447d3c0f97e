//! Solvers for short quantum refereed games at desk scale.
//!
//! The crate computes optimal prover values for quantum interactive proofs
//! via a transcript-consistency semidefinite program, decides short refereed
//! games (one bout of competing-prover interaction) with an ellipsoid method
//! driven by a separation oracle, and constructs measurements that
//! distinguish convex sets of quantum states.
//!
//! Organization:
//!
//! * [`hermitian`] — dense complex matrices over labelled tensor factors:
//!   Kronecker products, partial traces, operator lifts, purifications,
//!   Jordan decompositions, the real isometric embedding.
//! * [`sdp`] — a primal-dual interior-point solver for equality-constrained
//!   semidefinite maximization with certified dual bounds.
//! * [`transcript`] — consistency systems over round sequences, the
//!   prover/transcript correspondence, and the optimal-value reduction.
//! * [`channel`] — mixed-state circuits in Stinespring form, image-distance
//!   computation, and the close-images promise problem.
//! * [`distinguish`] — Helstrom and set-separating POVMs.
//! * [`game`] — competing-prover verifiers, the separation oracle, the
//!   ellipsoid feasibility loop, and the accept/reject decision procedure.
//! * [`harness`] — game simulation, prover search, saddle estimation,
//!   parallel repetition, and the close-images verifier construction.
//!
//! The `parallel` feature (default on) runs search restarts and batch sweeps
//! on rayon; disabling it falls back to the identical sequential code path.

pub mod channel;
pub mod distinguish;
pub mod error;
pub mod game;
pub mod harness;
pub mod hermitian;
pub mod sdp;
pub mod tol;
pub mod transcript;

mod par;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
