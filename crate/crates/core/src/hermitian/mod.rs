//! Dense complex linear algebra over labelled tensor factors.

mod decomp;
mod embed;
mod layout;
mod matrix;
mod validated;

pub use decomp::{
    connecting_unitary, fidelity, jordan_decompose, psd_clamp, psd_sqrt, purify,
    sorted_hermitian_eigen,
};
pub(crate) use decomp::vector_as_matrix;
pub use embed::{real_embed, real_embed_dim, real_unembed, RealVector};
pub use layout::{ground_and_projectors, ground_state, SpaceLayout};
pub use matrix::{
    c64, check_finite, hs_inner, kron, round_to_bits, spectral_norm, trace_norm, ComplexMatrix,
    ComplexVector,
};
pub use validated::{DensityMatrix, HermitianMatrix, UnitaryMatrix};
