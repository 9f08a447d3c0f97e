//! Conversions between provers (unitaries on the traced factor plus a
//! private environment) and the transcripts they generate.
//!
//! A prover with private space H turns the round matrices into a state
//! evolution on F ⊗ G ⊗ H: each round applies `A_i` on F ⊗ G and then the
//! prover's `U_{i+1}` on G ⊗ H, and the snapshot `X_{i+1}` is the state with
//! H traced out. Every transcript produced this way is consistent; the
//! converse direction recovers explicit unitaries from any consistent
//! transcript by purifying the snapshots and rotating the purifications into
//! one another, which only touches G ⊗ H because consecutive purifications
//! share their F-marginal.

use crate::error::{Error, Result};
use crate::hermitian::{
    connecting_unitary, ground_state, purify, ComplexMatrix, ComplexVector, SpaceLayout,
    UnitaryMatrix,
};
use crate::tol;

use super::{consistency_residual_of, RoundSequence, Transcript};

fn combined_layout(rounds: &RoundSequence, env_layout: &SpaceLayout) -> Result<SpaceLayout> {
    SpaceLayout::concat(&[rounds.layout(), env_layout])
}

fn check_prover_dims(
    rounds: &RoundSequence,
    prover: &[UnitaryMatrix],
    env_dim: usize,
) -> Result<()> {
    if prover.len() != rounds.r() {
        return Err(Error::Dimension(format!(
            "{} prover moves for {} rounds",
            prover.len(),
            rounds.r()
        )));
    }
    let want = rounds.dim_g() * env_dim;
    for (i, u) in prover.iter().enumerate() {
        if u.dim() != want {
            return Err(Error::Dimension(format!(
                "prover unitary {i} has dimension {}, expected {want}",
                u.dim()
            )));
        }
    }
    Ok(())
}

/// Labels the prover's factors act on: the traced factors of the rounds
/// followed by the environment factors, matching the tensor order the
/// prover unitaries are given in.
fn prover_labels<'a>(rounds: &'a RoundSequence, env_layout: &'a SpaceLayout) -> Vec<&'a str> {
    rounds
        .traced_labels()
        .into_iter()
        .chain(env_layout.labels())
        .collect()
}

/// Runs the rounds against an explicit prover and records the snapshots.
pub fn prover_to_transcript(
    rounds: &RoundSequence,
    prover: &[UnitaryMatrix],
    env_layout: &SpaceLayout,
) -> Result<Transcript> {
    let combined = combined_layout(rounds, env_layout)?;
    check_prover_dims(rounds, prover, env_layout.total_dim())?;
    let fg: Vec<&str> = rounds.layout().labels().collect();
    let gh = prover_labels(rounds, env_layout);
    let env: Vec<&str> = env_layout.labels().collect();

    let mut state = ground_state(&combined);
    let mut snapshots = Vec::with_capacity(rounds.r());
    for (i, u) in prover.iter().enumerate() {
        state = combined.apply_to_vector(&rounds.matrices()[i], &fg, &state)?;
        state = combined.apply_to_vector(u, &gh, &state)?;
        let full = &state * state.adjoint();
        let (snap, _) = combined.partial_trace(&full, &env)?;
        snapshots.push(snap);
    }
    Transcript::new(rounds, snapshots)
}

/// The acceptance value `‖A_r U_r A_{r-1} ⋯ U_1 A_0 · ground‖²` computed by
/// direct state-vector evolution — no optimization, no density matrices.
/// This is the independent route against which transcript values are
/// checked.
pub fn simulate_prover_value(
    rounds: &RoundSequence,
    prover: &[UnitaryMatrix],
    env_layout: &SpaceLayout,
) -> Result<f64> {
    let combined = combined_layout(rounds, env_layout)?;
    check_prover_dims(rounds, prover, env_layout.total_dim())?;
    let fg: Vec<&str> = rounds.layout().labels().collect();
    let gh = prover_labels(rounds, env_layout);

    let mut state = ground_state(&combined);
    for (i, u) in prover.iter().enumerate() {
        state = combined.apply_to_vector(&rounds.matrices()[i], &fg, &state)?;
        state = combined.apply_to_vector(u, &gh, &state)?;
    }
    state = combined.apply_to_vector(&rounds.matrices()[rounds.r()], &fg, &state)?;
    Ok(state.norm_squared())
}

fn flatten(m: &ComplexMatrix) -> ComplexVector {
    let (rows, cols) = m.shape();
    ComplexVector::from_fn(rows * cols, |k, _| m[(k / cols, k % cols)])
}

/// Recovers an explicit prover from a consistent transcript. The
/// environment dimension is the largest numerical rank among the snapshots,
/// which always suffices: a purification needs exactly rank-many
/// environment dimensions.
pub fn transcript_to_prover(
    rounds: &RoundSequence,
    transcript: &Transcript,
) -> Result<(Vec<UnitaryMatrix>, SpaceLayout)> {
    let r = rounds.r();
    if transcript.snapshots().len() != r {
        return Err(Error::Dimension(format!(
            "transcript has {} snapshots for {} prover moves",
            transcript.snapshots().len(),
            r
        )));
    }
    let residual = consistency_residual_of(
        rounds,
        transcript.snapshots().iter().map(|s| &**s),
    )?;
    if residual > tol::TOL_CONSISTENCY {
        return Err(Error::InconsistentTranscript {
            residual,
            tolerance: tol::TOL_CONSISTENCY,
        });
    }

    let d_fg = rounds.layout().total_dim();
    let env_dim = transcript
        .snapshots()
        .iter()
        .map(|x| numerical_rank(x))
        .max()
        .unwrap_or(1)
        .max(1);
    let env_layout = SpaceLayout::single(fresh_env_label(rounds), env_dim);

    // Ground state ⊗ ground environment, as a d_fg × env_dim coefficient
    // matrix (system index major, matching the purifier's convention).
    let mut carrier = ComplexMatrix::zeros(d_fg, env_dim);
    carrier[(0, 0)] = crate::hermitian::c64(1.0, 0.0);
    let mut prover = Vec::with_capacity(r);
    for i in 0..r {
        let pushed = &rounds.matrices()[i] * &carrier;
        let target = purify(transcript.snapshot(i), env_dim)?;
        let u = connecting_unitary(
            &flatten(&pushed),
            &target,
            rounds.dim_f(),
            rounds.dim_g() * env_dim,
            tol::TOL_MATCH_DEFAULT,
        )?;
        prover.push(UnitaryMatrix::new(u)?);
        carrier = crate::hermitian::vector_as_matrix(&target, d_fg, env_dim)?;
    }
    Ok((prover, env_layout))
}

fn numerical_rank(x: &crate::hermitian::HermitianMatrix) -> usize {
    let eig = match crate::hermitian::sorted_hermitian_eigen(x) {
        Ok(e) => e,
        Err(_) => return x.dim(),
    };
    let max = eig.values.last().copied().unwrap_or(0.0);
    let cutoff = max * tol::TOL_RANK_REL;
    eig.values.iter().filter(|&&v| v > cutoff && v > 0.0).count()
}

/// An environment label distinct from every factor label of the rounds.
fn fresh_env_label(rounds: &RoundSequence) -> String {
    let mut label = "env".to_string();
    while rounds.layout().labels().any(|l| l == label) {
        label.push('_');
    }
    label
}
