//! Running games end to end: exact simulation against explicit provers,
//! brute-force prover search, alternating saddle estimation, verifier
//! constructions (the close-images protocol, parallel repetition), and the
//! file formats the command-line tool reads and writes.
//!
//! Everything here sits on top of the exact machinery in [`crate::game`] and
//! [`crate::transcript`]; nothing in this module is an authority on values.
//! [`simulate`] is a direct state-vector evaluation used as an independent
//! check on the transcript pathway, and [`search_prover`] is a local
//! optimizer whose result is only ever a lower bound.

mod file;
mod games;
mod search;

pub use file::{GameFile, MatrixData, ProverFile};
pub use games::{
    build_close_images_verifier, coin_guessing_game, message_flip_game, parallel_repeat,
    VoteRule, GAME_DIM_CAP,
};
pub use search::{saddle_value, search_prover, search_prover_seq, Role, SaddleReport,
    SaddleSweep, SearchOutcome};

use crate::error::{Error, Result};
use crate::game::DqipVerifier;
use crate::hermitian::{c64, ground_state, ComplexMatrix, SpaceLayout, UnitaryMatrix};

/// Knobs shared by the search and saddle routines. Two runs with equal
/// configs and equal inputs produce identical outputs, bit for bit: every
/// random choice is drawn from a counter-mode stream derived from `seed`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Accuracy handed to inner optimal-value solves.
    pub epsilon: f64,
    /// Independent restarts of the local search; restart 0 always starts
    /// from the do-nothing prover, the rest from random generators.
    pub restarts: usize,
    /// Cap on coordinate-descent cycles per restart.
    pub cycles: usize,
    /// Alternating best-response sweeps in [`saddle_value`].
    pub sweeps: usize,
    /// Seed for all searched randomness.
    pub seed: u64,
    /// Private-environment dimension for searched provers. `None` matches
    /// it to the prover's message dimension — one entangled partner per
    /// message degree of freedom — which keeps the parameter count small
    /// and suffices on every fixture here; raise it when a deeper game
    /// calls for more memory.
    pub env_dim: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            restarts: 8,
            cycles: 120,
            sweeps: 4,
            seed: 0,
            env_dim: None,
        }
    }
}

/// Acceptance probability of one complete play of the game, by direct
/// state-vector evolution.
///
/// The composite is `V₀`, then for each round `i = 1..r` the no-prover's
/// move, the yes-prover's move, and verifier round `i`, with acceptance read
/// off the output factor at the end. Move lists may come in two lengths:
/// the yes-prover plays either `r₁` moves (its own phase, identity
/// elsewhere) or all `r = r₁ + r₂`; the no-prover either `r₂` (placed in
/// the no phase) or all `r`. Each move acts on that prover's message
/// factors tensor its own environment, so a prover cannot touch anything
/// outside its role no matter what matrices are supplied.
pub fn simulate(
    verifier: &DqipVerifier,
    yes_prover: &[UnitaryMatrix],
    yes_env: &SpaceLayout,
    no_prover: &[UnitaryMatrix],
    no_env: &SpaceLayout,
) -> Result<f64> {
    let r1 = verifier.r1();
    let r2 = verifier.r2();
    let r = r1 + r2;
    if yes_prover.len() != r1 && yes_prover.len() != r {
        return Err(Error::Dimension(format!(
            "yes-prover has {} moves; expected {r1} (yes phase only) or {r} (every round)",
            yes_prover.len()
        )));
    }
    if no_prover.len() != r2 && no_prover.len() != r {
        return Err(Error::Dimension(format!(
            "no-prover has {} moves; expected {r2} (no phase only) or {r} (every round)",
            no_prover.len()
        )));
    }

    let combined = SpaceLayout::concat(&[verifier.layout(), yes_env, no_env])?;
    let game_labels: Vec<&str> = verifier.layout().labels().collect();
    let yes_acting: Vec<&str> = verifier
        .yes_message_labels()
        .into_iter()
        .chain(yes_env.labels())
        .collect();
    let no_acting: Vec<&str> = verifier
        .no_message_labels()
        .into_iter()
        .chain(no_env.labels())
        .collect();
    let yes_dim = verifier.layout().dim_of_all(&verifier.yes_message_labels())?
        * yes_env.total_dim();
    let no_dim =
        verifier.layout().dim_of_all(&verifier.no_message_labels())? * no_env.total_dim();
    for u in yes_prover {
        if u.dim() != yes_dim {
            return Err(Error::Dimension(format!(
                "yes-prover move is {}-dimensional, yes-message ⊗ environment gives {yes_dim}",
                u.dim()
            )));
        }
    }
    for u in no_prover {
        if u.dim() != no_dim {
            return Err(Error::Dimension(format!(
                "no-prover move is {}-dimensional, no-message ⊗ environment gives {no_dim}",
                u.dim()
            )));
        }
    }

    // Move played in round i (1-based), or None where the short form pads
    // with identity.
    let yes_move = |i: usize| -> Option<&UnitaryMatrix> {
        if yes_prover.len() == r {
            Some(&yes_prover[i - 1])
        } else if i <= r1 {
            Some(&yes_prover[i - 1])
        } else {
            None
        }
    };
    let no_move = |i: usize| -> Option<&UnitaryMatrix> {
        if no_prover.len() == r {
            Some(&no_prover[i - 1])
        } else if i > r1 {
            Some(&no_prover[i - r1 - 1])
        } else {
            None
        }
    };
    let verifier_round = |i: usize| -> &UnitaryMatrix {
        if i <= r1 {
            &verifier.yes_rounds()[i]
        } else {
            &verifier.no_rounds()[i - r1 - 1]
        }
    };

    let mut state = ground_state(&combined);
    state = combined.apply_to_vector(&verifier.yes_rounds()[0], &game_labels, &state)?;
    for i in 1..=r {
        if let Some(n) = no_move(i) {
            state = combined.apply_to_vector(n, &no_acting, &state)?;
        }
        if let Some(y) = yes_move(i) {
            state = combined.apply_to_vector(y, &yes_acting, &state)?;
        }
        state = combined.apply_to_vector(verifier_round(i), &game_labels, &state)?;
    }

    let d_out = verifier.layout().dim_of(verifier.output_label())?;
    let mut accept_small = ComplexMatrix::identity(d_out, d_out);
    accept_small[(0, 0)] = c64(0.0, 0.0);
    let accepted =
        combined.apply_to_vector(&accept_small, &[verifier.output_label()], &state)?;
    Ok(accepted.norm_squared())
}

/// One-dimensional environment for provers that carry no private memory.
#[cfg(test)]
pub(crate) fn unit_env(label: &str) -> SpaceLayout {
    SpaceLayout::single(label, 1)
}

#[cfg(test)]
pub(crate) fn u(m: ComplexMatrix) -> UnitaryMatrix {
    UnitaryMatrix::new(m).unwrap()
}
