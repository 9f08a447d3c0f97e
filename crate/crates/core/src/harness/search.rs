//! Brute-force prover optimization and the alternating saddle estimate.
//!
//! The searcher never touches the SDP machinery: provers are parameterized
//! as `U = exp(iH)` with `H` Hermitian, the objective is evaluated by direct
//! state-vector simulation, and the optimizer is plain coordinate descent
//! with a shrinking step and random restarts. The found value is a lower
//! bound on the true optimum — nothing more — which is exactly what an
//! independent cross-check of the solvers needs to be.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::game::{
    no_view_rounds, qrg_best_no_response, qrg_value_given_yes, yes_view_rounds, DqipVerifier,
};
use crate::hermitian::{
    c64, sorted_hermitian_eigen, ComplexMatrix, HermitianMatrix, SpaceLayout, UnitaryMatrix,
};
use crate::par;
use crate::transcript::{simulate_prover_value, RoundSequence};

use super::RunConfig;

/// Objective gains below this don't count as progress; keeps the descent
/// from chasing rounding noise at full step size forever.
const IMPROVEMENT_FLOOR: f64 = 1e-12;
/// Step-size decay applied after a full cycle without progress.
const STEP_SHRINK: f64 = 0.6;
/// Step size below which a restart is considered converged.
const STEP_FLOOR: f64 = 1e-9;
/// Initial coordinate step, in generator (radian-like) units.
const STEP_START: f64 = 0.5;
/// Random restarts draw each generator entry uniformly from
/// `±RESTART_SPREAD/2`.
const RESTART_SPREAD: f64 = 1.6;

/// Which prover the search plays; the other side's strategy stays fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Yes,
    No,
}

/// Best play found by [`search_prover`]: one move per verifier round, the
/// private environment they act on, and the achieved objective — acceptance
/// probability for [`Role::Yes`], rejection probability for [`Role::No`].
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub prover: Vec<UnitaryMatrix>,
    pub env: SpaceLayout,
    pub value: f64,
}

/// Locally optimizes one prover of `verifier` against a fixed opponent.
///
/// For [`Role::Yes`] the opponent is a no-prover (`r₂` or `r₁+r₂` moves on
/// the no-message factors tensor `opponent_env`) and the search maximizes
/// acceptance; for [`Role::No`] the opponent is a yes-prover (`r₁` or
/// `r₁+r₂` moves) and the search maximizes rejection. The searched prover
/// plays the interleaved game: one move before every verifier round.
///
/// Runs with equal inputs and equal configs return identical outcomes bit
/// for bit; restarts fan out over threads when the `parallel` feature is on
/// without affecting the result.
pub fn search_prover(
    verifier: &DqipVerifier,
    role: Role,
    opponent: &[UnitaryMatrix],
    opponent_env: &SpaceLayout,
    config: &RunConfig,
) -> Result<SearchOutcome> {
    let rounds = view_rounds(verifier, role, opponent, opponent_env)?;
    best_over_provers(&rounds, config, false)
}

/// Always-sequential twin of [`search_prover`]: same inputs, same outputs,
/// restarts on one thread. Exists so the benchmark suite can compare the two
/// execution modes within a single build.
pub fn search_prover_seq(
    verifier: &DqipVerifier,
    role: Role,
    opponent: &[UnitaryMatrix],
    opponent_env: &SpaceLayout,
    config: &RunConfig,
) -> Result<SearchOutcome> {
    let rounds = view_rounds(verifier, role, opponent, opponent_env)?;
    best_over_provers(&rounds, config, true)
}

fn view_rounds(
    verifier: &DqipVerifier,
    role: Role,
    opponent: &[UnitaryMatrix],
    opponent_env: &SpaceLayout,
) -> Result<RoundSequence> {
    match role {
        Role::Yes => yes_view_rounds(verifier, opponent, opponent_env),
        Role::No => no_view_rounds(verifier, opponent, opponent_env),
    }
}

/// One alternation of [`saddle_value`]: the rejection an exact best response
/// achieves against the yes-prover entering the sweep, then the acceptance
/// the search reaches against that fixed response.
#[derive(Debug, Clone, Copy)]
pub struct SaddleSweep {
    pub exact_rejection: f64,
    pub searched_acceptance: f64,
}

/// Result of the alternating best-response estimate.
#[derive(Debug, Clone)]
pub struct SaddleReport {
    /// Exact worst-case rejection of the final yes-prover — what the best
    /// possible opponent does to it, solved to the configured accuracy.
    /// This certifies the yes side: the reported prover really guarantees
    /// `1 − estimate` acceptance against everything.
    pub estimate: f64,
    pub yes_prover: Vec<UnitaryMatrix>,
    pub yes_env: SpaceLayout,
    pub trace: Vec<SaddleSweep>,
}

/// Heuristic min-max estimate by alternating best responses: the no side
/// replies exactly (optimal-value solve plus prover extraction), the yes
/// side by local search. No convergence is claimed — the trace exposes any
/// oscillation — but the returned estimate is always exact *for the prover
/// it reports*, so it upper-bounds the game's min-max rejection value.
pub fn saddle_value(verifier: &DqipVerifier, config: &RunConfig) -> Result<SaddleReport> {
    let my_dim = verifier
        .layout()
        .dim_of_all(&verifier.yes_message_labels())?;
    let mut yes_env = SpaceLayout::single(fresh_label(verifier.layout(), "mem"), 1);
    let mut yes: Vec<UnitaryMatrix> = (0..verifier.r1())
        .map(|_| UnitaryMatrix::new(ComplexMatrix::identity(my_dim, my_dim)))
        .collect::<Result<_>>()?;

    let mut trace = Vec::with_capacity(config.sweeps);
    for sweep in 0..config.sweeps.max(1) {
        let (no, no_env, exact_rejection) =
            qrg_best_no_response(verifier, &yes, &yes_env, config.epsilon)?;
        let sweep_config = RunConfig {
            seed: config
                .seed
                .wrapping_add((sweep as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..config.clone()
        };
        let found = search_prover(verifier, Role::Yes, &no, &no_env, &sweep_config)?;
        trace.push(SaddleSweep {
            exact_rejection,
            searched_acceptance: found.value,
        });
        yes = found.prover;
        yes_env = found.env;
    }
    let estimate = qrg_value_given_yes(verifier, &yes, &yes_env, config.epsilon)?;
    Ok(SaddleReport {
        estimate,
        yes_prover: yes,
        yes_env,
        trace,
    })
}

/// A factor label not present in `layout`.
pub(crate) fn fresh_label(layout: &SpaceLayout, base: &str) -> String {
    let mut label = base.to_string();
    while layout.labels().any(|l| l == label) {
        label.push('_');
    }
    label
}

/// Shared search core: maximizes the transcript value of `rounds` over
/// provers acting on the traced factors tensor a private environment.
///
/// The environment dimension defaults to the traced (message) dimension —
/// enough memory to keep one entangled partner per message degree of
/// freedom, which covers the optimum on every one-round game and every
/// fixture in this crate — and can be raised through the config when a
/// deeper game needs more.
fn best_over_provers(
    rounds: &RoundSequence,
    config: &RunConfig,
    sequential: bool,
) -> Result<SearchOutcome> {
    let env_dim = config.env_dim.unwrap_or_else(|| rounds.dim_g()).max(1);
    let env = SpaceLayout::single(fresh_label(rounds.layout(), "mem"), env_dim);
    let move_dim = rounds.dim_g() * env_dim;
    let restarts = config.restarts.max(1);

    let runs = {
        let run = |idx: usize| run_restart(rounds, &env, move_dim, config, idx);
        if sequential {
            par::map_indexed_seq(restarts, run)
        } else {
            par::map_indexed(restarts, run)
        }
    };

    let mut best: Option<(f64, Vec<UnitaryMatrix>)> = None;
    for run in runs {
        let (value, prover) = run?;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, prover));
        }
    }
    let (value, prover) = best.expect("restarts.max(1) ≥ 1 runs");
    Ok(SearchOutcome { prover, env, value })
}

/// One coordinate-descent run from a deterministic starting point: restart 0
/// is the identity prover, restart `i > 0` draws its generators from stream
/// `i` of the seeded RNG.
fn run_restart(
    rounds: &RoundSequence,
    env: &SpaceLayout,
    move_dim: usize,
    config: &RunConfig,
    restart: usize,
) -> Result<(f64, Vec<UnitaryMatrix>)> {
    let n_moves = rounds.r();
    let n_params = move_dim * move_dim;
    let mut params: Vec<Vec<f64>> = if restart == 0 {
        vec![vec![0.0; n_params]; n_moves]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(restart as u64);
        (0..n_moves)
            .map(|_| {
                (0..n_params)
                    .map(|_| (rng.random::<f64>() - 0.5) * RESTART_SPREAD)
                    .collect()
            })
            .collect()
    };

    let mut prover: Vec<UnitaryMatrix> = params
        .iter()
        .map(|p| unitary_from(p, move_dim))
        .collect::<Result<_>>()?;
    let mut value = simulate_prover_value(rounds, &prover, env)?;

    let mut step = STEP_START;
    for _ in 0..config.cycles {
        let mut improved = false;
        for mv in 0..n_moves {
            for k in 0..n_params {
                let center = params[mv][k];
                let mut best_offset = 0.0;
                let mut best_value = value;
                for offset in [step, -step] {
                    params[mv][k] = center + offset;
                    let trial = unitary_from(&params[mv], move_dim)?;
                    let saved = std::mem::replace(&mut prover[mv], trial);
                    let trial_value = simulate_prover_value(rounds, &prover, env)?;
                    prover[mv] = saved;
                    if trial_value > best_value + IMPROVEMENT_FLOOR {
                        best_value = trial_value;
                        best_offset = offset;
                    }
                }
                params[mv][k] = center + best_offset;
                if best_offset != 0.0 {
                    prover[mv] = unitary_from(&params[mv], move_dim)?;
                    value = best_value;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= STEP_SHRINK;
            if step < STEP_FLOOR {
                break;
            }
        }
    }
    Ok((value, prover))
}

/// `exp(iH)` for the Hermitian generator packed in `params`.
fn unitary_from(params: &[f64], m: usize) -> Result<UnitaryMatrix> {
    let eig = sorted_hermitian_eigen(&HermitianMatrix::new(generator(params, m))?)?;
    let mut phased = eig.vectors.clone();
    for (k, &lambda) in eig.values.iter().enumerate() {
        let col = phased.column(k) * c64(lambda.cos(), lambda.sin());
        phased.set_column(k, &col);
    }
    UnitaryMatrix::new(&phased * eig.vectors.adjoint())
}

/// Packs `m²` reals into an `m×m` Hermitian matrix: first the diagonal, then
/// re/im pairs for the upper triangle row by row.
fn generator(params: &[f64], m: usize) -> ComplexMatrix {
    debug_assert_eq!(params.len(), m * m);
    let mut h = ComplexMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        h[(i, i)] = c64(params[k], 0.0);
        k += 1;
    }
    for i in 0..m {
        for j in (i + 1)..m {
            h[(i, j)] = c64(params[k], params[k + 1]);
            h[(j, i)] = c64(params[k], -params[k + 1]);
            k += 2;
        }
    }
    h
}
