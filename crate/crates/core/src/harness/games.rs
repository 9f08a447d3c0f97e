//! Verifier constructions: the coin-flip protocol that turns a pair of
//! circuits into a refereed game, parallel repetition with a vote, and two
//! small fixture games used across the test and benchmark suites.

use crate::channel::CloseImagesInstance;
use crate::error::{Error, Result};
use crate::game::DqipVerifier;
use crate::hermitian::{c64, kron, ComplexMatrix, SpaceLayout, UnitaryMatrix};

/// Hard ceiling on the total dimension of any constructed game space.
/// Beyond this, dense rounds stop fitting in memory comfortably and every
/// solve degenerates into a coffee break; constructions refuse instead.
pub const GAME_DIM_CAP: usize = 1024;

/// How the repeated game aggregates its copies' outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoteRule {
    /// Accept iff every copy accepts.
    UnanimousAccept,
    /// Reject iff every copy rejects (accept iff any copy accepts).
    UnanimousReject,
}

/// The distinguishing game for a close-images instance.
///
/// The yes-prover prepares inputs in `x0` and `x1`; the verifier flips a
/// fair coin and runs circuit 0 on `x0` or circuit 1 on `x1`, leaving the
/// channel output in `chan`. The no-prover reads `chan`, writes a guess of
/// the coin into `b`, and the verifier accepts iff the guess is wrong. A
/// no-prover can force rejection exactly as often as it can tell the two
/// branch outputs apart: if the images of the circuits overlap the
/// yes-prover picks inputs with matching outputs and the guess is a blind
/// coin toss; if they are far apart every input pair leaves a readable
/// trace of the coin in `chan`.
pub fn build_close_images_verifier(instance: &CloseImagesInstance) -> Result<DqipVerifier> {
    let d_in = instance.q0.in_dim();
    let d_out = instance.q0.out_dim();
    let layout = SpaceLayout::new(vec![
        ("x0".to_string(), d_in),
        ("x1".to_string(), d_in),
        ("coin".to_string(), 2),
        ("env0".to_string(), instance.q0.env_dim()),
        ("env1".to_string(), instance.q1.env_dim()),
        ("out".to_string(), 2),
        ("b".to_string(), 2),
        ("chan".to_string(), d_out),
    ])?;
    let d = layout.total_dim();
    if d > GAME_DIM_CAP {
        return Err(Error::Precondition(format!(
            "close-images game needs dimension {d}, over the cap {GAME_DIM_CAP}"
        )));
    }

    // V₁: coin into superposition, then the coin-selected circuit. The two
    // branch unitaries touch disjoint inputs and ancillas but share `chan`,
    // and the orthogonal coin projectors keep the select unitary.
    let branch0 = layout.embed_lift(&proj(2, 0), &["coin"])?
        * layout.embed_lift(instance.q0.stinespring(), &["x0", "chan", "env0"])?;
    let branch1 = layout.embed_lift(&proj(2, 1), &["coin"])?
        * layout.embed_lift(instance.q1.stinespring(), &["x1", "chan", "env1"])?;
    let v1 = (branch0 + branch1) * layout.embed_lift(&hadamard(), &["coin"])?;

    // W₁: out ← b ⊕ coin, so the ground (reject) outcome is a correct guess.
    let w1 = layout.embed_lift(&cnot_pair(), &["coin", "out"])?
        * layout.embed_lift(&cnot_pair(), &["b", "out"])?;

    let eye = ComplexMatrix::identity(d, d);
    DqipVerifier::new(
        vec![UnitaryMatrix::new(eye)?, UnitaryMatrix::new(v1)?],
        vec![UnitaryMatrix::new(w1)?],
        layout,
        &["x0", "x1"],
        &["b", "chan"],
        "out",
    )
}

/// Plays `copies` independent instances of `verifier` side by side and
/// aggregates their output factors into a fresh `vote` qubit according to
/// `rule`.
///
/// Copy `c` of factor `ℓ` is labelled `ℓ~c`, and the repeated game groups
/// factors so each prover's message space is the product of its per-copy
/// message spaces (yes copies first, then the verifier-private copies and
/// the vote, then the no copies). Every verifier round is the tensor power
/// of the original round; the vote circuit rides on the last no round, so
/// the repeated game has exactly the original round structure.
pub fn parallel_repeat(
    verifier: &DqipVerifier,
    copies: usize,
    rule: VoteRule,
) -> Result<DqipVerifier> {
    if copies == 0 {
        return Err(Error::Precondition(
            "parallel repetition needs at least one copy".into(),
        ));
    }
    let d = verifier.layout().total_dim();
    let mut total = 2usize; // the vote qubit
    for _ in 0..copies {
        total = total
            .checked_mul(d)
            .filter(|&t| t <= GAME_DIM_CAP)
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "{copies} copies of a dimension-{d} game exceed the cap {GAME_DIM_CAP}"
                ))
            })?;
    }

    // Rounds are cheapest to build copy-major (plain Kronecker powers), but
    // the game wants message factors grouped by prover; build in the first
    // order, permute into the second.
    let mut interleaved_factors: Vec<(String, usize)> = Vec::new();
    for c in 0..copies {
        for (label, dim) in verifier.layout().factors() {
            interleaved_factors.push((copy_label(label, c), *dim));
        }
    }
    interleaved_factors.push(("vote".to_string(), 2));
    let interleaved = SpaceLayout::new(interleaved_factors)?;

    let yes_labels = verifier.yes_message_labels();
    let no_labels = verifier.no_message_labels();
    let copies_of = |labels: &[&str]| -> Vec<String> {
        labels
            .iter()
            .flat_map(|l| (0..copies).map(move |c| copy_label(l, c)))
            .collect()
    };
    let my: Vec<String> = copies_of(&yes_labels);
    let mn: Vec<String> = copies_of(&no_labels);
    let private: Vec<String> = verifier
        .layout()
        .labels()
        .filter(|l| !yes_labels.contains(l) && !no_labels.contains(l))
        .flat_map(|l| (0..copies).map(move |c| copy_label(l, c)))
        .collect();
    let order: Vec<&str> = my
        .iter()
        .map(String::as_str)
        .chain(private.iter().map(String::as_str))
        .chain(std::iter::once("vote"))
        .chain(mn.iter().map(String::as_str))
        .collect();
    let (map, grouped) = interleaved.permutation_to(&order)?;

    let lift_round = |u: &UnitaryMatrix| -> ComplexMatrix {
        let mut power = (**u).clone();
        for _ in 1..copies {
            power = kron(&power, u);
        }
        SpaceLayout::permute_matrix(&kron(&power, &ComplexMatrix::identity(2, 2)), &map)
    };

    let yes_rounds: Vec<UnitaryMatrix> = verifier
        .yes_rounds()
        .iter()
        .map(|u| UnitaryMatrix::new(lift_round(u)))
        .collect::<Result<_>>()?;
    let mut no_rounds: Vec<ComplexMatrix> =
        verifier.no_rounds().iter().map(lift_round).collect();

    // Flip the vote on the aggregate of the copies' output factors. Both
    // rules are a unitary select: flip on one subspace, idle on the rest.
    let out_dim = verifier.layout().dim_of(verifier.output_label())?;
    let per_copy = match rule {
        VoteRule::UnanimousAccept => {
            &ComplexMatrix::identity(out_dim, out_dim) - proj(out_dim, 0)
        }
        VoteRule::UnanimousReject => proj(out_dim, 0),
    };
    let mut all_copies = ComplexMatrix::identity(total, total);
    for c in 0..copies {
        let label = copy_label(verifier.output_label(), c);
        all_copies *= grouped.embed_lift(&per_copy, &[label.as_str()])?;
    }
    let flip = grouped.embed_lift(&pauli_x(), &["vote"])?;
    let eye = ComplexMatrix::identity(total, total);
    let tally = match rule {
        VoteRule::UnanimousAccept => &all_copies * &flip + (&eye - &all_copies),
        VoteRule::UnanimousReject => (&eye - &all_copies) * &flip + &all_copies,
    };
    let last = no_rounds.last_mut().expect("r₂ ≥ 1 rounds");
    *last = &tally * &*last;

    let my_refs: Vec<&str> = my.iter().map(String::as_str).collect();
    let mn_refs: Vec<&str> = mn.iter().map(String::as_str).collect();
    DqipVerifier::new(
        yes_rounds,
        no_rounds
            .into_iter()
            .map(UnitaryMatrix::new)
            .collect::<Result<_>>()?,
        grouped,
        &my_refs,
        &mn_refs,
        "vote",
    )
}

/// Smallest winnable fixture: the verifier copies the yes-prover's message
/// qubit onto the output, so sending 1 accepts outright. The no-prover's
/// message factor is trivial — it never gets a say.
pub fn message_flip_game() -> DqipVerifier {
    let layout = SpaceLayout::new(vec![
        ("m".to_string(), 2),
        ("out".to_string(), 2),
        ("n".to_string(), 1),
    ])
    .expect("distinct labels");
    let d = layout.total_dim();
    let v1 = layout
        .embed_lift(&cnot_pair(), &["m", "out"])
        .expect("labels exist");
    let eye = ComplexMatrix::identity(d, d);
    DqipVerifier::new(
        vec![
            UnitaryMatrix::new(eye.clone()).expect("identity"),
            UnitaryMatrix::new(v1).expect("lifted permutation"),
        ],
        vec![UnitaryMatrix::new(eye).expect("identity")],
        layout,
        &["m"],
        &["n"],
        "out",
    )
    .expect("well-formed fixture")
}

/// A blind coin-matching game whose value is exactly ½ for both sides.
///
/// The yes-prover prepares a qubit in `cm`; the verifier Hadamards it; the
/// no-prover — blind to `cm` — writes a guess into `gs`; the verifier XORs
/// both onto the output, rejecting on a match. Leaving `cm` at ground makes
/// the Hadamarded bit a fair coin uncorrelated with any guess, and guessing
/// with a fair coin is immune to any preparation, so identity play and a
/// Hadamard on `gs` are optimal for yes and no respectively — a saddle
/// point with known optimal strategies on both sides, handy wherever a test
/// needs one.
pub fn coin_guessing_game() -> DqipVerifier {
    let layout = SpaceLayout::new(vec![
        ("cm".to_string(), 2),
        ("out".to_string(), 2),
        ("gs".to_string(), 2),
    ])
    .expect("distinct labels");
    let d = layout.total_dim();
    let v1 = layout.embed_lift(&hadamard(), &["cm"]).expect("labels exist");
    let w1 = layout
        .embed_lift(&cnot_pair(), &["cm", "out"])
        .expect("labels exist")
        * layout
            .embed_lift(&cnot_pair(), &["gs", "out"])
            .expect("labels exist");
    DqipVerifier::new(
        vec![
            UnitaryMatrix::new(ComplexMatrix::identity(d, d)).expect("identity"),
            UnitaryMatrix::new(v1).expect("lifted unitary"),
        ],
        vec![UnitaryMatrix::new(w1).expect("lifted permutation")],
        layout,
        &["cm"],
        &["gs"],
        "out",
    )
    .expect("well-formed fixture")
}

fn copy_label(label: &str, copy: usize) -> String {
    format!("{label}~{copy}")
}

/// `|k⟩⟨k|` in dimension `d`.
fn proj(d: usize, k: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(d, d);
    p[(k, k)] = c64(1.0, 0.0);
    p
}

fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[c64(h, 0.0), c64(h, 0.0), c64(h, 0.0), c64(-h, 0.0)],
    )
}

fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
    )
}

/// CNOT whose control is the first (most significant) of the two acting
/// factors.
fn cnot_pair() -> ComplexMatrix {
    let o = c64(1.0, 0.0);
    let z = c64(0.0, 0.0);
    ComplexMatrix::from_row_slice(
        4,
        4,
        &[
            o, z, z, z, //
            z, o, z, z, //
            z, z, z, o, //
            z, z, o, z,
        ],
    )
}
