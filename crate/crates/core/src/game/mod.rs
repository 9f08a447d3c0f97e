//! Refereed games with two competing provers and the short-game decision
//! procedure.
//!
//! A verifier here plays two phases: a *yes* interaction (rounds
//! `V₀ … V_{r₁}`, messages through the yes factors) followed by a *no*
//! interaction (rounds `W₁ … W_{r₂}`, messages through the no factors). The
//! yes-prover tries to drive the verifier's output qubit away from the
//! ground (reject) state; the no-prover tries to pin it there. Everything
//! the yes-prover can do is captured by a stacked block-diagonal transcript
//! `(X₀, …, X_{r₁})`, and "the yes-prover has a strategy beating every
//! no-prover at threshold `c`" becomes membership of some transcript in the
//! convex set
//!
//! ```text
//! Win(c) = { consistent PSD transcripts X :
//!            ⟨D*D, X_{r₁}⟩ ≤ c for every no-prover reply D }
//! ```
//!
//! where `D = Π_reject·W_{r₂}N_{r₂}⋯W₁N₁V_{r₁}` ranges over the no-prover's
//! unitaries `N_i`. [`sep_oracle`] is a weak separation oracle for `Win(c)`;
//! [`decide_dqip`] drives the ellipsoid method with it; the `qrg_*` values
//! evaluate one side of the game exactly when the other side's strategy is
//! fixed.

mod ellipsoid;

pub use ellipsoid::{
    ellipsoid_feasibility, EllipsoidRun, EllipsoidState, Feasibility, IterationRecord,
    OracleAnswer, OracleReply, RealMatrix,
};

use crate::error::{Error, Result};
use crate::hermitian::{
    c64, ground_and_projectors, psd_clamp, real_embed, real_unembed, round_to_bits,
    sorted_hermitian_eigen, spectral_norm, ComplexMatrix, HermitianMatrix, RealVector,
    SpaceLayout, UnitaryMatrix,
};
use crate::tol::{TOL_CONSISTENCY, TOL_PSD};
use crate::transcript::{
    build_consistency_system, feasible_bound, solve_opt, stack_snapshots, transcript_to_prover,
    trivial_snapshots, RoundSequence, Transcript,
};

/// How far a returned hyperplane's spectral norm may sit from 1.
const HYPERPLANE_NORM_TOL: f64 = 1e-9;

/// Projected cut gradients below this norm are treated as constant over the
/// consistency subspace (the separating functional carries no information
/// along it), not as usable cut directions.
const PROJECTED_CUT_FLOOR: f64 = 1e-9;

/// A two-phase competing-prover verifier.
///
/// `yes_rounds` lists `V₀ … V_{r₁}` and `no_rounds` lists `W₁ … W_{r₂}`, all
/// unitaries on the full game space described by `layout`. The yes-prover
/// may act between consecutive yes rounds through the `yes_message` factors,
/// the no-prover between consecutive no rounds through the `no_message`
/// factors, and the final measurement projects the `output` factor onto the
/// ground state (reject) or its complement (accept). The output factor is
/// verifier-private: it may be neither a yes- nor a no-message factor.
#[derive(Debug, Clone)]
pub struct DqipVerifier {
    yes_rounds: Vec<UnitaryMatrix>,
    no_rounds: Vec<UnitaryMatrix>,
    layout: SpaceLayout,
    yes_message: Vec<String>,
    no_message: Vec<String>,
    output: String,
}

impl DqipVerifier {
    pub fn new(
        yes_rounds: Vec<UnitaryMatrix>,
        no_rounds: Vec<UnitaryMatrix>,
        layout: SpaceLayout,
        yes_message: &[&str],
        no_message: &[&str],
        output: &str,
    ) -> Result<Self> {
        if yes_rounds.len() < 2 {
            return Err(Error::Precondition(format!(
                "a game needs at least rounds V₀ and V₁, got {} yes round(s)",
                yes_rounds.len()
            )));
        }
        if no_rounds.is_empty() {
            return Err(Error::Precondition("a game needs at least one no round".into()));
        }
        if yes_message.is_empty() || no_message.is_empty() {
            return Err(Error::Label(
                "yes and no message factor lists must be non-empty".into(),
            ));
        }
        for label in yes_message.iter().chain(no_message.iter()) {
            layout.dim_of(label)?;
        }
        layout.dim_of(output)?;
        for y in yes_message {
            if no_message.contains(y) {
                return Err(Error::Label(format!(
                    "factor {y} claimed by both provers"
                )));
            }
        }
        if yes_message.contains(&output) || no_message.contains(&output) {
            return Err(Error::Label(format!(
                "output factor {output} must be verifier-private"
            )));
        }
        let d = layout.total_dim();
        for u in yes_rounds.iter().chain(no_rounds.iter()) {
            if u.dim() != d {
                return Err(Error::Dimension(format!(
                    "round is {}-dimensional on a game space of dimension {d}",
                    u.dim()
                )));
            }
        }
        Ok(Self {
            yes_rounds,
            no_rounds,
            layout,
            yes_message: yes_message.iter().map(|s| s.to_string()).collect(),
            no_message: no_message.iter().map(|s| s.to_string()).collect(),
            output: output.to_string(),
        })
    }

    /// Number of yes-prover moves `r₁`.
    pub fn r1(&self) -> usize {
        self.yes_rounds.len() - 1
    }

    /// Number of no-prover moves `r₂` in the no phase.
    pub fn r2(&self) -> usize {
        self.no_rounds.len()
    }

    pub fn yes_rounds(&self) -> &[UnitaryMatrix] {
        &self.yes_rounds
    }

    pub fn no_rounds(&self) -> &[UnitaryMatrix] {
        &self.no_rounds
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn yes_message_labels(&self) -> Vec<&str> {
        self.yes_message.iter().map(String::as_str).collect()
    }

    pub fn no_message_labels(&self) -> Vec<&str> {
        self.no_message.iter().map(String::as_str).collect()
    }

    pub fn output_label(&self) -> &str {
        &self.output
    }

    /// The yes interaction as a consistency round sequence with the
    /// yes-message factors traced out. Win-set candidates are stacked
    /// transcripts of these rounds, in this sequence's canonical factor
    /// order.
    pub fn transcript_rounds(&self) -> Result<RoundSequence> {
        Ok(self.canonical_parts()?.rounds)
    }

    /// The yes rounds as a [`RoundSequence`] plus the no rounds and reject
    /// projector permuted into the same canonical (kept-then-traced) basis,
    /// so all later circuit algebra happens in one coordinate system.
    pub(crate) fn canonical_parts(&self) -> Result<CanonicalGame> {
        let traced = self.yes_message_labels();
        let kept: Vec<&str> = self
            .layout
            .labels()
            .filter(|l| !traced.contains(l))
            .collect();
        let mats: Vec<ComplexMatrix> = self.yes_rounds.iter().map(|u| (**u).clone()).collect();
        let rounds = RoundSequence::new(mats, &self.layout, &kept, &traced)?;
        let order: Vec<&str> = kept.iter().chain(traced.iter()).copied().collect();
        let (map, _) = self.layout.permutation_to(&order)?;
        let no_rounds = self
            .no_rounds
            .iter()
            .map(|w| SpaceLayout::permute_matrix(w, &map))
            .collect();
        let (_, reject, _) = ground_and_projectors(rounds.layout(), &self.output)?;
        Ok(CanonicalGame {
            rounds,
            no_rounds,
            reject,
        })
    }
}

pub(crate) struct CanonicalGame {
    pub rounds: RoundSequence,
    pub no_rounds: Vec<ComplexMatrix>,
    pub reject: ComplexMatrix,
}

/// The winning-transcript set `Win(c)` of a fixed verifier, plus the
/// optional bit precision at which extracted prover circuits are truncated
/// before re-use.
#[derive(Debug, Clone)]
pub struct WinSetParams {
    verifier: DqipVerifier,
    c: f64,
    precision: Option<u32>,
}

impl WinSetParams {
    pub fn new(verifier: DqipVerifier, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Precondition(format!(
                "threshold c must lie in [0, 1], got {c}"
            )));
        }
        Ok(Self {
            verifier,
            c,
            precision: None,
        })
    }

    /// Truncate every extracted prover matrix entry to `t` bits before it is
    /// composed into a separating functional. Without this the extracted
    /// doubles pass through unrounded.
    pub fn with_precision(mut self, t: u32) -> Self {
        self.precision = Some(t);
        self
    }

    pub fn verifier(&self) -> &DqipVerifier {
        &self.verifier
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Dimension of the stacked transcript space `(r₁+1)·dim`.
    pub fn stacked_dim(&self) -> usize {
        (self.verifier.r1() + 1) * self.verifier.layout.total_dim()
    }
}

/// Reply of the weak separation oracle.
#[derive(Debug, Clone)]
pub enum SepOutput {
    /// A unit-spectral-norm block-diagonal Hermitian `h` with
    /// `⟨h, Z⟩ < ⟨h, x⟩ + ε` for every `Z ∈ Win(c)`.
    Hyperplane { h: HermitianMatrix },
    /// The candidate is within `ε` of some member of `Win(c)` (or `Win(c)`
    /// is empty and nothing needed separating).
    NearFeasible { epsilon: f64 },
}

impl SepOutput {
    fn hyperplane(h: HermitianMatrix) -> Result<Self> {
        let norm = spectral_norm(&h);
        if (norm - 1.0).abs() > HYPERPLANE_NORM_TOL {
            return Err(Error::Precondition(format!(
                "separating hyperplane has spectral norm {norm}, expected 1"
            )));
        }
        Ok(SepOutput::Hyperplane { h })
    }
}

/// Full account of one oracle invocation, for callers that need more than
/// the separation verdict (the decision procedure wants the inner game
/// value; tests want the extracted no-prover).
pub(crate) struct SepDetail {
    pub output: SepOutput,
    /// Optimal rejection the no phase achieves against the yes-prover
    /// extracted from the candidate; `None` when the candidate failed
    /// positive semidefiniteness before any game was solved.
    pub inner_value: Option<f64>,
    /// The extracted no-prover's moves (possibly bit-truncated) on the
    /// no-message factors tensor the returned environment; present exactly
    /// when a hyperplane was built from an opponent.
    #[cfg_attr(not(test), allow(dead_code))]
    pub no_prover: Option<(Vec<ComplexMatrix>, SpaceLayout)>,
}

/// Weak separation oracle for `Win(c)`.
///
/// The candidate `x` must be block-diagonal on the stacked transcript space
/// of [`DqipVerifier::transcript_rounds`] (off-block mass and slot-0
/// deviation from the ground projector are rejected beyond `1e-7`) and is
/// expected to satisfy the transcript consistency constraints — callers sit
/// inside the affine consistency subspace, and a candidate violating it
/// surfaces as an inconsistent-transcript error from the repair step.
///
/// Four steps:
/// 1. If some block has an eigenvalue below `-1e-9`, return the hyperplane
///    `-uu*` in that block (`u` the offending unit eigenvector): every PSD
///    candidate scores `≤ 0` against it while `x` scores `> 0`.
/// 2. Otherwise read the blocks as a transcript (clamping roundoff-negative
///    eigenvalues and rescaling any block whose norm exceeds the feasible
///    bound) and extract a yes-prover realizing it; compose the extracted
///    moves into `C̃ = Ỹ_{r₁}V_{r₁-1}⋯Ỹ₁V₀`.
/// 3. Solve the no phase against `C̃` to accuracy `ε/2`. If the optimal
///    rejection `ϖ` is at most `c`, the candidate is `ε`-close to winning:
///    return [`SepOutput::NearFeasible`].
/// 4. Otherwise extract the optimal no-prover, compose
///    `D̃ = Π_reject·W_{r₂}Ñ_{r₂}⋯W₁Ñ₁V_{r₁}`, and return the hyperplane
///    carrying `D̃*D̃` (compressed back onto the game space and normalized
///    to unit spectral norm) in the final slot: winning transcripts keep
///    every opponent at or below `c`, while `x`'s own extracted strategy
///    loses to this one by more than `c`.
pub fn sep_oracle(params: &WinSetParams, x: &HermitianMatrix, epsilon: f64) -> Result<SepOutput> {
    sep_oracle_detail(params, x, epsilon).map(|d| d.output)
}

pub(crate) fn sep_oracle_detail(
    params: &WinSetParams,
    x: &HermitianMatrix,
    epsilon: f64,
) -> Result<SepDetail> {
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!(
            "separation accuracy must be positive, got {epsilon}"
        )));
    }
    let canon = params.verifier.canonical_parts()?;
    let rounds = &canon.rounds;
    let d = rounds.layout().total_dim();
    let r1 = rounds.r();
    let slots = r1 + 1;
    let n = slots * d;
    if x.dim() != n {
        return Err(Error::Dimension(format!(
            "candidate is {}-dimensional, stacked transcript space is {n}",
            x.dim()
        )));
    }

    let xm: &ComplexMatrix = x;
    for i in 0..n {
        for j in 0..n {
            if i / d != j / d && xm[(i, j)].norm() > TOL_CONSISTENCY {
                return Err(Error::Precondition(format!(
                    "candidate has off-block mass {:.3e} at ({i},{j})",
                    xm[(i, j)].norm()
                )));
            }
        }
    }
    let blocks: Vec<ComplexMatrix> = (0..slots)
        .map(|k| xm.view((k * d, k * d), (d, d)).into_owned())
        .collect();
    for i in 0..d {
        for j in 0..d {
            let expected = if i == 0 && j == 0 { 1.0 } else { 0.0 };
            if (blocks[0][(i, j)] - c64(expected, 0.0)).norm() > TOL_CONSISTENCY {
                return Err(Error::Precondition(
                    "candidate slot 0 is not the ground projector".into(),
                ));
            }
        }
    }

    // Step 1: eigenvector cut if any block dips below the PSD cone.
    let mut violation: Option<(usize, f64, crate::hermitian::ComplexVector)> = None;
    for (k, block) in blocks.iter().enumerate() {
        let eig = sorted_hermitian_eigen(&HermitianMatrix::new(block.clone())?)?;
        let min = eig.values[0];
        if min < -TOL_PSD && violation.as_ref().is_none_or(|v| min < v.1) {
            violation = Some((k, min, eig.vectors.column(0).into_owned()));
        }
    }
    if let Some((k, _, u)) = violation {
        let u = &u / c64(u.norm(), 0.0);
        let mut h = ComplexMatrix::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                h[(k * d + i, k * d + j)] = -(u[i] * u[j].conj());
            }
        }
        return Ok(SepDetail {
            output: SepOutput::hyperplane(HermitianMatrix::new(h)?)?,
            inner_value: None,
            no_prover: None,
        });
    }

    // Step 2: realize the candidate as an explicit yes-prover. On points of
    // the consistency subspace the repairs below move entries by at most a
    // few ulps past the validation tolerances.
    let bound = feasible_bound(rounds);
    let mut snaps = Vec::with_capacity(slots - 1);
    for block in &blocks[1..] {
        let clamped = psd_clamp(&HermitianMatrix::new(block.clone())?)?;
        let nrm = spectral_norm(&clamped);
        snaps.push(if nrm > bound {
            clamped * c64(bound / nrm, 0.0)
        } else {
            clamped
        });
    }
    let transcript = Transcript::new(rounds, snaps)?;
    let (yes_prover, yes_env) = transcript_to_prover(rounds, &transcript)?;
    let yes_mats = maybe_round(&yes_prover, params.precision)?;

    let combined = SpaceLayout::concat(&[rounds.layout(), &yes_env])?;
    let game_labels: Vec<&str> = rounds.layout().labels().collect();
    let yes_acting: Vec<&str> = rounds
        .traced_labels()
        .into_iter()
        .chain(yes_env.labels())
        .collect();
    let mut c_tilde = combined.embed_lift(&rounds.matrices()[0], &game_labels)?;
    for i in 1..=r1 {
        c_tilde = combined.embed_lift(&yes_mats[i - 1], &yes_acting)? * c_tilde;
        if i < r1 {
            c_tilde = combined.embed_lift(&rounds.matrices()[i], &game_labels)? * c_tilde;
        }
    }

    // Step 3: the no phase against the frozen yes interaction, as a
    // one-adversary game over the no-message factors.
    let r2 = canon.no_rounds.len();
    let mut inner_mats = Vec::with_capacity(r2 + 1);
    inner_mats.push(combined.embed_lift(&rounds.matrices()[r1], &game_labels)? * &c_tilde);
    for w in &canon.no_rounds[..r2 - 1] {
        inner_mats.push(combined.embed_lift(w, &game_labels)?);
    }
    inner_mats.push(combined.embed_lift(&(&canon.reject * &canon.no_rounds[r2 - 1]), &game_labels)?);
    let no_labels = params.verifier.no_message_labels();
    let inner_kept: Vec<&str> = combined
        .labels()
        .filter(|l| !no_labels.contains(l))
        .collect();
    let inner_rounds = RoundSequence::new(inner_mats, &combined, &inner_kept, &no_labels)?;
    let (inner_transcript, varpi) = solve_opt(&inner_rounds, epsilon / 2.0)?;
    if varpi <= params.c {
        return Ok(SepDetail {
            output: SepOutput::NearFeasible { epsilon },
            inner_value: Some(varpi),
            no_prover: None,
        });
    }

    // Step 4: the optimal opponent becomes the separating functional.
    let (no_prover, no_env) = transcript_to_prover(&inner_rounds, &inner_transcript)?;
    let no_mats = maybe_round(&no_prover, params.precision)?;
    let d_layout = SpaceLayout::concat(&[rounds.layout(), &no_env])?;
    let no_acting: Vec<&str> = inner_rounds
        .traced_labels()
        .into_iter()
        .chain(no_env.labels())
        .collect();
    let mut d_tilde = d_layout.embed_lift(&rounds.matrices()[r1], &game_labels)?;
    for j in 0..r2 {
        d_tilde = d_layout.embed_lift(&no_mats[j], &no_acting)? * d_tilde;
        let w = if j + 1 == r2 {
            &canon.reject * &canon.no_rounds[j]
        } else {
            canon.no_rounds[j].clone()
        };
        d_tilde = d_layout.embed_lift(&w, &game_labels)? * d_tilde;
    }
    // D̃ starts from the no-prover's ground environment; compressing D̃*D̃
    // onto that slice returns it to the game space.
    let big = d_tilde.adjoint() * &d_tilde;
    let ne = no_env.total_dim();
    let mut block = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            block[(i, j)] = big[(i * ne, j * ne)];
        }
    }
    let nrm = spectral_norm(&block);
    if nrm <= 1e-12 {
        return Err(Error::Precondition(
            "extracted opponent acts trivially; no usable separating functional".into(),
        ));
    }
    let block = block * c64(1.0 / nrm, 0.0);
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            h[(r1 * d + i, r1 * d + j)] = block[(i, j)];
        }
    }
    Ok(SepDetail {
        output: SepOutput::hyperplane(HermitianMatrix::new(h)?)?,
        inner_value: Some(varpi),
        no_prover: Some((no_mats, no_env)),
    })
}

fn maybe_round(prover: &[UnitaryMatrix], precision: Option<u32>) -> Result<Vec<ComplexMatrix>> {
    prover
        .iter()
        .map(|u| match precision {
            Some(t) => round_to_bits(u, t),
            None => Ok((**u).clone()),
        })
        .collect()
}

/// Optimal rejection probability the no-prover can force once the
/// yes-prover's moves are fixed.
///
/// `yes_prover` lists either the `r₁` yes-phase moves or one move per
/// verifier round (`r₁ + r₂`), each acting on the yes-message factors (in
/// the verifier's order) tensor `yes_env`. In the interleaved view the
/// no-prover may act before *every* verifier round — also during the yes
/// phase — and this routine optimizes over all of that; for verifiers whose
/// yes-phase rounds never touch the no factors the extra moves are inert and
/// the value coincides with the two-phase reading.
pub fn qrg_value_given_yes(
    verifier: &DqipVerifier,
    yes_prover: &[UnitaryMatrix],
    yes_env: &SpaceLayout,
    epsilon: f64,
) -> Result<f64> {
    let rounds = no_view_rounds(verifier, yes_prover, yes_env)?;
    Ok(solve_opt(&rounds, epsilon)?.1)
}

/// Like [`qrg_value_given_yes`], but also extracts a no-prover realizing the
/// optimum: its moves (one per verifier round after the first) act on the
/// no-message factors tensor the returned environment.
pub fn qrg_best_no_response(
    verifier: &DqipVerifier,
    yes_prover: &[UnitaryMatrix],
    yes_env: &SpaceLayout,
    epsilon: f64,
) -> Result<(Vec<UnitaryMatrix>, SpaceLayout, f64)> {
    let rounds = no_view_rounds(verifier, yes_prover, yes_env)?;
    let (transcript, value) = solve_opt(&rounds, epsilon)?;
    let (prover, env) = transcript_to_prover(&rounds, &transcript)?;
    Ok((prover, env, value))
}

/// Optimal acceptance probability the yes-prover can reach once the
/// no-prover's moves are fixed — the mirror image of
/// [`qrg_value_given_yes`].
///
/// `no_prover` may list either one move per verifier round (`r₁ + r₂`, the
/// interleaved form returned by [`qrg_best_no_response`]) or just `r₂`
/// moves, which are then placed in the no phase with identities padding the
/// yes phase.
pub fn qrg_accept_value_given_no(
    verifier: &DqipVerifier,
    no_prover: &[UnitaryMatrix],
    no_env: &SpaceLayout,
    epsilon: f64,
) -> Result<f64> {
    let rounds = yes_view_rounds(verifier, no_prover, no_env)?;
    Ok(solve_opt(&rounds, epsilon)?.1)
}

/// Builds the rounds seen by the yes-prover when the no-prover is fixed:
/// round `k` is `N̂_{k+1}·V̂_k` (the next no move composed after the verifier
/// round) and the last round takes the accept projector, so the optimal
/// transcript value is the acceptance probability.
pub(crate) fn yes_view_rounds(
    verifier: &DqipVerifier,
    no_prover: &[UnitaryMatrix],
    no_env: &SpaceLayout,
) -> Result<RoundSequence> {
    let r1 = verifier.r1();
    let r2 = verifier.r2();
    let r = r1 + r2;
    let no_dim = verifier.layout.dim_of_all(&verifier.no_message_labels())? * no_env.total_dim();
    for u in no_prover {
        if u.dim() != no_dim {
            return Err(Error::Dimension(format!(
                "no-prover move is {}-dimensional, no-message ⊗ environment gives {no_dim}",
                u.dim()
            )));
        }
    }
    let padded: Vec<ComplexMatrix> = if no_prover.len() == r {
        no_prover.iter().map(|u| (**u).clone()).collect()
    } else if no_prover.len() == r2 {
        let id = ComplexMatrix::identity(no_dim, no_dim);
        (0..r1)
            .map(|_| id.clone())
            .chain(no_prover.iter().map(|u| (**u).clone()))
            .collect()
    } else {
        return Err(Error::Dimension(format!(
            "no-prover has {} moves; expected {r2} (no phase only) or {r} (every round)",
            no_prover.len()
        )));
    };

    let combined = SpaceLayout::concat(&[&verifier.layout, no_env])?;
    let game_labels: Vec<&str> = verifier.layout.labels().collect();
    let no_acting: Vec<&str> = verifier
        .no_message_labels()
        .into_iter()
        .chain(no_env.labels())
        .collect();
    let all_rounds: Vec<&UnitaryMatrix> = verifier
        .yes_rounds
        .iter()
        .chain(verifier.no_rounds.iter())
        .collect();
    let (_, _, accept) = ground_and_projectors(&combined, &verifier.output)?;

    let mut mats = Vec::with_capacity(r + 1);
    for k in 0..r {
        let verifier_part = combined.embed_lift(all_rounds[k], &game_labels)?;
        let no_part = combined.embed_lift(&padded[k], &no_acting)?;
        mats.push(no_part * verifier_part);
    }
    mats.push(&accept * combined.embed_lift(all_rounds[r], &game_labels)?);

    let yes_labels = verifier.yes_message_labels();
    let kept: Vec<&str> = combined.labels().filter(|l| !yes_labels.contains(l)).collect();
    RoundSequence::new(mats, &combined, &kept, &yes_labels)
}

/// Builds the rounds seen by the no-prover when the yes-prover is fixed:
/// `A₀ = V₀`, `A_k = V_k·Ŷ_k`, and the last round takes the reject
/// projector, so the optimal transcript value is the rejection probability.
///
/// `yes_prover` may list either one move per verifier round (`r₁ + r₂`, the
/// interleaved form `Y₁ … Y_r`) or just the `r₁` yes-phase moves, which are
/// then padded with identities through the no phase.
pub(crate) fn no_view_rounds(
    verifier: &DqipVerifier,
    yes_prover: &[UnitaryMatrix],
    yes_env: &SpaceLayout,
) -> Result<RoundSequence> {
    let r1 = verifier.r1();
    let r = r1 + verifier.r2();
    let yes_dim = verifier.layout.dim_of_all(&verifier.yes_message_labels())? * yes_env.total_dim();
    for u in yes_prover {
        if u.dim() != yes_dim {
            return Err(Error::Dimension(format!(
                "yes-prover move is {}-dimensional, yes-message ⊗ environment gives {yes_dim}",
                u.dim()
            )));
        }
    }
    if yes_prover.len() != r && yes_prover.len() != r1 {
        return Err(Error::Dimension(format!(
            "yes-prover has {} moves; expected {r1} (yes phase only) or {r} (every round)",
            yes_prover.len()
        )));
    }

    let combined = SpaceLayout::concat(&[&verifier.layout, yes_env])?;
    let game_labels: Vec<&str> = verifier.layout.labels().collect();
    let yes_acting: Vec<&str> = verifier
        .yes_message_labels()
        .into_iter()
        .chain(yes_env.labels())
        .collect();
    let all_rounds: Vec<&UnitaryMatrix> = verifier
        .yes_rounds
        .iter()
        .chain(verifier.no_rounds.iter())
        .collect();
    let (_, reject, _) = ground_and_projectors(&combined, &verifier.output)?;

    let mut mats = Vec::with_capacity(r + 1);
    mats.push(combined.embed_lift(all_rounds[0], &game_labels)?);
    for k in 1..=r {
        let mut m = combined.embed_lift(all_rounds[k], &game_labels)?;
        if k <= yes_prover.len() {
            m *= combined.embed_lift(&yes_prover[k - 1], &yes_acting)?;
        }
        if k == r {
            m = &reject * m;
        }
        mats.push(m);
    }

    let no_labels = verifier.no_message_labels();
    let kept: Vec<&str> = combined.labels().filter(|l| !no_labels.contains(l)).collect();
    RoundSequence::new(mats, &combined, &kept, &no_labels)
}

/// Verdict of the decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

/// Verdict plus the data needed to audit how it was reached.
#[derive(Debug, Clone)]
pub struct DecideReport {
    pub decision: Decision,
    /// Effective threshold `c + (1-c-s)/2` handed to the separation oracle.
    pub c_prime: f64,
    /// Accuracy `(1-c-s)/4` the oracle was run at.
    pub separation_accuracy: f64,
    /// Dimension of the consistency subspace the ellipsoid walked.
    pub ellipsoid_dim: usize,
    pub log: Vec<IterationRecord>,
}

/// Decides whether the yes-prover can keep rejection at or below `c`
/// (accept) or the no-prover can force rejection at least `1 - s` (reject),
/// given the promise that one of the two holds with gap `ε = 1 - c - s > 0`.
///
/// The search runs over explicit coordinates for the affine consistency
/// subspace: the anchor is the trivial transcript, directions are an
/// orthonormal null basis of the consistency constraints restricted to the
/// free (non-pinned) block coordinates. `Win(c + ε/2)` is probed through
/// [`sep_oracle`] at accuracy `ε/4` inside the ball of radius
/// `√(stacked dim)`, which contains every consistent transcript; the inner
/// radius `ε/(16·stacked dim)` is the declared heuristic for how much
/// full-dimensional slack a winning yes-instance leaves. Acceptance is
/// immediate on a near-feasible reply; rejection is either the exhausted
/// iteration budget or an oracle cut whose direction is constant across the
/// subspace (a certificate that no consistent transcript wins).
pub fn decide_dqip(verifier: &DqipVerifier, c: f64, s: f64) -> Result<DecideReport> {
    if !(0.0..=1.0).contains(&c) || !(0.0..=1.0).contains(&s) {
        return Err(Error::Precondition(format!(
            "thresholds must lie in [0, 1], got c = {c}, s = {s}"
        )));
    }
    let eps = 1.0 - c - s;
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!(
            "decision requires a promise gap 1 - c - s > 0, got {eps}"
        )));
    }
    let c_prime = c + eps / 2.0;
    let accuracy = eps / 4.0;

    let canon = verifier.canonical_parts()?;
    let rounds = &canon.rounds;
    let d = rounds.layout().total_dim();
    let r1 = rounds.r();
    let n_stack = (r1 + 1) * d;

    let anchor_mat = stack_snapshots(rounds, &trivial_snapshots(rounds))?;
    let anchor = real_embed(&anchor_mat)?;
    let basis = consistency_null_basis(rounds, d, n_stack)?;
    let n_sub = basis.ncols();

    let params = WinSetParams::new(verifier.clone(), c_prime)?;
    let radius_big = (n_stack as f64).sqrt();
    let radius_small = eps / (16.0 * n_stack as f64);

    let mut oracle = |y: &RealVector| -> Result<OracleReply> {
        let candidate_vec = &anchor + &basis * y;
        let candidate = HermitianMatrix::new(real_unembed(&candidate_vec, n_stack)?)?;
        let detail = sep_oracle_detail(&params, &candidate, accuracy)?;
        match detail.output {
            SepOutput::NearFeasible { .. } => Ok(OracleReply {
                answer: OracleAnswer::Accept,
                case: "near-feasible",
                objective: detail.inner_value,
            }),
            SepOutput::Hyperplane { h } => {
                let g = basis.tr_mul(&real_embed(&h)?);
                let case = if detail.inner_value.is_some() {
                    "opponent-cut"
                } else {
                    "eigenvector-cut"
                };
                if g.norm() <= PROJECTED_CUT_FLOOR {
                    // The functional separating x from Win(c') does not vary
                    // over the subspace at all, so no consistent transcript
                    // beats it either: Win(c') is empty.
                    Ok(OracleReply {
                        answer: OracleAnswer::RuledOut,
                        case,
                        objective: detail.inner_value,
                    })
                } else {
                    Ok(OracleReply {
                        answer: OracleAnswer::Cut(g),
                        case,
                        objective: detail.inner_value,
                    })
                }
            }
        }
    };

    let run = ellipsoid_feasibility(n_sub, radius_big, radius_small, &mut oracle)?;
    Ok(DecideReport {
        decision: match run.outcome {
            Feasibility::Feasible { .. } => Decision::Accept,
            Feasibility::Empty => Decision::Reject,
        },
        c_prime,
        separation_accuracy: accuracy,
        ellipsoid_dim: n_sub,
        log: run.log,
    })
}

/// Orthonormal basis (as embedded real columns) for the directions that keep
/// a stacked transcript consistent.
///
/// Slot 0 and all off-diagonal blocks are pinned outright, so only the
/// embedded coordinates of diagonal blocks 1..=r₁ can move. The consistency
/// constraints are restricted to those coordinates and the null space of the
/// restricted system is read off the small Gram matrix's eigendecomposition,
/// then scattered back into full embedding coordinates.
fn consistency_null_basis(
    rounds: &RoundSequence,
    d: usize,
    n_stack: usize,
) -> Result<RealMatrix> {
    let mut free = Vec::new();
    let mut k = 0;
    for i in 0..n_stack {
        if i / d >= 1 {
            free.push(k);
        }
        k += 1;
        for j in (i + 1)..n_stack {
            if i / d == j / d && i / d >= 1 {
                free.push(k);
                free.push(k + 1);
            }
            k += 2;
        }
    }

    let system = build_consistency_system(rounds)?;
    let mut rows: Vec<RealVector> = Vec::new();
    for (constraint, _) in system.constraints() {
        let embedded = real_embed(constraint)?;
        let restricted = RealVector::from_fn(free.len(), |i, _| embedded[free[i]]);
        if restricted.norm() > 1e-12 {
            rows.push(restricted);
        }
    }
    let p = free.len();
    let mut reduced = RealMatrix::zeros(rows.len(), p);
    for (i, row) in rows.iter().enumerate() {
        reduced.set_row(i, &row.transpose());
    }

    let gram = reduced.tr_mul(&reduced);
    let eig = gram.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().cloned().fold(1.0f64, f64::max);
    let mut columns: Vec<RealVector> = Vec::new();
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= lambda_max * 1e-10 {
            let v: RealVector = eig.eigenvectors.column(idx).into_owned();
            let residual = (&reduced * &v).norm();
            if residual > 1e-6 {
                return Err(Error::Precondition(format!(
                    "consistency null basis extraction failed: residual {residual:.3e}"
                )));
            }
            columns.push(v);
        }
    }

    let embed_dim = n_stack * n_stack;
    let mut basis = RealMatrix::zeros(embed_dim, columns.len());
    for (col, v) in columns.iter().enumerate() {
        for (row, &coord) in free.iter().enumerate() {
            basis[(coord, col)] = v[row];
        }
    }
    Ok(basis)
}
