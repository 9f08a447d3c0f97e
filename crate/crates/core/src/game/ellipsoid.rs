//! Central-cut ellipsoid method over explicit real coordinates.
//!
//! The target set is presented only through a membership oracle: queried at
//! the current center, the oracle accepts the point, returns a halfspace
//! `{z : g·z ≤ g·center}` guaranteed (up to the oracle's own slack) to
//! contain the whole target, or certifies outright that the target is empty.
//! Each cut replaces the ellipsoid with the minimum-volume ellipsoid
//! covering the kept half, shrinking the volume by a factor of at least
//! `exp(-1/(2(n+1)))` per iteration. If the target contains a ball of radius
//! `r` inside the starting ball of radius `R`, the process must accept some
//! center within `⌈2n(n+1)·ln(R/r)⌉` cuts; surviving that many cuts
//! certifies the target holds no such ball.
//!
//! Volume contraction is not taken on faith: every update recomputes the
//! shape matrix's log-determinant through a Cholesky factorization and
//! errors out if positivity or the contraction bound is lost, so a caller
//! never receives an `Empty` verdict from a numerically corrupted
//! ellipsoid.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermitian::RealVector;

pub type RealMatrix = DMatrix<f64>;

/// Smallest admissible cut gradient; anything shorter cannot define a
/// halfspace direction reliably.
const MIN_GRADIENT: f64 = 1e-12;

/// Tolerated asymmetry in a shape matrix supplied from outside.
const SHAPE_SYMMETRY_TOL: f64 = 1e-9;

/// Slack on the per-iteration log-volume decrement `1/(2(n+1))`.
const CONTRACTION_SLACK: f64 = 1e-12;

/// An ellipsoid `{center + y : yᵀ shape⁻¹ y ≤ 1}` together with how many
/// cuts produced it.
#[derive(Debug, Clone)]
pub struct EllipsoidState {
    center: RealVector,
    shape: RealMatrix,
    iteration: usize,
}

impl EllipsoidState {
    /// Ball of the given radius centered at the origin.
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Precondition(format!(
                "ellipsoid ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            center: RealVector::zeros(dim),
            shape: RealMatrix::identity(dim, dim) * (radius * radius),
            iteration: 0,
        })
    }

    /// Wraps an explicit state, checking that the shape matrix is square of
    /// the center's dimension, symmetric within `1e-9`, and positive
    /// definite.
    pub fn new(center: RealVector, shape: RealMatrix, iteration: usize) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::Dimension(format!(
                "ellipsoid shape is {}x{} for a center of dimension {n}",
                shape.nrows(),
                shape.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let dev = (shape[(i, j)] - shape[(j, i)]).abs();
                if !dev.is_finite() || dev > SHAPE_SYMMETRY_TOL {
                    return Err(Error::Precondition(format!(
                        "ellipsoid shape asymmetric at ({i},{j}): deviation {dev:.3e}"
                    )));
                }
            }
        }
        let state = Self {
            center,
            shape,
            iteration,
        };
        state.log_volume()?;
        Ok(state)
    }

    pub fn center(&self) -> &RealVector {
        &self.center
    }

    pub fn shape(&self) -> &RealMatrix {
        &self.shape
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Log of the ellipsoid's volume relative to the unit ball, i.e.
    /// `½·ln det(shape)`. Errors if the shape matrix has lost positive
    /// definiteness.
    pub fn log_volume(&self) -> Result<f64> {
        let n = self.center.len();
        if n == 0 {
            return Ok(0.0);
        }
        let chol = self.shape.clone().cholesky().ok_or_else(|| {
            breakdown(
                self.iteration,
                "shape matrix is no longer positive definite",
            )
        })?;
        let mut log_det_half = 0.0;
        for i in 0..n {
            let l = chol.l_dirty()[(i, i)];
            if !(l > 0.0) || !l.is_finite() {
                return Err(breakdown(
                    self.iteration,
                    "shape matrix Cholesky produced a non-positive pivot",
                ));
            }
            log_det_half += l.ln();
        }
        Ok(log_det_half)
    }

    /// Central-cut update: keep the half `{z : g·z ≤ g·center}` and replace
    /// the ellipsoid by the smallest one containing that half.
    ///
    /// With `B` the shape matrix and `ĝ = g/√(gᵀBg)`:
    ///
    /// ```text
    /// center ← center − (1/(n+1))·Bĝ
    /// B      ← n²/(n²−1) · (B − (2/(n+1))·Bĝ(Bĝ)ᵀ)
    /// ```
    ///
    /// At `n = 1` the leading factor degenerates (the subtraction already
    /// removes the whole matrix), so the rank-one limit `B ← B/4` — the
    /// exact minimal interval covering half of the previous one — is applied
    /// instead.
    fn cut(&mut self, g: &RealVector) -> Result<()> {
        let n = self.center.len();
        if g.len() != n {
            return Err(Error::Dimension(format!(
                "cut gradient has dimension {} in an ellipsoid of dimension {n}",
                g.len()
            )));
        }
        if g.norm() <= MIN_GRADIENT {
            return Err(breakdown(self.iteration, "cut gradient vanishes"));
        }
        let bg = &self.shape * g;
        let gbg = g.dot(&bg);
        if !gbg.is_finite() || gbg <= 0.0 {
            return Err(breakdown(
                self.iteration,
                format!("gᵀBg = {gbg:.3e} is not positive"),
            ));
        }
        let nf = n as f64;
        let step = &bg / ((nf + 1.0) * gbg.sqrt());
        self.center -= &step;
        if n == 1 {
            self.shape *= 0.25;
        } else {
            let outer = &bg * bg.transpose() * (2.0 / ((nf + 1.0) * gbg));
            self.shape = (&self.shape - outer) * (nf * nf / (nf * nf - 1.0));
        }
        // Symmetrize to stop roundoff from accumulating skew across
        // thousands of rank-one updates.
        self.shape = (&self.shape + self.shape.transpose()) * 0.5;
        self.iteration += 1;
        Ok(())
    }
}

fn breakdown(iteration: usize, message: impl Into<String>) -> Error {
    Error::EllipsoidBreakdown {
        iteration,
        message: message.into(),
    }
}

/// What the oracle concluded about one queried point.
pub enum OracleAnswer {
    /// The queried point is accepted.
    Accept,
    /// Every target point `z` satisfies `g·z ≤ g·query` (up to the oracle's
    /// slack); the opposite open half can be discarded.
    Cut(RealVector),
    /// The oracle certifies the target is empty everywhere — its separating
    /// functional is constant across the whole search space, so no ellipsoid
    /// update could add information.
    RuledOut,
}

/// The oracle's reply for one queried point.
pub struct OracleReply {
    pub answer: OracleAnswer,
    /// Short label recorded in the run log (e.g. which branch of the oracle
    /// fired).
    pub case: &'static str,
    /// Objective value the oracle computed for this query, if any.
    pub objective: Option<f64>,
}

/// One line of the run log.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub case: &'static str,
    pub objective: Option<f64>,
    /// Log-volume (relative to the unit ball) after this iteration's update;
    /// unchanged from the previous record when no cut was applied.
    pub log_volume: f64,
}

/// Outcome of a feasibility run.
#[derive(Debug, Clone)]
pub enum Feasibility {
    /// The oracle accepted this point.
    Feasible { point: RealVector },
    /// No acceptable point exists: either the iteration budget elapsed with
    /// every queried center cut off (so the target contains no ball of
    /// radius `r`), or the oracle ruled the target out directly.
    Empty,
}

/// A verdict together with the per-iteration log.
#[derive(Debug, Clone)]
pub struct EllipsoidRun {
    pub outcome: Feasibility,
    pub log: Vec<IterationRecord>,
}

/// Searches the ball of radius `radius_big` for a point the oracle accepts,
/// declaring the target empty (of any `radius_small`-ball) after
/// `⌈2n(n+1)·ln(R/r)⌉` cuts.
///
/// In dimension zero the ball is a single point and one query decides. Any
/// oracle error aborts the run; a cut whose volume decrement falls below
/// `1/(2(n+1))` — which a correct update can never produce — surfaces as
/// [`Error::EllipsoidBreakdown`] rather than a silent wrong verdict.
pub fn ellipsoid_feasibility(
    dim: usize,
    radius_big: f64,
    radius_small: f64,
    oracle: &mut dyn FnMut(&RealVector) -> Result<OracleReply>,
) -> Result<EllipsoidRun> {
    if !(radius_big > 0.0 && radius_small > 0.0 && radius_big > radius_small) {
        return Err(Error::Precondition(format!(
            "ellipsoid radii must satisfy R > r > 0, got R = {radius_big}, r = {radius_small}"
        )));
    }
    let nf = dim as f64;
    let cap = (2.0 * nf * (nf + 1.0) * (radius_big / radius_small).ln()).ceil() as usize;
    let cap = cap.max(1);
    let mut state = EllipsoidState::ball(dim, radius_big)?;
    let mut log = Vec::new();
    let decrement_floor = 1.0 / (2.0 * (nf + 1.0)) - CONTRACTION_SLACK;

    for _ in 0..cap {
        let iteration = state.iteration();
        let reply = oracle(state.center())?;
        match reply.answer {
            OracleAnswer::Accept => {
                log.push(IterationRecord {
                    iteration,
                    case: reply.case,
                    objective: reply.objective,
                    log_volume: state.log_volume()?,
                });
                return Ok(EllipsoidRun {
                    outcome: Feasibility::Feasible {
                        point: state.center().clone(),
                    },
                    log,
                });
            }
            OracleAnswer::RuledOut => {
                log.push(IterationRecord {
                    iteration,
                    case: reply.case,
                    objective: reply.objective,
                    log_volume: state.log_volume()?,
                });
                return Ok(EllipsoidRun {
                    outcome: Feasibility::Empty,
                    log,
                });
            }
            OracleAnswer::Cut(g) => {
                if dim == 0 {
                    // The sole candidate was cut off; nothing remains.
                    log.push(IterationRecord {
                        iteration,
                        case: reply.case,
                        objective: reply.objective,
                        log_volume: 0.0,
                    });
                    return Ok(EllipsoidRun {
                        outcome: Feasibility::Empty,
                        log,
                    });
                }
                let before = state.log_volume()?;
                state.cut(&g)?;
                let after = state.log_volume()?;
                if before - after < decrement_floor {
                    return Err(breakdown(
                        state.iteration(),
                        format!(
                            "volume contraction {:.3e} fell below the guaranteed {:.3e}",
                            before - after,
                            decrement_floor
                        ),
                    ));
                }
                log.push(IterationRecord {
                    iteration,
                    case: reply.case,
                    objective: reply.objective,
                    log_volume: after,
                });
            }
        }
    }
    Ok(EllipsoidRun {
        outcome: Feasibility::Empty,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accept_everything(_x: &RealVector) -> Result<OracleReply> {
        Ok(OracleReply {
            answer: OracleAnswer::Accept,
            case: "feasible",
            objective: None,
        })
    }

    #[test]
    fn accepting_oracle_finishes_at_the_origin_in_one_query() {
        let run = ellipsoid_feasibility(4, 10.0, 0.1, &mut accept_everything).unwrap();
        match run.outcome {
            Feasibility::Feasible { point } => assert_eq!(point, RealVector::zeros(4)),
            Feasibility::Empty => panic!("expected feasible"),
        }
        assert_eq!(run.log.len(), 1);
        assert_eq!(run.log[0].case, "feasible");
    }

    #[test]
    fn contradictory_halfspaces_on_the_line_come_back_empty() {
        // {x ≥ 1} ∩ {x ≤ -1}. Whatever the center, one constraint is
        // violated and supplies the cut.
        let mut oracle = |x: &RealVector| {
            let g = if x[0] < 1.0 { -1.0 } else { 1.0 };
            Ok(OracleReply {
                answer: OracleAnswer::Cut(RealVector::from_vec(vec![g])),
                case: "halfspace",
                objective: None,
            })
        };
        let run = ellipsoid_feasibility(1, 10.0, 0.5, &mut oracle).unwrap();
        assert!(matches!(run.outcome, Feasibility::Empty));
        // Every iteration was a cut and the log covers the full budget.
        let cap = (2.0 * 1.0 * 2.0 * (10.0f64 / 0.5).ln()).ceil() as usize;
        assert_eq!(run.log.len(), cap);
    }

    #[test]
    fn ruled_out_short_circuits_to_empty() {
        let mut oracle = |_x: &RealVector| {
            Ok(OracleReply {
                answer: OracleAnswer::RuledOut,
                case: "constant",
                objective: Some(0.9),
            })
        };
        let run = ellipsoid_feasibility(6, 4.0, 0.1, &mut oracle).unwrap();
        assert!(matches!(run.outcome, Feasibility::Empty));
        assert_eq!(run.log.len(), 1);
        assert_eq!(run.log[0].objective, Some(0.9));
    }

    #[test]
    fn dimension_zero_is_decided_by_a_single_query() {
        let run = ellipsoid_feasibility(0, 1.0, 0.5, &mut accept_everything).unwrap();
        assert!(matches!(run.outcome, Feasibility::Feasible { .. }));

        let mut reject = |_x: &RealVector| {
            Ok(OracleReply {
                answer: OracleAnswer::Cut(RealVector::zeros(0)),
                case: "halfspace",
                objective: None,
            })
        };
        let run = ellipsoid_feasibility(0, 1.0, 0.5, &mut reject).unwrap();
        assert!(matches!(run.outcome, Feasibility::Empty));
        assert_eq!(run.log.len(), 1);
    }

    #[test]
    fn every_cut_shrinks_log_volume_by_the_guaranteed_decrement() {
        // Demand every coordinate exceed 2 — impossible inside the radius-1
        // ball, and the always-valid cut direction varies with the center,
        // so the run must exhaust its budget with genuine updates.
        let n = 5;
        let mut oracle = |x: &RealVector| {
            let mut worst = 0;
            for i in 0..n {
                if x[i] < x[worst] {
                    worst = i;
                }
            }
            let mut g = RealVector::zeros(n);
            g[worst] = -1.0;
            Ok(OracleReply {
                answer: OracleAnswer::Cut(g),
                case: "halfspace",
                objective: Some(x[worst]),
            })
        };
        let run = ellipsoid_feasibility(n, 1.0, 1e-3, &mut oracle).unwrap();
        assert!(matches!(run.outcome, Feasibility::Empty));
        let floor = 1.0 / (2.0 * (n as f64 + 1.0)) - 1e-12;
        let mut prev = 0.0; // log-volume of the radius-1 starting ball
        for rec in &run.log {
            assert!(
                prev - rec.log_volume >= floor,
                "contraction {} below floor {floor}",
                prev - rec.log_volume
            );
            prev = rec.log_volume;
        }
    }

    #[test]
    fn random_halfspace_systems_match_a_projection_oracle() {
        use crate::testutil::rng;
        use rand::Rng;

        // Feasibility of {a_i·x ≤ b_i} decided two independent ways: the
        // ellipsoid method against a first-violated-constraint oracle, and
        // cyclic projection onto the halfspaces. Instances are built with a
        // known inner ball (feasible) or an embedded contradictory pair
        // (infeasible) so the projection verdict is itself checkable.
        for trial in 0..50 {
            let mut r = rng(9000 + trial);
            let n = 3 + (trial as usize % 8);
            let m = 2 * n + 2;
            let feasible = trial % 2 == 0;

            let mut normals: Vec<RealVector> = Vec::new();
            let mut offsets: Vec<f64> = Vec::new();
            let anchor = RealVector::from_fn(n, |_, _| 2.0 * r.random::<f64>() - 1.0) * 2.0;
            for _ in 0..m {
                let mut a = RealVector::from_fn(n, |_, _| 2.0 * r.random::<f64>() - 1.0);
                while a.norm() < 1e-3 {
                    a = RealVector::from_fn(n, |_, _| 2.0 * r.random::<f64>() - 1.0);
                }
                a /= a.norm();
                let b = if feasible {
                    // Leave a margin so a ball of radius 0.1 around the
                    // anchor is contained.
                    a.dot(&anchor) + 0.1 + r.random::<f64>()
                } else {
                    a.dot(&anchor) + r.random::<f64>()
                };
                normals.push(a);
                offsets.push(b);
            }
            if !feasible {
                // a·x ≤ a·anchor − 1 and −a·x ≤ −a·anchor − 1 cannot both
                // hold.
                let mut a = RealVector::zeros(n);
                a[0] = 1.0;
                normals.push(a.clone());
                offsets.push(a.dot(&anchor) - 1.0);
                normals.push(-a.clone());
                offsets.push(-a.dot(&anchor) - 1.0);
            }

            // Route one: cyclic projection. Converges into the feasible set
            // when there is one; otherwise some violation persists.
            let mut x = RealVector::zeros(n);
            for _ in 0..4000 {
                for (a, &b) in normals.iter().zip(&offsets) {
                    let v = a.dot(&x) - b;
                    if v > 0.0 {
                        x -= a * v;
                    }
                }
            }
            let projection_feasible = normals
                .iter()
                .zip(&offsets)
                .all(|(a, &b)| a.dot(&x) <= b + 1e-9);

            // Route two: ellipsoid with a first-violated cut.
            let mut oracle = |y: &RealVector| {
                for (a, &b) in normals.iter().zip(&offsets) {
                    if a.dot(y) > b {
                        return Ok(OracleReply {
                            answer: OracleAnswer::Cut(a.clone()),
                            case: "halfspace",
                            objective: Some(a.dot(y) - b),
                        });
                    }
                }
                Ok(OracleReply {
                    answer: OracleAnswer::Accept,
                    case: "feasible",
                    objective: None,
                })
            };
            let run = ellipsoid_feasibility(n, 8.0, 0.05, &mut oracle).unwrap();
            let ellipsoid_feasible = matches!(run.outcome, Feasibility::Feasible { .. });

            assert_eq!(ellipsoid_feasible, feasible, "construction, trial {trial}");
            assert_eq!(projection_feasible, feasible, "projection, trial {trial}");
            if let Feasibility::Feasible { point } = run.outcome {
                for (a, &b) in normals.iter().zip(&offsets) {
                    assert!(a.dot(&point) <= b + 1e-9);
                }
            }
        }
    }

    #[test]
    fn state_validation_rejects_bad_shapes() {
        let c = RealVector::zeros(2);
        let asym = RealMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        assert!(EllipsoidState::new(c.clone(), asym, 0).is_err());
        let indefinite = RealMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(EllipsoidState::new(c.clone(), indefinite, 0).is_err());
        let wrong_dim = RealMatrix::identity(3, 3);
        assert!(EllipsoidState::new(c, wrong_dim, 0).is_err());
    }

    #[test]
    fn zero_gradient_is_a_breakdown_not_a_loop() {
        let mut oracle = |_x: &RealVector| {
            Ok(OracleReply {
                answer: OracleAnswer::Cut(RealVector::zeros(3)),
                case: "halfspace",
                objective: None,
            })
        };
        let err = ellipsoid_feasibility(3, 1.0, 0.1, &mut oracle).unwrap_err();
        assert!(matches!(err, Error::EllipsoidBreakdown { .. }));
    }
}
