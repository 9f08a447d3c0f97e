//! Measurements that tell quantum states apart: the optimal two-state
//! measurement and its extension to pairs of convex sets of states.
//!
//! For two known states the best binary measurement splits along the sign
//! of ρ₀ − ρ₁ and succeeds on a fair coin flip between them with
//! probability ½ + ¼‖ρ₀ − ρ₁‖tr. When all that is known is membership in
//! one of two disjoint convex sets, the same construction applied to the
//! *closest pair* of the two sets yields a single fixed measurement whose
//! sign observable separates the sets — every difference of members scores
//! at least the minimum distance d against it — and which therefore
//! succeeds with probability at least ½ + d/4 on any pair, not just the
//! one it was built from.

use num_complex::Complex64;

use crate::channel::{image_distance, MixedCircuit, DISTANCE_EPSILON};
use crate::error::{Error, Result};
use crate::hermitian::{
    c64, hs_inner, jordan_decompose, sorted_hermitian_eigen, spectral_norm, trace_norm,
    ComplexMatrix, DensityMatrix, HermitianMatrix,
};
use crate::sdp::{solve_blocks, BlockConstraint, BlockProblem, SolveStatus};
use crate::tol;

/// A positive operator-valued measurement: labelled effects, each positive
/// semidefinite, summing to the identity.
pub struct Povm {
    elements: Vec<(usize, HermitianMatrix)>,
}

impl Povm {
    pub fn new(elements: Vec<(usize, HermitianMatrix)>) -> Result<Self> {
        let dim = match elements.first() {
            Some((_, e)) => e.dim(),
            None => return Err(Error::Precondition("a measurement needs at least one effect".into())),
        };
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (label, e) in &elements {
            if e.dim() != dim {
                return Err(Error::Dimension(format!(
                    "effect {label} is {}-dimensional, expected {dim}",
                    e.dim()
                )));
            }
            if elements.iter().filter(|(l, _)| l == label).count() > 1 {
                return Err(Error::Label(format!("duplicate outcome label {label}")));
            }
            let eig = sorted_hermitian_eigen(e)?;
            if let Some(&min) = eig.values.first() {
                if min < -tol::TOL_PSD {
                    return Err(Error::NotPsd {
                        min_eigenvalue: min,
                        tolerance: tol::TOL_PSD,
                    });
                }
            }
            sum += &**e;
        }
        let defect = spectral_norm(&(sum - ComplexMatrix::identity(dim, dim)));
        if defect > 1e-9 {
            return Err(Error::Precondition(format!(
                "effects sum to identity only within {defect:.3e} (allowed 1e-9)"
            )));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[(usize, HermitianMatrix)] {
        &self.elements
    }

    pub fn element(&self, label: usize) -> Option<&HermitianMatrix> {
        self.elements
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, e)| e)
    }

    pub fn dim(&self) -> usize {
        self.elements[0].1.dim()
    }
}

/// A binary measurement (outcomes 0 and 1) packaged with the sign
/// observable `k = E₀ − E₁` it was built from and the set distance `d` it
/// certifies: every difference of states from the two sets scores at least
/// `d` against `k`.
pub struct SeparatingPovm {
    povm: Povm,
    k: HermitianMatrix,
    d: f64,
}

impl SeparatingPovm {
    fn from_sign_observable(e0: ComplexMatrix, k: ComplexMatrix, d: f64) -> Result<Self> {
        let dim = e0.nrows();
        let e1 = ComplexMatrix::identity(dim, dim) - &e0;
        let k = HermitianMatrix::new(k)?;
        if spectral_norm(&k) > 1.0 + 1e-8 {
            return Err(Error::Precondition(format!(
                "sign observable has norm {} > 1",
                spectral_norm(&k)
            )));
        }
        let povm = Povm::new(vec![
            (0, HermitianMatrix::new(e0)?),
            (1, HermitianMatrix::new(e1)?),
        ])?;
        let defect = {
            let e0 = povm.element(0).expect("outcome 0 exists");
            let e1 = povm.element(1).expect("outcome 1 exists");
            spectral_norm(&(&**e0 - &**e1 - &*k))
        };
        if defect > 1e-9 {
            return Err(Error::Precondition(format!(
                "E0 - E1 deviates from the sign observable by {defect:.3e}"
            )));
        }
        Ok(Self { povm, k, d })
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    /// The sign observable; `⟨k, ρ₀ − ρ₁⟩ ≥ d` for members of the sets the
    /// measurement was built for.
    pub fn k(&self) -> &HermitianMatrix {
        &self.k
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// A closed convex set of density matrices presented either as everything a
/// circuit can emit or as the mixtures of finitely many listed states.
pub struct ConvexStateSet {
    kind: SetKind,
}

enum SetKind {
    ChannelImage(MixedCircuit),
    Hull(Vec<DensityMatrix>),
}

impl ConvexStateSet {
    pub fn channel_image(q: MixedCircuit) -> Self {
        Self {
            kind: SetKind::ChannelImage(q),
        }
    }

    pub fn hull(states: Vec<DensityMatrix>) -> Result<Self> {
        let dim = match states.first() {
            Some(s) => s.dim(),
            None => return Err(Error::Precondition("hull of an empty list".into())),
        };
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::Dimension(format!(
                "hull members disagree: {dim} vs {}",
                bad.dim()
            )));
        }
        Ok(Self {
            kind: SetKind::Hull(states),
        })
    }

    /// Dimension of the states in the set.
    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::ChannelImage(q) => q.out_dim(),
            SetKind::Hull(states) => states[0].dim(),
        }
    }

    /// Dimension of the SDP variable parametrizing the set: circuit input
    /// for an image, number of vertices for a hull.
    fn var_dim(&self) -> usize {
        match &self.kind {
            SetKind::ChannelImage(q) => q.in_dim(),
            SetKind::Hull(states) => states.len(),
        }
    }

    /// Pulls the output-side matrix unit E^{ij} back to the variable space:
    /// the matrix C with ⟨C, x⟩ = member(x)[(i, j)].
    fn pull_back_unit(&self, i: usize, j: usize) -> ComplexMatrix {
        match &self.kind {
            SetKind::ChannelImage(q) => {
                let mut eij = ComplexMatrix::zeros(q.out_dim(), q.out_dim());
                eij[(i, j)] = c64(1.0, 0.0);
                q.pull_back(&eij)
            }
            SetKind::Hull(states) => ComplexMatrix::from_fn(states.len(), states.len(), |k, l| {
                if k == l {
                    states[k][(j, i)]
                } else {
                    Complex64::ZERO
                }
            }),
        }
    }

    /// The member selected by a variable-space point: circuit output, or
    /// the mixture weighted by the diagonal.
    fn member(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        match &self.kind {
            SetKind::ChannelImage(q) => q.apply_matrix(x),
            SetKind::Hull(states) => {
                let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
                for (k, s) in states.iter().enumerate() {
                    out += &**s * x[(k, k)];
                }
                Ok(out)
            }
        }
    }
}

struct SetDistance {
    d: f64,
    certified_lower: f64,
    delta: HermitianMatrix,
}

/// Minimum trace distance between two convex sets with the same split-
/// difference program as the two-image case; a hull contributes a weight
/// matrix whose off-diagonal is pinned to zero, so the feasible diagonals
/// are exactly the probability simplex over its vertices.
fn set_distance(a0: &ConvexStateSet, a1: &ConvexStateSet) -> Result<SetDistance> {
    if let (SetKind::ChannelImage(q0), SetKind::ChannelImage(q1)) = (&a0.kind, &a1.kind) {
        let r = image_distance(q0, q1)?;
        return Ok(SetDistance {
            d: r.d,
            certified_lower: r.certified_lower,
            delta: r.delta,
        });
    }
    let dv0 = a0.var_dim();
    let dv1 = a1.var_dim();
    let dout = a0.dim();
    let eye_out = ComplexMatrix::identity(dout, dout);

    let mut constraints = vec![
        BlockConstraint {
            terms: vec![(0, ComplexMatrix::identity(dv0, dv0))],
            rhs: c64(1.0, 0.0),
        },
        BlockConstraint {
            terms: vec![(1, ComplexMatrix::identity(dv1, dv1))],
            rhs: c64(1.0, 0.0),
        },
        BlockConstraint {
            terms: vec![
                (2, eye_out.clone()),
                (3, eye_out.clone()),
                (4, ComplexMatrix::identity(1, 1)),
            ],
            rhs: c64(4.0, 0.0),
        },
    ];
    for (slot, set, dv) in [(0usize, a0, dv0), (1, a1, dv1)] {
        if let SetKind::Hull(_) = set.kind {
            for k in 0..dv {
                for l in (k + 1)..dv {
                    let mut ekl = ComplexMatrix::zeros(dv, dv);
                    ekl[(k, l)] = c64(1.0, 0.0);
                    constraints.push(BlockConstraint {
                        terms: vec![(slot, ekl)],
                        rhs: Complex64::ZERO,
                    });
                }
            }
        }
    }
    for i in 0..dout {
        for j in i..dout {
            let mut eij = ComplexMatrix::zeros(dout, dout);
            eij[(i, j)] = c64(1.0, 0.0);
            constraints.push(BlockConstraint {
                terms: vec![
                    (2, eij.clone()),
                    (3, -&eij),
                    (0, -a0.pull_back_unit(i, j)),
                    (1, a1.pull_back_unit(i, j)),
                ],
                rhs: Complex64::ZERO,
            });
        }
    }

    let v0_init = ComplexMatrix::identity(dv0, dv0) / c64(dv0 as f64, 0.0);
    let v1_init = ComplexMatrix::identity(dv1, dv1) / c64(dv1 as f64, 0.0);
    let delta_init = a0.member(&v0_init)? - a1.member(&v1_init)?;
    let (p_init, n_init) = jordan_decompose(&HermitianMatrix::new(delta_init)?)?;
    let slack_init = ComplexMatrix::from_element(
        1,
        1,
        c64(4.0 - p_init.trace().re - n_init.trace().re, 0.0),
    );
    let problem = BlockProblem {
        dims: vec![dv0, dv1, dout, dout, 1],
        objective: vec![
            ComplexMatrix::zeros(dv0, dv0),
            ComplexMatrix::zeros(dv1, dv1),
            -&eye_out,
            -&eye_out,
            ComplexMatrix::zeros(1, 1),
        ],
        constraints,
        x_init: vec![v0_init, v1_init, p_init, n_init, slack_init],
        bound_b: 4.0,
        epsilon: DISTANCE_EPSILON,
    };
    let sol = solve_blocks(&problem);
    if sol.status != SolveStatus::Optimal {
        return Err(Error::SolverFailure {
            status: match sol.status {
                SolveStatus::MaxIter => "max_iter",
                _ => "numerical_failure",
            },
            iterations: sol.iterations,
            gap: sol.dual_bound - sol.objective_value,
            residual: sol.constraint_residual,
        });
    }
    let raw = a0.member(&sol.x[0])? - a1.member(&sol.x[1])?;
    let delta = HermitianMatrix::new((&raw + raw.adjoint()) / c64(2.0, 0.0))?;
    Ok(SetDistance {
        d: trace_norm(&delta),
        certified_lower: -sol.dual_bound,
        delta,
    })
}

/// Support projectors onto the strictly positive and strictly negative
/// eigenspaces. Eigenvalues within 1e−8 of zero (relative to the largest)
/// are assigned to neither: at that size their sign is solver noise, and
/// the even kernel split is the safe destination for them.
fn signed_projectors(delta: &HermitianMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let eig = sorted_hermitian_eigen(delta)?;
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = 1e-8 * scale;
    let n = delta.dim();
    let mut plus = ComplexMatrix::zeros(n, n);
    let mut minus = ComplexMatrix::zeros(n, n);
    for (idx, &v) in eig.values.iter().enumerate() {
        let col = eig.vectors.column(idx);
        if v > cutoff {
            plus += &col * col.adjoint();
        } else if v < -cutoff {
            minus += &col * col.adjoint();
        }
    }
    Ok((plus, minus))
}

fn sign_measurement(delta: &HermitianMatrix, d: f64) -> Result<SeparatingPovm> {
    let (plus, minus) = signed_projectors(delta)?;
    let n = delta.dim();
    let eye = ComplexMatrix::identity(n, n);
    let kernel = &eye - &plus - &minus;
    let e0 = &plus + kernel / c64(2.0, 0.0);
    SeparatingPovm::from_sign_observable(e0, plus - minus, d)
}

/// The optimal binary measurement for two known states: project onto the
/// sign of ρ₀ − ρ₁, splitting the kernel evenly. On a fair coin flip
/// between the states it succeeds with probability ½ + ¼‖ρ₀ − ρ₁‖tr.
pub fn helstrom_povm(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<SeparatingPovm> {
    if rho0.dim() != rho1.dim() {
        return Err(Error::Dimension(format!(
            "states have dimensions {} and {}",
            rho0.dim(),
            rho1.dim()
        )));
    }
    let delta = HermitianMatrix::new(&**rho0 - &**rho1)?;
    let d = trace_norm(&delta);
    sign_measurement(&delta, d)
}

/// A single measurement distinguishing two disjoint convex sets: the sign
/// measurement of the difference at the closest pair. Its observable
/// separates the sets — ⟨k, ρ₀ − ρ₁⟩ ≥ d for all members — so the success
/// probability on a fair coin flip is at least ½ + d/4 for *any* pair, and
/// at least d/2 even when only one side's states ever show up. When the
/// sets overlap to within solver accuracy there is nothing to separate and
/// the fair coin E₀ = E₁ = I/2 is returned.
pub fn set_povm(a0: &ConvexStateSet, a1: &ConvexStateSet) -> Result<SeparatingPovm> {
    if a0.dim() != a1.dim() {
        return Err(Error::Dimension(format!(
            "sets live in dimensions {} and {}",
            a0.dim(),
            a1.dim()
        )));
    }
    let dist = set_distance(a0, a1)?;
    // The branch tests the certified bound, not the achieved distance: the
    // achieved value can sit a solver-accuracy above zero for genuinely
    // intersecting sets, while the certified bound cannot.
    if dist.certified_lower <= 1e-8 || dist.d <= 1e-8 {
        let n = a0.dim();
        let half = ComplexMatrix::identity(n, n) / c64(2.0, 0.0);
        return SeparatingPovm::from_sign_observable(
            half,
            ComplexMatrix::zeros(n, n),
            dist.d.min(dist.certified_lower.max(0.0)),
        );
    }
    sign_measurement(&dist.delta, dist.d)
}

/// Success probability of a measurement on labelled states: each state is
/// drawn with its listed weight and the measurement is correct when it
/// returns that state's outcome label.
pub fn povm_success(
    povm: &Povm,
    pairs: &[(DensityMatrix, usize)],
    weights: &[f64],
) -> Result<f64> {
    if pairs.len() != weights.len() {
        return Err(Error::Precondition(format!(
            "{} states but {} weights",
            pairs.len(),
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < -1e-12) {
        return Err(Error::Precondition(format!(
            "weights must form a probability distribution, sum {total}"
        )));
    }
    let mut success = 0.0;
    for ((rho, label), &w) in pairs.iter().zip(weights) {
        if rho.dim() != povm.dim() {
            return Err(Error::Dimension(format!(
                "state is {}-dimensional, measurement acts on {}",
                rho.dim(),
                povm.dim()
            )));
        }
        let effect = povm
            .element(*label)
            .ok_or_else(|| Error::Label(format!("measurement has no outcome {label}")))?;
        success += w * hs_inner(effect, rho).re;
    }
    Ok(success)
}
