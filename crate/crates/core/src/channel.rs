//! Mixed-state circuits in Stinespring form and the minimum trace distance
//! between the images of two of them.
//!
//! A circuit with input space F, output space G, and ancilla G′ is a single
//! unitary `U` on F ⊗ G ⊗ G′ applied after padding the input with ground
//! ancillas; the output is what remains of `U (ρ ⊗ |0⟩⟨0|) U*` on G. Because
//! the map is linear on density inputs, its image — everything the circuit
//! can emit — is a compact convex set, and the smallest trace distance
//! between two such images is again a semidefinite program.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{
    c64, jordan_decompose, trace_norm, ComplexMatrix, DensityMatrix, HermitianMatrix, SpaceLayout,
    UnitaryMatrix,
};
use crate::sdp::{solve_blocks, BlockConstraint, BlockProblem, SolveStatus};

/// Accuracy of the internal distance solve. The reported distance is then
/// recomputed from the minimizers, so it overshoots the true minimum by at
/// most this much and never undershoots.
pub(crate) const DISTANCE_EPSILON: f64 = 1e-7;

/// A mixed-state circuit: input F, output G, ancilla G′, with the
/// Stinespring unitary stored in that factor order (F most significant).
pub struct MixedCircuit {
    in_dim: usize,
    out_dim: usize,
    env_dim: usize,
    stinespring: UnitaryMatrix,
}

impl MixedCircuit {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        env_dim: usize,
        stinespring: UnitaryMatrix,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 || env_dim == 0 {
            return Err(Error::Precondition("circuit dimensions must be positive".into()));
        }
        let want = in_dim * out_dim * env_dim;
        if stinespring.dim() != want {
            return Err(Error::Dimension(format!(
                "Stinespring unitary has dimension {}, expected {in_dim}·{out_dim}·{env_dim} = {want}",
                stinespring.dim()
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            env_dim,
            stinespring,
        })
    }

    /// Same-sized input and output, with the unitary defaulting to a bare
    /// swap of F into G: the identity channel. Callers wanting a different
    /// circuit on the default ancilla size (dim G′ = dim G) go through
    /// [`MixedCircuit::new`].
    pub fn identity(dim: usize) -> Self {
        let u = swap_unitary(dim);
        Self::new(dim, dim, 1, UnitaryMatrix::new(u).expect("swap is unitary"))
            .expect("dimensions agree by construction")
    }

    /// Ignores its input entirely and emits `|c⟩⟨c|`: the input is swapped
    /// into the ancilla and the fresh output register is shifted from the
    /// ground state to `|c⟩`.
    pub fn constant(in_dim: usize, out_dim: usize, c: usize) -> Result<Self> {
        if c >= out_dim {
            return Err(Error::Precondition(format!(
                "constant output |{c}⟩ does not fit in dimension {out_dim}"
            )));
        }
        let layout = SpaceLayout::new(vec![("in", in_dim), ("out", out_dim), ("env", in_dim)])?;
        let swap_in_env = layout.embed_lift(&swap_unitary(in_dim), &["in", "env"])?;
        let shift = ComplexMatrix::from_fn(out_dim, out_dim, |i, j| {
            if i == (j + c) % out_dim {
                c64(1.0, 0.0)
            } else {
                Complex64::ZERO
            }
        });
        let mark = layout.embed_lift(&shift, &["out"])?;
        let u = UnitaryMatrix::new(mark * swap_in_env)?;
        Self::new(in_dim, out_dim, in_dim, u)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn stinespring(&self) -> &UnitaryMatrix {
        &self.stinespring
    }

    /// The linear extension of the channel to arbitrary matrices on F,
    /// evaluated through the Stinespring formula in dense arithmetic.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.nrows() != self.in_dim || m.ncols() != self.in_dim {
            return Err(Error::Dimension(format!(
                "input is {}x{}, circuit input dimension {}",
                m.nrows(),
                m.ncols(),
                self.in_dim
            )));
        }
        let layout = SpaceLayout::new(vec![
            ("in", self.in_dim),
            ("out", self.out_dim),
            ("env", self.env_dim),
        ])?;
        let d = layout.total_dim();
        let ge = self.out_dim * self.env_dim;
        // m ⊗ |0⟩⟨0| on G ⊗ G′.
        let mut padded = ComplexMatrix::zeros(d, d);
        for f in 0..self.in_dim {
            for f2 in 0..self.in_dim {
                padded[(f * ge, f2 * ge)] = m[(f, f2)];
            }
        }
        let evolved = &*self.stinespring * padded * self.stinespring.adjoint();
        Ok(layout.partial_trace(&evolved, &["in", "env"])?.0)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_matrix(rho)?)
    }

    /// Kraus operators read off the ground-ancilla columns of the
    /// Stinespring unitary: operator `(f′, e)` has entries
    /// `U[(f′, g, e), (f, 0, 0)]`. The channel is `ρ ↦ Σ_k A_k ρ A_k*`.
    pub fn kraus(&self) -> Vec<ComplexMatrix> {
        let u = &*self.stinespring;
        let ge = self.out_dim * self.env_dim;
        let mut out = Vec::with_capacity(self.in_dim * self.env_dim);
        for fp in 0..self.in_dim {
            for e in 0..self.env_dim {
                out.push(ComplexMatrix::from_fn(self.out_dim, self.in_dim, |g, f| {
                    u[(fp * ge + g * self.env_dim + e, f * ge)]
                }));
            }
        }
        out
    }

    /// Adjoint map `M ↦ Σ_k A_k* M A_k` pulling output observables back to
    /// the input space.
    pub(crate) fn pull_back(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for a in self.kraus() {
            out += a.adjoint() * m * a;
        }
        out
    }
}

fn swap_unitary(dim: usize) -> ComplexMatrix {
    let n = dim * dim;
    ComplexMatrix::from_fn(n, n, |row, col| {
        let (a, b) = (row / dim, row % dim);
        if col == b * dim + a {
            c64(1.0, 0.0)
        } else {
            Complex64::ZERO
        }
    })
}

pub struct CloseImagesInstance {
    pub q0: MixedCircuit,
    pub q1: MixedCircuit,
    pub epsilon: f64,
}

impl CloseImagesInstance {
    pub fn new(q0: MixedCircuit, q1: MixedCircuit, epsilon: f64) -> Result<Self> {
        if q0.in_dim != q1.in_dim || q0.out_dim != q1.out_dim {
            return Err(Error::Dimension(format!(
                "circuits disagree: {}→{} vs {}→{}",
                q0.in_dim, q0.out_dim, q1.in_dim, q1.out_dim
            )));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::Precondition(format!(
                "promise gap must lie in (0, 1], got {epsilon}"
            )));
        }
        Ok(Self { q0, q1, epsilon })
    }
}

pub struct ImageDistanceResult {
    /// Minimum of ‖q0(ρ₀) − q1(ρ₁)‖tr over density inputs, recomputed from
    /// the returned minimizers (so it upper-bounds the true minimum by at
    /// most the solver accuracy).
    pub d: f64,
    pub rho0_star: DensityMatrix,
    pub rho1_star: DensityMatrix,
    /// The achieved difference q0(rho0_star) − q1(rho1_star).
    pub delta: HermitianMatrix,
    /// Certified lower bound on the true minimum, from the solver's dual
    /// bound; `d` can overshoot by the solver accuracy, this cannot.
    pub(crate) certified_lower: f64,
}

/// Minimum trace distance between the images of two circuits.
///
/// Joint program over inputs and the split difference: variables
/// `ρ₀, ρ₁ ⪰ 0` (unit trace), `P, N ⪰ 0` with `P − N = q0(ρ₀) − q1(ρ₁)`,
/// minimizing `tr(P + N)`. At the optimum P and N are the positive and
/// negative parts, so the objective is exactly the trace norm; a slack
/// scalar caps `tr(P + N)` at 4 to give the solver its norm bound without
/// cutting off any candidate below the trivial distance bound of 2.
pub fn image_distance(q0: &MixedCircuit, q1: &MixedCircuit) -> Result<ImageDistanceResult> {
    if q0.in_dim != q1.in_dim || q0.out_dim != q1.out_dim {
        return Err(Error::Dimension(format!(
            "circuits disagree: {}→{} vs {}→{}",
            q0.in_dim, q0.out_dim, q1.in_dim, q1.out_dim
        )));
    }
    let di = q0.in_dim;
    let do_ = q0.out_dim;
    let eye_in = ComplexMatrix::identity(di, di);
    let eye_out = ComplexMatrix::identity(do_, do_);

    let mut constraints = vec![
        BlockConstraint {
            terms: vec![(0, eye_in.clone())],
            rhs: c64(1.0, 0.0),
        },
        BlockConstraint {
            terms: vec![(1, eye_in.clone())],
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
    for i in 0..do_ {
        for j in i..do_ {
            let mut eij = ComplexMatrix::zeros(do_, do_);
            eij[(i, j)] = c64(1.0, 0.0);
            constraints.push(BlockConstraint {
                terms: vec![
                    (2, eij.clone()),
                    (3, -&eij),
                    (0, -q0.pull_back(&eij)),
                    (1, q1.pull_back(&eij)),
                ],
                rhs: Complex64::ZERO,
            });
        }
    }

    let rho_init = &eye_in / c64(di as f64, 0.0);
    let delta_init = q0.apply_matrix(&rho_init)? - q1.apply_matrix(&rho_init)?;
    let (p_init, n_init) = jordan_decompose(&HermitianMatrix::new(delta_init)?)?;
    let slack_init = ComplexMatrix::from_element(
        1,
        1,
        c64(4.0 - p_init.trace().re - n_init.trace().re, 0.0),
    );
    let mut objective: Vec<ComplexMatrix> = vec![
        ComplexMatrix::zeros(di, di),
        ComplexMatrix::zeros(di, di),
        -&eye_out,
        -&eye_out,
        ComplexMatrix::zeros(1, 1),
    ];
    let problem = BlockProblem {
        dims: vec![di, di, do_, do_, 1],
        objective: std::mem::take(&mut objective),
        constraints,
        x_init: vec![rho_init.clone(), rho_init, p_init, n_init, slack_init],
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
    let rho0_star = DensityMatrix::new(sol.x[0].clone())?;
    let rho1_star = DensityMatrix::new(sol.x[1].clone())?;
    let delta_m = q0.apply_matrix(&rho0_star)? - q1.apply_matrix(&rho1_star)?;
    let d = trace_norm(&delta_m);
    Ok(ImageDistanceResult {
        d,
        rho0_star,
        rho1_star,
        delta: HermitianMatrix::new(delta_m)?,
        certified_lower: -sol.dual_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromiseClass {
    Yes,
    No,
    Violated,
}

/// Classifies an instance against the close-images promise: `Yes` when the
/// images effectively intersect, `No` when they are almost maximally far
/// apart, `Violated` when the instance sits in the gap the promise
/// excludes.
pub fn classify_promise(inst: &CloseImagesInstance) -> Result<PromiseClass> {
    let result = image_distance(&inst.q0, &inst.q1)?;
    Ok(if result.d <= 1e-6 {
        PromiseClass::Yes
    } else if result.d > 2.0 - inst.epsilon {
        PromiseClass::No
    } else {
        PromiseClass::Violated
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::spectral_norm;
    use crate::testutil::{random_complex_matrix, random_density, random_unitary, rng};
    use rand::Rng;

    fn random_circuit(in_dim: usize, out_dim: usize, env_dim: usize, seed: u64) -> MixedCircuit {
        let u = random_unitary(in_dim * out_dim * env_dim, seed);
        MixedCircuit::new(in_dim, out_dim, env_dim, UnitaryMatrix::new(u).unwrap()).unwrap()
    }

    #[test]
    fn constant_circuit_ignores_its_input() {
        let q = MixedCircuit::constant(2, 2, 0).unwrap();
        for seed in [1u64, 2, 3] {
            let rho = DensityMatrix::new(random_density(2, 2, seed)).unwrap();
            let out = q.apply(&rho).unwrap();
            assert!((out[(0, 0)].re - 1.0).abs() < 1e-12);
            assert!(out[(1, 1)].norm() < 1e-12);
        }
        let q1 = MixedCircuit::constant(2, 2, 1).unwrap();
        let rho = DensityMatrix::new(random_density(2, 1, 7)).unwrap();
        let out = q1.apply(&rho).unwrap();
        assert!((out[(1, 1)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_circuit_routes_input_to_output() {
        let q = MixedCircuit::identity(3);
        let rho = DensityMatrix::new(random_density(3, 3, 11)).unwrap();
        let out = q.apply(&rho).unwrap();
        assert!((&*out - &*rho).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn stinespring_and_kraus_routes_agree() {
        for seed in [20u64, 21, 22] {
            let q = random_circuit(2, 3, 2, seed);
            let kraus = q.kraus();
            // Completeness: Σ A* A = I.
            let mut acc = ComplexMatrix::zeros(2, 2);
            for a in &kraus {
                acc += a.adjoint() * a;
            }
            assert!((acc - ComplexMatrix::identity(2, 2))
                .iter()
                .all(|z| z.norm() < 1e-10));

            let m = random_complex_matrix(2, 2, seed + 100);
            let hermitian_input = &m + m.adjoint();
            let via_stinespring = q.apply_matrix(&hermitian_input).unwrap();
            let mut via_kraus = ComplexMatrix::zeros(3, 3);
            for a in &kraus {
                via_kraus += a * &hermitian_input * a.adjoint();
            }
            assert!((via_stinespring - via_kraus).iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn apply_is_linear_and_trace_preserving() {
        let q = random_circuit(3, 2, 2, 30);
        let a = random_complex_matrix(3, 3, 31);
        let a = &a + a.adjoint();
        let b = random_complex_matrix(3, 3, 32);
        let b = &b + b.adjoint();
        let lam = 0.37;
        let mixed = q
            .apply_matrix(&(&a * c64(lam, 0.0) + &b * c64(1.0 - lam, 0.0)))
            .unwrap();
        let split =
            q.apply_matrix(&a).unwrap() * c64(lam, 0.0) + q.apply_matrix(&b).unwrap() * c64(1.0 - lam, 0.0);
        assert!((mixed - split).iter().all(|z| z.norm() < 1e-10));
        assert!((q.apply_matrix(&a).unwrap().trace() - a.trace()).norm() < 1e-10);
    }

    #[test]
    fn identical_circuits_have_distance_zero() {
        let q0 = random_circuit(2, 2, 2, 40);
        let q1 = random_circuit(2, 2, 2, 40);
        let result = image_distance(&q0, &q1).unwrap();
        assert!(result.d < 1e-6, "d = {}", result.d);
    }

    #[test]
    fn orthogonal_constants_have_distance_two() {
        let q0 = MixedCircuit::constant(2, 2, 0).unwrap();
        let q1 = MixedCircuit::constant(2, 2, 1).unwrap();
        let result = image_distance(&q0, &q1).unwrap();
        assert!((result.d - 2.0).abs() < 1e-6, "d = {}", result.d);
        // The achieved difference matches the advertised d exactly.
        assert!((trace_norm(&result.delta) - result.d).abs() < 1e-12);
    }

    #[test]
    fn distance_is_symmetric() {
        let q0 = random_circuit(2, 2, 2, 50);
        let q1 = random_circuit(2, 2, 2, 51);
        let forward = image_distance(&q0, &q1).unwrap().d;
        let backward = image_distance(&q1, &q0).unwrap().d;
        assert!((forward - backward).abs() < 1e-8);
    }

    /// Independent route to the minimum distance for one-qubit inputs:
    /// coarse sweep over Bloch-ball pairs, then shrinking random-direction
    /// refinement. The objective is jointly convex in the two Bloch
    /// vectors, so the local refinement converges to the global minimum.
    fn bloch_search(q0: &MixedCircuit, q1: &MixedCircuit, seed: u64) -> f64 {
        fn bloch(r: [f64; 3]) -> ComplexMatrix {
            ComplexMatrix::from_row_slice(2, 2, &[
                c64(0.5 * (1.0 + r[2]), 0.0),
                c64(0.5 * r[0], -0.5 * r[1]),
                c64(0.5 * r[0], 0.5 * r[1]),
                c64(0.5 * (1.0 - r[2]), 0.0),
            ])
        }
        fn clamp_ball(r: &mut [f64; 3]) {
            let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            if n > 1.0 {
                for x in r.iter_mut() {
                    *x /= n;
                }
            }
        }
        let eval = |r0: [f64; 3], r1: [f64; 3]| -> f64 {
            let delta = q0.apply_matrix(&bloch(r0)).unwrap() - q1.apply_matrix(&bloch(r1)).unwrap();
            trace_norm(&delta)
        };

        let steps = 6;
        let axis: Vec<f64> = (0..steps)
            .map(|i| -1.0 + 2.0 * i as f64 / (steps - 1) as f64)
            .collect();
        let mut best = f64::INFINITY;
        let mut arg = ([0.0; 3], [0.0; 3]);
        for &x0 in &axis {
            for &y0 in &axis {
                for &z0 in &axis {
                    let mut r0 = [x0, y0, z0];
                    clamp_ball(&mut r0);
                    for &x1 in &axis {
                        for &y1 in &axis {
                            for &z1 in &axis {
                                let mut r1 = [x1, y1, z1];
                                clamp_ball(&mut r1);
                                let v = eval(r0, r1);
                                if v < best {
                                    best = v;
                                    arg = (r0, r1);
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut r = rng(seed);
        let (mut r0, mut r1) = arg;
        let mut radius = 0.4;
        while radius > 1e-8 {
            let mut improved = false;
            for _ in 0..60 {
                let mut c0 = r0;
                let mut c1 = r1;
                for x in c0.iter_mut().chain(c1.iter_mut()) {
                    *x += radius * (r.random::<f64>() * 2.0 - 1.0);
                }
                clamp_ball(&mut c0);
                clamp_ball(&mut c1);
                let v = eval(c0, c1);
                if v < best - 1e-15 {
                    best = v;
                    r0 = c0;
                    r1 = c1;
                    improved = true;
                }
            }
            if !improved {
                radius *= 0.5;
            }
        }
        best
    }

    #[test]
    fn distance_matches_bloch_ball_search() {
        for seed in [60u64, 61, 62] {
            let q0 = random_circuit(2, 2, 2, seed);
            let q1 = random_circuit(2, 2, 2, seed + 500);
            let via_sdp = image_distance(&q0, &q1).unwrap().d;
            let via_search = bloch_search(&q0, &q1, seed + 1000);
            assert!(
                (via_sdp - via_search).abs() < 1e-3,
                "sdp {via_sdp} vs search {via_search}"
            );
        }
    }

    #[test]
    fn minimizers_achieve_the_reported_distance() {
        let q0 = random_circuit(2, 2, 2, 70);
        let q1 = random_circuit(2, 2, 2, 71);
        let result = image_distance(&q0, &q1).unwrap();
        let redo = q0.apply(&result.rho0_star).unwrap();
        let redo1 = q1.apply(&result.rho1_star).unwrap();
        let recomputed = trace_norm(&(&*redo - &*redo1));
        assert!((recomputed - result.d).abs() < 1e-6);
        assert!(spectral_norm(&result.delta) <= result.d + 1e-9);
    }

    #[test]
    fn promise_classification() {
        let q = MixedCircuit::constant(2, 2, 0).unwrap();
        let q_same = MixedCircuit::constant(2, 2, 0).unwrap();
        let q_other = MixedCircuit::constant(2, 2, 1).unwrap();
        let yes = CloseImagesInstance::new(q, q_same, 0.1).unwrap();
        assert_eq!(classify_promise(&yes).unwrap(), PromiseClass::Yes);

        let no = CloseImagesInstance::new(
            MixedCircuit::constant(2, 2, 0).unwrap(),
            q_other,
            0.1,
        )
        .unwrap();
        assert_eq!(classify_promise(&no).unwrap(), PromiseClass::No);

        // Two constant outputs at trace distance 1: one pure, one maximally
        // mixed. The mixed constant reuses the pure one's circuit followed
        // by a depolarizing swap trick; simpler here to synthesize directly:
        // output (|0⟩⟨0| + |1⟩⟨1|)/2 from a Hadamard-like rotation into the
        // ancilla. Easiest concrete circuit: route a fresh maximally mixed
        // state by swapping half of an entangled pair — which is exactly
        // what constant(2, 2, 0) composed with entangling on (out, env)
        // does. We build it as a Stinespring unitary by hand.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // On out ⊗ env (both qubits): |00⟩ ↦ (|00⟩ + |11⟩)/√2, an isometry
        // extended to a unitary via the Bell basis.
        let bell = ComplexMatrix::from_row_slice(4, 4, &[
            c64(h, 0.0), Complex64::ZERO, Complex64::ZERO, c64(h, 0.0),
            Complex64::ZERO, c64(h, 0.0), c64(h, 0.0), Complex64::ZERO,
            Complex64::ZERO, c64(h, 0.0), c64(-h, 0.0), Complex64::ZERO,
            c64(h, 0.0), Complex64::ZERO, Complex64::ZERO, c64(-h, 0.0),
        ]);
        let layout = SpaceLayout::new(vec![("in", 2), ("out", 2), ("env", 4)]).unwrap();
        // Swap the input into the back half of the ancilla, then entangle
        // out with the front half.
        let env_front_or_back = |m: &ComplexMatrix, labels: &[&str]| layout.embed_lift(m, labels).unwrap();
        // Treat env (dim 4) as two qubits by acting with explicit 4- and
        // 8-dimensional lifts; here we only need: entangler on (out, env)
        // acting as bell ⊗ I₂ under env = front ⊗ back.
        let mut entangle = ComplexMatrix::zeros(8, 8);
        for of in 0..4 {
            for ob in 0..4 {
                // indices (out, front, back) with bell acting on (out, front)
                let (o1, f1) = (of / 2, of % 2);
                let (o2, f2) = (ob / 2, ob % 2);
                for back in 0..2 {
                    let r = (o1 * 2 + f1) * 2 + back;
                    let c = (o2 * 2 + f2) * 2 + back;
                    entangle[(r, c)] = bell[(of, ob)];
                }
            }
        }
        let swap_in_back = {
            let mut m = ComplexMatrix::zeros(16, 16);
            for i in 0..2usize {
                for o in 0..2usize {
                    for f in 0..2usize {
                        for b in 0..2usize {
                            let row = ((b * 2 + o) * 2 + f) * 2 + i;
                            let col = ((i * 2 + o) * 2 + f) * 2 + b;
                            m[(row, col)] = c64(1.0, 0.0);
                        }
                    }
                }
            }
            m
        };
        let u = env_front_or_back(&entangle, &["out", "env"]);
        let mixed_constant = MixedCircuit::new(
            2,
            2,
            4,
            UnitaryMatrix::new(&u * swap_in_back).unwrap(),
        )
        .unwrap();
        // Sanity: output is I/2 for a couple of inputs.
        for seed in [80u64, 81] {
            let rho = DensityMatrix::new(random_density(2, 2, seed)).unwrap();
            let out = mixed_constant.apply(&rho).unwrap();
            assert!((&*out - ComplexMatrix::identity(2, 2) / c64(2.0, 0.0))
                .iter()
                .all(|z| z.norm() < 1e-10));
        }
        let gap = CloseImagesInstance::new(
            MixedCircuit::constant(2, 2, 0).unwrap(),
            mixed_constant,
            0.1,
        )
        .unwrap();
        assert_eq!(classify_promise(&gap).unwrap(), PromiseClass::Violated);
    }
}
