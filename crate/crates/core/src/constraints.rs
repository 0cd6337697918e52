//! Constraint handling: penalty functions, penalized Hamiltonians, conditional
//! ancilla gates with measure-and-branch trajectories, and dynamical
//! decoupling onto the feasible subspace of equality constraints.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::encoding::DiagonalHamiltonian;
use crate::error::{Error, Result};
use crate::operators::apply_local_raw;
use crate::qaoa::{expectation, LayerRecord, MixerKind, MixerSpec, QaoaParams, TrialState};
use crate::register::{Assignment, QuditRegister, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// g(z) = 0
    Equality,
    /// g(z) <= 0
    Inequality,
}

/// One constraint g(z) with its penalty shape `P[g] = |g|^a` (equality) or
/// `max(0, g)^a` (inequality) and weight lambda.
#[derive(Clone)]
pub struct ConstraintSpec {
    name: String,
    kind: ConstraintKind,
    exponent: u32,
    weight: f64,
    evaluator: Arc<dyn Fn(&Assignment) -> f64 + Send + Sync>,
}

impl fmt::Debug for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSpec")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("exponent", &self.exponent)
            .field("weight", &self.weight)
            .finish()
    }
}

impl ConstraintSpec {
    /// Equality constraint with the default exponent a = 2.
    pub fn equality<F>(name: impl Into<String>, weight: f64, evaluator: F) -> Self
    where
        F: Fn(&Assignment) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: ConstraintKind::Equality,
            exponent: 2,
            weight,
            evaluator: Arc::new(evaluator),
        }
    }

    /// Inequality constraint with the default exponent a = 1.
    pub fn inequality<F>(name: impl Into<String>, weight: f64, evaluator: F) -> Self
    where
        F: Fn(&Assignment) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: ConstraintKind::Inequality,
            exponent: 1,
            weight,
            evaluator: Arc::new(evaluator),
        }
    }

    pub fn with_exponent(mut self, exponent: u32) -> Self {
        assert!(exponent >= 1, "penalty exponent must be at least 1");
        self.exponent = exponent;
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Raw constraint value g(z).
    pub fn evaluate(&self, z: &Assignment) -> f64 {
        (self.evaluator)(z)
    }

    /// Unweighted penalty P[g(z)].
    pub fn penalty(&self, z: &Assignment) -> f64 {
        penalty_value(self.evaluate(z), self.kind, self.exponent)
    }

    pub fn is_violated(&self, z: &Assignment) -> bool {
        let g = self.evaluate(z);
        match self.kind {
            ConstraintKind::Equality => g != 0.0,
            ConstraintKind::Inequality => g > 0.0,
        }
    }
}

/// P[g]: zero iff the constraint is satisfied, growing as |g|^a past it.
pub fn penalty_value(g: f64, kind: ConstraintKind, exponent: u32) -> f64 {
    let base = match kind {
        ConstraintKind::Equality => g.abs(),
        ConstraintKind::Inequality => g.max(0.0),
    };
    base.powi(exponent as i32)
}

/// C~(z) = C(z) + sum_m lambda_m P_m[g_m(z)] as a closure over the base cost.
pub fn penalized_cost<'a, F>(
    base: F,
    constraints: &'a [ConstraintSpec],
) -> impl Fn(&Assignment) -> f64 + 'a
where
    F: Fn(&Assignment) -> f64 + 'a,
{
    move |z| {
        let mut total = base(z);
        for c in constraints {
            total += c.weight * c.penalty(z);
        }
        total
    }
}

/// Diagonal of the penalized cost over all basis states.
pub fn penalized_diagonal(
    base: &DiagonalHamiltonian,
    constraints: &[ConstraintSpec],
) -> Result<DiagonalHamiltonian> {
    let register = base.register();
    let mut values = base.values().to_vec();
    for (index, assignment) in register.assignments().enumerate() {
        for c in constraints {
            values[index] += c.weight * c.penalty(&assignment);
        }
    }
    DiagonalHamiltonian::from_values(register, values)
}

/// Base cost, its constraints, and the derived penalized diagonal.
#[derive(Debug, Clone)]
pub struct PenalizedProblem {
    base: DiagonalHamiltonian,
    constraints: Vec<ConstraintSpec>,
    penalized: DiagonalHamiltonian,
}

impl PenalizedProblem {
    pub fn new(base: DiagonalHamiltonian, constraints: Vec<ConstraintSpec>) -> Result<Self> {
        let penalized = penalized_diagonal(&base, &constraints)?;
        Ok(Self {
            base,
            constraints,
            penalized,
        })
    }

    pub fn base(&self) -> &DiagonalHamiltonian {
        &self.base
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    pub fn penalized(&self) -> &DiagonalHamiltonian {
        &self.penalized
    }
}

/// Penalized expectation of a trial state whose circuit ran on the
/// unpenalized Hamiltonian: sum_z P(z) C~(z).
pub fn classical_loop_objective(
    state: &StateVector,
    base: &DiagonalHamiltonian,
    constraints: &[ConstraintSpec],
) -> Result<f64> {
    let penalized = penalized_diagonal(base, constraints)?;
    expectation(state, &penalized)
}

/// Diagonal 0/1 indicator H_g: 1 on basis states violating the constraint.
pub fn violation_indicator_diagonal(
    register: QuditRegister,
    constraint: &ConstraintSpec,
) -> Result<DiagonalHamiltonian> {
    DiagonalHamiltonian::from_cost(register, |z| constraint.is_violated(z) as u8 as f64)
}

/// Projector onto the joint kernel of a family of integer-spectrum equality
/// constraints, with each constraint's largest absolute eigenvalue.
#[derive(Debug, Clone)]
pub struct FeasibleProjector {
    register: QuditRegister,
    mask: Vec<bool>,
    largest_eigenvalues: Vec<u64>,
}

impl FeasibleProjector {
    pub fn register(&self) -> QuditRegister {
        self.register
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn largest_eigenvalues(&self) -> &[u64] {
        &self.largest_eigenvalues
    }

    pub fn feasible_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Zero all infeasible amplitudes and renormalize. Returns the discarded
    /// probability mass; fails if essentially nothing survives.
    pub fn project_renormalize(&self, state: &mut StateVector) -> Result<f64> {
        if state.register() != self.register {
            return Err(Error::RegisterMismatch(
                "projector register does not match state".into(),
            ));
        }
        let mut leaked = 0.0;
        for (amp, &keep) in state.amplitudes_mut().iter_mut().zip(&self.mask) {
            if !keep {
                leaked += amp.norm_sqr();
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        let remaining = state.norm();
        if remaining < 1e-12 {
            return Err(Error::DegenerateEvolution { overlap: remaining });
        }
        state.normalize();
        Ok(leaked)
    }

    /// Equal superposition over the feasible basis states.
    pub fn uniform_feasible_state(&self) -> StateVector {
        let count = self.feasible_count();
        let amp = Complex64::new(1.0 / (count as f64).sqrt(), 0.0);
        let amps: Array1<Complex64> = self
            .mask
            .iter()
            .map(|&keep| if keep { amp } else { Complex64::new(0.0, 0.0) })
            .collect();
        StateVector::from_amplitudes(self.register, amps).expect("mask length matches register")
    }
}

/// Build the feasible projector for equality constraints with integer values.
/// Rational-valued constraints must be pre-scaled by the caller.
pub fn feasible_projector(
    register: QuditRegister,
    constraints: &[ConstraintSpec],
) -> Result<FeasibleProjector> {
    let mut mask = vec![true; register.size()];
    let mut largest = Vec::with_capacity(constraints.len());
    for c in constraints {
        if c.kind() != ConstraintKind::Equality {
            return Err(Error::Constraint(format!(
                "dynamical decoupling handles equality constraints only, `{}` is an inequality",
                c.name()
            )));
        }
        let mut lambda_max = 0u64;
        for (index, assignment) in register.assignments().enumerate() {
            let g = c.evaluate(&assignment);
            if (g - g.round()).abs() > 1e-9 {
                return Err(Error::Constraint(format!(
                    "constraint `{}` is not integer-valued at z = {:?} (g = {g})",
                    c.name(),
                    assignment.digits()
                )));
            }
            let gi = g.round() as i64;
            if gi != 0 {
                mask[index] = false;
            }
            lambda_max = lambda_max.max(gi.unsigned_abs());
        }
        largest.push(lambda_max);
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::InfeasibleConstraints);
    }
    Ok(FeasibleProjector {
        register,
        mask,
        largest_eigenvalues: largest,
    })
}

/// Decoupled mixing step: standard mixer, then projection onto the feasible
/// subspace with renormalization. Returns the discarded mass.
pub fn dd_mixer_apply(
    state: &mut StateVector,
    beta: f64,
    projector: &FeasibleProjector,
) -> Result<f64> {
    let spec = MixerSpec::standard();
    crate::qaoa::apply_mixer(state, beta, &spec)?;
    projector.project_renormalize(state)
}

/// Discretized symmetrization average of a dense operator over one diagonal
/// constraint: (1/M) sum_j e^{-i theta_j G} Op e^{i theta_j G} with
/// theta_j = 2 pi j / M. For integer spectra and M > 2 max|g| this removes
/// every off-block element between distinct G eigenvalues. Dense test oracle.
pub fn symmetrize_operator_dense(
    op: &Array2<Complex64>,
    register: QuditRegister,
    constraint: &ConstraintSpec,
    num_points: usize,
) -> Array2<Complex64> {
    assert!(num_points >= 1);
    let size = register.size();
    assert_eq!(op.nrows(), size);
    let g: Vec<f64> = register
        .assignments()
        .map(|z| constraint.evaluate(&z))
        .collect();
    let mut acc = Array2::<Complex64>::zeros((size, size));
    for j in 0..num_points {
        let theta = 2.0 * PI * j as f64 / num_points as f64;
        for row in 0..size {
            for col in 0..size {
                // e^{-i theta g_row} op[row][col] e^{+i theta g_col}
                let phase = Complex64::from_polar(1.0, theta * (g[col] - g[row]));
                acc[(row, col)] += phase * op[(row, col)];
            }
        }
    }
    acc.mapv(|z| z / num_points as f64)
}

/// State of N qudits with one two-level ancilla appended as the
/// slowest-varying axis: amplitude index = z + y * d^N.
#[derive(Debug, Clone)]
pub struct AncillaState {
    qudits: QuditRegister,
    amplitudes: Array1<Complex64>,
}

impl AncillaState {
    /// Attach a fresh ancilla in |0> to a qudit state.
    pub fn attach(state: &StateVector) -> Self {
        let size = state.register().size();
        let mut amplitudes = Array1::zeros(2 * size);
        for (i, amp) in state.amplitudes().iter().enumerate() {
            amplitudes[i] = *amp;
        }
        Self {
            qudits: state.register(),
            amplitudes,
        }
    }

    pub fn qudit_register(&self) -> QuditRegister {
        self.qudits
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    /// Probability of reading 1 on the ancilla.
    pub fn ancilla_one_probability(&self) -> f64 {
        let size = self.qudits.size();
        self.amplitudes
            .iter()
            .skip(size)
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Phase separator on the qudit part, identical on both ancilla branches.
    pub fn apply_phase_separator(&mut self, h: &DiagonalHamiltonian, gamma: f64) -> Result<()> {
        if h.register() != self.qudits {
            return Err(Error::RegisterMismatch(
                "phase separator register does not match ancilla state".into(),
            ));
        }
        let size = self.qudits.size();
        for (i, &v) in h.values().iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -gamma * v);
            self.amplitudes[i] *= phase;
            self.amplitudes[i + size] *= phase;
        }
        Ok(())
    }

    /// Standard mixer on every qudit axis; the ancilla axis is untouched.
    pub fn apply_standard_mixer(&mut self, beta: f64, scale: f64) -> Result<()> {
        let d = self.qudits.dim();
        let u = crate::operators::exp_hermitian(&crate::operators::lx_matrix(d), beta * scale)?;
        let amps = self.amplitudes.as_slice_mut().expect("contiguous");
        let mut stride = 1usize;
        for _ in 0..self.qudits.num_qudits() {
            apply_local_raw(amps, d, stride, u.matrix());
            stride *= d;
        }
        Ok(())
    }

    /// Projective measurement of the ancilla followed by a reset to |0>:
    /// collapse onto the drawn outcome, renormalize, and move the surviving
    /// branch into the y = 0 block.
    pub fn measure_and_reset(&mut self, rng: &mut ChaCha8Rng) -> Result<bool> {
        let size = self.qudits.size();
        let p1 = self.ancilla_one_probability();
        let u: f64 = rng.gen();
        let outcome = u < p1;
        let branch_prob = if outcome { p1 } else { 1.0 - p1 };
        if branch_prob < 1e-24 {
            return Err(Error::Trajectory(format!(
                "measured ancilla branch {} with probability {branch_prob:.3e}",
                outcome as u8
            )));
        }
        let inv = Complex64::new(1.0 / branch_prob.sqrt(), 0.0);
        if outcome {
            for i in 0..size {
                self.amplitudes[i] = self.amplitudes[i + size] * inv;
                self.amplitudes[i + size] = Complex64::new(0.0, 0.0);
            }
        } else {
            for i in 0..size {
                self.amplitudes[i] *= inv;
                self.amplitudes[i + size] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }

    /// Drop the ancilla; it must be in |0> (call after `measure_and_reset`).
    pub fn detach(self) -> Result<StateVector> {
        let size = self.qudits.size();
        let residue: f64 = self
            .amplitudes
            .iter()
            .skip(size)
            .map(|z| z.norm_sqr())
            .sum();
        if residue > 1e-18 {
            return Err(Error::Trajectory(
                "ancilla not reset before detaching".into(),
            ));
        }
        let amps: Array1<Complex64> =
            self.amplitudes.iter().take(size).copied().collect();
        StateVector::from_amplitudes(self.qudits, amps)
    }
}

/// The conditional gate U_g = exp(-i H_g (x) (pi/2) X): on basis states
/// violating the constraint the ancilla undergoes -iX, elsewhere nothing.
pub fn conditional_gate_apply(state: &mut AncillaState, constraint: &ConstraintSpec) -> Result<()> {
    let register = state.qudit_register();
    let size = register.size();
    let minus_i = Complex64::new(0.0, -1.0);
    for (index, assignment) in register.assignments().enumerate() {
        if constraint.is_violated(&assignment) {
            let a0 = state.amplitudes[index];
            let a1 = state.amplitudes[index + size];
            state.amplitudes[index] = minus_i * a1;
            state.amplitudes[index + size] = minus_i * a0;
        }
    }
    Ok(())
}

/// Ancilla measurement record for one layer of a conditional trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerOutcome {
    /// Whether this layer's phase separator used the penalized Hamiltonian.
    pub penalized_branch: bool,
    /// Post-gate measurement outcome per constraint, in list order.
    pub outcomes: Vec<bool>,
}

/// Full provenance of one measure-and-branch trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AncillaRun {
    pub seed: u64,
    pub layers: Vec<LayerOutcome>,
}

/// One seeded trajectory of the conditional-gate scheme. Each layer applies
/// the phase separator with the Hamiltonian selected by the previous layer's
/// measurements (base on all-zero outcomes, penalized otherwise; the first
/// layer uses the base), mixes, then per constraint applies U_g, measures the
/// ancilla projectively, records the outcome, and resets.
pub fn run_conditional_trajectory(
    initial: &StateVector,
    h_base: &DiagonalHamiltonian,
    h_penalized: &DiagonalHamiltonian,
    params: &QaoaParams,
    mixer: &MixerSpec,
    constraints: &[ConstraintSpec],
    seed: u64,
) -> Result<(TrialState, AncillaRun)> {
    if mixer.kind() != MixerKind::StandardLx {
        return Err(Error::Unsupported(
            "conditional trajectories support the standard mixer only".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = AncillaState::attach(initial);
    let mut penalized_branch = false;
    let mut layers = Vec::with_capacity(params.depth());
    let mut layer_log = Vec::with_capacity(params.depth());

    for layer in 0..params.depth() {
        let h = if penalized_branch { h_penalized } else { h_base };
        state.apply_phase_separator(h, params.gammas()[layer])?;
        state.apply_standard_mixer(params.betas()[layer], mixer.scale())?;
        let mut outcomes = Vec::with_capacity(constraints.len());
        for c in constraints {
            conditional_gate_apply(&mut state, c)?;
            outcomes.push(state.measure_and_reset(&mut rng)?);
        }
        layers.push(LayerOutcome {
            penalized_branch,
            outcomes: outcomes.clone(),
        });
        let norm = state.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        layer_log.push(LayerRecord {
            layer,
            norm,
            dd_leakage: None,
            ancilla_outcomes: Some(outcomes.clone()),
            penalized_branch: Some(penalized_branch),
        });
        penalized_branch = outcomes.iter().any(|&b| b);
    }

    let final_state = state.detach()?;
    Ok((
        TrialState::new(final_state, params.clone(), layer_log),
        AncillaRun { seed, layers },
    ))
}

/// Aggregate statistics over many conditional trajectories.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionalStats {
    pub trajectories: usize,
    /// Frequency of outcome 1 per layer per constraint.
    pub one_frequency: Vec<Vec<f64>>,
    /// Mean basis-state probabilities of the final states.
    pub mean_probabilities: Vec<f64>,
    /// Mean penalized energy of the final states.
    pub mean_penalized_energy: f64,
    /// Trajectories discarded because a measurement hit a dead branch.
    pub discarded: usize,
}

/// Run `trajectories` seeded trajectories (seeds `master_seed + t`) and
/// aggregate ancilla statistics and the mean final distribution.
#[allow(clippy::too_many_arguments)]
pub fn run_conditional_ensemble(
    initial: &StateVector,
    h_base: &DiagonalHamiltonian,
    h_penalized: &DiagonalHamiltonian,
    params: &QaoaParams,
    mixer: &MixerSpec,
    constraints: &[ConstraintSpec],
    trajectories: usize,
    master_seed: u64,
) -> Result<ConditionalStats> {
    let p = params.depth();
    let m = constraints.len();
    let mut counts = vec![vec![0usize; m]; p];
    let mut mean_probs = vec![0.0f64; initial.register().size()];
    let mut energy_acc = 0.0;
    let mut completed = 0usize;
    let mut discarded = 0usize;
    for t in 0..trajectories {
        let seed = master_seed.wrapping_add(t as u64);
        match run_conditional_trajectory(
            initial,
            h_base,
            h_penalized,
            params,
            mixer,
            constraints,
            seed,
        ) {
            Ok((trial, run)) => {
                for (layer, rec) in run.layers.iter().enumerate() {
                    for (ci, &bit) in rec.outcomes.iter().enumerate() {
                        if bit {
                            counts[layer][ci] += 1;
                        }
                    }
                }
                for (acc, p) in mean_probs.iter_mut().zip(trial.state().probabilities()) {
                    *acc += p;
                }
                energy_acc += trial.energy(h_penalized)?;
                completed += 1;
            }
            Err(Error::Trajectory(msg)) => {
                log::warn!("discarding trajectory {t}: {msg}");
                discarded += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if completed == 0 {
        return Err(Error::Trajectory("all trajectories discarded".into()));
    }
    let inv = 1.0 / completed as f64;
    for p in mean_probs.iter_mut() {
        *p *= inv;
    }
    Ok(ConditionalStats {
        trajectories: completed,
        one_frequency: counts
            .into_iter()
            .map(|layer| layer.into_iter().map(|c| c as f64 * inv).collect())
            .collect(),
        mean_probabilities: mean_probs,
        mean_penalized_energy: energy_acc * inv,
        discarded,
    })
}
