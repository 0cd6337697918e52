//! The alternating variational circuit: phase separation, mixing, energies,
//! and candidate-solution extraction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constraints::FeasibleProjector;
use crate::encoding::DiagonalHamiltonian;
use crate::error::{Error, Result};
use crate::operators::{apply_local_inplace, exp_hermitian, lx_matrix};
use crate::register::{Assignment, StateVector};

/// Variational angles, one (gamma, beta) pair per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::Consistency(format!(
                "parameter vectors must be nonempty and equal length, got {} gammas, {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    /// Split a flat `[gamma_1..gamma_p, beta_1..beta_p]` vector.
    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.is_empty() || x.len() % 2 != 0 {
            return Err(Error::Consistency(format!(
                "flat parameter vector must have even nonzero length, got {}",
                x.len()
            )));
        }
        let p = x.len() / 2;
        Self::new(x[..p].to_vec(), x[p..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.gammas.clone();
        out.extend_from_slice(&self.betas);
        out
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixerKind {
    StandardLx,
    DynamicalDecoupling,
}

/// Mixer choice. The platform drive strength is absorbed into `scale`
/// (default 1, multiplying beta). Dynamical decoupling carries the projector
/// onto the feasible subspace.
#[derive(Debug, Clone)]
pub struct MixerSpec {
    kind: MixerKind,
    scale: f64,
    projector: Option<FeasibleProjector>,
}

impl MixerSpec {
    pub fn standard() -> Self {
        Self {
            kind: MixerKind::StandardLx,
            scale: 1.0,
            projector: None,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn dynamical_decoupling(projector: FeasibleProjector) -> Self {
        Self {
            kind: MixerKind::DynamicalDecoupling,
            scale: 1.0,
            projector: Some(projector),
        }
    }

    pub fn kind(&self) -> MixerKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn projector(&self) -> Option<&FeasibleProjector> {
        self.projector.as_ref()
    }
}

/// Everything recorded about one circuit layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerRecord {
    pub layer: usize,
    pub norm: f64,
    /// Probability mass projected out by a dynamical-decoupling mixer.
    pub dd_leakage: Option<f64>,
    /// Ancilla measurement outcomes (conditional-gate trajectories only).
    pub ancilla_outcomes: Option<Vec<bool>>,
    /// Whether this layer's phase separator ran on the penalized Hamiltonian.
    pub penalized_branch: Option<bool>,
}

/// Final state of one circuit execution plus per-layer provenance.
#[derive(Debug, Clone)]
pub struct TrialState {
    state: StateVector,
    params: QaoaParams,
    layer_log: Vec<LayerRecord>,
}

impl TrialState {
    pub fn new(state: StateVector, params: QaoaParams, layer_log: Vec<LayerRecord>) -> Self {
        Self {
            state,
            params,
            layer_log,
        }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn params(&self) -> &QaoaParams {
        &self.params
    }

    pub fn layer_log(&self) -> &[LayerRecord] {
        &self.layer_log
    }

    pub fn energy(&self, h: &DiagonalHamiltonian) -> Result<f64> {
        expectation(&self.state, h)
    }
}

/// amplitude_i <- e^{-i gamma C(z_i)} amplitude_i.
pub fn apply_phase_separator(
    state: &mut StateVector,
    h: &DiagonalHamiltonian,
    gamma: f64,
) -> Result<()> {
    if h.register() != state.register() {
        return Err(Error::RegisterMismatch(
            "phase separator register does not match state".into(),
        ));
    }
    let values = h.values();
    for (amp, &v) in state.amplitudes_mut().iter_mut().zip(values) {
        *amp *= Complex64::from_polar(1.0, -gamma * v);
    }
    Ok(())
}

/// Apply one mixing step. The standard mixer is the product of identical
/// local rotations exp(-i beta scale Lx) on every qudit; the decoupled mixer
/// additionally projects onto the feasible subspace and renormalizes.
/// Returns the projected-out probability mass, if any.
pub fn apply_mixer(state: &mut StateVector, beta: f64, mixer: &MixerSpec) -> Result<Option<f64>> {
    let d = state.register().dim();
    let lx = lx_matrix(d);
    let u = exp_hermitian(&lx, beta * mixer.scale())?;
    for qudit in 0..state.register().num_qudits() {
        apply_local_inplace(state, qudit, &u)?;
    }
    match mixer.kind() {
        MixerKind::StandardLx => Ok(None),
        MixerKind::DynamicalDecoupling => {
            let projector = mixer.projector().ok_or_else(|| {
                Error::Constraint("dynamical decoupling mixer needs a projector".into())
            })?;
            let leakage = projector.project_renormalize(state)?;
            Ok(Some(leakage))
        }
    }
}

/// Run the depth-p circuit: for each layer l, the phase separator with
/// gamma_l followed by the mixer with beta_l, starting from `initial`.
pub fn evolve(
    initial: StateVector,
    h: &DiagonalHamiltonian,
    params: &QaoaParams,
    mixer: &MixerSpec,
) -> Result<TrialState> {
    let mut state = initial;
    if h.register() != state.register() {
        return Err(Error::RegisterMismatch(
            "cost Hamiltonian register does not match initial state".into(),
        ));
    }
    let d = state.register().dim();
    let lx = lx_matrix(d);
    let mut log = Vec::with_capacity(params.depth());
    for layer in 0..params.depth() {
        apply_phase_separator(&mut state, h, params.gammas()[layer])?;
        // one local exponential per layer, shared by all qudits
        let u = exp_hermitian(&lx, params.betas()[layer] * mixer.scale())?;
        for qudit in 0..state.register().num_qudits() {
            apply_local_inplace(&mut state, qudit, &u)?;
        }
        let dd_leakage = match mixer.kind() {
            MixerKind::StandardLx => None,
            MixerKind::DynamicalDecoupling => {
                let projector = mixer.projector().ok_or_else(|| {
                    Error::Constraint("dynamical decoupling mixer needs a projector".into())
                })?;
                Some(projector.project_renormalize(&mut state)?)
            }
        };
        log.push(LayerRecord {
            layer,
            norm: state.norm(),
            dd_leakage,
            ancilla_outcomes: None,
            penalized_branch: None,
        });
    }
    Ok(TrialState::new(state, params.clone(), log))
}

/// Exact expectation value sum_i P(i) C(z_i).
pub fn expectation(state: &StateVector, h: &DiagonalHamiltonian) -> Result<f64> {
    if h.register() != state.register() {
        return Err(Error::RegisterMismatch(
            "energy register does not match state".into(),
        ));
    }
    Ok(state
        .amplitudes()
        .iter()
        .zip(h.values())
        .map(|(amp, &v)| amp.norm_sqr() * v)
        .sum())
}

/// Monte-Carlo estimate of the energy from `shots` samples.
pub fn energy_sampled(
    state: &StateVector,
    h: &DiagonalHamiltonian,
    shots: usize,
    seed: u64,
) -> Result<f64> {
    if h.register() != state.register() {
        return Err(Error::RegisterMismatch(
            "energy register does not match state".into(),
        ));
    }
    let register = state.register();
    let samples = state.sample(seed, shots)?;
    let mut acc = 0.0;
    for z in &samples {
        acc += h.value_at(register.index_of(z)?);
    }
    Ok(acc / shots as f64)
}

/// One extracted candidate solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub assignment: Assignment,
    pub probability: f64,
    pub cost: f64,
}

/// The `k` most probable basis states (probability ties broken by ascending
/// basis index), re-sorted ascending by cost. `k` beyond the register size is
/// clipped.
pub fn top_k_candidates(
    state: &StateVector,
    k: usize,
    cost: &DiagonalHamiltonian,
) -> Result<Vec<Candidate>> {
    if cost.register() != state.register() {
        return Err(Error::RegisterMismatch(
            "candidate cost register does not match state".into(),
        ));
    }
    let size = state.register().size();
    let k = if k > size {
        log::warn!("top-k candidates clipped from {k} to register size {size}");
        size
    } else {
        k
    };
    let probs = state.probabilities();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    let mut picked: Vec<Candidate> = order[..k]
        .iter()
        .map(|&index| {
            Ok(Candidate {
                index,
                assignment: state.register().assignment_of(index)?,
                probability: probs[index],
                cost: cost.value_at(index),
            })
        })
        .collect::<Result<_>>()?;
    picked.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.index.cmp(&b.index)));
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::DiagonalHamiltonian;
    use crate::operators::{apply_dense, embed_local};
    use crate::register::QuditRegister;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn reg(n: usize, d: usize) -> QuditRegister {
        QuditRegister::new(n, d).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(QaoaParams::new(vec![], vec![]).is_err());
        assert!(QaoaParams::new(vec![0.1], vec![0.2, 0.3]).is_err());
        let p = QaoaParams::from_flat(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(p.gammas(), &[0.1, 0.2]);
        assert_eq!(p.betas(), &[0.3, 0.4]);
        assert_eq!(p.to_flat(), vec![0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn phase_separator_examples() {
        let r = reg(1, 3);
        let h = DiagonalHamiltonian::from_cost(r, |z| z.digits()[0] as f64).unwrap();
        let mut s = StateVector::uniform(r);
        apply_phase_separator(&mut s, &h, 0.0).unwrap();
        assert_eq!(s.amplitudes(), StateVector::uniform(r).amplitudes());

        // gamma = pi: amplitudes proportional to (1, -1, 1)
        apply_phase_separator(&mut s, &h, PI).unwrap();
        let a = s.amplitudes();
        let base = a[0];
        assert!((a[1] + base).norm() < 1e-12);
        assert!((a[2] - base).norm() < 1e-12);

        // moduli untouched
        for (p, q) in s
            .probabilities()
            .iter()
            .zip(StateVector::uniform(r).probabilities())
        {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn mixer_spin_half_closed_form() {
        // d=2: exp(-i beta Lx) has entries cos(beta/2) and -i sin(beta/2)
        let r = reg(1, 2);
        let beta = 0.7;
        let mut s = StateVector::basis(r, &r.assignment_of(0).unwrap()).unwrap();
        apply_mixer(&mut s, beta, &MixerSpec::standard()).unwrap();
        let a = s.amplitudes();
        assert!((a[0] - Complex64::new((beta / 2.0).cos(), 0.0)).norm() < 1e-12);
        assert!((a[1] - Complex64::new(0.0, -(beta / 2.0).sin())).norm() < 1e-12);
    }

    #[test]
    fn mixer_identity_and_periodicity() {
        let r = reg(2, 2);
        let s0 = StateVector::uniform(r);
        let mut s = s0.clone();
        apply_mixer(&mut s, 0.0, &MixerSpec::standard()).unwrap();
        let max = s
            .amplitudes()
            .iter()
            .zip(s0.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max < 1e-12);

        // spin-1/2 full period: beta = 4 pi returns the identity
        let mut s = StateVector::basis(r, &r.assignment_of(1).unwrap()).unwrap();
        apply_mixer(&mut s, 4.0 * PI, &MixerSpec::standard()).unwrap();
        assert!((s.probability(1).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn evolve_zero_params_is_identity() {
        let r = reg(2, 3);
        let h = DiagonalHamiltonian::from_cost(r, |z| z.digits()[0] as f64).unwrap();
        let params = QaoaParams::new(vec![0.0], vec![0.0]).unwrap();
        let trial = evolve(StateVector::uniform(r), &h, &params, &MixerSpec::standard()).unwrap();
        let max = trial
            .state()
            .amplitudes()
            .iter()
            .zip(StateVector::uniform(r).amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max < 1e-12);
        // energy of the uniform state is the mean cost
        let mean = h.values().iter().sum::<f64>() / h.values().len() as f64;
        assert!((trial.energy(&h).unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn evolve_norm_drift_depth_8() {
        let r = reg(6, 3);
        let h = DiagonalHamiltonian::from_cost(r, |z| {
            z.digits().iter().map(|&d| d as f64).sum::<f64>()
        })
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let gammas: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let betas: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..PI)).collect();
        let params = QaoaParams::new(gammas, betas).unwrap();
        let trial = evolve(StateVector::uniform(r), &h, &params, &MixerSpec::standard()).unwrap();
        assert!((trial.state().norm() - 1.0).abs() < 1e-9);
        for rec in trial.layer_log() {
            assert!((rec.norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mixer_matches_dense_global_exponential() {
        // product of local rotations equals exp(-i beta sum_i Lx_i) (dense oracle)
        let r = reg(3, 3);
        let beta = 0.83;
        let mut hm = Array2::<Complex64>::zeros((r.size(), r.size()));
        for qudit in 0..3 {
            hm = hm + embed_local(r, qudit, &crate::operators::lx_matrix(3));
        }
        let dec = crate::linalg::eigh(&hm).unwrap();
        let mut u = Array2::<Complex64>::zeros((r.size(), r.size()));
        for i in 0..r.size() {
            for j in 0..r.size() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..r.size() {
                    acc += dec.1[(i, k)]
                        * Complex64::from_polar(1.0, -beta * dec.0[k])
                        * dec.1[(j, k)].conj();
                }
                u[(i, j)] = acc;
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let amps: Vec<Complex64> = (0..r.size())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut s = StateVector::from_amplitudes(r, amps.into()).unwrap();
        s.normalize();
        let oracle = apply_dense(&u, &s).unwrap();
        apply_mixer(&mut s, beta, &MixerSpec::standard()).unwrap();
        let max = s
            .amplitudes()
            .iter()
            .zip(oracle.amplitudes().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max < 1e-9, "local product vs dense exponential: {max}");
    }

    #[test]
    fn energy_examples() {
        let r = reg(2, 3);
        let h = DiagonalHamiltonian::from_cost(r, |z| {
            z.digits()[0] as f64 + 2.0 * z.digits()[1] as f64
        })
        .unwrap();
        let z = r.assignment_of(5).unwrap();
        let s = StateVector::basis(r, &z).unwrap();
        assert!((expectation(&s, &h).unwrap() - h.value_at(5)).abs() < 1e-12);

        let u = StateVector::uniform(r);
        let mean = h.values().iter().sum::<f64>() / 9.0;
        assert!((expectation(&u, &h).unwrap() - mean).abs() < 1e-12);

        // bounds for random trials
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let params = QaoaParams::new(
                vec![rng.gen_range(0.0..2.0 * PI)],
                vec![rng.gen_range(0.0..PI)],
            )
            .unwrap();
            let t = evolve(StateVector::uniform(r), &h, &params, &MixerSpec::standard()).unwrap();
            let e = t.energy(&h).unwrap();
            assert!(e >= h.min_value() - 1e-9 && e <= h.max_value() + 1e-9);
        }
    }

    #[test]
    fn energy_sampled_converges() {
        let r = reg(1, 3);
        let h = DiagonalHamiltonian::from_cost(r, |z| z.digits()[0] as f64).unwrap();
        let z = r.assignment_of(2).unwrap();
        let s = StateVector::basis(r, &z).unwrap();
        assert_eq!(energy_sampled(&s, &h, 50, 1).unwrap(), 2.0);

        let u = StateVector::uniform(r);
        let shots = 100_000;
        let est = energy_sampled(&u, &h, shots, 7).unwrap();
        let sigma = (2.0f64 / 3.0).sqrt();
        assert!((est - 1.0).abs() < 3.0 * sigma / (shots as f64).sqrt());
        assert_eq!(
            energy_sampled(&u, &h, shots, 7).unwrap(),
            est,
            "seed determinism"
        );
    }

    #[test]
    fn top_k_examples() {
        let r = reg(2, 3);
        let h = DiagonalHamiltonian::from_cost(r, |z| {
            z.digits()[0] as f64 + 3.0 * z.digits()[1] as f64
        })
        .unwrap();
        let z = r.assignment_of(4).unwrap();
        let s = StateVector::basis(r, &z).unwrap();
        let top = top_k_candidates(&s, 1, &h).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].index, 4);
        assert!((top[0].probability - 1.0).abs() < 1e-12);

        // uniform: all states, sorted by cost
        let u = StateVector::uniform(r);
        let all = top_k_candidates(&u, 9, &h).unwrap();
        assert_eq!(all.len(), 9);
        for w in all.windows(2) {
            assert!(w[0].cost <= w[1].cost);
        }
        // clipped when k exceeds the register size
        assert_eq!(top_k_candidates(&u, 100, &h).unwrap().len(), 9);
    }

    #[test]
    fn color_reversal_symmetry_small() {
        // pure coloring cost on a triangle is invariant under z -> d-1-z,
        // and the Lx mixer commutes with the reversal
        let r = reg(3, 3);
        let edges = [(0usize, 1usize), (1, 2), (0, 2)];
        let h = DiagonalHamiltonian::from_cost(r, |z| {
            edges
                .iter()
                .filter(|(a, b)| z.digits()[*a] == z.digits()[*b])
                .count() as f64
        })
        .unwrap();
        let params = QaoaParams::new(vec![0.9, 0.4], vec![0.55, 1.3]).unwrap();
        let t = evolve(StateVector::uniform(r), &h, &params, &MixerSpec::standard()).unwrap();
        let probs = t.state().probabilities();
        for (index, a) in r.assignments().enumerate() {
            let reversed: Vec<usize> = a.digits().iter().map(|&z| 2 - z).collect();
            let rev_index = r
                .index_of(&Assignment::new(&r, reversed).unwrap())
                .unwrap();
            assert!(
                (probs[index] - probs[rev_index]).abs() < 1e-9,
                "P({index}) != P({rev_index})"
            );
        }
    }
}
