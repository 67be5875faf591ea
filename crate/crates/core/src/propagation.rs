// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant controls, the Strang-split forward and backward
//! recursions, final-cost variants and the penalized functional.
//!
//! Adjoint convention: `B_N = Theta` is chosen so that the first variation of
//! the positivized final cost is `2 Re Tr(Theta dU_N)`, and the recursion is
//! `B_j = B_{j+1} A exp(-i dt sum_k w_kj H_k) A`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::spinops::{self, SpinSystem};

/// N x K grid of control amplitudes (rad/s), constant over each step of length `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSequence {
    dt: f64,
    n_steps: usize,
    n_channels: usize,
    amps: Vec<f64>,
    labels: Vec<String>,
}

impl ControlSequence {
    pub fn zeros(n_steps: usize, dt: f64, labels: Vec<String>) -> Result<Self> {
        let k = labels.len();
        Self::from_rows(dt, labels, vec![0.0; n_steps * k])
    }

    /// Row-major amplitudes: `amps[j * K + k]`.
    pub fn from_rows(dt: f64, labels: Vec<String>, amps: Vec<f64>) -> Result<Self> {
        let k = labels.len();
        if !(dt.is_finite() && dt > 0.0) {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        if k == 0 {
            return invalid("control sequence needs at least one channel");
        }
        if amps.is_empty() || amps.len() % k != 0 {
            return invalid(format!(
                "amplitude count {} is not a positive multiple of {k} channels",
                amps.len()
            ));
        }
        if let Some(bad) = amps.iter().find(|a| !a.is_finite()) {
            return invalid(format!("non-finite amplitude {bad}"));
        }
        Ok(Self {
            dt,
            n_steps: amps.len() / k,
            n_channels: k,
            amps,
            labels,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn step(&self, j: usize) -> &[f64] {
        &self.amps[j * self.n_channels..(j + 1) * self.n_channels]
    }

    pub fn step_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.amps[j * self.n_channels..(j + 1) * self.n_channels]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.amps
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.amps
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.amps[j * self.n_channels + k]
    }

    pub fn channel(&self, k: usize) -> Vec<f64> {
        (0..self.n_steps).map(|j| self.get(j, k)).collect()
    }

    pub fn set_channel(&mut self, k: usize, values: &[f64]) {
        for (j, v) in values.iter().enumerate() {
            self.amps[j * self.n_channels + k] = *v;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.amps.iter_mut().for_each(|a| *a = f(*a));
        out
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_steps == other.n_steps && self.n_channels == other.n_channels
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

/// Per-channel penalty weights (s^2 rad^-2).
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    pub lambda: Vec<f64>,
}

impl PenaltySpec {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return invalid("penalty weights must be finite and non-negative");
        }
        Ok(Self { lambda })
    }

    pub fn uniform(lambda: f64, channels: usize) -> Result<Self> {
        Self::new(vec![lambda; channels])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisForm {
    /// `Re Tr(U U_D^dagger)`
    RealTrace,
    /// `|Tr(U_D^dagger U)|^2`
    SquaredModulus,
}

#[derive(Debug, Clone)]
pub enum ObjectiveKind {
    /// `Tr(C rho(T))` with Hermitian `C`, `rho0`.
    HermitianStateToState { target: CMatrix, initial: CMatrix },
    /// `|Tr(C^dagger rho(T))|^2`
    NonHermitianStateToState { target: CMatrix, initial: CMatrix },
    PropagatorSynthesis { target: CMatrix, form: SynthesisForm },
}

/// Final-cost variant plus positivization weight `kappa`.
#[derive(Debug, Clone)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalCost {
    pub phi: f64,
    pub phi_positivized: f64,
}

impl Objective {
    pub fn hermitian(target: CMatrix, initial: CMatrix, kappa: f64) -> Result<Self> {
        check_square_pair(&target, &initial)?;
        if !linalg::is_hermitian(&target, 1e-12) || !linalg::is_hermitian(&initial, 1e-12) {
            return invalid("Hermitian state-to-state transfer needs Hermitian C and rho0");
        }
        check_kappa(kappa)?;
        Ok(Self {
            kind: ObjectiveKind::HermitianStateToState { target, initial },
            kappa,
        })
    }

    /// Non-Hermitian transfer with the default `kappa = 1`.
    pub fn non_hermitian(target: CMatrix, initial: CMatrix) -> Result<Self> {
        Self::non_hermitian_with_kappa(target, initial, 1.0)
    }

    pub fn non_hermitian_with_kappa(target: CMatrix, initial: CMatrix, kappa: f64) -> Result<Self> {
        check_square_pair(&target, &initial)?;
        check_kappa(kappa)?;
        Ok(Self {
            kind: ObjectiveKind::NonHermitianStateToState { target, initial },
            kappa,
        })
    }

    pub fn synthesis(target: CMatrix, form: SynthesisForm, kappa: f64) -> Result<Self> {
        if !target.is_square() {
            return invalid("target propagator must be square");
        }
        check_kappa(kappa)?;
        Ok(Self {
            kind: ObjectiveKind::PropagatorSynthesis { target, form },
            kappa,
        })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ObjectiveKind::HermitianStateToState { target, .. }
            | ObjectiveKind::NonHermitianStateToState { target, .. }
            | ObjectiveKind::PropagatorSynthesis { target, .. } => target.nrows(),
        }
    }

    pub fn target(&self) -> &CMatrix {
        match &self.kind {
            ObjectiveKind::HermitianStateToState { target, .. }
            | ObjectiveKind::NonHermitianStateToState { target, .. }
            | ObjectiveKind::PropagatorSynthesis { target, .. } => target,
        }
    }

    pub fn initial_state(&self) -> Option<&CMatrix> {
        match &self.kind {
            ObjectiveKind::HermitianStateToState { initial, .. }
            | ObjectiveKind::NonHermitianStateToState { initial, .. } => Some(initial),
            ObjectiveKind::PropagatorSynthesis { .. } => None,
        }
    }

    pub fn final_cost(&self, u: &CMatrix) -> FinalCost {
        let phi = match &self.kind {
            ObjectiveKind::HermitianStateToState { target, initial } => {
                let rho = u * initial * u.adjoint();
                linalg::trace_product(target, &rho).re
            }
            ObjectiveKind::NonHermitianStateToState { target, initial } => {
                let rho = u * initial * u.adjoint();
                linalg::trace_product(&target.adjoint(), &rho).norm_sqr()
            }
            ObjectiveKind::PropagatorSynthesis { target, form } => {
                let overlap = linalg::trace_product(&target.adjoint(), u);
                match form {
                    SynthesisForm::RealTrace => overlap.re,
                    SynthesisForm::SquaredModulus => overlap.norm_sqr(),
                }
            }
        };
        let norm = linalg::trace_product(u, &u.adjoint()).re;
        FinalCost {
            phi,
            phi_positivized: phi + self.kappa * norm,
        }
    }

    /// Terminal adjoint `Theta` with `d phi~ = 2 Re Tr(Theta dU)`.
    pub fn terminal_adjoint(&self, u: &CMatrix) -> CMatrix {
        let ud = u.adjoint();
        let mut theta = ud.map(|z| z * self.kappa);
        match &self.kind {
            ObjectiveKind::HermitianStateToState { target, initial } => {
                theta += initial * &ud * target;
            }
            ObjectiveKind::NonHermitianStateToState { target, initial } => {
                let cd = target.adjoint();
                // z = Tr(C^dagger U rho0 U^dagger)
                let z = linalg::trace_product(&cd, &(u * initial * &ud));
                theta += (initial * &ud * &cd).map(|x| x * z.conj());
                theta += (initial.adjoint() * &ud * target).map(|x| x * z);
            }
            ObjectiveKind::PropagatorSynthesis { target, form } => {
                let td = target.adjoint();
                match form {
                    SynthesisForm::RealTrace => theta += td.map(|x| x * 0.5),
                    SynthesisForm::SquaredModulus => {
                        let z = linalg::trace_product(&td, u);
                        theta += td.map(|x| x * z.conj());
                    }
                }
            }
        }
        theta
    }

    /// Theoretical maximum of `phi` used to report efficiencies.
    pub fn normalization(&self) -> Result<f64> {
        let value = match &self.kind {
            ObjectiveKind::HermitianStateToState { target, initial } => {
                unitary_bound(target, initial)
            }
            ObjectiveKind::NonHermitianStateToState { target, .. } => {
                linalg::trace_product(target, &target.adjoint()).re
            }
            ObjectiveKind::PropagatorSynthesis { target, form } => {
                let d = target.nrows() as f64;
                match form {
                    SynthesisForm::RealTrace => d,
                    SynthesisForm::SquaredModulus => d * d,
                }
            }
        };
        if !(value.abs() > 1e-14) {
            return invalid("objective has zero normalization");
        }
        Ok(value)
    }

    pub fn normalized_efficiency(&self, phi: f64) -> Result<f64> {
        Ok(phi / self.normalization()?)
    }

    /// Whether the Hermitian decomposition proves `J' >= J` for every sweep:
    /// both quadratic remainder terms are then non-negative.
    pub fn is_hermitian_psd(&self) -> bool {
        match &self.kind {
            ObjectiveKind::HermitianStateToState { target, initial } => {
                self.kappa > 0.0 && is_psd(target) && is_psd(initial)
            }
            _ => false,
        }
    }
}

fn check_square_pair(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if !a.is_square() || a.shape() != b.shape() {
        return invalid("target and initial operators must be square and of equal dimension");
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return invalid(format!("kappa must be non-negative, got {kappa}"));
    }
    Ok(())
}

fn is_psd(m: &CMatrix) -> bool {
    HermitianEigen::new(m).values.iter().all(|&v| v >= -1e-12)
}

/// Maximum of `Tr(C U rho0 U^dagger)` over unitaries: pair the sorted spectra.
pub fn unitary_bound(target: &CMatrix, initial: &CMatrix) -> f64 {
    let c = HermitianEigen::new(target).sorted_values_desc();
    let r = HermitianEigen::new(initial).sorted_values_desc();
    c.iter().zip(&r).map(|(a, b)| a * b).sum()
}

fn check_channels(seq: &ControlSequence, sys: &SpinSystem) -> Result<()> {
    if seq.n_channels() != sys.n_controls() {
        return invalid(format!(
            "sequence has {} channels but the system has {} control operators",
            seq.n_channels(),
            sys.n_controls()
        ));
    }
    Ok(())
}

/// Single-step propagators `S_j = A exp(-i dt sum_k w_kj H_k) A`.
pub fn step_propagators(seq: &ControlSequence, sys: &SpinSystem) -> Result<Vec<CMatrix>> {
    check_channels(seq, sys)?;
    let a = spinops::half_step_factor(&sys.h0, seq.dt());
    let ops = sys.control_ops();
    Ok((0..seq.n_steps())
        .map(|j| spinops::step_propagator(&a, seq.step(j), &ops, seq.dt()))
        .collect())
}

/// `U_0 = E`, `U_{j+1} = S_j U_j`.
pub fn forward_propagate(seq: &ControlSequence, sys: &SpinSystem) -> Result<Vec<CMatrix>> {
    let steps = step_propagators(seq, sys)?;
    Ok(forward_from_steps(&steps, sys.dim()))
}

pub fn forward_from_steps(steps: &[CMatrix], dim: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(linalg::identity(dim));
    for s in steps {
        let next = s * out.last().expect("non-empty");
        out.push(next);
    }
    out
}

/// `B_j = B_{j+1} S_j`, ending at the given `B_N`.
pub fn backward_propagate(b_n: &CMatrix, seq: &ControlSequence, sys: &SpinSystem) -> Result<Vec<CMatrix>> {
    let steps = step_propagators(seq, sys)?;
    Ok(backward_from_steps(b_n, &steps))
}

pub fn backward_from_steps(b_n: &CMatrix, steps: &[CMatrix]) -> Vec<CMatrix> {
    let n = steps.len();
    let mut out = vec![b_n.clone(); n + 1];
    for j in (0..n).rev() {
        out[j] = &out[j + 1] * &steps[j];
    }
    out
}

/// Forward propagators and backward adjoints for one condition.
#[derive(Debug, Clone)]
pub struct PropagationRecord {
    pub condition_id: String,
    pub forward: Vec<CMatrix>,
    pub backward: Vec<CMatrix>,
}

impl PropagationRecord {
    pub fn compute(
        condition_id: &str,
        seq: &ControlSequence,
        sys: &SpinSystem,
        objective: &Objective,
    ) -> Result<Self> {
        let steps = step_propagators(seq, sys)?;
        let forward = forward_from_steps(&steps, sys.dim());
        let theta = objective.terminal_adjoint(forward.last().expect("non-empty"));
        let backward = backward_from_steps(&theta, &steps);
        Ok(Self {
            condition_id: condition_id.to_string(),
            forward,
            backward,
        })
    }

    pub fn final_propagator(&self) -> &CMatrix {
        self.forward.last().expect("record holds U_0..U_N")
    }
}

/// Left-endpoint sum `dt sum_j sum_k lambda_k w_kj^2`.
pub fn running_cost(seq: &ControlSequence, pen: &PenaltySpec) -> f64 {
    let k = seq.n_channels();
    seq.as_slice()
        .iter()
        .enumerate()
        .map(|(idx, w)| pen.lambda.get(idx % k).copied().unwrap_or(0.0) * w * w)
        .sum::<f64>()
        * seq.dt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functional {
    /// Positivized functional `phi~ - penalty`, the quantity kept monotone.
    pub j: f64,
    /// Un-positivized final cost.
    pub phi: f64,
    pub penalty: f64,
}

impl Functional {
    /// `phi - penalty`: the functional with the constant positivization removed.
    pub fn reported_j(&self) -> f64 {
        self.phi - self.penalty
    }
}

pub fn total_functional(
    objective: &Objective,
    seq: &ControlSequence,
    sys: &SpinSystem,
    pen: &PenaltySpec,
) -> Result<Functional> {
    if objective.dim() != sys.dim() {
        return Err(Error::InvalidArgument(format!(
            "objective dimension {} does not match system dimension {}",
            objective.dim(),
            sys.dim()
        )));
    }
    let u = forward_propagate(seq, sys)?;
    let cost = objective.final_cost(u.last().expect("non-empty"));
    let penalty = running_cost(seq, pen);
    Ok(Functional {
        j: cost.phi_positivized - penalty,
        phi: cost.phi,
        penalty,
    })
}

/// `rho(t_j) = U_j rho0 U_j^dagger` for every step.
pub fn evolve_density(rho0: &CMatrix, forward: &[CMatrix]) -> Vec<CMatrix> {
    forward.iter().map(|u| u * rho0 * u.adjoint()).collect()
}

pub fn complex_trace(m: &CMatrix) -> Complex64 {
    linalg::trace(m)
}
