// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Monotonically convergent Krotov-type optimizer.
//!
//! One outer iteration:
//!
//! 1. with the adjoints `B_j` of the current controls, sweep `j = 0..N`,
//!    maximizing the local objective `f_j` at each step and propagating the
//!    updated `U'_j` immediately;
//! 2. optionally blend the swept controls with their frequency-truncated
//!    version, backing off `alpha` until the functional has not decreased;
//! 3. recompute forward propagators and adjoints for the accepted controls.
//!
//! For several conditions (broadband design) the per-step trace factor is the
//! sum over conditions of `A_i U'_{i,j} B_{i,j} A_i^dagger`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::inner::{self, InnerSolverConfig};
use crate::linalg::{self, CMatrix, UnitaryExp};
use crate::propagation::{
    running_cost, step_propagators, ControlSequence, FinalCost, Functional, Objective, ObjectiveKind,
    PenaltySpec, PropagationRecord,
};
use crate::smoothing::{regularized_accept, TruncationSpec};
use crate::spinops::{self, SpinSystem};

/// One design condition: a spin system (e.g. a particular coupling) and its objective.
#[derive(Debug, Clone)]
pub struct Condition {
    pub id: String,
    pub system: SpinSystem,
    pub objective: Objective,
}

/// Conditions optimized jointly with a single control sequence.
#[derive(Debug, Clone)]
pub struct ConditionSet {
    conditions: Vec<Condition>,
    control_ops: Vec<CMatrix>,
}

impl ConditionSet {
    pub fn new(conditions: Vec<Condition>) -> Result<Self> {
        let first = conditions
            .first()
            .ok_or_else(|| Error::InvalidArgument("condition set is empty".into()))?;
        let control_ops = first.system.control_ops();
        for c in &conditions {
            if c.objective.dim() != c.system.dim() {
                return invalid(format!("condition {}: objective/system dimension mismatch", c.id));
            }
            let ops = c.system.control_ops();
            let same = ops.len() == control_ops.len()
                && ops
                    .iter()
                    .zip(&control_ops)
                    .all(|(a, b)| a.shape() == b.shape() && linalg::frobenius_norm(&(a - b)) < 1e-12);
            if !same {
                return invalid(format!(
                    "condition {} does not share the control operators of condition {}",
                    c.id, first.id
                ));
            }
        }
        Ok(Self {
            conditions,
            control_ops,
        })
    }

    pub fn single(id: &str, system: SpinSystem, objective: Objective) -> Result<Self> {
        Self::new(vec![Condition {
            id: id.to_string(),
            system,
            objective,
        }])
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn control_ops(&self) -> &[CMatrix] {
        &self.control_ops
    }

    pub fn n_controls(&self) -> usize {
        self.control_ops.len()
    }

    fn check_sequence(&self, seq: &ControlSequence) -> Result<()> {
        if seq.n_channels() != self.n_controls() {
            return invalid(format!(
                "sequence has {} channels, conditions expect {}",
                seq.n_channels(),
                self.n_controls()
            ));
        }
        Ok(())
    }

    /// Final propagator of every condition.
    pub fn final_propagators(&self, seq: &ControlSequence) -> Result<Vec<CMatrix>> {
        self.check_sequence(seq)?;
        let dt = seq.dt();
        let vs: Vec<CMatrix> = (0..seq.n_steps())
            .map(|j| linalg::expm_hermitian(&spinops::control_generator(seq.step(j), &self.control_ops), dt))
            .collect();
        Ok(self
            .conditions
            .iter()
            .map(|c| {
                let a = spinops::half_step_factor(&c.system.h0, dt);
                let mut u = linalg::identity(c.system.dim());
                for v in &vs {
                    u = &a * v * &a * u;
                }
                u
            })
            .collect())
    }

    pub fn final_costs(&self, finals: &[CMatrix]) -> Vec<FinalCost> {
        self.conditions
            .iter()
            .zip(finals)
            .map(|(c, u)| c.objective.final_cost(u))
            .collect()
    }

    /// Summed functional from precomputed final propagators.
    pub fn functional_from_finals(&self, seq: &ControlSequence, finals: &[CMatrix], pen: &PenaltySpec) -> Functional {
        let costs = self.final_costs(finals);
        let penalty = running_cost(seq, pen);
        let phi: f64 = costs.iter().map(|c| c.phi).sum();
        let phi_pos: f64 = costs.iter().map(|c| c.phi_positivized).sum();
        Functional {
            j: phi_pos - penalty,
            phi,
            penalty,
        }
    }

    /// Normalized efficiency of each condition; NaN where the objective has
    /// no positive maximum (e.g. a penalty-only problem).
    pub fn efficiencies(&self, finals: &[CMatrix]) -> Vec<f64> {
        self.conditions
            .iter()
            .zip(finals)
            .map(|(c, u)| {
                c.objective
                    .normalized_efficiency(c.objective.final_cost(u).phi)
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    pub fn records(&self, seq: &ControlSequence) -> Result<Vec<PropagationRecord>> {
        self.check_sequence(seq)?;
        self.conditions
            .iter()
            .map(|c| PropagationRecord::compute(&c.id, seq, &c.system, &c.objective))
            .collect()
    }
}

/// `J = sum_i phi~_i - penalty`; reduces to the single-condition functional.
pub fn broadband_functional(seq: &ControlSequence, conditions: &ConditionSet, pen: &PenaltySpec) -> Result<Functional> {
    let finals = conditions.final_propagators(seq)?;
    Ok(conditions.functional_from_finals(seq, &finals, pen))
}

#[derive(Debug, Clone)]
pub struct KrotovConfig {
    pub penalty: PenaltySpec,
    pub tol: f64,
    pub max_outer_iterations: usize,
    pub inner: InnerSolverConfig,
    pub snapshot_iterations: Vec<usize>,
}

impl KrotovConfig {
    pub fn new(penalty: PenaltySpec) -> Self {
        Self {
            penalty,
            tol: 1e-8,
            max_outer_iterations: 500,
            inner: InnerSolverConfig::default(),
            snapshot_iterations: vec![0, 5, 20],
        }
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return invalid("tol must be positive");
        }
        if self.max_outer_iterations == 0 || self.inner.max_iterations == 0 {
            return invalid("iteration caps must be at least 1");
        }
        if self.penalty.lambda.len() != channels {
            return invalid(format!(
                "penalty has {} weights for {channels} channels",
                self.penalty.lambda.len()
            ));
        }
        Ok(())
    }
}

/// `A U'_j B_j A^dagger`
pub fn trace_factor(a: &CMatrix, u_prime: &CMatrix, b: &CMatrix) -> CMatrix {
    a * u_prime * b * a.adjoint()
}

/// Local objective `f_j` for one time step, built once per step and evaluated
/// many times by the inner solver.
///
/// `f(w') = 2 Re Tr[(V(w)^dagger V(w') - E) M] - dt sum_k lambda_k (w'_k^2 - w_k^2)`
/// with `V(w) = exp(-i dt sum_k w_k H_k)` and `M` the trace factor.
pub struct LocalProblem<'a> {
    control_ops: &'a [CMatrix],
    previous: &'a [f64],
    lambda: &'a [f64],
    dt: f64,
    /// `M V(w)^dagger`
    p: CMatrix,
    trace_m: Complex64,
}

impl<'a> LocalProblem<'a> {
    pub fn new(
        trace_factor: &CMatrix,
        previous: &'a [f64],
        control_ops: &'a [CMatrix],
        lambda: &'a [f64],
        dt: f64,
    ) -> Self {
        let v_old = linalg::expm_hermitian(&spinops::control_generator(previous, control_ops), dt);
        Self {
            control_ops,
            previous,
            lambda,
            dt,
            p: trace_factor * v_old.adjoint(),
            trace_m: linalg::trace(trace_factor),
        }
    }

    fn penalty_change(&self, candidate: &[f64]) -> f64 {
        self.dt
            * candidate
                .iter()
                .zip(self.previous)
                .zip(self.lambda)
                .map(|((new, old), l)| l * (new * new - old * old))
                .sum::<f64>()
    }

    pub fn value(&self, candidate: &[f64]) -> f64 {
        if candidate == self.previous {
            return 0.0;
        }
        let v = UnitaryExp::new(&spinops::control_generator(candidate, self.control_ops), self.dt);
        let p_eig = v.eig.to_eigenbasis(&self.p);
        let tr: Complex64 = v.phases.iter().enumerate().map(|(a, ph)| ph * p_eig[(a, a)]).sum();
        2.0 * (tr - self.trace_m).re - self.penalty_change(candidate)
    }

    pub fn value_and_gradient(&self, candidate: &[f64]) -> (f64, Vec<f64>) {
        let v = UnitaryExp::new(&spinops::control_generator(candidate, self.control_ops), self.dt);
        let p_eig = v.eig.to_eigenbasis(&self.p);
        let value = if candidate == self.previous {
            0.0
        } else {
            let tr: Complex64 = v.phases.iter().enumerate().map(|(a, ph)| ph * p_eig[(a, a)]).sum();
            2.0 * (tr - self.trace_m).re - self.penalty_change(candidate)
        };
        // d/dw_k 2 Re Tr(V' P) = 2 Re sum_ab (Q^dag H_k Q)_ab Gamma_ab (Q^dag P Q)_ba
        let kernel = v.derivative_kernel();
        let n = kernel.nrows();
        let weighted = CMatrix::from_fn(n, n, |a, b| kernel[(a, b)] * p_eig[(b, a)]);
        let grad = self
            .control_ops
            .iter()
            .zip(candidate)
            .zip(self.lambda)
            .map(|((h, w), l)| {
                let h_eig = v.eig.to_eigenbasis(h);
                let tr: Complex64 = h_eig.iter().zip(weighted.iter()).map(|(x, y)| x * y).sum();
                2.0 * tr.re - 2.0 * self.dt * l * w
            })
            .collect();
        (value, grad)
    }
}

/// `f_j(candidate)` for a single condition given the trace factor `M = A U' B A^dagger`.
pub fn local_objective(
    candidate: &[f64],
    previous: &[f64],
    trace_factor: &CMatrix,
    control_ops: &[CMatrix],
    pen: &PenaltySpec,
    dt: f64,
) -> f64 {
    LocalProblem::new(trace_factor, previous, control_ops, &pen.lambda, dt).value(candidate)
}

/// Sweep state of one condition at step j: `(A_i, U'_{i,j}, B_{i,j})`.
#[derive(Debug, Clone, Copy)]
pub struct ConditionState<'a> {
    pub half_step: &'a CMatrix,
    pub u_prime: &'a CMatrix,
    pub adjoint: &'a CMatrix,
}

pub fn broadband_trace_factor(states: &[ConditionState<'_>]) -> Result<CMatrix> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidArgument("no conditions given".into()))?;
    let mut m = linalg::zeros(first.u_prime.nrows());
    for s in states {
        m += trace_factor(s.half_step, s.u_prime, s.adjoint);
    }
    Ok(m)
}

/// `f_j` with the trace factor summed over conditions.
pub fn broadband_local_objective(
    candidate: &[f64],
    previous: &[f64],
    states: &[ConditionState<'_>],
    control_ops: &[CMatrix],
    pen: &PenaltySpec,
    dt: f64,
) -> Result<f64> {
    let m = broadband_trace_factor(states)?;
    Ok(local_objective(candidate, previous, &m, control_ops, pen, dt))
}

#[derive(Debug, Clone)]
pub struct LocalUpdate {
    pub amplitudes: Vec<f64>,
    pub gain: f64,
    pub inner_iterations: usize,
    /// True when the inner solver could not improve on (or evaluate) the start.
    pub fell_back: bool,
}

/// Maximize `f_j` starting from the previous controls. The solver runs on
/// rotation angles `dt * w`, which are O(1) for any field strength.
pub fn maximize_local(problem: &LocalProblem<'_>, start: &[f64], cfg: &InnerSolverConfig) -> LocalUpdate {
    let dt = problem.dt;
    let x0: Vec<f64> = start.iter().map(|w| w * dt).collect();
    let result = inner::minimize(
        |x: &[f64]| {
            let w: Vec<f64> = x.iter().map(|xi| xi / dt).collect();
            let (f, g) = problem.value_and_gradient(&w);
            (-f, g.iter().map(|gi| -gi / dt).collect())
        },
        &x0,
        cfg,
    );
    let amplitudes: Vec<f64> = result.x.iter().map(|x| x / dt).collect();
    let gain = problem.value(&amplitudes);
    if !(gain.is_finite() && gain >= 0.0) || amplitudes.iter().any(|a| !a.is_finite()) {
        log::warn!("local maximization failed (gain {gain}); keeping previous controls");
        return LocalUpdate {
            amplitudes: start.to_vec(),
            gain: problem.value(start),
            inner_iterations: result.iterations,
            fell_back: true,
        };
    }
    LocalUpdate {
        fell_back: amplitudes == start,
        amplitudes,
        gain,
        inner_iterations: result.iterations,
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub sequence: ControlSequence,
    /// Incrementally maintained `U'_N` of every condition.
    pub final_propagators: Vec<CMatrix>,
    /// `sum_j f_j(w'_j)`.
    pub local_gain: f64,
    pub unchanged_steps: usize,
    pub inner_iterations: usize,
}

/// One forward sweep using the adjoints in `records` (computed for `seq`).
pub fn krotov_sweep(
    seq: &ControlSequence,
    records: &[PropagationRecord],
    conditions: &ConditionSet,
    config: &KrotovConfig,
) -> Result<SweepOutcome> {
    conditions.check_sequence(seq)?;
    if records.len() != conditions.len() {
        return invalid("one propagation record per condition is required");
    }
    if records.iter().any(|r| r.backward.len() != seq.n_steps() + 1) {
        return invalid("propagation records do not match the sequence length");
    }
    let dt = seq.dt();
    let ops = conditions.control_ops();
    let half_steps: Vec<CMatrix> = conditions
        .conditions()
        .iter()
        .map(|c| spinops::half_step_factor(&c.system.h0, dt))
        .collect();
    let mut u_prime: Vec<CMatrix> = conditions
        .conditions()
        .iter()
        .map(|c| linalg::identity(c.system.dim()))
        .collect();

    let mut out = seq.clone();
    let mut local_gain = 0.0;
    let mut unchanged = 0;
    let mut inner_iterations = 0;
    for j in 0..seq.n_steps() {
        let mut m = linalg::zeros(u_prime[0].nrows());
        for ((a, u), rec) in half_steps.iter().zip(&u_prime).zip(records) {
            m += trace_factor(a, u, &rec.backward[j]);
        }
        let previous = seq.step(j);
        let problem = LocalProblem::new(&m, previous, ops, &config.penalty.lambda, dt);
        let update = maximize_local(&problem, previous, &config.inner);
        local_gain += update.gain;
        inner_iterations += update.inner_iterations;
        if update.fell_back {
            unchanged += 1;
        }
        out.step_mut(j).copy_from_slice(&update.amplitudes);
        let v = linalg::expm_hermitian(&spinops::control_generator(&update.amplitudes, ops), dt);
        for (a, u) in half_steps.iter().zip(u_prime.iter_mut()) {
            *u = a * &v * a * &*u;
        }
    }
    Ok(SweepOutcome {
        sequence: out,
        final_propagators: u_prime,
        local_gain,
        unchanged_steps: unchanged,
        inner_iterations,
    })
}

/// Terms of the exact identity
/// `J(w') - J(w) = kappa Tr(dU dU^dag) + Tr(C dU rho0 dU^dag) + cross + penalty`
/// with `dU = U'_N - U_N`, for Hermitian state-to-state objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaDecomposition {
    pub lhs: f64,
    pub kappa_quadratic: f64,
    pub target_quadratic: f64,
    pub cross_term: f64,
    pub penalty_difference: f64,
}

impl DeltaDecomposition {
    pub fn rhs_terms(&self) -> [f64; 4] {
        [
            self.kappa_quadratic,
            self.target_quadratic,
            self.cross_term,
            self.penalty_difference,
        ]
    }

    pub fn rhs_sum(&self) -> f64 {
        self.rhs_terms().iter().sum()
    }
}

pub fn delta_functional_decomposition(
    omega: &ControlSequence,
    omega_prime: &ControlSequence,
    objective: &Objective,
    sys: &SpinSystem,
    pen: &PenaltySpec,
) -> Result<DeltaDecomposition> {
    let ObjectiveKind::HermitianStateToState { target, initial } = &objective.kind else {
        return Err(Error::UnsupportedVariant(
            "the functional decomposition applies to Hermitian state-to-state objectives".into(),
        ));
    };
    if !omega.same_shape(omega_prime) || omega.dt() != omega_prime.dt() {
        return invalid("both control sequences must share shape and time step");
    }
    let old = PropagationRecord::compute("old", omega, sys, objective)?;
    let new_steps = step_propagators(omega_prime, sys)?;
    let new_forward = crate::propagation::forward_from_steps(&new_steps, sys.dim());
    let n = omega.n_steps();
    let du = &new_forward[n] - old.final_propagator();

    let kappa_quadratic = objective.kappa * linalg::trace_product(&du, &du.adjoint()).re;
    let target_quadratic = linalg::trace_product(&(target * &du * initial), &du.adjoint()).re;

    let dt = omega.dt();
    let a = spinops::half_step_factor(&sys.h0, dt);
    let ops = sys.control_ops();
    let mut cross_term = 0.0;
    for j in 0..n {
        let m = trace_factor(&a, &new_forward[j], &old.backward[j]);
        let v_old = linalg::expm_hermitian(&spinops::control_generator(omega.step(j), &ops), dt);
        let v_new = linalg::expm_hermitian(&spinops::control_generator(omega_prime.step(j), &ops), dt);
        let x = v_old.adjoint() * v_new - linalg::identity(sys.dim());
        cross_term += 2.0 * linalg::trace_product(&x, &m).re;
    }
    let penalty_difference = -(running_cost(omega_prime, pen) - running_cost(omega, pen));

    let j_old = crate::propagation::total_functional(objective, omega, sys, pen)?;
    let j_new = crate::propagation::total_functional(objective, omega_prime, sys, pen)?;
    Ok(DeltaDecomposition {
        lhs: j_new.j - j_old.j,
        kappa_quadratic,
        target_quadratic,
        cross_term,
        penalty_difference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Functional with the constant positivization removed (`phi - penalty`).
    pub j: f64,
    /// Functional including positivization; the monotone quantity.
    pub j_positivized: f64,
    pub phi: f64,
    pub penalty: f64,
    pub alpha: f64,
    pub wall_time_s: f64,
    /// Mean normalized efficiency over conditions.
    pub efficiency: f64,
}

#[derive(Debug, Clone, Default)]
pub struct IterationLog {
    pub records: Vec<IterationRecord>,
}

impl IterationLog {
    pub fn push(&mut self, r: IterationRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Iterations whose positivized functional dropped by more than
    /// `rel_tol (1 + |J|)`.
    pub fn monotonicity_violations(&self, rel_tol: f64) -> Vec<usize> {
        self.records
            .windows(2)
            .filter(|w| w[1].j_positivized < w[0].j_positivized - rel_tol * (1.0 + w[0].j_positivized.abs()))
            .map(|w| w[1].iteration)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `J^{l+1} - J^l <= tol`
    Converged,
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub iteration: usize,
    pub sequence: ControlSequence,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub sequence: ControlSequence,
    pub log: IterationLog,
    pub records: Vec<PropagationRecord>,
    pub termination: Termination,
    pub snapshots: Vec<Snapshot>,
    pub efficiencies: Vec<f64>,
    pub monotonicity_violations: usize,
}

impl OptimizationResult {
    pub fn mean_efficiency(&self) -> f64 {
        self.efficiencies.iter().sum::<f64>() / self.efficiencies.len() as f64
    }
}

pub const MONOTONE_REL_TOL: f64 = 1e-9;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Outer loop: sweep, optional smoothing, re-propagate, until the increase of
/// `J` drops to `tol` or the iteration cap is hit.
pub fn krotov_optimize(
    initial: &ControlSequence,
    conditions: &ConditionSet,
    config: &KrotovConfig,
    smoother: Option<&TruncationSpec>,
) -> Result<OptimizationResult> {
    conditions.check_sequence(initial)?;
    config.validate(initial.n_channels())?;
    if let Some(spec) = smoother {
        spec.validate(initial.dt())?;
    }
    let start = Instant::now();
    let pen = &config.penalty;

    let mut seq = initial.clone();
    let mut records = conditions.records(&seq)?;
    let finals: Vec<CMatrix> = records.iter().map(|r| r.final_propagator().clone()).collect();
    let mut current = conditions.functional_from_finals(&seq, &finals, pen);
    let mut efficiencies = conditions.efficiencies(&finals);

    let mut log = IterationLog::default();
    let mut snapshots = Vec::new();
    let record = |iteration: usize, f: &Functional, alpha: f64, eff: &[f64]| IterationRecord {
        iteration,
        j: f.reported_j(),
        j_positivized: f.j,
        phi: f.phi,
        penalty: f.penalty,
        alpha,
        wall_time_s: start.elapsed().as_secs_f64(),
        efficiency: mean(eff),
    };
    log.push(record(0, &current, 0.0, &efficiencies));
    if config.snapshot_iterations.contains(&0) {
        snapshots.push(Snapshot {
            iteration: 0,
            sequence: seq.clone(),
        });
    }

    let mut violations = 0;
    let mut termination = Termination::IterationCap;
    for iteration in 1..=config.max_outer_iterations {
        let sweep = krotov_sweep(&seq, &records, conditions, config)?;
        let swept = conditions.functional_from_finals(&sweep.sequence, &sweep.final_propagators, pen);

        let (next, alpha) = match smoother {
            Some(spec) => {
                let accepted = regularized_accept(
                    current.j,
                    &sweep.sequence,
                    |trial| Ok(broadband_functional(trial, conditions, pen)?.j),
                    spec,
                )?;
                (accepted.sequence, accepted.alpha)
            }
            None => (sweep.sequence, 0.0),
        };

        records = conditions.records(&next)?;
        let finals: Vec<CMatrix> = records.iter().map(|r| r.final_propagator().clone()).collect();
        let updated = conditions.functional_from_finals(&next, &finals, pen);
        efficiencies = conditions.efficiencies(&finals);
        let epsilon = updated.j - current.j;
        if epsilon < -MONOTONE_REL_TOL * (1.0 + current.j.abs()) {
            violations += 1;
            log::warn!(
                "iteration {iteration}: functional decreased by {:.3e} (sweep change {:.3e})",
                -epsilon,
                swept.j - current.j
            );
        }
        seq = next;
        current = updated;
        log.push(record(iteration, &current, alpha, &efficiencies));
        if config.snapshot_iterations.contains(&iteration) {
            snapshots.push(Snapshot {
                iteration,
                sequence: seq.clone(),
            });
        }
        if epsilon <= config.tol {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(OptimizationResult {
        sequence: seq,
        log,
        records,
        termination,
        snapshots,
        efficiencies,
        monotonicity_violations: violations,
    })
}

/// Uniform random amplitudes in `[-2 pi a_max, 2 pi a_max]` rad/s.
pub fn random_initial_sequence(
    n_steps: usize,
    dt: f64,
    labels: Vec<String>,
    a_max_hz: f64,
    seed: u64,
) -> Result<ControlSequence> {
    if !(a_max_hz >= 0.0 && a_max_hz.is_finite()) {
        return invalid("a_max must be finite and non-negative");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 2.0 * std::f64::consts::PI * a_max_hz;
    let amps = (0..n_steps * labels.len())
        .map(|_| if bound > 0.0 { rng.random_range(-bound..=bound) } else { 0.0 })
        .collect();
    ControlSequence::from_rows(dt, labels, amps)
}
