// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Gradient-ascent baseline over the same discretized controls.

use std::time::Instant;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::krotov::{
    broadband_functional, ConditionSet, IterationLog, IterationRecord, OptimizationResult, Snapshot, Termination,
};
use crate::linalg::{CMatrix, UnitaryExp};
use crate::propagation::{ControlSequence, Functional, PenaltySpec, PropagationRecord};
use crate::smoothing::{regularized_accept, TruncationSpec};
use crate::spinops;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Every step moves the largest amplitude by exactly `max_change` rad/s.
    Fixed { max_change: f64 },
    /// Backtracking on `J(w + s G / |G|_inf) >= J(w) + c s |G|_2^2 / |G|_inf`.
    Backtracking {
        initial_change: f64,
        shrink: f64,
        sufficient_increase: f64,
        max_tries: usize,
    },
}

impl StepRule {
    pub fn backtracking(initial_change: f64) -> Self {
        StepRule::Backtracking {
            initial_change,
            shrink: 0.5,
            sufficient_increase: 1e-4,
            max_tries: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrapeConfig {
    pub penalty: PenaltySpec,
    pub max_iterations: usize,
    pub step: StepRule,
    /// Stop once `|G|_inf` falls below this.
    pub gradient_tolerance: f64,
    /// Stop once an accepted step raises `J` by no more than this.
    pub tol: f64,
    pub snapshot_iterations: Vec<usize>,
}

impl GrapeConfig {
    pub fn new(penalty: PenaltySpec) -> Self {
        Self {
            penalty,
            max_iterations: 2000,
            step: StepRule::backtracking(2.0 * std::f64::consts::PI * 50.0),
            gradient_tolerance: 1e-8,
            tol: 1e-10,
            snapshot_iterations: vec![0, 5, 20],
        }
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        let ok = match self.step {
            StepRule::Fixed { max_change } => max_change > 0.0,
            StepRule::Backtracking {
                initial_change,
                shrink,
                sufficient_increase,
                max_tries,
            } => {
                initial_change > 0.0
                    && shrink > 0.0
                    && shrink < 1.0
                    && (0.0..1.0).contains(&sufficient_increase)
                    && max_tries > 0
            }
        };
        if !ok {
            return invalid("GRAPE step parameters must be positive (shrink and c in (0, 1))");
        }
        if self.max_iterations == 0 || !(self.gradient_tolerance >= 0.0) || !(self.tol >= 0.0) {
            return invalid("GRAPE iteration cap must be positive and tolerances non-negative");
        }
        if self.penalty.lambda.len() != channels {
            return invalid("penalty weights do not match the channel count");
        }
        Ok(())
    }
}

/// `dJ/dw_kj` as an N x K grid (same layout as [`ControlSequence`]), using the
/// exact derivative of each Strang step.
pub fn grape_gradient(seq: &ControlSequence, conditions: &ConditionSet, pen: &PenaltySpec) -> Result<ControlSequence> {
    let records = conditions.records(seq)?;
    gradient_from_records(seq, conditions, pen, &records)
}

fn gradient_from_records(
    seq: &ControlSequence,
    conditions: &ConditionSet,
    pen: &PenaltySpec,
    records: &[PropagationRecord],
) -> Result<ControlSequence> {
    if pen.lambda.len() != seq.n_channels() {
        return invalid("penalty weights do not match the channel count");
    }
    let dt = seq.dt();
    let ops = conditions.control_ops();
    let half_steps: Vec<CMatrix> = conditions
        .conditions()
        .iter()
        .map(|c| spinops::half_step_factor(&c.system.h0, dt))
        .collect();
    let mut grad = seq.clone();
    for j in 0..seq.n_steps() {
        // dU_N enters through S_j = A V_j A, so dJ = 2 Re Tr(dV_j A U_j B_{j+1} A).
        let mut x = CMatrix::zeros(ops[0].nrows(), ops[0].ncols());
        for (a, rec) in half_steps.iter().zip(records) {
            x += a * &rec.forward[j] * &rec.backward[j + 1] * a;
        }
        let v = UnitaryExp::new(&spinops::control_generator(seq.step(j), ops), dt);
        let x_eig = v.eig.to_eigenbasis(&x);
        let kernel = v.derivative_kernel();
        let n = kernel.nrows();
        let weighted = CMatrix::from_fn(n, n, |a, b| kernel[(a, b)] * x_eig[(b, a)]);
        let row = grad.step_mut(j);
        for (k, h) in ops.iter().enumerate() {
            let h_eig = v.eig.to_eigenbasis(h);
            let tr: Complex64 = h_eig.iter().zip(weighted.iter()).map(|(p, q)| p * q).sum();
            row[k] = 2.0 * tr.re - 2.0 * pen.lambda[k] * dt * seq.step(j)[k];
        }
    }
    Ok(grad)
}

fn axpy(seq: &ControlSequence, s: f64, dir: &ControlSequence) -> ControlSequence {
    let mut out = seq.clone();
    for (o, d) in out.as_mut_slice().iter_mut().zip(dir.as_slice()) {
        *o += s * d;
    }
    out
}

/// Gradient ascent; with `smoother`, each accepted step is passed through
/// the same alpha back-off used by the Krotov loop.
pub fn grape_optimize(
    initial: &ControlSequence,
    conditions: &ConditionSet,
    config: &GrapeConfig,
    smoother: Option<&TruncationSpec>,
) -> Result<OptimizationResult> {
    config.validate(initial.n_channels())?;
    if let Some(spec) = smoother {
        spec.validate(initial.dt())?;
    }
    let start = Instant::now();
    let pen = &config.penalty;
    let evaluate = |s: &ControlSequence| broadband_functional(s, conditions, pen);

    let mut seq = initial.clone();
    let mut records = conditions.records(&seq)?;
    let finals = |recs: &[PropagationRecord]| -> Vec<CMatrix> { recs.iter().map(|r| r.final_propagator().clone()).collect() };
    let mut current = conditions.functional_from_finals(&seq, &finals(&records), pen);
    let mut efficiencies = conditions.efficiencies(&finals(&records));

    let mut log = IterationLog::default();
    let record = |iteration: usize, f: &Functional, alpha: f64, eff: &[f64]| IterationRecord {
        iteration,
        j: f.reported_j(),
        j_positivized: f.j,
        phi: f.phi,
        penalty: f.penalty,
        alpha,
        wall_time_s: start.elapsed().as_secs_f64(),
        efficiency: eff.iter().sum::<f64>() / eff.len() as f64,
    };
    log.push(record(0, &current, 0.0, &efficiencies));
    let mut snapshots = Vec::new();
    if config.snapshot_iterations.contains(&0) {
        snapshots.push(Snapshot {
            iteration: 0,
            sequence: seq.clone(),
        });
    }

    let mut violations = 0;
    let mut termination = Termination::IterationCap;
    let mut next_change = match config.step {
        StepRule::Fixed { max_change } => max_change,
        StepRule::Backtracking { initial_change, .. } => initial_change,
    };
    for iteration in 1..=config.max_iterations {
        let grad = gradient_from_records(&seq, conditions, pen, &records)?;
        let g_inf = grad.max_abs();
        if !(g_inf > config.gradient_tolerance) {
            termination = Termination::Converged;
            break;
        }
        let g2: f64 = grad.as_slice().iter().map(|g| g * g).sum();

        let stepped = match config.step {
            StepRule::Fixed { max_change } => Some(axpy(&seq, max_change / g_inf, &grad)),
            StepRule::Backtracking {
                initial_change,
                shrink,
                sufficient_increase,
                max_tries,
            } => {
                let mut change = next_change;
                let mut found = None;
                for _ in 0..max_tries {
                    let trial = axpy(&seq, change / g_inf, &grad);
                    let j = evaluate(&trial)?.j;
                    if j >= current.j + sufficient_increase * change * g2 / g_inf {
                        found = Some(trial);
                        break;
                    }
                    change *= shrink;
                }
                next_change = (2.0 * change).min(initial_change);
                found
            }
        };
        let Some(stepped) = stepped else {
            log::info!("GRAPE line search stalled at iteration {iteration}");
            termination = Termination::Converged;
            break;
        };

        let (next, alpha) = match smoother {
            Some(spec) => {
                let accepted = regularized_accept(current.j, &stepped, |t| Ok(evaluate(t)?.j), spec)?;
                (accepted.sequence, accepted.alpha)
            }
            None => (stepped, 0.0),
        };
        records = conditions.records(&next)?;
        let updated = conditions.functional_from_finals(&next, &finals(&records), pen);
        efficiencies = conditions.efficiencies(&finals(&records));
        let epsilon = updated.j - current.j;
        if epsilon < -crate::krotov::MONOTONE_REL_TOL * (1.0 + current.j.abs()) {
            violations += 1;
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
        if matches!(config.step, StepRule::Backtracking { .. }) && epsilon <= config.tol {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{build_experiment, ExperimentKind, ExperimentSpec};
    use crate::linalg::testutil::random_matrix;
    use crate::propagation::Objective;
    use crate::spinops::SpinSystem;
    use crate::{linalg, krotov};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(rng: &mut ChaCha8Rng, labels: Vec<String>, n: usize, dt: f64, amp: f64) -> ControlSequence {
        let k = labels.len();
        let amps = (0..n * k).map(|_| rng.random_range(-amp..amp)).collect();
        ControlSequence::from_rows(dt, labels, amps).unwrap()
    }

    fn two_spin() -> SpinSystem {
        crate::experiments::two_spin_system(140.0).unwrap()
    }

    #[test]
    fn penalty_only_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sys = two_spin();
        let obj = Objective::hermitian(linalg::zeros(4), linalg::identity(4), 0.0).unwrap();
        let conditions = ConditionSet::single("c", sys.clone(), obj).unwrap();
        let pen = PenaltySpec::new(vec![1e-4, 2e-4, 3e-4, 4e-4]).unwrap();
        let seq = random_seq(&mut rng, sys.control_labels(), 10, 1e-4, 1000.0);
        let g = grape_gradient(&seq, &conditions, &pen).unwrap();
        for j in 0..10 {
            for k in 0..4 {
                let expected = -2.0 * pen.lambda[k] * 1e-4 * seq.get(j, k);
                assert!((g.get(j, k) - expected).abs() < 1e-15 * (1.0 + expected.abs()));
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = two_spin();
        let pen = PenaltySpec::uniform(1e-4, 4).unwrap();
        for trial in 0..4 {
            let c = random_matrix(&mut rng, 4);
            let rho = random_matrix(&mut rng, 4);
            let obj = if trial % 2 == 0 {
                Objective::non_hermitian(c, rho).unwrap()
            } else {
                Objective::hermitian(&c + c.adjoint(), &rho + rho.adjoint(), 1.0).unwrap()
            };
            let conditions = ConditionSet::single("c", sys.clone(), obj).unwrap();
            let seq = random_seq(&mut rng, sys.control_labels(), 6, 2e-4, 2000.0);
            let g = grape_gradient(&seq, &conditions, &pen).unwrap();
            let h = 1e-2;
            let mut num = 0.0;
            let mut den = 0.0;
            for idx in 0..seq.as_slice().len() {
                let mut p = seq.clone();
                let mut m = seq.clone();
                p.as_mut_slice()[idx] += h;
                m.as_mut_slice()[idx] -= h;
                let fd = (broadband_functional(&p, &conditions, &pen).unwrap().j
                    - broadband_functional(&m, &conditions, &pen).unwrap().j)
                    / (2.0 * h);
                num += (fd - g.as_slice()[idx]).powi(2);
                den += fd * fd;
            }
            assert!((num / den).sqrt() < 1e-6, "trial {trial}: {}", (num / den).sqrt());
        }
    }

    #[test]
    fn penalty_only_ascent_goes_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sys = two_spin();
        let obj = Objective::hermitian(linalg::zeros(4), linalg::identity(4), 0.0).unwrap();
        let conditions = ConditionSet::single("c", sys.clone(), obj).unwrap();
        let mut config = GrapeConfig::new(PenaltySpec::uniform(1e-4, 4).unwrap());
        config.step = StepRule::backtracking(2000.0);
        config.max_iterations = 200;
        config.tol = 0.0;
        config.gradient_tolerance = 0.0;
        let seq = random_seq(&mut rng, sys.control_labels(), 10, 1e-4, 1000.0);
        let out = grape_optimize(&seq, &conditions, &config, None).unwrap();
        assert!(out.sequence.max_abs() < 1e-3, "{}", out.sequence.max_abs());
        assert_eq!(out.monotonicity_violations, 0);
    }

    #[test]
    fn accepted_steps_never_decrease() {
        let exp = build_experiment(&ExperimentSpec::new(ExperimentKind::Na23Central)).unwrap();
        let mut config = GrapeConfig::new(PenaltySpec::uniform(1e-4, 2).unwrap());
        config.max_iterations = 30;
        let seq = exp.random_sequence(100.0, 7).unwrap();
        for smoother in [None, Some(TruncationSpec::default_for(exp.dt))] {
            let out = grape_optimize(&seq, &exp.conditions, &config, smoother.as_ref()).unwrap();
            assert!(out.log.monotonicity_violations(1e-12).is_empty());
            assert!(out.log.last().unwrap().j > out.log.records[0].j);
        }
    }

    #[test]
    fn gradient_vanishes_at_krotov_fixed_point() {
        let mut spec = ExperimentSpec::new(ExperimentKind::Na23Central);
        spec.n_steps = 40;
        let exp = build_experiment(&spec).unwrap();
        let mut config = krotov::KrotovConfig::new(PenaltySpec::uniform(1e-4, 2).unwrap());
        config.max_outer_iterations = 3000;
        config.tol = 1e-15;
        let seq = exp.random_sequence(100.0, 3).unwrap();
        let out = krotov::krotov_optimize(&seq, &exp.conditions, &config, None).unwrap();
        let g = grape_gradient(&out.sequence, &exp.conditions, &config.penalty).unwrap();
        assert!(g.max_abs() < 1e-6, "{}", g.max_abs());
    }
}
