// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Canned problems: a heteronuclear two-spin transfer and spin-3/2 sodium
//! excitation, plus hard-pulse baselines and spectrum simulation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::krotov::{random_initial_sequence, Condition, ConditionSet};
use crate::linalg::{self, CMatrix, HermitianEigen, I};
use crate::propagation::{forward_propagate, ControlSequence, Objective};
use crate::spinops::{self, angular_momentum_operators, embed, SpinSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    /// `S+ -> I- S^alpha` in a J-coupled heteronuclear pair.
    TwoSpinCos3,
    /// Central-transition excitation of a spin-3/2 nucleus.
    Na23Central,
    /// Satellite-transition excitation of a spin-3/2 nucleus.
    Na23Satellite,
    /// Central-transition excitation over a range of quadrupole couplings.
    Na23Broadband,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::TwoSpinCos3,
        ExperimentKind::Na23Central,
        ExperimentKind::Na23Satellite,
        ExperimentKind::Na23Broadband,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::TwoSpinCos3 => "two_spin_cos3",
            ExperimentKind::Na23Central => "na23_central",
            ExperimentKind::Na23Satellite => "na23_satellite",
            ExperimentKind::Na23Broadband => "na23_broadband",
        }
    }

    pub fn is_quadrupolar(self) -> bool {
        self != ExperimentKind::TwoSpinCos3
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment kind '{s}'")))
    }
}

/// Physical parameters of an experiment. `duration_s = None` selects the
/// kind's default (`1/J`, or `2.25/f_Q` with `f_Q = 3 omega_Q / 2 pi`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub j_hz: f64,
    /// `omega_Q / 2 pi`
    pub omega_q_hz: f64,
    pub omega_q_min_hz: f64,
    pub omega_q_max_hz: f64,
    pub broadband_points: usize,
    pub duration_s: Option<f64>,
    pub n_steps: usize,
    pub kappa: f64,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            j_hz: 140.0,
            omega_q_hz: 60.0,
            omega_q_min_hz: 40.0,
            omega_q_max_hz: 80.0,
            broadband_points: 5,
            duration_s: None,
            n_steps: 200,
            kappa: 1.0,
        }
    }

    pub fn duration(&self) -> f64 {
        self.duration_s.unwrap_or(match self.kind {
            ExperimentKind::TwoSpinCos3 => 1.0 / self.j_hz,
            _ => 2.25 / satellite_splitting_hz(self.omega_q_hz),
        })
    }

    /// Quadrupole couplings (Hz) of the design conditions.
    pub fn omega_q_grid(&self) -> Vec<f64> {
        match self.kind {
            ExperimentKind::TwoSpinCos3 => vec![],
            ExperimentKind::Na23Broadband => {
                let n = self.broadband_points;
                if n == 1 {
                    return vec![0.5 * (self.omega_q_min_hz + self.omega_q_max_hz)];
                }
                (0..n)
                    .map(|i| self.omega_q_min_hz + (self.omega_q_max_hz - self.omega_q_min_hz) * i as f64 / (n - 1) as f64)
                    .collect()
            }
            _ => vec![self.omega_q_hz],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                invalid(format!("{name} must be positive, got {v}"))
            }
        };
        if self.n_steps == 0 {
            return invalid("n_steps must be at least 1");
        }
        if let Some(t) = self.duration_s {
            positive("duration_s", t)?;
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return invalid("kappa must be non-negative");
        }
        match self.kind {
            ExperimentKind::TwoSpinCos3 => positive("j_hz", self.j_hz),
            ExperimentKind::Na23Central | ExperimentKind::Na23Satellite => positive("omega_q_hz", self.omega_q_hz),
            ExperimentKind::Na23Broadband => {
                positive("omega_q_hz", self.omega_q_hz)?;
                positive("omega_q_min_hz", self.omega_q_min_hz)?;
                if !(self.omega_q_max_hz >= self.omega_q_min_hz) {
                    return invalid("omega_q_max_hz must not be below omega_q_min_hz");
                }
                if self.broadband_points == 0 {
                    return invalid("broadband_points must be at least 1");
                }
                Ok(())
            }
        }
    }
}

/// `f_Q = 3 omega_Q / 2 pi`, the splitting between satellite and central lines.
pub fn satellite_splitting_hz(omega_q_hz: f64) -> f64 {
    3.0 * omega_q_hz
}

/// A fully wired optimization problem.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub conditions: ConditionSet,
    pub n_steps: usize,
    pub dt: f64,
    pub labels: Vec<String>,
    /// Quadrature (x, y) channel pairs used for RMS power.
    pub channel_pairs: Vec<(usize, usize)>,
}

impl Experiment {
    pub fn zero_sequence(&self) -> Result<ControlSequence> {
        ControlSequence::zeros(self.n_steps, self.dt, self.labels.clone())
    }

    pub fn random_sequence(&self, a_max_hz: f64, seed: u64) -> Result<ControlSequence> {
        random_initial_sequence(self.n_steps, self.dt, self.labels.clone(), a_max_hz, seed)
    }
}

pub fn two_spin_system(j_hz: f64) -> Result<SpinSystem> {
    let spins = vec![0.5, 0.5];
    let h = angular_momentum_operators(0.5)?;
    let controls = vec![
        ("I_x".to_string(), embed(&h.ix, 0, &spins)?),
        ("I_y".to_string(), embed(&h.iy, 0, &spins)?),
        ("S_x".to_string(), embed(&h.ix, 1, &spins)?),
        ("S_y".to_string(), embed(&h.iy, 1, &spins)?),
    ];
    SpinSystem::new(spins, spinops::j_coupling_hamiltonian(j_hz)?, controls)
}

/// `(rho0, C) = (S+, I- S^alpha)` with `S^alpha = E/2 + S_z`.
pub fn two_spin_transfer_operators() -> Result<(CMatrix, CMatrix)> {
    let spins = [0.5, 0.5];
    let h = angular_momentum_operators(0.5)?;
    let s_plus = embed(&h.iplus, 1, &spins)?;
    let i_minus = embed(&h.iminus, 0, &spins)?;
    let s_alpha = linalg::identity(4).map(|z| z * 0.5) + embed(&h.iz, 1, &spins)?;
    Ok((s_plus, i_minus * s_alpha))
}

pub fn na23_system(omega_q_hz: f64) -> Result<SpinSystem> {
    let h = angular_momentum_operators(1.5)?;
    let h0 = spinops::quadrupolar_hamiltonian(2.0 * PI * omega_q_hz, 1.5)?;
    SpinSystem::new(
        vec![1.5],
        h0,
        vec![("I_x".to_string(), h.ix.clone()), ("I_y".to_string(), h.iy.clone())],
    )
}

/// Index of level `m` in the descending-m basis of a spin `s`.
fn level(s: f64, m: f64) -> usize {
    (s - m).round() as usize
}

/// Single-transition operator between levels `m` and `m - 1` of a spin 3/2:
/// x phase has element 1/2 on both off-diagonal positions, y phase `-i/2, i/2`.
pub fn single_transition(m: f64, y_phase: bool) -> CMatrix {
    let (a, b) = (level(1.5, m), level(1.5, m - 1.0));
    let mut op = linalg::zeros(4);
    if y_phase {
        op[(a, b)] = I * -0.5;
        op[(b, a)] = I * 0.5;
    } else {
        op[(a, b)] = Complex64::new(0.5, 0.0);
        op[(b, a)] = Complex64::new(0.5, 0.0);
    }
    op
}

/// x-phase coherence on the `+1/2 <-> -1/2` transition.
pub fn central_transition_operator() -> CMatrix {
    single_transition(0.5, false)
}

/// Sum of the x-phase coherences on the two outer transitions.
pub fn satellite_transition_operator() -> CMatrix {
    single_transition(1.5, false) + single_transition(-0.5, false)
}

fn quadrupolar_target(kind: ExperimentKind) -> CMatrix {
    match kind {
        ExperimentKind::Na23Satellite => satellite_transition_operator(),
        _ => central_transition_operator(),
    }
}

fn na23_condition(kind: ExperimentKind, omega_q_hz: f64, kappa: f64) -> Result<Condition> {
    let system = na23_system(omega_q_hz)?;
    let rho0 = system.total_operator(|o| &o.iz)?;
    let objective = Objective::hermitian(quadrupolar_target(kind), rho0, kappa)?;
    Ok(Condition {
        id: format!("omega_q={omega_q_hz}Hz"),
        system,
        objective,
    })
}

pub fn build_experiment(spec: &ExperimentSpec) -> Result<Experiment> {
    spec.validate()?;
    let conditions = match spec.kind {
        ExperimentKind::TwoSpinCos3 => {
            let system = two_spin_system(spec.j_hz)?;
            let (rho0, target) = two_spin_transfer_operators()?;
            let objective = Objective::non_hermitian_with_kappa(target, rho0, spec.kappa)?;
            ConditionSet::single(&format!("J={}Hz", spec.j_hz), system, objective)?
        }
        kind => ConditionSet::new(
            spec.omega_q_grid()
                .into_iter()
                .map(|wq| na23_condition(kind, wq, spec.kappa))
                .collect::<Result<_>>()?,
        )?,
    };
    let labels = conditions.conditions()[0].system.control_labels();
    let channel_pairs = (0..labels.len() / 2).map(|p| (2 * p, 2 * p + 1)).collect();
    Ok(Experiment {
        n_steps: spec.n_steps,
        dt: spec.duration() / spec.n_steps as f64,
        labels,
        channel_pairs,
        conditions,
        spec: spec.clone(),
    })
}

/// `exp(-i flip I_x) rho0 exp(i flip I_x)`, free evolution neglected.
pub fn hard_pulse_response(sys: &SpinSystem, rho0: &CMatrix, flip: f64) -> Result<CMatrix> {
    if !flip.is_finite() {
        return invalid("flip angle must be finite");
    }
    let ix = sys.total_operator(|o| &o.ix)?;
    let r = linalg::expm_hermitian(&ix, flip);
    Ok(&r * rho0 * r.adjoint())
}

/// Magnitude of the coherence selected by the x/y pair of a transition
/// operator, independent of its phase.
pub fn transition_magnitude(rho: &CMatrix, x_op: &CMatrix, y_op: &CMatrix) -> f64 {
    let cx = linalg::trace_product(x_op, rho).re;
    let cy = linalg::trace_product(y_op, rho).re;
    cx.hypot(cy)
}

/// Central-transition signal after an ideal 90 degree pulse on thermal `I_z`.
pub fn hard_pulse_central_efficiency(omega_q_hz: f64) -> Result<f64> {
    let sys = na23_system(omega_q_hz)?;
    let rho0 = sys.total_operator(|o| &o.iz)?;
    let rho = hard_pulse_response(&sys, &rho0, PI / 2.0)?;
    Ok(transition_magnitude(
        &rho,
        &central_transition_operator(),
        &single_transition(0.5, true),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    pub dwell_s: f64,
    pub points: usize,
    pub broadening_hz: f64,
    /// Zero-order phase applied to the FID, radians.
    pub phase_rad: f64,
}

impl Default for Acquisition {
    fn default() -> Self {
        Self {
            dwell_s: 1e-3,
            points: 1024,
            broadening_hz: 2.0,
            phase_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub freq_hz: Vec<f64>,
    /// Real (absorption) part.
    pub intensity: Vec<f64>,
    /// Imaginary (dispersion) part.
    pub dispersion: Vec<f64>,
    pub acquisition: Acquisition,
}

impl Spectrum {
    pub fn bin_width_hz(&self) -> f64 {
        1.0 / (self.acquisition.dwell_s * self.acquisition.points as f64)
    }

    /// Magnitude of the complex integral over `center +- half_width`.
    pub fn line_integral(&self, center_hz: f64, half_width_hz: f64) -> f64 {
        let df = self.bin_width_hz();
        let (re, im) = self
            .freq_hz
            .iter()
            .zip(self.intensity.iter().zip(&self.dispersion))
            .filter(|(f, _)| (**f - center_hz).abs() <= half_width_hz)
            .fold((0.0, 0.0), |(re, im), (_, (r, i))| (re + r, im + i));
        (re * df).hypot(im * df)
    }

    /// Real-part integral over `center +- half_width`.
    pub fn absorptive_integral(&self, center_hz: f64, half_width_hz: f64) -> f64 {
        self.freq_hz
            .iter()
            .zip(&self.intensity)
            .filter(|(f, _)| (**f - center_hz).abs() <= half_width_hz)
            .map(|(_, v)| v)
            .sum::<f64>()
            * self.bin_width_hz()
    }
}

/// FID `Tr(I+ rho(t))` under free evolution by `H0`, first point halved,
/// exponential apodization, DFT, frequency axis centred at zero.
pub fn simulate_spectrum(rho: &CMatrix, sys: &SpinSystem, acq: &Acquisition) -> Result<Spectrum> {
    if acq.points < 2 || !acq.points.is_power_of_two() {
        return invalid(format!("points must be a power of two, got {}", acq.points));
    }
    if !(acq.dwell_s > 0.0 && acq.dwell_s.is_finite()) || !(acq.broadening_hz >= 0.0) {
        return invalid("dwell must be positive and broadening non-negative");
    }
    if rho.shape() != (sys.dim(), sys.dim()) {
        return invalid("density matrix does not match the spin system");
    }
    let eig = sys.drift_eigen();
    let nyquist = 0.5 / acq.dwell_s;
    let values = &eig.values;
    let max_gap = values
        .iter()
        .flat_map(|a| values.iter().map(move |b| (a - b).abs()))
        .fold(0.0_f64, f64::max)
        / (2.0 * PI);
    if 2.0 * max_gap > nyquist {
        return invalid(format!(
            "dwell {} s gives Nyquist {nyquist} Hz, below twice the largest transition frequency {max_gap} Hz",
            acq.dwell_s
        ));
    }

    let iplus = sys.total_operator(|o| &o.iplus)?;
    let rho_e = eig.to_eigenbasis(rho);
    let det_e = eig.to_eigenbasis(&iplus);
    let n = sys.dim();
    // s(t) = sum_ab (I+)_ba rho_ab exp(-i (E_a - E_b) t)
    let terms: Vec<(Complex64, f64)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| (det_e[(b, a)] * rho_e[(a, b)], values[a] - values[b]))
        .filter(|(amp, _)| amp.norm() > 0.0)
        .collect();
    let phase = Complex64::from_polar(1.0, acq.phase_rad);
    let mut fid: Vec<Complex64> = (0..acq.points)
        .map(|k| {
            let t = k as f64 * acq.dwell_s;
            let s: Complex64 = terms
                .iter()
                .map(|(amp, w)| amp * Complex64::from_polar(1.0, -w * t))
                .sum();
            s * phase * (-PI * acq.broadening_hz * t).exp()
        })
        .collect();
    fid[0] *= 0.5;
    FftPlanner::new().plan_fft_forward(acq.points).process(&mut fid);

    let half = acq.points / 2;
    let df = 1.0 / (acq.dwell_s * acq.points as f64);
    let mut freq_hz = Vec::with_capacity(acq.points);
    let mut intensity = Vec::with_capacity(acq.points);
    let mut dispersion = Vec::with_capacity(acq.points);
    for i in 0..acq.points {
        let k = (i + half) % acq.points;
        freq_hz.push((i as f64 - half as f64) * df);
        intensity.push(fid[k].re * acq.dwell_s);
        dispersion.push(fid[k].im * acq.dwell_s);
    }
    Ok(Spectrum {
        freq_hz,
        intensity,
        dispersion,
        acquisition: *acq,
    })
}

/// Half-width of the windows used by [`quadrupolar_line_integrals`]:
/// 2.5 linewidths, at least two bins. Wider windows collect the 1/f
/// dispersive tails of neighbouring lines.
pub fn line_window_hz(spectrum: &Spectrum) -> f64 {
    (2.5 * spectrum.acquisition.broadening_hz).max(2.0 * spectrum.bin_width_hz())
}

/// Complex integrals of the lines at `-f_Q`, `0` and `+f_Q`, in that order.
pub fn quadrupolar_line_integrals(spectrum: &Spectrum, omega_q_hz: f64) -> [f64; 3] {
    let f_q = satellite_splitting_hz(omega_q_hz);
    let w = line_window_hz(spectrum);
    [
        spectrum.line_integral(-f_q, w),
        spectrum.line_integral(0.0, w),
        spectrum.line_integral(f_q, w),
    ]
}

/// Final density matrix of a sodium system driven by `seq` from `I_z`.
pub fn na23_final_state(seq: &ControlSequence, omega_q_hz: f64) -> Result<(SpinSystem, CMatrix)> {
    let sys = na23_system(omega_q_hz)?;
    let rho0 = sys.total_operator(|o| &o.iz)?;
    let u = forward_propagate(seq, &sys)?;
    let u_n = u.last().expect("non-empty");
    Ok((sys, u_n * rho0 * u_n.adjoint()))
}

/// Normalized central- (or, for the satellite kind, satellite-) transition
/// efficiency of `seq` at each quadrupole coupling in `grid_hz`.
pub fn excitation_profile(seq: &ControlSequence, kind: ExperimentKind, grid_hz: &[f64]) -> Result<Vec<(f64, f64)>> {
    if grid_hz.is_empty() {
        return invalid("quadrupole grid is empty");
    }
    if !kind.is_quadrupolar() {
        return Err(Error::UnsupportedVariant(format!("no quadrupole profile for {kind}")));
    }
    grid_hz
        .iter()
        .map(|&wq| {
            let cond = na23_condition(kind, wq, 1.0)?;
            let u = forward_propagate(seq, &cond.system)?;
            let phi = cond.objective.final_cost(u.last().expect("non-empty")).phi;
            Ok((wq, cond.objective.normalized_efficiency(phi)?))
        })
        .collect()
}

/// Central-transition signal of `seq` relative to an ideal 90 degree pulse.
pub fn enhancement_vs_hard_pulse(seq: &ControlSequence, spec: &ExperimentSpec) -> Result<f64> {
    if !matches!(spec.kind, ExperimentKind::Na23Central | ExperimentKind::Na23Broadband) {
        return invalid(format!("enhancement is defined for central-transition kinds, not {}", spec.kind));
    }
    let (_, rho) = na23_final_state(seq, spec.omega_q_hz)?;
    let signal = linalg::trace_product(&central_transition_operator(), &rho).re;
    Ok(signal / hard_pulse_central_efficiency(spec.omega_q_hz)?)
}

/// Upper bound of `Tr(C rho)` over unitaries, from sorted spectra.
pub fn sorted_pairing_bound(target: &CMatrix, rho0: &CMatrix) -> f64 {
    let c = HermitianEigen::new(target).sorted_values_desc();
    let r = HermitianEigen::new(rho0).sorted_values_desc();
    c.iter().zip(&r).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_norm;
    use crate::propagation::unitary_bound;

    #[test]
    fn kind_names_roundtrip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.as_str().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("na23".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn two_spin_defaults() {
        let exp = build_experiment(&ExperimentSpec::new(ExperimentKind::TwoSpinCos3)).unwrap();
        assert!((exp.spec.duration() - 7.142857142857143e-3).abs() < 1e-15);
        assert_eq!(exp.n_steps, 200);
        assert_eq!(exp.labels, vec!["I_x", "I_y", "S_x", "S_y"]);
        assert_eq!(exp.channel_pairs, vec![(0, 1), (2, 3)]);
        let obj = &exp.conditions.conditions()[0].objective;
        assert!((obj.normalization().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn na23_defaults() {
        let exp = build_experiment(&ExperimentSpec::new(ExperimentKind::Na23Central)).unwrap();
        assert!((exp.spec.duration() - 12.5e-3).abs() < 1e-15);
        assert_eq!(exp.labels.len(), 2);
        let obj = &exp.conditions.conditions()[0].objective;
        assert!((obj.normalization().unwrap() - 1.5).abs() < 1e-12);

        let sat = build_experiment(&ExperimentSpec::new(ExperimentKind::Na23Satellite)).unwrap();
        let obj = &sat.conditions.conditions()[0].objective;
        assert!((obj.normalization().unwrap() - 2.0).abs() < 1e-12);

        let bb = build_experiment(&ExperimentSpec::new(ExperimentKind::Na23Broadband)).unwrap();
        assert_eq!(bb.spec.omega_q_grid(), vec![40.0, 50.0, 60.0, 70.0, 80.0]);
        assert_eq!(bb.conditions.len(), 5);
    }

    #[test]
    fn invalid_parameters() {
        let mut spec = ExperimentSpec::new(ExperimentKind::TwoSpinCos3);
        spec.j_hz = -1.0;
        assert!(build_experiment(&spec).is_err());
        let mut spec = ExperimentSpec::new(ExperimentKind::Na23Broadband);
        spec.omega_q_max_hz = 30.0;
        assert!(build_experiment(&spec).is_err());
        let mut spec = ExperimentSpec::new(ExperimentKind::Na23Central);
        spec.n_steps = 0;
        assert!(build_experiment(&spec).is_err());
    }

    #[test]
    fn transition_operator_spectra() {
        let c = central_transition_operator();
        let ev = HermitianEigen::new(&c).sorted_values_desc();
        for (a, b) in ev.iter().zip([0.5, 0.0, 0.0, -0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        let s = satellite_transition_operator();
        let ev = HermitianEigen::new(&s).sorted_values_desc();
        for (a, b) in ev.iter().zip([0.5, 0.5, -0.5, -0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hard_pulse_examples() {
        let half = SpinSystem::new(
            vec![0.5],
            linalg::zeros(2),
            vec![("x".into(), angular_momentum_operators(0.5).unwrap().ix)],
        )
        .unwrap();
        let iz = half.total_operator(|o| &o.iz).unwrap();
        let iy = half.total_operator(|o| &o.iy).unwrap();
        assert!(frobenius_norm(&(hard_pulse_response(&half, &iz, 0.0).unwrap() - &iz)) < 1e-15);
        let rho = hard_pulse_response(&half, &iz, PI / 2.0).unwrap();
        assert!(frobenius_norm(&(rho + iy)) < 1e-15);
        assert!(hard_pulse_response(&half, &iz, f64::NAN).is_err());
    }

    #[test]
    fn hard_pulse_central_signal_is_one() {
        assert!((hard_pulse_central_efficiency(60.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hard_pulse_lines_are_three_four_three() {
        // oracle: single-quantum elements of -I_y are |<m-1|I-|m>| / 2
        let sys = na23_system(60.0).unwrap();
        let iz = sys.total_operator(|o| &o.iz).unwrap();
        let rho = hard_pulse_response(&sys, &iz, PI / 2.0).unwrap();
        let mut mags = vec![];
        for m in [1.5, 0.5, -0.5] {
            let (a, b) = (level(1.5, m), level(1.5, m - 1.0));
            mags.push(rho[(a, b)].norm());
            let expected = (1.5 * 2.5 - m * (m - 1.0)).sqrt() / 2.0;
            assert!((rho[(a, b)].norm() - expected).abs() < 1e-14);
        }
        let acq = Acquisition::default();
        let spec = simulate_spectrum(&rho, &sys, &acq).unwrap();
        let [lo, c, hi] = quadrupolar_line_integrals(&spec, 60.0);
        assert!((lo / c - 0.75).abs() < 0.02, "{lo} {c} {hi}");
        assert!((hi / c - 0.75).abs() < 0.02, "{lo} {c} {hi}");

        let peak = |lo_hz: f64, hi_hz: f64| {
            spec.freq_hz
                .iter()
                .zip(&spec.intensity)
                .zip(&spec.dispersion)
                .filter(|((f, _), _)| **f >= lo_hz && **f <= hi_hz)
                .max_by(|a, b| a.0 .1.hypot(*a.1).total_cmp(&b.0 .1.hypot(*b.1)))
                .map(|((f, _), _)| *f)
                .unwrap()
        };
        assert!(peak(-250.0, -100.0).abs() - 180.0 <= spec.bin_width_hz());
        assert!(peak(-50.0, 50.0).abs() <= spec.bin_width_hz());
        assert!((peak(100.0, 250.0) - 180.0).abs() <= spec.bin_width_hz());
    }

    #[test]
    fn phased_hard_pulse_spectrum_is_absorptive() {
        let sys = na23_system(60.0).unwrap();
        let iz = sys.total_operator(|o| &o.iz).unwrap();
        let rho = hard_pulse_response(&sys, &iz, PI / 2.0).unwrap();
        let acq = Acquisition {
            phase_rad: PI / 2.0,
            ..Acquisition::default()
        };
        let spec = simulate_spectrum(&rho, &sys, &acq).unwrap();
        let absorptive = spec.absorptive_integral(0.0, 90.0);
        assert!(absorptive > 0.0);
        assert!((absorptive - spec.line_integral(0.0, 90.0)).abs() < 0.02 * absorptive);
    }

    #[test]
    fn zero_coupling_gives_single_line() {
        let sys = na23_system(0.0).unwrap();
        let iz = sys.total_operator(|o| &o.iz).unwrap();
        let rho = hard_pulse_response(&sys, &iz, PI / 2.0).unwrap();
        let spec = simulate_spectrum(&rho, &sys, &Acquisition::default()).unwrap();
        let [lo, c, hi] = quadrupolar_line_integrals(&spec, 60.0);
        assert!(lo < 0.03 * c && hi < 0.03 * c);
        // the integral of the whole spectrum is half the first FID point
        let total = spec.line_integral(0.0, 500.0);
        let s0 = linalg::trace_product(&sys.total_operator(|o| &o.iplus).unwrap(), &rho);
        assert!((total - 0.5 * s0.norm()).abs() < 1e-12);
    }

    #[test]
    fn central_only_state_has_no_satellites() {
        let sys = na23_system(60.0).unwrap();
        let rho = central_transition_operator();
        let spec = simulate_spectrum(&rho, &sys, &Acquisition::default()).unwrap();
        let [lo, c, hi] = quadrupolar_line_integrals(&spec, 60.0);
        assert!(lo < 0.05 * c && hi < 0.05 * c);
    }

    #[test]
    fn spectrum_argument_checks() {
        let sys = na23_system(60.0).unwrap();
        let rho = central_transition_operator();
        let bad_points = Acquisition { points: 1000, ..Acquisition::default() };
        assert!(simulate_spectrum(&rho, &sys, &bad_points).is_err());
        let slow = Acquisition { dwell_s: 2e-3, ..Acquisition::default() };
        assert!(simulate_spectrum(&rho, &sys, &slow).is_err());
        assert!(simulate_spectrum(&linalg::zeros(2), &sys, &Acquisition::default()).is_err());
    }

    #[test]
    fn integrals_independent_of_sampling() {
        let sys = na23_system(60.0).unwrap();
        let iz = sys.total_operator(|o| &o.iz).unwrap();
        let rho = hard_pulse_response(&sys, &iz, 1.1).unwrap();
        let coarse = simulate_spectrum(&rho, &sys, &Acquisition::default()).unwrap();
        let fine = simulate_spectrum(
            &rho,
            &sys,
            &Acquisition { dwell_s: 0.5e-3, points: 2048, ..Acquisition::default() },
        )
        .unwrap();
        for (a, b) in quadrupolar_line_integrals(&coarse, 60.0)
            .iter()
            .zip(quadrupolar_line_integrals(&fine, 60.0))
        {
            assert!((a - b).abs() / b < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_sequence_profile_and_enhancement() {
        let spec = ExperimentSpec::new(ExperimentKind::Na23Central);
        let exp = build_experiment(&spec).unwrap();
        let zero = exp.zero_sequence().unwrap();
        for (_, e) in excitation_profile(&zero, ExperimentKind::Na23Central, &[40.0, 60.0, 80.0]).unwrap() {
            assert!(e.abs() < 1e-14);
        }
        assert!(enhancement_vs_hard_pulse(&zero, &spec).unwrap().abs() < 1e-14);
        assert!(excitation_profile(&zero, ExperimentKind::Na23Central, &[]).is_err());
        assert!(enhancement_vs_hard_pulse(&zero, &ExperimentSpec::new(ExperimentKind::TwoSpinCos3)).is_err());
    }

    #[test]
    fn discretized_hard_pulse_has_unit_enhancement() {
        // A y-phase 90 degree rotation in one short step maps I_z to I_x.
        let mut spec = ExperimentSpec::new(ExperimentKind::Na23Central);
        spec.n_steps = 2000;
        let exp = build_experiment(&spec).unwrap();
        let mut seq = exp.zero_sequence().unwrap();
        seq.step_mut(0)[1] = (PI / 2.0) / exp.dt;
        let ratio = enhancement_vs_hard_pulse(&seq, &spec).unwrap();
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn sorted_pairing_matches_unitary_bound() {
        let sys = na23_system(60.0).unwrap();
        let iz = sys.total_operator(|o| &o.iz).unwrap();
        for c in [central_transition_operator(), satellite_transition_operator()] {
            assert!((sorted_pairing_bound(&c, &iz) - unitary_bound(&c, &iz)).abs() < 1e-12);
        }
    }
}
