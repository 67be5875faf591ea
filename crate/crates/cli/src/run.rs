// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use nmr_krotov::experiments::{
    build_experiment, enhancement_vs_hard_pulse, excitation_profile, na23_final_state, quadrupolar_line_integrals,
    simulate_spectrum, Experiment, ExperimentKind, Spectrum,
};
use nmr_krotov::grape::grape_optimize;
use nmr_krotov::krotov::{broadband_functional, krotov_optimize, OptimizationResult, Termination};
use nmr_krotov::propagation::forward_propagate;
use nmr_krotov::pulse_table::{export_pulse_table, TableLayout};
use nmr_krotov::smoothing::rms_power;
use nmr_krotov::ControlSequence;

use crate::config::{write_config, ConfigError, Method, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] nmr_krotov::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for I/O and table parsing, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Io { .. }) => 3,
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(nmr_krotov::Error::Io(_) | nmr_krotov::Error::Parse { .. }) => 3,
            CliError::Core(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    write_file(path, &text)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionScore {
    pub id: String,
    pub efficiency: f64,
}

/// Figures of merit of a pulse sequence under a configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Score {
    pub kind: String,
    pub n_steps: usize,
    pub dt_s: f64,
    pub duration_s: f64,
    pub conditions: Vec<ConditionScore>,
    pub mean_efficiency: f64,
    pub min_efficiency: f64,
    pub j: f64,
    pub phi: f64,
    pub penalty: f64,
    pub rms_hz: Vec<f64>,
    /// Central-transition signal over an ideal hard pulse.
    pub enhancement: Option<f64>,
    /// Integrals of the lines at `-f_Q`, `0`, `+f_Q` at the nominal coupling.
    pub line_integrals: Option<[f64; 3]>,
}

pub fn score(seq: &ControlSequence, cfg: &RunConfig) -> Result<Score> {
    let spec = cfg.experiment_spec();
    let exp = build_experiment(&spec)?;
    check_shape(seq, &exp)?;
    let pen = cfg.penalty_spec(exp.labels.len())?;
    let finals = exp.conditions.final_propagators(seq)?;
    let eff = exp.conditions.efficiencies(&finals);
    let f = exp.conditions.functional_from_finals(seq, &finals, &pen);
    let conditions = exp
        .conditions
        .conditions()
        .iter()
        .zip(&eff)
        .map(|(c, &e)| ConditionScore {
            id: c.id.clone(),
            efficiency: e,
        })
        .collect();
    let enhancement = match spec.kind {
        ExperimentKind::Na23Central | ExperimentKind::Na23Broadband => Some(enhancement_vs_hard_pulse(seq, &spec)?),
        _ => None,
    };
    let line_integrals = if spec.kind.is_quadrupolar() {
        Some(quadrupolar_line_integrals(&final_spectrum(seq, cfg)?, spec.omega_q_hz))
    } else {
        None
    };
    Ok(Score {
        kind: spec.kind.to_string(),
        n_steps: seq.n_steps(),
        dt_s: seq.dt(),
        duration_s: seq.duration(),
        conditions,
        mean_efficiency: eff.iter().sum::<f64>() / eff.len() as f64,
        min_efficiency: eff.iter().copied().fold(f64::INFINITY, f64::min),
        j: f.reported_j(),
        phi: f.phi,
        penalty: f.penalty,
        rms_hz: rms_power(seq, &exp.channel_pairs)?,
        enhancement,
        line_integrals,
    })
}

fn check_shape(seq: &ControlSequence, exp: &Experiment) -> Result<()> {
    if seq.labels() != exp.labels.as_slice() {
        return Err(nmr_krotov::Error::InvalidArgument(format!(
            "pulse channels {:?} do not match the experiment's {:?}",
            seq.labels(),
            exp.labels
        ))
        .into());
    }
    Ok(())
}

/// Spectrum after `seq` at the nominal coupling (or for the two-spin system).
pub fn final_spectrum(seq: &ControlSequence, cfg: &RunConfig) -> Result<Spectrum> {
    let spec = cfg.experiment_spec();
    let acq = cfg.acquisition();
    if spec.kind.is_quadrupolar() {
        let (sys, rho) = na23_final_state(seq, spec.omega_q_hz)?;
        return Ok(simulate_spectrum(&rho, &sys, &acq)?);
    }
    let exp = build_experiment(&spec)?;
    let cond = &exp.conditions.conditions()[0];
    let rho0 = cond
        .objective
        .initial_state()
        .expect("transfer objectives carry an initial state");
    let u = forward_propagate(seq, &cond.system)?;
    let u_n = u.last().expect("non-empty");
    let rho = u_n * rho0 * u_n.adjoint();
    Ok(simulate_spectrum(&rho, &cond.system, &acq)?)
}

/// Run one optimization from the configured seed.
pub fn run_method(cfg: &RunConfig, method: Method, seed: u64) -> Result<(Experiment, OptimizationResult)> {
    let exp = build_experiment(&cfg.experiment_spec_for(method))?;
    let initial = exp.random_sequence(cfg.run.a_max_hz, seed)?;
    let smoother = method.smoothed().then(|| cfg.truncation(exp.dt));
    let channels = exp.labels.len();
    let result = match method {
        Method::Krotov | Method::KrotovSmooth => {
            krotov_optimize(&initial, &exp.conditions, &cfg.krotov_config(channels)?, smoother.as_ref())?
        }
        Method::Grape | Method::GrapeSmooth => {
            grape_optimize(&initial, &exp.conditions, &cfg.grape_config(channels)?, smoother.as_ref())?
        }
    };
    Ok((exp, result))
}

fn termination_str(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::IterationCap => "iteration_cap",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeSummary {
    pub method: String,
    pub seed: u64,
    pub iterations: usize,
    pub termination: String,
    pub monotonicity_violations: usize,
    pub wall_time_s: f64,
    #[serde(flatten)]
    pub score: Score,
}

fn layout(cfg: &RunConfig) -> TableLayout {
    if cfg.run.export_phase_amp {
        TableLayout::AmplitudePhase
    } else {
        TableLayout::Cartesian
    }
}

pub fn convergence_csv(result: &OptimizationResult) -> String {
    let mut out = String::from("iteration,J,phi,penalty,alpha,wall_time_s\n");
    for r in &result.log.records {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.6}",
            r.iteration, r.j, r.phi, r.penalty, r.alpha, r.wall_time_s
        )
        .expect("write to string");
    }
    out
}

/// `optimize`: writes `pulse_table.csv`, `convergence.csv`, `summary.json`,
/// `config.toml` and one `snapshot_<iteration>.csv` per requested snapshot.
pub fn optimize(cfg: &RunConfig, out: &Path) -> Result<OptimizeSummary> {
    create_dir(out)?;
    let (_, result) = run_method(cfg, cfg.optimizer.method, cfg.run.seed)?;
    let layout = layout(cfg);
    export_pulse_table(&result.sequence, &out.join("pulse_table.csv"), layout)?;
    for snap in &result.snapshots {
        export_pulse_table(&snap.sequence, &out.join(format!("snapshot_{}.csv", snap.iteration)), layout)?;
    }
    write_file(&out.join("convergence.csv"), &convergence_csv(&result))?;
    let path = out.join("config.toml");
    write_config(cfg, &path).map_err(io_err(&path))?;
    let last = result.log.last().expect("log has the initial record");
    let summary = OptimizeSummary {
        method: cfg.optimizer.method.to_string(),
        seed: cfg.run.seed,
        iterations: last.iteration,
        termination: termination_str(result.termination).to_string(),
        monotonicity_violations: result.monotonicity_violations,
        wall_time_s: last.wall_time_s,
        score: score(&result.sequence, cfg)?,
    };
    write_json(&out.join("summary.json"), &summary)?;
    log::info!(
        "{} {}: efficiency {:.4} after {} iterations ({})",
        summary.score.kind,
        summary.method,
        summary.score.mean_efficiency,
        summary.iterations,
        summary.termination
    );
    Ok(summary)
}

/// `simulate`: scores an existing pulse table and writes `spectrum.csv` and
/// `summary.json`.
pub fn simulate(cfg: &RunConfig, seq: &ControlSequence, out: &Path) -> Result<Score> {
    create_dir(out)?;
    let s = score(seq, cfg)?;
    let spectrum = final_spectrum(seq, cfg)?;
    let mut text = String::from("freq_hz,intensity,dispersion\n");
    for i in 0..spectrum.freq_hz.len() {
        writeln!(
            text,
            "{:.10e},{:.16e},{:.16e}",
            spectrum.freq_hz[i], spectrum.intensity[i], spectrum.dispersion[i]
        )
        .expect("write to string");
    }
    write_file(&out.join("spectrum.csv"), &text)?;
    write_json(&out.join("summary.json"), &s)?;
    Ok(s)
}

/// `profile`: efficiency against quadrupole coupling, `profile.csv`.
pub fn profile(cfg: &RunConfig, seq: &ControlSequence, out: &Path) -> Result<Vec<(f64, f64)>> {
    create_dir(out)?;
    let points = excitation_profile(seq, cfg.kind(), &cfg.profile_grid())?;
    let mut text = String::from("omega_q_hz,efficiency\n");
    for (wq, e) in &points {
        writeln!(text, "{wq:.10e},{e:.16e}").expect("write to string");
    }
    write_file(&out.join("profile.csv"), &text)?;
    Ok(points)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub seed: u64,
    pub method: Method,
    pub mean_efficiency: f64,
    pub min_efficiency: f64,
    pub rms_hz: Vec<f64>,
    pub iterations: usize,
    pub termination: String,
    pub wall_time_s: f64,
    pub j: f64,
    pub high_frequency_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs: usize,
    pub successes: usize,
    pub mean_efficiency: f64,
    pub best_efficiency: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub kind: String,
    pub success_threshold: f64,
    pub methods: Vec<MethodSummary>,
    pub rows: Vec<CompareRow>,
}

/// `compare`: every configured method from every configured seed, in
/// parallel. Writes `compare.csv` and `compare_summary.json`.
pub fn compare(cfg: &RunConfig, out: &Path) -> Result<CompareSummary> {
    create_dir(out)?;
    let jobs: Vec<(u64, Method)> = cfg
        .run
        .compare_seeds
        .iter()
        .flat_map(|&s| cfg.run.compare_methods.iter().map(move |&m| (s, m)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(seed, method)| {
            let (exp, result) = run_method(cfg, method, seed)?;
            let last = result.log.last().expect("log has the initial record");
            let cutoff = cfg.truncation(exp.dt).cutoff_hz;
            let seq = &result.sequence;
            Ok(CompareRow {
                seed,
                method,
                mean_efficiency: result.mean_efficiency(),
                min_efficiency: result.efficiencies.iter().copied().fold(f64::INFINITY, f64::min),
                rms_hz: rms_power(seq, &exp.channel_pairs)?,
                iterations: last.iteration,
                termination: termination_str(result.termination).to_string(),
                wall_time_s: last.wall_time_s,
                j: last.j,
                high_frequency_fraction: nmr_krotov::smoothing::high_frequency_fraction(seq, cutoff)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut text = String::from("seed,method,mean_efficiency,min_efficiency,rms_hz,iterations,termination,wall_time_s,J,high_frequency_fraction\n");
    for r in &rows {
        let rms: Vec<String> = r.rms_hz.iter().map(|v| format!("{v:.6}")).collect();
        writeln!(
            text,
            "{},{},{:.10},{:.10},{},{},{},{:.3},{:.16e},{:.6e}",
            r.seed,
            r.method,
            r.mean_efficiency,
            r.min_efficiency,
            rms.join(";"),
            r.iterations,
            r.termination,
            r.wall_time_s,
            r.j,
            r.high_frequency_fraction
        )
        .expect("write to string");
    }
    write_file(&out.join("compare.csv"), &text)?;

    let methods = cfg
        .run
        .compare_methods
        .iter()
        .map(|&m| {
            let mine: Vec<&CompareRow> = rows.iter().filter(|r| r.method == m).collect();
            MethodSummary {
                method: m,
                runs: mine.len(),
                successes: mine
                    .iter()
                    .filter(|r| r.mean_efficiency >= cfg.run.success_threshold)
                    .count(),
                mean_efficiency: mine.iter().map(|r| r.mean_efficiency).sum::<f64>() / mine.len() as f64,
                best_efficiency: mine.iter().map(|r| r.mean_efficiency).fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    let summary = CompareSummary {
        kind: cfg.kind().to_string(),
        success_threshold: cfg.run.success_threshold,
        methods,
        rows,
    };
    write_json(&out.join("compare_summary.json"), &summary)?;
    Ok(summary)
}

/// Re-evaluates the functional of `seq` (used to re-score exported tables).
pub fn functional_of(seq: &ControlSequence, cfg: &RunConfig) -> Result<f64> {
    let exp = build_experiment(&cfg.experiment_spec())?;
    check_shape(seq, &exp)?;
    let pen = cfg.penalty_spec(exp.labels.len())?;
    Ok(broadband_functional(seq, &exp.conditions, &pen)?.reported_j())
}
