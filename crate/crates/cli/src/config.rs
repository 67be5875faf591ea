// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: TOML with dotted keys, e.g.
//!
//! ```toml
//! experiment.kind = "two_spin_cos3"
//! experiment.j_hz = 140.0
//! optimizer.method = "krotov_smooth"
//! penalty.lambda = 1e-4
//! run.seed = 7
//! ```
//!
//! Unknown keys are rejected. Every other key has a default.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use nmr_krotov::experiments::{Acquisition, ExperimentKind, ExperimentSpec};
use nmr_krotov::grape::{GrapeConfig, StepRule};
use nmr_krotov::inner::{InnerMethod, InnerSolverConfig};
use nmr_krotov::krotov::KrotovConfig;
use nmr_krotov::propagation::PenaltySpec;
use nmr_krotov::smoothing::TruncationSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn bad<T>(key: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Krotov,
    KrotovSmooth,
    Grape,
    GrapeSmooth,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Krotov, Method::KrotovSmooth, Method::Grape, Method::GrapeSmooth];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Krotov => "krotov",
            Method::KrotovSmooth => "krotov_smooth",
            Method::Grape => "grape",
            Method::GrapeSmooth => "grape_smooth",
        }
    }

    pub fn smoothed(self) -> bool {
        matches!(self, Method::KrotovSmooth | Method::GrapeSmooth)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerKind {
    QuasiNewton,
    ConjugateGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: String,
    #[serde(default = "d_j")]
    pub j_hz: f64,
    #[serde(default = "d_wq")]
    pub omega_q_hz: f64,
    #[serde(default = "d_wq_min")]
    pub omega_q_min_hz: f64,
    #[serde(default = "d_wq_max")]
    pub omega_q_max_hz: f64,
    #[serde(default = "d_bb_points")]
    pub broadband_points: usize,
    /// Zero or absent selects the kind's default duration.
    #[serde(default)]
    pub duration_s: f64,
    /// Absent selects 200 steps, or 500 for GRAPE on the quadrupolar kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(default = "d_one")]
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub method: Method,
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_max_iter")]
    pub max_iterations: usize,
    #[serde(default = "d_inner")]
    pub inner_method: InnerKind,
    #[serde(default = "d_inner_iter")]
    pub inner_max_iterations: usize,
    #[serde(default = "d_inner_tol")]
    pub inner_gradient_tolerance: f64,
    /// Largest amplitude change of the first GRAPE trial step.
    #[serde(default = "d_grape_step")]
    pub grape_step_hz: f64,
    #[serde(default = "d_inner_tol")]
    pub grape_gradient_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lambda {
    Uniform(f64),
    PerChannel(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySection {
    #[serde(default = "d_lambda")]
    pub lambda: Lambda,
}

impl Default for PenaltySection {
    fn default() -> Self {
        Self { lambda: d_lambda() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingSection {
    /// Zero or absent selects a tenth of the Nyquist frequency.
    #[serde(default)]
    pub cutoff_hz: f64,
    #[serde(default)]
    pub taper_hz: f64,
    #[serde(default = "d_alpha_floor")]
    pub alpha_floor: f64,
}

impl Default for SmoothingSection {
    fn default() -> Self {
        Self {
            cutoff_hz: 0.0,
            taper_hz: 0.0,
            alpha_floor: d_alpha_floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_a_max")]
    pub a_max_hz: f64,
    #[serde(default = "d_out")]
    pub output_dir: String,
    #[serde(default = "d_snapshots")]
    pub snapshots: Vec<usize>,
    #[serde(default)]
    pub export_phase_amp: bool,
    /// Seeds run by `compare`.
    #[serde(default = "d_compare_seeds")]
    pub compare_seeds: Vec<u64>,
    /// Methods run by `compare`.
    #[serde(default = "d_compare_methods")]
    pub compare_methods: Vec<Method>,
    /// Normalized efficiency counted as a success by `compare`.
    #[serde(default = "d_success")]
    pub success_threshold: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            a_max_hz: d_a_max(),
            output_dir: d_out(),
            snapshots: d_snapshots(),
            export_phase_amp: false,
            compare_seeds: d_compare_seeds(),
            compare_methods: d_compare_methods(),
            success_threshold: d_success(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionSection {
    #[serde(default = "d_dwell")]
    pub dwell_s: f64,
    #[serde(default = "d_points")]
    pub points: usize,
    #[serde(default = "d_lb")]
    pub broadening_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

impl Default for AcquisitionSection {
    fn default() -> Self {
        Self {
            dwell_s: d_dwell(),
            points: d_points(),
            broadening_hz: d_lb(),
            phase_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    #[serde(default = "d_profile_min")]
    pub omega_q_min_hz: f64,
    #[serde(default = "d_profile_max")]
    pub omega_q_max_hz: f64,
    #[serde(default = "d_profile_points")]
    pub points: usize,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self {
            omega_q_min_hz: d_profile_min(),
            omega_q_max_hz: d_profile_max(),
            points: d_profile_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentSection,
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub penalty: PenaltySection,
    #[serde(default)]
    pub smoothing: SmoothingSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub acquisition: AcquisitionSection,
    #[serde(default)]
    pub profile: ProfileSection,
}

fn d_j() -> f64 {
    140.0
}
fn d_wq() -> f64 {
    60.0
}
fn d_wq_min() -> f64 {
    40.0
}
fn d_wq_max() -> f64 {
    80.0
}
fn d_bb_points() -> usize {
    5
}
fn d_one() -> f64 {
    1.0
}
fn d_tol() -> f64 {
    1e-8
}
fn d_max_iter() -> usize {
    500
}
fn d_inner() -> InnerKind {
    InnerKind::QuasiNewton
}
fn d_inner_iter() -> usize {
    50
}
fn d_inner_tol() -> f64 {
    1e-8
}
fn d_grape_step() -> f64 {
    50.0
}
fn d_lambda() -> Lambda {
    Lambda::Uniform(1e-4)
}
fn d_alpha_floor() -> f64 {
    2f64.powi(-20)
}
fn d_a_max() -> f64 {
    100.0
}
fn d_out() -> String {
    "out".to_string()
}
fn d_snapshots() -> Vec<usize> {
    vec![0, 5, 20]
}
fn d_compare_seeds() -> Vec<u64> {
    (0..10).collect()
}
fn d_compare_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn d_success() -> f64 {
    0.9
}
fn d_dwell() -> f64 {
    1e-3
}
fn d_points() -> usize {
    1024
}
fn d_lb() -> f64 {
    2.0
}
fn d_profile_min() -> f64 {
    20.0
}
fn d_profile_max() -> f64 {
    100.0
}
fn d_profile_points() -> usize {
    41
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        bad(key, format!("must be positive, got {v}"))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        bad(key, format!("must be non-negative, got {v}"))
    }
}

impl RunConfig {
    /// Defaults for everything except the two required keys.
    pub fn new(kind: ExperimentKind, method: Method) -> Self {
        let text = format!("experiment.kind = \"{kind}\"\noptimizer.method = \"{method}\"\n");
        parse_config(&text).expect("defaults are valid")
    }

    fn default_steps(&self, method: Method) -> usize {
        let grape = matches!(method, Method::Grape | Method::GrapeSmooth);
        let quadrupolar = self.experiment.kind.parse::<ExperimentKind>().is_ok_and(|k| k.is_quadrupolar());
        if grape && quadrupolar {
            500
        } else {
            200
        }
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind.parse().expect("validated")
    }

    pub fn experiment_spec(&self) -> ExperimentSpec {
        self.experiment_spec_for(self.optimizer.method)
    }

    /// The experiment as run by `method`; only the default step count differs.
    pub fn experiment_spec_for(&self, method: Method) -> ExperimentSpec {
        let e = &self.experiment;
        ExperimentSpec {
            kind: self.kind(),
            j_hz: e.j_hz,
            omega_q_hz: e.omega_q_hz,
            omega_q_min_hz: e.omega_q_min_hz,
            omega_q_max_hz: e.omega_q_max_hz,
            broadband_points: e.broadband_points,
            duration_s: (e.duration_s > 0.0).then_some(e.duration_s),
            n_steps: e.n_steps.unwrap_or(self.default_steps(method)),
            kappa: e.kappa,
        }
    }

    pub fn penalty_spec(&self, channels: usize) -> Result<PenaltySpec, ConfigError> {
        let lambda = match &self.penalty.lambda {
            Lambda::Uniform(l) => vec![*l; channels],
            Lambda::PerChannel(v) if v.len() == channels => v.clone(),
            Lambda::PerChannel(v) => {
                return bad("penalty.lambda", format!("{} weights given for {channels} channels", v.len()))
            }
        };
        PenaltySpec::new(lambda).or_else(|e| bad("penalty.lambda", e.to_string()))
    }

    pub fn inner_solver(&self) -> InnerSolverConfig {
        InnerSolverConfig {
            method: match self.optimizer.inner_method {
                InnerKind::QuasiNewton => InnerMethod::QuasiNewton,
                InnerKind::ConjugateGradient => InnerMethod::ConjugateGradient,
            },
            max_iterations: self.optimizer.inner_max_iterations,
            gradient_tolerance: self.optimizer.inner_gradient_tolerance,
        }
    }

    pub fn krotov_config(&self, channels: usize) -> Result<KrotovConfig, ConfigError> {
        let mut cfg = KrotovConfig::new(self.penalty_spec(channels)?);
        cfg.tol = self.optimizer.tol;
        cfg.max_outer_iterations = self.optimizer.max_iterations;
        cfg.inner = self.inner_solver();
        cfg.snapshot_iterations = self.run.snapshots.clone();
        Ok(cfg)
    }

    pub fn grape_config(&self, channels: usize) -> Result<GrapeConfig, ConfigError> {
        let mut cfg = GrapeConfig::new(self.penalty_spec(channels)?);
        cfg.tol = self.optimizer.tol;
        cfg.max_iterations = self.optimizer.max_iterations;
        cfg.gradient_tolerance = self.optimizer.grape_gradient_tolerance;
        cfg.step = StepRule::backtracking(2.0 * std::f64::consts::PI * self.optimizer.grape_step_hz);
        cfg.snapshot_iterations = self.run.snapshots.clone();
        Ok(cfg)
    }

    pub fn truncation(&self, dt: f64) -> TruncationSpec {
        let s = &self.smoothing;
        let mut spec = if s.cutoff_hz > 0.0 {
            TruncationSpec::new(s.cutoff_hz)
        } else {
            TruncationSpec::default_for(dt)
        };
        spec.taper_hz = s.taper_hz;
        spec.alpha_floor = s.alpha_floor;
        spec
    }

    pub fn acquisition(&self) -> Acquisition {
        let a = &self.acquisition;
        Acquisition {
            dwell_s: a.dwell_s,
            points: a.points,
            broadening_hz: a.broadening_hz,
            phase_rad: a.phase_rad,
        }
    }

    pub fn profile_grid(&self) -> Vec<f64> {
        let p = &self.profile;
        if p.points == 1 {
            return vec![p.omega_q_min_hz];
        }
        (0..p.points)
            .map(|i| p.omega_q_min_hz + (p.omega_q_max_hz - p.omega_q_min_hz) * i as f64 / (p.points - 1) as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let e = &self.experiment;
        let kind: ExperimentKind = match e.kind.parse() {
            Ok(k) => k,
            Err(_) => return bad("experiment.kind", format!("unknown kind '{}'", e.kind)),
        };
        positive("experiment.j_hz", e.j_hz)?;
        positive("experiment.omega_q_hz", e.omega_q_hz)?;
        positive("experiment.omega_q_min_hz", e.omega_q_min_hz)?;
        positive("experiment.omega_q_max_hz", e.omega_q_max_hz)?;
        if e.omega_q_max_hz < e.omega_q_min_hz {
            return bad("experiment.omega_q_max_hz", "below experiment.omega_q_min_hz");
        }
        if e.broadband_points == 0 {
            return bad("experiment.broadband_points", "must be at least 1");
        }
        non_negative("experiment.duration_s", e.duration_s)?;
        if e.n_steps == Some(0) {
            return bad("experiment.n_steps", "must be at least 1");
        }
        non_negative("experiment.kappa", e.kappa)?;

        let o = &self.optimizer;
        positive("optimizer.tol", o.tol)?;
        if o.max_iterations == 0 {
            return bad("optimizer.max_iterations", "must be at least 1");
        }
        if o.inner_max_iterations == 0 {
            return bad("optimizer.inner_max_iterations", "must be at least 1");
        }
        non_negative("optimizer.inner_gradient_tolerance", o.inner_gradient_tolerance)?;
        positive("optimizer.grape_step_hz", o.grape_step_hz)?;
        non_negative("optimizer.grape_gradient_tolerance", o.grape_gradient_tolerance)?;

        match &self.penalty.lambda {
            Lambda::Uniform(l) => non_negative("penalty.lambda", *l)?,
            Lambda::PerChannel(v) => {
                for l in v {
                    non_negative("penalty.lambda", *l)?;
                }
                let channels = if kind.is_quadrupolar() { 2 } else { 4 };
                if v.len() != channels {
                    return bad("penalty.lambda", format!("{} weights given for {channels} channels", v.len()));
                }
            }
        }

        let s = &self.smoothing;
        non_negative("smoothing.cutoff_hz", s.cutoff_hz)?;
        non_negative("smoothing.taper_hz", s.taper_hz)?;
        if !(s.alpha_floor > 0.0 && s.alpha_floor < 1.0) {
            return bad("smoothing.alpha_floor", "must lie in (0, 1)");
        }
        let spec = self.experiment_spec();
        let dt = spec.duration() / spec.n_steps as f64;
        if let Err(err) = self.truncation(dt).validate(dt) {
            return bad("smoothing.cutoff_hz", err.to_string());
        }

        let r = &self.run;
        non_negative("run.a_max_hz", r.a_max_hz)?;
        if r.output_dir.is_empty() {
            return bad("run.output_dir", "must not be empty");
        }
        if r.compare_seeds.is_empty() {
            return bad("run.compare_seeds", "must not be empty");
        }
        if r.compare_methods.is_empty() {
            return bad("run.compare_methods", "must not be empty");
        }
        if !(0.0..=1.0).contains(&r.success_threshold) {
            return bad("run.success_threshold", "must lie in [0, 1]");
        }

        let a = &self.acquisition;
        positive("acquisition.dwell_s", a.dwell_s)?;
        if a.points < 2 || !a.points.is_power_of_two() {
            return bad("acquisition.points", "must be a power of two");
        }
        non_negative("acquisition.broadening_hz", a.broadening_hz)?;
        if !a.phase_rad.is_finite() {
            return bad("acquisition.phase_rad", "must be finite");
        }

        let p = &self.profile;
        non_negative("profile.omega_q_min_hz", p.omega_q_min_hz)?;
        if !(p.omega_q_max_hz.is_finite() && p.omega_q_max_hz >= p.omega_q_min_hz) {
            return bad("profile.omega_q_max_hz", "must not be below profile.omega_q_min_hz");
        }
        if p.points == 0 {
            return bad("profile.points", "must be at least 1");
        }
        if let Err(err) = spec.validate() {
            return bad("experiment", err.to_string());
        }
        Ok(())
    }
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    for (section, key) in [("experiment", "kind"), ("optimizer", "method")] {
        if table.get(section).and_then(|s| s.get(key)).is_none() {
            return bad(&format!("{section}.{key}"), "required key is missing");
        }
    }
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let key = e
            .span()
            .and_then(|span| text[..span.start].rsplit('\n').next().map(|head| (head, span)))
            .map(|(head, span)| {
                let line_end = text[span.start..].find('\n').map_or(text.len(), |i| span.start + i);
                let line = format!("{head}{}", &text[span.start..line_end]);
                line.split('=').next().unwrap_or("").trim().to_string()
            })
            .filter(|k| !k.is_empty());
        match key {
            Some(key) => ConfigError::Invalid {
                key,
                message: e.message().to_string(),
            },
            None => ConfigError::Syntax(e.to_string()),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Flat `section.key = value` rendering; re-parses to an equal config.
pub fn format_config(cfg: &RunConfig) -> String {
    let value = toml::Value::try_from(cfg).expect("config serializes");
    let mut out = String::new();
    let toml::Value::Table(sections) = value else {
        unreachable!("config is a table")
    };
    for (section, body) in sections {
        let toml::Value::Table(fields) = body else { continue };
        for (key, v) in fields {
            out.push_str(&format!("{section}.{key} = {v}\n"));
        }
    }
    out
}

pub fn write_config(cfg: &RunConfig, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, format_config(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_two_spin_defaults() {
        let cfg = parse_config("experiment.kind = \"two_spin_cos3\"\nexperiment.j_hz = 140.0\noptimizer.method = \"krotov\"\n").unwrap();
        let spec = cfg.experiment_spec();
        assert!((spec.duration() - 1.0 / 140.0).abs() < 1e-15);
        assert_eq!(spec.n_steps, 200);
        assert_eq!(cfg.penalty.lambda, Lambda::Uniform(1e-4));
        assert_eq!(cfg.optimizer.tol, 1e-8);
        let k = cfg.krotov_config(4).unwrap();
        let grape = parse_config("experiment.kind = \"na23_central\"\noptimizer.method = \"grape\"\n").unwrap();
        assert_eq!(grape.experiment_spec().n_steps, 500);
        assert_eq!(k.penalty.lambda, vec![1e-4; 4]);
    }

    #[test]
    fn missing_kind_is_named() {
        match parse_config("optimizer.method = \"krotov\"\n") {
            Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "experiment.kind"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config("experiment.kind = \"na23_central\"\noptimizer.method = \"grape\"\nrun.sed = 3\n").unwrap_err();
        assert!(err.to_string().starts_with("run.sed"), "{err}");
    }

    #[test]
    fn constraint_violation_names_key() {
        let err = parse_config("experiment.kind = \"na23_central\"\noptimizer.method = \"grape\"\noptimizer.tol = -1\n").unwrap_err();
        assert!(err.to_string().starts_with("optimizer.tol"), "{err}");
        let err = parse_config("experiment.kind = \"nope\"\noptimizer.method = \"grape\"\n").unwrap_err();
        assert!(err.to_string().starts_with("experiment.kind"), "{err}");
        let err = parse_config("experiment.kind = \"na23_central\"\noptimizer.method = \"grape\"\nacquisition.points = 1000\n").unwrap_err();
        assert!(err.to_string().starts_with("acquisition.points"), "{err}");
    }

    #[test]
    fn type_mismatch_is_an_error() {
        let err = parse_config("experiment.kind = \"na23_central\"\noptimizer.method = \"grape\"\nexperiment.n_steps = \"many\"\n").unwrap_err();
        assert!(err.to_string().starts_with("experiment.n_steps"), "{err}");
        let err = parse_config("optimizer.method = \"grape\"\n").unwrap_err();
        assert!(err.to_string().starts_with("experiment.kind"), "{err}");
    }

    #[test]
    fn roundtrip_preserves_every_field() {
        let mut cfg = RunConfig::new(ExperimentKind::Na23Broadband, Method::GrapeSmooth);
        cfg.experiment.duration_s = 0.02;
        cfg.experiment.n_steps = Some(120);
        cfg.penalty.lambda = Lambda::PerChannel(vec![1e-4, 3e-5]);
        cfg.smoothing.cutoff_hz = 900.0;
        cfg.run.seed = 12345678901234;
        cfg.run.snapshots = vec![1, 2, 3];
        cfg.run.compare_methods = vec![Method::Krotov];
        cfg.run.export_phase_amp = true;
        cfg.optimizer.inner_method = InnerKind::ConjugateGradient;
        let text = format_config(&cfg);
        assert!(text.lines().all(|l| l.contains('.') && l.contains(" = ")));
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
