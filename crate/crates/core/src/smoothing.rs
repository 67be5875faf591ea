// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Frequency truncation of control waveforms and the alpha-backtracking blend
//! that keeps the functional from decreasing.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::propagation::ControlSequence;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    /// Low-pass corner in Hz; every bin with |f| above it is removed.
    pub cutoff_hz: f64,
    pub alpha_floor: f64,
    pub alpha_shrink: f64,
    /// Width of an optional raised-cosine roll-off below the cutoff; 0 gives a brick wall.
    pub taper_hz: f64,
}

impl TruncationSpec {
    pub fn new(cutoff_hz: f64) -> Self {
        Self {
            cutoff_hz,
            alpha_floor: 2f64.powi(-20),
            alpha_shrink: 0.5,
            taper_hz: 0.0,
        }
    }

    /// Default corner at a tenth of the Nyquist frequency of `dt`.
    pub fn default_for(dt: f64) -> Self {
        Self::new(0.1 * nyquist(dt))
    }

    pub fn validate(&self, dt: f64) -> Result<()> {
        check_cutoff(self.cutoff_hz, dt)?;
        if !(self.alpha_floor > 0.0 && self.alpha_floor < 1.0) {
            return invalid(format!("alpha_floor must lie in (0, 1), got {}", self.alpha_floor));
        }
        if !(self.alpha_shrink > 0.0 && self.alpha_shrink < 1.0) {
            return invalid(format!("alpha_shrink must lie in (0, 1), got {}", self.alpha_shrink));
        }
        if !(self.taper_hz >= 0.0 && self.taper_hz <= self.cutoff_hz) {
            return invalid(format!("taper_hz must lie in [0, cutoff_hz], got {}", self.taper_hz));
        }
        Ok(())
    }

    fn weight(&self, f: f64) -> f64 {
        if f > self.cutoff_hz {
            0.0
        } else if self.taper_hz > 0.0 && f > self.cutoff_hz - self.taper_hz {
            let x = (f - (self.cutoff_hz - self.taper_hz)) / self.taper_hz;
            0.5 * (1.0 + (std::f64::consts::PI * x).cos())
        } else {
            1.0
        }
    }
}

pub fn nyquist(dt: f64) -> f64 {
    0.5 / dt
}

fn check_cutoff(cutoff_hz: f64, dt: f64) -> Result<()> {
    if !(cutoff_hz > 0.0 && cutoff_hz <= nyquist(dt) * (1.0 + 1e-12)) {
        return invalid(format!(
            "cutoff {cutoff_hz} Hz outside (0, {}] Hz",
            nyquist(dt)
        ));
    }
    Ok(())
}

/// |frequency| in Hz of DFT bin `k` for `n` samples spaced by `dt`.
pub fn bin_frequency(k: usize, n: usize, dt: f64) -> f64 {
    k.min(n - k) as f64 / (n as f64 * dt)
}

/// Forward DFT of a real channel.
pub fn channel_spectrum(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn inverse_real(mut spectrum: Vec<Complex64>) -> Vec<f64> {
    let n = spectrum.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    spectrum.iter().map(|z| z.re / n as f64).collect()
}

/// Low-pass every channel independently.
pub fn frequency_truncate(seq: &ControlSequence, spec: &TruncationSpec) -> Result<ControlSequence> {
    spec.validate(seq.dt())?;
    let n = seq.n_steps();
    let mut out = seq.clone();
    for k in 0..seq.n_channels() {
        let mut spectrum = channel_spectrum(&seq.channel(k));
        for (bin, z) in spectrum.iter_mut().enumerate() {
            *z *= spec.weight(bin_frequency(bin, n, seq.dt()));
        }
        out.set_channel(k, &inverse_real(spectrum));
    }
    Ok(out)
}

/// `(1 - alpha) w + alpha F(w)`, evaluated as `w + alpha (F(w) - w)`.
pub fn blend(omega_new: &ControlSequence, alpha: f64, spec: &TruncationSpec) -> Result<ControlSequence> {
    if !(0.0..=1.0).contains(&alpha) {
        return invalid(format!("alpha must lie in [0, 1], got {alpha}"));
    }
    let filtered = frequency_truncate(omega_new, spec)?;
    Ok(blend_with(omega_new, &filtered, alpha))
}

fn blend_with(omega_new: &ControlSequence, filtered: &ControlSequence, alpha: f64) -> ControlSequence {
    let mut out = omega_new.clone();
    for (o, f) in out.as_mut_slice().iter_mut().zip(filtered.as_slice()) {
        *o += alpha * (f - *o);
    }
    out
}

#[derive(Debug, Clone)]
pub struct Accepted {
    pub sequence: ControlSequence,
    pub alpha: f64,
    /// Functional of the returned sequence when it was evaluated here
    /// (`None` on the alpha = 0 fallback, which returns `omega_new` untouched).
    pub value: Option<f64>,
    pub evaluations: usize,
}

/// Try `alpha = 1, shrink, shrink^2, ...` down to `alpha_floor` and keep the
/// first blend with `J >= j_old`; otherwise fall back to `alpha = 0`.
pub fn regularized_accept<F>(
    j_old: f64,
    omega_new: &ControlSequence,
    mut evaluator: F,
    spec: &TruncationSpec,
) -> Result<Accepted>
where
    F: FnMut(&ControlSequence) -> Result<f64>,
{
    let filtered = frequency_truncate(omega_new, spec)?;
    let mut alpha = 1.0;
    let mut evaluations = 0;
    while alpha >= spec.alpha_floor {
        let trial = blend_with(omega_new, &filtered, alpha);
        let value = evaluator(&trial)?;
        evaluations += 1;
        if value >= j_old {
            return Ok(Accepted {
                sequence: trial,
                alpha,
                value: Some(value),
                evaluations,
            });
        }
        alpha *= spec.alpha_shrink;
    }
    Ok(Accepted {
        sequence: omega_new.clone(),
        alpha: 0.0,
        value: None,
        evaluations,
    })
}

/// RMS quadrature amplitude per (x, y) channel pair, in Hz.
pub fn rms_power(seq: &ControlSequence, channel_pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    let mut seen = vec![false; seq.n_channels()];
    for &(x, y) in channel_pairs {
        for c in [x, y] {
            if c >= seen.len() || seen[c] || x == y {
                return invalid(format!("channel pairing {channel_pairs:?} is not a partition"));
            }
            seen[c] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return invalid("every channel must belong to an (x, y) pair");
    }
    let n = seq.n_steps() as f64;
    Ok(channel_pairs
        .iter()
        .map(|&(x, y)| {
            let mean_sq = (0..seq.n_steps())
                .map(|j| seq.get(j, x).powi(2) + seq.get(j, y).powi(2))
                .sum::<f64>()
                / n;
            mean_sq.sqrt() / (2.0 * std::f64::consts::PI)
        })
        .collect())
}

/// Spectral power above `cutoff_hz` over total non-DC power, summed over channels.
pub fn high_frequency_fraction(seq: &ControlSequence, cutoff_hz: f64) -> Result<f64> {
    check_cutoff(cutoff_hz, seq.dt())?;
    let n = seq.n_steps();
    let (mut above, mut total) = (0.0, 0.0);
    for k in 0..seq.n_channels() {
        for (bin, z) in channel_spectrum(&seq.channel(k)).iter().enumerate().skip(1) {
            let p = z.norm_sqr();
            total += p;
            if bin_frequency(bin, n, seq.dt()) > cutoff_hz {
                above += p;
            }
        }
    }
    if total <= 0.0 {
        return Ok(0.0);
    }
    Ok(above / total)
}
