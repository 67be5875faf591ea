// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Plain-text pulse tables.
//!
//! Cartesian layout, one row per step:
//!
//! ```text
//! index,t_start_s,dt_s,I_x_hz,I_y_hz
//! 0,0.0000000000000000e0,6.2500000000000000e-5,1.2e1,...
//! ```
//!
//! Amplitudes are stored in Hz (`w / 2 pi`) with 17 significant digits. The
//! amplitude/phase layout replaces each `<name>_x`, `<name>_y` channel pair by
//! `<name>_amp_hz,<name>_phase_rad`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::propagation::ControlSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableLayout {
    #[default]
    Cartesian,
    AmplitudePhase,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `(name, x index, y index)` for channels labelled `<name>_x`, `<name>_y`.
fn quadrature_pairs(labels: &[String]) -> Result<Vec<(String, usize, usize)>> {
    if labels.len() % 2 != 0 {
        return invalid("amplitude/phase layout needs x/y channel pairs");
    }
    labels
        .chunks(2)
        .enumerate()
        .map(|(p, pair)| {
            match (pair[0].strip_suffix("_x"), pair[1].strip_suffix("_y")) {
                (Some(a), Some(b)) if a == b => Ok((a.to_string(), 2 * p, 2 * p + 1)),
                _ => invalid(format!("channels {} and {} are not an x/y pair", pair[0], pair[1])),
            }
        })
        .collect()
}

pub fn format_pulse_table(seq: &ControlSequence, layout: TableLayout) -> Result<String> {
    if seq.n_steps() == 0 {
        return invalid("refusing to write an empty pulse table");
    }
    let mut out = String::from("index,t_start_s,dt_s");
    let pairs = match layout {
        TableLayout::Cartesian => {
            for l in seq.labels() {
                write!(out, ",{l}_hz").unwrap();
            }
            vec![]
        }
        TableLayout::AmplitudePhase => {
            let pairs = quadrature_pairs(seq.labels())?;
            for (name, _, _) in &pairs {
                write!(out, ",{name}_amp_hz,{name}_phase_rad").unwrap();
            }
            pairs
        }
    };
    out.push('\n');
    let dt = seq.dt();
    for j in 0..seq.n_steps() {
        write!(out, "{j},{},{}", num(j as f64 * dt), num(dt)).unwrap();
        let row = seq.step(j);
        match layout {
            TableLayout::Cartesian => {
                for w in row {
                    write!(out, ",{}", num(w / (2.0 * PI))).unwrap();
                }
            }
            TableLayout::AmplitudePhase => {
                for (_, x, y) in &pairs {
                    let amp = row[*x].hypot(row[*y]) / (2.0 * PI);
                    write!(out, ",{},{}", num(amp), num(row[*y].atan2(row[*x]))).unwrap();
                }
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn export_pulse_table(seq: &ControlSequence, path: &Path, layout: TableLayout) -> Result<()> {
    let text = format_pulse_table(seq, layout)?;
    fs::write(path, text)?;
    Ok(())
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

/// Parse either layout; amplitudes are returned in rad/s.
pub fn parse_pulse_table(text: &str) -> Result<ControlSequence> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let Some((_, header)) = lines.next() else {
        return parse_err(1, "empty file");
    };
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 4 || columns[..3] != ["index", "t_start_s", "dt_s"] {
        return parse_err(1, "header must start with index,t_start_s,dt_s and name at least one channel");
    }
    let data_cols = &columns[3..];
    let polar = data_cols.iter().any(|c| c.ends_with("_amp_hz"));
    let labels: Vec<String> = if polar {
        if data_cols.len() % 2 != 0 {
            return parse_err(1, "amplitude/phase columns must come in pairs");
        }
        let mut labels = vec![];
        for pair in data_cols.chunks(2) {
            match (pair[0].strip_suffix("_amp_hz"), pair[1].strip_suffix("_phase_rad")) {
                (Some(a), Some(b)) if a == b => {
                    labels.push(format!("{a}_x"));
                    labels.push(format!("{a}_y"));
                }
                _ => return parse_err(1, format!("unexpected columns {},{}", pair[0], pair[1])),
            }
        }
        labels
    } else {
        let mut labels = vec![];
        for c in data_cols {
            match c.strip_suffix("_hz") {
                Some(l) if !l.is_empty() => labels.push(l.to_string()),
                _ => return parse_err(1, format!("column '{c}' does not end in _hz")),
            }
        }
        labels
    };

    let mut dt: Option<f64> = None;
    let mut amps = Vec::new();
    let mut expected_index = 0usize;
    for (line, row) in lines {
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return parse_err(line, format!("expected {} fields, found {}", columns.len(), fields.len()));
        }
        let value = |i: usize| -> Result<f64> {
            match fields[i].parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => parse_err(line, format!("bad number '{}' in column {}", fields[i], columns[i])),
            }
        };
        match fields[0].parse::<usize>() {
            Ok(i) if i == expected_index => {}
            _ => return parse_err(line, format!("expected index {expected_index}, found '{}'", fields[0])),
        }
        let row_dt = value(2)?;
        match dt {
            None if row_dt > 0.0 => dt = Some(row_dt),
            None => return parse_err(line, "dt_s must be positive"),
            Some(d) if (row_dt - d).abs() > 1e-12 * d => {
                return parse_err(line, "time steps must be uniform");
            }
            Some(_) => {}
        }
        let t = value(1)?;
        let d = dt.expect("set above");
        if (t - expected_index as f64 * d).abs() > 1e-9 * d.max(t.abs()) {
            return parse_err(line, format!("t_start_s {t} does not match index * dt_s"));
        }
        if polar {
            for p in 0..data_cols.len() / 2 {
                let amp = value(3 + 2 * p)? * 2.0 * PI;
                let phase = value(4 + 2 * p)?;
                amps.push(amp * phase.cos());
                amps.push(amp * phase.sin());
            }
        } else {
            for k in 0..data_cols.len() {
                amps.push(value(3 + k)? * 2.0 * PI);
            }
        }
        expected_index += 1;
    }
    let Some(dt) = dt else {
        return parse_err(2, "pulse table has no rows");
    };
    ControlSequence::from_rows(dt, labels, amps)
}

pub fn read_pulse_table(path: &Path) -> Result<ControlSequence> {
    parse_pulse_table(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels() -> Vec<String> {
        ["I_x", "I_y", "S_x", "S_y"].iter().map(|s| s.to_string()).collect()
    }

    fn random_seq(seed: u64) -> ControlSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..40).map(|_| rng.random_range(-5000.0..5000.0)).collect();
        ControlSequence::from_rows(7.142857142857143e-3 / 10.0, labels(), amps).unwrap()
    }

    #[test]
    fn cartesian_roundtrip() {
        let seq = random_seq(1);
        let text = format_pulse_table(&seq, TableLayout::Cartesian).unwrap();
        assert!(text.starts_with("index,t_start_s,dt_s,I_x_hz,I_y_hz,S_x_hz,S_y_hz\n"));
        assert!(text.ends_with('\n'));
        let back = parse_pulse_table(&text).unwrap();
        assert_eq!(back.labels(), seq.labels());
        assert_eq!(back.dt(), seq.dt());
        for (a, b) in back.as_slice().iter().zip(seq.as_slice()) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
        }
        // The decimal representation is a fixed point of write/read.
        assert_eq!(format_pulse_table(&back, TableLayout::Cartesian).unwrap(), text);
    }

    #[test]
    fn amplitude_phase_layout() {
        let seq = random_seq(2);
        let text = format_pulse_table(&seq, TableLayout::AmplitudePhase).unwrap();
        assert!(text.starts_with("index,t_start_s,dt_s,I_amp_hz,I_phase_rad,S_amp_hz,S_phase_rad\n"));
        let row: Vec<f64> = text.lines().nth(3).unwrap().split(',').skip(3).map(|v| v.parse().unwrap()).collect();
        let (x, y) = (seq.get(2, 2), seq.get(2, 3));
        assert!((row[2] - x.hypot(y) / (2.0 * PI)).abs() < 1e-12 * row[2]);
        assert!((row[3] - y.atan2(x)).abs() < 1e-15);
        let back = parse_pulse_table(&text).unwrap();
        for (a, b) in back.as_slice().iter().zip(seq.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn unpaired_channels_have_no_polar_form() {
        let seq = ControlSequence::from_rows(1e-3, vec!["a".into()], vec![1.0]).unwrap();
        assert!(format_pulse_table(&seq, TableLayout::AmplitudePhase).is_err());
    }

    #[test]
    fn empty_sequence_cannot_exist() {
        assert!(ControlSequence::from_rows(1e-3, labels(), vec![]).is_err());
        assert!(ControlSequence::zeros(0, 1e-3, labels()).is_err());
    }

    fn parse_line(text: &str) -> usize {
        match parse_pulse_table(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let good = format_pulse_table(&random_seq(3), TableLayout::Cartesian).unwrap();
        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines[3] = lines[3].replacen(",", ",x", 3);
        assert_eq!(parse_line(&lines.join("\n")), 4);

        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines[5].push_str(",1.0");
        assert_eq!(parse_line(&lines.join("\n")), 6);

        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines.remove(2);
        assert_eq!(parse_line(&lines.join("\n")), 3);

        assert_eq!(parse_line("index,t_start_s,dt_s,I_x_hz\n"), 2);
        assert_eq!(parse_line("time,x\n0,1\n"), 1);
        assert_eq!(parse_line(""), 1);
    }

    #[test]
    fn file_roundtrip() {
        let dir = std::env::temp_dir().join(format!("pulse-table-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("seq.csv");
        let seq = random_seq(4);
        export_pulse_table(&seq, &path, TableLayout::Cartesian).unwrap();
        let back = read_pulse_table(&path).unwrap();
        assert_eq!(back.n_steps(), 10);
        assert!(matches!(read_pulse_table(&dir.join("missing.csv")), Err(Error::Io(_))));
        fs::remove_dir_all(&dir).unwrap();
    }
}
