// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Configuration and run orchestration behind the `nmr-krotov` binary.

pub mod config;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, Method, RunConfig};
pub use run::{compare, optimize, profile, score, simulate, CliError};
