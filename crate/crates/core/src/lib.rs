// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Optimal control of NMR pulse sequences with a monotonically convergent
//! Krotov-type method, a GRAPE baseline, and frequency-truncation smoothing.

pub mod error;
pub mod experiments;
pub mod grape;
pub mod inner;
pub mod krotov;
pub mod linalg;
pub mod propagation;
pub mod pulse_table;
pub mod smoothing;
pub mod spinops;

pub use error::{Error, Result};
pub use krotov::{krotov_optimize, Condition, ConditionSet, KrotovConfig, OptimizationResult};
pub use linalg::CMatrix;
pub use propagation::{ControlSequence, Objective, PenaltySpec};
pub use spinops::SpinSystem;
