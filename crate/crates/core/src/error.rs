// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the simulation and analysis modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "level anti-crossing guard violated: γB0/2π = {larmor_hz:.6e} Hz must exceed 2·D/h = {line_hz:.6e} Hz (or B0 = 0)"
    )]
    LacGuard { larmor_hz: f64, line_hz: f64 },

    #[error("tone at {frequency_hz:.6e} Hz is not resonant with the {target} qubit (expected {expected_hz:.6e} Hz)")]
    OffResonantTone {
        frequency_hz: f64,
        expected_hz: f64,
        target: crate::model::Target,
    },

    #[error("time step {dt:.3e} s exceeds the stability limit {limit:.3e} s")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),

    #[error("empty input series")]
    EmptySeries,

    #[error("non-positive denominator: {0}")]
    NonPositiveDenominator(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    #[error("fit did not converge: {0}")]
    FitFailed(String),

    #[error("sequence text: {0}")]
    SequenceText(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
