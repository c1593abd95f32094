// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-ODMR simulation and analysis for spin-3/2 color centers operated as
//! two qubits ("duplex qubits") inside the quartet.
//!
//! The quartet basis order used everywhere in this crate is
//! `(|+3/2⟩, |+1/2⟩, |−1/2⟩, |−3/2⟩)`, so the `+` qubit `{|+3/2⟩, |+1/2⟩}` and
//! the `−` qubit `{|−1/2⟩, |−3/2⟩}` are the upper-left and lower-right 2×2
//! blocks of every 4×4 operator.
//!
//! Module map:
//!
//! - [`model`]: spin operators, physical parameters and the rotating-frame
//!   Hamiltonians.
//! - [`dynamics`]: density-matrix state, block (Pauli rotation) and numeric
//!   propagators, dephasing and quasi-static ensemble averaging.
//! - [`photophysics`]: optical initialization, fluorescence readout and
//!   readout noise.
//! - [`sequence`]: declarative pulse sequences (Rabi, spin echo), AC test
//!   fields and sequence execution.
//! - [`experiments`]: scans, curve fits, sensitivity analysis, CW spectra and
//!   CSV output.
//! - [`cli`]: configuration files and the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
mod error;
pub mod experiments;
pub mod model;
pub mod photophysics;
pub mod sequence;

pub use error::{Error, Result};

/// Complex scalar used for all state and operator entries.
pub type C64 = nalgebra::Complex<f64>;

/// 2π, spelled out because it shows up in every frequency conversion.
pub(crate) const TAU: f64 = std::f64::consts::TAU;
