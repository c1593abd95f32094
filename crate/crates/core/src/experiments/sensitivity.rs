// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! AC field sensitivity: accumulated phase, slope of the echo response,
//! minimum detectable field and a Monte-Carlo check of `δB(T) = η/√T`.
//!
//! Quantities are SI throughout (`F` as a fraction, fields in T). Use the
//! `*_percent_per_ut` and `*_ut` accessors for display units.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::photophysics::{add_readout_noise, ReadoutModel};
use crate::sequence::{Mode, ReadoutPhase};

/// Echo phase `φ = γ·b/(π·ν)` picked up from a synchronized sinusoid of
/// amplitude `b` (T) and frequency `nu` (Hz); `gamma` in rad s⁻¹ T⁻¹.
pub fn accumulated_phase(b: f64, nu: f64, gamma: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(invalid("nu", "AC frequency must be positive"));
    }
    Ok(gamma * b / (PI * nu))
}

/// The ideal echo response `F_x = A·cos(2φ)` or `F_y = A·sin(2φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoResponse {
    pub amplitude: f64,
    pub nu: f64,
    pub gamma: f64,
    pub readout: ReadoutPhase,
}

impl EchoResponse {
    /// `dφ/db`, rad per T.
    pub fn phase_per_tesla(&self) -> f64 {
        self.gamma / (PI * self.nu)
    }

    /// Shape `g(b)` with `F = A·g(b)`.
    pub fn shape(&self, b: f64) -> f64 {
        let two_phi = 2.0 * self.phase_per_tesla() * b;
        match self.readout {
            ReadoutPhase::PlusMinusX => two_phi.cos(),
            ReadoutPhase::PlusMinusY | ReadoutPhase::CommonPlusY => two_phi.sin(),
        }
    }

    pub fn eval(&self, b: f64) -> f64 {
        self.amplitude * self.shape(b)
    }

    /// Field of maximum slope: `0` for sine readouts, `π²ν/(4γ)` for `±x`.
    pub fn slope_point(&self) -> f64 {
        match self.readout {
            ReadoutPhase::PlusMinusX => PI * PI * self.nu / (4.0 * self.gamma),
            ReadoutPhase::PlusMinusY | ReadoutPhase::CommonPlusY => 0.0,
        }
    }

    /// Inverts the response near the slope point.
    pub fn invert(&self, f: f64) -> f64 {
        let r = (f / self.amplitude).clamp(-1.0, 1.0);
        let two_phi = match self.readout {
            ReadoutPhase::PlusMinusX => r.acos(),
            ReadoutPhase::PlusMinusY | ReadoutPhase::CommonPlusY => r.asin(),
        };
        two_phi / (2.0 * self.phase_per_tesla())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    /// Maximum response slope `δF = 2Aγ/(πν)` per T.
    pub delta_f: f64,
    /// `σ_F` for 1 s of integration.
    pub sigma_f_1s: f64,
    /// `η = σ_F(1)/δF` in T/√Hz.
    pub eta: f64,
    /// Field at which the slope is evaluated.
    pub slope_point: f64,
    pub mode: Mode,
    pub readout: ReadoutPhase,
}

impl SensitivityReport {
    pub fn delta_f_percent_per_ut(&self) -> f64 {
        self.delta_f * 100.0 * 1e-6
    }

    pub fn sigma_f_percent(&self) -> f64 {
        self.sigma_f_1s * 100.0
    }

    pub fn eta_ut(&self) -> f64 {
        self.eta * 1e6
    }
}

impl std::fmt::Display for SensitivityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "mode={} readout={} delta_F={:.4} %/uT sigma_F(1)={:.4} %/sqrt(Hz) eta={:.4} uT/sqrt(Hz) slope_point={:.4} uT",
            self.mode.name(),
            self.readout.name(),
            self.delta_f_percent_per_ut(),
            self.sigma_f_percent(),
            self.eta_ut(),
            self.slope_point * 1e6
        )
    }
}

/// Sensitivity of an echo response of amplitude `a`.
pub fn sensitivity(
    a: f64,
    sigma_f_1s: f64,
    nu: f64,
    gamma: f64,
    mode: Mode,
    readout: ReadoutPhase,
) -> Result<SensitivityReport> {
    if !(a > 0.0) {
        return Err(invalid("A", "response amplitude must be positive"));
    }
    if !(sigma_f_1s >= 0.0) {
        return Err(invalid("sigma_f_1s", "must be non-negative"));
    }
    let response = EchoResponse {
        amplitude: a,
        nu,
        gamma,
        readout,
    };
    let delta_f = 2.0 * a * gamma / (PI * nu);
    if !(delta_f > 0.0) || !delta_f.is_finite() {
        return Err(invalid("nu", "AC frequency must be positive"));
    }
    Ok(SensitivityReport {
        delta_f,
        sigma_f_1s,
        eta: sigma_f_1s / delta_f,
        slope_point: response.slope_point(),
        mode,
        readout,
    })
}

/// `δB(T) = η/√T` for each integration time.
pub fn min_detectable_field(eta: f64, times: &[f64]) -> Result<Vec<f64>> {
    if !(eta >= 0.0) {
        return Err(invalid("eta", "must be non-negative"));
    }
    times
        .iter()
        .map(|&t| {
            if t > 0.0 {
                Ok(eta / t.sqrt())
            } else {
                Err(invalid("T", "integration time must be positive"))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEstimate {
    pub mean: f64,
    pub std: f64,
    pub samples: usize,
}

/// Repeats a noisy measurement of `f_noiseless` (the response at the slope
/// point) `samples` times and returns the spread of the inverted field.
pub fn monte_carlo_field_estimate(
    f_noiseless: f64,
    response: &EchoResponse,
    readout: &ReadoutModel,
    integration_time: f64,
    samples: usize,
    seed: u64,
) -> Result<FieldEstimate> {
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 Monte-Carlo samples"));
    }
    if !(response.amplitude > 0.0) {
        return Err(invalid("A", "response amplitude must be positive"));
    }
    let noisy = add_readout_noise(&vec![f_noiseless; samples], readout, integration_time, seed)?;
    let b: Vec<f64> = noisy.iter().map(|&f| response.invert(f)).collect();
    let n = b.len() as f64;
    let mean = b.iter().sum::<f64>() / n;
    let var = b.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(FieldEstimate {
        mean,
        std: var.sqrt(),
        samples,
    })
}

/// Least-squares fit of `y = c·xᵖ` in log-log space; returns `(c, p)`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DegenerateTrace(
            "need at least two matching points".into(),
        ));
    }
    if !x.iter().chain(y).all(|v| *v > 0.0) {
        return Err(Error::DegenerateTrace(
            "power-law fit needs positive data".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateTrace("all abscissae equal".into()));
    }
    let p = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / sxx;
    Ok(((my - p * mx).exp(), p))
}
