// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;

use super::fit::{fit_echo_envelope, fit_linear_amplitude, fit_rabi, FitParam, FitReport};
use super::sensitivity::EchoResponse;
use super::{format_float, Fit, ScanResult};
use crate::dynamics::ensemble_average;
use crate::error::{invalid, Result};
use crate::model::QuartetParams;
use crate::photophysics::{self, add_readout_noise, ReadoutModel};
use crate::sequence::{
    build_rabi_sequence, run_sequence, synchronized_ac_frequency, AcField, Drive, Engine, Mode,
    Parity, ReadoutPhase, RunOptions,
};

/// Shared settings of every scan.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanSetup {
    pub params: QuartetParams,
    pub drive: Drive,
    pub options: RunOptions,
    /// Size of the quasi-static detuning ensemble (Gaussian, `σ = √2/T2*`).
    /// Values `≤ 1` disable it.
    pub ensemble_samples: usize,
    pub seed: u64,
    /// Integration time per point for readout noise; `None` is noiseless.
    pub noise_time: Option<f64>,
}

impl ScanSetup {
    fn metadata(&self, result: &mut ScanResult) {
        let p = &self.params;
        result.meta("params.d_over_h_hz", format_float(p.d_over_h));
        result.meta("params.gamma_rad_per_s_t", format_float(p.gamma));
        result.meta("params.b0_t", format_float(p.b0));
        result.meta("params.chi", format_float(p.chi));
        result.meta("params.t2_star_s", format_float(p.t2_star));
        result.meta("params.t2_s", format_float(p.t2));
        result.meta("params.sigma_f_1s", format_float(p.sigma_f_1s));
        result.meta("drive.omega1_rad_per_s", format_float(self.drive.omega1));
        result.meta(
            "drive.omega1_plus_rad_per_s",
            format_float(self.drive.omega1_plus),
        );
        result.meta(
            "drive.omega1_minus_rad_per_s",
            format_float(self.drive.omega1_minus),
        );
        let engine = match self.options.engine {
            Engine::Block => "block".to_string(),
            Engine::Numeric { dt } => format!("numeric dt={}", format_float(dt)),
        };
        result.meta("run.engine", engine);
        result.meta("run.dephasing", self.options.dephasing);
        result.meta(
            "run.static_common_rad_per_s",
            format_float(self.options.static_detuning.common),
        );
        result.meta(
            "run.static_parity_rad_per_s",
            format_float(self.options.static_detuning.parity),
        );
        result.meta("ensemble.samples", self.ensemble_samples);
        result.meta("seed", self.seed);
        result.meta(
            "noise.integration_time_s",
            self.noise_time.map_or("none".to_string(), format_float),
        );
    }

    /// Runs `eval` once, or averaged over the detuning ensemble.
    fn averaged<F>(&self, eval: F) -> Result<Vec<f64>>
    where
        F: Fn(&RunOptions) -> Result<Vec<f64>> + Sync,
    {
        if self.ensemble_samples <= 1 {
            return eval(&self.options);
        }
        let sigma = std::f64::consts::SQRT_2 / self.params.t2_star;
        ensemble_average(
            |delta| {
                let mut o = self.options;
                o.static_detuning.common += delta;
                eval(&o)
            },
            sigma,
            self.ensemble_samples,
            self.seed,
        )
    }

    fn noisy(&self, values: Vec<f64>, column: usize) -> Result<Vec<f64>> {
        match self.noise_time {
            None => Ok(values),
            Some(t) => add_readout_noise(
                &values,
                &ReadoutModel::from(&self.params),
                t,
                self.seed.wrapping_add(1 + column as u64),
            ),
        }
    }
}

fn check_axis(name: &'static str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(invalid(name, "scan range is empty"));
    }
    if !axis.iter().all(|v| v.is_finite()) {
        return Err(invalid(name, "scan range must be finite"));
    }
    Ok(())
}

/// Evaluates `point(mode, x)` for every mode and axis value in parallel,
/// returning `[mode][x][k]` flattened.
fn grid<const K: usize, F>(axis: &[f64], point: F) -> Result<Vec<f64>>
where
    F: Fn(Mode, f64) -> Result<[f64; K]> + Sync,
{
    let n = axis.len();
    let values: Vec<[f64; K]> = (0..Mode::ALL.len() * n)
        .into_par_iter()
        .map(|i| point(Mode::ALL[i / n], axis[i % n]))
        .collect::<Result<_>>()?;
    Ok(values.into_iter().flatten().collect())
}

/// Rabi contrast `C(t) = (I − Ī)/Ī` over MW durations for all three modes,
/// each fitted with the damped cosine.
pub fn rabi_scan(t_mw: &[f64], fit_mode: Mode, setup: &ScanSetup) -> Result<ScanResult> {
    check_axis("t_mw", t_mw)?;
    let n = t_mw.len();
    let intensities = setup.averaged(|opts| {
        grid(t_mw, |mode, t| {
            let seq = build_rabi_sequence(t, mode, &setup.params, &setup.drive)?;
            Ok([run_sequence(&seq, None, &setup.params, opts)?.intensity])
        })
    })?;
    let mut result = ScanResult::new("t_mw_s", t_mw.to_vec());
    for (k, mode) in Mode::ALL.iter().enumerate() {
        let contrast = photophysics::contrast_trace(&intensities[k * n..(k + 1) * n])?;
        let contrast = setup.noisy(contrast, k)?;
        let fit = fit_rabi(t_mw, &contrast)?;
        let curve = t_mw.iter().map(|&t| fit.eval(t)).collect();
        result.push_signal(
            mode.name(),
            contrast,
            Some(Fit {
                report: fit.report(),
                curve,
            }),
        );
    }
    result.fitted = Some(fit_mode.name().to_string());
    result.meta("scan", "rabi");
    result.meta("fit_mode", fit_mode.name());
    setup.metadata(&mut result);
    Ok(result)
}

fn echo_point(
    tau_prime: f64,
    tau: f64,
    mode: Mode,
    readout: ReadoutPhase,
    field: Option<&AcField>,
    setup: &ScanSetup,
    opts: &RunOptions,
) -> Result<[f64; 2]> {
    let s = crate::sequence::echo_signal(
        tau_prime,
        tau,
        mode,
        readout,
        &setup.params,
        &setup.drive,
        field,
        opts,
    )?;
    Ok([s.i_a, s.i_b])
}

fn complementary_columns(pairs: &[f64], n: usize, setup: &ScanSetup) -> Result<Vec<Vec<f64>>> {
    (0..Mode::ALL.len())
        .map(|k| {
            let f = pairs[2 * k * n..2 * (k + 1) * n]
                .chunks(2)
                .map(|p| photophysics::complementary_signal(p[0], p[1]))
                .collect::<Result<Vec<_>>>()?;
            setup.noisy(f, k)
        })
        .collect()
}

/// Echo signal `F(τ)` at `τ′ = τ` with `±x` readout and no AC field, fitted
/// with `A·e^(−2τ/T2)` for every mode.
pub fn echo_envelope_scan(tau: &[f64], fit_mode: Mode, setup: &ScanSetup) -> Result<ScanResult> {
    check_axis("tau", tau)?;
    let longest = tau.iter().fold(0.0f64, |m, &v| m.max(v));
    if longest < 0.75 * setup.params.t2 {
        return Err(invalid(
            "tau",
            format!(
                "range must reach 0.75·T2 = {:.3e} s, got {longest:.3e} s",
                0.75 * setup.params.t2
            ),
        ));
    }
    let n = tau.len();
    let pairs = setup.averaged(|opts| {
        grid(tau, |mode, t| {
            echo_point(t, t, mode, ReadoutPhase::PlusMinusX, None, setup, opts)
        })
    })?;
    let columns = complementary_columns(&pairs, n, setup)?;
    let mut result = ScanResult::new("tau_s", tau.to_vec());
    for (mode, f) in Mode::ALL.iter().zip(columns) {
        let fit = fit_echo_envelope(tau, &f)?;
        let curve = tau.iter().map(|&t| fit.eval(t)).collect();
        result.push_signal(
            mode.name(),
            f,
            Some(Fit {
                report: fit.report(),
                curve,
            }),
        );
    }
    result.fitted = Some(fit_mode.name().to_string());
    result.meta("scan", "echo-envelope");
    result.meta("readout", ReadoutPhase::PlusMinusX.name());
    result.meta("fit_mode", fit_mode.name());
    setup.metadata(&mut result);
    Ok(result)
}

/// Echo signal `F(τ′)` around the refocusing point at fixed `τ` with `±x`
/// readout; with a detuning ensemble the peak width reflects `T2*`.
pub fn echo_peak_scan(
    tau_prime: &[f64],
    tau: f64,
    fit_mode: Mode,
    setup: &ScanSetup,
) -> Result<ScanResult> {
    check_axis("tau_prime", tau_prime)?;
    if !(tau >= 0.0) {
        return Err(invalid("tau", "must be non-negative"));
    }
    let n = tau_prime.len();
    let pairs = setup.averaged(|opts| {
        grid(tau_prime, |mode, tp| {
            echo_point(tp, tau, mode, ReadoutPhase::PlusMinusX, None, setup, opts)
        })
    })?;
    let columns = complementary_columns(&pairs, n, setup)?;
    let mut result = ScanResult::new("tau_prime_s", tau_prime.to_vec());
    for (mode, f) in Mode::ALL.iter().zip(columns) {
        result.push_signal(mode.name(), f, None);
    }
    result.meta("scan", "echo-peak");
    result.meta("readout", ReadoutPhase::PlusMinusX.name());
    result.meta("tau_s", format_float(tau));
    result.meta("fit_mode", fit_mode.name());
    setup.metadata(&mut result);
    Ok(result)
}

/// Echo response `F(b)` to a synchronized AC signal at `τ′ = τ`, fitted with
/// `A·cos(2φ)` (`±x`) or `A·sin(2φ)` (sine readouts), `φ = γb/(πν)`.
pub fn ac_response_amplitude_scan(
    b: &[f64],
    tau: f64,
    readout: ReadoutPhase,
    parity: Parity,
    fit_mode: Mode,
    setup: &ScanSetup,
) -> Result<ScanResult> {
    check_axis("b", b)?;
    let t_pi = setup.drive.pi_duration()?;
    let nu = synchronized_ac_frequency(tau, t_pi)?;
    let n = b.len();
    let pairs = setup.averaged(|opts| {
        grid(b, |mode, amp| {
            let field = AcField {
                amplitude: amp.abs(),
                frequency: nu,
                phase: if amp < 0.0 { std::f64::consts::PI } else { 0.0 },
                parity,
            };
            echo_point(tau, tau, mode, readout, Some(&field), setup, opts)
        })
    })?;
    let columns = complementary_columns(&pairs, n, setup)?;
    let shape_model = EchoResponse {
        amplitude: 1.0,
        nu,
        gamma: setup.params.gamma,
        readout,
    };
    let shape: Vec<f64> = b.iter().map(|&v| shape_model.shape(v)).collect();
    let mut result = ScanResult::new("b_t", b.to_vec());
    for (mode, f) in Mode::ALL.iter().zip(columns) {
        let fit = fit_linear_amplitude(&shape, &f)?;
        let curve = shape.iter().map(|g| fit.amplitude * g).collect();
        let report = FitReport {
            model: match readout {
                ReadoutPhase::PlusMinusX => "A*cos(2*gamma*b/(pi*nu))".into(),
                _ => "A*sin(2*gamma*b/(pi*nu))".into(),
            },
            params: vec![FitParam {
                name: "A".into(),
                value: fit.amplitude,
                stderr: fit.amplitude_err,
            }],
            rss: fit.rss,
            dof: n.saturating_sub(1),
        };
        result.push_signal(mode.name(), f, Some(Fit { report, curve }));
    }
    result.fitted = Some(fit_mode.name().to_string());
    result.meta("scan", "ac-amplitude");
    result.meta("readout", readout.name());
    result.meta("parity", format!("{parity:?}"));
    result.meta("tau_s", format_float(tau));
    result.meta("nu_hz", format_float(nu));
    result.meta("fit_mode", fit_mode.name());
    setup.metadata(&mut result);
    Ok(result)
}

/// Echo response `F(τ)` at `τ′ = τ` to an AC signal of fixed amplitude whose
/// frequency is synchronized to `nominal_tau`. A `baseline` column holds the
/// `b = 0` signal of `fit_mode`.
pub fn ac_response_tau_scan(
    tau: &[f64],
    b: f64,
    nominal_tau: f64,
    readout: ReadoutPhase,
    fit_mode: Mode,
    setup: &ScanSetup,
) -> Result<ScanResult> {
    check_axis("tau", tau)?;
    let t_pi = setup.drive.pi_duration()?;
    let nu = synchronized_ac_frequency(nominal_tau, t_pi)?;
    let field = AcField::magnetic(b, nu);
    let n = tau.len();
    let pairs = setup.averaged(|opts| {
        grid(tau, |mode, t| {
            echo_point(t, t, mode, readout, Some(&field), setup, opts)
        })
    })?;
    let columns = complementary_columns(&pairs, n, setup)?;
    let baseline = setup.averaged(|opts| {
        let v: Vec<[f64; 2]> = tau
            .par_iter()
            .map(|&t| echo_point(t, t, fit_mode, readout, None, setup, opts))
            .collect::<Result<_>>()?;
        Ok(v.into_iter().flatten().collect())
    })?;
    let baseline = baseline
        .chunks(2)
        .map(|p| photophysics::complementary_signal(p[0], p[1]))
        .collect::<Result<Vec<_>>>()?;
    let mut result = ScanResult::new("tau_s", tau.to_vec());
    for (mode, f) in Mode::ALL.iter().zip(columns) {
        result.push_signal(mode.name(), f, None);
    }
    result.push_signal("baseline", baseline, None);
    result.meta("scan", "ac-tau");
    result.meta("readout", readout.name());
    result.meta("b_t", format_float(b));
    result.meta("nominal_tau_s", format_float(nominal_tau));
    result.meta("nu_hz", format_float(nu));
    result.meta("fit_mode", fit_mode.name());
    setup.metadata(&mut result);
    Ok(result)
}
