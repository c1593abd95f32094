// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration in TOML.
//!
//! Physical quantities are either bare numbers in SI units or strings with a
//! unit suffix, e.g. `t2 = "2.1 us"`, `b0 = "46 mT"`, `rabi = "10 MHz"`.
//! Accepted suffixes: `ns`, `µs`/`us`, `ms`, `s`; `Hz`, `kHz`, `MHz`, `GHz`;
//! `T`, `mT`, `µT`/`uT`, `nT`. Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//! engine = "block"
//! mode = "duplex"
//! readout = "y"
//!
//! [params]
//! b0 = "46 mT"
//! t2 = "2.1 us"
//!
//! [scan]
//! tau = { start = "0.1 us", stop = "3 us", points = 30 }
//! ```

use std::path::PathBuf;

use serde::Deserialize;

use crate::dynamics::Detuning;
use crate::error::{Error, Result};
use crate::model::QuartetParams;
use crate::sequence::{Drive, Engine, Mode, Parity, ReadoutPhase, RunOptions};
use crate::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Time,
    Frequency,
    Field,
}

impl Dim {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dim::Time => &[
                ("ns", 1e-9),
                ("µs", 1e-6),
                ("us", 1e-6),
                ("ms", 1e-3),
                ("s", 1.0),
            ],
            Dim::Frequency => &[("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3), ("Hz", 1.0)],
            Dim::Field => &[
                ("nT", 1e-9),
                ("µT", 1e-6),
                ("uT", 1e-6),
                ("mT", 1e-3),
                ("T", 1.0),
            ],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dim::Time => "time",
            Dim::Frequency => "frequency",
            Dim::Field => "field",
        }
    }
}

/// Number in SI units or a string with a unit suffix.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Quantity {
    Number(f64),
    Text(String),
}

fn parse_quantity(text: &str, dim: Dim) -> std::result::Result<f64, String> {
    let s = text.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let mut units: Vec<_> = dim.units().to_vec();
    units.sort_by_key(|(u, _)| std::cmp::Reverse(u.len()));
    for (unit, scale) in units {
        if let Some(prefix) = s.strip_suffix(unit) {
            if let Ok(v) = prefix.trim().parse::<f64>() {
                return Ok(v * scale);
            }
        }
    }
    Err(format!(
        "`{text}` is not a {} (number or value with unit)",
        dim.name()
    ))
}

fn quantity(field: &str, q: &Option<Quantity>, dim: Dim, default: f64) -> Result<f64> {
    let v = match q {
        None => default,
        Some(Quantity::Number(v)) => *v,
        Some(Quantity::Text(t)) => parse_quantity(t, dim).map_err(|e| config_error(field, e))?,
    };
    if !v.is_finite() {
        return Err(config_error(field, "must be finite"));
    }
    Ok(v)
}

fn config_error(field: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{field}`: {reason}"))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    engine: Option<String>,
    dt: Option<Quantity>,
    mode: Option<String>,
    readout: Option<String>,
    parity: Option<String>,
    dephasing: Option<bool>,
    static_detuning: Option<Quantity>,
    ensemble_samples: Option<usize>,
    noise_time: Option<Quantity>,
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    drive: RawDrive,
    #[serde(default)]
    scan: RawScan,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    d_over_h: Option<Quantity>,
    /// γ/2π in Hz/T.
    gamma_over_2pi: Option<f64>,
    b0: Option<Quantity>,
    chi: Option<f64>,
    t2_star: Option<Quantity>,
    t2: Option<Quantity>,
    sigma_f_1s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    rabi: Option<Quantity>,
    rabi_plus: Option<Quantity>,
    rabi_minus: Option<Quantity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: Quantity,
    stop: Quantity,
    points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    axis: Option<String>,
    t_mw: Option<RawRange>,
    tau: Option<RawRange>,
    tau_prime: Option<RawRange>,
    b: Option<RawRange>,
    frequencies: Option<RawRange>,
    tau_fixed: Option<Quantity>,
    b_fixed: Option<Quantity>,
    linewidth: Option<Quantity>,
    drive_scale: Option<f64>,
    integration_times: Option<Vec<Quantity>>,
    mc_samples: Option<usize>,
}

/// Evenly spaced scan axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Range {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Self {
            start,
            stop,
            points,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.start + step * i as f64)
            .collect()
    }

    fn parse(field: &str, raw: &Option<RawRange>, dim: Dim, default: Range) -> Result<Range> {
        let Some(r) = raw else {
            return Ok(default);
        };
        let start = quantity(&format!("{field}.start"), &Some(r.start.clone()), dim, 0.0)?;
        let stop = quantity(&format!("{field}.stop"), &Some(r.stop.clone()), dim, 0.0)?;
        if r.points == 0 {
            return Err(config_error(
                &format!("{field}.points"),
                "must be at least 1",
            ));
        }
        if r.points > 1 && !(stop > start) {
            return Err(config_error(field, "stop must exceed start"));
        }
        Ok(Range::new(start, stop, r.points))
    }
}

/// Scan axis choice for subcommands with more than one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Echo: `τ′ = τ` sweep. AC magnetometry: `τ` sweep at fixed field.
    Tau,
    /// Echo: `τ′` sweep at fixed `τ`.
    TauPrime,
    /// AC magnetometry: field amplitude sweep at fixed `τ`.
    Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub axis: Option<Axis>,
    pub t_mw: Range,
    pub tau: Range,
    pub tau_prime: Range,
    pub b: Range,
    pub frequencies: Range,
    pub tau_fixed: f64,
    pub b_fixed: f64,
    pub linewidth: f64,
    pub drive_scale: f64,
    pub integration_times: Vec<f64>,
    pub mc_samples: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            axis: None,
            t_mw: Range::new(0.0, 1.0e-6, 201),
            tau: Range::new(0.1e-6, 3.0e-6, 30),
            tau_prime: Range::new(0.3e-6, 0.9e-6, 121),
            b: Range::new(-10e-6, 10e-6, 41),
            frequencies: Range::new(0.0, 1.5e9, 3001),
            tau_fixed: 0.6e-6,
            b_fixed: 3.0e-6,
            linewidth: 10e6,
            drive_scale: 1.0,
            integration_times: vec![1.0, 10.0, 100.0],
            mc_samples: 2000,
        }
    }
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: QuartetParams,
    pub drive: Drive,
    pub engine: Engine,
    pub mode: Mode,
    pub readout: ReadoutPhase,
    pub parity: Parity,
    pub dephasing: bool,
    /// Common static detuning in rad/s.
    pub static_detuning: f64,
    pub ensemble_samples: usize,
    pub seed: u64,
    /// Integration time per point for readout noise; `None` is noiseless.
    pub noise_time: Option<f64>,
    pub out: Option<PathBuf>,
    pub scan: ScanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: QuartetParams::default(),
            drive: Drive::default(),
            engine: Engine::Block,
            mode: Mode::Duplex,
            readout: ReadoutPhase::PlusMinusY,
            parity: Parity::Magnetic,
            dephasing: true,
            static_detuning: 0.0,
            ensemble_samples: 0,
            seed: 0,
            noise_time: None,
            out: None,
            scan: ScanConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            engine: self.engine,
            static_detuning: Detuning {
                common: self.static_detuning,
                parity: 0.0,
            },
            dephasing: self.dephasing,
            record_states: false,
        }
    }

    /// Enforces the parameter invariants and, for the block engine, the LAC
    /// guard.
    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                config_error(&format!("params.{name}"), reason)
            }
            other => Error::Config(other.to_string()),
        })?;
        if self.engine == Engine::Block {
            self.params
                .check_lac()
                .map_err(|e| config_error("params.b0", e))?;
        }
        if let Engine::Numeric { dt } = self.engine {
            if !(dt > 0.0) {
                return Err(config_error("dt", "time step must be positive"));
            }
        }
        for (name, w) in [
            ("drive.rabi", self.drive.omega1),
            ("drive.rabi_plus", self.drive.omega1_plus),
            ("drive.rabi_minus", self.drive.omega1_minus),
        ] {
            if !(w > 0.0) {
                return Err(config_error(name, "Rabi frequency must be positive"));
            }
        }
        if let Some(t) = self.noise_time {
            if !(t > 0.0) {
                return Err(config_error("noise_time", "must be positive"));
            }
        }
        let s = &self.scan;
        if !(s.tau_fixed > 0.0) {
            return Err(config_error("scan.tau_fixed", "must be positive"));
        }
        if !(s.b_fixed >= 0.0) {
            return Err(config_error("scan.b_fixed", "must be non-negative"));
        }
        if !(s.linewidth > 0.0) {
            return Err(config_error("scan.linewidth", "must be positive"));
        }
        if !(s.drive_scale >= 0.0) {
            return Err(config_error("scan.drive_scale", "must be non-negative"));
        }
        if s.integration_times.is_empty() || s.integration_times.iter().any(|t| !(*t > 0.0)) {
            return Err(config_error(
                "scan.integration_times",
                "need positive times",
            ));
        }
        if s.mc_samples < 2 {
            return Err(config_error("scan.mc_samples", "need at least 2 samples"));
        }
        for (name, r) in [
            ("scan.t_mw", s.t_mw),
            ("scan.tau", s.tau),
            ("scan.tau_prime", s.tau_prime),
        ] {
            if r.start < 0.0 {
                return Err(config_error(name, "durations must be non-negative"));
            }
        }
        Ok(())
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a configuration; missing keys take defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(text, s.start));
        Error::Config(format!("line {line}: {}", e.message().trim()))
    })?;
    let d = RunConfig::default();
    let dp = d.params;

    let params = QuartetParams {
        d_over_h: quantity(
            "params.d_over_h",
            &raw.params.d_over_h,
            Dim::Frequency,
            dp.d_over_h,
        )?,
        gamma: raw.params.gamma_over_2pi.map_or(dp.gamma, |g| TAU * g),
        b0: quantity("params.b0", &raw.params.b0, Dim::Field, dp.b0)?,
        chi: raw.params.chi.unwrap_or(dp.chi),
        t2_star: quantity("params.t2_star", &raw.params.t2_star, Dim::Time, dp.t2_star)?,
        t2: quantity("params.t2", &raw.params.t2, Dim::Time, dp.t2)?,
        sigma_f_1s: raw.params.sigma_f_1s.unwrap_or(dp.sigma_f_1s),
    };

    let rabi_hz = quantity(
        "drive.rabi",
        &raw.drive.rabi,
        Dim::Frequency,
        d.drive.omega1 / TAU,
    )?;
    let drive = Drive {
        omega1: TAU * rabi_hz,
        omega1_plus: TAU
            * quantity(
                "drive.rabi_plus",
                &raw.drive.rabi_plus,
                Dim::Frequency,
                rabi_hz,
            )?,
        omega1_minus: TAU
            * quantity(
                "drive.rabi_minus",
                &raw.drive.rabi_minus,
                Dim::Frequency,
                rabi_hz,
            )?,
    };

    let dt = quantity("dt", &raw.dt, Dim::Time, 0.1e-9)?;
    let engine = match raw.engine.as_deref() {
        None | Some("block") => Engine::Block,
        Some("numeric") => Engine::Numeric { dt },
        Some(other) => {
            return Err(config_error(
                "engine",
                format!("expected block or numeric, got `{other}`"),
            ))
        }
    };
    let mode = match &raw.mode {
        None => d.mode,
        Some(m) => m
            .parse()
            .map_err(|_| config_error("mode", format!("unknown mode `{m}`")))?,
    };
    let readout = match &raw.readout {
        None => d.readout,
        Some(r) => r
            .parse()
            .map_err(|_| config_error("readout", format!("unknown readout `{r}`")))?,
    };
    let parity = match raw.parity.as_deref() {
        None | Some("magnetic") => Parity::Magnetic,
        Some("even-order") => Parity::EvenOrder,
        Some(other) => {
            return Err(config_error(
                "parity",
                format!("expected magnetic or even-order, got `{other}`"),
            ))
        }
    };
    let noise_time = match &raw.noise_time {
        None => None,
        Some(q) => Some(quantity("noise_time", &Some(q.clone()), Dim::Time, 0.0)?),
    };

    let ds = ScanConfig::default();
    let rs = &raw.scan;
    let axis = match rs.axis.as_deref() {
        None => None,
        Some("tau") => Some(Axis::Tau),
        Some("tau_prime") => Some(Axis::TauPrime),
        Some("b") => Some(Axis::Field),
        Some(other) => {
            return Err(config_error(
                "scan.axis",
                format!("expected tau, tau_prime or b, got `{other}`"),
            ))
        }
    };
    let integration_times = match &rs.integration_times {
        None => ds.integration_times.clone(),
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, q)| {
                quantity(
                    &format!("scan.integration_times[{i}]"),
                    &Some(q.clone()),
                    Dim::Time,
                    0.0,
                )
            })
            .collect::<Result<_>>()?,
    };
    let scan = ScanConfig {
        axis,
        t_mw: Range::parse("scan.t_mw", &rs.t_mw, Dim::Time, ds.t_mw)?,
        tau: Range::parse("scan.tau", &rs.tau, Dim::Time, ds.tau)?,
        tau_prime: Range::parse("scan.tau_prime", &rs.tau_prime, Dim::Time, ds.tau_prime)?,
        b: Range::parse("scan.b", &rs.b, Dim::Field, ds.b)?,
        frequencies: Range::parse(
            "scan.frequencies",
            &rs.frequencies,
            Dim::Frequency,
            ds.frequencies,
        )?,
        tau_fixed: quantity("scan.tau_fixed", &rs.tau_fixed, Dim::Time, ds.tau_fixed)?,
        b_fixed: quantity("scan.b_fixed", &rs.b_fixed, Dim::Field, ds.b_fixed)?,
        linewidth: quantity(
            "scan.linewidth",
            &rs.linewidth,
            Dim::Frequency,
            ds.linewidth,
        )?,
        drive_scale: rs.drive_scale.unwrap_or(ds.drive_scale),
        integration_times,
        mc_samples: rs.mc_samples.unwrap_or(ds.mc_samples),
    };

    let config = RunConfig {
        params,
        drive,
        engine,
        mode,
        readout,
        parity,
        dephasing: raw.dephasing.unwrap_or(d.dephasing),
        static_detuning: TAU
            * quantity("static_detuning", &raw.static_detuning, Dim::Frequency, 0.0)?,
        ensemble_samples: raw.ensemble_samples.unwrap_or(d.ensemble_samples),
        seed: raw.seed.unwrap_or(d.seed),
        noise_time,
        out: raw.out,
        scan,
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_relative_eq!(c.params.d_over_h, 35e6);
        assert_relative_eq!(c.drive.omega1, TAU * 10e6);
        assert_relative_eq!(c.params.t2, 2.1e-6);
        assert_relative_eq!(c.params.chi, 0.014);
        assert_relative_eq!(c.params.sigma_f_1s, 0.0014);
        assert_relative_eq!(c.params.b0, 46e-3);
    }

    #[test]
    fn unit_suffixes() {
        let c = parse_config(
            r#"
            dt = "50 ps"
            "#,
        );
        assert!(c.is_err());
        let c = parse_config(
            r#"
            [params]
            t2 = "2.1 µs"
            t2_star = "150ns"
            b0 = "0.046 T"
            d_over_h = "0.035 GHz"
            [scan]
            b_fixed = "3 uT"
            tau_fixed = 6e-7
            linewidth = "5 MHz"
            integration_times = ["1 s", "10 s", 100]
            "#,
        )
        .unwrap();
        assert_relative_eq!(c.params.t2, 2.1e-6, max_relative = 1e-12);
        assert_relative_eq!(c.params.t2_star, 150e-9, max_relative = 1e-12);
        assert_relative_eq!(c.params.b0, 46e-3, max_relative = 1e-12);
        assert_relative_eq!(c.params.d_over_h, 35e6, max_relative = 1e-12);
        assert_relative_eq!(c.scan.b_fixed, 3e-6, max_relative = 1e-12);
        assert_relative_eq!(c.scan.tau_fixed, 6e-7);
        assert_eq!(c.scan.integration_times, vec![1.0, 10.0, 100.0]);
        assert_relative_eq!(
            parse_config("[params]\nt2 = 2.1e-6").unwrap().params.t2,
            2.1e-6
        );
        assert_relative_eq!(
            parse_config("[params]\nt2 = \"2.1 us\"").unwrap().params.t2,
            2.1e-6,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            parse_config("[params]\nt2 = \"2.1e-3 ms\"")
                .unwrap()
                .params
                .t2,
            2.1e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn lac_guard_only_for_block_engine() {
        let err = parse_config("[params]\nb0 = \"1 mT\"").unwrap_err();
        assert!(err.to_string().contains("params.b0"), "{err}");
        assert!(parse_config("engine = \"numeric\"\n[params]\nb0 = \"1 mT\"").is_ok());
        assert!(parse_config("[params]\nb0 = 0.0").is_ok());
    }

    #[test]
    fn syntax_errors_report_line() {
        let err = parse_config("seed = 1\nmode = \"duplex\"\nbogus = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
        let err = parse_config("seed = 1\n\n[params\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn validation_names_the_field() {
        let err = parse_config("[params]\nt2 = \"0.1 us\"").unwrap_err();
        assert!(err.to_string().contains("params.t2"), "{err}");
        let err = parse_config("[params]\nt2 = \"2 parsecs\"").unwrap_err();
        assert!(err.to_string().contains("params.t2"), "{err}");
        let err = parse_config("mode = \"triplex\"").unwrap_err();
        assert!(err.to_string().contains("mode"), "{err}");
        let err = parse_config("[scan]\ntau = { start = \"1 us\", stop = \"0.5 us\", points = 3 }")
            .unwrap_err();
        assert!(err.to_string().contains("scan.tau"), "{err}");
    }

    #[test]
    fn ranges() {
        let c =
            parse_config("[scan]\nb = { start = \"-2 uT\", stop = \"2 uT\", points = 5 }").unwrap();
        let v = c.scan.b.values();
        assert_eq!(v.len(), 5);
        assert_relative_eq!(v[0], -2e-6);
        assert_relative_eq!(v[4], 2e-6, max_relative = 1e-12);
    }
}
