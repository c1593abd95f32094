// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Each subcommand runs one experiment, writes a CSV file and prints the
//! fitted parameters. `--recipe NAME` replaces the config file with a named
//! built-in configuration and prints it first.

mod config;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{parse_config, Axis, Range, RunConfig, ScanConfig};

use crate::error::{Error, Result};
use crate::experiments::{
    self, ac_response_amplitude_scan, ac_response_tau_scan, cw_spectrum, echo_envelope_scan,
    echo_peak_scan, format_float, min_detectable_field, monte_carlo_field_estimate, rabi_scan,
    sensitivity, EchoResponse, ScanResult, ScanSetup, SensitivityReport,
};
use crate::photophysics::ReadoutModel;
use crate::sequence::{
    echo_signal, synchronized_ac_frequency, AcField, Engine, Mode, ReadoutPhase,
};

#[derive(Debug, Parser)]
#[command(
    name = "duplex-odmr",
    version,
    about = "Pulse-ODMR simulator for spin-3/2 duplex qubits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output CSV path (default `<subcommand>.csv`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub engine: Option<EngineArg>,
    /// simplex+, simplex- or duplex.
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    /// x, y or commony.
    #[arg(long, global = true)]
    pub readout: Option<ReadoutPhase>,
    /// Built-in configuration: cw, rabi, echo-envelope, echo-peaks,
    /// acmag-tau-x, acmag-tau-y, acmag-b-x, acmag-b-y, sensitivity, scaling.
    #[arg(long, global = true)]
    pub recipe: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Rabi oscillations for all modes with damped-cosine fits.
    Rabi,
    /// Echo envelope (or echo peak with `scan.axis = "tau_prime"`).
    Echo,
    /// AC magnetometry response versus field (or `τ` with `scan.axis = "tau"`).
    Acmag,
    /// Continuous-wave spectrum.
    Cw,
    /// Sensitivity report from a fitted field response.
    Sensitivity,
    /// Minimum detectable field versus integration time.
    Scaling,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rabi => "rabi",
            Command::Echo => "echo",
            Command::Acmag => "acmag",
            Command::Cw => "cw",
            Command::Sensitivity => "sensitivity",
            Command::Scaling => "scaling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Block,
    Numeric,
}

/// Built-in configurations: `(name, subcommand, TOML)`.
pub const RECIPES: &[(&str, Command, &str)] = &[
    (
        "cw",
        Command::Cw,
        "[scan]\nfrequencies = { start = \"1.15 GHz\", stop = \"1.45 GHz\", points = 3001 }\nlinewidth = \"10 MHz\"\n",
    ),
    (
        "rabi",
        Command::Rabi,
        "mode = \"duplex\"\n[scan]\nt_mw = { start = \"0 ns\", stop = \"1 us\", points = 201 }\n",
    ),
    (
        "echo-envelope",
        Command::Echo,
        "mode = \"duplex\"\n[scan]\naxis = \"tau\"\ntau = { start = \"0.1 us\", stop = \"3 us\", points = 30 }\n",
    ),
    (
        "echo-peaks",
        Command::Echo,
        "mode = \"duplex\"\nensemble_samples = 256\nseed = 1\n[scan]\naxis = \"tau_prime\"\ntau_fixed = \"0.6 us\"\ntau_prime = { start = \"0.3 us\", stop = \"0.9 us\", points = 121 }\n",
    ),
    (
        "acmag-tau-x",
        Command::Acmag,
        "mode = \"duplex\"\nreadout = \"x\"\n[scan]\naxis = \"tau\"\ntau_fixed = \"0.6 us\"\nb_fixed = \"3 uT\"\ntau = { start = \"0.2 us\", stop = \"1.2 us\", points = 101 }\n",
    ),
    (
        "acmag-tau-y",
        Command::Acmag,
        "mode = \"duplex\"\nreadout = \"y\"\n[scan]\naxis = \"tau\"\ntau_fixed = \"0.6 us\"\nb_fixed = \"3 uT\"\ntau = { start = \"0.2 us\", stop = \"1.2 us\", points = 101 }\n",
    ),
    (
        "acmag-b-x",
        Command::Acmag,
        "mode = \"duplex\"\nreadout = \"x\"\n[scan]\naxis = \"b\"\ntau_fixed = \"0.6 us\"\nb = { start = \"-10 uT\", stop = \"10 uT\", points = 41 }\n",
    ),
    (
        "acmag-b-y",
        Command::Acmag,
        "mode = \"duplex\"\nreadout = \"y\"\n[scan]\naxis = \"b\"\ntau_fixed = \"0.6 us\"\nb = { start = \"-10 uT\", stop = \"10 uT\", points = 41 }\n",
    ),
    (
        "sensitivity",
        Command::Sensitivity,
        "mode = \"duplex\"\nreadout = \"x\"\n[scan]\ntau_fixed = \"0.6 us\"\nb = { start = \"-10 uT\", stop = \"10 uT\", points = 41 }\n",
    ),
    (
        "scaling",
        Command::Scaling,
        "mode = \"duplex\"\nreadout = \"y\"\nseed = 1\n[scan]\ntau_fixed = \"0.6 us\"\nintegration_times = [\"1 s\", \"10 s\", \"100 s\"]\nmc_samples = 2000\n",
    ),
];

pub fn recipe(name: &str) -> Option<(Command, &'static str)> {
    RECIPES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, c, t)| (*c, *t))
}

/// Result of a subcommand: the CSV table and human-readable summary lines.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: ScanResult,
    pub summary: Vec<String>,
    pub reports: Vec<SensitivityReport>,
}

fn setup(config: &RunConfig) -> ScanSetup {
    ScanSetup {
        params: config.params,
        drive: config.drive,
        options: config.run_options(),
        ensemble_samples: config.ensemble_samples,
        seed: config.seed,
        noise_time: config.noise_time,
    }
}

fn gain(result: &ScanResult, param: &str) -> f64 {
    let v = |m: Mode| result.fit(m.name()).map_or(f64::NAN, |f| f.value(param));
    v(Mode::Duplex) / (0.5 * (v(Mode::SimplexPlus) + v(Mode::SimplexMinus)))
}

fn fit_lines(result: &ScanResult, summary: &mut Vec<String>) {
    for mode in Mode::ALL {
        if let Some(fit) = result.fit(mode.name()) {
            let params: Vec<String> = fit
                .params
                .iter()
                .map(|p| {
                    format!(
                        "{}={} +/- {}",
                        p.name,
                        format_float(p.value),
                        format_float(p.stderr)
                    )
                })
                .collect();
            summary.push(format!("{}: {}", mode.name(), params.join(" ")));
        }
    }
}

fn amplitude_scan(config: &RunConfig, readout: ReadoutPhase) -> Result<ScanResult> {
    ac_response_amplitude_scan(
        &config.scan.b.values(),
        config.scan.tau_fixed,
        readout,
        config.parity,
        config.mode,
        &setup(config),
    )
}

fn synchronized_nu(config: &RunConfig) -> Result<f64> {
    synchronized_ac_frequency(config.scan.tau_fixed, config.drive.pi_duration()?)
}

fn report_for(
    config: &RunConfig,
    result: &ScanResult,
    mode: Mode,
    readout: ReadoutPhase,
) -> Result<SensitivityReport> {
    let a = result
        .fit(mode.name())
        .map(|f| f.value("A"))
        .ok_or_else(|| Error::FitFailed(format!("no amplitude fit for {}", mode.name())))?;
    sensitivity(
        a.abs(),
        config.params.sigma_f_1s,
        synchronized_nu(config)?,
        config.params.gamma,
        mode,
        readout,
    )
}

/// Runs one subcommand against a validated configuration.
pub fn run_subcommand(command: Command, config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    let mut summary = Vec::new();
    let mut reports = Vec::new();
    let result = match command {
        Command::Rabi => {
            let r = rabi_scan(&config.scan.t_mw.values(), config.mode, &setup(config))?;
            fit_lines(&r, &mut summary);
            summary.push(format!(
                "gain (duplex / mean simplex A_R) = {:.4}",
                gain(&r, "A_R")
            ));
            r
        }
        Command::Echo => match config.scan.axis.unwrap_or(Axis::Tau) {
            Axis::Tau => {
                let r = echo_envelope_scan(&config.scan.tau.values(), config.mode, &setup(config))?;
                fit_lines(&r, &mut summary);
                summary.push(format!(
                    "gain (duplex / mean simplex A) = {:.4}",
                    gain(&r, "A")
                ));
                r
            }
            Axis::TauPrime => {
                let r = echo_peak_scan(
                    &config.scan.tau_prime.values(),
                    config.scan.tau_fixed,
                    config.mode,
                    &setup(config),
                )?;
                let f = r.values(config.mode.name()).unwrap_or_default();
                let (i, v) = f
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |b, (i, &v)| if v > b.1 { (i, v) } else { b },
                    );
                summary.push(format!(
                    "{}: echo peak F={} at tau'={} s",
                    config.mode.name(),
                    format_float(v),
                    format_float(r.axis[i])
                ));
                r
            }
            Axis::Field => {
                return Err(Error::Config(
                    "`scan.axis`: echo supports tau or tau_prime".into(),
                ))
            }
        },
        Command::Acmag => match config.scan.axis.unwrap_or(Axis::Field) {
            Axis::Field => {
                let r = amplitude_scan(config, config.readout)?;
                fit_lines(&r, &mut summary);
                summary.push(format!(
                    "gain (duplex / mean simplex A) = {:.4}",
                    gain(&r, "A")
                ));
                let report = report_for(config, &r, config.mode, config.readout)?;
                summary.push(report.to_string());
                reports.push(report);
                r
            }
            Axis::Tau => {
                let r = ac_response_tau_scan(
                    &config.scan.tau.values(),
                    config.scan.b_fixed,
                    config.scan.tau_fixed,
                    config.readout,
                    config.mode,
                    &setup(config),
                )?;
                let f = r.values(config.mode.name()).unwrap_or_default();
                let base = r.values("baseline").unwrap_or_default();
                let (i, d) = f
                    .iter()
                    .zip(base)
                    .map(|(v, b)| (v - b).abs())
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |b, (i, v)| if v > b.1 { (i, v) } else { b },
                    );
                summary.push(format!(
                    "{}: largest response |F - baseline|={} at tau={} s",
                    config.mode.name(),
                    format_float(d),
                    format_float(r.axis[i])
                ));
                r
            }
            Axis::TauPrime => {
                return Err(Error::Config("`scan.axis`: acmag supports b or tau".into()))
            }
        },
        Command::Cw => {
            let f = config.scan.frequencies.values();
            let s = cw_spectrum(
                &config.params,
                &f,
                config.scan.linewidth,
                config.scan.drive_scale,
            )?;
            let mut r = ScanResult::new("frequency_hz", f);
            r.push_signal("intensity", s, None);
            r.meta("scan", "cw");
            r.meta("params.b0_t", format_float(config.params.b0));
            r.meta("params.d_over_h_hz", format_float(config.params.d_over_h));
            r.meta("linewidth_hz", format_float(config.scan.linewidth));
            r.meta("drive_scale", format_float(config.scan.drive_scale));
            r
        }
        Command::Sensitivity => {
            let mut r = amplitude_scan(config, config.readout)?;
            fit_lines(&r, &mut summary);
            for mode in Mode::ALL {
                let report = report_for(config, &r, mode, config.readout)?;
                let key = format!("sensitivity.{}", mode.name());
                r.meta(
                    &format!("{key}.delta_f_percent_per_ut"),
                    format_float(report.delta_f_percent_per_ut()),
                );
                r.meta(
                    &format!("{key}.eta_ut_per_rthz"),
                    format_float(report.eta_ut()),
                );
                summary.push(report.to_string());
                reports.push(report);
            }
            let eta = |m: Mode| {
                reports
                    .iter()
                    .find(|r| r.mode == m)
                    .map_or(f64::NAN, |r| r.eta)
            };
            summary.push(format!(
                "gain (mean simplex eta / duplex eta) = {:.4}",
                0.5 * (eta(Mode::SimplexPlus) + eta(Mode::SimplexMinus)) / eta(Mode::Duplex)
            ));
            r
        }
        Command::Scaling => scaling(config, &mut summary, &mut reports)?,
    };
    Ok(Outcome {
        result,
        summary,
        reports,
    })
}

fn scaling(
    config: &RunConfig,
    summary: &mut Vec<String>,
    reports: &mut Vec<SensitivityReport>,
) -> Result<ScanResult> {
    let scan = amplitude_scan(config, config.readout)?;
    let report = report_for(config, &scan, config.mode, config.readout)?;
    let nu = synchronized_nu(config)?;
    let response = EchoResponse {
        amplitude: scan
            .fit(config.mode.name())
            .map_or(f64::NAN, |f| f.value("A"))
            .abs(),
        nu,
        gamma: config.params.gamma,
        readout: config.readout,
    };
    let b0 = response.slope_point();
    let field = AcField {
        parity: config.parity,
        ..AcField::magnetic(b0, nu)
    };
    let f0 = echo_signal(
        config.scan.tau_fixed,
        config.scan.tau_fixed,
        config.mode,
        config.readout,
        &config.params,
        &config.drive,
        Some(&field),
        &config.run_options(),
    )?
    .f;
    let times = config.scan.integration_times.clone();
    let analytic = min_detectable_field(report.eta, &times)?;
    let readout = ReadoutModel::from(&config.params);
    let mc = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            monte_carlo_field_estimate(
                f0,
                &response,
                &readout,
                t,
                config.scan.mc_samples,
                config.seed.wrapping_add(i as u64),
            )
            .map(|e| e.std)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = ScanResult::new("integration_time_s", times.clone());
    r.push_signal("analytic", analytic, None);
    r.push_signal("monte_carlo", mc.clone(), None);
    r.meta("scan", "scaling");
    r.meta("mode", config.mode.name());
    r.meta("readout", config.readout.name());
    r.meta("eta_t_per_rthz", format_float(report.eta));
    r.meta("slope_point_t", format_float(b0));
    r.meta("f_at_slope_point", format_float(f0));
    r.meta("mc_samples", config.scan.mc_samples);
    r.meta("seed", config.seed);
    summary.push(report.to_string());
    if times.len() >= 2 {
        let (_, p) = experiments::fit_power_law(&times, &mc)?;
        summary.push(format!("Monte-Carlo exponent = {p:.4}"));
    }
    reports.push(report);
    Ok(r)
}

/// Resolves the configuration for a parsed command line.
pub fn resolve_config(cli: &Cli) -> Result<(RunConfig, Option<&'static str>)> {
    let (mut config, recipe_text) = match (&cli.recipe, &cli.config) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "--recipe and --config are mutually exclusive".into(),
            ))
        }
        (Some(name), None) => {
            let (command, text) = recipe(name).ok_or_else(|| {
                let names: Vec<&str> = RECIPES.iter().map(|(n, _, _)| *n).collect();
                Error::Config(format!(
                    "unknown recipe `{name}` (available: {})",
                    names.join(", ")
                ))
            })?;
            if command != cli.command {
                return Err(Error::Config(format!(
                    "recipe `{name}` belongs to the `{}` subcommand",
                    command.name()
                )));
            }
            (parse_config(text)?, Some(text))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            (parse_config(&text)?, None)
        }
        (None, None) => (RunConfig::default(), None),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if let Some(mode) = cli.mode {
        config.mode = mode;
    }
    if let Some(readout) = cli.readout {
        config.readout = readout;
    }
    match cli.engine {
        Some(EngineArg::Block) => config.engine = Engine::Block,
        Some(EngineArg::Numeric) if config.engine == Engine::Block => {
            config.engine = Engine::numeric()
        }
        _ => {}
    }
    config.validate()?;
    Ok((config, recipe_text))
}

fn write_result(result: &ScanResult, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    result.write_csv(BufWriter::new(file))
}

/// Runs the command line and returns the path written.
pub fn run(cli: &Cli) -> Result<(PathBuf, Outcome)> {
    let (config, recipe_text) = resolve_config(cli)?;
    if let (Some(name), Some(text)) = (&cli.recipe, recipe_text) {
        println!("# recipe {name}");
        print!("{text}");
    }
    let mut outcome = run_subcommand(cli.command, &config)?;
    if let Some(name) = &cli.recipe {
        outcome.result.meta("recipe", name);
    }
    let path = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cli.command.name())));
    write_result(&outcome.result, &path)?;
    Ok((path, outcome))
}

/// Entry point of the `duplex-odmr` binary.
pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((path, outcome)) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!(
                "wrote {} rows to {}",
                outcome.result.axis.len(),
                path.display()
            );
            std::process::ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
