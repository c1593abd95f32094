// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pulse sequences: construction, execution and a TOML text form.
//!
//! A sequence is an ordered list of laser, MW and delay elements on one
//! absolute clock starting at zero. Laser elements read out the current state
//! (if any) and re-initialize; MW elements carry one tone per driven qubit.
//!
//! Phase convention for every builder: a tone of phase `0` rotates the `+`
//! qubit about `+x`, and the `−` qubit is driven with phase `π` so the same
//! pulse rotates it about `−x`. After the first π/2 pulse both Bloch vectors
//! point along `+y`.
//!
//! The AC test field is anchored to the start of the first MW pulse:
//! `B̃(t) = b·sin(2πν(t − t_mw) + phase)`. With `ν` from
//! [`synchronized_ac_frequency`] the field changes sign at the centre of the π
//! pulse.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, DensityMatrix4, Detuning, Window};
use crate::error::{invalid, Error, Result};
use crate::model::{self, QuartetParams, Target, Tone};
use crate::photophysics::{self, ReadoutModel};
use crate::{C64, TAU};

/// Laser pulse width used by the builders.
pub const LASER_DURATION: f64 = 0.5e-6;
/// Wait between the initialization laser and the first MW pulse.
pub const PRE_MW_DELAY: f64 = 0.7e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Laser,
    Mw,
    Delay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseElement {
    pub kind: ElementKind,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tones: Vec<Tone>,
}

impl PulseElement {
    pub fn laser(duration: f64) -> Self {
        Self {
            kind: ElementKind::Laser,
            duration,
            tones: Vec::new(),
        }
    }

    pub fn delay(duration: f64) -> Self {
        Self {
            kind: ElementKind::Delay,
            duration,
            tones: Vec::new(),
        }
    }

    pub fn mw(duration: f64, tones: Vec<Tone>) -> Self {
        Self {
            kind: ElementKind::Mw,
            duration,
            tones,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidSequence(format!(
                "element duration {} must be finite and non-negative",
                self.duration
            )));
        }
        match self.kind {
            ElementKind::Mw => {
                if self.tones.is_empty() || self.tones.len() > 2 {
                    return Err(Error::InvalidSequence(format!(
                        "MW element must carry 1 or 2 tones, got {}",
                        self.tones.len()
                    )));
                }
                if self.tones.len() == 2 && self.tones[0].target == self.tones[1].target {
                    return Err(Error::InvalidSequence(
                        "MW element drives the same qubit twice".into(),
                    ));
                }
                for tone in &self.tones {
                    tone.validate()?;
                }
            }
            ElementKind::Laser | ElementKind::Delay => {
                if !self.tones.is_empty() {
                    return Err(Error::InvalidSequence(
                        "only MW elements may carry tones".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn tone_for(&self, target: Target) -> Option<&Tone> {
        self.tones.iter().find(|t| t.target == target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    #[serde(default)]
    pub label: String,
    /// Number of repetitions averaged by the detector (metadata only).
    #[serde(default = "default_repetitions")]
    pub repetitions: u64,
    #[serde(rename = "element")]
    pub elements: Vec<PulseElement>,
}

fn default_repetitions() -> u64 {
    1
}

impl PulseSequence {
    pub fn new(label: impl Into<String>, elements: Vec<PulseElement>) -> Self {
        Self {
            label: label.into(),
            repetitions: 1,
            elements,
        }
    }

    /// Element validity plus the experiment framing: starts and ends with a
    /// laser pulse.
    pub fn validate(&self) -> Result<()> {
        for e in &self.elements {
            e.validate()?;
        }
        let first = self.elements.first().map(|e| e.kind);
        let last = self.elements.last().map(|e| e.kind);
        if first != Some(ElementKind::Laser) || last != Some(ElementKind::Laser) {
            return Err(Error::InvalidSequence(
                "experiment sequences begin and end with a laser pulse".into(),
            ));
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.elements.iter().map(|e| e.duration).sum()
    }

    /// Start time of the first MW element.
    pub fn first_mw_start(&self) -> Option<f64> {
        let mut t = 0.0;
        for e in &self.elements {
            if e.kind == ElementKind::Mw {
                return Some(t);
            }
            t += e.duration;
        }
        None
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::SequenceText(e.to_string()))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let seq: Self = toml::from_str(text).map_err(|e| Error::SequenceText(e.to_string()))?;
        for e in &seq.elements {
            e.validate()?;
        }
        Ok(seq)
    }
}

/// Which qubits a sequence drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "simplex+")]
    SimplexPlus,
    #[serde(rename = "simplex-")]
    SimplexMinus,
    #[serde(rename = "duplex")]
    Duplex,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::SimplexPlus, Mode::SimplexMinus, Mode::Duplex];

    pub fn targets(self) -> &'static [Target] {
        match self {
            Mode::SimplexPlus => &[Target::Plus],
            Mode::SimplexMinus => &[Target::Minus],
            Mode::Duplex => &[Target::Plus, Target::Minus],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::SimplexPlus => "simplex+",
            Mode::SimplexMinus => "simplex-",
            Mode::Duplex => "duplex",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex+" => Ok(Mode::SimplexPlus),
            "simplex-" => Ok(Mode::SimplexMinus),
            "duplex" => Ok(Mode::Duplex),
            other => Err(invalid("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Axis scheme of the final π/2 (readout) pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReadoutPhase {
    /// `(π/2)±x`: cosine response `F_x = A·cos(2φ)`.
    #[serde(rename = "x")]
    PlusMinusX,
    /// `(π/2)±y` for the ± qubits: sine response `F_y = A·sin(2φ)`.
    #[serde(rename = "y")]
    PlusMinusY,
    /// `(π/2)+y` on both qubits; keeps even-order signals from cancelling.
    #[serde(rename = "commony")]
    CommonPlusY,
}

impl ReadoutPhase {
    pub fn name(self) -> &'static str {
        match self {
            ReadoutPhase::PlusMinusX => "x",
            ReadoutPhase::PlusMinusY => "y",
            ReadoutPhase::CommonPlusY => "commony",
        }
    }
}

impl std::str::FromStr for ReadoutPhase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(ReadoutPhase::PlusMinusX),
            "y" => Ok(ReadoutPhase::PlusMinusY),
            "commony" => Ok(ReadoutPhase::CommonPlusY),
            other => Err(invalid(
                "readout",
                format!("unknown readout phase `{other}`"),
            )),
        }
    }
}

/// The two complementary acquisitions; `B` flips the final pulse phase by π.
///
/// `A` is the acquisition whose unperturbed echo ends in the bright states, so
/// `F = F_A − F_B` gives `F_x(0) = +A` and `F_y` with the sign of the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acquisition {
    A,
    B,
}

/// MW phase that makes a pulse rotate `target` about its `+x` (`+` qubit) or
/// `−x` (`−` qubit) axis.
pub fn base_phase(target: Target) -> f64 {
    match target {
        Target::Plus => 0.0,
        Target::Minus => PI,
    }
}

/// MW phase of the final π/2 pulse for a readout scheme and acquisition.
pub fn readout_tone_phase(readout: ReadoutPhase, target: Target, acquisition: Acquisition) -> f64 {
    let offset = match (readout, target) {
        // Bright-state mapping: + qubit about −x, − qubit about +x.
        (ReadoutPhase::PlusMinusX, _) => PI,
        // + qubit about +y, − qubit about −y.
        (ReadoutPhase::PlusMinusY, _) => FRAC_PI_2,
        // Both qubits about +y.
        (ReadoutPhase::CommonPlusY, Target::Plus) => FRAC_PI_2,
        (ReadoutPhase::CommonPlusY, Target::Minus) => -FRAC_PI_2,
    };
    let flip = match acquisition {
        Acquisition::A => 0.0,
        Acquisition::B => PI,
    };
    (base_phase(target) + offset + flip).rem_euclid(TAU)
}

/// Coupling channel of an AC test signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    /// First order in S: both qubits shift by `+γB̃`.
    Magnetic,
    /// Even order in S (E-field, D shift): the qubits shift by `±γB̃`, with
    /// the amplitude given in field-equivalent units.
    EvenOrder,
}

/// Sinusoidal test signal `B̃(t) = b·sin(2πν(t − t_mw) + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcField {
    /// Amplitude `b` in T.
    pub amplitude: f64,
    /// Frequency `ν` in Hz.
    pub frequency: f64,
    /// Phase offset in rad.
    #[serde(default)]
    pub phase: f64,
    pub parity: Parity,
}

impl AcField {
    pub fn magnetic(amplitude: f64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase: 0.0,
            parity: Parity::Magnetic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(invalid("ac.amplitude", "must be finite and non-negative"));
        }
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(invalid("ac.frequency", "must be positive"));
        }
        if !self.phase.is_finite() {
            return Err(invalid("ac.phase", "must be finite"));
        }
        Ok(())
    }

    /// Field value in T at time `t` relative to the anchor.
    pub fn field(&self, t: f64) -> f64 {
        self.amplitude * (TAU * self.frequency * t + self.phase).sin()
    }

    /// `∫ B̃ dt` between two anchor-relative times.
    pub fn field_integral(&self, t0: f64, t1: f64) -> f64 {
        let w = TAU * self.frequency;
        self.amplitude / w * ((w * t0 + self.phase).cos() - (w * t1 + self.phase).cos())
    }

    fn split(&self, value: f64) -> Detuning {
        match self.parity {
            Parity::Magnetic => Detuning {
                common: value,
                parity: 0.0,
            },
            Parity::EvenOrder => Detuning {
                common: 0.0,
                parity: value,
            },
        }
    }
}

/// Rabi settings and nominal pulse calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    /// Calibrated Rabi angular frequency used to size pulses.
    pub omega1: f64,
    /// Actual Rabi angular frequency of the `f+` tone.
    pub omega1_plus: f64,
    /// Actual Rabi angular frequency of the `f−` tone.
    pub omega1_minus: f64,
}

impl Drive {
    /// Both tones calibrated to the same Rabi frequency.
    pub fn matched(omega1: f64) -> Self {
        Self {
            omega1,
            omega1_plus: omega1,
            omega1_minus: omega1,
        }
    }

    pub fn omega1_for(&self, target: Target) -> f64 {
        match target {
            Target::Plus => self.omega1_plus,
            Target::Minus => self.omega1_minus,
        }
    }

    pub fn pi_duration(&self) -> Result<f64> {
        duration_for_angle(PI, self.omega1)
    }
}

impl Default for Drive {
    fn default() -> Self {
        Drive::matched(TAU * 10.0e6)
    }
}

/// Pulse width `θ/ω1` for a rotation angle `θ`.
pub fn duration_for_angle(theta: f64, omega1: f64) -> Result<f64> {
    if !(omega1 > 0.0) {
        return Err(invalid("omega1", "Rabi frequency must be positive"));
    }
    Ok(theta / omega1)
}

fn tones(
    params: &QuartetParams,
    drive: &Drive,
    mode: Mode,
    phase: impl Fn(Target) -> f64,
) -> Vec<Tone> {
    mode.targets()
        .iter()
        .map(|&t| Tone::resonant(params, t, drive.omega1_for(t), phase(t)))
        .collect()
}

/// Laser, wait, one MW pulse of length `t_mw`, readout laser.
pub fn build_rabi_sequence(
    t_mw: f64,
    mode: Mode,
    params: &QuartetParams,
    drive: &Drive,
) -> Result<PulseSequence> {
    if !(t_mw >= 0.0) {
        return Err(invalid("t_mw", "must be non-negative"));
    }
    Ok(PulseSequence::new(
        format!("rabi {} t_mw={t_mw:e}", mode.name()),
        vec![
            PulseElement::laser(LASER_DURATION),
            PulseElement::delay(PRE_MW_DELAY),
            PulseElement::mw(t_mw, tones(params, drive, mode, base_phase)),
            PulseElement::laser(LASER_DURATION),
        ],
    ))
}

/// π/2, τ′, π, τ, π/2 (readout) between initialization and readout
/// lasers. Free times are measured between pulse edges.
pub fn build_echo_sequence(
    tau_prime: f64,
    tau: f64,
    mode: Mode,
    readout: ReadoutPhase,
    acquisition: Acquisition,
    params: &QuartetParams,
    drive: &Drive,
) -> Result<PulseSequence> {
    if !(tau_prime >= 0.0) || !(tau >= 0.0) {
        return Err(invalid("tau", "free evolution times must be non-negative"));
    }
    let t_half = duration_for_angle(FRAC_PI_2, drive.omega1)?;
    let t_pi = duration_for_angle(PI, drive.omega1)?;
    Ok(PulseSequence::new(
        format!(
            "echo {} readout={} acq={:?} tau'={tau_prime:e} tau={tau:e}",
            mode.name(),
            readout.name(),
            acquisition
        ),
        vec![
            PulseElement::laser(LASER_DURATION),
            PulseElement::delay(PRE_MW_DELAY),
            PulseElement::mw(t_half, tones(params, drive, mode, base_phase)),
            PulseElement::delay(tau_prime),
            PulseElement::mw(t_pi, tones(params, drive, mode, base_phase)),
            PulseElement::delay(tau),
            PulseElement::mw(
                t_half,
                tones(params, drive, mode, |t| {
                    readout_tone_phase(readout, t, acquisition)
                }),
            ),
            PulseElement::laser(LASER_DURATION),
        ],
    ))
}

/// AC frequency whose half period spans one free interval plus the π pulse,
/// `ν = 1/(2(τ + t_π))`.
pub fn synchronized_ac_frequency(tau: f64, t_pi: f64) -> Result<f64> {
    let half_period = tau + t_pi;
    if !(half_period > 0.0) {
        return Err(invalid("tau", "τ + t_π must be positive"));
    }
    Ok(1.0 / (2.0 * half_period))
}

/// Propagation engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Engine {
    /// Per-qubit Pauli rotations. MW pulses are ideal rotations flanked by
    /// half of their dephasing; detunings and the AC field act during free
    /// evolution only.
    Block,
    /// Full 4×4 rotating-frame integration with step `dt`, including
    /// cross-talk, detuning during pulses and the AC field throughout.
    Numeric { dt: f64 },
}

impl Engine {
    /// Numeric engine with the default 0.1 ns step.
    pub fn numeric() -> Self {
        Engine::Numeric { dt: 0.1e-9 }
    }
}

/// Execution options for [`run_sequence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub engine: Engine,
    /// Quasi-static detuning added for the whole run.
    pub static_detuning: Detuning,
    /// Apply `1/T2` dephasing throughout.
    pub dephasing: bool,
    /// Keep the state after every element.
    pub record_states: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Block,
            static_detuning: Detuning::default(),
            dephasing: true,
            record_states: false,
        }
    }
}

/// State snapshot after an element.
#[derive(Debug, Clone)]
pub struct StepState {
    pub element: usize,
    /// Absolute time at the end of the element.
    pub time: f64,
    pub state: DensityMatrix4,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Relative fluorescence of the last readout laser.
    pub intensity: f64,
    /// State read out by the last laser.
    pub final_state: DensityMatrix4,
    pub states: Vec<StepState>,
}

/// Executes a sequence and returns the readout of its last laser pulse.
pub fn run_sequence(
    seq: &PulseSequence,
    ac: Option<&AcField>,
    params: &QuartetParams,
    options: &RunOptions,
) -> Result<RunOutput> {
    seq.validate()?;
    params.validate()?;
    if let Some(field) = ac {
        field.validate()?;
    }
    for e in &seq.elements {
        for tone in &e.tones {
            model::check_tone(params, tone, model::RESONANCE_TOLERANCE_HZ)?;
        }
    }
    if options.engine == Engine::Block {
        params.check_lac()?;
    }
    let readout = ReadoutModel::from(params);
    let anchor = seq.first_mw_start().unwrap_or(0.0);
    let t2 = options.dephasing.then_some(params.t2);

    let mut state: Option<DensityMatrix4> = None;
    let mut last_readout: Option<(f64, DensityMatrix4)> = None;
    let mut states = Vec::new();
    let mut t = 0.0;
    for (index, element) in seq.elements.iter().enumerate() {
        let window = Window {
            start: t,
            duration: element.duration,
        };
        match element.kind {
            ElementKind::Laser => {
                if let Some(s) = state.take() {
                    last_readout = Some((photophysics::fluorescence(&s, &readout), s));
                }
                state = Some(photophysics::initialize());
            }
            ElementKind::Delay | ElementKind::Mw => {
                let s = state.as_ref().ok_or_else(|| {
                    Error::InvalidSequence("evolution before initialization".into())
                })?;
                let next = match options.engine {
                    Engine::Block => {
                        block_step(s, element, window, ac, anchor, params, options, t2)?
                    }
                    Engine::Numeric { dt } => {
                        let detuning =
                            |time: f64| total_detuning(time, ac, anchor, params, options);
                        dynamics::propagate_numeric(
                            s,
                            params,
                            &element.tones,
                            detuning,
                            window,
                            dt,
                            t2,
                        )?
                    }
                };
                state = Some(next);
            }
        }
        t += element.duration;
        if options.record_states {
            if let Some(s) = &state {
                states.push(StepState {
                    element: index,
                    time: t,
                    state: s.clone(),
                });
            }
        }
    }
    let (intensity, final_state) = last_readout
        .ok_or_else(|| Error::InvalidSequence("sequence has no readout laser".into()))?;
    Ok(RunOutput {
        intensity,
        final_state,
        states,
    })
}

fn total_detuning(
    t: f64,
    ac: Option<&AcField>,
    anchor: f64,
    params: &QuartetParams,
    options: &RunOptions,
) -> Detuning {
    let mut d = options.static_detuning;
    if let Some(field) = ac {
        let extra = field.split(params.gamma * field.field(t - anchor));
        d.common += extra.common;
        d.parity += extra.parity;
    }
    d
}

#[allow(clippy::too_many_arguments)]
fn block_step(
    state: &DensityMatrix4,
    element: &PulseElement,
    window: Window,
    ac: Option<&AcField>,
    anchor: f64,
    params: &QuartetParams,
    options: &RunOptions,
    t2: Option<f64>,
) -> Result<DensityMatrix4> {
    let duration = window.duration;
    match element.kind {
        ElementKind::Delay => {
            let mut phase = Detuning {
                common: options.static_detuning.common * duration,
                parity: options.static_detuning.parity * duration,
            };
            if let Some(field) = ac {
                let t0 = window.start - anchor;
                let integral = field.split(params.gamma * field.field_integral(t0, t0 + duration));
                phase.common += integral.common;
                phase.parity += integral.parity;
            }
            let out = dynamics::free_evolution(state, phase.common, phase.parity);
            Ok(match t2 {
                Some(t2) => dynamics::dephase(&out, (-duration / t2).exp()),
                None => out,
            })
        }
        ElementKind::Mw => {
            let unitary = |target: Target, dt: f64| -> Matrix2<C64> {
                match element.tone_for(target) {
                    Some(tone) => dynamics::block_unitary(
                        &model::qubit_block_hamiltonian(target, tone.rabi, tone.phase, 0.0),
                        dt,
                    ),
                    None => Matrix2::identity(),
                }
            };
            match t2 {
                None => Ok(dynamics::apply_block_unitaries(
                    state,
                    &unitary(Target::Plus, duration),
                    &unitary(Target::Minus, duration),
                )),
                Some(t2) => {
                    let half = (-0.5 * duration / t2).exp();
                    let s = dynamics::dephase(state, half);
                    let s = dynamics::apply_block_unitaries(
                        &s,
                        &unitary(Target::Plus, duration),
                        &unitary(Target::Minus, duration),
                    );
                    Ok(dynamics::dephase(&s, half))
                }
            }
        }
        ElementKind::Laser => unreachable!("laser elements are handled by the caller"),
    }
}

/// Runs both complementary acquisitions of an echo and returns
/// `F = 2(Ia − Ib)/(Ia + Ib)` together with `(Ia, Ib)`.
#[allow(clippy::too_many_arguments)]
pub fn echo_signal(
    tau_prime: f64,
    tau: f64,
    mode: Mode,
    readout: ReadoutPhase,
    params: &QuartetParams,
    drive: &Drive,
    ac: Option<&AcField>,
    options: &RunOptions,
) -> Result<EchoSignal> {
    let run = |acq| -> Result<f64> {
        let seq = build_echo_sequence(tau_prime, tau, mode, readout, acq, params, drive)?;
        Ok(run_sequence(&seq, ac, params, options)?.intensity)
    };
    let i_a = run(Acquisition::A)?;
    let i_b = run(Acquisition::B)?;
    Ok(EchoSignal {
        f: photophysics::complementary_signal(i_a, i_b)?,
        i_a,
        i_b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoSignal {
    pub f: f64,
    pub i_a: f64,
    pub i_b: f64,
}
