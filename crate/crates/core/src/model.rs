// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-3/2 operator algebra, quartet parameters and Hamiltonians.
//!
//! The lab-frame Hamiltonian is `H = D·Sz² + ħγ S·B` with a static field `B0`
//! along z and circularly rotating MW fields in the xy-plane. All Hamiltonians
//! returned here are divided by ħ, i.e. they are angular frequencies (rad/s).
//!
//! # Frame
//!
//! [`rotating_frame_hamiltonian`] works in the interaction picture of the static
//! part `D·Sz² + ħγB0·Sz`. In that single common frame both qubits sit at exact
//! resonance, a tone at `f±` is static inside its own block, and every other
//! matrix element a tone touches oscillates at its residual frequency
//! (`±4D/ħ` for the opposite block). Counter-rotating terms are absent because
//! the drive is circular. The `|+1/2⟩ ↔ |−1/2⟩` transition is not modelled.
//!
//! The MW field convention is the circular one: the `B1` entering
//! `ω1 = √3·γ·B1` is the amplitude of the co-rotating component. A linearly
//! polarized lab field of amplitude `2·B1` produces the same `ω1`.

use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::{C64, TAU};

/// Default γ/2π in Hz/T (free-electron-like g ≈ 2.0).
pub const GAMMA_OVER_2PI: f64 = 28.024e9;

/// Default tolerance for matching a tone to `f+` or `f−`.
pub const RESONANCE_TOLERANCE_HZ: f64 = 1.0e6;

/// Sz eigenvalues in basis order.
pub(crate) const SZ_DIAG: [f64; 4] = [1.5, 0.5, -0.5, -1.5];

/// Diagonal of the parity operator `(Sz² − 5/4)/2`. It reads `+σz/2` in the
/// `+` block and `−σz/2` in the `−` block.
pub(crate) const PARITY_DIAG: [f64; 4] = [0.5, -0.5, -0.5, 0.5];

/// One of the two qubits inside the quartet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// `{|+3/2⟩, |+1/2⟩}`, resonant at `f+`.
    Plus,
    /// `{|−1/2⟩, |−3/2⟩}`, resonant at `f−`.
    Minus,
}

impl Target {
    pub const BOTH: [Target; 2] = [Target::Plus, Target::Minus];

    /// Index of the first basis state of this qubit's block.
    pub fn offset(self) -> usize {
        match self {
            Target::Plus => 0,
            Target::Minus => 2,
        }
    }

    /// Basis index of the bright (`|±3/2⟩`) state of this qubit.
    pub fn bright_index(self) -> usize {
        match self {
            Target::Plus => 0,
            Target::Minus => 3,
        }
    }

    /// Basis index of the dark (`|±1/2⟩`) state of this qubit.
    pub fn dark_index(self) -> usize {
        match self {
            Target::Plus => 1,
            Target::Minus => 2,
        }
    }

    pub fn other(self) -> Target {
        match self {
            Target::Plus => Target::Minus,
            Target::Minus => Target::Plus,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Plus => f.write_str("+"),
            Target::Minus => f.write_str("-"),
        }
    }
}

/// Physical constants of the quartet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartetParams {
    /// `D/h` in Hz. The zero-field line sits at `2·D/h`.
    pub d_over_h: f64,
    /// Angular gyromagnetic ratio in rad·s⁻¹·T⁻¹, positive.
    pub gamma: f64,
    /// Static field along z in T.
    pub b0: f64,
    /// Readout contrast coefficient.
    pub chi: f64,
    /// Inhomogeneous dephasing time in s.
    pub t2_star: f64,
    /// Homogeneous coherence time in s.
    pub t2: f64,
    /// Noise of the complementary signal F for 1 s of integration.
    pub sigma_f_1s: f64,
}

impl Default for QuartetParams {
    fn default() -> Self {
        Self {
            d_over_h: 35.0e6,
            gamma: TAU * GAMMA_OVER_2PI,
            b0: 46.0e-3,
            chi: 0.014,
            t2_star: 0.15e-6,
            t2: 2.1e-6,
            sigma_f_1s: 0.0014,
        }
    }
}

impl QuartetParams {
    /// Checks the parameter invariants (not the LAC guard, see [`Self::check_lac`]).
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.d_over_h,
            self.gamma,
            self.b0,
            self.chi,
            self.t2_star,
            self.t2,
            self.sigma_f_1s,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("quartet parameters"));
        }
        if self.gamma <= 0.0 {
            return Err(invalid("gamma", "gyromagnetic ratio must be positive"));
        }
        if self.d_over_h <= 0.0 {
            return Err(invalid("d_over_h", "zero-field splitting must be positive"));
        }
        if self.t2_star <= 0.0 {
            return Err(invalid("t2_star", "T2* must be positive"));
        }
        if self.t2 < self.t2_star {
            return Err(invalid("t2", "T2 must not be shorter than T2*"));
        }
        if self.chi < 0.0 {
            return Err(invalid("chi", "contrast coefficient must be non-negative"));
        }
        if self.sigma_f_1s < 0.0 {
            return Err(invalid("sigma_f_1s", "readout noise must be non-negative"));
        }
        Ok(())
    }

    /// Level anti-crossing guard required by the block engine:
    /// `γB0/2π > 2·D/h` or `B0 = 0`.
    pub fn check_lac(&self) -> Result<()> {
        let larmor_hz = self.larmor_hz();
        let line_hz = 2.0 * self.d_over_h;
        if self.b0 == 0.0 || larmor_hz > line_hz {
            Ok(())
        } else {
            Err(Error::LacGuard { larmor_hz, line_hz })
        }
    }

    /// `γB0/2π` in Hz.
    pub fn larmor_hz(&self) -> f64 {
        self.gamma * self.b0 / TAU
    }

    /// `D/ħ` in rad/s.
    pub fn d_angular(&self) -> f64 {
        TAU * self.d_over_h
    }

    /// Transition angular frequency `ω0` of a qubit.
    pub fn transition_angular(&self, target: Target) -> f64 {
        let larmor = self.gamma * self.b0;
        match target {
            Target::Plus => larmor + 2.0 * self.d_angular(),
            Target::Minus => larmor - 2.0 * self.d_angular(),
        }
    }

    /// Resonance frequency of a qubit in Hz (signed).
    pub fn resonance_hz(&self, target: Target) -> f64 {
        self.transition_angular(target) / TAU
    }
}

/// A single MW frequency component of a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    /// MW frequency in Hz.
    pub frequency: f64,
    /// Rabi angular frequency `ω1 = √3·γ·B1` in rad/s.
    pub rabi: f64,
    /// MW phase `φ1` in rad; sets the rotation axis in the qubit's xy-plane.
    pub phase: f64,
    pub target: Target,
}

impl Tone {
    /// A tone exactly on the target's resonance.
    pub fn resonant(params: &QuartetParams, target: Target, rabi: f64, phase: f64) -> Self {
        Self {
            frequency: params.resonance_hz(target).abs(),
            rabi,
            phase,
            target,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency.is_finite() && self.rabi.is_finite() && self.phase.is_finite()) {
            return Err(Error::NonFinite("tone"));
        }
        if self.frequency <= 0.0 {
            return Err(invalid("tone.frequency", "must be positive"));
        }
        if self.rabi < 0.0 {
            return Err(invalid("tone.rabi", "Rabi frequency must be non-negative"));
        }
        Ok(())
    }

    /// Signed angular frequency of the tone as seen by the frame.
    ///
    /// A negative resonance (`f−` below zero at weak fields) is driven by the
    /// opposite circular polarization, which is equivalent to a tone at the
    /// signed frequency.
    fn signed_angular(&self, params: &QuartetParams) -> f64 {
        TAU * self.frequency * params.resonance_hz(self.target).signum()
    }
}

/// Checks that a tone is resonant with its target within `tolerance_hz`.
pub fn check_tone(params: &QuartetParams, tone: &Tone, tolerance_hz: f64) -> Result<()> {
    tone.validate()?;
    let expected_hz = params.resonance_hz(tone.target).abs();
    if (tone.frequency - expected_hz).abs() > tolerance_hz {
        return Err(Error::OffResonantTone {
            frequency_hz: tone.frequency,
            expected_hz,
            target: tone.target,
        });
    }
    Ok(())
}

/// Spin-3/2 matrices in the basis `(|+3/2⟩, |+1/2⟩, |−1/2⟩, |−3/2⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub sx: Matrix4<C64>,
    pub sy: Matrix4<C64>,
    pub sz: Matrix4<C64>,
}

impl SpinOperators {
    /// Raising operator `S+ = Sx + i·Sy`.
    pub fn raising(&self) -> Matrix4<C64> {
        self.sx + self.sy * C64::i()
    }

    pub fn sz_squared(&self) -> Matrix4<C64> {
        self.sz * self.sz
    }
}

/// Standard S = 3/2 matrices built from the ladder-operator elements
/// `⟨m+1|S+|m⟩ = √(S(S+1) − m(m+1))`.
pub fn spin_matrices() -> SpinOperators {
    let s = 1.5_f64;
    let mut raising = Matrix4::<C64>::zeros();
    // Row i holds m = SZ_DIAG[i]; S+ couples column i+1 (m) to row i (m+1).
    for i in 0..3 {
        let m = SZ_DIAG[i + 1];
        raising[(i, i + 1)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lowering = raising.adjoint();
    let half = C64::new(0.5, 0.0);
    let sx = (raising + lowering) * half;
    let sy = (raising - lowering) * C64::new(0.0, -0.5);
    let sz = Matrix4::from_diagonal(&SZ_DIAG.map(|m| C64::new(m, 0.0)).into());
    SpinOperators { sx, sy, sz }
}

/// Parity (even-order) operator `(Sz² − 5/4)/2`, a shift of `D`.
pub fn parity_operator() -> Matrix4<C64> {
    Matrix4::from_diagonal(&PARITY_DIAG.map(|p| C64::new(p, 0.0)).into())
}

/// `(f+, f−) = γB0/2π ± 2·D/h` in Hz; `f−` is returned signed.
pub fn resonance_frequencies(params: &QuartetParams) -> (f64, f64) {
    (
        params.resonance_hz(Target::Plus),
        params.resonance_hz(Target::Minus),
    )
}

/// Pauli matrices `(σx, σy, σz)`.
pub fn pauli() -> [Matrix2<C64>; 3] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::i();
    [
        Matrix2::new(o, l, l, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(l, o, o, -l),
    ]
}

/// `(σ/2)·(ω1 cos φ1, ω1 sin φ1, Δω)` for one qubit.
///
/// The basis is `{|+3/2⟩, |+1/2⟩}` for [`Target::Plus`] and
/// `{|−1/2⟩, |−3/2⟩}` for [`Target::Minus`]; the matrix has the same form for
/// both.
pub fn qubit_block_hamiltonian(
    _target: Target,
    omega1: f64,
    phi1: f64,
    delta_omega: f64,
) -> Matrix2<C64> {
    let [sx, sy, sz] = pauli();
    (sx * C64::new(omega1 * phi1.cos(), 0.0)
        + sy * C64::new(omega1 * phi1.sin(), 0.0)
        + sz * C64::new(delta_omega, 0.0))
        * C64::new(0.5, 0.0)
}

/// Rotating-frame `H′(t)/ħ` for a set of tones and the two detuning channels.
///
/// `detuning_common` (e.g. `γ·B̃z`) enters as `δ·Sz` and shifts both qubits by
/// `+δ`; `detuning_parity` enters through [`parity_operator`] and shifts the
/// two qubits with opposite signs. Tones are checked against
/// [`RESONANCE_TOLERANCE_HZ`].
pub fn rotating_frame_hamiltonian(
    params: &QuartetParams,
    tones: &[Tone],
    detuning_common: f64,
    detuning_parity: f64,
    t: f64,
) -> Result<Matrix4<C64>> {
    rotating_frame_hamiltonian_with_tolerance(
        params,
        tones,
        detuning_common,
        detuning_parity,
        t,
        RESONANCE_TOLERANCE_HZ,
    )
}

pub fn rotating_frame_hamiltonian_with_tolerance(
    params: &QuartetParams,
    tones: &[Tone],
    detuning_common: f64,
    detuning_parity: f64,
    t: f64,
    tolerance_hz: f64,
) -> Result<Matrix4<C64>> {
    for tone in tones {
        check_tone(params, tone, tolerance_hz)?;
    }
    Ok(frame_hamiltonian(
        params,
        tones,
        detuning_common,
        detuning_parity,
        t,
    ))
}

/// Unchecked frame Hamiltonian; callers validate tones once up front.
pub(crate) fn frame_hamiltonian(
    params: &QuartetParams,
    tones: &[Tone],
    detuning_common: f64,
    detuning_parity: f64,
    t: f64,
) -> Matrix4<C64> {
    let mut h = Matrix4::<C64>::zeros();
    for i in 0..4 {
        h[(i, i)] = C64::new(
            detuning_common * SZ_DIAG[i] + detuning_parity * PARITY_DIAG[i],
            0.0,
        );
    }
    for tone in tones {
        let omega = tone.signed_angular(params);
        for target in Target::BOTH {
            // Circular drive: element γB1/2·⟨m+1|S+|m⟩ = (ω1/√3)/2·√3 = ω1/2
            // on both outer transitions.
            let residual = params.transition_angular(target) - omega;
            let k = target.offset();
            let element = C64::from_polar(tone.rabi / 2.0, residual * t - tone.phase);
            h[(k, k + 1)] += element;
            h[(k + 1, k)] += element.conj();
        }
    }
    h
}

/// Largest angular frequency scale present in the frame Hamiltonian.
pub(crate) fn max_frequency_scale(params: &QuartetParams, tones: &[Tone], detuning: f64) -> f64 {
    let mut scale = detuning.abs();
    for tone in tones {
        scale = scale.max(tone.rabi);
        let omega = tone.signed_angular(params);
        for target in Target::BOTH {
            scale = scale.max((params.transition_angular(target) - omega).abs());
        }
    }
    scale
}

/// The 2×2 block of a quartet operator belonging to `target`.
pub fn block(m: &Matrix4<C64>, target: Target) -> Matrix2<C64> {
    let k = target.offset();
    m.fixed_view::<2, 2>(k, k).into_owned()
}

/// Removes the `(tr/2)·1` part of a 2×2 matrix.
pub fn traceless(m: &Matrix2<C64>) -> Matrix2<C64> {
    let half_trace = m.trace() * C64::new(0.5, 0.0);
    m - Matrix2::identity() * half_trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn max_abs<const R: usize, const C: usize>(m: &nalgebra::SMatrix<C64, R, C>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn sz_is_diagonal_with_quartet_values() {
        let ops = spin_matrices();
        for (i, &m) in SZ_DIAG.iter().enumerate() {
            for j in 0..4 {
                let expected = if i == j { m } else { 0.0 };
                assert_eq!(ops.sz[(i, j)], C64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn ladder_element_between_plus_three_halves_and_plus_half() {
        let ops = spin_matrices();
        assert_relative_eq!(ops.sx[(0, 1)].re, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(ops.sx[(1, 2)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn spin_algebra_commutators() {
        let ops = spin_matrices();
        let i = C64::i();
        let c_xy = ops.sx * ops.sy - ops.sy * ops.sx - ops.sz * i;
        let c_yz = ops.sy * ops.sz - ops.sz * ops.sy - ops.sx * i;
        let c_zx = ops.sz * ops.sx - ops.sx * ops.sz - ops.sy * i;
        assert!(max_abs(&c_xy) < 1e-12);
        assert!(max_abs(&c_yz) < 1e-12);
        assert!(max_abs(&c_zx) < 1e-12);
        for m in [ops.sx, ops.sy, ops.sz] {
            assert!(max_abs(&(m - m.adjoint())) < 1e-15);
        }
        // S² = S(S+1)·1
        let s2 = ops.sx * ops.sx + ops.sy * ops.sy + ops.sz * ops.sz;
        assert!(max_abs(&(s2 - Matrix4::identity() * C64::new(3.75, 0.0))) < 1e-12);
    }

    #[test]
    fn parity_operator_is_shifted_sz_squared() {
        let ops = spin_matrices();
        let expected =
            (ops.sz_squared() - Matrix4::identity() * C64::new(1.25, 0.0)) * C64::new(0.5, 0.0);
        assert!(max_abs(&(parity_operator() - expected)) < 1e-15);
    }

    #[test]
    fn zero_field_gives_single_line_at_twice_d() {
        let params = QuartetParams {
            b0: 0.0,
            ..Default::default()
        };
        let (fp, fm) = resonance_frequencies(&params);
        assert_relative_eq!(fp, 70.0e6, epsilon = 1e-6);
        assert_relative_eq!(fm, -70.0e6, epsilon = 1e-6);
    }

    #[test]
    fn resonances_at_46_millitesla() {
        // 28.024e9 · 0.046 = 1289.104 MHz; ± 70 MHz.
        let (fp, fm) = resonance_frequencies(&QuartetParams::default());
        assert_relative_eq!(fp, 1359.104e6, max_relative = 1e-12);
        assert_relative_eq!(fm, 1219.104e6, max_relative = 1e-12);
        assert_eq!((fp / 1e5).round() / 10.0, 1359.1);
        assert_eq!((fm / 1e5).round() / 10.0, 1219.1);
    }

    #[test]
    fn doubling_b0_doubles_midpoint_and_keeps_splitting() {
        let p1 = QuartetParams::default();
        let p2 = QuartetParams {
            b0: 2.0 * p1.b0,
            ..p1
        };
        let (a, b) = resonance_frequencies(&p1);
        let (c, d) = resonance_frequencies(&p2);
        assert_relative_eq!((c + d) / 2.0, a + b, max_relative = 1e-12);
        assert_relative_eq!(c - d, 4.0 * p1.d_over_h, max_relative = 1e-12);
        assert_relative_eq!(a - b, 4.0 * p1.d_over_h, max_relative = 1e-12);
    }

    #[test]
    fn lac_guard() {
        let mut p = QuartetParams::default();
        assert!(p.check_lac().is_ok());
        p.b0 = 0.0;
        assert!(p.check_lac().is_ok());
        p.b0 = 1.0e-3; // 28 MHz < 70 MHz
        assert!(matches!(p.check_lac(), Err(Error::LacGuard { .. })));
    }

    #[test]
    fn parameter_invariants() {
        let ok = QuartetParams::default();
        assert!(ok.validate().is_ok());
        for bad in [
            QuartetParams { gamma: -1.0, ..ok },
            QuartetParams {
                d_over_h: 0.0,
                ..ok
            },
            QuartetParams { t2: 0.1e-6, ..ok },
            QuartetParams { t2_star: 0.0, ..ok },
            QuartetParams { chi: -0.1, ..ok },
            QuartetParams {
                sigma_f_1s: -1.0,
                ..ok
            },
            QuartetParams { b0: f64::NAN, ..ok },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn block_hamiltonian_examples() {
        let [sx, sy, sz] = pauli();
        let w = TAU * 10.0e6;
        let half = C64::new(0.5, 0.0);
        let h = qubit_block_hamiltonian(Target::Plus, w, 0.0, 0.0);
        assert!(max_abs(&(h - sx * half * C64::new(w, 0.0))) < 1e-6);
        let h = qubit_block_hamiltonian(Target::Plus, 0.0, 0.0, 3.0e6);
        assert!(max_abs(&(h - sz * C64::new(1.5e6, 0.0))) < 1e-9);
        let h = qubit_block_hamiltonian(Target::Plus, w, FRAC_PI_2, 0.0);
        assert!(max_abs(&(h - sy * half * C64::new(w, 0.0))) < 1e-6);
    }

    #[test]
    fn frame_without_tones_is_zero() {
        let h =
            rotating_frame_hamiltonian(&QuartetParams::default(), &[], 0.0, 0.0, 1.3e-7).unwrap();
        assert_eq!(max_abs(&h), 0.0);
    }

    #[test]
    fn single_plus_tone_gives_sigma_x_block_and_oscillating_cross_term() {
        let params = QuartetParams::default();
        let w = TAU * 10.0e6;
        let tone = Tone::resonant(&params, Target::Plus, w, 0.0);
        let [sx, ..] = pauli();
        let expected = sx * C64::new(w / 2.0, 0.0);
        for t in [0.0, 3.3e-9, 1.0e-7] {
            let h = rotating_frame_hamiltonian(&params, &[tone], 0.0, 0.0, t).unwrap();
            assert!(max_abs(&(block(&h, Target::Plus) - expected)) < 1e-6);
            // The − block sees the tone detuned by 4D/ħ.
            let cross = h[(2, 3)];
            assert_relative_eq!(cross.norm(), w / 2.0, max_relative = 1e-12);
            let phase = 4.0 * params.d_angular() * t;
            assert_relative_eq!(cross.re, w / 2.0 * (-phase).cos(), epsilon = 1e-3);
            assert_relative_eq!(cross.im, w / 2.0 * (-phase).sin(), epsilon = 1e-3);
            // No coupling between the blocks.
            assert_eq!(h[(1, 2)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn common_detuning_is_sigma_z_half_in_both_blocks() {
        let params = QuartetParams::default();
        let delta = params.gamma * 2.0e-6;
        let h = rotating_frame_hamiltonian(&params, &[], delta, 0.0, 0.0).unwrap();
        let [.., sz] = pauli();
        for target in Target::BOTH {
            let b = traceless(&block(&h, target));
            assert!(max_abs(&(b - sz * C64::new(delta / 2.0, 0.0))) < 1e-6);
        }
    }

    #[test]
    fn block_extraction_matches_qubit_hamiltonian() {
        let params = QuartetParams::default();
        let w = TAU * 7.0e6;
        for (target, phase) in [(Target::Plus, 0.4), (Target::Minus, 2.1)] {
            let tone = Tone::resonant(&params, target, w, phase);
            let delta = 1.3e6;
            let h = rotating_frame_hamiltonian(&params, &[tone], delta, 0.0, 0.0).unwrap();
            let expected = qubit_block_hamiltonian(target, w, phase, delta);
            assert!(max_abs(&(traceless(&block(&h, target)) - expected)) < 1e-6);
        }
    }

    #[test]
    fn parity_detuning_flips_between_blocks() {
        let params = QuartetParams::default();
        let d = 2.5e6;
        let hp = rotating_frame_hamiltonian(&params, &[], 0.0, d, 0.0).unwrap();
        let hm = rotating_frame_hamiltonian(&params, &[], 0.0, -d, 0.0).unwrap();
        assert!(max_abs(&(block(&hp, Target::Plus) - block(&hm, Target::Minus))) < 1e-12);
    }

    #[test]
    fn off_resonant_tone_is_rejected() {
        let params = QuartetParams::default();
        let tone = Tone {
            frequency: 1.30e9,
            rabi: 1.0e7,
            phase: 0.0,
            target: Target::Plus,
        };
        let err = rotating_frame_hamiltonian(&params, &[tone], 0.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::OffResonantTone { .. }));
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let params = QuartetParams::default();
        let tones = [
            Tone::resonant(&params, Target::Plus, 6.0e7, 0.3),
            Tone::resonant(&params, Target::Minus, 6.5e7, 2.0),
        ];
        for t in [0.0, 1.7e-9, 4.2e-8] {
            let h = rotating_frame_hamiltonian(&params, &tones, 1.0e6, -2.0e5, t).unwrap();
            let scale = max_abs(&h);
            assert!(max_abs(&(h - h.adjoint())) <= 1e-12 * scale);
        }
        let h = qubit_block_hamiltonian(Target::Minus, 1.0, SQRT_2, 0.3);
        assert!(max_abs(&(h - h.adjoint())) < 1e-15);
    }
}
