// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! State evolution of the quartet.
//!
//! Two engines are provided:
//!
//! - the block engine ([`propagate_block`], [`free_evolution`]) applies exact
//!   2×2 Pauli rotations to each qubit block;
//! - the numeric engine ([`propagate_numeric`]) integrates the full 4×4
//!   rotating-frame Hamiltonian with midpoint-sampled matrix exponentials and
//!   keeps every cross-talk term the block picture drops.
//!
//! Decoherence is phenomenological: [`apply_dephasing`] damps all coherences
//! at `1/T2`, and [`ensemble_average`] averages over a quasi-static Gaussian
//! detuning to produce `T2*` decay.

use nalgebra::{Matrix2, Matrix4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{self, QuartetParams, Target, Tone, PARITY_DIAG, SZ_DIAG};
use crate::{C64, TAU};

const STATE_TOLERANCE: f64 = 1e-9;

/// Density matrix of the quartet in the rotating frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4(Matrix4<C64>);

/// Bloch vector of one qubit block, normalized to the block population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

impl DensityMatrix4 {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(matrix: Matrix4<C64>) -> Result<Self> {
        let state = Self(matrix);
        state.check()?;
        Ok(state)
    }

    /// Diagonal state from basis populations (must sum to one).
    pub fn from_populations(populations: [f64; 4]) -> Result<Self> {
        Self::new(Matrix4::from_diagonal(
            &populations.map(|p| C64::new(p, 0.0)).into(),
        ))
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.0[(i, i)].re)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_part(&self.0)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Validates the state invariants to 1e−9.
    pub fn check(&self) -> Result<()> {
        if self
            .0
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("density matrix"));
        }
        if self.hermiticity_error() > STATE_TOLERANCE {
            return Err(invalid("state", "density matrix is not Hermitian"));
        }
        if (self.trace() - C64::new(1.0, 0.0)).norm() > STATE_TOLERANCE {
            return Err(invalid("state", "density matrix trace differs from 1"));
        }
        if self.min_eigenvalue() < -STATE_TOLERANCE {
            return Err(invalid("state", "density matrix has a negative eigenvalue"));
        }
        Ok(())
    }

    /// Total population of a qubit block.
    pub fn block_population(&self, target: Target) -> f64 {
        let k = target.offset();
        self.0[(k, k)].re + self.0[(k + 1, k + 1)].re
    }

    /// Bloch vector of `target` in its Pauli basis (`{|+3/2⟩,|+1/2⟩}` or
    /// `{|−1/2⟩,|−3/2⟩}`, first state = `+z`), normalized to the block
    /// population. An empty block returns the zero vector.
    pub fn bloch(&self, target: Target) -> BlochVector {
        let k = target.offset();
        let p = self.block_population(target);
        if p < 1e-15 {
            return BlochVector {
                x: 0.0,
                y: 0.0,
                z: 0.0,
            };
        }
        let coherence = self.0[(k, k + 1)];
        BlochVector {
            x: 2.0 * coherence.re / p,
            y: -2.0 * coherence.im / p,
            z: (self.0[(k, k)].re - self.0[(k + 1, k + 1)].re) / p,
        }
    }

    /// `(p_bright − p_dark)/p_block` of a qubit, where bright is `|±3/2⟩`.
    /// Equals `z` for the `+` qubit and `−z` for the `−` qubit.
    pub fn bright_polarization(&self, target: Target) -> f64 {
        let p = self.block_population(target);
        if p < 1e-15 {
            return 0.0;
        }
        let bright = self.0[(target.bright_index(), target.bright_index())].re;
        let dark = self.0[(target.dark_index(), target.dark_index())].re;
        (bright - dark) / p
    }

    /// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
    pub fn fidelity(&self, other: &DensityMatrix4) -> f64 {
        let sqrt_self = hermitian_sqrt(&self.0);
        let inner = hermitian_part(&(sqrt_self * other.0 * sqrt_self));
        let sum: f64 = inner
            .symmetric_eigenvalues()
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .sum();
        sum * sum
    }

    fn conjugate_by(&self, u: &Matrix4<C64>) -> Self {
        Self(u * self.0 * u.adjoint())
    }
}

fn hermitian_part(m: &Matrix4<C64>) -> Matrix4<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn hermitian_sqrt(m: &Matrix4<C64>) -> Matrix4<C64> {
    let eig = hermitian_part(m).symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// `exp(−i·H·t)` for a 2×2 Hermitian `H`, via `H = c·1 + r·σ`.
pub fn block_unitary(h: &Matrix2<C64>, duration: f64) -> Matrix2<C64> {
    let c = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let rx = h[(0, 1)].re;
    let ry = -h[(0, 1)].im;
    let rz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let r = (rx * rx + ry * ry + rz * rz).sqrt();
    let angle = r * duration;
    let (sin, cos) = angle.sin_cos();
    let global = C64::from_polar(1.0, -c * duration);
    if r == 0.0 {
        return Matrix2::identity() * global;
    }
    let [sx, sy, sz] = model::pauli();
    let axis = (sx * C64::new(rx, 0.0) + sy * C64::new(ry, 0.0) + sz * C64::new(rz, 0.0))
        * C64::new(1.0 / r, 0.0);
    (Matrix2::identity() * C64::new(cos, 0.0) - axis * C64::new(0.0, sin)) * global
}

/// Block-diagonal quartet unitary `U+ ⊕ U−`.
pub fn block_diagonal(u_plus: &Matrix2<C64>, u_minus: &Matrix2<C64>) -> Matrix4<C64> {
    let mut u = Matrix4::zeros();
    u.fixed_view_mut::<2, 2>(0, 0).copy_from(u_plus);
    u.fixed_view_mut::<2, 2>(2, 2).copy_from(u_minus);
    u
}

/// Applies `U+ ⊕ U−` to the state.
pub fn apply_block_unitaries(
    state: &DensityMatrix4,
    u_plus: &Matrix2<C64>,
    u_minus: &Matrix2<C64>,
) -> DensityMatrix4 {
    state.conjugate_by(&block_diagonal(u_plus, u_minus))
}

/// Exact rotation of one qubit block under
/// `(σ/2)·(ω1 cos φ1, ω1 sin φ1, Δω)` for `duration`; the other block is left
/// untouched, so inter-block coherences pick up the block's phase.
pub fn propagate_block(
    state: &DensityMatrix4,
    target: Target,
    omega1: f64,
    phi1: f64,
    delta_omega: f64,
    duration: f64,
) -> DensityMatrix4 {
    let u = block_unitary(
        &model::qubit_block_hamiltonian(target, omega1, phi1, delta_omega),
        duration,
    );
    match target {
        Target::Plus => apply_block_unitaries(state, &u, &Matrix2::identity()),
        Target::Minus => apply_block_unitaries(state, &Matrix2::identity(), &u),
    }
}

/// Free evolution under `δ(t)·Sz + ε(t)·P` given the accumulated phases
/// `∫δ dt` and `∫ε dt`. Exact for any time dependence because the generator is
/// diagonal.
pub fn free_evolution(
    state: &DensityMatrix4,
    common_phase: f64,
    parity_phase: f64,
) -> DensityMatrix4 {
    let phases: [f64; 4] =
        std::array::from_fn(|j| common_phase * SZ_DIAG[j] + parity_phase * PARITY_DIAG[j]);
    let mut m = state.0;
    for j in 0..4 {
        for k in 0..4 {
            if j != k {
                m[(j, k)] *= C64::from_polar(1.0, -(phases[j] - phases[k]));
            }
        }
    }
    DensityMatrix4(m)
}

/// Damps every off-diagonal element (intra- and inter-block) by
/// `exp(−duration/T2)`; populations are untouched.
pub fn apply_dephasing(state: &DensityMatrix4, duration: f64, t2: f64) -> Result<DensityMatrix4> {
    if !(t2 > 0.0) {
        return Err(invalid("t2", "T2 must be positive"));
    }
    Ok(dephase(state, (-duration / t2).exp()))
}

pub(crate) fn dephase(state: &DensityMatrix4, factor: f64) -> DensityMatrix4 {
    let mut m = state.0;
    for j in 0..4 {
        for k in 0..4 {
            if j != k {
                m[(j, k)] *= factor;
            }
        }
    }
    DensityMatrix4(m)
}

/// Instantaneous detuning of both channels in rad/s.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Detuning {
    /// Magnetic-like channel, same sign on both qubits (`δ·Sz`).
    pub common: f64,
    /// Even-order channel, opposite sign on the two qubits (`ε·P`).
    pub parity: f64,
}

/// Time interval on the absolute sequence clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub duration: f64,
}

/// Integrates `ρ̇ = −i[H′(t), ρ]` (plus optional dephasing) with piecewise
/// constant exponentials sampled at each step midpoint.
///
/// The step actually used is `duration/⌈duration/dt⌉ ≤ dt`. `dt` must not
/// exceed `1/(50·f_max)` where `f_max` is the largest frequency scale in `H′`.
pub fn propagate_numeric<F>(
    state: &DensityMatrix4,
    params: &QuartetParams,
    tones: &[Tone],
    detuning: F,
    window: Window,
    dt: f64,
    dephasing_t2: Option<f64>,
) -> Result<DensityMatrix4>
where
    F: Fn(f64) -> Detuning,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("dt", "time step must be positive"));
    }
    if !(window.duration >= 0.0) {
        return Err(invalid("duration", "must be non-negative"));
    }
    for tone in tones {
        model::check_tone(params, tone, model::RESONANCE_TOLERANCE_HZ)?;
    }
    let probe = [0.0, 0.5, 1.0]
        .map(|f| detuning(window.start + f * window.duration))
        .iter()
        .map(|d| d.common.abs() + d.parity.abs())
        .fold(0.0, f64::max);
    let scale_hz = model::max_frequency_scale(params, tones, probe) / TAU;
    if scale_hz > 0.0 {
        let limit = 1.0 / (50.0 * scale_hz);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt, limit });
        }
    }
    if window.duration == 0.0 {
        return Ok(state.clone());
    }
    let steps = (window.duration / dt).ceil().max(1.0) as usize;
    let h_step = window.duration / steps as f64;
    let damping = match dephasing_t2 {
        Some(t2) if t2 > 0.0 => Some((-h_step / t2).exp()),
        Some(_) => return Err(invalid("t2", "T2 must be positive")),
        None => None,
    };
    let mut rho = state.clone();
    let minus_i_dt = C64::new(0.0, -h_step);
    for n in 0..steps {
        let t_mid = window.start + (n as f64 + 0.5) * h_step;
        let d = detuning(t_mid);
        let h = model::frame_hamiltonian(params, tones, d.common, d.parity, t_mid);
        let u = (h * minus_i_dt).exp();
        rho = rho.conjugate_by(&u);
        if let Some(factor) = damping {
            rho = dephase(&rho, factor);
        }
    }
    if rho.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("numeric propagation"));
    }
    Ok(rho)
}

/// Averages `run(δ)` over `n_samples` quasi-static detunings `δ ~ N(0, σ)`.
///
/// Draws come from one seeded ChaCha stream in index order, samples are
/// evaluated in parallel, and the reduction runs in index order, so the result
/// is bit-identical for a given seed regardless of thread count. `σ = 0` runs
/// once.
pub fn ensemble_average<F>(run: F, sigma: f64, n_samples: usize, seed: u64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    if n_samples == 0 {
        return Err(invalid("n_samples", "at least one sample is required"));
    }
    if !(sigma >= 0.0) {
        return Err(invalid("sigma", "detuning spread must be non-negative"));
    }
    if sigma == 0.0 {
        return run(0.0);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..n_samples).map(|_| normal.sample(&mut rng)).collect();
    let results: Vec<Vec<f64>> = draws
        .par_iter()
        .map(|&delta| run(delta))
        .collect::<Result<_>>()?;
    let len = results[0].len();
    let mut mean = vec![0.0; len];
    for r in &results {
        if r.len() != len {
            return Err(invalid(
                "run",
                "ensemble members returned different lengths",
            ));
        }
        for (acc, v) in mean.iter_mut().zip(r) {
            *acc += v;
        }
    }
    let n = n_samples as f64;
    mean.iter_mut().for_each(|v| *v /= n);
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photophysics;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn omega1() -> f64 {
        TAU * 10.0e6
    }

    #[test]
    fn duplex_pi_pulse_inverts_populations() {
        let rho = photophysics::initialize();
        let t = PI / omega1();
        let rho = propagate_block(&rho, Target::Plus, omega1(), 0.0, 0.0, t);
        let rho = propagate_block(&rho, Target::Minus, omega1(), PI, 0.0, t);
        let p = rho.populations();
        for (got, want) in p.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
        rho.check().unwrap();
    }

    #[test]
    fn half_pi_about_x_points_plus_qubit_along_y() {
        let rho = photophysics::initialize();
        assert_relative_eq!(rho.bloch(Target::Plus).z, -1.0);
        let rho = propagate_block(&rho, Target::Plus, omega1(), 0.0, 0.0, FRAC_PI_2 / omega1());
        let b = rho.bloch(Target::Plus);
        assert_relative_eq!(b.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(b.y, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn half_pi_about_minus_x_points_minus_qubit_along_y() {
        let rho = photophysics::initialize();
        let rho = propagate_block(&rho, Target::Minus, omega1(), PI, 0.0, FRAC_PI_2 / omega1());
        let b = rho.bloch(Target::Minus);
        assert_relative_eq!(b.y, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_duration_is_identity() {
        let rho = photophysics::initialize();
        let out = propagate_block(&rho, Target::Plus, omega1(), 0.3, 1e6, 0.0);
        assert_eq!(out, rho);
        assert_eq!(apply_dephasing(&rho, 0.0, 1e-6).unwrap(), rho);
    }

    #[test]
    fn dephasing_defining_property() {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.5, 0.0);
        m[(1, 0)] = C64::new(0.5, 0.0);
        let rho = DensityMatrix4::new(m).unwrap();
        let out = apply_dephasing(&rho, 2.1e-6, 2.1e-6).unwrap();
        assert_relative_eq!(
            out.matrix()[(0, 1)].re,
            0.5 * (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_relative_eq!(out.matrix()[(0, 1)].re, 0.1839, epsilon = 1e-4);
        assert_eq!(out.populations(), rho.populations());
        assert!(apply_dephasing(&rho, 1.0, 0.0).is_err());
    }

    #[test]
    fn echo_envelope_from_dephasing() {
        // Two free intervals of τ each: coherence decays by e^{−2τ/T2}.
        let t2 = 2.1e-6;
        let tau = 1.05e-6;
        let rho = photophysics::initialize();
        let rho = propagate_block(&rho, Target::Plus, omega1(), 0.0, 0.0, FRAC_PI_2 / omega1());
        let c0 = rho.bloch(Target::Plus).y;
        let rho = apply_dephasing(&rho, tau, t2).unwrap();
        let rho = propagate_block(&rho, Target::Plus, omega1(), 0.0, 0.0, PI / omega1());
        let rho = apply_dephasing(&rho, tau, t2).unwrap();
        let c = rho.bloch(Target::Plus).y;
        assert_relative_eq!(c / c0, -(-1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn block_unitary_matches_matrix_exponential() {
        let h = model::qubit_block_hamiltonian(Target::Plus, 3.0, 0.7, -1.2);
        let h = h + Matrix2::identity() * C64::new(0.4, 0.0);
        let t = 0.83;
        let expected = (h * C64::new(0.0, -t)).exp();
        let got = block_unitary(&h, t);
        let err = (got - expected)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn free_evolution_phase_sign() {
        // δ·Sz rotates both qubits' Bloch vectors the same way about +z.
        let rho = photophysics::initialize();
        let rho = propagate_block(&rho, Target::Plus, omega1(), 0.0, 0.0, FRAC_PI_2 / omega1());
        let rho = propagate_block(&rho, Target::Minus, omega1(), PI, 0.0, FRAC_PI_2 / omega1());
        let out = free_evolution(&rho, 0.3, 0.0);
        for target in Target::BOTH {
            let b = out.bloch(target);
            assert_relative_eq!(b.x, -(0.3f64).sin(), epsilon = 1e-12);
            assert_relative_eq!(b.y, (0.3f64).cos(), epsilon = 1e-12);
        }
        let out = free_evolution(&rho, 0.0, 0.3);
        assert_relative_eq!(out.bloch(Target::Plus).x, -(0.3f64).sin(), epsilon = 1e-12);
        assert_relative_eq!(out.bloch(Target::Minus).x, (0.3f64).sin(), epsilon = 1e-12);
    }

    #[test]
    fn numeric_engine_leaves_state_alone_without_drive() {
        let params = QuartetParams::default();
        let rho = photophysics::initialize();
        let out = propagate_numeric(
            &rho,
            &params,
            &[],
            |_| Detuning::default(),
            Window {
                start: 0.0,
                duration: 1e-6,
            },
            1e-10,
            None,
        )
        .unwrap();
        assert_eq!(out.populations(), rho.populations());
    }

    #[test]
    fn numeric_engine_rejects_coarse_steps() {
        let params = QuartetParams::default();
        let tones = [Tone::resonant(&params, Target::Plus, omega1(), 0.0)];
        let err = propagate_numeric(
            &photophysics::initialize(),
            &params,
            &tones,
            |_| Detuning::default(),
            Window {
                start: 0.0,
                duration: 5e-8,
            },
            1e-9,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { .. }));
    }

    #[test]
    fn numeric_single_tone_pi_pulse_matches_block_engine() {
        let params = QuartetParams::default();
        let tones = [Tone::resonant(&params, Target::Plus, omega1(), 0.0)];
        let t = PI / omega1();
        let rho0 = photophysics::initialize();
        let run = |dt: f64| {
            propagate_numeric(
                &rho0,
                &params,
                &tones,
                |_| Detuning::default(),
                Window {
                    start: 0.0,
                    duration: t,
                },
                dt,
                None,
            )
            .unwrap()
        };
        let fine = run(1e-10);
        let finer = run(5e-11);
        // Integrator converged: halving dt changes nothing visible.
        assert!(fine.fidelity(&finer) > 1.0 - 1e-9);
        let block = propagate_block(&rho0, Target::Plus, omega1(), 0.0, 0.0, t);
        assert!(block.fidelity(&fine) >= 0.999, "{}", block.fidelity(&fine));
        assert_relative_eq!(fine.purity(), rho0.purity(), epsilon = 1e-8);
    }

    #[test]
    fn duplex_numeric_pi_pulse_crosstalk_is_small() {
        let params = QuartetParams::default();
        let tones = [
            Tone::resonant(&params, Target::Plus, omega1(), 0.0),
            Tone::resonant(&params, Target::Minus, omega1(), PI),
        ];
        let out = propagate_numeric(
            &photophysics::initialize(),
            &params,
            &tones,
            |_| Detuning::default(),
            Window {
                start: 0.0,
                duration: PI / omega1(),
            },
            1e-10,
            None,
        )
        .unwrap();
        let p = out.populations();
        assert!(p[1] <= 0.01 && p[2] <= 0.01, "{p:?}");
        assert!(p[0] >= 0.49 && p[3] >= 0.49, "{p:?}");
        out.check().unwrap();
    }

    #[test]
    fn ensemble_with_zero_spread_is_single_run() {
        let run = |d: f64| Ok(vec![d.cos() + 1.0, 2.0]);
        assert_eq!(ensemble_average(run, 0.0, 50, 7).unwrap(), vec![2.0, 2.0]);
        assert!(ensemble_average(run, 1.0, 0, 7).is_err());
    }

    #[test]
    fn ensemble_is_deterministic_under_seed() {
        let run = |d: f64| Ok(vec![(d * 1e-7).cos()]);
        let a = ensemble_average(run, 1e7, 200, 3).unwrap();
        let b = ensemble_average(run, 1e7, 200, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ramsey_coherence_decays_as_gaussian() {
        // Oracle: E[cos(δt)] = exp(−σ²t²/2) for δ ~ N(0, σ).
        let sigma = 1.0e7;
        let times: Vec<f64> = (0..6).map(|i| i as f64 * 5e-8).collect();
        let rho = propagate_block(
            &photophysics::initialize(),
            Target::Plus,
            omega1(),
            0.0,
            0.0,
            FRAC_PI_2 / omega1(),
        );
        let run = |delta: f64| {
            Ok(times
                .iter()
                .map(|&t| free_evolution(&rho, delta * t, 0.0).bloch(Target::Plus).y)
                .collect())
        };
        let avg = ensemble_average(run, sigma, 20_000, 11).unwrap();
        for (t, v) in times.iter().zip(avg) {
            let expected = (-(sigma * t).powi(2) / 2.0).exp();
            assert!((v - expected).abs() < 0.02, "t={t} got {v} want {expected}");
        }
    }

    #[test]
    fn fidelity_of_identical_and_orthogonal_states() {
        let a = DensityMatrix4::from_populations([0.0, 0.5, 0.5, 0.0]).unwrap();
        let b = DensityMatrix4::from_populations([0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_relative_eq!(a.fidelity(&a), 1.0, epsilon = 1e-12);
        assert_relative_eq!(a.fidelity(&b), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(DensityMatrix4::from_populations([0.5, 0.5, 0.5, 0.0]).is_err());
        assert!(DensityMatrix4::from_populations([1.2, -0.2, 0.0, 0.0]).is_err());
        let mut m = Matrix4::<C64>::zeros();
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix4::new(m).is_err());
    }
}
