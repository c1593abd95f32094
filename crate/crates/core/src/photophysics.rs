// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Optical initialization and spin-dependent fluorescence readout.
//!
//! The optical cycle is reduced to two facts: pumping leaves `|+1/2⟩` and
//! `|−1/2⟩` equally populated, and `|±3/2⟩` fluoresce brighter by a relative
//! amount `chi`. Readout noise is additive Gaussian on the complementary
//! signal `F` with `σ_F(T) = σ_F(1)/√T`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::DensityMatrix4;
use crate::error::{invalid, Error, Result};
use crate::model::QuartetParams;

/// Contrast and noise parameters of the optical readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    /// Relative fluorescence excess of `|±3/2⟩`.
    pub chi: f64,
    /// Noise of `F` for 1 s of integration.
    pub sigma_f_1s: f64,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self::from(&QuartetParams::default())
    }
}

impl From<&QuartetParams> for ReadoutModel {
    fn from(p: &QuartetParams) -> Self {
        Self {
            chi: p.chi,
            sigma_f_1s: p.sigma_f_1s,
        }
    }
}

impl ReadoutModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.chi >= 0.0) {
            return Err(invalid("chi", "contrast coefficient must be non-negative"));
        }
        if !(self.sigma_f_1s >= 0.0) {
            return Err(invalid("sigma_f_1s", "readout noise must be non-negative"));
        }
        Ok(())
    }

    /// Noise of `F` after integrating for `integration_time` seconds.
    pub fn sigma_at(&self, integration_time: f64) -> f64 {
        self.sigma_f_1s / integration_time.sqrt()
    }
}

/// State after the non-resonant laser pulse: `diag(0, ½, ½, 0)`.
pub fn initialize() -> DensityMatrix4 {
    DensityMatrix4::from_populations([0.0, 0.5, 0.5, 0.0]).expect("initial state is valid")
}

/// Relative intensity `1 + chi·(p(+3/2) + p(−3/2))`.
pub fn fluorescence(state: &DensityMatrix4, model: &ReadoutModel) -> f64 {
    let p = state.populations();
    1.0 + model.chi * (p[0] + p[3])
}

/// Contrast `(I − Ī)/Ī` with `Ī` the mean of the series.
pub fn contrast_trace(intensities: &[f64]) -> Result<Vec<f64>> {
    if intensities.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mean = intensities.iter().sum::<f64>() / intensities.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::NonPositiveDenominator(format!(
            "mean intensity {mean} must be positive"
        )));
    }
    Ok(intensities.iter().map(|i| (i - mean) / mean).collect())
}

/// Complementary echo signal `F = 2(Ia − Ib)/(Ia + Ib)`.
pub fn complementary_signal(i_a: f64, i_b: f64) -> Result<f64> {
    let sum = i_a + i_b;
    if !(sum > 0.0) {
        return Err(Error::NonPositiveDenominator(format!(
            "Ia + Ib = {sum} must be positive"
        )));
    }
    Ok(2.0 * (i_a - i_b) / sum)
}

/// Adds i.i.d. Gaussian noise of standard deviation `σ_F(1)/√T` to each
/// point, from a ChaCha stream seeded with `seed`.
pub fn add_readout_noise(
    signal: &[f64],
    model: &ReadoutModel,
    integration_time: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(integration_time > 0.0) {
        return Err(invalid("integration_time", "must be positive"));
    }
    model.validate()?;
    let sigma = model.sigma_at(integration_time);
    if sigma == 0.0 {
        return Ok(signal.to_vec());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid("sigma_f_1s", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(signal.iter().map(|s| s + normal.sample(&mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Target;
    use approx::assert_relative_eq;

    fn model() -> ReadoutModel {
        ReadoutModel {
            chi: 0.014,
            sigma_f_1s: 0.0014,
        }
    }

    #[test]
    fn initialized_state() {
        let rho = initialize();
        assert_eq!(rho.populations(), [0.0, 0.5, 0.5, 0.0]);
        assert_relative_eq!(rho.trace().re, 1.0);
        assert_relative_eq!(rho.bloch(Target::Plus).z, -1.0);
        for target in Target::BOTH {
            assert_relative_eq!(rho.bright_polarization(target), -1.0);
        }
    }

    #[test]
    fn fluorescence_levels() {
        assert_relative_eq!(fluorescence(&initialize(), &model()), 1.0);
        let duplex = DensityMatrix4::from_populations([0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_relative_eq!(fluorescence(&duplex, &model()), 1.014, epsilon = 1e-15);
        let simplex = DensityMatrix4::from_populations([0.5, 0.0, 0.5, 0.0]).unwrap();
        assert_relative_eq!(fluorescence(&simplex, &model()), 1.007, epsilon = 1e-15);
    }

    #[test]
    fn duplex_change_is_twice_simplex_change() {
        let m = model();
        let base = fluorescence(&initialize(), &m);
        let duplex = DensityMatrix4::from_populations([0.5, 0.0, 0.0, 0.5]).unwrap();
        let simplex = DensityMatrix4::from_populations([0.5, 0.0, 0.5, 0.0]).unwrap();
        assert_relative_eq!(
            fluorescence(&duplex, &m) - base,
            2.0 * (fluorescence(&simplex, &m) - base),
            epsilon = 1e-15
        );
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(contrast_trace(&[2.0, 2.0, 2.0]).unwrap(), vec![0.0; 3]);
        let c = contrast_trace(&[1.000, 1.014]).unwrap();
        assert_relative_eq!(c[0], -0.00695, epsilon = 5e-6);
        assert_relative_eq!(c[1], 0.00695, epsilon = 5e-6);
        assert!(matches!(contrast_trace(&[]), Err(Error::EmptySeries)));
        assert!(contrast_trace(&[-1.0, 0.5]).is_err());
    }

    #[test]
    fn complementary_examples() {
        assert_eq!(complementary_signal(1.2, 1.2).unwrap(), 0.0);
        assert_relative_eq!(
            complementary_signal(1.014, 1.0).unwrap(),
            0.013903,
            epsilon = 1e-6
        );
        assert_eq!(
            complementary_signal(1.0, 1.014).unwrap(),
            -complementary_signal(1.014, 1.0).unwrap()
        );
        assert!(complementary_signal(0.0, 0.0).is_err());
    }

    #[test]
    fn noise_free_model_is_identity() {
        let m = ReadoutModel {
            chi: 0.014,
            sigma_f_1s: 0.0,
        };
        let s = [0.1, 0.2];
        assert_eq!(add_readout_noise(&s, &m, 3.0, 1).unwrap(), s.to_vec());
        assert!(add_readout_noise(&s, &m, 0.0, 1).is_err());
    }

    #[test]
    fn noise_level_at_80_seconds() {
        assert_relative_eq!(model().sigma_at(80.0), 0.000157, epsilon = 1e-6);
    }

    #[test]
    fn noise_sample_std_matches_model() {
        let zeros = vec![0.0; 10_000];
        let noisy = add_readout_noise(&zeros, &model(), 1.0, 42).unwrap();
        let mean = noisy.iter().sum::<f64>() / noisy.len() as f64;
        let var = noisy.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (noisy.len() - 1) as f64;
        assert_relative_eq!(var.sqrt(), 0.0014, max_relative = 0.03);
        assert_eq!(noisy, add_readout_noise(&zeros, &model(), 1.0, 42).unwrap());
    }

    #[test]
    fn noise_variance_scales_inversely_with_time() {
        let zeros = vec![0.0; 20_000];
        let var = |t: f64| {
            let n = add_readout_noise(&zeros, &model(), t, 5).unwrap();
            n.iter().map(|v| v * v).sum::<f64>() / n.len() as f64
        };
        for t in [0.1, 1.0, 10.0] {
            assert_relative_eq!(var(t) * t, 0.0014f64.powi(2), max_relative = 0.05);
        }
    }
}
