// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! High-level scans, fits and sensitivity analysis.
//!
//! Every scan returns a [`ScanResult`]: one axis, one signal column per
//! simulated mode (each with an optional fit) and a metadata map complete
//! enough to re-run it. [`ScanResult::write_csv`] emits the plot-ready file.

pub mod fit;
mod scans;
pub mod sensitivity;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{QuartetParams, Target};

pub use fit::{
    fit_echo_envelope, fit_linear_amplitude, fit_rabi, EchoFit, FitParam, FitReport, RabiFit,
};
pub use scans::{
    ac_response_amplitude_scan, ac_response_tau_scan, echo_envelope_scan, echo_peak_scan,
    rabi_scan, ScanSetup,
};
pub use sensitivity::{
    accumulated_phase, fit_power_law, min_detectable_field, monte_carlo_field_estimate,
    sensitivity, EchoResponse, FieldEstimate, SensitivityReport,
};

/// A fit attached to a signal column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub report: FitReport,
    /// Model evaluated on the scan axis.
    pub curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub name: String,
    pub values: Vec<f64>,
    pub fit: Option<Fit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub signals: Vec<Signal>,
    /// Signal whose fit curve and residual are written to CSV.
    pub fitted: Option<String>,
    pub metadata: BTreeMap<String, String>,
}

impl ScanResult {
    pub fn new(axis_name: impl Into<String>, axis: Vec<f64>) -> Self {
        Self {
            axis_name: axis_name.into(),
            axis,
            signals: Vec::new(),
            fitted: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn signal(&self, name: &str) -> Option<&Signal> {
        self.signals.iter().find(|s| s.name == name)
    }

    pub fn values(&self, name: &str) -> Option<&[f64]> {
        self.signal(name).map(|s| s.values.as_slice())
    }

    pub fn fit(&self, name: &str) -> Option<&FitReport> {
        self.signal(name)
            .and_then(|s| s.fit.as_ref())
            .map(|f| &f.report)
    }

    pub fn push_signal(&mut self, name: impl Into<String>, values: Vec<f64>, fit: Option<Fit>) {
        self.signals.push(Signal {
            name: name.into(),
            values,
            fit,
        });
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.axis.len();
        for s in &self.signals {
            if s.values.len() != n {
                return Err(invalid(
                    "signals",
                    format!("column `{}` length differs from axis", s.name),
                ));
            }
            if let Some(f) = &s.fit {
                if f.curve.len() != n {
                    return Err(invalid(
                        "fit",
                        format!("fit curve of `{}` length differs", s.name),
                    ));
                }
            }
        }
        if let Some(name) = &self.fitted {
            if self.signal(name).and_then(|s| s.fit.as_ref()).is_none() {
                return Err(invalid("fitted", format!("`{name}` has no fit")));
            }
        }
        Ok(())
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.axis_name.clone()];
        h.extend(self.signals.iter().map(|s| s.name.clone()));
        if self.fitted.is_some() {
            h.push("fit".into());
            h.push("residual".into());
        }
        h
    }

    /// Writes `# key = value` metadata lines followed by the CSV table.
    /// Floats carry 9 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        self.validate()?;
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}")?;
        }
        for s in &self.signals {
            if let Some(f) = &s.fit {
                for p in &f.report.params {
                    writeln!(
                        out,
                        "# fit.{}.{} = {} +/- {}",
                        s.name,
                        p.name,
                        format_float(p.value),
                        format_float(p.stderr)
                    )?;
                }
            }
        }
        let fitted = self
            .fitted
            .as_deref()
            .and_then(|name| self.signal(name))
            .and_then(|s| s.fit.as_ref().map(|f| (s, f)));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header()).map_err(csv_error)?;
        for (i, x) in self.axis.iter().enumerate() {
            let mut row = vec![format_float(*x)];
            row.extend(self.signals.iter().map(|s| format_float(s.values[i])));
            if let Some((s, f)) = fitted {
                row.push(format_float(f.curve[i]));
                row.push(format_float(s.values[i] - f.curve[i]));
            }
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Scientific notation with 9 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

/// Continuous-wave spectrum as a sum of Lorentzians with peak height equal
/// to their weight `w = drive_scale`.
///
/// At `B0 = 0` both qubits share one line at `2·D/h` of weight `2w`; otherwise
/// each qubit contributes a line of weight `w` at `|f±|`. Every line has FWHM
/// `linewidth`, so the integrated weight does not depend on `B0`.
pub fn cw_spectrum(
    params: &QuartetParams,
    frequencies: &[f64],
    linewidth: f64,
    drive_scale: f64,
) -> Result<Vec<f64>> {
    params.validate()?;
    if !(linewidth > 0.0) || !linewidth.is_finite() {
        return Err(invalid("linewidth", "must be positive"));
    }
    if !(drive_scale >= 0.0) {
        return Err(invalid("drive_scale", "must be non-negative"));
    }
    let lines: Vec<(f64, f64)> = if params.b0 == 0.0 {
        vec![(2.0 * params.d_over_h, 2.0 * drive_scale)]
    } else {
        Target::BOTH
            .iter()
            .map(|&t| (params.resonance_hz(t).abs(), drive_scale))
            .collect()
    };
    let hw = 0.5 * linewidth;
    Ok(frequencies
        .iter()
        .map(|&f| {
            lines
                .iter()
                .map(|&(f0, w)| w * hw * hw / ((f - f0).powi(2) + hw * hw))
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_field_single_line() {
        let params = QuartetParams {
            b0: 0.0,
            ..Default::default()
        };
        let f: Vec<f64> = (0..1401).map(|i| 60e6 + 1e4 * i as f64).collect();
        let s = cw_spectrum(&params, &f, 1e6, 1.0).unwrap();
        let (imax, vmax) = s
            .iter()
            .enumerate()
            .fold((0, 0.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        assert_relative_eq!(f[imax], 70e6, max_relative = 1e-9);
        assert_relative_eq!(vmax, 2.0);
    }

    #[test]
    fn field_splits_line_into_half_height_pair() {
        let params = QuartetParams::default();
        let (fp, fm) = crate::model::resonance_frequencies(&params);
        let s = cw_spectrum(&params, &[fp, fm.abs()], 1e6, 1.0).unwrap();
        assert_relative_eq!(s[0], 1.0, max_relative = 1e-4);
        assert_relative_eq!(s[1], 1.0, max_relative = 1e-4);
        assert!(cw_spectrum(&params, &[1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn integrated_weight_is_field_independent() {
        let integral = |b0: f64| {
            let params = QuartetParams {
                b0,
                ..Default::default()
            };
            let df = 5e3;
            let f: Vec<f64> = (0..2_000_000).map(|i| -5e9 + df * i as f64).collect();
            cw_spectrum(&params, &f, 1e6, 1.0)
                .unwrap()
                .iter()
                .sum::<f64>()
                * df
        };
        assert_relative_eq!(integral(0.0), integral(46e-3), max_relative = 1e-3);
    }

    #[test]
    fn csv_layout() {
        let mut r = ScanResult::new("t_s", vec![0.0, 1e-9]);
        r.push_signal("duplex", vec![0.5, 0.25], None);
        r.meta("seed", 7);
        let text = r.to_csv_string().unwrap();
        assert_eq!(
            text,
            "# seed = 7\nt_s,duplex\n0.00000000e0,5.00000000e-1\n1.00000000e-9,2.50000000e-1\n"
        );
        r.push_signal("bad", vec![1.0], None);
        assert!(r.validate().is_err());
    }
}
