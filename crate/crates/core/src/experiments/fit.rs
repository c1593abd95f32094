// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Curve fits: damped Rabi cosine, echo envelope and the linear amplitude of
//! the AC response.
//!
//! Nonlinear fits use Levenberg–Marquardt with analytic Jacobians; standard
//! errors come from `s²(JᵀJ)⁻¹` at the optimum.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DMatrix, DVector, Dyn};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TAU;

/// Iteration bound (in units of Jacobian evaluations per parameter).
pub const MAX_ITERATIONS: usize = 500;
/// Relative parameter change at which the optimizer stops.
pub const XTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub params: Vec<FitParam>,
    /// Residual sum of squares.
    pub rss: f64,
    pub dof: usize,
}

impl FitReport {
    pub fn get(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.value)
    }
}

/// `C(t) = −A_R·cos(ω1·t)·e^(−t/T2*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiFit {
    pub amplitude: f64,
    pub omega1: f64,
    pub t2_star: f64,
    pub amplitude_err: f64,
    pub omega1_err: f64,
    pub t2_star_err: f64,
}

impl RabiFit {
    pub fn eval(&self, t: f64) -> f64 {
        -self.amplitude * (self.omega1 * t).cos() * (-t / self.t2_star).exp()
    }

    pub fn report(&self) -> FitReport {
        FitReport {
            model: "-A_R*cos(omega1*t)*exp(-t/T2_star)".into(),
            params: vec![
                param("A_R", self.amplitude, self.amplitude_err),
                param("omega1", self.omega1, self.omega1_err),
                param("T2_star", self.t2_star, self.t2_star_err),
            ],
            rss: f64::NAN,
            dof: 0,
        }
    }
}

/// `F(τ) = A·e^(−2τ/T2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoFit {
    pub amplitude: f64,
    pub t2: f64,
    pub amplitude_err: f64,
    pub t2_err: f64,
}

impl EchoFit {
    pub fn eval(&self, tau: f64) -> f64 {
        self.amplitude * (-2.0 * tau / self.t2).exp()
    }

    pub fn report(&self) -> FitReport {
        FitReport {
            model: "A*exp(-2*tau/T2)".into(),
            params: vec![
                param("A", self.amplitude, self.amplitude_err),
                param("T2", self.t2, self.t2_err),
            ],
            rss: f64::NAN,
            dof: 0,
        }
    }
}

/// Amplitude of `F = A·g` for a known shape `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub amplitude: f64,
    pub amplitude_err: f64,
    pub rss: f64,
}

fn param(name: &str, value: f64, stderr: f64) -> FitParam {
    FitParam {
        name: name.into(),
        value,
        stderr,
    }
}

type Model = fn(&[f64], f64, &mut [f64]) -> f64;

struct CurveProblem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    model: Model,
    p: DVector<f64>,
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for CurveProblem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, p: &DVector<f64>) {
        self.p.copy_from(p);
    }

    fn params(&self) -> DVector<f64> {
        self.p.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let mut grad = vec![0.0; self.p.len()];
        let r = DVector::from_iterator(
            self.x.len(),
            self.x
                .iter()
                .zip(self.y)
                .map(|(&x, &y)| (self.model)(self.p.as_slice(), x, &mut grad) - y),
        );
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let n = self.p.len();
        let mut j = DMatrix::zeros(self.x.len(), n);
        let mut grad = vec![0.0; n];
        for (row, &x) in self.x.iter().enumerate() {
            (self.model)(self.p.as_slice(), x, &mut grad);
            for (col, g) in grad.iter().enumerate() {
                j[(row, col)] = *g;
            }
        }
        j.iter().all(|v| v.is_finite()).then_some(j)
    }
}

struct CurveSolution {
    params: Vec<f64>,
    stderr: Vec<f64>,
}

fn solve(x: &[f64], y: &[f64], model: Model, start: Vec<f64>) -> Result<CurveSolution> {
    let n = start.len();
    if x.len() <= n {
        return Err(Error::FitFailed(format!(
            "{} points cannot constrain {n} parameters",
            x.len()
        )));
    }
    let problem = CurveProblem {
        x,
        y,
        model,
        p: DVector::from_vec(start),
    };
    let (problem, report) = LevenbergMarquardt::new()
        .with_xtol(XTOL)
        .with_patience(MAX_ITERATIONS)
        .minimize(problem);
    if !report.termination.was_successful() {
        return Err(Error::FitFailed(format!("{:?}", report.termination)));
    }
    let r = problem
        .residuals()
        .ok_or_else(|| Error::FitFailed("non-finite residuals".into()))?;
    let j = problem
        .jacobian()
        .ok_or_else(|| Error::FitFailed("non-finite Jacobian".into()))?;
    let s2 = r.norm_squared() / (x.len() - n) as f64;
    let cov = (j.transpose() * &j)
        .try_inverse()
        .ok_or_else(|| Error::FitFailed("singular normal matrix".into()))?;
    Ok(CurveSolution {
        params: problem.p.iter().copied().collect(),
        stderr: (0..n).map(|i| (s2 * cov[(i, i)]).max(0.0).sqrt()).collect(),
    })
}

fn check_series(x: &[f64], y: &[f64]) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySeries);
    }
    if x.len() != y.len() {
        return Err(Error::DegenerateTrace(format!(
            "axis has {} points but the trace has {}",
            x.len(),
            y.len()
        )));
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::NonFinite("fit input"));
    }
    Ok(())
}

fn rabi_model(p: &[f64], t: f64, grad: &mut [f64]) -> f64 {
    let (a, w, k) = (p[0], p[1], p[2]);
    let c = (w * t).cos();
    let s = (w * t).sin();
    let e = (-k * t).exp();
    grad[0] = -c * e;
    grad[1] = a * t * s * e;
    grad[2] = a * t * c * e;
    -a * c * e
}

/// Dominant nonzero angular frequency of a uniformly sampled trace.
pub fn dominant_frequency(t: &[f64], y: &[f64]) -> Result<f64> {
    check_series(t, y)?;
    if t.len() < 4 {
        return Err(Error::DegenerateTrace("need at least 4 samples".into()));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::DegenerateTrace("axis must be increasing".into()));
    }
    let uniform = t
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt);
    if !uniform {
        return Err(Error::DegenerateTrace(
            "axis must be uniformly spaced".into(),
        ));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let n = (4 * y.len()).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = y
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (bin, _) = buf[1..n / 2]
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.norm_sqr()))
        .fold(
            (0, 0.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    if bin == 0 {
        return Err(Error::DegenerateTrace("no spectral content".into()));
    }
    Ok(TAU * bin as f64 / (n as f64 * dt))
}

/// Slope of the least-squares line through `(x, y)`.
fn linear_regression(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fits `C(t) = −A_R·cos(ω1·t)·e^(−t/T2*)` to a uniformly sampled trace.
///
/// The trace must span at least two periods of its dominant frequency. An
/// undamped trace yields `T2* = ∞`.
pub fn fit_rabi(t: &[f64], c: &[f64]) -> Result<RabiFit> {
    check_series(t, c)?;
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let spread = c.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - c.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if !(spread > 1e-12 * scale.max(f64::MIN_POSITIVE)) || scale == 0.0 {
        return Err(Error::DegenerateTrace("trace is flat".into()));
    }
    let omega = dominant_frequency(t, c)?;
    let span = t[t.len() - 1] - t[0];
    if omega * span / TAU < 2.0 {
        return Err(Error::DegenerateTrace(format!(
            "trace spans {:.2} periods, need at least 2",
            omega * span / TAU
        )));
    }

    // Decay rate from the envelope extrema.
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 1..c.len() - 1 {
        let v = c[i].abs();
        if v >= c[i - 1].abs() && v >= c[i + 1].abs() && v > 0.0 {
            xs.push(t[i]);
            ys.push(v.ln());
        }
    }
    let rate = linear_regression(&xs, &ys).map_or(0.0, |(s, _)| (-s).max(0.0));
    let amplitude = {
        let num: f64 = t
            .iter()
            .zip(c)
            .map(|(&ti, &ci)| -ci * (omega * ti).cos() * (-rate * ti).exp())
            .sum();
        let den: f64 = t
            .iter()
            .map(|&ti| ((omega * ti).cos() * (-rate * ti).exp()).powi(2))
            .sum();
        num / den
    };

    let sol = solve(t, c, rabi_model, vec![amplitude, omega, rate])?;
    let (a, w, k) = (sol.params[0], sol.params[1], sol.params[2]);
    let (t2_star, t2_star_err) = if k > 0.0 {
        (1.0 / k, sol.stderr[2] / (k * k))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(RabiFit {
        amplitude: a,
        omega1: w,
        t2_star,
        amplitude_err: sol.stderr[0],
        omega1_err: sol.stderr[1],
        t2_star_err,
    })
}

fn echo_model(p: &[f64], tau: f64, grad: &mut [f64]) -> f64 {
    let (a, k) = (p[0], p[1]);
    let e = (-2.0 * k * tau).exp();
    grad[0] = e;
    grad[1] = -2.0 * tau * a * e;
    a * e
}

/// Fits `F(τ) = A·e^(−2τ/T2)`.
pub fn fit_echo_envelope(tau: &[f64], f: &[f64]) -> Result<EchoFit> {
    check_series(tau, f)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = tau
        .iter()
        .zip(f)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .unzip();
    let (slope, intercept) = linear_regression(&xs, &ys)
        .ok_or_else(|| Error::DegenerateTrace("need at least two positive points".into()))?;
    if !(slope < 0.0) {
        return Err(Error::DegenerateTrace("envelope does not decay".into()));
    }
    let sol = solve(tau, f, echo_model, vec![intercept.exp(), -slope / 2.0])?;
    let (a, k) = (sol.params[0], sol.params[1]);
    if !(k > 0.0) {
        return Err(Error::FitFailed("non-positive decay rate".into()));
    }
    Ok(EchoFit {
        amplitude: a,
        t2: 1.0 / k,
        amplitude_err: sol.stderr[0],
        t2_err: sol.stderr[1] / (k * k),
    })
}

/// Least-squares amplitude `A` of `y = A·g`.
pub fn fit_linear_amplitude(shape: &[f64], y: &[f64]) -> Result<LinearFit> {
    check_series(shape, y)?;
    let gg: f64 = shape.iter().map(|g| g * g).sum();
    if !(gg > 0.0) {
        return Err(Error::DegenerateTrace(
            "model shape is identically zero".into(),
        ));
    }
    let amplitude = shape.iter().zip(y).map(|(g, v)| g * v).sum::<f64>() / gg;
    let rss: f64 = shape
        .iter()
        .zip(y)
        .map(|(g, v)| (v - amplitude * g).powi(2))
        .sum();
    let dof = (y.len() as f64 - 1.0).max(1.0);
    Ok(LinearFit {
        amplitude,
        amplitude_err: (rss / dof / gg).sqrt(),
        rss,
    })
}
