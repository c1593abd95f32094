// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! CW ODMR lines at zero field and at the working field.

use duplex_odmr::experiments::cw_spectrum;
use duplex_odmr::model::{resonance_frequencies, QuartetParams};

fn main() -> duplex_odmr::Result<()> {
    let freqs: Vec<f64> = (0..3001).map(|i| i as f64 * 0.5e6).collect();
    for b0 in [0.0, 46e-3] {
        let params = QuartetParams {
            b0,
            ..Default::default()
        };
        let s = cw_spectrum(&params, &freqs, 10e6, 1.0)?;
        let (f_plus, f_minus) = resonance_frequencies(&params);
        let peak = s.iter().cloned().fold(0.0, f64::max);
        println!(
            "B0 = {:.1} mT: f+ = {:.2} MHz, f- = {:.2} MHz, peak = {peak:.3}",
            1e3 * b0,
            f_plus / 1e6,
            f_minus / 1e6
        );
    }
    Ok(())
}
