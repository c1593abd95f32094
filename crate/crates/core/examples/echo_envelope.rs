// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-echo decay `F(τ)` and its T2 fit.

use duplex_odmr::experiments::{echo_envelope_scan, ScanSetup};
use duplex_odmr::sequence::Mode;

fn main() -> duplex_odmr::Result<()> {
    let tau: Vec<f64> = (0..30).map(|i| 0.1e-6 + i as f64 * 0.1e-6).collect();
    let scan = echo_envelope_scan(&tau, Mode::Duplex, &ScanSetup::default())?;
    for m in Mode::ALL {
        let fit = scan.fit(m.name()).expect("envelope is fitted");
        println!(
            "{:>9}: A = {:.4} %, T2 = {:.3} us",
            m.name(),
            100.0 * fit.value("A"),
            1e6 * fit.value("T2")
        );
    }
    Ok(())
}
