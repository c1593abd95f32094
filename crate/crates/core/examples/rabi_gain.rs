// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Rabi oscillations in simplex and duplex operation and the duplex gain.

use duplex_odmr::experiments::{rabi_scan, ScanSetup};
use duplex_odmr::sequence::Mode;

fn main() -> duplex_odmr::Result<()> {
    let t_mw: Vec<f64> = (0..201).map(|i| i as f64 * 5e-9).collect();
    let scan = rabi_scan(&t_mw, Mode::Duplex, &ScanSetup::default())?;
    let amp = |m: Mode| {
        scan.fit(m.name())
            .map(|f| f.value("A_R"))
            .unwrap_or(f64::NAN)
    };
    for m in Mode::ALL {
        println!("{:>9}: 2A_R = {:.4} %", m.name(), 200.0 * amp(m));
    }
    println!("gain = {:.4}", amp(Mode::Duplex) / amp(Mode::SimplexMinus));
    Ok(())
}
