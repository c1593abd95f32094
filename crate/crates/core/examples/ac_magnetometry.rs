// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Echo response to a synchronized AC field for `±x` and `±y` readout.

use duplex_odmr::experiments::{ac_response_amplitude_scan, ac_response_tau_scan, ScanSetup};
use duplex_odmr::sequence::{Mode, Parity, ReadoutPhase};

fn main() -> duplex_odmr::Result<()> {
    let setup = ScanSetup::default();
    let b: Vec<f64> = (0..41).map(|i| -10e-6 + i as f64 * 0.5e-6).collect();
    for readout in [ReadoutPhase::PlusMinusX, ReadoutPhase::PlusMinusY] {
        let scan = ac_response_amplitude_scan(
            &b,
            0.6e-6,
            readout,
            Parity::Magnetic,
            Mode::Duplex,
            &setup,
        )?;
        println!(
            "readout {}: nu = {} Hz",
            readout.name(),
            scan.metadata["nu_hz"]
        );
        for m in Mode::ALL {
            let a = scan.fit(m.name()).map(|f| f.value("A")).unwrap_or(f64::NAN);
            println!("  {:>9}: A = {:.4} %", m.name(), 100.0 * a);
        }
    }

    let tau: Vec<f64> = (0..61).map(|i| 0.3e-6 + i as f64 * 10e-9).collect();
    let scan = ac_response_tau_scan(
        &tau,
        5.75e-6,
        0.6e-6,
        ReadoutPhase::PlusMinusX,
        Mode::Duplex,
        &setup,
    )?;
    let f = scan.values("duplex").expect("duplex column");
    let base = scan.values("baseline").expect("baseline column");
    let (i, dip) =
        f.iter()
            .zip(base)
            .map(|(v, b)| v - b)
            .enumerate()
            .fold(
                (0, 0.0),
                |best, (i, d)| if d < best.1 { (i, d) } else { best },
            );
    println!(
        "largest dip below baseline: {:.4} % at tau = {:.2} us",
        100.0 * dip,
        1e6 * tau[i]
    );
    Ok(())
}
