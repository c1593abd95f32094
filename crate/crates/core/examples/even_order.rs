// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! An even-order (parity) AC signal cancels in duplex `±y` readout and is
//! recovered by the common `+y` readout.

use duplex_odmr::model::QuartetParams;
use duplex_odmr::sequence::{
    echo_signal, synchronized_ac_frequency, AcField, Drive, Mode, Parity, ReadoutPhase, RunOptions,
};

fn main() -> duplex_odmr::Result<()> {
    let params = QuartetParams::default();
    let drive = Drive::default();
    let tau = 0.6e-6;
    let field = AcField {
        amplitude: 3e-6,
        frequency: synchronized_ac_frequency(tau, drive.pi_duration()?)?,
        phase: 0.0,
        parity: Parity::EvenOrder,
    };
    let opts = RunOptions::default();
    for readout in [ReadoutPhase::PlusMinusY, ReadoutPhase::CommonPlusY] {
        for mode in Mode::ALL {
            let s = echo_signal(
                tau,
                tau,
                mode,
                readout,
                &params,
                &drive,
                Some(&field),
                &opts,
            )?;
            println!(
                "{:>8} {:>9}: F = {:+.5} %",
                readout.name(),
                mode.name(),
                100.0 * s.f
            );
        }
    }
    Ok(())
}
