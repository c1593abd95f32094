// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Block (Pauli rotation) engine against full 4×4 numeric propagation.

use duplex_odmr::model::QuartetParams;
use duplex_odmr::sequence::{
    build_echo_sequence, run_sequence, Acquisition, Drive, Engine, Mode, ReadoutPhase, RunOptions,
};

fn main() -> duplex_odmr::Result<()> {
    let params = QuartetParams::default();
    let drive = Drive::default();
    let block = RunOptions::default();
    let numeric = RunOptions {
        engine: Engine::numeric(),
        ..block
    };
    for mode in Mode::ALL {
        let seq = build_echo_sequence(
            0.6e-6,
            0.6e-6,
            mode,
            ReadoutPhase::PlusMinusX,
            Acquisition::A,
            &params,
            &drive,
        )?;
        let a = run_sequence(&seq, None, &params, &block)?;
        let b = run_sequence(&seq, None, &params, &numeric)?;
        println!(
            "{:>9}: fidelity {:.6}, intensity block {:.6} numeric {:.6}",
            mode.name(),
            a.final_state.fidelity(&b.final_state),
            a.intensity,
            b.intensity
        );
    }
    Ok(())
}
