// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Builds an echo sequence, prints its text form and runs the parsed copy.

use duplex_odmr::model::QuartetParams;
use duplex_odmr::sequence::{
    build_echo_sequence, run_sequence, Acquisition, Drive, Mode, PulseSequence, ReadoutPhase,
    RunOptions,
};

fn main() -> duplex_odmr::Result<()> {
    let params = QuartetParams::default();
    let seq = build_echo_sequence(
        0.6e-6,
        0.6e-6,
        Mode::Duplex,
        ReadoutPhase::PlusMinusY,
        Acquisition::A,
        &params,
        &Drive::default(),
    )?;
    let text = seq.to_text()?;
    println!("{text}");
    let parsed = PulseSequence::from_text(&text)?;
    let out = run_sequence(&parsed, None, &params, &RunOptions::default())?;
    println!("# readout intensity {:.6}", out.intensity);
    Ok(())
}
