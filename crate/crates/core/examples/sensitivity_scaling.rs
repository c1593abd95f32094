// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Sensitivity from the fitted echo response and Monte-Carlo `1/√T` scaling.

use duplex_odmr::experiments::{
    ac_response_amplitude_scan, fit_power_law, monte_carlo_field_estimate, sensitivity,
    EchoResponse, ScanSetup,
};
use duplex_odmr::photophysics::ReadoutModel;
use duplex_odmr::sequence::{synchronized_ac_frequency, Mode, Parity, ReadoutPhase};

fn main() -> duplex_odmr::Result<()> {
    let setup = ScanSetup::default();
    let tau = 0.6e-6;
    let nu = synchronized_ac_frequency(tau, setup.drive.pi_duration()?)?;
    let b: Vec<f64> = (0..41).map(|i| -10e-6 + i as f64 * 0.5e-6).collect();
    let readout = ReadoutPhase::PlusMinusY;
    let scan =
        ac_response_amplitude_scan(&b, tau, readout, Parity::Magnetic, Mode::Duplex, &setup)?;
    for m in Mode::ALL {
        let a = scan.fit(m.name()).map(|f| f.value("A")).unwrap_or(f64::NAN);
        println!(
            "{}",
            sensitivity(
                a,
                setup.params.sigma_f_1s,
                nu,
                setup.params.gamma,
                m,
                readout
            )?
        );
    }

    let response = EchoResponse {
        amplitude: scan.fit("duplex").map(|f| f.value("A")).unwrap_or(f64::NAN),
        nu,
        gamma: setup.params.gamma,
        readout,
    };
    let times = [1.0, 10.0, 100.0];
    let mut spread = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let est = monte_carlo_field_estimate(
            0.0,
            &response,
            &ReadoutModel::from(&setup.params),
            t,
            2000,
            i as u64,
        )?;
        println!("T = {t:>5} s: dB = {:.4} uT", 1e6 * est.std);
        spread.push(est.std);
    }
    let (eta, p) = fit_power_law(&times, &spread)?;
    println!("dB(T) = {:.3} uT/sqrt(Hz) * T^{p:.3}", 1e6 * eta);
    Ok(())
}
