// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use duplex_odmr::cli::RECIPES;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_duplex-odmr"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn data_rows(text: &str) -> usize {
    text.lines().filter(|l| !l.starts_with('#')).count() - 1
}

#[test]
fn rabi_recipe_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = bin(&["rabi", "--recipe", "rabi", "--out", name], dir.path());
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(data_rows(&text), 201);
    assert!(text.contains("# fit.duplex.A_R = "));
    assert!(text
        .lines()
        .any(|l| l.starts_with("t_mw_s,simplex+,simplex-,duplex,fit,residual")));
}

#[test]
fn every_recipe_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (name, command, _) in RECIPES {
        let file = format!("{name}.csv");
        let out = bin(
            &[command.name(), "--recipe", name, "--out", &file],
            dir.path(),
        );
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = std::fs::read_to_string(dir.path().join(&file)).unwrap();
        assert!(data_rows(&text) > 0, "{name} wrote no rows");
        assert!(text.contains(&format!("# recipe = {name}")));
    }
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "seed = 3\nmode = \"duplex\"\n\n[scan]\nt_mw = { start = \"0 ns\", stop = \"200 ns\", points = 21 }\n",
    )
    .unwrap();
    let out = bin(&["rabi", "--config", "run.toml", "--seed", "9"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("rabi.csv")).unwrap();
    assert_eq!(data_rows(&text), 21);
    assert!(text.contains("# seed = 9"));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "seed = 1\nmode = \n").unwrap();
    let out = bin(&["rabi", "--config", "bad.toml"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    std::fs::write(
        dir.path().join("unknown.toml"),
        "[params]\nb0 = \"46 mT\"\nwidth = 1\n",
    )
    .unwrap();
    let out = bin(&["rabi", "--config", "unknown.toml"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("width"));
}

#[test]
fn recipe_must_match_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["echo", "--recipe", "rabi"], dir.path());
    assert!(!out.status.success());
    assert!(!dir.path().join("echo.csv").exists());
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["cw", "--out", "missing/dir/cw.csv"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
