// Copyright 2026 duplex-odmr Contributors
// SPDX-License-Identifier: Apache-2.0

fn main() -> std::process::ExitCode {
    duplex_odmr::cli::main()
}
