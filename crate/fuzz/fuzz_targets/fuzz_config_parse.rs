//! Fuzzes the TOML experiment-config parser: arbitrary bytes must either
//! parse into a validated config or return a structured error — never panic.

#![no_main]

use libfuzzer_sys::fuzz_target;
use torus_spectral::harness::config::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = ExperimentConfig::from_toml_str(text);
    }
});
