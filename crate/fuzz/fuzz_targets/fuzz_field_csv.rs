//! Fuzzes the coefficient-field CSV importer: arbitrary bytes must either
//! reconstruct a coherent field (round-trippable) or return a structured
//! error — never panic.

#![no_main]

use libfuzzer_sys::fuzz_target;
use torus_spectral::harness::csvio::{field_from_csv, field_to_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = field_from_csv(data) {
        // Anything accepted must survive a write/read round trip.
        let bytes = field_to_csv(&field).expect("accepted field must serialize");
        let again = field_from_csv(&bytes).expect("round trip must parse");
        assert_eq!(field.values, again.values);
    }
});
