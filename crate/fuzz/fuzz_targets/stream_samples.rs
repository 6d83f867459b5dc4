#![no_main]

use libfuzzer_sys::fuzz_target;

// The streaming-inference text format: one decimal sample per line.
// Exercised in both strict and skip-malformed modes.
fuzz_target!(|data: &[u8]| {
    let _ = mfnn::signals::parse_sample_lines(data, true, |_, _| {});
    let _ = mfnn::signals::parse_sample_lines(data, false, |_, _| {});
});
