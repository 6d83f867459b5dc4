#![no_main]

use libfuzzer_sys::fuzz_target;

// ARCD container parsing: header sizes are validated against the actual
// byte count before any allocation.
fuzz_target!(|data: &[u8]| {
    let _ = mfnn::signals::parse_dataset(data, "fuzz");
});
