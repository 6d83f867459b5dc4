#![no_main]

use libfuzzer_sys::fuzz_target;

// Checkpoint container parsing must reject arbitrary bytes with a structured
// error: no panic, no oversized allocation from forged tensor headers.
fuzz_target!(|data: &[u8]| {
    let _ = mfnn::checkpoint::parse_checkpoint(data, "fuzz");
});
