#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = mfnn::signals::import_csv_reader(data, "fuzz", None);
});
