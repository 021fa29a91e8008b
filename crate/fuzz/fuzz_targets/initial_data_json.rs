#![no_main]

use libfuzzer_sys::fuzz_target;
use nsinflation::construction::InitialData;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = InitialData::from_json(s);
});
