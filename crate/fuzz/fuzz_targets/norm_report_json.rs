#![no_main]

use libfuzzer_sys::fuzz_target;
use nsinflation::norms::NormReport;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = NormReport::from_json(s);
});
