#![no_main]

use libfuzzer_sys::fuzz_target;
use nsinflation::construction::FrequencyFamily;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = FrequencyFamily::from_json(s) {
        f.validate().unwrap();
    }
});
