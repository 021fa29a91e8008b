#![no_main]

use libfuzzer_sys::fuzz_target;
use nsinflation::calculus::TrigField;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = TrigField::from_json(s) {
        let back = TrigField::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }
});
