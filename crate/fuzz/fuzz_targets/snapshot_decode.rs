#![no_main]

use libfuzzer_sys::fuzz_target;
use nsinflation::solver::snapshot;

fuzz_target!(|data: &[u8]| {
    if let Ok(g) = snapshot::decode(data) {
        // a decoded snapshot re-encodes to the same length
        assert_eq!(snapshot::encode(&g).len(), data.len());
    }
});
