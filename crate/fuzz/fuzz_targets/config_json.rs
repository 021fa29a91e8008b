#![no_main]

use libfuzzer_sys::fuzz_target;
use nsinflation::experiments::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(c) = ExperimentConfig::from_json(s) {
        let _ = c.manifest_hash();
        if c.sweep.size() <= 4096 {
            assert_eq!(c.points().len(), c.sweep.size());
        }
    }
});
