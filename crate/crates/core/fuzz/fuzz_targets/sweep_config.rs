#![no_main]

use libfuzzer_sys::fuzz_target;
use pinchlab::lab::config::SweepConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SweepConfig::from_json(text) {
        let _ = cfg.validate();
    }
});
