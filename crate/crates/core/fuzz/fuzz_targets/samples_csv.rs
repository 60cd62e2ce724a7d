#![no_main]

use libfuzzer_sys::fuzz_target;
use pinchlab::lab::config::parse_samples_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(samples) = parse_samples_csv(text) {
        assert!(samples.iter().all(|s| s.l > 0.0));
    }
});
