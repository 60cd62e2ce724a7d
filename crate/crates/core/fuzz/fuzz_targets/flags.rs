#![no_main]

use libfuzzer_sys::fuzz_target;
use pinchlab::lab::config::{parse_complex, parse_list, parse_point, parse_surface, Quantity};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_complex(text) {
        assert!(s.re.is_finite() && s.im.is_finite());
    }
    if let Ok(z) = parse_point(text) {
        assert!(z.y > 0.0);
    }
    if let Ok(ls) = parse_surface(text) {
        assert!(ls.iter().all(|l| *l > 0.0 && l.is_finite()));
    }
    let _ = parse_list(text);
    let _ = text.parse::<Quantity>();
});
