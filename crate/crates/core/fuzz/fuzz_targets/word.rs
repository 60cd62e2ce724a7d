#![no_main]

use libfuzzer_sys::fuzz_target;
use pinchlab::wordlang::Word;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(w) = text.parse::<Word>() {
        // parsing is reduced and round-trips through Display
        let again: Word = w.to_string().parse().expect("display output parses");
        assert_eq!(w, again);
        assert_eq!(w.inverse().inverse(), w);
    }
});
