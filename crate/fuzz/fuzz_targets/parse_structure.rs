#![no_main]

use libfuzzer_sys::fuzz_target;
use uainf::io::{parse_structure, write_structure};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_structure(text) {
        let again = parse_structure(&write_structure(&s)).expect("written structure re-parses");
        assert_eq!(again, s);
        if s.bound() <= 3 && s.carrier().dim() <= 4 {
            let _ = s.verify(s.bound());
        }
    }
});
