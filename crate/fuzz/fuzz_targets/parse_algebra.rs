#![no_main]

use libfuzzer_sys::fuzz_target;
use uainf::io::{parse_algebra, write_algebra};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_algebra(text) {
        let again = parse_algebra(&write_algebra(&p)).expect("written algebra re-parses");
        assert_eq!(write_algebra(&again), write_algebra(&p));
    }
});
