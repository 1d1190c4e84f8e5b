#![no_main]

use libfuzzer_sys::fuzz_target;
use uainf::io::{parse_morphism, write_morphism};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_morphism(text) {
        let written = write_morphism(&f);
        let again = parse_morphism(&written).expect("written morphism re-parses");
        assert_eq!(write_morphism(&again), written);
    }
});
