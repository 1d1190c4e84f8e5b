#![no_main]

use libfuzzer_sys::fuzz_target;
use uainf::algebra::fixture_m2;
use uainf::io::{parse_bimodule, write_bimodule};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let a = fixture_m2();
    if let Ok(m) = parse_bimodule(text, &a) {
        let again = parse_bimodule(&write_bimodule(&m, &a), &a).expect("written bimodule re-parses");
        assert_eq!(write_bimodule(&again, &a), write_bimodule(&m, &a));
    }
});
