#![no_main]

use libfuzzer_sys::fuzz_target;
use uainf::io::parse_complex;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_complex(text) {
        for i in 0..c.dim() {
            assert!(c.apply_d(c.d(i)).is_zero());
        }
    }
});
