#![no_main]

use libfuzzer_sys::fuzz_target;
use uainf::shapes::{epsilon, parse_tree, serialize};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if text.len() > 256 {
        return;
    }
    if let Ok(t) = parse_tree(text) {
        let s = serialize(&t);
        assert_eq!(parse_tree(&s).expect("serialized tree re-parses"), t);
        assert!(epsilon(&t) <= 1);
        assert_eq!(t.corolla().n(), t.leaf_count());
    }
});
