#![no_main]

use dlab::format::{parse_pairset, write_pairset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_pairset(text) {
        let again = parse_pairset(&write_pairset(&doc.data, doc.provenance.as_deref())).expect("written sets parse");
        assert_eq!(again.data, doc.data);
    }
});
