#![no_main]

use dlab::format::{parse_dset, write_dset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_dset(text) {
        let again = parse_dset(&write_dset(&doc.data, doc.provenance.as_deref())).expect("written sets parse");
        assert_eq!(again.data, doc.data);
    }
});
