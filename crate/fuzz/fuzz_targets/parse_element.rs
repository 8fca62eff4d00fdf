#![no_main]

use dlab::format::parse_element;
use dlab::{make_algebra, AlgebraKind, AlgebraSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else { return };
    let Ok(line) = std::str::from_utf8(rest) else { return };
    let spec = match pick % 5 {
        0 => AlgebraSpec::new(AlgebraKind::R, 6),
        1 => AlgebraSpec::new(AlgebraKind::C, 6),
        2 => AlgebraSpec::new(AlgebraKind::H, 4),
        3 => AlgebraSpec::padic(3, 1, 5),
        _ => AlgebraSpec::padic(5, 2, 3),
    };
    let alg = make_algebra(&spec).expect("fixed specs are valid");
    if let Ok(x) = parse_element(&alg, line) {
        assert_eq!(x.dim(), alg.d());
    }
});
