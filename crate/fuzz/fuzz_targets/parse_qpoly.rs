#![no_main]

use libfuzzer_sys::fuzz_target;
use utt::serial::{emit_qpoly, parse_qpoly};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(x) = parse_qpoly(text) {
        let once = emit_qpoly(&x);
        let again = parse_qpoly(&once).expect("emitted text parses");
        assert_eq!(again, x);
        assert_eq!(emit_qpoly(&again), once);
    }
});
