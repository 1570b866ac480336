#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use utt::padic::{make_context, Ctx};
use utt::serial::{emit_scaled, parse_scaled};

fn ctx() -> &'static Ctx {
    static CTX: OnceLock<Ctx> = OnceLock::new();
    CTX.get_or_init(|| make_context(3, 2, 20).unwrap())
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(x) = parse_scaled(ctx(), text) {
        let once = emit_scaled(&x);
        let again = parse_scaled(ctx(), &once).expect("emitted text parses");
        assert_eq!(emit_scaled(&again), once);
    }
});
