#![no_main]

use ctdmu::ordinal::{CountdownBound, Ordinal};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(o) = text.parse::<Ordinal>() {
        let printed = o.to_string();
        let back: Ordinal = printed.parse().expect("printed ordinal reparses");
        assert_eq!(back, o, "round trip changed {printed}");
        // Basic arithmetic must not panic on parsed values.
        let _ = o.add(&o);
        let _ = o.mul(&Ordinal::from_nat(2));
        let _ = o.left_subtract(&o.add(&Ordinal::omega()));
    }
    let _ = text.parse::<CountdownBound>();
});
