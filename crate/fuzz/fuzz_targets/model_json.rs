#![no_main]

use ctdmu::model::Lts;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((lts, valuation)) = Lts::from_json(text) else {
        return;
    };
    // Accepted models re-serialize and reload to the same value.
    let out = lts.to_json(Some(&valuation));
    let (back, val_back) = Lts::from_json(&out).expect("serialized model reloads");
    assert_eq!(back, lts);
    assert_eq!(val_back, valuation);
});
