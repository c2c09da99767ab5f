#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(formula) = ctdmu::syntax::Formula::parse(text) else {
        return;
    };
    // Anything the parser accepts must survive a print/parse round trip.
    let printed = formula.to_string();
    let back = ctdmu::syntax::Formula::parse(&printed).expect("printed formula reparses");
    assert_eq!(back, formula, "round trip changed {printed}");
    // The analyses must be total on parsed formulas.
    let _ = formula.analyze();
    let _ = formula.dualize();
    let _ = formula.hat_transform();
});
