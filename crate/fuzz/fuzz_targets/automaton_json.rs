#![no_main]

use ctdmu::automata::CountdownAutomaton;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(aut) = CountdownAutomaton::from_json(text) else {
        return;
    };
    // from_json validates, so the invariants hold and the value round-trips.
    aut.validate().expect("loaded automata are valid");
    let out = aut.to_json();
    let back = CountdownAutomaton::from_json(&out).expect("serialized automaton reloads");
    assert_eq!(back, aut);
    let _ = aut.is_guarded();
    let _ = aut.free_vars();
});
