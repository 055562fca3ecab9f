#![no_main]

use convineq::grid::GridFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(g) = GridFunction::from_json_bytes(data) {
        let text = g.to_json().expect("serializing a valid function");
        assert_eq!(
            GridFunction::from_json(&text).expect("re-reading own output"),
            g
        );
    }
});
