#![no_main]

use convineq::grid::GridFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // anything the reader accepts must survive a write and re-read unchanged
    if let Ok(g) = GridFunction::read_csv(data) {
        let mut out = Vec::new();
        g.write_csv(&mut out).expect("writing to memory");
        let back = GridFunction::read_csv(out.as_slice()).expect("re-reading own output");
        assert_eq!(g, back);
    }
});
