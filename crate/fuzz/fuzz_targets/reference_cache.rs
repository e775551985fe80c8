#![no_main]

use libfuzzer_sys::fuzz_target;
use pinnlab::refsolve::{decode, encode};

fuzz_target!(|data: &[u8]| {
    if let Ok(sol) = decode(data) {
        assert_eq!(encode(&sol).expect("decoded record re-encodes"), data);
        let (t, x) = (sol.times[0], sol.xs[0]);
        let _ = sol.sample(t, x);
    }
});
