#![no_main]

use libfuzzer_sys::fuzz_target;
use pinnlab::netlib::Checkpoint;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ck) = Checkpoint::from_json(text) {
        let json = ck.to_json();
        let model = ck.into_model().expect("validated checkpoint builds a model");
        let _ = model.eval(0.5, 0.5);
        assert_eq!(Checkpoint::from_json(&json).expect("re-parse").to_json(), json);
    }
});
