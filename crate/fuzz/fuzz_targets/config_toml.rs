#![no_main]

use libfuzzer_sys::fuzz_target;
use pinnlab::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_toml(text) {
        // anything accepted must survive a write/read cycle unchanged
        let again = RunConfig::from_toml(&cfg.to_toml()).expect("re-parse of serialised config");
        assert_eq!(again, cfg);
    }
});
