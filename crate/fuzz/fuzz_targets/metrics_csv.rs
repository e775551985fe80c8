#![no_main]

use libfuzzer_sys::fuzz_target;
use pinnlab::trainer::MetricsLog;

fuzz_target!(|data: &[u8]| {
    if let Ok(log) = MetricsLog::read_csv(data) {
        let text = log.to_csv_string();
        let again = MetricsLog::parse_csv(&text).expect("re-parse of written log");
        assert_eq!(again.to_csv_string(), text);
        let _ = log.final_mse();
        let _ = log.mse_curve();
    }
});
