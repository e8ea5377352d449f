#![no_main]
//! Report re-ingestion never panics and accepted reports round-trip.

use libfuzzer_sys::fuzz_target;
use subexp_cli::Report;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = Report::from_json(text) {
        let again = serde_json::to_string(&report).unwrap();
        if let Ok(back) = Report::from_json(&again) {
            assert_eq!(serde_json::to_string(&back).unwrap(), again);
        }
    }
});
