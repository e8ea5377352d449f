#![no_main]
//! Config parsing and model construction never panic.

use libfuzzer_sys::fuzz_target;
use subexp_cli::Config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = Config::from_json(text) else {
        return;
    };
    let reparsed = Config::from_json(&serde_json::to_string(&config).unwrap());
    assert_eq!(reparsed.ok().as_ref(), Some(&config));
    let _ = config.distribution();
    let _ = config.weights();
    if config.grid.points <= 10_000 {
        let grid = config.grid();
        assert_eq!(grid.len(), config.grid.points);
    }
});
