#![no_main]
//! Tail specs that build a distribution give a coherent law.

use libfuzzer_sys::fuzz_target;
use subexp_cli::config::DistributionConfig;
use subexp_core::Law;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = serde_json::from_str::<DistributionConfig>(text) else {
        return;
    };
    let config = subexp_cli::Config {
        distribution: spec,
        weights: serde_json::from_str(r#"{"weights": [1.0]}"#).unwrap(),
        expansion: Default::default(),
        grid: serde_json::from_str(r#"{"t_min": 10.0, "t_max": 100.0, "points": 2}"#).unwrap(),
        oracle: Default::default(),
    };
    let Ok(dist) = config.distribution() else {
        return;
    };
    let t0 = dist.t0();
    for x in [t0, 2.0 * t0, 10.0 * t0] {
        let (s, c) = (dist.sf(x), dist.cdf(x));
        if s.is_finite() && c.is_finite() {
            assert!((-1e-9..=1.0 + 1e-9).contains(&s), "sf({x}) = {s}");
            assert!((s + c - 1.0).abs() < 1e-6, "sf + cdf at {x}");
        }
    }
});
