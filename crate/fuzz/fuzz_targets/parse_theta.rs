#![no_main]
use libfuzzer_sys::fuzz_target;
use tq_core::cli::{parse_theta, ThetaSpec};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ThetaSpec::List(values)) = parse_theta(text) {
            assert!(!values.is_empty());
        }
    }
});
