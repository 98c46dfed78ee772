#![no_main]
use libfuzzer_sys::fuzz_target;
use tq_core::cli::{parse_config, RunConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(settings) = parse_config(text) {
            // resolution validates every value but never builds a chain
            let _ = RunConfig::resolve(&[&settings], false);
        }
    }
});
