//! Replays the checked-in fuzz corpus through the parser entry points.

use std::path::PathBuf;

use tq_core::cli::{format_complex, parse_complex, parse_config, parse_theta, RunConfig};

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds in {}", dir.display());
    files.iter().map(|p| std::fs::read_to_string(p).unwrap()).collect()
}

#[test]
fn complex_seeds_parse_and_round_trip() {
    for s in seeds("parse_complex") {
        let z = parse_complex(&s).unwrap();
        assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }
}

#[test]
fn theta_seeds_parse() {
    for s in seeds("parse_theta") {
        parse_theta(&s).unwrap();
    }
}

#[test]
fn config_seeds_resolve() {
    for s in seeds("parse_config") {
        let settings = parse_config(&s).unwrap();
        RunConfig::resolve(&[&settings], false).unwrap();
    }
}
