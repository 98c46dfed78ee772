use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::parse::{format_complex, parse_complex, parse_theta, ThetaSpec};
use super::presets::Preset;
use crate::error::{Result, TqError};
use crate::lattice::{ChainSpec, MAX_SITES};
use crate::poly::random_in_disk;

pub const DEFAULT_SEED: u64 = 20131;
pub const DEFAULT_BUDGET: usize = 2000;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const THREADS_ENV: &str = "TQLAB_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// Fully resolved run parameters: preset, then config file, then flags.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub theta: ThetaSpec,
    pub phi: Complex64,
    pub seed: u64,
    pub budget: usize,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub seed_from_oracle: bool,
    /// None means available parallelism.
    pub threads: Option<usize>,
    pub inject_fault: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 3,
            theta: ThetaSpec::Homogeneous,
            phi: Complex64::new(0.0, 0.0),
            seed: DEFAULT_SEED,
            budget: DEFAULT_BUDGET,
            tol: DEFAULT_TOL,
            format: Format::Json,
            out: None,
            preset: None,
            seed_from_oracle: false,
            threads: None,
            inject_fault: false,
        }
    }
}

fn usage(msg: impl Into<String>) -> TqError {
    TqError::Usage(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| usage(format!("invalid value for {key}: {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(usage(format!("invalid value for {key}: {v:?}"))),
    }
}

/// Raw key/value settings collected from a config file and from flags.
pub type Settings = BTreeMap<String, String>;

pub const KEYS: [&str; 11] = [
    "n",
    "theta",
    "phi",
    "seed",
    "budget",
    "tol",
    "format",
    "out",
    "reproduce-table",
    "seed-from-oracle",
    "threads",
];

impl RunConfig {
    /// Builds the config from layered settings; later layers win.
    pub fn resolve(layers: &[&Settings], inject_fault: bool) -> Result<Self> {
        let mut merged = Settings::new();
        for layer in layers {
            for (k, v) in layer.iter() {
                if !KEYS.contains(&k.as_str()) {
                    return Err(usage(format!("unknown setting {k:?}")));
                }
                merged.insert(k.clone(), v.clone());
            }
        }
        let mut cfg = RunConfig {
            inject_fault,
            ..Default::default()
        };
        // the preset supplies the chain first so that explicit values override it
        if let Some(v) = merged.get("reproduce-table") {
            let p = Preset::from_number(parse_num("reproduce-table", v)?)
                .ok_or_else(|| usage(format!("unknown table {v:?}; expected 1 or 2")))?;
            cfg.n = p.n();
            cfg.phi = p.phi();
            cfg.theta = ThetaSpec::Homogeneous;
            cfg.budget = p.budget();
            cfg.seed_from_oracle = true;
            cfg.preset = Some(p);
        }
        let explicit_n = match merged.get("n") {
            Some(v) => Some(parse_num::<usize>("n", v)?),
            None => None,
        };
        if let Some(v) = merged.get("theta") {
            cfg.theta = parse_theta(v)?;
        }
        if let Some(v) = merged.get("phi") {
            cfg.phi = parse_complex(v)?;
        }
        if let Some(v) = merged.get("seed") {
            cfg.seed = parse_num("seed", v)?;
        }
        if let Some(v) = merged.get("budget") {
            cfg.budget = parse_num("budget", v)?;
            if cfg.budget == 0 {
                return Err(usage("budget must be at least 1"));
            }
        }
        if let Some(v) = merged.get("tol") {
            cfg.tol = parse_num("tol", v)?;
            if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
                return Err(usage("tol must be positive"));
            }
        }
        if let Some(v) = merged.get("format") {
            cfg.format = match v.trim() {
                "json" => Format::Json,
                "table" => Format::Table,
                other => return Err(usage(format!("unknown format {other:?}; expected json or table"))),
            };
        }
        if let Some(v) = merged.get("out") {
            cfg.out = Some(PathBuf::from(v.trim()));
        }
        if let Some(v) = merged.get("seed-from-oracle") {
            cfg.seed_from_oracle = parse_bool("seed-from-oracle", v)?;
        }
        if let Some(v) = merged.get("threads") {
            let t: usize = parse_num("threads", v)?;
            cfg.threads = (t > 0).then_some(t);
        }

        cfg.n = match (&cfg.theta, explicit_n) {
            (ThetaSpec::List(t), Some(n)) if t.len() != n => {
                return Err(usage(format!("theta lists {} values but N = {n}", t.len())))
            }
            (ThetaSpec::List(t), _) => t.len(),
            (_, Some(n)) => n,
            (_, None) => cfg.n,
        };
        if cfg.n > MAX_SITES {
            return Err(usage(format!("N exceeds configured cap ({} > {MAX_SITES})", cfg.n)));
        }
        if cfg.n < 2 {
            return Err(usage(format!("N must be at least 2, got {}", cfg.n)));
        }
        if let Some(p) = cfg.preset {
            if cfg.n != p.n() {
                return Err(usage(format!("table {} is for N = {}", p.number(), p.n())));
            }
        }
        Ok(cfg)
    }

    /// Expands θ, drawing random values from the run seed.
    pub fn theta_values(&self) -> Vec<Complex64> {
        match &self.theta {
            ThetaSpec::Homogeneous => vec![Complex64::new(0.0, 0.0); self.n],
            ThetaSpec::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..self.n).map(|_| random_in_disk(&mut rng, 1.0)).collect()
            }
            ThetaSpec::List(t) => t.clone(),
        }
    }

    pub fn chain(&self) -> Result<ChainSpec> {
        ChainSpec::new(self.theta_values(), self.phi)
    }

    /// Thread count does not enter: results are independent of it.
    pub fn to_json(&self) -> Value {
        let theta = match &self.theta {
            ThetaSpec::Homogeneous => json!("homogeneous"),
            ThetaSpec::Random => json!({
                "random": self.theta_values().iter().map(|&z| complex_json(z)).collect::<Vec<_>>()
            }),
            ThetaSpec::List(t) => Value::Array(t.iter().map(|&z| complex_json(z)).collect()),
        };
        json!({
            "n": self.n,
            "theta": theta,
            "phi": complex_json(self.phi),
            "phi_text": format_complex(self.phi),
            "seed": self.seed,
            "budget": self.budget,
            "tol": self.tol,
            "format": match self.format { Format::Json => "json", Format::Table => "table" },
            "out": self.out.as_ref().map(|p| p.display().to_string()),
            "reproduce_table": self.preset.map(|p| p.number()),
            "seed_from_oracle": self.seed_from_oracle,
            "inject_fault": self.inject_fault,
        })
    }
}

pub fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn flags_override_file() {
        let file = settings(&[("n", "4"), ("phi", "0.3"), ("seed", "7")]);
        let flags = settings(&[("phi", "-0.69315i")]);
        let cfg = RunConfig::resolve(&[&file, &flags], false).unwrap();
        assert_eq!(cfg.n, 4);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.phi, Complex64::new(0.0, -0.69315));
    }

    #[test]
    fn preset_sets_chain_and_seeding() {
        let cfg = RunConfig::resolve(&[&settings(&[("reproduce-table", "2")])], false).unwrap();
        assert_eq!(cfg.n, 4);
        assert_eq!(cfg.phi, Complex64::new(0.0, -0.69315));
        assert!(cfg.seed_from_oracle);
        assert!(RunConfig::resolve(&[&settings(&[("reproduce-table", "2"), ("n", "3")])], false).is_err());
        assert!(RunConfig::resolve(&[&settings(&[("reproduce-table", "3")])], false).is_err());
    }

    #[test]
    fn size_cap_and_theta_length() {
        let e = RunConfig::resolve(&[&settings(&[("n", "13")])], false).unwrap_err();
        assert!(e.to_string().contains("N exceeds configured cap"));
        let cfg = RunConfig::resolve(&[&settings(&[("theta", "0.1,0.2")])], false).unwrap();
        assert_eq!(cfg.n, 2);
        assert!(RunConfig::resolve(&[&settings(&[("theta", "0.1,0.2"), ("n", "3")])], false).is_err());
        assert!(RunConfig::resolve(&[&settings(&[("colour", "red")])], false).is_err());
    }

    #[test]
    fn random_theta_follows_seed() {
        let a = RunConfig::resolve(&[&settings(&[("theta", "random"), ("seed", "3")])], false).unwrap();
        let b = RunConfig::resolve(&[&settings(&[("theta", "random"), ("seed", "3")])], false).unwrap();
        assert_eq!(a.theta_values(), b.theta_values());
        assert!(a.theta_values().iter().all(|t| t.norm() <= 1.0));
    }
}
