//! The `tqlab` command line: configuration layering, the worker pool, and
//! report serialization. Exit codes: 0 success, 1 verification or
//! acceptance failure, 2 usage error.

pub mod commands;
pub mod config;
pub mod parse;
pub mod presets;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::TqError;
pub use commands::Report;
pub use config::{Format, RunConfig, Settings};
pub use parse::{format_complex, parse_complex, parse_config, parse_theta, ThetaSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "tqlab", version, about = "Inhomogeneous T-Q relation laboratory for the periodic XXX chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Number of sites (2..=12)
    #[arg(long, global = true)]
    n: Option<String>,
    /// Twist angle, e.g. -0.69315i or 0.3+0.1i
    #[arg(long, global = true, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Comma-separated inhomogeneities, "homogeneous" or "random"
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Quasi-random Newton starts
    #[arg(long, global = true)]
    budget: Option<String>,
    /// Residual threshold for verify
    #[arg(long, global = true)]
    tol: Option<String>,
    /// json or table
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Reproduce a published table (1 or 2)
    #[arg(long, global = true)]
    reproduce_table: Option<String>,
    /// key=value settings file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: TQLAB_THREADS, then available parallelism)
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Seed the solver with roots of Q-polynomials reconstructed from the spectrum
    #[arg(long, global = true)]
    seed_from_oracle: bool,
    /// Corrupt the R-matrix fed to the identity checks
    #[arg(long, global = true, hide = true)]
    inject_fault: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Check the algebraic identity suite
    Verify,
    /// Exact transfer-matrix spectrum
    Spectrum,
    /// Solve the Bethe equations and match against the spectrum
    Solve,
    /// Rebuild Q-polynomials from the exact spectrum
    Reconstruct,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Solve => "solve",
            Command::Reconstruct => "reconstruct",
        }
    }
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Execution {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Execution {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

fn flag_settings(cli: &Cli) -> Settings {
    let mut s = Settings::new();
    let mut put = |k: &str, v: &Option<String>| {
        if let Some(v) = v {
            s.insert(k.to_string(), v.clone());
        }
    };
    put("n", &cli.n);
    put("phi", &cli.phi);
    put("theta", &cli.theta);
    put("seed", &cli.seed);
    put("budget", &cli.budget);
    put("tol", &cli.tol);
    put("format", &cli.format);
    put("out", &cli.out.as_ref().map(|p| p.display().to_string()));
    put("reproduce-table", &cli.reproduce_table);
    put("threads", &cli.threads);
    if cli.seed_from_oracle {
        s.insert("seed-from-oracle".into(), "true".into());
    }
    s
}

fn thread_count(cfg: &RunConfig) -> Result<usize, String> {
    if let Some(t) = cfg.threads {
        return Ok(t);
    }
    match std::env::var(config::THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(t),
            _ => Err(format!("invalid {}={v:?}", config::THREADS_ENV)),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Renders the report exactly as written to stdout or `--out`.
pub fn render(command: &str, cfg: &RunConfig, report: &Report) -> String {
    match cfg.format {
        Format::Json => {
            let doc = json!({
                "command": command,
                "config": cfg.to_json(),
                "seed": cfg.seed,
                "tool": { "name": "tqlab", "version": env!("CARGO_PKG_VERSION") },
                "report": report.body,
                "exit_code": report.code,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("report values are finite or null");
            s.push('\n');
            s
        }
        Format::Table => format!(
            "# tqlab {command}  N={}  phi={}  seed={}\n{}",
            cfg.n,
            parse::format_complex_fixed(cfg.phi, 5),
            cfg.seed,
            report.text
        ),
    }
}

pub fn run<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Execution {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Execution {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };

    let file = match &cli.config {
        Some(path) => match std::fs::read_to_string(path).map_err(|e| TqError::Usage(format!("{}: {e}", path.display())))
            .and_then(|text| parse_config(&text))
        {
            Ok(s) => s,
            Err(e) => return Execution::usage(e),
        },
        None => Settings::new(),
    };
    let cfg = match RunConfig::resolve(&[&file, &flag_settings(&cli)], cli.inject_fault) {
        Ok(c) => c,
        Err(e) => return Execution::usage(e),
    };
    if let Err(e) = cfg.chain() {
        return Execution::usage(e);
    }
    let threads = match thread_count(&cfg) {
        Ok(t) => t,
        Err(e) => return Execution::usage(e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            return Execution {
                code: EXIT_FAILURE,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };

    let command = cli.command;
    let outcome = pool.install(|| match command {
        Command::Verify => commands::cmd_verify(&cfg),
        Command::Spectrum => commands::cmd_spectrum(&cfg),
        Command::Solve => commands::cmd_solve(&cfg),
        Command::Reconstruct => commands::cmd_reconstruct(&cfg),
    });
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            return Execution {
                code: EXIT_FAILURE,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };

    let mut stderr: String = report.warnings.iter().map(|w| format!("warning: {w}\n")).collect();
    let rendered = render(command.name(), &cfg, &report);
    let stdout = match &cfg.out {
        Some(path) => match std::fs::write(path, &rendered) {
            Ok(()) => String::new(),
            Err(e) => {
                stderr.push_str(&format!("error: {}: {e}\n", path.display()));
                return Execution {
                    code: EXIT_FAILURE,
                    stdout: String::new(),
                    stderr,
                };
            }
        },
        None => rendered,
    };
    Execution {
        code: report.code,
        stdout,
        stderr,
    }
}
