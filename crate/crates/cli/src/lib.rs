//! Command-line front end: reads a JSON input document, runs one
//! computation, and writes a versioned JSON report (and optionally an SVG).

pub mod commands;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod report;
pub mod svg;

use std::io::Read;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser};
use serde_json::json;

pub use commands::{execute, Command, Outcome};
pub use config::{Overrides, Settings};
pub use error::CliError;

/// Environment variable that caps the worker threads.
pub const THREADS_ENV: &str = "HILBUND_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hilbund", version, about = "Löwner ellipsoids, bundle renormings and hyperspace checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Input JSON (default: stdin).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report path (default: stdout).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// TOML file with epsilon, tol, max_iter, seed, cap.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Relative optimality gap of the ellipsoid solver.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Command-specific acceptance tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Seed for randomized inputs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Enumeration cap for hyper-roundtrip.
    #[arg(long, global = true)]
    pub cap: Option<u64>,
    /// Also draw the two-dimensional objects to this SVG file.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Leave the timings section out of the report.
    #[arg(long, global = true)]
    pub no_timings: bool,
}

impl Options {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            epsilon: self.epsilon,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            cap: self.cap,
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if a pool already exists, which is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| CliError::Validation(vec![format!("cannot read {}: {e}", p.display())])),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Validation(vec![format!("cannot read stdin: {e}")]))?;
            Ok(s)
        }
    }
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => report::write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    configure_threads();
    match run_inner(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let diag = serde_json::to_string(&e.diagnostics()).expect("diagnostics serialize");
            eprintln!("{diag}");
            e.exit_code()
        }
    }
}

fn run_inner(cli: &Cli) -> Result<(), CliError> {
    let opts = &cli.options;
    let file = opts.config.as_deref().map(Overrides::load).transpose()?;
    let settings = Settings::resolve(opts.overrides(), file)?;
    let start = Instant::now();
    let input = read_input(&opts.input)?;
    let parsed = start.elapsed();
    let outcome = execute(cli.command, &input, &settings);
    let timings = (!opts.no_timings).then(|| report::Timings {
        parse_ms: parsed.as_secs_f64() * 1e3,
        compute_ms: (start.elapsed() - parsed).as_secs_f64() * 1e3,
    });
    match outcome {
        Ok(out) => {
            emit(&opts.output, &report::render(cli.command, &settings, "ok", &out.results, timings))?;
            if let Some(path) = &opts.svg {
                match &out.figure {
                    Some(panels) => report::write_atomic(path, &svg::render(panels))?,
                    None => eprintln!("warning: nothing two-dimensional to draw; --svg ignored"),
                }
            }
            Ok(())
        }
        Err(CliError::Convergence { iterations, gap, best }) => {
            let results = json!({
                "iterations": iterations,
                "gap": gap,
                "best": { "gram": hilbund::linalg::matrix_to_rows(best.gram()) },
            });
            emit(&opts.output, &report::render(cli.command, &settings, "non_convergence", &results, timings))?;
            Err(CliError::Convergence { iterations, gap, best })
        }
        Err(e) => Err(e),
    }
}
