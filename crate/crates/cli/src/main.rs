//! `zaremba`: runs the eigenvalue experiments from flags or a flat
//! `key = value` config file.
//!
//! Exit status: 0 success, 1 findings (a checked inequality failed),
//! 2 runtime error, 64 usage error.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{RawConfig, RunConfig, KEYS};

const EXIT_FINDINGS: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "zaremba",
    version,
    about = "Mixed Dirichlet-Neumann eigenvalue experiments on the unit disk",
    after_help = key_help()
)]
struct Cli {
    /// Experiment: solve, sweep, beta-c, minimize, maximize, smear,
    /// nodal-audit or converge. May come from the config file instead.
    command: Option<String>,
    /// Flat `key = value` file; flags override it. A manifest written by
    /// an earlier run is a valid config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
    #[arg(long)]
    family: Option<String>,
    /// Angles take decimals (radians) or `<p>/<q>pi`, `0.25pi`, `pi`.
    #[arg(long)]
    ell: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    rotation: Option<String>,
    #[arg(long)]
    arcs: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    grading_levels: Option<String>,
    #[arg(long)]
    grading_ratio: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    junctions_dirichlet: Option<String>,
    #[arg(long)]
    grid_den: Option<String>,
    #[arg(long)]
    grid_max: Option<String>,
    #[arg(long)]
    estimate_tol: Option<String>,
    #[arg(long)]
    lo: Option<String>,
    #[arg(long)]
    hi: Option<String>,
    #[arg(long)]
    tol_beta: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    sample_seed: Option<String>,
    #[arg(long)]
    n_max: Option<String>,
    #[arg(long)]
    ns: Option<String>,
    #[arg(long)]
    h_list: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("command", &self.command),
            ("family", &self.family),
            ("ell", &self.ell),
            ("beta", &self.beta),
            ("n", &self.n),
            ("a", &self.a),
            ("b", &self.b),
            ("rotation", &self.rotation),
            ("arcs", &self.arcs),
            ("h", &self.h),
            ("grading_levels", &self.grading_levels),
            ("grading_ratio", &self.grading_ratio),
            ("k", &self.k),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("junctions_dirichlet", &self.junctions_dirichlet),
            ("grid_den", &self.grid_den),
            ("grid_max", &self.grid_max),
            ("estimate_tol", &self.estimate_tol),
            ("lo", &self.lo),
            ("hi", &self.hi),
            ("tol_beta", &self.tol_beta),
            ("samples", &self.samples),
            ("sample_seed", &self.sample_seed),
            ("n_max", &self.n_max),
            ("ns", &self.ns),
            ("h_list", &self.h_list),
            ("out", &self.out),
            ("workers", &self.workers),
        ]
    }
}

fn key_help() -> String {
    let mut s = String::from("Config keys (flag --key-name, file key_name = value):\n");
    for (k, d, help) in KEYS {
        s.push_str(&format!("  {k:<20} {help} [default: {d}]\n"));
    }
    s
}

fn resolve(cli: &Cli) -> Result<RunConfig, String> {
    let mut raw = RawConfig::defaults();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        raw.merge_text(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    for (key, value) in cli.overrides() {
        if let Some(v) = value {
            raw.set(key, v).map_err(|e| e.to_string())?;
        }
    }
    RunConfig::from_raw(raw).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}\n\nRun `zaremba --help` for the accepted keys.");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if cfg.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }

    match run::run(&cfg) {
        Ok(findings) if findings.is_empty() => ExitCode::SUCCESS,
        Ok(findings) => {
            for f in &findings {
                println!("FINDING: {f}");
            }
            ExitCode::from(EXIT_FINDINGS)
        }
        Err(run::RunError::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
