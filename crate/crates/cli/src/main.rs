//! Command-line entry point. Expands the configured parameter grid into
//! check tasks, runs them on a bounded worker pool, prints a table and
//! optionally writes a JSON report.
//!
//! Exit codes: 0 all checks pass, 1 at least one check failed,
//! 2 configuration error, 3 internal error.

mod config;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{parse_config_file, SuiteConfig, SUITES};
use report::{print_table, ReportDocument};

#[derive(Parser, Debug)]
#[command(
    name = "verify",
    about = "Exact and numerical checks for the product-space toolkit",
    version
)]
struct Cli {
    /// Which suite to run
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
    suite: String,

    /// Sphere/hyperbolic dimensions to sweep
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,

    /// Flat-factor dimensions to sweep
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,

    /// Curvature signs (+1, -1)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c: Option<Vec<i8>>,

    /// Angle parameters as rationals p/q in (0, 1)
    #[arg(long, value_delimiter = ',')]
    tau: Option<Vec<String>>,

    /// Slopes for the circle-product family
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,

    /// Slopes for the hyperbolic family
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Option<Vec<f64>>,

    /// Table depth: an integer or "auto" for (m+1)n + 2
    #[arg(long)]
    kmax: Option<String>,

    /// Seed for all randomized checks
    #[arg(long)]
    seed: Option<u64>,

    /// Random trials per parameter point
    #[arg(long)]
    trials: Option<usize>,

    /// Geometry family: s1, hn or both
    #[arg(long)]
    family: Option<String>,

    /// Write the JSON report here
    #[arg(long)]
    out: Option<PathBuf>,

    /// key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> Result<SuiteConfig, config::ConfigError> {
    let mut cfg = SuiteConfig::default();
    if let Some(path) = &cli.config {
        parse_config_file(path, &mut cfg)?;
    }
    cfg.suite = cli.suite.clone();
    if let Some(v) = &cli.n {
        cfg.n = v.clone();
    }
    if let Some(v) = &cli.m {
        cfg.m = v.clone();
    }
    if let Some(v) = &cli.c {
        cfg.c = v.clone();
    }
    if let Some(v) = &cli.tau {
        cfg.set("tau", &v.join(","))?;
    }
    if let Some(v) = &cli.kappa {
        cfg.kappa = v.clone();
    }
    if let Some(v) = &cli.a {
        cfg.a = v.clone();
    }
    if let Some(v) = &cli.kmax {
        cfg.set("kmax", v)?;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.trials {
        cfg.trials = v;
    }
    if let Some(v) = &cli.family {
        cfg.family = v.clone();
    }
    if let Some(v) = &cli.out {
        cfg.out = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let records = suites::run_suites(&cfg);
    if records.is_empty() {
        eprintln!("configuration error: the parameter grid produced no checks");
        return ExitCode::from(2);
    }
    let doc = ReportDocument::new(records);
    print_table(&doc);
    if let Some(path) = &cfg.out {
        let json = match serde_json::to_string_pretty(&doc) {
            Ok(j) => j,
            Err(e) => {
                eprintln!("internal error: cannot serialize the report: {e}");
                return ExitCode::from(3);
            }
        };
        if let Err(e) = std::fs::write(path, json + "\n") {
            eprintln!("internal error: cannot write {}: {e}", path.display());
            return ExitCode::from(3);
        }
    }
    if doc.records.iter().any(|r| r.status == "error") {
        ExitCode::from(3)
    } else if doc.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
