//! Experiment runner CLI.
//!
//! Usage:
//!   chevetlab <experiment-name> [--n <list>] [--N <list>] [--k <list>]
//!             [--m <list>] [--theta <list>] [--trials <int>] [--seed <int>]
//!             [--c <real>] [--out <path>] [--format json|csv]
//!
//! Unset grid arguments fall back to each experiment's canonical grid.
//! CHEVETLAB_WORKERS overrides parallelism and never affects the numbers.
//! Exit code 0 means every verdict passed, 1 means some verdict failed,
//! 2 means the invocation itself was invalid.

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use chevetlab::harness::{self, emit, ExperimentName, ExperimentSpec, OutputFormat};

#[derive(Parser, Debug)]
#[command(name = "chevetlab", version, about = "seeded norm-bound experiments")]
struct Cli {
    /// Experiment name (chevet-ratio, lone-scaling, gamma-km-scaling, tails,
    /// l1-sharpness, rotation-gap, rip-grid, latala-comparison,
    /// gamma-sandwich, net-audit)
    experiment: String,

    /// Row-dimension grid, comma separated
    #[arg(long = "n", value_delimiter = ',')]
    n: Option<Vec<usize>>,

    /// Column-dimension grid, comma separated
    #[arg(long = "N", value_delimiter = ',')]
    cols: Option<Vec<usize>>,

    /// Row-sparsity grid
    #[arg(long = "k", value_delimiter = ',')]
    k: Option<Vec<usize>>,

    /// Column-sparsity grid
    #[arg(long = "m", value_delimiter = ',')]
    m: Option<Vec<usize>>,

    /// Isometry-defect grid (rip-grid only)
    #[arg(long = "theta", value_delimiter = ',')]
    theta: Option<Vec<f64>>,

    /// Monte Carlo trials per cell
    #[arg(long)]
    trials: Option<u64>,

    /// Master seed; every substream derives from it
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Explicit constant for the bounds that take one
    #[arg(long)]
    c: Option<f64>,

    /// Report path; stdout when omitted
    #[arg(long)]
    out: Option<std::path::PathBuf>,

    /// Report format
    #[arg(long, default_value = "json")]
    format: String,
}

fn build_spec(cli: &Cli) -> chevetlab::Result<(ExperimentSpec, OutputFormat)> {
    let name: ExperimentName = cli.experiment.parse()?;
    let mut spec = ExperimentSpec::with_defaults(name, cli.seed);
    if let Some(n) = &cli.n {
        spec.n_list = n.clone();
    }
    if let Some(cols) = &cli.cols {
        spec.col_list = cols.clone();
    }
    if let Some(k) = &cli.k {
        spec.k_list = k.clone();
    }
    if let Some(m) = &cli.m {
        spec.m_list = m.clone();
    }
    if let Some(theta) = &cli.theta {
        spec.theta_list = theta.clone();
    }
    if let Some(trials) = cli.trials {
        spec.trials = trials;
    }
    if let Some(c) = cli.c {
        spec.c = c;
    }
    spec.validate()?;
    let format: OutputFormat = cli.format.parse()?;
    Ok((spec, format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (spec, format) = match build_spec(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("chevetlab: {e}");
            return ExitCode::from(2);
        }
    };
    let workers = std::env::var("CHEVETLAB_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let report = match harness::run_with_workers(&spec, workers) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("chevetlab: {e}");
            return ExitCode::from(2);
        }
    };
    let emitted = match cli.out {
        Some(path) => std::fs::File::create(&path)
            .map_err(chevetlab::Error::from)
            .and_then(|mut f| emit(&report, format, &mut f)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit(&report, format, &mut lock)
                .and_then(|()| writeln!(lock).map_err(chevetlab::Error::from))
        }
    };
    if let Err(e) = emitted {
        eprintln!("chevetlab: {e}");
        return ExitCode::from(2);
    }
    for (name, ok) in &report.global_verdicts {
        eprintln!("{}: {}", name, if *ok { "pass" } else { "FAIL" });
    }
    let failed_cells = report
        .cells
        .iter()
        .filter(|c| c.verdict == Some(false) || c.error.is_some())
        .count();
    eprintln!(
        "{}: {} cells, {} failed, overall {}",
        spec.name.as_str(),
        report.cells.len(),
        failed_cells,
        if report.pass { "pass" } else { "FAIL" }
    );
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
