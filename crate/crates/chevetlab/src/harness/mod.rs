//! Seeded, reproducible experiment campaigns.
//!
//! Every experiment expands into an ordered list of cells; each cell draws
//! all of its randomness from substreams derived from (master seed,
//! experiment tag, cell index), so reports are byte-identical across runs
//! and worker counts. Workers only change the schedule, never the numbers.

mod corpus;
mod experiments;
mod report;

pub use corpus::{corpus_pairs, corpus_sets, PairKind};
pub use report::{
    emit, emit_csv, emit_json, CellParams, CellReport, ExperimentReport, OutputFormat,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The experiments the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    ChevetRatio,
    LoneScaling,
    GammaKmScaling,
    Tails,
    L1Sharpness,
    RotationGap,
    RipGrid,
    LatalaComparison,
    GammaSandwich,
    NetAudit,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 10] = [
        ExperimentName::ChevetRatio,
        ExperimentName::LoneScaling,
        ExperimentName::GammaKmScaling,
        ExperimentName::Tails,
        ExperimentName::L1Sharpness,
        ExperimentName::RotationGap,
        ExperimentName::RipGrid,
        ExperimentName::LatalaComparison,
        ExperimentName::GammaSandwich,
        ExperimentName::NetAudit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::ChevetRatio => "chevet-ratio",
            ExperimentName::LoneScaling => "lone-scaling",
            ExperimentName::GammaKmScaling => "gamma-km-scaling",
            ExperimentName::Tails => "tails",
            ExperimentName::L1Sharpness => "l1-sharpness",
            ExperimentName::RotationGap => "rotation-gap",
            ExperimentName::RipGrid => "rip-grid",
            ExperimentName::LatalaComparison => "latala-comparison",
            ExperimentName::GammaSandwich => "gamma-sandwich",
            ExperimentName::NetAudit => "net-audit",
        }
    }

    /// Substream tag separating experiments in the derivation path.
    fn tag(&self) -> u64 {
        match self {
            ExperimentName::ChevetRatio => 1,
            ExperimentName::LoneScaling => 2,
            ExperimentName::GammaKmScaling => 3,
            ExperimentName::Tails => 4,
            ExperimentName::L1Sharpness => 5,
            ExperimentName::RotationGap => 6,
            ExperimentName::RipGrid => 7,
            ExperimentName::LatalaComparison => 8,
            ExperimentName::GammaSandwich => 9,
            ExperimentName::NetAudit => 10,
        }
    }
}

impl std::str::FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .iter()
            .find(|n| n.as_str() == s)
            .copied()
            .ok_or_else(|| Error::InvalidGrid(format!("unknown experiment {s:?}")))
    }
}

/// Declarative experiment description: name, parameter grid, trials, seed,
/// and the explicit constant the bounds take as a parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    #[serde(rename = "n")]
    pub n_list: Vec<usize>,
    #[serde(rename = "N")]
    pub col_list: Vec<usize>,
    #[serde(rename = "k")]
    pub k_list: Vec<usize>,
    #[serde(rename = "m")]
    pub m_list: Vec<usize>,
    #[serde(rename = "theta")]
    pub theta_list: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub c: f64,
}

impl ExperimentSpec {
    /// The canonical grid for each experiment; list/trial/constant overrides
    /// come from the CLI.
    pub fn with_defaults(name: ExperimentName, seed: u64) -> Self {
        let (n_list, col_list, k_list, m_list, theta_list, trials, c): (
            Vec<usize>,
            Vec<usize>,
            Vec<usize>,
            Vec<usize>,
            Vec<f64>,
            u64,
            f64,
        ) = match name {
            ExperimentName::ChevetRatio => (
                vec![8, 16, 32],
                vec![8, 16, 32],
                vec![2],
                vec![2],
                vec![],
                400,
                1.0,
            ),
            ExperimentName::LoneScaling => (
                vec![1, 2, 4, 8, 16, 32, 64],
                vec![1, 4, 16, 64, 256, 1024, 4096],
                vec![],
                vec![],
                vec![],
                2000,
                1.0,
            ),
            ExperimentName::GammaKmScaling => (
                vec![32],
                vec![32],
                vec![1, 2, 4, 8],
                vec![1, 2, 4, 8],
                vec![],
                200,
                1.0,
            ),
            ExperimentName::Tails => (vec![16], vec![16], vec![], vec![], vec![], 100_000, 1.0),
            ExperimentName::L1Sharpness => (
                vec![2, 3, 4, 5, 6, 7, 8],
                vec![],
                vec![],
                vec![],
                vec![],
                2000,
                1.0,
            ),
            ExperimentName::RotationGap => {
                (vec![2, 3, 4], vec![], vec![], vec![], vec![], 2000, 0.5)
            }
            ExperimentName::RipGrid => (
                vec![12, 16],
                vec![12, 16],
                vec![],
                vec![],
                vec![0.5, 0.7],
                150,
                3.0,
            ),
            ExperimentName::LatalaComparison => {
                (vec![8, 16, 32], vec![], vec![], vec![], vec![], 20_000, 1.0)
            }
            ExperimentName::GammaSandwich => (vec![], vec![], vec![], vec![], vec![], 20_000, 1.0),
            ExperimentName::NetAudit => {
                (vec![16], vec![], vec![1, 3, 7], vec![], vec![], 10_000, 1.0)
            }
        };
        ExperimentSpec {
            name,
            n_list,
            col_list,
            k_list,
            m_list,
            theta_list,
            trials,
            seed,
            c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 100 {
            return Err(Error::InvalidGrid(format!(
                "trials must be at least 100, got {}",
                self.trials
            )));
        }
        let needs_n = !matches!(self.name, ExperimentName::GammaSandwich);
        if needs_n && self.n_list.is_empty() {
            return Err(Error::InvalidGrid("empty n grid".into()));
        }
        let needs_cols = matches!(
            self.name,
            ExperimentName::ChevetRatio
                | ExperimentName::LoneScaling
                | ExperimentName::GammaKmScaling
                | ExperimentName::Tails
                | ExperimentName::RipGrid
        );
        if needs_cols && self.col_list.is_empty() {
            return Err(Error::InvalidGrid("empty N grid".into()));
        }
        if matches!(
            self.name,
            ExperimentName::GammaKmScaling | ExperimentName::NetAudit
        ) && self.k_list.is_empty()
        {
            return Err(Error::InvalidGrid("empty k grid".into()));
        }
        if matches!(self.name, ExperimentName::GammaKmScaling) && self.m_list.is_empty() {
            return Err(Error::InvalidGrid("empty m grid".into()));
        }
        if matches!(self.name, ExperimentName::RipGrid) && self.theta_list.is_empty() {
            return Err(Error::InvalidGrid("empty theta grid".into()));
        }
        if self.theta_list.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return Err(Error::InvalidGrid("theta values must lie in (0,1)".into()));
        }
        if !(self.c > 0.0) {
            return Err(Error::InvalidGrid("c must be positive".into()));
        }
        Ok(())
    }
}

/// Run with the ambient rayon pool.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    run_with_workers(spec, None)
}

/// Run inside a dedicated pool with the given worker count. The count never
/// affects the produced report.
pub fn run_with_workers(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentReport> {
    spec.validate()?;
    let body = || experiments::dispatch(spec);
    let (cells, verdicts, fitted) = match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidGrid(format!("worker pool: {e}")))?;
            pool.install(body)?
        }
        None => body()?,
    };
    let pass = verdicts.values().all(|v| *v)
        && cells
            .iter()
            .all(|c| c.verdict != Some(false) && c.error.is_none());
    Ok(ExperimentReport {
        spec: spec.clone(),
        toolchain: format!(
            "chevetlab {} ({}-{})",
            env!("CARGO_PKG_VERSION"),
            std::env::consts::ARCH,
            std::env::consts::OS
        ),
        master_seed: spec.seed,
        cells,
        global_verdicts: verdicts,
        fitted,
        pass,
    })
}
