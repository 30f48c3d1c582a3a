//! Named experiments: each resolves a [`RunConfig`], sweeps its grid on the
//! worker pool and returns a [`SweepReport`] plus auxiliary tables.

mod bounds;
mod cdt;
mod config;
mod hn;
mod aah;
mod output;
mod topology;

pub use bounds::run_bounds;
pub use cdt::{run_cdt_duo, run_cdt_mono};
pub use config::{schema, Experiment, Kind, KeySpec, RunConfig, Value};
pub use hn::run_hn;
pub use aah::run_aah;
pub use output::{write_outputs, Manifest};
pub use topology::run_topology;

use crate::diagnostics::{CsvTable, SweepReport};
use crate::error::Result;
use crate::landscape::LandscapeResult;
use crate::sweep::Workers;

/// Report plus named side tables (`profile_r0.90.csv`, `dos_grid.csv`, ...).
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: SweepReport,
    pub tables: Vec<(String, CsvTable)>,
}

/// Dispatches to the runner for `cfg.experiment`.
pub fn run(cfg: &RunConfig, workers: Workers) -> Result<RunOutput> {
    // Decompositions stay single-threaded so every point is bitwise
    // reproducible; parallelism is over grid points.
    faer::set_global_parallelism(faer::Par::Seq);
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Hn => run_hn(cfg, workers),
        Experiment::CdtMono => run_cdt_mono(cfg, workers),
        Experiment::CdtDuo => run_cdt_duo(cfg, workers),
        Experiment::Aah => run_aah(cfg, workers),
        Experiment::Ssh | Experiment::Bbh => run_topology(cfg, workers),
        Experiment::Bounds => run_bounds(cfg, workers),
    }
}

/// Counts landscape solves and norm-bound violations.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct BoundTally {
    pub solves: usize,
    pub violations: usize,
}

impl BoundTally {
    pub fn record(&mut self, land: &LandscapeResult) {
        self.solves += 1;
        if !land.norm_bound().holds {
            self.violations += 1;
        }
    }

    pub fn write(&self, report: &mut SweepReport) {
        report
            .summary
            .insert("norm_bound_solves".into(), self.solves as f64);
        report
            .summary
            .insert("norm_bound_violations".into(), self.violations as f64);
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}
