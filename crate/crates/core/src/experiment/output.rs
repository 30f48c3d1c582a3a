use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{RunConfig, RunOutput};
use crate::error::{Error, Result};
use crate::sweep::{parallel_enabled, Workers};

/// `manifest.json`: everything needed to repeat a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub config: Json,
    pub versions: BTreeMap<String, String>,
    pub wall_time_s: f64,
    pub workers: usize,
    pub parallel: bool,
    pub outputs: Vec<String>,
}

/// Writes `report.csv`, `report.json`, the side tables and `manifest.json`
/// into `dir`, creating it if needed.
pub fn write_outputs(
    dir: &Path,
    cfg: &RunConfig,
    out: &RunOutput,
    workers: Workers,
    wall_time_s: f64,
) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    out.report.write_csv(&dir.join("report.csv"))?;
    out.report.write_json(&dir.join("report.json"))?;
    let mut outputs = vec!["report.csv".to_string(), "report.json".to_string()];
    for (name, table) in &out.tables {
        table.write(&dir.join(name))?;
        outputs.push(name.clone());
    }
    let versions = BTreeMap::from([
        (
            env!("CARGO_PKG_NAME").to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        ),
        ("faer".to_string(), "0.24".to_string()),
    ]);
    let manifest = Manifest {
        experiment: cfg.experiment.to_string(),
        config: cfg.to_json(),
        versions,
        wall_time_s,
        workers: if parallel_enabled() { workers.resolved() } else { 1 },
        parallel: parallel_enabled(),
        outputs,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Decomposition(format!("manifest serialization: {e}")))?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
