//! Reading and writing files shared by the subcommands.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use eds_core::datagen::{standardize, StandardizationParams};
use eds_core::dataset::Dataset;
use eds_core::eds::{EdsResult, VerificationReport};
use eds_core::metrics::MetricsReport;
use eds_core::sysid::{Evaluation, SparseModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::Command;

pub const EDS_RESULT: &str = "eds_result.json";
pub const REPRESENTATIVE_CSV: &str = "representative.csv";
pub const AUXILIARY_CSV: &str = "auxiliary.csv";
pub const METRICS: &str = "metrics.json";
pub const SINDY: &str = "sindy.json";
pub const REPORT: &str = "report.json";

pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    Dataset::load_csv(path).map_err(|e| CliError::dataset(path, e))
}

pub fn save_dataset(path: &Path, data: &Dataset) -> CliResult<()> {
    data.save_csv(path).map_err(|e| CliError::dataset(path, e))
}

pub fn standardized(path: &Path, data: &Dataset) -> CliResult<(Dataset, StandardizationParams)> {
    standardize(data).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let write = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()
    };
    write().map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(BufReader::new(f))
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Writes rows of already formatted fields with a header line.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let write = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", header.join(","))?;
        for r in rows {
            writeln!(w, "{}", r.join(","))?;
        }
        w.flush()
    };
    write().map_err(|e| CliError::io(path, e))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub path: PathBuf,
    pub rows: usize,
    pub feature_dim: usize,
    pub label_dim: usize,
}

impl DatasetSummary {
    pub fn new(path: &Path, data: &Dataset) -> Self {
        Self {
            path: path.to_path_buf(),
            rows: data.len(),
            feature_dim: data.feature_dim(),
            label_dim: data.label_dim(),
        }
    }

    /// Rejects a dataset that does not have the recorded shape.
    pub fn check(&self, path: &Path, data: &Dataset) -> CliResult<()> {
        let shape = (data.len(), data.feature_dim(), data.label_dim());
        if shape != (self.rows, self.feature_dim, self.label_dim) {
            return Err(CliError::invalid(format!(
                "{} has shape {shape:?}, but the artifact was made from {} with {:?}",
                path.display(),
                self.path.display(),
                (self.rows, self.feature_dim, self.label_dim)
            )));
        }
        Ok(())
    }
}

/// `eds_result.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdsArtifact {
    pub format_version: u32,
    pub run_config: Command,
    pub input: DatasetSummary,
    /// Fitted on the input; curation ran in these units.
    pub standardization: StandardizationParams,
    pub result: EdsResult,
    pub verification: VerificationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SubsetSource {
    Representative { result: PathBuf },
    Random { seed: u64 },
    All,
}

/// Output of `metrics`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsArtifact {
    pub format_version: u32,
    pub run_config: Command,
    pub subset: SubsetSource,
    pub subset_size: usize,
    pub report: MetricsReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RolloutArtifact {
    pub x0: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub diverged_at: Option<usize>,
    /// Raw units, `steps + 1` states; empty on divergence.
    pub trajectory: Vec<Vec<f64>>,
}

/// Output of `sindy`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SindyArtifact {
    pub format_version: u32,
    pub run_config: Command,
    pub train: DatasetSummary,
    pub test: DatasetSummary,
    pub standardization: StandardizationParams,
    pub term_names: Vec<String>,
    pub converged: bool,
    /// Coefficients in standardized units.
    pub model: SparseModel,
    pub model_raw: SparseModel,
    /// Test-set scores in standardized label units.
    pub evaluation: Evaluation,
    pub evaluation_raw: Evaluation,
    pub rollout: Option<RolloutArtifact>,
}
