//! Row-major regression datasets and their CSV / sidecar representation.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::StandardizationParams;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("row has {found} values, expected {expected}")]
    RowLength { expected: usize, found: usize },
    #[error("index {index} out of range for {len} rows")]
    Index { index: usize, len: usize },
}

impl DatasetError {
    /// True for failures of the underlying file or stream.
    pub fn is_io(&self) -> bool {
        match self {
            DatasetError::Io(_) => true,
            DatasetError::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}

/// `(x_i, y_i)` pairs with fixed feature and label dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    feature_dim: usize,
    label_dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(feature_dim: usize, label_dim: usize) -> Self {
        Self {
            feature_dim,
            label_dim,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn with_capacity(feature_dim: usize, label_dim: usize, rows: usize) -> Self {
        Self {
            feature_dim,
            label_dim,
            features: Vec::with_capacity(rows * feature_dim),
            labels: Vec::with_capacity(rows * label_dim),
        }
    }

    pub fn push(&mut self, x: &[f64], y: &[f64]) -> Result<(), DatasetError> {
        if x.len() != self.feature_dim {
            return Err(DatasetError::RowLength {
                expected: self.feature_dim,
                found: x.len(),
            });
        }
        if y.len() != self.label_dim {
            return Err(DatasetError::RowLength {
                expected: self.label_dim,
                found: y.len(),
            });
        }
        self.features.extend_from_slice(x);
        self.labels.extend_from_slice(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len().checked_div(self.feature_dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn label_dim(&self) -> usize {
        self.label_dim
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    pub fn y(&self, i: usize) -> &[f64] {
        &self.labels[i * self.label_dim..(i + 1) * self.label_dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        self.features
            .chunks_exact(self.feature_dim)
            .zip(self.labels.chunks_exact(self.label_dim))
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Dataset, DatasetError> {
        let mut out = Dataset::with_capacity(self.feature_dim, self.label_dim, indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(DatasetError::Index {
                    index: i,
                    len: self.len(),
                });
            }
            out.features.extend_from_slice(self.x(i));
            out.labels.extend_from_slice(self.y(i));
        }
        Ok(out)
    }

    /// Rows `range` as a new dataset.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Dataset {
        Dataset {
            feature_dim: self.feature_dim,
            label_dim: self.label_dim,
            features: self.features[range.start * self.feature_dim..range.end * self.feature_dim]
                .to_vec(),
            labels: self.labels[range.start * self.label_dim..range.end * self.label_dim].to_vec(),
        }
    }

    /// Index of the first row holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.rows()
            .position(|(x, y)| x.iter().chain(y).any(|v| !v.is_finite()))
    }

    pub fn feature_column(&self, j: usize) -> impl Iterator<Item = f64> + Clone + '_ {
        self.features
            .iter()
            .skip(j)
            .step_by(self.feature_dim)
            .copied()
    }

    pub fn label_column(&self, j: usize) -> impl Iterator<Item = f64> + Clone + '_ {
        self.labels.iter().skip(j).step_by(self.label_dim).copied()
    }

    pub(crate) fn map_rows(
        &self,
        mut fx: impl FnMut(usize, f64) -> f64,
        mut fy: impl FnMut(usize, f64) -> f64,
    ) -> Dataset {
        let n = self.feature_dim;
        let m = self.label_dim;
        Dataset {
            feature_dim: n,
            label_dim: m,
            features: self
                .features
                .iter()
                .enumerate()
                .map(|(k, &v)| fx(k % n, v))
                .collect(),
            labels: self
                .labels
                .iter()
                .enumerate()
                .map(|(k, &v)| fy(k % m, v))
                .collect(),
        }
    }

    pub fn header(&self) -> Vec<String> {
        (0..self.feature_dim)
            .map(|j| format!("x{j}"))
            .chain((0..self.label_dim).map(|j| format!("y{j}")))
            .collect()
    }

    /// Writes `x0..,y0..` CSV; values use the shortest text that parses
    /// back to the same `f64`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DatasetError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(self.header())?;
        let mut record = Vec::with_capacity(self.feature_dim + self.label_dim);
        for (x, y) in self.rows() {
            record.clear();
            record.extend(x.iter().chain(y).map(|v| v.to_string()));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Dataset, DatasetError> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let (n, m) = parse_header(&headers)?;
        let mut out = Dataset::new(n, m);
        let mut row = vec![0.0; n + m];
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != n + m {
                return Err(DatasetError::Row {
                    row: i + 1,
                    message: format!("{} fields, expected {}", rec.len(), n + m),
                });
            }
            for (slot, field) in row.iter_mut().zip(rec.iter()) {
                *slot = field.trim().parse().map_err(|_| DatasetError::Row {
                    row: i + 1,
                    message: format!("not a number: {field:?}"),
                })?;
            }
            out.push(&row[..n], &row[n..])?;
        }
        Ok(out)
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), DatasetError> {
        self.write_csv(std::io::BufWriter::new(File::create(path)?))
    }

    pub fn load_csv(path: &Path) -> Result<Dataset, DatasetError> {
        Self::read_csv(std::io::BufReader::new(File::open(path)?))
    }
}

fn parse_header(headers: &csv::StringRecord) -> Result<(usize, usize), DatasetError> {
    let n = headers.iter().take_while(|h| h.starts_with('x')).count();
    let m = headers.len() - n;
    for (j, h) in headers.iter().enumerate() {
        let want = if j < n {
            format!("x{j}")
        } else {
            format!("y{}", j - n)
        };
        if h != want {
            return Err(DatasetError::Header(format!(
                "column {j} is {h:?}, expected {want:?}"
            )));
        }
    }
    if n == 0 || m == 0 {
        return Err(DatasetError::Header(
            "need at least one x and one y column".into(),
        ));
    }
    Ok((n, m))
}

/// Sidecar describing how a dataset CSV was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format_version: u32,
    pub generator: String,
    pub seed: u64,
    pub params: serde_json::Value,
    pub rows: usize,
    pub feature_dim: usize,
    pub label_dim: usize,
    /// Parameters fitted on this dataset; the CSV itself holds raw values.
    pub standardization: Option<StandardizationParams>,
    /// Invocation that produced the file, when written by a tool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<serde_json::Value>,
}

impl DatasetMeta {
    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        Ok(serde_json::from_reader(std::io::BufReader::new(
            File::open(path)?,
        ))?)
    }
}

/// `data.csv` -> `data.json`.
pub fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("json")
}
