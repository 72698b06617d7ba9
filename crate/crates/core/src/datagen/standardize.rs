use serde::{Deserialize, Serialize};

use super::DatagenError;
use crate::dataset::Dataset;

/// Per-column means and population standard deviations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub label_mean: Vec<f64>,
    pub label_std: Vec<f64>,
}

fn moments(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (count, sum) = values.clone().fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
    let mean = sum / count as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / count as f64;
    (mean, var.sqrt())
}

impl StandardizationParams {
    pub fn fit(data: &Dataset) -> Result<Self, DatagenError> {
        if data.len() < 2 {
            return Err(DatagenError::TooFewSamples(data.len()));
        }
        let mut p = StandardizationParams {
            feature_mean: Vec::new(),
            feature_std: Vec::new(),
            label_mean: Vec::new(),
            label_std: Vec::new(),
        };
        for j in 0..data.feature_dim() {
            let (m, s) = moments(data.feature_column(j));
            if !(s > 0.0) {
                return Err(DatagenError::ConstantColumn(format!("x{j}")));
            }
            p.feature_mean.push(m);
            p.feature_std.push(s);
        }
        for j in 0..data.label_dim() {
            let (m, s) = moments(data.label_column(j));
            if !(s > 0.0) {
                return Err(DatagenError::ConstantColumn(format!("y{j}")));
            }
            p.label_mean.push(m);
            p.label_std.push(s);
        }
        Ok(p)
    }

    pub fn apply(&self, data: &Dataset) -> Dataset {
        data.map_rows(
            |j, v| (v - self.feature_mean[j]) / self.feature_std[j],
            |j, v| (v - self.label_mean[j]) / self.label_std[j],
        )
    }

    pub fn invert(&self, data: &Dataset) -> Dataset {
        data.map_rows(
            |j, v| v * self.feature_std[j] + self.feature_mean[j],
            |j, v| v * self.label_std[j] + self.label_mean[j],
        )
    }

    pub fn raw_features(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_std)
            .map(|((v, m), s)| v * s + m)
            .collect()
    }

    pub fn scaled_features(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn scaled_labels(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.label_mean)
            .zip(&self.label_std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn raw_labels(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.label_mean)
            .zip(&self.label_std)
            .map(|((v, m), s)| v * s + m)
            .collect()
    }
}

/// Z-scores every column, returning the fitted parameters.
pub fn standardize(data: &Dataset) -> Result<(Dataset, StandardizationParams), DatagenError> {
    let p = StandardizationParams::fit(data)?;
    Ok((p.apply(data), p))
}
