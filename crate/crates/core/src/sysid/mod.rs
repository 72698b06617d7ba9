//! Sparse identification of dynamics: polynomial libraries, Lasso by
//! cyclic coordinate descent, evaluation and forward simulation.

mod library;

pub use library::PolyLibrary;

use library::{affine_poly, poly_mul, Poly};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{integrate, DatagenError, StandardizationParams};
use crate::dataset::Dataset;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SysidError {
    #[error("expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no training rows")]
    Empty,
    #[error("model maps {inputs} inputs to {outputs} outputs; rollout needs a square model")]
    NotSquare { inputs: usize, outputs: usize },
    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            tol: 1e-6,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFit {
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitInfo {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub outputs: Vec<OutputFit>,
}

impl FitInfo {
    pub fn converged(&self) -> bool {
        self.outputs.iter().all(|o| o.converged)
    }
}

/// Coefficients indexed `[term][output]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseModel {
    pub library: PolyLibrary,
    pub coefficients: Vec<Vec<f64>>,
    pub fit: FitInfo,
}

/// Dense column-major design matrix.
pub struct Design {
    rows: usize,
    columns: Vec<Vec<f64>>,
}

impl Design {
    pub fn new(library: &PolyLibrary, data: &Dataset) -> Self {
        let mut columns = vec![Vec::with_capacity(data.len()); library.len()];
        let mut buf = Vec::with_capacity(library.len());
        for (x, _) in data.rows() {
            library.featurize_into(x, &mut buf);
            for (c, v) in columns.iter_mut().zip(&buf) {
                c.push(*v);
            }
        }
        Self {
            rows: data.len(),
            columns,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn objective(residual: &[f64], w: &[f64], alpha: f64) -> f64 {
    let n = residual.len() as f64;
    dot(residual, residual) / (2.0 * n) + alpha * w.iter().map(|v| v.abs()).sum::<f64>()
}

/// Minimizes `(1/2N)||y - F w||^2 + alpha ||w||_1` for one output. When
/// `trace` is given, the objective after every sweep is appended to it.
pub fn lasso_single(
    design: &Design,
    y: &[f64],
    config: &LassoConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> (Vec<f64>, OutputFit) {
    let n = design.rows as f64;
    let p = design.columns.len();
    let norms: Vec<f64> = design.columns.iter().map(|c| dot(c, c) / n).collect();
    let mut w = vec![0.0; p];
    let mut r = y.to_vec();
    if let Some(t) = trace.as_deref_mut() {
        t.push(objective(&r, &w, config.alpha));
    }
    for iter in 1..=config.max_iter {
        let mut max_delta = 0.0_f64;
        for j in 0..p {
            if norms[j] == 0.0 {
                continue;
            }
            let col = &design.columns[j];
            let rho = dot(col, &r) / n + norms[j] * w[j];
            let new = soft_threshold(rho, config.alpha) / norms[j];
            let delta = new - w[j];
            if delta != 0.0 {
                for (ri, ci) in r.iter_mut().zip(col) {
                    *ri -= delta * ci;
                }
                w[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(objective(&r, &w, config.alpha));
        }
        if max_delta < config.tol {
            return (
                w,
                OutputFit {
                    iterations: iter,
                    converged: true,
                },
            );
        }
    }
    (
        w,
        OutputFit {
            iterations: config.max_iter,
            converged: false,
        },
    )
}

/// Fits every label column of `data` on the library features.
pub fn lasso_fit(
    library: &PolyLibrary,
    data: &Dataset,
    config: &LassoConfig,
) -> Result<SparseModel, SysidError> {
    if data.feature_dim() != library.dim {
        return Err(SysidError::DimensionMismatch {
            expected: library.dim,
            found: data.feature_dim(),
        });
    }
    if data.is_empty() {
        return Err(SysidError::Empty);
    }
    if !(config.alpha >= 0.0 && config.tol > 0.0) {
        return Err(SysidError::InvalidParams(
            "alpha must be non-negative and tol positive".into(),
        ));
    }
    let design = Design::new(library, data);
    let mut coefficients = vec![vec![0.0; data.label_dim()]; library.len()];
    let mut outputs = Vec::with_capacity(data.label_dim());
    for o in 0..data.label_dim() {
        let y: Vec<f64> = data.label_column(o).collect();
        let (w, fit) = lasso_single(&design, &y, config, None);
        if !fit.converged {
            log::warn!("lasso output {o} did not converge in {} sweeps", fit.iterations);
        }
        for (row, v) in coefficients.iter_mut().zip(w) {
            row[o] = v;
        }
        outputs.push(fit);
    }
    Ok(SparseModel {
        library: library.clone(),
        coefficients,
        fit: FitInfo {
            alpha: config.alpha,
            tol: config.tol,
            max_iter: config.max_iter,
            outputs,
        },
    })
}

impl SparseModel {
    pub fn outputs(&self) -> usize {
        self.coefficients.first().map_or(0, |r| r.len())
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let f = self.library.featurize(x);
        let mut out = vec![0.0; self.outputs()];
        for (fv, row) in f.iter().zip(&self.coefficients) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += fv * c;
            }
        }
        out
    }

    /// Coefficient column of one output.
    pub fn output_coefficients(&self, o: usize) -> Vec<f64> {
        self.coefficients.iter().map(|r| r[o]).collect()
    }

    /// Re-expresses a model fitted on standardized data in raw units.
    pub fn to_raw(&self, params: &StandardizationParams) -> SparseModel {
        let dim = self.library.dim;
        let mut raw = vec![vec![0.0; self.outputs()]; self.library.len()];
        for (t, exps) in self.library.terms.iter().enumerate() {
            let mut poly: Poly = Poly::from([(vec![0; dim], 1.0)]);
            for (k, &e) in exps.iter().enumerate() {
                let factor = affine_poly(dim, k, params.feature_mean[k], params.feature_std[k]);
                for _ in 0..e {
                    poly = poly_mul(&poly, &factor);
                }
            }
            for (e, c) in poly {
                let idx = self
                    .library
                    .index_of(&e)
                    .expect("expansion stays within the library degree");
                for (o, r) in raw[idx].iter_mut().enumerate() {
                    *r += c * self.coefficients[t][o] * params.label_std[o];
                }
            }
        }
        for (r, m) in raw[0].iter_mut().zip(&params.label_mean) {
            *r += m;
        }
        SparseModel {
            library: self.library.clone(),
            coefficients: raw,
            fit: self.fit.clone(),
        }
    }
}

/// Scale-free coefficient magnitudes `|c| * sd(term) / sd(y)` over a
/// dataset, indexed `[term][output]`. Constant terms get 0.
pub fn standardized_magnitudes(model: &SparseModel, data: &Dataset) -> Vec<Vec<f64>> {
    let design = Design::new(&model.library, data);
    let sd = |v: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = v.collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let term_sd: Vec<f64> = (0..model.library.len())
        .map(|j| sd(&mut design.column(j).iter().copied()))
        .collect();
    let label_sd: Vec<f64> = (0..model.outputs())
        .map(|o| sd(&mut data.label_column(o)))
        .collect();
    model
        .coefficients
        .iter()
        .zip(&term_sd)
        .map(|(row, s)| {
            row.iter()
                .zip(&label_sd)
                .map(|(c, ly)| c.abs() * s / ly)
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub rmse: f64,
    /// Largest per-sample infinity norm of the residual.
    pub max_error: f64,
}

pub fn evaluate(model: &SparseModel, data: &Dataset) -> Result<Evaluation, SysidError> {
    if data.feature_dim() != model.library.dim {
        return Err(SysidError::DimensionMismatch {
            expected: model.library.dim,
            found: data.feature_dim(),
        });
    }
    if data.label_dim() != model.outputs() {
        return Err(SysidError::DimensionMismatch {
            expected: model.outputs(),
            found: data.label_dim(),
        });
    }
    if data.is_empty() {
        return Err(SysidError::Empty);
    }
    let m = data.label_dim() as f64;
    let mut sq = 0.0;
    let mut max_error = 0.0_f64;
    for (x, y) in data.rows() {
        let r: Vec<f64> = model.predict(x).iter().zip(y).map(|(p, t)| p - t).collect();
        sq += r.iter().map(|v| v * v).sum::<f64>() / m;
        max_error = r.iter().fold(max_error, |a, v| a.max(v.abs()));
    }
    Ok(Evaluation {
        rmse: (sq / data.len() as f64).sqrt(),
        max_error,
    })
}

/// RK4 simulation of the identified right-hand side; `steps + 1` states.
pub fn rollout(
    model: &SparseModel,
    x0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>, SysidError> {
    if model.outputs() != model.library.dim {
        return Err(SysidError::NotSquare {
            inputs: model.library.dim,
            outputs: model.outputs(),
        });
    }
    if x0.len() != model.library.dim {
        return Err(SysidError::DimensionMismatch {
            expected: model.library.dim,
            found: x0.len(),
        });
    }
    integrate(|s| model.predict(s), x0, dt, steps).map_err(|e| match e {
        DatagenError::NonFiniteState { step } => SysidError::NonFiniteState { step },
        other => SysidError::InvalidParams(other.to_string()),
    })
}
