//! Piecewise-linear interpolation over a Delaunay triangulation.
//!
//! Predictions are barycentric combinations of vertex labels inside the
//! containing real simplex; queries outside the convex hull return
//! [`Prediction::Outside`] rather than extrapolating.

mod hessian;

pub use hessian::{
    error_upper_bound, max_hessian_norm, HessianOracle, ScalarField, VectorField, FD_STEP,
    PROBE_SEED,
};

use thiserror::Error;

use crate::geometry::{
    BoundingBox, GeometryError, Location, SimplexId, SimplexView, Triangulation, VertexId,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimError {
    #[error("{vertices} vertices but {labels} labels")]
    LabelCount { vertices: usize, labels: usize },
    #[error("label has dimension {found}, expected {expected}")]
    LabelDimension { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Prediction {
    Value(Vec<f64>),
    Outside,
}

impl Prediction {
    pub fn value(&self) -> Option<&[f64]> {
        match self {
            Prediction::Value(v) => Some(v),
            Prediction::Outside => None,
        }
    }
}

/// A triangulation paired with one label vector per real vertex.
#[derive(Clone, Debug)]
pub struct LinearInterpolationModel {
    triangulation: Triangulation,
    labels: Vec<f64>,
    label_dim: usize,
}

impl LinearInterpolationModel {
    pub fn new(triangulation: Triangulation, labels: &[&[f64]]) -> Result<Self, LimError> {
        if labels.len() != triangulation.num_vertices() {
            return Err(LimError::LabelCount {
                vertices: triangulation.num_vertices(),
                labels: labels.len(),
            });
        }
        let label_dim = labels.first().map_or(0, |l| l.len());
        let mut flat = Vec::with_capacity(labels.len() * label_dim);
        for l in labels {
            if l.len() != label_dim {
                return Err(LimError::LabelDimension {
                    expected: label_dim,
                    found: l.len(),
                });
            }
            flat.extend_from_slice(l);
        }
        Ok(Self {
            triangulation,
            labels: flat,
            label_dim,
        })
    }

    /// Seeds a model from `n + 1` labelled points.
    pub fn from_seed(
        features: &[&[f64]],
        labels: &[&[f64]],
        bbox: &BoundingBox,
    ) -> Result<Self, LimError> {
        let t = Triangulation::new(features, bbox)?;
        Self::new(t, labels)
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.triangulation
    }

    pub fn label_dim(&self) -> usize {
        self.label_dim
    }

    pub fn label(&self, v: VertexId) -> &[f64] {
        &self.labels[v * self.label_dim..(v + 1) * self.label_dim]
    }

    /// Inserts a labelled point into the underlying triangulation.
    pub fn insert(&mut self, x: &[f64], y: &[f64]) -> Result<VertexId, LimError> {
        if y.len() != self.label_dim {
            return Err(LimError::LabelDimension {
                expected: self.label_dim,
                found: y.len(),
            });
        }
        let v = self.triangulation.insert(x)?;
        self.labels.extend_from_slice(y);
        Ok(v)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction, GeometryError> {
        Ok(match self.triangulation.locate(x)? {
            Location::Inside(b) => Prediction::Value(self.combine(b.simplex_id, &b.weights)),
            Location::Outside => Prediction::Outside,
        })
    }

    /// `||f_hat(x) - y||_2`, or `None` when `x` is outside the hull.
    pub fn point_error(&self, x: &[f64], y: &[f64]) -> Result<Option<f64>, GeometryError> {
        Ok(match self.triangulation.locate(x)? {
            Location::Inside(b) => Some(self.error_with(b.simplex_id, &b.weights, y)),
            Location::Outside => None,
        })
    }

    /// Like [`point_error`](Self::point_error) but also returns the simplex
    /// the point fell in.
    pub fn locate_error(
        &self,
        x: &[f64],
        y: &[f64],
    ) -> Result<Option<(SimplexId, f64)>, GeometryError> {
        Ok(match self.triangulation.locate(x)? {
            Location::Inside(b) => {
                Some((b.simplex_id, self.error_with(b.simplex_id, &b.weights, y)))
            }
            Location::Outside => None,
        })
    }

    /// Interpolated label for given barycentric weights in a real simplex.
    pub fn combine(&self, simplex: SimplexId, weights: &[f64]) -> Vec<f64> {
        let s = self
            .triangulation
            .simplex(simplex)
            .expect("combine on a live simplex");
        let mut out = vec![0.0; self.label_dim];
        for (&v, &w) in s.vertices().iter().zip(weights) {
            for (o, l) in out.iter_mut().zip(self.label(v)) {
                *o += w * l;
            }
        }
        out
    }

    fn error_with(&self, simplex: SimplexId, weights: &[f64], y: &[f64]) -> f64 {
        self.combine(simplex, weights)
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Vertex labels of a real simplex, in vertex order.
    pub fn simplex_labels(&self, view: &SimplexView<'_>) -> Vec<&[f64]> {
        view.vertex_ids.iter().map(|&v| self.label(v)).collect()
    }
}
