//! Dimension-generic incremental Delaunay triangulation.
//!
//! Points are inserted one at a time with the Bowyer–Watson cavity scheme.
//! The exterior of the convex hull is covered by *virtual* simplices that
//! share a single symbolic vertex at infinity, so points outside the hull
//! can be inserted without special cases and "outside" is detected simply
//! as landing in a virtual simplex. Virtual simplices never take part in
//! interpolation or metrics.
//!
//! Predicates are evaluated in `f64` with scale-relative tolerances; see
//! [`predicates`].

mod export;
pub mod predicates;
mod triangulation;

pub use export::{ExportSimplex, TriangulationExport};
pub use predicates::{barycentric, in_sphere, size_gs, volume, SphereSide};
pub use triangulation::{
    BarycentricCoords, BoundingBox, Location, Simplex, SimplexId, SimplexView, Triangulation,
    VertexId, INFINITE_VERTEX,
};

use thiserror::Error;

/// Weights at or above this value count as "inside" a simplex.
pub const WEIGHT_TOLERANCE: f64 = 1e-10;
/// Points closer than this to an existing vertex are duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;
/// Normalized determinant below which a simplex is treated as flat.
pub const QUALITY_TOLERANCE: f64 = 1e-12;
/// Radius of the admissible insertion domain, in bounding-box diagonals.
pub const SUPER_SIMPLEX_SCALE: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("expected a point of dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("seed points are affinely dependent")]
    DegenerateSeed,
    #[error("need {expected} seed points, got {found}")]
    SeedCount { expected: usize, found: usize },
    #[error("point has a non-finite coordinate")]
    NonFinitePoint,
    #[error("simplex is singular (normalized determinant {quality:e})")]
    SingularSimplex { quality: f64 },
    #[error("point duplicates vertex {vertex}")]
    DuplicatePoint { vertex: VertexId },
    #[error("point lies outside the bounding super-simplex")]
    OutsideSuperSimplex,
    #[error("triangulation has no simplices")]
    EmptyTriangulation,
    #[error("cavity could not be made star-shaped around the new point")]
    DegenerateCavity,
    #[error("triangulation is corrupt: {0}")]
    Corrupt(String),
}
