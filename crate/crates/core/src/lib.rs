//! Error distribution smoothing for imbalanced regression data.
//!
//! The crate curates a small representative subset of a regression dataset
//! by streaming points through an incremental Delaunay triangulation and
//! keeping only those whose piecewise-linear interpolation error exceeds a
//! threshold. It also measures dataset imbalance through complexity-to-density
//! ratios and evaluates sparse system identification on curated data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod dataset;
pub mod eds;
pub mod geometry;
pub mod lim;
pub mod metrics;
pub mod pipeline;
pub mod sysid;

/// Version stamped into every JSON artifact.
pub const FORMAT_VERSION: u32 = 1;
