//! Streaming curation of a representative subset.
//!
//! Points are streamed through a growing triangulation. Points outside the
//! current hull, and points whose interpolation error exceeds `psi`, become
//! vertices of the representative set; the rest are auxiliary. Optional
//! verification passes re-check auxiliary points against the final model
//! and promote any that still exceed the threshold.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::geometry::{BoundingBox, GeometryError};
use crate::lim::{LimError, LinearInterpolationModel};
use crate::metrics::{
    constraint_satisfied, empirical_cdrs, imbalance_score, log_threshold, LogCdrStats,
    MetricsError, MetricsReport,
};

/// Attempts at drawing an affinely independent seed before giving up.
pub const MAX_SEED_DRAWS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdsError {
    #[error("dataset has {rows} rows, need at least {needed}")]
    DatasetTooSmall { rows: usize, needed: usize },
    #[error("row {0} contains a non-finite value")]
    NonFiniteData(usize),
    #[error("no affinely independent seed found in {0} draws")]
    DegenerateSeed(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("subset size {size} exceeds dataset size {len}")]
    SizeTooLarge { size: usize, len: usize },
    #[error("representative ids do not start with a valid seed")]
    BadRepresentativeSet,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lim(#[from] LimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Routing {
    /// High-error points refine the triangulation.
    #[default]
    HighError,
    /// Every point inside the hull is auxiliary; only hull growth refines.
    HullOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdsConfig {
    /// Error threshold in standardized label units; may be infinite.
    #[serde(with = "extended_f64")]
    pub psi: f64,
    pub batch_size: usize,
    pub z: f64,
    pub seed: u64,
    pub max_passes: usize,
    pub routing: Routing,
}

impl Default for EdsConfig {
    fn default() -> Self {
        Self {
            psi: 0.05,
            batch_size: 256,
            z: crate::metrics::DEFAULT_Z,
            seed: 0,
            max_passes: 5,
            routing: Routing::HighError,
        }
    }
}

impl EdsConfig {
    pub fn validate(&self) -> Result<(), EdsError> {
        if !(self.psi > 0.0) {
            return Err(EdsError::InvalidConfig(format!("psi must be > 0, got {}", self.psi)));
        }
        if self.batch_size == 0 {
            return Err(EdsError::InvalidConfig("batch_size must be at least 1".into()));
        }
        if self.max_passes == 0 {
            return Err(EdsError::InvalidConfig("max_passes must be at least 1".into()));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(EdsError::InvalidConfig(format!("z must be > 0, got {}", self.z)));
        }
        Ok(())
    }
}

/// JSON has no infinity; encode it as the string `"inf"`.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad number {s:?}"))),
        }
    }
}

/// Counters for one pass; pass 0 is the streaming pass.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PassStats {
    pub pass: usize,
    pub insertions: usize,
    pub aux_assignments: usize,
    pub hull_insertions: usize,
    /// Largest error among points left auxiliary in this pass.
    pub max_residual_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdsResult {
    pub format_version: u32,
    pub config: EdsConfig,
    /// Triangulation vertices in insertion order; the first `n + 1` are the
    /// seed.
    pub representative_ids: Vec<usize>,
    /// Ascending.
    pub auxiliary_ids: Vec<usize>,
    pub per_pass: Vec<PassStats>,
    /// Auxiliary points whose error against the final model exceeds `psi`.
    pub violations: usize,
    /// Points that coincide with an existing vertex.
    pub duplicates: usize,
    pub seed_draws: usize,
}

impl EdsResult {
    pub fn seed_ids(&self, dim: usize) -> &[usize] {
        &self.representative_ids[..dim + 1]
    }
}

/// Bounding box of all features; shared by curation and model rebuilds so
/// both see the same domain.
pub fn data_bbox(data: &Dataset) -> BoundingBox {
    BoundingBox::from_points(data.feature_dim(), data.rows().map(|(x, _)| x))
}

fn check_data(data: &Dataset) -> Result<(), EdsError> {
    let needed = data.feature_dim() + 2;
    if data.len() < needed {
        return Err(EdsError::DatasetTooSmall {
            rows: data.len(),
            needed,
        });
    }
    if let Some(row) = data.first_non_finite() {
        return Err(EdsError::NonFiniteData(row));
    }
    Ok(())
}

fn seed_model(
    data: &Dataset,
    ids: &[usize],
    bbox: &BoundingBox,
) -> Result<LinearInterpolationModel, LimError> {
    let xs: Vec<&[f64]> = ids.iter().map(|&i| data.x(i)).collect();
    let ys: Vec<&[f64]> = ids.iter().map(|&i| data.y(i)).collect();
    LinearInterpolationModel::from_seed(&xs, &ys, bbox)
}

fn draw_seed(
    data: &Dataset,
    rng: &mut ChaCha8Rng,
    bbox: &BoundingBox,
) -> Result<(Vec<usize>, LinearInterpolationModel, usize), EdsError> {
    let k = data.feature_dim() + 1;
    for draw in 1..=MAX_SEED_DRAWS {
        let ids = index::sample(rng, data.len(), k).into_vec();
        match seed_model(data, &ids, bbox) {
            Ok(m) => return Ok((ids, m, draw)),
            Err(LimError::Geometry(GeometryError::DegenerateSeed)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(EdsError::DegenerateSeed(MAX_SEED_DRAWS))
}

fn error_at(model: &LinearInterpolationModel, x: &[f64], y: &[f64]) -> Result<Option<f64>, EdsError> {
    Ok(model.point_error(x, y)?)
}

fn label_distance(model: &LinearInterpolationModel, vertex: usize, y: &[f64]) -> f64 {
    model
        .label(vertex)
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

enum Outcome {
    Inserted,
    Duplicate(f64),
}

fn try_insert(
    model: &mut LinearInterpolationModel,
    x: &[f64],
    y: &[f64],
) -> Result<Outcome, EdsError> {
    match model.insert(x, y) {
        Ok(_) => Ok(Outcome::Inserted),
        Err(LimError::Geometry(GeometryError::DuplicatePoint { vertex })) => {
            Ok(Outcome::Duplicate(label_distance(model, vertex, y)))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run_eds(data: &Dataset, config: &EdsConfig) -> Result<EdsResult, EdsError> {
    run_eds_with_model(data, config).map(|(r, _)| r)
}

/// Like [`run_eds`], also returning the final interpolation model.
pub fn run_eds_with_model(
    data: &Dataset,
    config: &EdsConfig,
) -> Result<(EdsResult, LinearInterpolationModel), EdsError> {
    config.validate()?;
    check_data(data)?;
    let bbox = data_bbox(data);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (seed_ids, mut model, seed_draws) = draw_seed(data, &mut rng, &bbox)?;

    let mut in_seed = vec![false; data.len()];
    for &i in &seed_ids {
        in_seed[i] = true;
    }
    let mut representative = seed_ids.clone();
    // (index, is duplicate)
    let mut auxiliary: Vec<(usize, bool)> = Vec::new();
    let mut duplicates = 0;
    let mut stream = PassStats::default();
    let stream_ids: Vec<usize> = (0..data.len()).filter(|&i| !in_seed[i]).collect();
    for (b, batch) in stream_ids.chunks(config.batch_size).enumerate() {
        for &i in batch {
            let (x, y) = (data.x(i), data.y(i));
            let e = error_at(&model, x, y)?;
            let wants_vertex = match e {
                None => true,
                Some(e) => config.routing == Routing::HighError && e > config.psi,
            };
            if !wants_vertex {
                let e = e.unwrap_or(0.0);
                stream.aux_assignments += 1;
                stream.max_residual_error = stream.max_residual_error.max(e);
                auxiliary.push((i, false));
                continue;
            }
            match try_insert(&mut model, x, y)? {
                Outcome::Inserted => {
                    representative.push(i);
                    if e.is_none() {
                        stream.hull_insertions += 1;
                    } else {
                        stream.insertions += 1;
                    }
                }
                Outcome::Duplicate(d) => {
                    log::warn!("row {i} duplicates an existing vertex; kept as auxiliary");
                    duplicates += 1;
                    stream.aux_assignments += 1;
                    stream.max_residual_error = stream.max_residual_error.max(d);
                    auxiliary.push((i, true));
                }
            }
        }
        log::debug!(
            "batch {b}: {} representative, {} auxiliary",
            representative.len(),
            auxiliary.len()
        );
    }
    let mut per_pass = vec![stream];

    if config.routing == Routing::HighError {
        for pass in 1..=config.max_passes {
            let mut stats = PassStats {
                pass,
                ..Default::default()
            };
            let mut kept = Vec::with_capacity(auxiliary.len());
            for &(i, dup) in &auxiliary {
                let (x, y) = (data.x(i), data.y(i));
                let e = error_at(&model, x, y)?.expect("auxiliary points lie inside the hull");
                if e > config.psi && !dup {
                    match try_insert(&mut model, x, y)? {
                        Outcome::Inserted => {
                            representative.push(i);
                            stats.insertions += 1;
                            continue;
                        }
                        Outcome::Duplicate(d) => {
                            duplicates += 1;
                            stats.max_residual_error = stats.max_residual_error.max(d);
                            kept.push((i, true));
                            continue;
                        }
                    }
                }
                stats.max_residual_error = stats.max_residual_error.max(e);
                kept.push((i, dup));
            }
            stats.aux_assignments = kept.len();
            auxiliary = kept;
            let done = stats.insertions == 0;
            log::info!("verification pass {pass}: {} promoted", stats.insertions);
            per_pass.push(stats);
            if done {
                break;
            }
        }
    }

    let mut violations = 0;
    for &(i, _) in &auxiliary {
        if let Some(e) = error_at(&model, data.x(i), data.y(i))? {
            if e > config.psi {
                violations += 1;
            }
        }
    }
    if violations > 0 {
        log::warn!("{violations} auxiliary points exceed psi = {}", config.psi);
    }
    let mut auxiliary_ids: Vec<usize> = auxiliary.into_iter().map(|(i, _)| i).collect();
    auxiliary_ids.sort_unstable();
    let result = EdsResult {
        format_version: crate::FORMAT_VERSION,
        config: config.clone(),
        representative_ids: representative,
        auxiliary_ids,
        per_pass,
        violations,
        duplicates,
        seed_draws,
    };
    Ok((result, model))
}

/// Rebuilds the interpolation model from representative ids in insertion
/// order. The first `n + 1` ids must form a valid seed.
pub fn build_model(
    data: &Dataset,
    representative_ids: &[usize],
) -> Result<LinearInterpolationModel, EdsError> {
    let k = data.feature_dim() + 1;
    if representative_ids.len() < k || representative_ids.iter().any(|&i| i >= data.len()) {
        return Err(EdsError::BadRepresentativeSet);
    }
    let bbox = data_bbox(data);
    let mut model = seed_model(data, &representative_ids[..k], &bbox)?;
    for &i in &representative_ids[k..] {
        model.insert(data.x(i), data.y(i))?;
    }
    Ok(model)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub format_version: u32,
    #[serde(with = "extended_f64")]
    pub psi: f64,
    pub representative_count: usize,
    pub auxiliary_count: usize,
    /// Largest auxiliary error; 0 when there are no auxiliary points.
    pub max_error: f64,
    pub violations: usize,
    /// Error-proxy CDR statistics of the rebuilt tessellation, when at least
    /// two regions contain auxiliary points.
    pub stats: Option<LogCdrStats>,
    pub imbalance_score: Option<f64>,
    /// `ln(2 psi / (n + 1))`.
    #[serde(with = "extended_f64")]
    pub log_threshold: f64,
    pub constraint_satisfied: Option<bool>,
    pub regions_without_samples: usize,
}

/// Rebuilds the model from the representative set and re-checks every
/// auxiliary point against it.
pub fn verify_representativeness(
    data: &Dataset,
    result: &EdsResult,
) -> Result<VerificationReport, EdsError> {
    let model = build_model(data, &result.representative_ids)?;
    let psi = result.config.psi;
    let mut max_error = 0.0_f64;
    let mut violations = 0;
    for &i in &result.auxiliary_ids {
        if let Some(e) = model.point_error(data.x(i), data.y(i))? {
            max_error = max_error.max(e);
            if e > psi {
                violations += 1;
            }
        }
    }
    let samples = result.auxiliary_ids.iter().map(|&i| (data.x(i), data.y(i)));
    let (cdrs, skipped) = empirical_cdrs(&model, samples)?;
    let dim = data.feature_dim();
    let report = MetricsReport::from_regions("empirical", cdrs, result.config.z, skipped);
    let stats = match report {
        Ok(r) => Some(r.stats),
        Err(MetricsError::InsufficientRegions(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(VerificationReport {
        format_version: crate::FORMAT_VERSION,
        psi,
        representative_count: result.representative_ids.len(),
        auxiliary_count: result.auxiliary_ids.len(),
        max_error,
        violations,
        stats,
        imbalance_score: stats.as_ref().map(imbalance_score),
        log_threshold: log_threshold(psi, dim),
        constraint_satisfied: stats.as_ref().map(|s| constraint_satisfied(s, psi, dim)),
        regions_without_samples: skipped,
    })
}

/// Uniform sample of `size` distinct indices, ascending.
pub fn random_minor_subset(len: usize, size: usize, seed: u64) -> Result<Vec<usize>, EdsError> {
    if size > len {
        return Err(EdsError::SizeTooLarge { size, len });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = index::sample(&mut rng, len, size).into_vec();
    ids.sort_unstable();
    Ok(ids)
}
