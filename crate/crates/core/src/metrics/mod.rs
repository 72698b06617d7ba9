//! Complexity-to-density ratios, their log-normal summary, region
//! classification and the refinement convergence factor.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{size_gs, GeometryError, SimplexId, SimplexView};
use crate::lim::{max_hessian_norm, HessianOracle, LinearInterpolationModel};

/// CDR values at or below this are treated as zero and left out of the
/// log-domain statistics.
pub const MIN_POSITIVE_RHO: f64 = 1e-300;
/// Default number of standard deviations for the High/Low split.
pub const DEFAULT_Z: f64 = 2.0;
/// Interior probes used when estimating `g_c` for analytic reports.
pub const DEFAULT_PROBES: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("region occupancy must be at least 1")]
    ZeroOccupancy,
    #[error("no interior samples in simplex {0}")]
    NoInteriorSamples(SimplexId),
    #[error("need at least 2 regions with positive CDR, found {0}")]
    InsufficientRegions(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdrClass {
    High,
    Medium,
    Low,
}

/// CDR of one simplex. `gc` and `gs` are absent for error-proxy values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionCdr {
    pub simplex_id: SimplexId,
    pub rho: f64,
    pub gc: Option<f64>,
    pub gs: Option<f64>,
    pub count: usize,
    /// Number of interior samples behind an empirical value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogCdrStats {
    pub mu_hat: f64,
    pub sigma_sq_hat: f64,
    pub k: usize,
    pub z: f64,
    pub excluded_regions: usize,
}

impl LogCdrStats {
    pub fn sigma_hat(&self) -> f64 {
        self.sigma_sq_hat.sqrt()
    }
}

pub fn cdr_analytic(
    view: &SimplexView<'_>,
    occupancy: usize,
    oracle: &HessianOracle,
    probes: usize,
) -> Result<RegionCdr, MetricsError> {
    if occupancy == 0 {
        return Err(MetricsError::ZeroOccupancy);
    }
    let gc = max_hessian_norm(&view.points, oracle, probes);
    let gs = size_gs(&view.points);
    Ok(RegionCdr {
        simplex_id: view.id,
        rho: gc * gs / occupancy as f64,
        gc: Some(gc),
        gs: Some(gs),
        count: occupancy,
        samples: None,
    })
}

/// Error-proxy CDR `2 max(e) / (n + 1)` from errors of points falling in
/// the simplex.
pub fn cdr_empirical(
    view: &SimplexView<'_>,
    interior_errors: &[f64],
) -> Result<RegionCdr, MetricsError> {
    if interior_errors.is_empty() {
        return Err(MetricsError::NoInteriorSamples(view.id));
    }
    let count = view.dim() + 1;
    let max = interior_errors.iter().copied().fold(0.0, f64::max);
    Ok(RegionCdr {
        simplex_id: view.id,
        rho: 2.0 * max / count as f64,
        gc: None,
        gs: None,
        count,
        samples: Some(interior_errors.len()),
    })
}

/// Sample mean and `k - 1` variance of `ln(rho)` over positive values.
pub fn log_cdr_stats(rhos: &[f64], z: f64) -> Result<LogCdrStats, MetricsError> {
    let logs: Vec<f64> = rhos
        .iter()
        .filter(|&&r| r > MIN_POSITIVE_RHO)
        .map(|r| r.ln())
        .collect();
    let k = logs.len();
    if k < 2 {
        return Err(MetricsError::InsufficientRegions(k));
    }
    let mu = logs.iter().sum::<f64>() / k as f64;
    let var = logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / (k - 1) as f64;
    Ok(LogCdrStats {
        mu_hat: mu,
        sigma_sq_hat: var,
        k,
        z,
        excluded_regions: rhos.len() - k,
    })
}

pub fn classify(rho: f64, stats: &LogCdrStats) -> CdrClass {
    let l = rho.ln();
    let band = stats.z * stats.sigma_hat();
    if l > stats.mu_hat + band {
        CdrClass::High
    } else if l < stats.mu_hat - band {
        CdrClass::Low
    } else {
        CdrClass::Medium
    }
}

/// `mu_hat + z * sigma_hat`.
pub fn imbalance_score(stats: &LogCdrStats) -> f64 {
    stats.mu_hat + stats.z * stats.sigma_hat()
}

/// Log-domain counterpart of an error threshold: `ln(2 psi / (n + 1))`.
pub fn log_threshold(psi: f64, dim: usize) -> f64 {
    (2.0 * psi / (dim + 1) as f64).ln()
}

/// Whether the imbalance score of error-proxy CDRs stays under `psi`.
pub fn constraint_satisfied(stats: &LogCdrStats, psi: f64, dim: usize) -> bool {
    imbalance_score(stats) <= log_threshold(psi, dim)
}

/// `(n + 1)^(-2/n)`.
pub fn convergence_factor(n: usize) -> f64 {
    let n = n as f64;
    (n + 1.0).powf(-2.0 / n)
}

pub fn predicted_error_decay(psi0: f64, n: usize, k: u32) -> f64 {
    psi0 * convergence_factor(n).powi(k as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    #[serde(flatten)]
    pub cdr: RegionCdr,
    /// Absent for zero-CDR regions.
    pub class: Option<CdrClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format_version: u32,
    pub source: String,
    pub regions: Vec<RegionRecord>,
    pub stats: LogCdrStats,
    pub imbalance_score: f64,
    pub class_counts: BTreeMap<CdrClass, usize>,
    /// Real simplices with no interior samples (empirical reports only).
    pub skipped_regions: usize,
}

impl MetricsReport {
    pub fn from_regions(
        source: impl Into<String>,
        cdrs: Vec<RegionCdr>,
        z: f64,
        skipped_regions: usize,
    ) -> Result<Self, MetricsError> {
        let rhos: Vec<f64> = cdrs.iter().map(|c| c.rho).collect();
        let stats = log_cdr_stats(&rhos, z)?;
        let mut class_counts = BTreeMap::new();
        let regions = cdrs
            .into_iter()
            .map(|cdr| {
                let class = (cdr.rho > MIN_POSITIVE_RHO).then(|| classify(cdr.rho, &stats));
                if let Some(c) = class {
                    *class_counts.entry(c).or_insert(0) += 1;
                }
                RegionRecord { cdr, class }
            })
            .collect();
        Ok(Self {
            format_version: crate::FORMAT_VERSION,
            source: source.into(),
            regions,
            stats,
            imbalance_score: imbalance_score(&stats),
            class_counts,
            skipped_regions,
        })
    }
}

/// Analytic CDRs for every real simplex, with occupancy `n + 1`.
pub fn analytic_cdrs(
    model: &LinearInterpolationModel,
    oracle: &HessianOracle,
    probes: usize,
) -> Vec<RegionCdr> {
    let t = model.triangulation();
    t.real_simplices()
        .map(|v| cdr_analytic(&v, t.dim() + 1, oracle, probes).expect("occupancy is n + 1"))
        .collect()
}

/// Error-proxy CDRs from held-out points grouped by containing simplex.
/// Returns the regions and the number of real simplices left without
/// samples. Points outside the hull are ignored.
pub fn empirical_cdrs<'a>(
    model: &LinearInterpolationModel,
    samples: impl IntoIterator<Item = (&'a [f64], &'a [f64])>,
) -> Result<(Vec<RegionCdr>, usize), MetricsError> {
    let mut errors: BTreeMap<SimplexId, Vec<f64>> = BTreeMap::new();
    for (x, y) in samples {
        if let Some((s, e)) = model.locate_error(x, y)? {
            errors.entry(s).or_default().push(e);
        }
    }
    let t = model.triangulation();
    let mut out = Vec::with_capacity(errors.len());
    let mut skipped = 0;
    for v in t.real_simplices() {
        match errors.get(&v.id) {
            Some(e) => out.push(cdr_empirical(&v, e)?),
            None => skipped += 1,
        }
    }
    Ok((out, skipped))
}
