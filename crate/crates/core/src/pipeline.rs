//! End-to-end benchmark runs producing serializable reports.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{
    gen_lorenz, gen_motivation, standardize, DatagenError, GeneratorSpec, LorenzParams,
    StandardizationParams,
};
use crate::dataset::{Dataset, DatasetError};
use crate::eds::{
    build_model, random_minor_subset, run_eds, verify_representativeness, EdsConfig, EdsError,
    EdsResult, PassStats, VerificationReport,
};
use crate::geometry::GeometryError;
use crate::lim::{HessianOracle, LimError, LinearInterpolationModel};
use crate::metrics::{analytic_cdrs, CdrClass, LogCdrStats, MetricsError, MetricsReport};
use crate::sysid::{
    evaluate, lasso_fit, rollout, Evaluation, LassoConfig, PolyLibrary, SparseModel, SysidError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Eds(#[from] EdsError),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Sysid(#[from] SysidError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{0}")]
    Setup(String),
}

/// Summary of a Log-CDR fit over one tessellation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdrSummary {
    pub regions: usize,
    pub stats: LogCdrStats,
    pub imbalance_score: f64,
    pub class_counts: BTreeMap<CdrClass, usize>,
}

impl From<&MetricsReport> for CdrSummary {
    fn from(r: &MetricsReport) -> Self {
        Self {
            regions: r.regions.len(),
            stats: r.stats,
            imbalance_score: r.imbalance_score,
            class_counts: r.class_counts.clone(),
        }
    }
}

/// Builds a model from a subset, rotating the order until the leading
/// `n + 1` rows form a valid seed.
pub fn model_from_subset(
    data: &Dataset,
    ids: &[usize],
) -> Result<LinearInterpolationModel, EdsError> {
    let mut order = ids.to_vec();
    for _ in 0..order.len() {
        match build_model(data, &order) {
            Err(EdsError::Lim(LimError::Geometry(GeometryError::DegenerateSeed))) => {
                order.rotate_left(1)
            }
            other => return other,
        }
    }
    Err(EdsError::DegenerateSeed(order.len()))
}

/// Analytic Log-CDR report of a tessellation.
pub fn analytic_report(
    model: &LinearInterpolationModel,
    oracle: &HessianOracle,
    probes: usize,
    z: f64,
    source: &str,
) -> Result<MetricsReport, MetricsError> {
    MetricsReport::from_regions(source, analytic_cdrs(model, oracle, probes), z, 0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotivationConfig {
    pub n_samples: usize,
    pub data_seed: u64,
    pub eds: EdsConfig,
    pub minor_seed: u64,
    pub probes: usize,
}

impl Default for MotivationConfig {
    fn default() -> Self {
        Self {
            n_samples: 5000,
            data_seed: 7,
            eds: EdsConfig {
                psi: 0.05,
                seed: 7,
                max_passes: 10,
                ..Default::default()
            },
            minor_seed: 7,
            probes: crate::metrics::DEFAULT_PROBES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotivationReport {
    pub format_version: u32,
    pub config: MotivationConfig,
    pub rows: usize,
    pub representative_count: usize,
    pub auxiliary_count: usize,
    pub violations: usize,
    pub per_pass: Vec<PassStats>,
    pub verification: VerificationReport,
    /// Analytic CDRs of the curated tessellation.
    pub representative_cdr: CdrSummary,
    /// Analytic CDRs of a random subset of the same size.
    pub minor_cdr: CdrSummary,
}

pub struct MotivationRun {
    pub report: MotivationReport,
    pub data: Dataset,
    pub params: StandardizationParams,
    pub result: EdsResult,
}

pub fn motivation_benchmark(config: &MotivationConfig) -> Result<MotivationRun, PipelineError> {
    let raw = gen_motivation(config.n_samples, config.data_seed);
    let (data, params) = standardize(&raw)?;
    let result = run_eds(&data, &config.eds)?;
    let verification = verify_representativeness(&data, &result)?;
    let oracle = GeneratorSpec::Motivation {
        n_samples: config.n_samples,
    }
    .oracle(Some(&params));
    let z = config.eds.z;
    let rep_model = build_model(&data, &result.representative_ids)?;
    let rep = analytic_report(&rep_model, &oracle, config.probes, z, "representative")?;
    let minor_ids =
        random_minor_subset(data.len(), result.representative_ids.len(), config.minor_seed)?;
    let minor_model = model_from_subset(&data, &minor_ids)?;
    let minor = analytic_report(&minor_model, &oracle, config.probes, z, "minor")?;
    let report = MotivationReport {
        format_version: crate::FORMAT_VERSION,
        config: config.clone(),
        rows: data.len(),
        representative_count: result.representative_ids.len(),
        auxiliary_count: result.auxiliary_ids.len(),
        violations: result.violations,
        per_pass: result.per_pass.clone(),
        verification,
        representative_cdr: (&rep).into(),
        minor_cdr: (&minor).into(),
    };
    Ok(MotivationRun {
        report,
        data,
        params,
        result,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzBenchConfig {
    pub lorenz: LorenzParams,
    pub data_seed: u64,
    /// Seed for pool shuffling, the random subset and test sampling.
    pub split_seed: u64,
    pub subset_size: usize,
    pub test_size: usize,
    pub eds: EdsConfig,
    /// Bisection steps on `log(psi)` when sizing the representative set.
    pub psi_search_steps: usize,
    pub degree: u32,
    pub lasso: LassoConfig,
    pub rollout_steps: usize,
}

impl Default for LorenzBenchConfig {
    fn default() -> Self {
        Self {
            lorenz: LorenzParams::default(),
            data_seed: 1,
            split_seed: 1,
            subset_size: 300,
            test_size: 1000,
            eds: EdsConfig {
                psi: 1.0,
                seed: 1,
                ..Default::default()
            },
            psi_search_steps: 12,
            degree: 2,
            lasso: LassoConfig::default(),
            rollout_steps: 250,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub train_rows: usize,
    /// Test-set errors in standardized label units.
    pub evaluation: Evaluation,
    pub converged: bool,
    pub coefficients_standardized: Vec<Vec<f64>>,
    pub coefficients_raw: Vec<Vec<f64>>,
    /// Raw coefficients minus the true system coefficients.
    pub coefficient_error_raw: Vec<Vec<f64>>,
    pub rollout: RolloutSummary,
}

/// Forward simulation of the fitted model against the true system from a
/// test state, in raw units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutSummary {
    pub x0: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    /// Step at which the fitted model blew up, if it did.
    pub diverged_at: Option<usize>,
    /// Euclidean state error per step.
    pub state_error: Vec<f64>,
    pub trajectory: Vec<Vec<f64>>,
    pub truth: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzReport {
    pub format_version: u32,
    pub config: LorenzBenchConfig,
    pub pool_rows: usize,
    pub test_rows: usize,
    pub psi_selected: f64,
    /// Size of the curated set before truncation to `subset_size`.
    pub representative_total: usize,
    pub term_names: Vec<String>,
    pub representative: ModelSummary,
    pub minor: ModelSummary,
}

/// Coefficient matrix of the true system in raw units.
pub fn lorenz_true_coefficients(library: &PolyLibrary, p: &LorenzParams) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; 3]; library.len()];
    let mut set = |e: [u32; 3], o: usize, v: f64| {
        if let Some(i) = library.index_of(&e) {
            c[i][o] = v;
        }
    };
    set([1, 0, 0], 0, -p.sigma);
    set([0, 1, 0], 0, p.sigma);
    set([1, 0, 0], 1, p.rho);
    set([0, 1, 0], 1, -1.0);
    set([1, 0, 1], 1, -1.0);
    set([1, 1, 0], 2, 1.0);
    set([0, 0, 1], 2, -p.beta);
    c
}

/// First-half pool and second-half test rows, raw units.
pub fn lorenz_split(
    config: &LorenzBenchConfig,
) -> Result<(Dataset, Dataset), PipelineError> {
    let raw = gen_lorenz(&config.lorenz, config.data_seed)?;
    let half = config.lorenz.n_inits / 2 * config.lorenz.states_per_trajectory();
    if half == 0 || half >= raw.len() {
        return Err(PipelineError::Setup("need at least two trajectories".into()));
    }
    let pool = raw.slice(0..half);
    let rest = raw.slice(half..raw.len());
    let test_ids = random_minor_subset(rest.len(), config.test_size.min(rest.len()), config.split_seed)?;
    Ok((pool, rest.subset(&test_ids)?))
}

fn summarize(
    model: &SparseModel,
    train_rows: usize,
    test: &Dataset,
    params: &StandardizationParams,
    truth: &[Vec<f64>],
    config: &LorenzBenchConfig,
    x0: &[f64],
) -> Result<ModelSummary, PipelineError> {
    let evaluation = evaluate(model, test)?;
    let raw = model.to_raw(params);
    let coefficient_error_raw = raw
        .coefficients
        .iter()
        .zip(truth)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - v).collect())
        .collect();
    let dt = config.lorenz.dt;
    let truth_traj = crate::datagen::integrate(|s| config.lorenz.rhs(s), x0, dt, config.rollout_steps)?;
    let (trajectory, diverged_at) = match rollout(&raw, x0, dt, config.rollout_steps) {
        Ok(t) => (t, None),
        Err(SysidError::NonFiniteState { step }) => (Vec::new(), Some(step)),
        Err(e) => return Err(e.into()),
    };
    let state_error = trajectory
        .iter()
        .zip(&truth_traj)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
        .collect();
    Ok(ModelSummary {
        train_rows,
        evaluation,
        converged: model.fit.converged(),
        coefficients_standardized: model.coefficients.clone(),
        coefficients_raw: raw.coefficients,
        coefficient_error_raw,
        rollout: RolloutSummary {
            x0: x0.to_vec(),
            dt,
            steps: config.rollout_steps,
            diverged_at,
            state_error,
            trajectory,
            truth: truth_traj,
        },
    })
}

/// Curated set of exactly `size` rows: bisect `log(psi)` for the largest
/// threshold giving at least `size` representatives, then keep the first
/// `size` in insertion order.
pub fn representative_subset(
    data: &Dataset,
    base: &EdsConfig,
    size: usize,
    steps: usize,
) -> Result<(Vec<usize>, f64, usize), PipelineError> {
    let run = |psi: f64| run_eds(data, &EdsConfig { psi, ..base.clone() });
    let mut lo = base.psi;
    let mut lo_run = run(lo)?;
    let mut hi = lo;
    if lo_run.representative_ids.len() < size {
        // shrink until big enough
        loop {
            hi = lo;
            lo /= 4.0;
            lo_run = run(lo)?;
            if lo_run.representative_ids.len() >= size {
                break;
            }
            if lo < 1e-12 {
                return Err(PipelineError::Setup(format!(
                    "cannot reach {size} representatives"
                )));
            }
        }
    } else {
        loop {
            hi *= 4.0;
            if run(hi)?.representative_ids.len() < size {
                break;
            }
            lo = hi;
            if hi > 1e12 {
                break;
            }
        }
        lo_run = run(lo)?;
    }
    for _ in 0..steps {
        let mid = (lo * hi).sqrt();
        let r = run(mid)?;
        if r.representative_ids.len() >= size {
            lo = mid;
            lo_run = r;
        } else {
            hi = mid;
        }
    }
    let total = lo_run.representative_ids.len();
    let mut ids = lo_run.representative_ids;
    ids.truncate(size);
    Ok((ids, lo, total))
}

pub fn lorenz_benchmark(config: &LorenzBenchConfig) -> Result<LorenzReport, PipelineError> {
    let (pool_raw, test_raw) = lorenz_split(config)?;
    let (pool_sorted, params) = standardize(&pool_raw)?;
    let test = params.apply(&test_raw);

    // stream order matters: trajectories are contiguous, so shuffle first
    let mut rng = ChaCha8Rng::seed_from_u64(config.split_seed);
    let mut order: Vec<usize> = (0..pool_sorted.len()).collect();
    order.shuffle(&mut rng);
    let pool = pool_sorted.subset(&order)?;

    let (rep_ids, psi, total) =
        representative_subset(&pool, &config.eds, config.subset_size, config.psi_search_steps)?;
    let minor_ids = random_minor_subset(pool.len(), config.subset_size, config.split_seed ^ 0x4d)?;
    let rep = pool.subset(&rep_ids)?;
    let minor = pool.subset(&minor_ids)?;

    let library = PolyLibrary::new(3, config.degree);
    let truth = lorenz_true_coefficients(&library, &config.lorenz);
    let x0 = test_raw.x(0).to_vec();
    let rep_model = lasso_fit(&library, &rep, &config.lasso)?;
    let minor_model = lasso_fit(&library, &minor, &config.lasso)?;
    Ok(LorenzReport {
        format_version: crate::FORMAT_VERSION,
        config: config.clone(),
        pool_rows: pool.len(),
        test_rows: test.len(),
        psi_selected: psi,
        representative_total: total,
        term_names: library.term_names(&["x", "y", "z"]),
        representative: summarize(&rep_model, rep.len(), &test, &params, &truth, config, &x0)?,
        minor: summarize(&minor_model, minor.len(), &test, &params, &truth, config, &x0)?,
    })
}
