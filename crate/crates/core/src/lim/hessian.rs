use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::geometry::size_gs;

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Central-difference step on standardized coordinates.
pub const FD_STEP: f64 = 1e-4;
/// Seed for interior probe points; fixed so bounds are reproducible.
pub const PROBE_SEED: u64 = 0x5eed_b0b0;

/// Source of `||H(x)||_F`, the Frobenius norm of the Hessian tensor of the
/// target function (all outputs stacked).
#[derive(Clone)]
pub enum HessianOracle {
    /// A global bound `M` that holds everywhere.
    Constant(f64),
    /// Closed-form norm.
    Analytic(ScalarField),
    /// Central differences of a vector-valued function.
    FiniteDifference { f: VectorField, step: f64 },
}

impl fmt::Debug for HessianOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Analytic(_) => write!(f, "Analytic(..)"),
            Self::FiniteDifference { step, .. } => write!(f, "FiniteDifference(step={step})"),
        }
    }
}

impl HessianOracle {
    pub fn analytic(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::Analytic(Arc::new(f))
    }

    pub fn finite_difference(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self::FiniteDifference {
            f: Arc::new(f),
            step: FD_STEP,
        }
    }

    pub fn with_step(self, step: f64) -> Self {
        match self {
            Self::FiniteDifference { f, .. } => Self::FiniteDifference { f, step },
            other => other,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    pub fn norm_at(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Analytic(f) => f(x),
            Self::FiniteDifference { f, step } => fd_hessian_norm(f.as_ref(), x, *step),
        }
    }
}

fn fd_hessian_norm(f: &(dyn Fn(&[f64]) -> Vec<f64> + Send + Sync), x: &[f64], h: f64) -> f64 {
    let n = x.len();
    let at = |offsets: &[(usize, f64)]| {
        let mut p = x.to_vec();
        for &(k, d) in offsets {
            p[k] += d;
        }
        f(&p)
    };
    let center = f(x);
    let mut sum = 0.0;
    for j in 0..n {
        let plus = at(&[(j, h)]);
        let minus = at(&[(j, -h)]);
        for o in 0..center.len() {
            let d = (plus[o] - 2.0 * center[o] + minus[o]) / (h * h);
            sum += d * d;
        }
        for k in j + 1..n {
            let pp = at(&[(j, h), (k, h)]);
            let pm = at(&[(j, h), (k, -h)]);
            let mp = at(&[(j, -h), (k, h)]);
            let mm = at(&[(j, -h), (k, -h)]);
            for o in 0..center.len() {
                let d = (pp[o] - pm[o] - mp[o] + mm[o]) / (4.0 * h * h);
                // off-diagonal entries appear twice in the tensor
                sum += 2.0 * d * d;
            }
        }
    }
    sum.sqrt()
}

/// Estimate of `max_{x in simplex} ||H(x)||_F` from the vertices plus
/// `probes` uniformly distributed interior points.
///
/// For non-constant oracles this is a lower estimate of the true maximum.
pub fn max_hessian_norm(points: &[&[f64]], oracle: &HessianOracle, probes: usize) -> f64 {
    if let HessianOracle::Constant(c) = oracle {
        return *c;
    }
    let mut best = points
        .iter()
        .map(|p| oracle.norm_at(p))
        .fold(0.0_f64, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let n = points[0].len();
    let mut x = vec![0.0; n];
    for _ in 0..probes {
        let w: Vec<f64> = (0..points.len()).map(|_| rng.sample(Exp1)).collect();
        let total: f64 = w.iter().sum();
        x.iter_mut().for_each(|c| *c = 0.0);
        for (wi, p) in w.iter().zip(points) {
            for (c, pc) in x.iter_mut().zip(*p) {
                *c += wi / total * pc;
            }
        }
        best = best.max(oracle.norm_at(&x));
    }
    best
}

/// `0.5 * g_s * g_c`: bound on the interpolation error inside a simplex.
pub fn error_upper_bound(points: &[&[f64]], oracle: &HessianOracle, probes: usize) -> f64 {
    0.5 * size_gs(points) * max_hessian_norm(points, oracle, probes)
}
