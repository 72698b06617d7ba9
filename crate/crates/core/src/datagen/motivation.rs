use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use super::DatagenError;
use crate::dataset::Dataset;

pub const MOTIVATION_RANGE: f64 = 3.0;
const OFFSET: f64 = 0.33;

/// `1 / (0.33 + x1^2 + x2^2)`.
pub fn motivation_fn(x: &[f64]) -> f64 {
    1.0 / (OFFSET + x[0] * x[0] + x[1] * x[1])
}

/// Row-major 2x2 Hessian of [`motivation_fn`].
pub fn motivation_hessian(x: &[f64]) -> Vec<f64> {
    let u = OFFSET + x[0] * x[0] + x[1] * x[1];
    let (u2, u3) = (u * u, u * u * u);
    let mut h = vec![0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            let diag = if i == j { -2.0 / u2 } else { 0.0 };
            h[i * 2 + j] = diag + 8.0 * x[i] * x[j] / u3;
        }
    }
    h
}

/// Features uniform on `[-3, 3]^2`, label from [`motivation_fn`].
pub fn gen_motivation(n_samples: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Dataset::with_capacity(2, 1, n_samples);
    for _ in 0..n_samples {
        let x = [
            rng.random_range(-MOTIVATION_RANGE..=MOTIVATION_RANGE),
            rng.random_range(-MOTIVATION_RANGE..=MOTIVATION_RANGE),
        ];
        d.push(&x, &[motivation_fn(&x)]).expect("fixed dimensions");
    }
    d
}

/// [`gen_motivation`] with additive Gaussian label noise; a stand-in for
/// measured data where nearby samples disagree.
pub fn gen_motivation_noisy(
    n_samples: usize,
    noise_std: f64,
    seed: u64,
) -> Result<Dataset, DatagenError> {
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(DatagenError::InvalidParams(format!(
            "noise_std must be finite and non-negative, got {noise_std}"
        )));
    }
    let noise = Normal::new(0.0, noise_std)
        .map_err(|e| DatagenError::InvalidParams(format!("noise_std: {e}")))?;
    let clean = gen_motivation(n_samples, seed);
    // separate stream so features match the clean generator
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e_6f69_7365);
    let mut d = Dataset::with_capacity(2, 1, n_samples);
    for (x, y) in clean.rows() {
        d.push(x, &[y[0] + rng.sample(noise)]).expect("fixed dimensions");
    }
    Ok(d)
}
