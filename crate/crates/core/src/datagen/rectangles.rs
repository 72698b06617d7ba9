use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DatagenError;
use crate::dataset::Dataset;

/// Raw moments are divided by this to give O(1) labels.
pub const J_SCALE: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleParams {
    pub image_size: usize,
    /// Measure about the rectangle centroid instead of the image origin.
    pub centroid: bool,
}

impl Default for RectangleParams {
    fn default() -> Self {
        Self {
            image_size: 280,
            centroid: false,
        }
    }
}

/// `sum (i^2 + j^2)` over lit pixels of `image[i][j]`, optionally about the
/// centroid of the lit pixels.
pub fn polar_moment(image: &[Vec<bool>], centroid: bool) -> f64 {
    let lit: Vec<(f64, f64)> = image
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &on)| on)
                .map(move |(j, _)| (i as f64, j as f64))
        })
        .collect();
    if lit.is_empty() {
        return 0.0;
    }
    let (ci, cj) = if centroid {
        let k = lit.len() as f64;
        (
            lit.iter().map(|p| p.0).sum::<f64>() / k,
            lit.iter().map(|p| p.1).sum::<f64>() / k,
        )
    } else {
        (0.0, 0.0)
    };
    lit.iter()
        .map(|(i, j)| (i - ci) * (i - ci) + (j - cj) * (j - cj))
        .sum()
}

/// `sum_{k=0}^{b} k^2`, extended to real `b`.
fn square_sum(b: f64) -> f64 {
    b * (b + 1.0) * (2.0 * b + 1.0) / 6.0
}

/// Raw moment of the filled rectangle with inclusive pixel ranges
/// `[x1, x2] x [y1, y2]`. Polynomial in the corners, so it also accepts
/// non-integer input.
pub fn rectangle_moment(corners: &[f64], centroid: bool) -> f64 {
    let (x1, y1, x2, y2) = (corners[0], corners[1], corners[2], corners[3]);
    let (ni, nj) = (x2 - x1 + 1.0, y2 - y1 + 1.0);
    let mut si = square_sum(x2) - square_sum(x1 - 1.0);
    let mut sj = square_sum(y2) - square_sum(y1 - 1.0);
    if centroid {
        let (ci, cj) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0);
        si -= ni * ci * ci;
        sj -= nj * cj * cj;
    }
    nj * si + ni * sj
}

/// Random axis-aligned filled rectangles with integer corners
/// `0 <= x1 < x2 < image_size` (same for y); label is the scaled moment.
pub fn gen_rectangles(
    n_samples: usize,
    params: &RectangleParams,
    seed: u64,
) -> Result<Dataset, DatagenError> {
    if params.image_size < 2 {
        return Err(DatagenError::InvalidParams("image_size must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = |rng: &mut ChaCha8Rng| loop {
        let a = rng.random_range(0..params.image_size);
        let b = rng.random_range(0..params.image_size);
        if a != b {
            break (a.min(b) as f64, a.max(b) as f64);
        }
    };
    let mut d = Dataset::with_capacity(4, 1, n_samples);
    for _ in 0..n_samples {
        let (x1, x2) = pair(&mut rng);
        let (y1, y2) = pair(&mut rng);
        let corners = [x1, y1, x2, y2];
        let j = rectangle_moment(&corners, params.centroid) / J_SCALE;
        d.push(&corners, &[j]).expect("fixed dimensions");
    }
    Ok(d)
}
