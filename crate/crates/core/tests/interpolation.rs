mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use common::*;
use eds_core::lim::{error_upper_bound, HessianOracle, LinearInterpolationModel, Prediction};

/// `f_k(x) = x^T A_k x + b_k . x` with random symmetric `A_k`.
struct Quadratic {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    dim: usize,
}

impl Quadratic {
    fn random(seed: u64, dim: usize, outputs: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..outputs {
            let mut m = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in i..dim {
                    let v = rng.random_range(-1.0..1.0);
                    m[i * dim + j] = v;
                    m[j * dim + i] = v;
                }
            }
            a.push(m);
            b.push((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
        Self { a, b, dim }
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| {
                let mut s = 0.0;
                for i in 0..n {
                    s += b[i] * x[i];
                    for j in 0..n {
                        s += x[i] * a[i * n + j] * x[j];
                    }
                }
                s
            })
            .collect()
    }

    /// Frobenius norm of the stacked Hessians `2 A_k`.
    fn hessian_norm(&self) -> f64 {
        self.a
            .iter()
            .flat_map(|m| m.iter())
            .map(|v| 4.0 * v * v)
            .sum::<f64>()
            .sqrt()
    }
}

fn model_for(points: &[Vec<f64>], f: impl Fn(&[f64]) -> Vec<f64>) -> LinearInterpolationModel {
    let labels: Vec<Vec<f64>> = points.iter().map(|p| f(p)).collect();
    LinearInterpolationModel::new(triangulate(points).unwrap(), &refs(&labels)).unwrap()
}

fn interior_point(rng: &mut ChaCha8Rng, s: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let w: Vec<f64> = (0..s.len()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let t: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|v| v / t).collect();
    let x = (0..s[0].len())
        .map(|k| s.iter().zip(&w).map(|(p, wi)| p[k] * wi).sum())
        .collect();
    (x, w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vector_error_respects_stacked_bound(seed in 0u64..10_000, dim in 1usize..=3, outputs in 1usize..=3) {
        let q = Quadratic::random(seed, dim, outputs);
        let points = random_points(seed ^ 0xabc, 12 + 4 * dim, dim);
        let model = model_for(&points, |x| q.eval(x));
        let oracle = HessianOracle::Constant(q.hessian_norm());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in model.triangulation().real_simplices() {
            let bound = error_upper_bound(&v.points, &oracle, 0);
            for _ in 0..20 {
                let (x, _) = interior_point(&mut rng, &v.points);
                let e = model.point_error(&x, &q.eval(&x)).unwrap().unwrap();
                prop_assert!(e <= bound * (1.0 + 1e-9) + 1e-12, "{} > {}", e, bound);
            }
        }
    }

    #[test]
    fn affine_maps_are_reproduced(seed in 0u64..10_000, dim in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<Vec<f64>> = (0..2).map(|_| (0..=dim).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let f = |x: &[f64]| -> Vec<f64> {
            w.iter().map(|r| r[dim] + r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).collect()
        };
        let points = random_points(seed, 8 + 3 * dim, dim);
        let model = model_for(&points, f);
        for v in model.triangulation().real_simplices() {
            let (x, _) = interior_point(&mut rng, &v.points);
            let got = model.predict(&x).unwrap();
            let got = got.value().unwrap();
            for (a, b) in got.iter().zip(f(&x)) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn prediction_is_continuous(seed in 0u64..10_000) {
        let q = Quadratic::random(seed, 2, 1);
        let points = random_points(seed, 40, 2);
        let model = model_for(&points, |x| q.eval(x));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let x = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let dx = [x[0] + 1e-9, x[1] - 1e-9];
            if let (Prediction::Value(a), Prediction::Value(b)) =
                (model.predict(&x).unwrap(), model.predict(&dx).unwrap())
            {
                // piecewise linear with bounded slope
                prop_assert!((a[0] - b[0]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn vertices_interpolate_their_own_labels() {
    let q = Quadratic::random(5, 3, 2);
    let points = random_points(5, 30, 3);
    let model = model_for(&points, |x| q.eval(x));
    for p in &points {
        assert_eq!(model.predict(p).unwrap().value().unwrap(), q.eval(p).as_slice());
    }
}
