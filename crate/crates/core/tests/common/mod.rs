#![allow(dead_code)]

//! Independent oracles shared by the integration tests.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eds_core::geometry::{BoundingBox, GeometryError, Triangulation};

pub fn random_points(seed: u64, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn refs(points: &[Vec<f64>]) -> Vec<&[f64]> {
    points.iter().map(|p| p.as_slice()).collect()
}

/// Triangulates `points` in order, seeding with the first `n + 1`.
pub fn triangulate(points: &[Vec<f64>]) -> Result<Triangulation, GeometryError> {
    let dim = points[0].len();
    let bbox = BoundingBox::from_points(dim, points.iter().map(|p| p.as_slice()));
    let seed = refs(&points[..=dim]);
    let mut t = Triangulation::new(&seed, &bbox)?;
    for p in &points[dim + 1..] {
        t.insert(p)?;
    }
    Ok(t)
}

/// Circumcenter via the perpendicular-bisector system, squared radius.
pub fn circumsphere(s: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let n = s[0].len();
    let a = DMatrix::from_fn(n, n, |r, c| 2.0 * (s[r + 1][c] - s[0][c]));
    let b = DVector::from_fn(n, |r, _| {
        let sq = |p: &[f64]| p.iter().map(|x| x * x).sum::<f64>();
        sq(s[r + 1]) - sq(s[0])
    });
    if a.determinant().abs() < 1e-12 {
        return None;
    }
    let c = a.lu().solve(&b)?;
    let center: Vec<f64> = c.iter().copied().collect();
    let r2 = center.iter().zip(s[0]).map(|(a, b)| (a - b) * (a - b)).sum();
    Some((center, r2))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Brute-force Delaunay: every `(n + 1)`-subset whose circumsphere contains
/// no other input point. Returns sorted index sets and a flag telling
/// whether any near co-spherical configuration was met.
pub fn brute_force_delaunay(points: &[Vec<f64>]) -> (Vec<Vec<usize>>, bool) {
    let n = points[0].len();
    let mut out = Vec::new();
    let mut ties = false;
    for combo in combinations(points.len(), n + 1) {
        let s: Vec<&[f64]> = combo.iter().map(|&i| points[i].as_slice()).collect();
        let Some((c, r2)) = circumsphere(&s) else {
            continue;
        };
        let mut empty = true;
        for (i, p) in points.iter().enumerate() {
            if combo.contains(&i) {
                continue;
            }
            let d2: f64 = p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            if (d2 - r2).abs() <= 1e-9 * r2 {
                ties = true;
            }
            if d2 < r2 {
                empty = false;
                break;
            }
        }
        if empty {
            out.push(combo);
        }
    }
    out.sort();
    (out, ties)
}

/// Area of the 2-D convex hull (monotone chain + shoelace).
pub fn hull_area_2d(points: &[Vec<f64>]) -> f64 {
    let mut p: Vec<(f64, f64)> = points.iter().map(|v| (v[0], v[1])).collect();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for (pass, chain) in [p.clone(), p.iter().rev().copied().collect()].iter().enumerate() {
        let floor = hull.len() + 1;
        for &q in chain.iter().skip(pass) {
            while hull.len() > floor.max(2) - 1 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
    }
    hull.pop();
    let mut area = 0.0;
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        area += a.0 * b.1 - b.0 * a.1;
    }
    area.abs() / 2.0
}

/// Cramer's-rule barycentric coordinates: each weight is a ratio of
/// determinants with one column replaced, no vertex singled out.
pub fn cramer_barycentric(s: &[&[f64]], p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let full = DMatrix::from_fn(n + 1, n + 1, |r, c| if r == n { 1.0 } else { s[c][r] });
    let det = full.determinant();
    (0..=n)
        .map(|i| {
            let mut m = full.clone();
            for r in 0..n {
                m[(r, i)] = p[r];
            }
            m[(n, i)] = 1.0;
            m.determinant() / det
        })
        .collect()
}
