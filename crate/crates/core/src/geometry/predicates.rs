//! Floating-point simplex predicates and measures.
//!
//! A simplex is given as a slice of `n + 1` points of dimension `n`.
//! Determinant predicates use tolerances relative to the geometry's own
//! scale, so results do not depend on the units of the input.

use nalgebra::{DMatrix, DVector};

use super::{GeometryError, QUALITY_TOLERANCE};

/// Result of an in-circumsphere query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereSide {
    Inside,
    Outside,
    CoSpherical,
}

/// Edge matrix whose column `j` is `points[j + 1] - points[0]`.
pub(crate) fn edge_matrix(points: &[&[f64]]) -> DMatrix<f64> {
    let n = points[0].len();
    let cols = points.len() - 1;
    DMatrix::from_fn(n, cols, |r, c| points[c + 1][r] - points[0][r])
}

pub(crate) fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Signed determinant of the edge matrix together with its normalized
/// magnitude `|det| / prod(edge lengths)`, which lies in `[0, 1]`.
pub(crate) fn orientation(points: &[&[f64]]) -> (f64, f64) {
    debug_assert_eq!(points.len(), points[0].len() + 1);
    let det = edge_matrix(points).determinant();
    let scale: f64 = points[1..]
        .iter()
        .map(|p| distance_sq(p, points[0]).sqrt())
        .product();
    let quality = if scale > 0.0 { det.abs() / scale } else { 0.0 };
    (det, quality)
}

/// Normalized volume of `k <= n + 1` points in `n` dimensions, via the Gram
/// determinant of the edge vectors. Used for facets (`k = n`).
pub(crate) fn affine_quality(points: &[&[f64]]) -> f64 {
    if points.len() <= 1 {
        return 1.0;
    }
    let e = edge_matrix(points);
    let gram = e.transpose() * &e;
    let scale: f64 = (0..e.ncols()).map(|c| gram[(c, c)]).product();
    if scale <= 0.0 {
        return 0.0;
    }
    (gram.determinant().max(0.0) / scale).sqrt()
}

/// Barycentric coordinates of `p` with respect to the simplex `points`.
///
/// Solves `sum(l_i) = 1, sum(l_i x_i) = p` through the edge matrix. A query
/// that coincides exactly with a vertex returns the Kronecker delta.
pub fn barycentric(points: &[&[f64]], p: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let n = p.len();
    if points.len() != n + 1 {
        return Err(GeometryError::SeedCount {
            expected: n + 1,
            found: points.len(),
        });
    }
    if let Some(found) = points.iter().map(|v| v.len()).find(|&d| d != n) {
        return Err(GeometryError::DimensionMismatch { expected: n, found });
    }
    let (_, quality) = orientation(points);
    if quality <= QUALITY_TOLERANCE {
        return Err(GeometryError::SingularSimplex { quality });
    }
    if let Some(j) = points.iter().position(|v| *v == p) {
        let mut w = vec![0.0; n + 1];
        w[j] = 1.0;
        return Ok(w);
    }
    let rhs = DVector::from_iterator(n, p.iter().zip(points[0]).map(|(a, b)| a - b));
    let mu = edge_matrix(points)
        .lu()
        .solve(&rhs)
        .ok_or(GeometryError::SingularSimplex { quality })?;
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0 - mu.sum());
    w.extend(mu.iter().copied());
    Ok(w)
}

/// Lifted-paraboloid in-circumsphere test.
///
/// The determinant of rows `(v_i - p, |v_i - p|^2)` equals
/// `(-1)^n * orient * (r^2 - |p - c|^2)`; values within
/// `1e-12 * scale^(n + 2)` of zero are reported as co-spherical, where
/// `scale` is the largest vertex distance from `p`.
pub fn in_sphere(points: &[&[f64]], p: &[f64]) -> SphereSide {
    let n = p.len();
    let lifted = DMatrix::from_fn(n + 1, n + 1, |r, c| {
        if c < n {
            points[r][c] - p[c]
        } else {
            distance_sq(points[r], p)
        }
    });
    let det = lifted.determinant();
    let scale = points
        .iter()
        .map(|v| distance_sq(v, p))
        .fold(0.0_f64, f64::max)
        .sqrt();
    let tol = 1e-12 * scale.powi(n as i32 + 2);
    let (orient, _) = orientation(points);
    let parity = if n & 1 == 0 { 1.0 } else { -1.0 };
    let signed = parity * det * orient.signum();
    if signed.abs() <= tol {
        SphereSide::CoSpherical
    } else if signed > 0.0 {
        SphereSide::Inside
    } else {
        SphereSide::Outside
    }
}

/// Maximum squared distance between two points of the simplex.
///
/// The maximum over a convex hull is attained at its vertices.
pub fn size_gs(points: &[&[f64]]) -> f64 {
    let mut best = 0.0_f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(distance_sq(a, b));
        }
    }
    best
}

/// Lebesgue measure `|det E| / n!` of a simplex.
pub fn volume(points: &[&[f64]]) -> f64 {
    let n = points[0].len();
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    edge_matrix(points).determinant().abs() / factorial
}

/// Circumcenter and squared radius, or `None` for flat simplices.
#[cfg(test)]
pub(crate) fn circumsphere(points: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let e = edge_matrix(points);
    let rhs = DVector::from_iterator(
        e.ncols(),
        (1..points.len()).map(|j| 0.5 * distance_sq(points[j], points[0])),
    );
    let rel = e.transpose().lu().solve(&rhs)?;
    let center: Vec<f64> = rel.iter().zip(points[0]).map(|(r, o)| r + o).collect();
    let r2 = distance_sq(&center, points[0]);
    Some((center, r2))
}
