use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Monomials up to a total degree, in graded lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyLibrary {
    pub dim: usize,
    pub degree: u32,
    /// Exponent multi-index of each term.
    pub terms: Vec<Vec<u32>>,
}

fn exponents(dim: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == dim {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=total).rev() {
        prefix.push(e);
        exponents(dim, total - e, prefix, out);
        prefix.pop();
    }
}

impl PolyLibrary {
    pub fn new(dim: usize, degree: u32) -> Self {
        assert!(dim >= 1, "library needs at least one input");
        let mut terms = Vec::new();
        for total in 0..=degree {
            exponents(dim, total, &mut Vec::with_capacity(dim), &mut terms);
        }
        Self { dim, degree, terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, exponent: &[u32]) -> Option<usize> {
        self.terms.iter().position(|t| t == exponent)
    }

    pub fn featurize(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.featurize_into(x, &mut out);
        out
    }

    pub fn featurize_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.terms.iter().map(|t| {
            t.iter()
                .zip(x)
                .map(|(&e, &v)| v.powi(e as i32))
                .product::<f64>()
        }));
    }

    /// Human-readable term names such as `x0*x2` or `x1^2`.
    pub fn term_names(&self, vars: &[&str]) -> Vec<String> {
        self.terms
            .iter()
            .map(|t| {
                let parts: Vec<String> = t
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(k, &e)| {
                        if e == 1 {
                            vars[k].to_string()
                        } else {
                            format!("{}^{e}", vars[k])
                        }
                    })
                    .collect();
                if parts.is_empty() {
                    "1".into()
                } else {
                    parts.join("*")
                }
            })
            .collect()
    }
}

/// Sparse polynomial keyed by exponent multi-index.
pub(crate) type Poly = BTreeMap<Vec<u32>, f64>;

pub(crate) fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

/// `(x_k - mu) / s` as a polynomial in raw `x`.
pub(crate) fn affine_poly(dim: usize, k: usize, mu: f64, s: f64) -> Poly {
    let mut unit = vec![0; dim];
    unit[k] = 1;
    let mut p = Poly::new();
    p.insert(unit, 1.0 / s);
    p.insert(vec![0; dim], -mu / s);
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_quadratic_order() {
        let lib = PolyLibrary::new(3, 2);
        assert_eq!(lib.len(), 10);
        assert_eq!(
            lib.featurize(&[1.0, 2.0, 3.0]),
            vec![1.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 4.0, 6.0, 9.0]
        );
        assert_eq!(
            lib.term_names(&["x", "y", "z"]),
            ["1", "x", "y", "z", "x^2", "x*y", "x*z", "y^2", "y*z", "z^2"]
        );
    }

    #[test]
    fn zero_input_and_linear_library() {
        let lib = PolyLibrary::new(3, 2);
        let f = lib.featurize(&[0.0; 3]);
        assert_eq!(f[0], 1.0);
        assert!(f[1..].iter().all(|&v| v == 0.0));
        assert_eq!(PolyLibrary::new(2, 1).featurize(&[4.0, -5.0]), vec![1.0, 4.0, -5.0]);
    }

    #[test]
    fn term_count_is_binomial() {
        fn binom(n: u64, k: u64) -> u64 {
            (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
        }
        for dim in 1..=5 {
            for degree in 0..=4 {
                let lib = PolyLibrary::new(dim, degree);
                assert_eq!(lib.len() as u64, binom((dim as u64) + degree as u64, degree as u64));
            }
        }
    }

    #[test]
    fn poly_product() {
        // (x - 1)(x + 1) = x^2 - 1
        let a = affine_poly(1, 0, 1.0, 1.0);
        let b = affine_poly(1, 0, -1.0, 1.0);
        let p = poly_mul(&a, &b);
        assert_eq!(p.get(&vec![2]), Some(&1.0));
        assert_eq!(p.get(&vec![1]), Some(&0.0));
        assert_eq!(p.get(&vec![0]), Some(&-1.0));
    }
}
