//! Polynomials of a Gaussian vector and their Hermite expansions.
//!
//! A polynomial `f: R^n -> R^m` is stored in monomial form. [`expand`]
//! rewrites it as `sum_d a_d prod_k h_{d_k}(x_k)` with probabilists' Hermite
//! polynomials, and [`expected_gradient_tensor`] reads off
//! `E nabla^d f(G)` from the degree-`d` coefficients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{dimension, invalid, Result};
use crate::space::ValueSpace;
use crate::tensor::{for_each_index, CoeffTensor};

pub const MAX_DEGREE: usize = 6;
pub const MAX_VARS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialTerm {
    pub exps: Vec<u32>,
    pub coeff: Vec<f64>,
}

/// `f(x) = sum_t coeff_t prod_k x_k^{exps_t[k]}` with values in `R^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub n: usize,
    #[serde(rename = "D")]
    pub degree: usize,
    pub m: usize,
    pub terms: Vec<MonomialTerm>,
    pub space: ValueSpace,
}

/// Hermite coefficients `a_d` keyed by exponent vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HermiteExpansion {
    pub n: usize,
    pub m: usize,
    pub coeffs: BTreeMap<Vec<u32>, Vec<f64>>,
}

fn total(exps: &[u32]) -> usize {
    exps.iter().map(|&e| e as usize).sum()
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

impl PolynomialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_VARS {
            return Err(invalid(format!("n must lie in 1..={MAX_VARS}, got {}", self.n)));
        }
        if self.degree > MAX_DEGREE {
            return Err(invalid(format!("D must be at most {MAX_DEGREE}, got {}", self.degree)));
        }
        if self.m == 0 {
            return Err(invalid("m ≥ 1 required"));
        }
        self.space.validate()?;
        if self.space.dim() != self.m {
            return Err(dimension(format!(
                "value space has dimension {} but m = {}",
                self.space.dim(),
                self.m
            )));
        }
        for t in &self.terms {
            if t.exps.len() != self.n {
                return Err(dimension(format!("exponent vector of length {} ≠ n = {}", t.exps.len(), self.n)));
            }
            if t.coeff.len() != self.m {
                return Err(dimension(format!("coefficient of length {} ≠ m = {}", t.coeff.len(), self.m)));
            }
            if total(&t.exps) > self.degree {
                return Err(invalid(format!("term {:?} has degree above D = {}", t.exps, self.degree)));
            }
            if t.coeff.iter().any(|c| !c.is_finite()) {
                return Err(invalid("non-finite coefficient"));
            }
        }
        Ok(())
    }

    /// Builds `sum_d sum_{i in [n]^d} t_d[i] x_{i_1} .. x_{i_d}` from dense
    /// tensors; `dense[d]` has `n^d * m` entries, so `dense[0]` is the constant.
    pub fn from_dense(n: usize, m: usize, space: ValueSpace, dense: &[Vec<f64>]) -> Result<Self> {
        let mut acc: BTreeMap<Vec<u32>, Vec<f64>> = BTreeMap::new();
        for (d, values) in dense.iter().enumerate() {
            if values.len() != n.pow(d as u32) * m {
                return Err(dimension(format!("degree-{d} table has {} entries", values.len())));
            }
            let mut add = |flat: usize, idx: &[usize]| {
                let mut exps = vec![0u32; n];
                idx.iter().for_each(|&i| exps[i] += 1);
                let c = acc.entry(exps).or_insert_with(|| vec![0.0; m]);
                for (c, v) in c.iter_mut().zip(&values[flat * m..flat * m + m]) {
                    *c += v;
                }
            };
            if d == 0 {
                add(0, &[]);
            } else {
                for_each_index(d, n, &mut add);
            }
        }
        let spec = PolynomialSpec {
            n,
            degree: dense.len().saturating_sub(1),
            m,
            terms: acc
                .into_iter()
                .map(|(exps, coeff)| MonomialTerm { exps, coeff })
                .collect(),
            space,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Coefficients merged by exponent vector.
    pub fn coefficient_map(&self) -> BTreeMap<Vec<u32>, Vec<f64>> {
        let mut map: BTreeMap<Vec<u32>, Vec<f64>> = BTreeMap::new();
        for t in &self.terms {
            let c = map.entry(t.exps.clone()).or_insert_with(|| vec![0.0; self.m]);
            for (c, v) in c.iter_mut().zip(&t.coeff) {
                *c += v;
            }
        }
        map
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for t in &self.terms {
            let w: f64 = t.exps.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product();
            for (o, c) in out.iter_mut().zip(&t.coeff) {
                *o += w * c;
            }
        }
        out
    }
}

/// `h_k(x)` by the three-term recurrence `h_{k+1} = x h_k - k h_{k-1}`.
pub fn hermite_value(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `x^k = sum_j c_j h_j(x)` with `c_j = k! / (j! ((k-j)/2)! 2^((k-j)/2))` for
/// `k - j` even.
fn monomial_in_hermite(k: u32) -> Vec<(u32, f64)> {
    (0..=k)
        .rev()
        .step_by(2)
        .map(|j| {
            let s = (k - j) / 2;
            (j, factorial(k) / (factorial(j) * factorial(s) * 2f64.powi(s as i32)))
        })
        .collect()
}

/// `h_k(x) = sum_s c_s x^(k-2s)` with `c_s = (-1)^s k! / (s! (k-2s)! 2^s)`.
fn hermite_in_monomials(k: u32) -> Vec<(u32, f64)> {
    (0..=k / 2)
        .map(|s| {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            (
                k - 2 * s,
                sign * factorial(k) / (factorial(s) * factorial(k - 2 * s) * 2f64.powi(s as i32)),
            )
        })
        .collect()
}

/// Applies a per-variable change of basis to every term of a coefficient map.
fn change_basis(
    n: usize,
    m: usize,
    map: &BTreeMap<Vec<u32>, Vec<f64>>,
    basis: fn(u32) -> Vec<(u32, f64)>,
) -> BTreeMap<Vec<u32>, Vec<f64>> {
    let mut out: BTreeMap<Vec<u32>, Vec<f64>> = BTreeMap::new();
    for (exps, coeff) in map {
        // product over variables of the one-dimensional expansions
        let mut partial: Vec<(Vec<u32>, f64)> = vec![(Vec::with_capacity(n), 1.0)];
        for &e in exps {
            let one = basis(e);
            partial = partial
                .iter()
                .flat_map(|(ex, w)| {
                    one.iter().map(move |(j, c)| {
                        let mut ex = ex.clone();
                        ex.push(*j);
                        (ex, w * c)
                    })
                })
                .collect();
        }
        for (ex, w) in partial {
            let slot = out.entry(ex).or_insert_with(|| vec![0.0; m]);
            for (s, c) in slot.iter_mut().zip(coeff) {
                *s += w * c;
            }
        }
    }
    out.retain(|_, c| c.iter().any(|v| *v != 0.0));
    out
}

pub fn expand(f: &PolynomialSpec) -> Result<HermiteExpansion> {
    f.validate()?;
    Ok(HermiteExpansion {
        n: f.n,
        m: f.m,
        coeffs: change_basis(f.n, f.m, &f.coefficient_map(), monomial_in_hermite),
    })
}

impl HermiteExpansion {
    /// Monomial coefficients of the expansion, exact zeros dropped.
    pub fn to_monomials(&self) -> BTreeMap<Vec<u32>, Vec<f64>> {
        change_basis(self.n, self.m, &self.coeffs, hermite_in_monomials)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|e| total(e)).max().unwrap_or(0)
    }

    /// `E f(G)`, the coefficient of `h_0`.
    pub fn mean(&self) -> Vec<f64> {
        self.coeffs
            .get(&vec![0; self.n])
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.m])
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (exps, coeff) in &self.coeffs {
            let w: f64 = exps
                .iter()
                .zip(x)
                .map(|(&e, &xi)| hermite_value(e as usize, xi))
                .product();
            for (o, c) in out.iter_mut().zip(coeff) {
                *o += w * c;
            }
        }
        out
    }
}

/// `E nabla^d f(G)` as a symmetric `d`-indexed tensor.
///
/// Differentiating `prod_k h_{e_k}(x_k)` along an index tuple with variable
/// counts `c` and taking expectations leaves `prod_k c_k!` when `e = c` and 0
/// otherwise, so the entry at `i` is `prod_k c_k(i)! * a_{c(i)}`.
pub fn expected_gradient_tensor(f: &PolynomialSpec, d: usize) -> Result<CoeffTensor> {
    let h = expand(f)?;
    if d == 0 || d > f.degree {
        return Err(invalid(format!("derivative order {d} outside 1..={}", f.degree)));
    }
    let mut counts = vec![0u32; f.n];
    CoeffTensor::from_fn(d, f.n, f.space.clone(), |idx, out| {
        counts.iter_mut().for_each(|c| *c = 0);
        idx.iter().for_each(|&i| counts[i] += 1);
        if let Some(a) = h.coeffs.get(&counts) {
            let w: f64 = counts.iter().map(|&c| factorial(c)).product();
            for (o, v) in out.iter_mut().zip(a) {
                *o = w * v;
            }
        }
    })
}

/// Splits a tetrahedral polynomial into its nonzero homogeneous parts,
/// returned as `(degree, part)` in increasing degree.
pub fn homogeneous_parts(q: &PolynomialSpec) -> Result<Vec<(usize, PolynomialSpec)>> {
    q.validate()?;
    if let Some(t) = q.terms.iter().find(|t| t.exps.iter().any(|&e| e > 1)) {
        return Err(invalid(format!("term {:?} is not tetrahedral", t.exps)));
    }
    let mut by_degree: BTreeMap<usize, Vec<MonomialTerm>> = BTreeMap::new();
    for t in &q.terms {
        by_degree.entry(total(&t.exps)).or_default().push(t.clone());
    }
    Ok(by_degree
        .into_iter()
        .map(|(d, terms)| {
            (
                d,
                PolynomialSpec {
                    degree: d,
                    terms,
                    ..q.clone()
                },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    fn spec(n: usize, terms: Vec<(Vec<u32>, f64)>) -> PolynomialSpec {
        let degree = terms.iter().map(|(e, _)| total(e)).max().unwrap_or(0);
        PolynomialSpec {
            n,
            degree,
            m: 1,
            terms: terms
                .into_iter()
                .map(|(exps, c)| MonomialTerm { exps, coeff: vec![c] })
                .collect(),
            space: ValueSpace::euclidean(1),
        }
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_value(0, 0.3), 1.0);
        assert_eq!(hermite_value(1, 0.3), 0.3);
        assert_eq!(hermite_value(2, 1.0), 0.0);
        assert_eq!(hermite_value(3, 2.0), 2.0);
        for &x in &[-1.3, 0.0, 0.7, 2.5] {
            let h4 = x * x * x * x - 6.0 * x * x + 3.0;
            assert!((hermite_value(4, x) - h4).abs() < 1e-12);
        }
    }

    #[test]
    fn expand_small_cases() {
        let h = expand(&spec(1, vec![(vec![2], 1.0)])).unwrap();
        assert_eq!(h.coeffs.get(&vec![2]), Some(&vec![1.0]));
        assert_eq!(h.coeffs.get(&vec![0]), Some(&vec![1.0]));
        assert_eq!(h.coeffs.len(), 2);
        let h = expand(&spec(1, vec![(vec![1], 1.0)])).unwrap();
        assert_eq!(h.coeffs.len(), 1);
        assert_eq!(h.coeffs.get(&vec![1]), Some(&vec![1.0]));
    }

    #[test]
    fn expansion_evaluates_like_the_polynomial() {
        let f = spec(2, vec![(vec![3, 1], 1.5), (vec![0, 2], -2.0), (vec![1, 0], 0.5), (vec![0, 0], 4.0)]);
        let h = expand(&f).unwrap();
        for &(x, y) in &[(0.3, -1.2), (1.7, 0.4), (-2.0, 2.0)] {
            let a = f.evaluate(&[x, y])[0];
            let b = h.evaluate(&[x, y])[0];
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }
    }

    /// Dense symmetric tensors for the cubic example.
    fn cubic(n: usize, m: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut rng = crate::rng::stream(seed, "cubic", 0);
        let sym = |t: CoeffTensor| t.symmetrize().values().to_vec();
        let space = ValueSpace::euclidean(m);
        let a = CoeffTensor::new(3, n, m, crate::rng::gaussian_vec(&mut rng, n * n * n * m), space.clone()).unwrap();
        let b = CoeffTensor::new(2, n, m, crate::rng::gaussian_vec(&mut rng, n * n * m), space).unwrap();
        let c = crate::rng::gaussian_vec(&mut rng, n * m);
        let d = crate::rng::gaussian_vec(&mut rng, m);
        (sym(a), sym(b), c, d)
    }

    #[test]
    fn cubic_example_gradients() {
        let (n, m) = (3, 2);
        let (a, b, c, d) = cubic(n, m, 4);
        let f = PolynomialSpec::from_dense(n, m, ValueSpace::euclidean(m), &[d, c.clone(), b.clone(), a.clone()]).unwrap();
        let g3 = expected_gradient_tensor(&f, 3).unwrap();
        let g2 = expected_gradient_tensor(&f, 2).unwrap();
        let g1 = expected_gradient_tensor(&f, 1).unwrap();
        for (x, y) in g3.values().iter().zip(&a) {
            assert!((x - 6.0 * y).abs() < 1e-12);
        }
        for (x, y) in g2.values().iter().zip(&b) {
            assert!((x - 2.0 * y).abs() < 1e-12);
        }
        for i in 0..n {
            for v in 0..m {
                let want = c[i * m + v] + 3.0 * (0..n).map(|j| a[((i * n + j) * n + j) * m + v]).sum::<f64>();
                assert!((g1.values()[i * m + v] - want).abs() < 1e-12);
            }
        }
        assert!(g3.is_symmetric(0.0) && g2.is_symmetric(0.0));
        assert!(expected_gradient_tensor(&f, 4).is_err());
        assert!(expected_gradient_tensor(&f, 0).is_err());
    }

    /// Gauss–Hermite nodes and weights for the standard normal law
    /// (Golub–Welsch on the Jacobi matrix of the probabilists' recurrence).
    fn gauss_hermite(k: usize) -> Vec<(f64, f64)> {
        let mut jm = DMatrix::<f64>::zeros(k, k);
        for i in 1..k {
            jm[(i, i - 1)] = (i as f64).sqrt();
            jm[(i - 1, i)] = (i as f64).sqrt();
        }
        let eig = SymmetricEigen::new(jm);
        (0..k)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect()
    }

    /// `d^|c| f / dx^c` in monomial form.
    fn derivative(f: &PolynomialSpec, idx: &[usize]) -> PolynomialSpec {
        let mut terms = f.terms.clone();
        for &i in idx {
            terms = terms
                .into_iter()
                .filter(|t| t.exps[i] > 0)
                .map(|mut t| {
                    let e = t.exps[i] as f64;
                    t.exps[i] -= 1;
                    t.coeff.iter_mut().for_each(|c| *c *= e);
                    t
                })
                .collect();
        }
        PolynomialSpec { terms, ..f.clone() }
    }

    fn quadrature_mean(f: &PolynomialSpec, rule: &[(f64, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; f.m];
        let k = rule.len();
        for_each_index(f.n, k, |_, idx| {
            let x: Vec<f64> = idx.iter().map(|&i| rule[i].0).collect();
            let w: f64 = idx.iter().map(|&i| rule[i].1).product();
            for (o, v) in out.iter_mut().zip(f.evaluate(&x)) {
                *o += w * v;
            }
        });
        out
    }

    #[test]
    fn h2_second_derivative_is_two() {
        let f = spec(1, vec![(vec![2], 1.0), (vec![0], -1.0)]);
        assert_eq!(expected_gradient_tensor(&f, 2).unwrap().values(), &[2.0]);
    }

    #[test]
    fn quadrature_cross_check() {
        let rule = gauss_hermite(8);
        for seed in 0..12u64 {
            let n = 1 + (seed as usize % 3);
            let degree = 1 + (seed as usize / 3) % 3;
            let mut rng = crate::rng::stream(seed, "poly", 0);
            let dense: Vec<Vec<f64>> = (0..=degree)
                .map(|d| crate::rng::gaussian_vec(&mut rng, n.pow(d as u32) * 2))
                .collect();
            let f = PolynomialSpec::from_dense(n, 2, ValueSpace::euclidean(2), &dense).unwrap();
            for d in 1..=degree {
                let t = expected_gradient_tensor(&f, d).unwrap();
                for_each_index(d, n, |flat, idx| {
                    let want = quadrature_mean(&derivative(&f, idx), &rule);
                    for (v, w) in t.values()[flat * 2..flat * 2 + 2].iter().zip(&want) {
                        assert!((v - w).abs() < 1e-8, "seed {seed} d {d} {idx:?}: {v} vs {w}");
                    }
                });
            }
        }
    }

    #[test]
    fn tetrahedral_parts() {
        let q = spec(2, vec![(vec![0, 0], 1.0), (vec![1, 0], 1.0), (vec![1, 1], 1.0)]);
        let parts = homogeneous_parts(&q).unwrap();
        assert_eq!(parts.iter().map(|(d, _)| *d).collect::<Vec<_>>(), vec![0, 1, 2]);
        let reassembled: Vec<MonomialTerm> = parts.into_iter().flat_map(|(_, p)| p.terms).collect();
        assert_eq!(reassembled, q.terms);
        let hom = spec(2, vec![(vec![1, 1], 2.0)]);
        assert_eq!(homogeneous_parts(&hom).unwrap().len(), 1);
        assert!(homogeneous_parts(&spec(1, vec![(vec![2], 1.0)])).is_err());
    }

    #[test]
    fn validation_caps() {
        let mut f = spec(1, vec![(vec![7], 1.0)]);
        assert!(f.validate().is_err());
        f.terms[0].exps = vec![2];
        f.degree = 1;
        assert!(f.validate().is_err());
        let big = PolynomialSpec { n: 17, terms: vec![], ..spec(1, vec![]) };
        assert!(big.validate().is_err());
    }

    proptest! {
        #[test]
        fn monomial_round_trip(coeffs in proptest::collection::vec(-3.0f64..3.0, 10)) {
            // all monomials of degree <= 3 in two variables
            let exps: Vec<Vec<u32>> = (0..=3u32)
                .flat_map(|a| (0..=3 - a).map(move |b| vec![a, b]))
                .collect();
            let f = spec(2, exps.into_iter().zip(coeffs).collect());
            let back = expand(&f).unwrap().to_monomials();
            let orig = f.coefficient_map();
            for (e, c) in &orig {
                let got = back.get(e).map(|v| v[0]).unwrap_or(0.0);
                prop_assert!((got - c[0]).abs() < 1e-12);
            }
            for e in back.keys() {
                prop_assert!(orig.contains_key(e));
            }
        }
    }
}
