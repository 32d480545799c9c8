//! Sparse polynomials in `w1..w4` with complex coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Exponent4`], so iteration,
//! evaluation and serialization all follow the lexicographic order on
//! `(e1, e2, e3, e4)`. Exact zeros are dropped on insertion; nothing else is
//! pruned.
//!
//! Besides ring arithmetic the module carries the first-order operator
//! `L = w3 d/dw2 - w1 d/dw4`, whose values decide nondegeneracy of maps of the
//! form `(w1, w3, f)` on the quadric `w1 w2 + w3 w4 = 1`, and the reduction of
//! balanced polynomials to the products `u = w1 w2`, `v = w3 w4`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const DEFAULT_DEGREE_CAP: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("total degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },
    #[error("monomial {0} is not a product of w1*w2 and w3*w4 powers")]
    NotUvExpressible(Exponent4),
    #[error("non-finite coefficient at {0}")]
    NonFinite(Exponent4),
    #[error("malformed polynomial JSON: {0}")]
    Json(String),
}

/// Exponents of `w1, w2, w3, w4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Exponent4(pub [u32; 4]);

impl Exponent4 {
    pub const ZERO: Exponent4 = Exponent4([0; 4]);

    pub fn new(e1: u32, e2: u32, e3: u32, e4: u32) -> Self {
        Exponent4([e1, e2, e3, e4])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `e1 == e2` and `e3 == e4`: the monomial is `u^e1 v^e3`.
    pub fn is_balanced(&self) -> bool {
        self.0[0] == self.0[1] && self.0[2] == self.0[3]
    }

    fn plus(&self, other: &Exponent4) -> Exponent4 {
        Exponent4([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
            self.0[3] + other.0[3],
        ])
    }
}

impl fmt::Display for Exponent4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "w1^{a} w2^{b} w3^{c} w4^{d}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    W1,
    W2,
    W3,
    W4,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::W1, Var::W2, Var::W3, Var::W4];

    pub fn index(self) -> usize {
        match self {
            Var::W1 => 0,
            Var::W2 => 1,
            Var::W3 => 2,
            Var::W4 => 3,
        }
    }
}

/// Sparse polynomial in `w1..w4`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly4<S = Complex64> {
    terms: BTreeMap<Exponent4, S>,
}

impl<S: Scalar> Default for SparsePoly4<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> SparsePoly4<S> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(Exponent4::ZERO, c)
    }

    pub fn monomial(e: Exponent4, c: S) -> Self {
        let mut p = Self::zero();
        p.accumulate(e, c);
        p
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 4];
        e[v.index()] = 1;
        Self::monomial(Exponent4(e), S::one())
    }

    /// Sums repeated exponents and drops exact zeros.
    pub fn from_terms<I: IntoIterator<Item = (Exponent4, S)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.accumulate(e, c);
        }
        p
    }

    fn accumulate(&mut self, e: Exponent4, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&e) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(e, sum);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent4, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponent4) -> S {
        self.terms.get(e).cloned().unwrap_or_else(S::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exponent4::degree).max()
    }

    /// Common total degree of all terms, if there is one.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(Exponent4::degree);
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn is_finite(&self) -> bool {
        self.terms.values().all(Scalar::is_finite)
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.terms.values().map(Scalar::modulus).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, a)| (*e, a.clone() * c.clone())))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.mul_with_cap(other, DEFAULT_DEGREE_CAP)
    }

    pub fn mul_with_cap(&self, other: &Self, cap: u32) -> Result<Self, PolyError> {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.plus(eb);
                if e.degree() > cap {
                    return Err(PolyError::DegreeCap {
                        degree: e.degree(),
                        cap,
                    });
                }
                out.accumulate(e, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self, PolyError> {
        self.pow_with_cap(k, DEFAULT_DEGREE_CAP)
    }

    pub fn pow_with_cap(&self, k: u32, cap: u32) -> Result<Self, PolyError> {
        let mut acc = Self::constant(S::one());
        for _ in 0..k {
            acc = acc.mul_with_cap(self, cap)?;
        }
        Ok(acc)
    }

    pub fn partial_derivative(&self, var: Var) -> Self {
        let i = var.index();
        Self::from_terms(self.terms.iter().filter(|(e, _)| e.0[i] > 0).map(|(e, c)| {
            let mut d = e.0;
            let k = d[i];
            d[i] -= 1;
            (Exponent4(d), c.scale_int(i128::from(k)))
        }))
    }

    /// `L f = w3 df/dw2 - w1 df/dw4`.
    pub fn apply_vector_field(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let [a, b, cc, d] = e.0;
            if b > 0 {
                out.accumulate(Exponent4([a, b - 1, cc + 1, d]), c.scale_int(i128::from(b)));
            }
            if d > 0 {
                out.accumulate(Exponent4([a + 1, b, cc, d - 1]), -c.scale_int(i128::from(d)));
            }
        }
        out
    }

    pub fn to_uv(&self) -> Result<UvPoly<S>, PolyError> {
        let mut out = UvPoly::zero();
        for (e, c) in &self.terms {
            if !e.is_balanced() {
                return Err(PolyError::NotUvExpressible(*e));
            }
            out.coeffs.insert((e.0[0], e.0[2]), c.clone());
        }
        Ok(out)
    }

    /// Term sum in lexicographic exponent order.
    pub fn evaluate(&self, w: &[S; 4]) -> S {
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in w.iter().zip(e.0.iter()) {
                if k > 0 {
                    term = term * x.powu(k);
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Largest coefficient difference, relative to the largest coefficient of
    /// `reference`.
    pub fn relative_residual(&self, reference: &Self) -> f64 {
        let scale = reference.max_coeff_modulus();
        let diff = (self.clone() - reference.clone()).max_coeff_modulus();
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SparsePoly4<T> {
        SparsePoly4::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }

    pub fn to_c64(&self) -> SparsePoly4<Complex64> {
        self.map_coeffs(Scalar::to_c64)
    }
}

impl<S: Scalar> Add for SparsePoly4<S> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.accumulate(e, c);
        }
        self
    }
}

impl<S: Scalar> Sub for SparsePoly4<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<S: Scalar> Neg for SparsePoly4<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl<S: Scalar> fmt::Display for SparsePoly4<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let z = c.to_c64();
            write!(f, "({}{:+}i)*{}", z.re, z.im, e)?;
        }
        Ok(())
    }
}

/// Polynomial in `u = w1 w2` and `v = w3 w4`, keyed by `(j, k)` for `u^j v^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct UvPoly<S = Complex64> {
    coeffs: BTreeMap<(u32, u32), S>,
}

impl<S: Scalar> UvPoly<S> {
    pub fn zero() -> Self {
        Self {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), S)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (jk, c) in terms {
            let sum = out.coeffs.remove(&jk).map_or(c.clone(), |old| old + c);
            if !sum.is_zero() {
                out.coeffs.insert(jk, sum);
            }
        }
        out
    }

    pub fn coeff(&self, j: u32, k: u32) -> S {
        self.coeffs.get(&(j, k)).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &S)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Expands `u^j v^k` back to `w1^j w2^j w3^k w4^k`.
    pub fn to_poly4(&self) -> SparsePoly4<S> {
        SparsePoly4::from_terms(
            self.coeffs
                .iter()
                .map(|(&(j, k), c)| (Exponent4([j, j, k, k]), c.clone())),
        )
    }

    /// Substitutes `u = 1 - v`, the quadric relation, and collects powers of `v`.
    pub fn restrict_to_quadric(&self) -> UniPoly<S> {
        let degree = self.coeffs.keys().map(|&(j, k)| j + k).max().unwrap_or(0) as usize;
        let mut out = vec![S::zero(); degree + 1];
        for (&(j, k), c) in &self.coeffs {
            // (1 - v)^j = sum_m C(j, m) (-1)^m v^m
            let mut binom: i128 = 1;
            for m in 0..=j {
                let sign = if m % 2 == 0 { 1 } else { -1 };
                let idx = (k + m) as usize;
                out[idx] = out[idx].clone() + c.scale_int(sign * binom);
                binom = binom * i128::from(j - m) / i128::from(m + 1);
            }
        }
        UniPoly::new(out)
    }
}

/// Dense univariate polynomial, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<S = Complex64> {
    coeffs: Vec<S>,
}

impl<S: Scalar> UniPoly<S> {
    /// Trailing exact zeros are trimmed.
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn evaluate(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.scale_int(i as i128))
                .collect(),
        )
    }

    /// `(x - root)^k`, expanded.
    pub fn power_of_linear(root: &S, k: u32) -> Self {
        let mut coeffs = vec![S::one()];
        for _ in 0..k {
            let mut next = vec![S::zero(); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] = next[i + 1].clone() + c.clone();
                next[i] = next[i].clone() - c.clone() * root.clone();
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.coeffs.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    pub fn relative_residual(&self, reference: &Self) -> f64 {
        let n = self.coeffs.len().max(reference.coeffs.len());
        let mut diff: f64 = 0.0;
        for i in 0..n {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(S::zero);
            let b = reference.coeffs.get(i).cloned().unwrap_or_else(S::zero);
            diff = diff.max((a - b).modulus());
        }
        let scale = reference.max_coeff_modulus();
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    e: [u32; 4],
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    terms: Vec<TermJson>,
}

impl Serialize for SparsePoly4<Complex64> {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        PolyJson {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    e: e.0,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SparsePoly4<Complex64> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = PolyJson::deserialize(deserializer)?;
        let mut p = SparsePoly4::zero();
        for t in raw.terms {
            let e = Exponent4(t.e);
            if !(t.re.is_finite() && t.im.is_finite()) {
                return Err(serde::de::Error::custom(PolyError::NonFinite(e)));
            }
            p.accumulate(e, Complex64::new(t.re, t.im));
        }
        Ok(p)
    }
}

impl SparsePoly4<Complex64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial JSON is always serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, PolyError> {
        serde_json::from_str(s).map_err(|e| PolyError::Json(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn w(i: Var) -> SparsePoly4 {
        SparsePoly4::var(i)
    }

    fn p1() -> SparsePoly4 {
        let s3 = 3f64.sqrt();
        SparsePoly4::from_terms([
            (Exponent4::new(1, 2, 0, 1), -c(1.0 / 6.0, 1.0 / (2.0 * s3))),
            (Exponent4::new(0, 1, 1, 2), c(1.0 / 6.0, -1.0 / (2.0 * s3))),
        ])
    }

    #[test]
    fn difference_of_squares() {
        let a = w(Var::W1) + w(Var::W2);
        let b = w(Var::W1) - w(Var::W2);
        let prod = a.mul(&b).unwrap();
        let expected = SparsePoly4::from_terms([
            (Exponent4::new(2, 0, 0, 0), c(1.0, 0.0)),
            (Exponent4::new(0, 2, 0, 0), c(-1.0, 0.0)),
        ]);
        assert_eq!(prod, expected);
    }

    #[test]
    fn scaling_by_zero_annihilates() {
        assert!(p1().scale(&c(0.0, 0.0)).is_zero());
    }

    #[test]
    fn degree_cap_is_enforced() {
        let x = SparsePoly4::<Complex64>::monomial(Exponent4::new(40, 0, 0, 0), c(1.0, 0.0));
        assert!(matches!(
            x.mul(&x),
            Err(PolyError::DegreeCap { degree: 80, cap: 64 })
        ));
        assert!(x.mul_with_cap(&x, 80).is_ok());
    }

    #[test]
    fn r1_square_expansion() {
        let a1 = 1.0 / (2.0 * 3f64.sqrt());
        let u = w(Var::W1).mul(&w(Var::W2)).unwrap();
        let v = w(Var::W3).mul(&w(Var::W4)).unwrap();
        let base = u.scale(&c(0.5, a1)) - v.scale(&c(0.5, -a1));
        let r1 = base.pow(2).unwrap();
        let s3 = 3f64.sqrt();
        let expected = [
            (Exponent4::new(2, 2, 0, 0), c(1.0 / 6.0, 1.0 / (2.0 * s3))),
            (Exponent4::new(1, 1, 1, 1), c(-2.0 / 3.0, 0.0)),
            (Exponent4::new(0, 0, 2, 2), c(1.0 / 6.0, -1.0 / (2.0 * s3))),
        ];
        assert_eq!(r1.len(), 3);
        for (e, z) in expected {
            assert!((r1.coeff(&e) - z).norm() < 1e-15, "{e}");
        }
    }

    #[test]
    fn power_rule_and_constants() {
        let p = SparsePoly4::monomial(Exponent4::new(0, 2, 0, 1), c(1.0, 0.0));
        let d = p.partial_derivative(Var::W2);
        assert_eq!(d, SparsePoly4::monomial(Exponent4::new(0, 1, 0, 1), c(2.0, 0.0)));
        let k = SparsePoly4::constant(c(3.0, -1.0));
        assert!(k.partial_derivative(Var::W1).is_zero());
    }

    #[test]
    fn derivative_of_p1_in_w4() {
        let s3 = 3f64.sqrt();
        let d = p1().partial_derivative(Var::W4);
        let expected = SparsePoly4::from_terms([
            (Exponent4::new(1, 2, 0, 0), -c(1.0 / 6.0, 1.0 / (2.0 * s3))),
            (
                Exponent4::new(0, 1, 1, 1),
                c(1.0 / 6.0, -1.0 / (2.0 * s3)).scale(2.0),
            ),
        ]);
        assert!(d.relative_residual(&expected) < 1e-16);
    }

    #[test]
    fn vector_field_on_coordinates() {
        assert_eq!(w(Var::W2).apply_vector_field(), w(Var::W3));
        assert_eq!(w(Var::W4).apply_vector_field(), -w(Var::W1));
        assert!(w(Var::W1).apply_vector_field().is_zero());
    }

    #[test]
    fn vector_field_of_p1_is_r1() {
        let lp = p1().apply_vector_field();
        let a1 = 1.0 / (2.0 * 3f64.sqrt());
        let u = w(Var::W1).mul(&w(Var::W2)).unwrap();
        let v = w(Var::W3).mul(&w(Var::W4)).unwrap();
        let r1 = (u.scale(&c(0.5, a1)) - v.scale(&c(0.5, -a1))).pow(2).unwrap();
        assert!(lp.relative_residual(&r1) < 1e-15);
    }

    #[test]
    fn vector_field_on_uv_monomials_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for (j, k) in [(1, 0), (0, 1), (2, 1), (1, 3), (3, 2)] {
            let f = SparsePoly4::monomial(Exponent4::new(j, j, k, k), c(1.0, 0.0));
            let lf = f.apply_vector_field();
            for _ in 0..10 {
                let pt: [Complex64; 4] =
                    std::array::from_fn(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                let fd = |var: usize| {
                    let mut plus = pt;
                    let mut minus = pt;
                    plus[var] += h;
                    minus[var] -= h;
                    (f.evaluate(&plus) - f.evaluate(&minus)) / (2.0 * h)
                };
                let oracle = pt[2] * fd(1) - pt[0] * fd(3);
                let got = lf.evaluate(&pt);
                assert!((got - oracle).norm() < 1e-6, "u^{j} v^{k}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn uv_reindexing() {
        let u = w(Var::W1).mul(&w(Var::W2)).unwrap();
        let uv = u.to_uv().unwrap();
        assert_eq!(uv.len(), 1);
        assert_eq!(uv.coeff(1, 0), c(1.0, 0.0));
        assert!(matches!(p1().to_uv(), Err(PolyError::NotUvExpressible(_))));
    }

    #[test]
    fn quadric_restriction_of_u_plus_v() {
        let uv = UvPoly::from_terms([((1, 0), c(1.0, 0.0)), ((0, 1), c(1.0, 0.0))]);
        let r = uv.restrict_to_quadric();
        assert_eq!(r.coeffs(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn evaluate_sums_coefficients_at_ones() {
        let one = c(1.0, 0.0);
        let val = p1().evaluate(&[one; 4]);
        assert!((val - c(0.0, -1.0 / 3f64.sqrt())).norm() < 1e-15);
        let zero = c(0.0, 0.0);
        let q = p1() + SparsePoly4::constant(c(2.5, 1.0));
        assert_eq!(q.evaluate(&[zero; 4]), c(2.5, 1.0));
    }

    #[test]
    fn r1_vanishes_where_the_products_hit_the_critical_values() {
        let a1 = 1.0 / (2.0 * 3f64.sqrt());
        let u = w(Var::W1).mul(&w(Var::W2)).unwrap();
        let v = w(Var::W3).mul(&w(Var::W4)).unwrap();
        let r1 = (u.scale(&c(0.5, a1)) - v.scale(&c(0.5, -a1))).pow(2).unwrap();
        let w1 = c(0.7, 0.2);
        let w3 = c(-0.4, 1.1);
        let pt = [w1, c(0.5, -a1) / w1, w3, c(0.5, a1) / w3];
        assert!(r1.evaluate(&pt).norm() < 1e-15);
    }

    #[test]
    fn json_shape_and_order() {
        let s = p1().to_json();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let terms = v["terms"].as_array().unwrap();
        assert_eq!(terms[0]["e"], serde_json::json!([0, 1, 1, 2]));
        assert_eq!(terms[1]["e"], serde_json::json!([1, 2, 0, 1]));
        assert!(SparsePoly4::from_json(r#"{"terms":[{"e":[0,0,0,0],"re":1e999,"im":0}]}"#).is_err());
    }

    fn arb_poly(max_deg: u32, int_coeffs: bool) -> impl Strategy<Value = SparsePoly4> {
        let coeff = if int_coeffs {
            (-20i32..20, -20i32..20)
                .prop_map(|(a, b)| c(f64::from(a), f64::from(b)))
                .boxed()
        } else {
            (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b)).boxed()
        };
        let exp = (0..=max_deg, 0..=max_deg, 0..=max_deg, 0..=max_deg)
            .prop_filter("degree", move |(a, b, cc, d)| a + b + cc + d <= max_deg)
            .prop_map(|(a, b, cc, d)| Exponent4::new(a, b, cc, d));
        prop::collection::vec((exp, coeff), 0..8).prop_map(SparsePoly4::from_terms)
    }

    fn arb_balanced() -> impl Strategy<Value = SparsePoly4> {
        prop::collection::vec(((0u32..5, 0u32..5), (-1.0f64..1.0, -1.0f64..1.0)), 1..8).prop_map(|ts| {
            SparsePoly4::from_terms(
                ts.into_iter()
                    .map(|((j, k), (a, b))| (Exponent4::new(j, j, k, k), c(a, b))),
            )
        })
    }

    proptest! {
        #[test]
        fn vector_field_is_linear(p in arb_poly(8, true), q in arb_poly(8, true),
                                  a in (-5i32..5, -5i32..5), b in (-5i32..5, -5i32..5)) {
            let a = c(f64::from(a.0), f64::from(a.1));
            let b = c(f64::from(b.0), f64::from(b.1));
            let lhs = (p.scale(&a) + q.scale(&b)).apply_vector_field();
            let rhs = p.apply_vector_field().scale(&a) + q.apply_vector_field().scale(&b);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn vector_field_obeys_leibniz(p in arb_poly(4, false), q in arb_poly(4, false)) {
            let lhs = p.mul(&q).unwrap().apply_vector_field();
            let rhs = p.mul(&q.apply_vector_field()).unwrap() + q.mul(&p.apply_vector_field()).unwrap();
            let scale = lhs.max_coeff_modulus().max(rhs.max_coeff_modulus()).max(1e-300);
            prop_assert!((lhs - rhs).max_coeff_modulus() / scale <= 1e-12);
        }

        #[test]
        fn uv_round_trip(p in arb_balanced()) {
            prop_assert_eq!(p.to_uv().unwrap().to_poly4(), p);
        }

        #[test]
        fn quadric_restriction_agrees_with_evaluation(p in arb_balanced(),
                                                      w1 in (-1.5f64..1.5, -1.5f64..1.5),
                                                      w3 in (-1.5f64..1.5, -1.5f64..1.5),
                                                      v0 in (-1.0f64..1.0, -1.0f64..1.0)) {
            let w1 = c(w1.0, w1.1);
            let w3 = c(w3.0, w3.1);
            prop_assume!(w1.norm() > 0.2 && w3.norm() > 0.2);
            let v0 = c(v0.0, v0.1);
            let pt = [w1, (c(1.0, 0.0) - v0) / w1, w3, v0 / w3];
            let direct = p.evaluate(&pt);
            let restricted = p.to_uv().unwrap().restrict_to_quadric().evaluate(&v0);
            let scale = p.terms().map(|(e, z)| z.norm() * 5f64.powi(e.degree() as i32)).sum::<f64>();
            prop_assert!((direct - restricted).norm() <= 1e-10 * scale.max(direct.norm()).max(1.0));
        }

        #[test]
        fn evaluation_is_multiplicative(p in arb_poly(4, false), q in arb_poly(4, false),
                                        pt in prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0))) {
            let pt = pt.map(|(a, b)| c(a, b));
            let prod = p.mul(&q).unwrap().evaluate(&pt);
            let separate = p.evaluate(&pt) * q.evaluate(&pt);
            let abs_scale = |r: &SparsePoly4| r.terms().map(|(_, z)| z.norm()).sum::<f64>();
            let scale = abs_scale(&p) * abs_scale(&q);
            prop_assert!((prod - separate).norm() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn json_round_trip_is_bit_exact(p in arb_poly(6, false)) {
            let back = SparsePoly4::from_json(&p.to_json()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
