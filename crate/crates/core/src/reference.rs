//! Mixed polynomials in `w1, conj w1, w3, conj w3`, the operator
//! `conj(w1) d/dw3 - conj(w3) d/dw1`, homogenization by powers of
//! `|w1|^2 + |w3|^2`, and the comparison polynomial `P_hat`.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::config::Tolerances;
use crate::map_factory::ImmersionMap;
use crate::poly::{Exponent4, PolyError, SparsePoly4};
use crate::quadric::QuadricPoint;
use crate::report::{CheckRecord, VerificationReport};
use crate::roots::{root_profile, RootMultiplicity};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("component of degree {degree} cannot reach degree {target} by powers of |w1|^2 + |w3|^2")]
    NotHomogenizable { degree: u32, target: u32 },
    #[error("t = {0} is below sqrt 2; the level equation 2u^2 + 1/u^2 = 2t has no solution")]
    BelowSqrt2(f64),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Multi-index `[p1, q1, p3, q3]`: powers of `w1, conj w1, w3, conj w3`.
pub type MixedExponent = [u32; 4];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MixedPoly {
    terms: BTreeMap<MixedExponent, Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl MixedPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (MixedExponent, Complex64)>>(terms: I) -> Self {
        let mut map = BTreeMap::new();
        for (e, v) in terms {
            *map.entry(e).or_insert(c(0.0, 0.0)) += v;
        }
        map.retain(|_, v: &mut Complex64| v.re != 0.0 || v.im != 0.0);
        Self { terms: map }
    }

    pub fn monomial(e: MixedExponent, v: Complex64) -> Self {
        Self::from_terms([(e, v)])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MixedExponent, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &MixedExponent) -> Complex64 {
        self.terms.get(e).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, v)| (*e, v * k)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().flat_map(|(e1, v1)| {
            other
                .terms
                .iter()
                .map(move |(e2, v2)| (std::array::from_fn(|i| e1[i] + e2[i]), v1 * v2))
        }))
    }

    /// Derivative in the variable with slot `k` of the multi-index.
    pub fn derivative(&self, k: usize) -> Self {
        Self::from_terms(self.terms.iter().filter(|(e, _)| e[k] > 0).map(|(e, v)| {
            let mut e2 = *e;
            e2[k] -= 1;
            (e2, v * e[k] as f64)
        }))
    }

    /// Total degree of every term.
    pub fn degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.keys().map(|e| e.iter().sum())
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.degrees().max()
    }

    /// `g(w1, conj w1, w3, conj w3)`.
    pub fn evaluate(&self, w1: Complex64, w3: Complex64) -> Complex64 {
        let vars = [w1, w1.conj(), w3, w3.conj()];
        self.terms
            .iter()
            .map(|(e, v)| (0..4).fold(*v, |acc, i| acc * vars[i].powu(e[i])))
            .sum()
    }

    /// `d^2 g / dw1 d(conj w1) + d^2 g / dw3 d(conj w3)`.
    pub fn laplacian(&self) -> Self {
        self.derivative(0).derivative(1) + self.derivative(2).derivative(3)
    }
}

impl Add for MixedPoly {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_terms(self.terms.into_iter().chain(rhs.terms))
    }
}

impl Neg for MixedPoly {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(c(-1.0, 0.0))
    }
}

impl Sub for MixedPoly {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// `conj(w1) dg/dw3 - conj(w3) dg/dw1`.
pub fn ar_operator(g: &MixedPoly) -> MixedPoly {
    let w1bar = MixedPoly::monomial([0, 1, 0, 0], c(1.0, 0.0));
    let w3bar = MixedPoly::monomial([0, 0, 0, 1], c(1.0, 0.0));
    w1bar.mul(&g.derivative(2)) - w3bar.mul(&g.derivative(0))
}

/// Harmonic up to a coefficient tolerance relative to the largest
/// coefficient of `g`.
pub fn is_harmonic_within(g: &MixedPoly, rel_tol: f64) -> bool {
    let scale = g.max_coeff_modulus().max(f64::MIN_POSITIVE);
    g.laplacian().max_coeff_modulus() <= rel_tol * scale
}

pub fn is_harmonic(g: &MixedPoly) -> bool {
    is_harmonic_within(g, 1e-14)
}

/// `(|w1|^2 + |w3|^2)^k`.
fn sphere_power(k: u32) -> MixedPoly {
    let s = MixedPoly::from_terms([([1, 1, 0, 0], c(1.0, 0.0)), ([0, 0, 1, 1], c(1.0, 0.0))]);
    (0..k).fold(MixedPoly::monomial([0; 4], c(1.0, 0.0)), |acc, _| acc.mul(&s))
}

/// Multiplies each homogeneous component of degree `d` by
/// `(|w1|^2 + |w3|^2)^((target - d) / 2)`.
pub fn homogenize_to_degree(g: &MixedPoly, target: u32) -> Result<MixedPoly, ReferenceError> {
    let mut out = MixedPoly::zero();
    for (e, v) in g.terms() {
        let d: u32 = e.iter().sum();
        if d > target || (target - d) % 2 == 1 {
            return Err(ReferenceError::NotHomogenizable { degree: d, target });
        }
        out = out + MixedPoly::monomial(*e, *v).mul(&sphere_power((target - d) / 2));
    }
    Ok(out)
}

/// [`homogenize_to_degree`] with the top degree of `g` as target. Values on
/// `|w1|^2 + |w3|^2 = 1` are unchanged.
pub fn homogenize_on_sphere(g: &MixedPoly) -> Result<MixedPoly, ReferenceError> {
    match g.max_degree() {
        Some(d) => homogenize_to_degree(g, d),
        None => Ok(g.clone()),
    }
}

/// `conj w1 -> w2`, `conj w3 -> w4`.
pub fn extend_to_quadric_coords(g: &MixedPoly) -> SparsePoly4 {
    SparsePoly4::from_terms(
        g.terms()
            .map(|(e, v)| (Exponent4::new(e[0], e[1], e[2], e[3]), *v)),
    )
}

/// Roots in `v = w3 w4` of `w3 df/dw2 - w1 df/dw4` restricted to the quadric,
/// with multiplicities.
pub fn degeneracy_root_profile(f: &SparsePoly4, tol: f64) -> Result<Vec<RootMultiplicity>, PolyError> {
    let restricted = f.apply_vector_field().to_uv()?.restrict_to_quadric();
    Ok(root_profile(&restricted, tol))
}

/// `(|w1|^4 - 4 |w1|^2 |w3|^2 + |w3|^4) / 6 + i (|w3|^2 - |w1|^2) / 2`.
pub fn ar_potential() -> MixedPoly {
    MixedPoly::from_terms([
        ([2, 2, 0, 0], c(1.0 / 6.0, 0.0)),
        ([1, 1, 1, 1], c(-4.0 / 6.0, 0.0)),
        ([0, 0, 2, 2], c(1.0 / 6.0, 0.0)),
        ([0, 0, 1, 1], c(0.0, 0.5)),
        ([1, 1, 0, 0], c(0.0, -0.5)),
    ])
}

/// `w3 conj(w1) conj(w3)^2 - w1 conj(w1)^2 conj(w3) + i conj(w1) conj(w3)`.
pub fn ar_polynomial() -> MixedPoly {
    MixedPoly::from_terms([
        ([0, 1, 1, 2], c(1.0, 0.0)),
        ([1, 2, 0, 1], c(-1.0, 0.0)),
        ([0, 1, 0, 1], c(0.0, 1.0)),
    ])
}

/// `(1 + i)(w2 w3 w4^2 + i w1 w2^2 w4)`.
pub fn p_hat() -> SparsePoly4 {
    let k = c(1.0, 1.0);
    SparsePoly4::from_terms([
        (Exponent4::new(0, 1, 1, 2), k),
        (Exponent4::new(1, 2, 0, 1), k * c(0.0, 1.0)),
    ])
}

fn p1_source_with_sign(sign: f64) -> MixedPoly {
    let s3 = 3f64.sqrt();
    MixedPoly::from_terms([
        ([0, 1, 1, 2], c(sign / 6.0, 0.0)),
        ([1, 2, 0, 1], c(-sign / 6.0, 0.0)),
        ([0, 1, 0, 1], c(0.0, -1.0 / (2.0 * s3))),
    ])
}

/// Harmonic polynomial whose homogenization extends to `P_1`.
pub fn p1_source() -> MixedPoly {
    p1_source_with_sign(1.0)
}

/// The same polynomial with the opposite sign on its cubic part. Its
/// extension is `-conj` of the coefficients of `P_1`.
pub fn p1_source_as_printed() -> MixedPoly {
    p1_source_with_sign(-1.0)
}

/// Homogenize, then extend to C^4.
pub fn provenance_pipeline(source: &MixedPoly) -> Result<SparsePoly4, ReferenceError> {
    Ok(extend_to_quadric_coords(&homogenize_on_sphere(source)?))
}

/// `w = (u, 1/u, u, 0)` and `w' = (u, 0, u, 1/u)` on `M_t`, with `u^2` the
/// larger root of `2u^2 + 1/u^2 = 2t`. Every `P_n` vanishes at both, so
/// `F_n(w) = F_n(w') = (u, u, 0)`.
pub fn noninjectivity_witness(t: f64) -> Result<(QuadricPoint, QuadricPoint), ReferenceError> {
    if !(t >= std::f64::consts::SQRT_2) {
        return Err(ReferenceError::BelowSqrt2(t));
    }
    let u2 = (t + (t * t - 2.0).max(0.0).sqrt()) / 2.0;
    let u = c(u2.sqrt(), 0.0);
    let zero = c(0.0, 0.0);
    Ok((
        QuadricPoint::new([u, 1.0 / u, u, zero]),
        QuadricPoint::new([u, zero, u, 1.0 / u]),
    ))
}

/// Check record for the explicit collision of `F_n` at level `t`.
pub fn collision_record(m: &ImmersionMap, t: f64, tol: &Tolerances) -> VerificationReport {
    let mut rep = VerificationReport::new("witnesses");
    let id = format!("collision-n{}-t{t}", m.n);
    let anchor = "F_n(u, 1/u, u, 0) = F_n(u, 0, u, 1/u) = (u, u, 0) for t >= sqrt 2";
    match noninjectivity_witness(t) {
        Ok((w, w2)) => {
            let (a, b) = (m.image(&w.w), m.image(&w2.w));
            let level_err = (w.level - t).abs().max((w2.level - t).abs());
            let quad = w.quadric_residual.max(w2.quadric_residual);
            let ok = a == b && w.w != w2.w && level_err <= tol.quadric && quad <= tol.quadric;
            let mut r = CheckRecord::pass_if(id, anchor, ok).with_witness(json!({
                "t": t,
                "w": w.to_json(),
                "w_prime": w2.to_json(),
                "image": a.iter().map(|z| crate::report::complex_json(*z)).collect::<Vec<_>>(),
            }));
            r.observed = Some(level_err);
            r.threshold = Some(tol.quadric);
            r.margin = Some(tol.quadric - level_err);
            rep.push(r);
        }
        Err(e) => rep.push(CheckRecord::pass_if(id, anchor, false).with_note(e.to_string())),
    }
    rep
}

#[derive(Serialize, Deserialize)]
struct MixedTermJson {
    e: [u32; 2],
    ebar: [u32; 2],
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct MixedPolyJson {
    terms: Vec<MixedTermJson>,
}

impl Serialize for MixedPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MixedPolyJson {
            terms: self
                .terms
                .iter()
                .map(|(e, v)| MixedTermJson {
                    e: [e[0], e[2]],
                    ebar: [e[1], e[3]],
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MixedPoly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MixedPolyJson::deserialize(deserializer)?;
        Ok(Self::from_terms(raw.terms.into_iter().map(|t| {
            ([t.e[0], t.ebar[0], t.e[1], t.ebar[1]], c(t.re, t.im))
        })))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_factory::build_immersion;
    use crate::roots::quadratic_roots;
    use proptest::prelude::{prop_assert, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sphere_points(count: usize, seed: u64) -> Vec<(Complex64, Complex64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                (c(v[0] / n, v[1] / n), c(v[2] / n, v[3] / n))
            })
            .collect()
    }

    #[test]
    fn operator_on_w3() {
        let g = MixedPoly::monomial([0, 0, 1, 0], c(1.0, 0.0));
        assert_eq!(ar_operator(&g), MixedPoly::monomial([0, 1, 0, 0], c(1.0, 0.0)));
    }

    #[test]
    fn operator_on_the_potential_gives_the_ar_polynomial() {
        let got = ar_operator(&ar_potential());
        let want = ar_polynomial();
        let diff = got - want;
        assert!(diff.max_coeff_modulus() < 1e-15, "{diff:?}");
    }

    #[test]
    fn operator_is_linear_and_leibniz() {
        let f = ar_potential();
        let g = p1_source();
        let k = c(0.3, -1.2);
        let lin = ar_operator(&(f.clone() + g.scale(k))) - (ar_operator(&f) + ar_operator(&g).scale(k));
        assert!(lin.max_coeff_modulus() < 1e-15);
        let leib = ar_operator(&f.mul(&g)) - (ar_operator(&f).mul(&g) + f.mul(&ar_operator(&g)));
        assert!(leib.max_coeff_modulus() < 1e-14);
    }

    #[test]
    fn harmonicity() {
        assert!(!is_harmonic(&MixedPoly::monomial([1, 1, 0, 0], c(1.0, 0.0))));
        assert!(is_harmonic(&MixedPoly::monomial([1, 0, 0, 1], c(1.0, 0.0))));
        assert!(is_harmonic(&p1_source()));
        assert!(is_harmonic(&p1_source_as_printed()));
        assert!(is_harmonic(&ar_polynomial()));
        assert!(is_harmonic(&ar_potential()));
    }

    #[test]
    fn homogenization_examples() {
        let h = homogenize_on_sphere(&ar_polynomial()).unwrap();
        let want = MixedPoly::from_terms([
            ([0, 1, 1, 2], c(1.0, 1.0)),
            ([1, 2, 0, 1], c(1.0, 1.0) * c(0.0, 1.0)),
        ]);
        assert!((h.clone() - want).max_coeff_modulus() < 1e-15);
        assert_eq!(homogenize_on_sphere(&h).unwrap(), h);
        let one = MixedPoly::monomial([0; 4], c(1.0, 0.0));
        assert_eq!(
            homogenize_to_degree(&one, 2).unwrap(),
            MixedPoly::from_terms([([1, 1, 0, 0], c(1.0, 0.0)), ([0, 0, 1, 1], c(1.0, 0.0))])
        );
        let odd = MixedPoly::from_terms([([1, 0, 0, 0], c(1.0, 0.0)), ([1, 1, 0, 0], c(1.0, 0.0))]);
        assert!(matches!(
            homogenize_on_sphere(&odd),
            Err(ReferenceError::NotHomogenizable { degree: 1, target: 2 })
        ));
    }

    #[test]
    fn homogenization_preserves_sphere_values() {
        for g in [ar_polynomial(), p1_source(), ar_potential()] {
            let h = homogenize_on_sphere(&g).unwrap();
            for (w1, w3) in sphere_points(1000, 17) {
                assert!((h.evaluate(w1, w3) - g.evaluate(w1, w3)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn extension_examples() {
        let ext = extend_to_quadric_coords(&homogenize_on_sphere(&ar_polynomial()).unwrap());
        assert!((ext - p_hat()).max_coeff_modulus() < 1e-15);
        let g = MixedPoly::monomial([0, 1, 0, 1], c(1.0, 0.0));
        assert_eq!(
            extend_to_quadric_coords(&g),
            SparsePoly4::monomial(Exponent4::new(0, 1, 0, 1), c(1.0, 0.0))
        );
    }

    #[test]
    fn extension_recovers_values_on_the_sphere() {
        let g = homogenize_on_sphere(&ar_polynomial()).unwrap();
        let ext = extend_to_quadric_coords(&g);
        for (w1, w3) in sphere_points(100, 3) {
            let w = [w1, w1.conj(), w3, w3.conj()];
            assert!((ext.evaluate(&w) - g.evaluate(w1, w3)).norm() < 1e-14);
        }
    }

    #[test]
    fn p1_provenance() {
        let p1 = build_immersion(1).unwrap().p;
        let got = provenance_pipeline(&p1_source()).unwrap();
        assert!(got.relative_residual(&p1) <= 1e-12);
        let printed = provenance_pipeline(&p1_source_as_printed()).unwrap();
        assert!(printed.relative_residual(&p1) > 0.1);
        let neg_conj = p1.map_coeffs(|z: &Complex64| -z.conj());
        assert!(printed.relative_residual(&neg_conj) <= 1e-12);
    }

    #[test]
    fn root_profile_of_p_n_is_a_single_multiple_root() {
        for n in 1..=6 {
            let m = build_immersion(n).unwrap();
            let prof = degeneracy_root_profile(&m.p, 1e-7).unwrap();
            assert_eq!(prof.len(), 1, "n = {n}: {prof:?}");
            assert_eq!(prof[0].multiplicity, 2 * n as usize);
            assert!((prof[0].root - m.critical_point()).norm() < 1e-6);
        }
    }

    #[test]
    fn root_profile_of_p_hat_has_two_roots() {
        let prof = degeneracy_root_profile(&p_hat(), 1e-7).unwrap();
        assert_eq!(prof.len(), 2);
        assert!(prof.iter().all(|r| r.multiplicity == 1));
        let oracle = quadratic_roots(c(3.0, -3.0), c(-2.0, 4.0), c(0.0, -1.0));
        let found: Vec<Complex64> = prof.iter().map(|r| r.root).collect();
        assert!(crate::roots::match_roots(&found, &oracle) < 1e-12);
        assert!((prof[0].root - prof[1].root).norm() > 1e-3);
    }

    #[test]
    fn p_hat_restriction_is_a_multiple_of_the_quadratic() {
        let restricted = p_hat()
            .apply_vector_field()
            .to_uv()
            .unwrap()
            .restrict_to_quadric();
        let k = c(1.0, 1.0);
        let want = [c(0.0, -1.0) * k, c(-2.0, 4.0) * k, c(3.0, -3.0) * k];
        assert_eq!(restricted.coeffs().len(), 3);
        for (a, b) in restricted.coeffs().iter().zip(want) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn root_profile_of_w2_w4() {
        let f = SparsePoly4::monomial(Exponent4::new(0, 1, 0, 1), c(1.0, 0.0));
        let prof = degeneracy_root_profile(&f, 1e-7).unwrap();
        assert_eq!(prof.len(), 1);
        assert_eq!(prof[0].multiplicity, 1);
        assert!((prof[0].root - c(0.5, 0.0)).norm() < 1e-15);
        assert!(degeneracy_root_profile(
            &SparsePoly4::monomial(Exponent4::new(1, 0, 0, 0), c(1.0, 0.0)),
            1e-7
        )
        .is_ok());
        let unbalanced = SparsePoly4::monomial(Exponent4::new(0, 2, 0, 0), c(1.0, 0.0));
        assert!(matches!(
            degeneracy_root_profile(&unbalanced, 1e-7),
            Err(PolyError::NotUvExpressible(_))
        ));
    }

    #[test]
    fn witness_examples() {
        let (w, w2) = noninjectivity_witness(std::f64::consts::SQRT_2).unwrap();
        let u = 2f64.powf(-0.25);
        // u^2 is a double root at t = sqrt 2, so u carries sqrt(eps) error.
        assert!((w.w[0].re - u).abs() < 1e-7);
        let m = build_immersion(1).unwrap();
        let (a, b) = (m.image(&w.w), m.image(&w2.w));
        assert_eq!(a, b);
        assert!((a[0].re - u).abs() < 1e-7 && a[2] == c(0.0, 0.0));

        let m3 = build_immersion(3).unwrap();
        let (w, w2) = noninjectivity_witness(1.5).unwrap();
        assert_eq!(m3.image(&w.w), m3.image(&w2.w));
        assert!((w.level - 1.5).abs() < 1e-14 && (w2.level - 1.5).abs() < 1e-14);

        assert!(matches!(
            noninjectivity_witness(1.2),
            Err(ReferenceError::BelowSqrt2(_))
        ));
    }

    #[test]
    fn collision_records_pass() {
        let tol = Tolerances::default();
        for n in 1..=3 {
            let m = build_immersion(n).unwrap();
            for t in [std::f64::consts::SQRT_2, 1.5, 2.0] {
                assert!(collision_record(&m, t, &tol).passed());
            }
        }
    }

    #[test]
    fn mixed_json_shape() {
        let g = p1_source();
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v["terms"][0]["e"], json!([0, 0]));
        assert_eq!(v["terms"][0]["ebar"], json!([1, 1]));
        let back: MixedPoly = serde_json::from_value(v).unwrap();
        assert_eq!(back, g);
    }

    proptest! {
        #[test]
        fn laplacian_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let f = ar_potential();
            let g = ar_polynomial();
            let lhs = (f.scale(c(a, 0.0)) + g.scale(c(0.0, b))).laplacian();
            let rhs = f.laplacian().scale(c(a, 0.0)) + g.laplacian().scale(c(0.0, b));
            prop_assert!((lhs - rhs).max_coeff_modulus() <= 1e-14);
        }
    }
}
