//! Construction of the immersions `F_n = (w1, w3, P_n)`.
//!
//! For each order `n >= 1` we fix `z = 1/2 + i a_n` on the line `Re z = 1/2`
//! with `arg z = (pi/2 + 2 pi K) / (2n + 1)`, `K = ceil(n/2) - 1`, so that
//! `z^(2n+1)` is purely imaginary. Then
//!
//! ```text
//! R_n = (z w1 w2 - conj(z) w3 w4)^(2n)
//! P_n = sum_{k=1}^{2n} alpha_k w1^(2n-k) w2^(2n-k+1) w3^(k-1) w4^k
//! ```
//!
//! and the alphas are chosen so that `w3 dP/dw2 - w1 dP/dw4 = R_n` holds
//! identically. Writing `c_j` for the coefficient of `u^j v^(2n-j)` in `R_n`,
//! matching coefficients gives
//!
//! ```text
//! (j + 1) alpha_{2n-j} - (2n - j + 1) alpha_{2n-j+1} = c_j,   1 <= j <= 2n-1
//! alpha_1 = -c_{2n},  alpha_{2n} = c_0
//! ```
//!
//! The alphas are filled downward from `alpha_{2n}` and upward from
//! `alpha_1`; the single equation left over (`j = n`) must then hold on its
//! own, which is where the choice of `a_n` enters.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::config::Tolerances;
use crate::poly::{Exponent4, PolyError, SparsePoly4, UniPoly, Var, DEFAULT_DEGREE_CAP};
use crate::report::{complex_json, CheckRecord, VerificationReport};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("order n must be at least 1")]
    InvalidOrder,
    #[error("two-sided alpha recursion disagrees at k = n: residual {residual:e} > {tolerance:e}")]
    Inconsistent { residual: f64, tolerance: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionConfig {
    /// Relative tolerance for the `k = n` consistency equation.
    pub tolerance: f64,
    pub degree_cap: u32,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }
}

/// `K`: the largest integer strictly below `n / 2`.
pub fn branch_index(n: u32) -> u32 {
    n.div_ceil(2) - 1
}

/// `arg z = pi * num / den`.
pub fn critical_angle_fraction(n: u32) -> (u64, u64) {
    let k = u64::from(branch_index(n));
    (1 + 4 * k, 2 * (2 * u64::from(n) + 1))
}

pub fn critical_angle(n: u32) -> f64 {
    let (num, den) = critical_angle_fraction(n);
    std::f64::consts::PI * num as f64 / den as f64
}

/// `(a_n, K)`.
pub fn compute_a(n: u32) -> Result<(f64, u32), ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::InvalidOrder);
    }
    Ok((critical_angle(n).tan() / 2.0, branch_index(n)))
}

/// Nondegeneracy threshold `t_n = 2 sqrt(1/4 + a_n^2)`.
pub fn compute_t(n: u32) -> Result<f64, ConstructionError> {
    let (a, _) = compute_a(n)?;
    Ok(threshold_from_a(a))
}

pub fn threshold_from_a(a: f64) -> f64 {
    2.0 * (0.25 + a * a).sqrt()
}

/// `z = 1/2 + i a_n` in the scalar type `S`.
pub fn critical_point<S: Scalar>(n: u32) -> Result<S, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::InvalidOrder);
    }
    let (num, den) = critical_angle_fraction(n);
    Ok(S::half_line_point(num, den))
}

fn binomial(n: u32, k: u32) -> i128 {
    let k = k.min(n - k);
    (0..k).fold(1i128, |acc, i| acc * i128::from(n - i) / i128::from(i + 1))
}

/// Coefficients `c_j` of `u^j v^(2n-j)` in `(z u - conj(z) v)^(2n)`, `j = 0..=2n`.
pub fn rhs_coefficients<S: Scalar>(n: u32, z: &S) -> Vec<S> {
    let m = 2 * n;
    let zb = z.conj();
    (0..=m)
        .map(|j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            z.powu(j) * zb.powu(m - j) * S::from_integer(sign * binomial(m, j))
        })
        .collect()
}

/// `alpha_1 .. alpha_2n` (index 0 holds `alpha_1`).
pub fn alpha_coefficients<S: Scalar>(n: u32, z: &S, tol: f64) -> Result<Vec<S>, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::InvalidOrder);
    }
    let c = rhs_coefficients(n, z);
    let m = 2 * n;
    let int = |k: u32| S::from_integer(i128::from(k));
    // alpha[k] stores alpha_k; slot 0 is unused.
    let mut alpha = vec![S::zero(); m as usize + 1];
    alpha[1] = -c[m as usize].clone();
    alpha[m as usize] = c[0].clone();

    // Downward: alpha_{2n-j} from alpha_{2n-j+1}, j = 1..n-1.
    for j in 1..n {
        let next = alpha[(m - j + 1) as usize].clone();
        alpha[(m - j) as usize] = (c[j as usize].clone() + next * int(m - j + 1)) / int(j + 1);
    }
    // Upward: alpha_{2n-j+1} from alpha_{2n-j}, j = 2n-1 down to n+1.
    for j in ((n + 1)..m).rev() {
        let prev = alpha[(m - j) as usize].clone();
        alpha[(m - j + 1) as usize] = (prev * int(j + 1) - c[j as usize].clone()) / int(m - j + 1);
    }

    let scale = c.iter().map(Scalar::modulus).fold(0.0, f64::max);
    let leftover =
        (alpha[n as usize].clone() - alpha[(n + 1) as usize].clone()) * int(n + 1) - c[n as usize].clone();
    let residual = leftover.modulus() / scale;
    if !(residual <= tol) {
        return Err(ConstructionError::Inconsistent {
            residual,
            tolerance: tol,
        });
    }
    alpha.remove(0);
    Ok(alpha)
}

/// The data defining `F_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImmersionMap<S = Complex64> {
    pub n: u32,
    pub a: f64,
    pub t_threshold: f64,
    pub k: u32,
    pub alpha: Vec<S>,
    pub p: SparsePoly4<S>,
    pub r: SparsePoly4<S>,
}

pub fn build_immersion(n: u32) -> Result<ImmersionMap, ConstructionError> {
    build_immersion_with::<Complex64>(n, &ConstructionConfig::default())
}

pub fn build_immersion_with<S: Scalar>(
    n: u32,
    cfg: &ConstructionConfig,
) -> Result<ImmersionMap<S>, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::InvalidOrder);
    }
    let degree = 4 * n;
    if degree > cfg.degree_cap {
        return Err(PolyError::DegreeCap {
            degree,
            cap: cfg.degree_cap,
        }
        .into());
    }
    let z: S = critical_point(n)?;
    let alpha = alpha_coefficients(n, &z, cfg.tolerance)?;
    let m = 2 * n;
    let p = SparsePoly4::from_terms(alpha.iter().enumerate().map(|(i, al)| {
        let k = i as u32 + 1;
        (Exponent4::new(m - k, m - k + 1, k - 1, k), al.clone())
    }));
    let u = SparsePoly4::var(Var::W1).mul(&SparsePoly4::var(Var::W2))?;
    let v = SparsePoly4::var(Var::W3).mul(&SparsePoly4::var(Var::W4))?;
    let base = u.scale(&z) - v.scale(&z.conj());
    let r = base.pow_with_cap(m, cfg.degree_cap)?;
    let a = z.to_c64().im;
    Ok(ImmersionMap {
        n,
        a,
        t_threshold: threshold_from_a(a),
        k: branch_index(n),
        alpha,
        p,
        r,
    })
}

impl<S: Scalar> ImmersionMap<S> {
    pub fn critical_point(&self) -> Complex64 {
        Complex64::new(0.5, self.a)
    }

    /// `F_n(w) = (w1, w3, P_n(w))`.
    pub fn image(&self, w: &[S; 4]) -> [S; 3] {
        [w[0].clone(), w[2].clone(), self.p.evaluate(w)]
    }

    /// Relative coefficient residual of `L(P_n) - R_n`.
    pub fn pde_residual(&self) -> f64 {
        self.p.apply_vector_field().relative_residual(&self.r)
    }

    /// `|Re z^(2n+1)| / |z|^(2n+1)`, evaluated in `S`.
    pub fn arg_condition_residual(&self) -> f64 {
        let (num, den) = critical_angle_fraction(self.n);
        let z = S::half_line_point(num, den);
        let w = z.powu(2 * self.n + 1).to_c64();
        w.re.abs() / w.norm()
    }

    /// Relative coefficient distance between `L(P_n)` restricted to the
    /// quadric (as a polynomial in `v = w3 w4`) and `(v - z)^(2n)`.
    pub fn quadric_restriction_residual(&self) -> Result<f64, PolyError> {
        let restricted = self.p.apply_vector_field().to_uv()?.restrict_to_quadric();
        let (num, den) = critical_angle_fraction(self.n);
        let z = S::half_line_point(num, den);
        let expected = UniPoly::power_of_linear(&z, 2 * self.n);
        Ok(restricted.relative_residual(&expected))
    }

    pub fn is_homogeneous(&self) -> bool {
        self.p.homogeneous_degree() == Some(4 * self.n)
    }

    pub fn to_c64(&self) -> ImmersionMap<Complex64> {
        ImmersionMap {
            n: self.n,
            a: self.a,
            t_threshold: self.t_threshold,
            k: self.k,
            alpha: self.alpha.iter().map(Scalar::to_c64).collect(),
            p: self.p.to_c64(),
            r: self.r.to_c64(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    n: u32,
    a: f64,
    t_threshold: f64,
    #[serde(rename = "K")]
    k: u32,
    alpha: Vec<ComplexJson>,
    #[serde(rename = "P")]
    p: SparsePoly4,
    #[serde(rename = "R")]
    r: SparsePoly4,
}

impl Serialize for ImmersionMap<Complex64> {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        MapJson {
            n: self.n,
            a: self.a,
            t_threshold: self.t_threshold,
            k: self.k,
            alpha: self
                .alpha
                .iter()
                .map(|z| ComplexJson { re: z.re, im: z.im })
                .collect(),
            p: self.p.clone(),
            r: self.r.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ImmersionMap<Complex64> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MapJson::deserialize(deserializer)?;
        Ok(Self {
            n: raw.n,
            a: raw.a,
            t_threshold: raw.t_threshold,
            k: raw.k,
            alpha: raw
                .alpha
                .into_iter()
                .map(|z| Complex64::new(z.re, z.im))
                .collect(),
            p: raw.p,
            r: raw.r,
        })
    }
}

/// Checks the defining identities of one map.
pub fn verify_construction<S: Scalar>(m: &ImmersionMap<S>, tol: &Tolerances) -> VerificationReport {
    let n = m.n;
    let mut rep = VerificationReport::new("construction");
    rep.push(
        CheckRecord::at_most(
            format!("pde-residual-n{n}"),
            "w3 dP/dw2 - w1 dP/dw4 = R_n on C^4",
            m.pde_residual(),
            tol.construction,
        )
        .with_witness(json!({ "n": n, "a": m.a, "t_threshold": m.t_threshold })),
    );
    rep.push(CheckRecord::at_most(
        format!("arg-condition-n{n}"),
        "Re (1/2 + i a_n)^(2n+1) = 0",
        m.arg_condition_residual(),
        tol.arg_condition,
    ));
    rep.push(
        CheckRecord::pass_if(
            format!("homogeneity-n{n}"),
            "P_n homogeneous of degree 4n",
            m.is_homogeneous(),
        )
        .with_witness(json!({ "degree": m.p.homogeneous_degree(), "terms": m.p.len() })),
    );
    let restricted = m.quadric_restriction_residual();
    rep.push(match restricted {
        Ok(res) => CheckRecord::at_most(
            format!("quadric-restriction-n{n}"),
            "R_n restricted to the quadric is (v - (1/2 + i a_n))^(2n)",
            res,
            tol.construction,
        ),
        Err(e) => CheckRecord::pass_if(
            format!("quadric-restriction-n{n}"),
            "R_n restricted to the quadric is (v - (1/2 + i a_n))^(2n)",
            false,
        )
        .with_note(e.to_string()),
    });
    rep
}

/// Smallest `n <= n_max` with `t_n > bound`.
pub fn divergence_probe(bound: f64, n_max: u32) -> Option<u32> {
    (1..=n_max).find(|&n| compute_t(n).is_ok_and(|t| t > bound))
}

/// `t_first, t_{first+2}, ..., ` up to index `last`, strictly increasing?
pub fn subsequence_increasing(first: u32, last: u32) -> bool {
    let ts: Vec<f64> = (first..=last)
        .step_by(2)
        .map(|n| compute_t(n).expect("n >= 1"))
        .collect();
    ts.windows(2).all(|w| w[1] > w[0])
}

/// Report records for the threshold sequence as a whole.
pub fn verify_threshold_sequence(bound: f64, n_max: u32) -> VerificationReport {
    let mut rep = VerificationReport::new("construction");
    let hit = divergence_probe(bound, n_max);
    rep.push(
        CheckRecord::pass_if("divergence-probe", "t_n -> infinity", hit.is_some())
            .with_witness(json!({ "bound": bound, "n_max": n_max, "first_n": hit })),
    );
    let odd = subsequence_increasing(1, 21);
    let even = subsequence_increasing(2, 21);
    rep.push(
        CheckRecord::pass_if(
            "threshold-subsequences-increasing",
            "t_n -> infinity",
            odd && even,
        )
        .with_witness(json!({ "odd": odd, "even": even }))
        .with_note("the full sequence t_n is not monotone (t_2 < t_1)"),
    );
    rep
}

/// Witness data for `P_n` in reports.
pub fn map_summary(m: &ImmersionMap) -> serde_json::Value {
    json!({
        "n": m.n,
        "a": m.a,
        "t_threshold": m.t_threshold,
        "K": m.k,
        "alpha": m.alpha.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
    })
}
