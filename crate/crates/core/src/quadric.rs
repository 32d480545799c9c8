//! Points of the quadric `w1 w2 + w3 w4 = 1`, its level sets `M_t`, samplers
//! and the Jacobian nondegeneracy criterion.
//!
//! A level set is parametrized by the product `v = w3 w4` (so `w1 w2 = 1 - v`),
//! the squared modulus `x = |w1|^2`, and two phases. With `y = |w3|^2` the
//! level equation reads
//!
//! ```text
//! x + |1 - v|^2 / x + y + |v|^2 / y = 2t,
//! ```
//!
//! which is solvable exactly when `|v| + |1 - v| <= t`.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map_factory::{build_immersion_with, ConstructionConfig, ConstructionError, ImmersionMap};
use crate::poly::{SparsePoly4, Var};
use crate::scalar::{MpComplex, Scalar};

/// Relative slack for feasibility tests at the boundary of a level region.
const FEAS_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadricError {
    #[error("level t = {0} is below 1; M_t is empty")]
    InfeasibleLevel(f64),
    #[error("no point of M_t with w3 w4 = {v} and |w1|^2 = {x} at t = {t}")]
    Infeasible { v: Complex64, t: f64, x: f64 },
    #[error("t = {t} is below the degeneracy threshold {threshold}")]
    NoWitnessBelowThreshold { t: f64, threshold: f64 },
    #[error("g(x) = x + p/x needs p > 0, got {0}")]
    NonPositive(f64),
}

/// A point of C^4 with its quadric residual and level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadricPoint {
    pub w: [Complex64; 4],
    /// `|w1 w2 + w3 w4 - 1|`.
    pub quadric_residual: f64,
    /// `(|w1|^2 + |w2|^2 + |w3|^2 + |w4|^2) / 2`.
    pub level: f64,
}

impl QuadricPoint {
    pub fn new(w: [Complex64; 4]) -> Self {
        let quadric_residual = (w[0] * w[1] + w[2] * w[3] - 1.0).norm();
        let level = w.iter().map(Complex64::norm_sqr).sum::<f64>() / 2.0;
        Self {
            w,
            quadric_residual,
            level,
        }
    }

    pub fn is_on_quadric(&self, tol: f64) -> bool {
        self.quadric_residual <= tol
    }

    /// `w3 w4`.
    pub fn v(&self) -> Complex64 {
        self.w[2] * self.w[3]
    }

    /// Largest deviation from `w2 = conj w1`, `w4 = conj w3`.
    pub fn sphere_residual(&self) -> f64 {
        (self.w[1] - self.w[0].conj())
            .norm()
            .max((self.w[3] - self.w[2].conj()).norm())
    }

    /// JSON payload used in report witnesses.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "w": self.w.iter().map(|z| crate::report::complex_json(*z)).collect::<Vec<_>>(),
            "quadric_residual": self.quadric_residual,
            "level": self.level,
        })
    }
}

/// `w1 = z1 + i z2, w2 = z1 - i z2, w3 = z3 + i z4, w4 = z3 - i z4`.
pub fn z_to_w(z: &[Complex64; 4]) -> [Complex64; 4] {
    let i = Complex64::i();
    [z[0] + i * z[1], z[0] - i * z[1], z[2] + i * z[3], z[2] - i * z[3]]
}

/// Inverse of [`z_to_w`].
pub fn w_to_z(w: &[Complex64; 4]) -> [Complex64; 4] {
    let i = Complex64::i();
    [
        (w[0] + w[1]) / 2.0,
        (w[0] - w[1]) / (2.0 * i),
        (w[2] + w[3]) / 2.0,
        (w[2] - w[3]) / (2.0 * i),
    ]
}

/// A level `t >= 1`; `t = 1` is the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    t: f64,
}

impl LevelSpec {
    pub fn new(t: f64) -> Result<Self, QuadricError> {
        if t.is_finite() && t >= 1.0 {
            Ok(Self { t })
        } else {
            Err(QuadricError::InfeasibleLevel(t))
        }
    }

    pub fn sphere() -> Self {
        Self { t: 1.0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// `v` is drawn from `{|v| + |1 - v| <= t - feas_margin}`.
    pub feas_margin: f64,
    /// Probability of the stratum `w1 = 0`.
    pub w1_zero_prob: f64,
    /// Probability of the stratum `w3 = 0`.
    pub w3_zero_prob: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            feas_margin: 1e-9,
            w1_zero_prob: 0.05,
            w3_zero_prob: 0.05,
        }
    }
}

impl SamplerConfig {
    /// Only points with `w1 != 0` and `w3 != 0`.
    pub fn generic() -> Self {
        Self {
            w1_zero_prob: 0.0,
            w3_zero_prob: 0.0,
            ..Self::default()
        }
    }
}

/// `count` points of `M_t` with the default sampler.
pub fn sample_level(level: &LevelSpec, count: usize, seed: u64) -> Vec<QuadricPoint> {
    sample_level_with(level, count, seed, &SamplerConfig::default())
}

pub fn sample_level_with(
    level: &LevelSpec,
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Vec<QuadricPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let pick: f64 = rng.gen();
            if pick < cfg.w1_zero_prob {
                sample_axis_stratum(level.t, &mut rng, false)
            } else if pick < cfg.w1_zero_prob + cfg.w3_zero_prob {
                sample_axis_stratum(level.t, &mut rng, true)
            } else {
                sample_generic(level.t, cfg.feas_margin, &mut rng)
            }
        })
        .collect()
}

fn unit_phase(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))
}

/// Larger root of `y + p/y = s`, `p >= 0`.
fn larger_root(s: f64, p: f64) -> f64 {
    let disc = (s * s - 4.0 * p).max(0.0);
    (s + disc.sqrt()) / 2.0
}

/// `w1 = 0` (so `w3 w4 = 1`), or with `swap` the mirror stratum `w3 = 0`.
fn sample_axis_stratum(t: f64, rng: &mut ChaCha8Rng, swap: bool) -> QuadricPoint {
    let q = rng.gen_range(0.0..=(2.0 * t - 2.0).max(0.0));
    let y = larger_root(2.0 * t - q, 1.0);
    let free = unit_phase(rng) * q.sqrt();
    let a = unit_phase(rng) * y.sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let w = if swap {
        [a, 1.0 / a, zero, free]
    } else {
        [zero, free, a, 1.0 / a]
    };
    QuadricPoint::new(w)
}

fn sample_generic(t: f64, margin: f64, rng: &mut ChaCha8Rng) -> QuadricPoint {
    let t_eff = t - margin;
    let v = if t_eff <= 1.0 {
        Complex64::new(rng.gen_range(f64::EPSILON..1.0), 0.0)
    } else {
        let a = t_eff / 2.0;
        let b = (t_eff * t_eff - 1.0).sqrt() / 2.0;
        loop {
            let re = rng.gen_range(-1.0..=1.0);
            let im = rng.gen_range(-1.0..=1.0);
            if re * re + im * im <= 1.0 {
                break Complex64::new(0.5 + a * re, b * im);
            }
        }
    };
    let (lo, hi) = x_interval(v, t);
    let x = loop {
        let x = rng.gen_range(lo..=hi);
        if x > 0.0 {
            break x;
        }
    };
    let th1 = rng.gen_range(0.0..TAU);
    let th3 = rng.gen_range(0.0..TAU);
    lift_unchecked(v, t, x, th1, th3)
}

/// Feasible interval for `|w1|^2` over `v` at level `t`.
fn x_interval(v: Complex64, t: f64) -> (f64, f64) {
    let c = t - v.norm();
    let r1 = (1.0 - v).norm();
    let half = (c * c - r1 * r1).max(0.0).sqrt();
    (c - half, c + half)
}

fn lift_unchecked(v: Complex64, t: f64, x: f64, th1: f64, th3: f64) -> QuadricPoint {
    // y + |v|^2 / y = s with s - 2|v| = (x - lo)(hi - x) / x, written so that
    // the discriminant keeps its accuracy near the edge of the interval.
    let (lo, hi) = x_interval(v, t);
    let e = ((x - lo) * (hi - x) / x).max(0.0);
    let r = v.norm();
    let y = (2.0 * r + e + (e * (e + 4.0 * r)).sqrt()) / 2.0;
    let w1 = Complex64::from_polar(x.sqrt(), th1);
    let w3 = Complex64::from_polar(y.sqrt(), th3);
    QuadricPoint::new([w1, (1.0 - v) / w1, w3, v / w3])
}

/// The point with `w3 w4 = v`, `|w1|^2 = x`, the larger `|w3|^2` and the given
/// phases of `w1` and `w3`.
pub fn lift_from_v(
    v: Complex64,
    level: &LevelSpec,
    x: f64,
    phase1: f64,
    phase3: f64,
) -> Result<QuadricPoint, QuadricError> {
    let t = level.t;
    let err = QuadricError::Infeasible { v, t, x };
    if v.norm() + (1.0 - v).norm() > t * (1.0 + FEAS_SLACK) || !(x > 0.0) {
        return Err(err);
    }
    let (lo, hi) = x_interval(v, t);
    let slack = FEAS_SLACK * t;
    if x < lo - slack || x > hi + slack {
        return Err(err);
    }
    Ok(lift_unchecked(v, t, x, phase1, phase3))
}

/// The partial derivatives entering the criterion, precomputed for repeated
/// evaluation.
#[derive(Clone, Debug)]
pub struct Criterion {
    d2: SparsePoly4,
    d4: SparsePoly4,
}

impl Criterion {
    pub fn new(f: &SparsePoly4) -> Self {
        Self {
            d2: f.partial_derivative(Var::W2),
            d4: f.partial_derivative(Var::W4),
        }
    }

    /// `w3 df/dw2 - w1 df/dw4` at `w`.
    pub fn eval(&self, w: &[Complex64; 4]) -> Complex64 {
        w[2] * self.d2.evaluate(w) - w[0] * self.d4.evaluate(w)
    }

    /// Charts `(w1, w3, w4)` and `(w1, w2, w3)`: the Jacobian determinants of
    /// `(w1, w3, f)` restricted to the quadric, absent where the chart is
    /// undefined.
    pub fn charts(&self, w: &[Complex64; 4]) -> (Option<Complex64>, Option<Complex64>) {
        let f2 = self.d2.evaluate(w);
        let f4 = self.d4.evaluate(w);
        let zero = Complex64::new(0.0, 0.0);
        let j1 = (w[0] != zero).then(|| -(w[2] / w[0]) * f2 + f4);
        let j2 = (w[2] != zero).then(|| -f2 + (w[0] / w[2]) * f4);
        (j1, j2)
    }
}

/// `w3 df/dw2 - w1 df/dw4` at `w`; nonzero iff `(w1, w3, f)` restricted to the
/// quadric is nondegenerate there.
pub fn jacobian_criterion(f: &SparsePoly4, w: &QuadricPoint) -> Complex64 {
    Criterion::new(f).eval(&w.w)
}

pub fn chart_jacobians(f: &SparsePoly4, w: &QuadricPoint) -> (Option<Complex64>, Option<Complex64>) {
    Criterion::new(f).charts(&w.w)
}

/// A point of `M_t` where the criterion for `P_n` vanishes. Exists iff
/// `t >= t_n`.
pub fn degenerate_witness(m: &ImmersionMap, t: f64) -> Result<QuadricPoint, QuadricError> {
    if !(t >= m.t_threshold * (1.0 - FEAS_SLACK)) {
        return Err(QuadricError::NoWitnessBelowThreshold {
            t,
            threshold: m.t_threshold,
        });
    }
    let z = m.critical_point();
    let p = z.norm_sqr();
    let x0 = larger_root(t, p);
    let s = x0.sqrt();
    let s = Complex64::new(s, 0.0);
    Ok(QuadricPoint::new([s, z.conj() / s, s, z / s]))
}

/// The criterion for `P_n` with `P_n` built and evaluated in 256-bit
/// arithmetic. Near a zero of high multiplicity the binary64 evaluation loses
/// most of its digits to cancellation; this one does not.
#[derive(Clone, Debug)]
pub struct ExtendedCriterion {
    lp: SparsePoly4<MpComplex<256>>,
}

impl ExtendedCriterion {
    pub fn new(n: u32) -> Result<Self, ConstructionError> {
        let m = build_immersion_with::<MpComplex<256>>(n, &ConstructionConfig::default())?;
        Ok(Self {
            lp: m.p.apply_vector_field(),
        })
    }

    pub fn eval(&self, w: &[Complex64; 4]) -> Complex64 {
        self.lp.evaluate(&w.map(MpComplex::from_c64)).to_c64()
    }
}

/// `min_{x > 0} (x + p/x)` and its minimizer.
pub fn g_min(p: f64) -> Result<(f64, f64), QuadricError> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(QuadricError::NonPositive(p));
    }
    let r = p.sqrt();
    Ok((2.0 * r, r))
}

/// Distance from `z` to the closed region `{|v| + |1 - v| <= t}`.
pub fn distance_to_level_region(z: Complex64, t: f64) -> f64 {
    if z.norm() + (1.0 - z).norm() <= t {
        return 0.0;
    }
    let a = t / 2.0;
    let b = (t * t - 1.0).max(0.0).sqrt() / 2.0;
    let dist = |th: f64| (Complex64::new(0.5 + a * th.cos(), b * th.sin()) - z).norm();
    const SCAN: usize = 4096;
    let step = TAU / SCAN as f64;
    let best = (0..SCAN)
        .map(|k| k as f64 * step)
        .min_by(|x, y| dist(*x).total_cmp(&dist(*y)))
        .unwrap_or(0.0);
    // Golden-section search on the bracketing cell pair.
    let (mut lo, mut hi) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if dist(m1) < dist(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    dist((lo + hi) / 2.0).min(dist(best))
}

#[derive(Serialize)]
struct PointRow {
    w1_re: f64,
    w1_im: f64,
    w2_re: f64,
    w2_im: f64,
    w3_re: f64,
    w3_im: f64,
    w4_re: f64,
    w4_im: f64,
    quadric_residual: f64,
    level: f64,
}

/// CSV with the real and imaginary part of each coordinate, the quadric
/// residual and the level.
pub fn write_points_csv<W: Write>(points: &[QuadricPoint], out: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(out);
    for p in points {
        let [w1, w2, w3, w4] = p.w;
        wtr.serialize(PointRow {
            w1_re: w1.re,
            w1_im: w1.im,
            w2_re: w2.re,
            w2_im: w2.im,
            w3_re: w3.re,
            w3_im: w3.im,
            w4_re: w4.re,
            w4_im: w4.im,
            quadric_residual: p.quadric_residual,
            level: p.level,
        })?;
    }
    wtr.flush()?;
    Ok(())
}
