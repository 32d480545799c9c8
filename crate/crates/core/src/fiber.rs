//! Fibers of `F_1` and the b-plane geometry behind its injectivity.
//!
//! Two points of the quadric with the same `(w1, w3)` have the same image
//! under `F_1` exactly when `w4` and the other point's `w4` solve a cubic.
//! Besides `w4` itself the cubic has two closed-form roots. Writing
//! `b = w3 w4`, a sibling on the same level as its base forces `b` into the
//! domain `D` and `phi(b) <= t^2`; `phi >= 5/4` on `D` then rules out
//! collisions for `t < sqrt(5)/2`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::Tolerances;
use crate::map_factory::ImmersionMap;
use crate::poly::UniPoly;
use crate::quadric::{sample_level_with, LevelSpec, QuadricPoint, SamplerConfig};
use crate::report::{complex_json, CheckRecord, VerificationReport};
use crate::roots::{match_roots, newton_polish};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `(1 + i sqrt 3) / 2`.
pub fn omega() -> Complex64 {
    Complex64::new(0.5, SQRT3 / 2.0)
}

/// `1/2 + i / (2 sqrt 3)`, the critical product for `n = 1`.
pub fn kappa() -> Complex64 {
    Complex64::new(0.5, 0.5 / SQRT3)
}

/// `kappa^2 = 1/6 + i / (2 sqrt 3)`.
pub fn mu() -> Complex64 {
    Complex64::new(1.0 / 6.0, 0.5 / SQRT3)
}

/// `sqrt(5) / 2`.
pub fn sum_bound() -> f64 {
    5f64.sqrt() / 2.0
}

/// `(5 + i sqrt 3) / 8`, where `phi` attains 5/4.
pub fn phi_argmin() -> Complex64 {
    Complex64::new(5.0 / 8.0, SQRT3 / 8.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error("w1 = 0 or w3 = 0: the fiber is a single point")]
    StratumExcluded,
    #[error("phi is singular at b = {0}")]
    SingularLocus(Complex64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

/// `D = E1 ∩ E2`, with `E1` the ellipse with foci 0, 1 and `E2` the ellipse
/// with foci 1, omega, both with focal sum `sqrt(5)/2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllipseDomain {
    pub foci1: [Complex64; 2],
    pub foci2: [Complex64; 2],
    pub sum_bound: f64,
    /// Points within this distance of either focal sum bound are boundary.
    pub margin: f64,
}

impl Default for EllipseDomain {
    fn default() -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            foci1: [Complex64::new(0.0, 0.0), one],
            foci2: [one, omega()],
            sum_bound: sum_bound(),
            margin: 1e-12,
        }
    }
}

impl EllipseDomain {
    /// Bounding box `[re_min, re_max] x [im_min, im_max]` used for scans.
    pub const BOX: [f64; 4] = [-0.2, 1.2, -0.1, 1.0];

    pub fn focal_sums(&self, b: Complex64) -> (f64, f64) {
        let s1 = (b - self.foci1[0]).norm() + (b - self.foci1[1]).norm();
        let s2 = (b - self.foci2[0]).norm() + (b - self.foci2[1]).norm();
        (s1, s2)
    }

    /// Strict membership in the open domain.
    pub fn contains(&self, b: Complex64) -> bool {
        let (s1, s2) = self.focal_sums(b);
        s1 < self.sum_bound && s2 < self.sum_bound
    }

    pub fn classify(&self, b: Complex64) -> Membership {
        let (s1, s2) = self.focal_sums(b);
        let worst = s1.max(s2);
        if worst < self.sum_bound - self.margin {
            Membership::Inside
        } else if worst <= self.sum_bound + self.margin {
            Membership::Boundary
        } else {
            Membership::Outside
        }
    }
}

fn generic_coords(w: &QuadricPoint) -> Result<(Complex64, Complex64, Complex64), FiberError> {
    let [w1, _, w3, w4] = w.w;
    if w1.norm() == 0.0 || w3.norm() == 0.0 {
        return Err(FiberError::StratumExcluded);
    }
    Ok((w1, w3, w4))
}

/// The two closed-form values of `w4` completing a sibling of `w`.
pub fn sibling_w4_candidates(w: &QuadricPoint) -> Result<[Complex64; 2], FiberError> {
    let (_, w3, w4) = generic_coords(w)?;
    let b = w3 * w4;
    let one = Complex64::new(1.0, 0.0);
    let c1 = -(one + Complex64::new(0.0, SQRT3)) * (b - one) / (2.0 * w3);
    let c2 = -(one - Complex64::new(0.0, SQRT3)) * (b - omega()) / (2.0 * w3);
    Ok([c1, c2])
}

/// Coefficients `(A, B, C)` of the quadratic factor of the fiber cubic.
fn bracket_coeffs(w3: Complex64, w4: Complex64) -> (Complex64, Complex64, Complex64) {
    let a = -w3 * w3 / 3.0;
    let b = kappa() * w3 - w3 * w3 * w4 / 3.0;
    let c = kappa() * w3 * w4 - w3 * w3 * w4 * w4 / 3.0 - mu();
    (a, b, c)
}

/// The quadratic factor `A x^2 + B x + C` at `x`.
pub fn fiber_bracket(w: &QuadricPoint, x: Complex64) -> Result<Complex64, FiberError> {
    let (_, w3, w4) = generic_coords(w)?;
    let (a, b, c) = bracket_coeffs(w3, w4);
    Ok((a * x + b) * x + c)
}

/// `(x - w4)(A x^2 + B x + C)`, whose roots are the `w4` values of the fiber.
pub fn fiber_cubic(w: &QuadricPoint) -> Result<UniPoly, FiberError> {
    let (_, w3, w4) = generic_coords(w)?;
    let (a, b, c) = bracket_coeffs(w3, w4);
    Ok(UniPoly::new(vec![-w4 * c, c - w4 * b, b - w4 * a, a]))
}

/// `(w1, (1 - w3 w4_hat) / w1, w3, w4_hat)`.
pub fn complete_sibling(w: &QuadricPoint, w4_hat: Complex64) -> Result<QuadricPoint, FiberError> {
    let [w1, _, w3, _] = w.w;
    if w1.norm() == 0.0 {
        return Err(FiberError::StratumExcluded);
    }
    Ok(QuadricPoint::new([w1, (1.0 - w3 * w4_hat) / w1, w3, w4_hat]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    First,
    Second,
}

/// `w3 w4_hat` in terms of `b = w3 w4` for either sibling.
pub fn sibling_b_map(b: Complex64, branch: Branch) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let i_sqrt3 = Complex64::new(0.0, SQRT3);
    match branch {
        Branch::First => -(one + i_sqrt3) * (b - one) / 2.0,
        Branch::Second => one - (one - i_sqrt3) * b / 2.0,
    }
}

/// A base point together with its completed siblings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberResult {
    pub base: QuadricPoint,
    pub siblings: Vec<QuadricPoint>,
    pub sibling_levels: Vec<f64>,
    /// Each sibling differs from the base.
    pub distinct_from_base: Vec<bool>,
    /// The two siblings differ from each other.
    pub siblings_distinct: bool,
}

/// Both siblings of a generic point; `tol` is the relative distinctness
/// threshold on `w4`.
pub fn fiber_of(w: &QuadricPoint, tol: f64) -> Result<FiberResult, FiberError> {
    let cands = sibling_w4_candidates(w)?;
    let siblings = cands
        .iter()
        .map(|c| complete_sibling(w, *c))
        .collect::<Result<Vec<_>, _>>()?;
    let apart = |a: Complex64, b: Complex64| (a - b).norm() > tol * a.norm().max(b.norm()).max(1.0);
    Ok(FiberResult {
        base: *w,
        sibling_levels: siblings.iter().map(|s| s.level).collect(),
        distinct_from_base: cands.iter().map(|c| apart(*c, w.w[3])).collect(),
        siblings_distinct: apart(cands[0], cands[1]),
        siblings,
    })
}

/// Worst-case fiber statistics over a batch of generic points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberStats {
    pub points: usize,
    /// Largest relative distance between oracle roots and closed forms.
    pub max_root_mismatch: f64,
    /// Smallest relative pairwise distance among the three `w4` values.
    pub min_separation: f64,
    /// Largest `|P(base) - P(sibling)| / (1 + |P(base)|)`.
    pub max_value_residual: f64,
    /// Largest quadric residual of a completed sibling.
    pub max_sibling_residual: f64,
}

pub fn fiber_stats(p1: &ImmersionMap, points: &[QuadricPoint]) -> Result<FiberStats, FiberError> {
    let per_point = points
        .par_iter()
        .map(|w| -> Result<[f64; 4], FiberError> {
            let cands = sibling_w4_candidates(w)?;
            let expected = [w.w[3], cands[0], cands[1]];
            let found = cubic_oracle_roots(w)?;
            let mismatch = match_roots(&found, &expected);
            let mut sep = f64::INFINITY;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let scale = expected[i].norm().max(expected[j].norm()).max(1.0);
                    sep = sep.min((expected[i] - expected[j]).norm() / scale);
                }
            }
            let base_val = p1.p.evaluate(&w.w);
            let mut val_res: f64 = 0.0;
            let mut q_res: f64 = 0.0;
            for c in cands {
                let s = complete_sibling(w, c)?;
                val_res = val_res.max((p1.p.evaluate(&s.w) - base_val).norm() / (1.0 + base_val.norm()));
                q_res = q_res.max(s.quadric_residual);
            }
            Ok([mismatch, sep, val_res, q_res])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let fold = |k: usize, init: f64, f: fn(f64, f64) -> f64| per_point.iter().map(|r| r[k]).fold(init, f);
    Ok(FiberStats {
        points: points.len(),
        max_root_mismatch: fold(0, 0.0, f64::max),
        min_separation: fold(1, f64::INFINITY, f64::min),
        max_value_residual: fold(2, 0.0, f64::max),
        max_sibling_residual: fold(3, 0.0, f64::max),
    })
}

/// `(b1 - sqrt3 b2) / (2 b1 - 1)`, the ratio `|w1|^2 / |w3|^2` forced on a
/// same-level sibling pair.
pub fn modulus_ratio(b: Complex64) -> Result<f64, FiberError> {
    let num = b.re - SQRT3 * b.im;
    let den = 2.0 * b.re - 1.0;
    if den.abs() < 1e-14 || num.abs() < 1e-14 {
        return Err(FiberError::SingularLocus(b));
    }
    Ok(num / den)
}

/// `phi(b) = (r + 1)(|b - 1|^2 / r + |b|^2)` with `r` from [`modulus_ratio`].
pub fn phi(b: Complex64) -> Result<f64, FiberError> {
    let r = modulus_ratio(b)?;
    Ok((r + 1.0) * ((b - 1.0).norm_sqr() / r + b.norm_sqr()))
}

/// Open parameter interval of the segment `L ∩ D`.
pub fn sigma_range() -> (f64, f64) {
    let s15 = 15f64.sqrt();
    (-1.0 / (s15 + 3.0), 1.0 / (s15 - 3.0))
}

pub fn sigma_in_range(sigma: f64) -> bool {
    let (lo, hi) = sigma_range();
    lo < sigma && sigma < hi
}

/// Point of the line `L`: `(-3 + i sqrt 3) sigma / 8 + 1`.
pub fn line_point(sigma: f64) -> Complex64 {
    Complex64::new(-3.0, SQRT3) * (sigma / 8.0) + 1.0
}

/// Point of the line through `line_point(sigma0)` orthogonal to `L`.
pub fn orth_point(sigma0: f64, tau: f64) -> Complex64 {
    omega() * tau + line_point(sigma0)
}

/// `phi` along `L`, with a flag telling whether `sigma` is inside the
/// parameter range.
pub fn phi_hat(sigma: f64) -> (f64, bool) {
    (
        (3.0 * sigma * sigma - 6.0 * sigma + 8.0) / 4.0,
        sigma_in_range(sigma),
    )
}

fn orth_denominator(sigma0: f64, tau: f64) -> f64 {
    let a = 4.0 - 3.0 * sigma0;
    a * a - 16.0 * tau * tau
}

/// `phi` along the orthogonal line through `line_point(sigma0)`.
pub fn phi_hat_orth(sigma0: f64, tau: f64) -> Result<f64, FiberError> {
    let den = orth_denominator(sigma0, tau);
    if den.abs() < 1e-14 {
        return Err(FiberError::SingularLocus(orth_point(sigma0, tau)));
    }
    let s = sigma0;
    let num =
        (4.0 - 3.0 * s) * ((32.0 - 48.0 * s) * tau * tau - 9.0 * s.powi(3) + 30.0 * s * s - 48.0 * s + 32.0);
    Ok(num / (4.0 * den))
}

/// `d/dtau phi_hat_orth = 32 (4 - 3 sigma0) h(sigma0) tau / den^2`.
pub fn phi_hat_orth_dtau(sigma0: f64, tau: f64) -> Result<f64, FiberError> {
    let den = orth_denominator(sigma0, tau);
    if den.abs() < 1e-14 {
        return Err(FiberError::SingularLocus(orth_point(sigma0, tau)));
    }
    Ok(32.0 * (4.0 - 3.0 * sigma0) * h_poly(sigma0) * tau / (den * den))
}

/// `h(sigma) = -9 sigma^3 + 30 sigma^2 - 36 sigma + 16`.
pub fn h_poly(sigma: f64) -> f64 {
    ((-9.0 * sigma + 30.0) * sigma - 36.0) * sigma + 16.0
}

pub fn h_prime(sigma: f64) -> f64 {
    (-27.0 * sigma + 60.0) * sigma - 36.0
}

/// `(45 - 11 sqrt 15) / 4`, the value of `h` at the right end of the range.
pub fn h_right_endpoint() -> f64 {
    (45.0 - 11.0 * 15f64.sqrt()) / 4.0
}

/// Minimum of `h` over `steps + 1` equally spaced points of the closed range,
/// and where it is attained.
pub fn h_min_on_range(steps: usize) -> (f64, f64) {
    let (lo, hi) = sigma_range();
    (0..=steps)
        .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
        .map(|s| (h_poly(s), s))
        .fold((f64::INFINITY, lo), |acc, x| if x.0 < acc.0 { x } else { acc })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiMinimum {
    pub min: f64,
    pub argmin: Complex64,
    /// Grid cells strictly inside `D`.
    pub cells_inside: usize,
}

fn grid_coord(k: usize, n: usize, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * k as f64 / (n - 1) as f64
}

fn grid_point(i: usize, j: usize, n: usize) -> Complex64 {
    let [x0, x1, y0, y1] = EllipseDomain::BOX;
    Complex64::new(grid_coord(i, n, x0, x1), grid_coord(j, n, y0, y1))
}

/// Smallest `phi` over interior grid cells satisfying `keep`; ties go to the
/// lowest `(row, column)` index.
fn grid_min(
    domain: &EllipseDomain,
    n: usize,
    keep: impl Fn(Complex64) -> bool + Sync,
) -> Option<(f64, Complex64, usize)> {
    type RowMin = (Option<(f64, usize, usize)>, usize);
    let rows: Vec<RowMin> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut best: Option<(f64, usize, usize)> = None;
            let mut count = 0;
            for i in 0..n {
                let b = grid_point(i, j, n);
                if domain.classify(b) != Membership::Inside || !keep(b) {
                    continue;
                }
                let Ok(val) = phi(b) else { continue };
                count += 1;
                if best.is_none_or(|(v, _, _)| val < v) {
                    best = Some((val, j, i));
                }
            }
            (best, count)
        })
        .collect();
    let count = rows.iter().map(|r| r.1).sum();
    let best = rows
        .into_iter()
        .filter_map(|r| r.0)
        .min_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))))?;
    Some((best.0, grid_point(best.2, best.1, n), count))
}

/// Grid search of `phi` over `D` followed by coordinate-wise parabolic
/// refinement.
pub fn min_phi_over_d(grid: usize, refine_iters: usize) -> Option<PhiMinimum> {
    let grid = grid.max(101);
    let domain = EllipseDomain::default();
    let (mut best, mut at, cells_inside) = grid_min(&domain, grid, |_| true)?;
    let [x0, x1, _, _] = EllipseDomain::BOX;
    let mut h = (x1 - x0) / (grid - 1) as f64;
    let eval = |b: Complex64| {
        if domain.classify(b) == Membership::Inside {
            phi(b).ok()
        } else {
            None
        }
    };
    for _ in 0..refine_iters {
        for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            let (Some(fm), Some(fp)) = (eval(at - dir * h), eval(at + dir * h)) else {
                continue;
            };
            let curv = fp - 2.0 * best + fm;
            if curv <= 0.0 {
                continue;
            }
            let step = (h * (fm - fp) / (2.0 * curv)).clamp(-h, h);
            let cand = at + dir * step;
            if let Some(val) = eval(cand) {
                if val < best {
                    best = val;
                    at = cand;
                }
            }
        }
        h = (h * 0.5).max(1e-7);
    }
    Some(PhiMinimum {
        min: best,
        argmin: at,
        cells_inside,
    })
}

/// Grid minimum of `phi` over `D` with the open disc `|b - center| < radius`
/// removed.
pub fn min_phi_excluding(grid: usize, center: Complex64, radius: f64) -> Option<(f64, Complex64)> {
    let domain = EllipseDomain::default();
    grid_min(&domain, grid.max(101), |b| (b - center).norm() >= radius).map(|(m, b, _)| (m, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Phi,
    Domain,
}

/// Grid export over the bounding box of `D`: `b_re, b_im, in_D` and, for
/// [`GridKind::Phi`], the value of `phi` on interior cells (empty elsewhere).
pub fn write_grid_csv<W: Write>(kind: GridKind, resolution: usize, out: W) -> Result<(), csv::Error> {
    let n = resolution.max(2);
    let domain = EllipseDomain::default();
    let mut wtr = csv::Writer::from_writer(out);
    match kind {
        GridKind::Phi => wtr.write_record(["b_re", "b_im", "in_D", "phi"])?,
        GridKind::Domain => wtr.write_record(["b_re", "b_im", "in_D"])?,
    }
    for j in 0..n {
        let rows: Vec<Vec<String>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let b = grid_point(i, j, n);
                let inside = domain.classify(b) == Membership::Inside;
                let mut row = vec![b.re.to_string(), b.im.to_string(), u8::from(inside).to_string()];
                if kind == GridKind::Phi {
                    let val = if inside { phi(b).ok() } else { None };
                    row.push(val.map(|v| v.to_string()).unwrap_or_default());
                }
                row
            })
            .collect();
        for row in rows {
            wtr.write_record(&row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// A base point on `M_t` with product `b` whose first sibling also lies on
/// `M_t`, built from `|w1|^2 = r |w3|^2`. Returns `None` when `phi(b) > t^2`
/// or `r <= 0`.
pub fn construct_collision(b: Complex64, t: f64) -> Option<(QuadricPoint, QuadricPoint)> {
    let r = modulus_ratio(b).ok()?;
    if r <= 0.0 {
        return None;
    }
    let a = r + 1.0;
    let bb = (b - 1.0).norm_sqr() / r + b.norm_sqr();
    // a y + bb / y = 2t
    let disc = t * t - a * bb;
    if disc < -1e-12 * t * t {
        return None;
    }
    let y = (t + disc.max(0.0).sqrt()) / a;
    let x = r * y;
    let w1 = Complex64::new(x.sqrt(), 0.0);
    let w3 = Complex64::new(y.sqrt(), 0.0);
    let base = QuadricPoint::new([w1, (1.0 - b) / w1, w3, b / w3]);
    let [c1, _] = sibling_w4_candidates(&base).ok()?;
    let sib = complete_sibling(&base, c1).ok()?;
    Some((base, sib))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InjectivityStats {
    pub t: f64,
    pub samples: usize,
    /// Smallest `|t_hat - t|` over both siblings of every sample.
    pub min_gap: f64,
    /// Sample attaining `min_gap`.
    pub witness: Option<QuadricPoint>,
}

/// Level gaps of the siblings of generic samples on `M_t`.
pub fn injectivity_stats(t: f64, samples: usize, seed: u64) -> Result<InjectivityStats, FiberError> {
    let level = LevelSpec::new(t).map_err(|_| FiberError::StratumExcluded)?;
    let pts = sample_level_with(&level, samples, seed, &SamplerConfig::generic());
    let gaps = pts
        .par_iter()
        .map(|w| {
            let f = fiber_of(w, 0.0)?;
            Ok(f.sibling_levels
                .iter()
                .map(|l| (l - t).abs())
                .fold(f64::INFINITY, f64::min))
        })
        .collect::<Result<Vec<f64>, FiberError>>()?;
    let (idx, min_gap) = gaps
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .unwrap_or((0, f64::INFINITY));
    Ok(InjectivityStats {
        t,
        samples,
        min_gap,
        witness: pts.get(idx).copied(),
    })
}

/// Sibling level gaps at level `t` for `F_1`, and for `t >= sqrt 2` the explicit
/// collision pair.
pub fn injectivity_scan(
    m: &ImmersionMap,
    t: f64,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> VerificationReport {
    let mut rep = VerificationReport::new("fibers");
    let id = format!("injectivity-t{t}");
    if m.n != 1 {
        rep.push(
            CheckRecord::new(id, "plumbing", crate::report::Status::Skip)
                .with_note("closed-form fibers exist only for n = 1"),
        );
        return rep;
    }
    match injectivity_stats(t, samples, seed) {
        Ok(stats) => {
            let witness = json!({
                "t": t,
                "samples": samples,
                "min_gap_point": stats.witness.map(|p| p.to_json()),
            });
            if t < sum_bound() {
                rep.push(
                    CheckRecord::at_least(
                        id,
                        "no sibling of a point of M_t lies on M_t for t < sqrt(5)/2",
                        stats.min_gap,
                        tol.level_gap,
                    )
                    .with_witness(witness),
                );
            } else {
                let mut r = CheckRecord::new(
                    id,
                    "sibling level gaps above sqrt(5)/2",
                    crate::report::Status::Pass,
                )
                .with_witness(witness)
                .with_note("informational: injectivity is not claimed at this level");
                r.observed = Some(stats.min_gap);
                rep.push(r);
            }
        }
        Err(e) => rep.push(CheckRecord::pass_if(id, "plumbing", false).with_note(e.to_string())),
    }
    if t >= std::f64::consts::SQRT_2 {
        rep.records
            .extend(crate::reference::collision_record(m, t, tol).records);
    }
    rep
}

/// Root oracle for one point: companion roots of the cubic, polished once.
pub fn cubic_oracle_roots(w: &QuadricPoint) -> Result<Vec<Complex64>, FiberError> {
    let cubic = fiber_cubic(w)?;
    Ok(crate::roots::companion_roots(&cubic)
        .into_iter()
        .map(|r| newton_polish(&cubic, r, 1))
        .collect())
}

/// Report entry data for `phi`'s minimizer.
pub fn phi_minimum_json(m: &PhiMinimum) -> serde_json::Value {
    json!({
        "min": m.min,
        "argmin": complex_json(m.argmin),
        "cells_inside": m.cells_inside,
    })
}
