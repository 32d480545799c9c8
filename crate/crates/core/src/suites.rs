//! Verification suites and parameter sweeps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, Tolerances};
use crate::fiber::{
    fiber_stats, h_min_on_range, h_poly, h_prime, h_right_endpoint, injectivity_scan, line_point,
    min_phi_excluding, min_phi_over_d, orth_point, phi, phi_argmin, phi_hat, phi_hat_orth, phi_hat_orth_dtau,
    phi_minimum_json, sigma_range, sum_bound, EllipseDomain,
};
use crate::map_factory::{build_immersion, verify_construction, verify_threshold_sequence, ImmersionMap};
use crate::quadric::{
    degenerate_witness, distance_to_level_region, sample_level, sample_level_with, Criterion,
    ExtendedCriterion, LevelSpec, QuadricError, SamplerConfig,
};
use crate::reference::{
    collision_record, degeneracy_root_profile, p1_source, p1_source_as_printed, p_hat, provenance_pipeline,
};
use crate::report::{complex_json, CheckRecord, Status, VerificationReport};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Construction,
    Nondegeneracy,
    Fibers,
    Phi,
    Witnesses,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Construction,
        Suite::Nondegeneracy,
        Suite::Fibers,
        Suite::Phi,
        Suite::Witnesses,
        Suite::All,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Construction => "construction",
            Suite::Nondegeneracy => "nondegeneracy",
            Suite::Fibers => "fibers",
            Suite::Phi => "phi",
            Suite::Witnesses => "witnesses",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// Runs a suite and stamps the config echo and wall time.
pub fn run_suite(suite: Suite, cfg: &RunConfig) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new(suite.as_str());
    let parts: Vec<Suite> = match suite {
        Suite::All => vec![
            Suite::Construction,
            Suite::Nondegeneracy,
            Suite::Fibers,
            Suite::Phi,
            Suite::Witnesses,
        ],
        s => vec![s],
    };
    for part in parts {
        let sub = match part {
            Suite::Construction => construction_suite(cfg),
            Suite::Nondegeneracy => nondegeneracy_suite(cfg),
            Suite::Fibers => fibers_suite(cfg),
            Suite::Phi => phi_suite(cfg),
            Suite::Witnesses => witnesses_suite(cfg),
            Suite::All => unreachable!(),
        };
        rep.extend(sub);
    }
    rep.config = serde_json::to_value(cfg).expect("config is serializable");
    rep.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

fn build_or_record(n: u32, rep: &mut VerificationReport) -> Option<ImmersionMap> {
    match build_immersion(n) {
        Ok(m) => Some(m),
        Err(e) => {
            rep.push(CheckRecord::pass_if(format!("build-n{n}"), "plumbing", false).with_note(e.to_string()));
            None
        }
    }
}

pub fn construction_suite(cfg: &RunConfig) -> VerificationReport {
    let tol = &cfg.tolerances;
    let mut rep = VerificationReport::new("construction");
    let maps: Vec<(u32, Result<ImmersionMap, String>)> = (1..=cfg.n_max)
        .into_par_iter()
        .map(|n| (n, build_immersion(n).map_err(|e| e.to_string())))
        .collect();
    for (n, m) in &maps {
        match m {
            Ok(m) => rep.extend(verify_construction(m, tol)),
            Err(e) => rep.push(CheckRecord::pass_if(format!("build-n{n}"), "plumbing", false).with_note(e)),
        }
    }

    if let Some((_, Ok(m1))) = maps.first() {
        let s3 = 3f64.sqrt();
        let anchor_a = 1.0 / (2.0 * s3);
        let anchor_t = 2.0 / s3;
        rep.push(CheckRecord::at_most(
            "a1-closed-form",
            "a_1 = 1/(2 sqrt 3)",
            (m1.a - anchor_a).abs(),
            1e-12,
        ));
        rep.push(CheckRecord::at_most(
            "t1-closed-form",
            "t_1 = 2/sqrt 3",
            (m1.t_threshold - anchor_t).abs(),
            1e-12,
        ));
        let alpha = [
            Complex64::new(-1.0 / 6.0, -0.5 / s3),
            Complex64::new(1.0 / 6.0, -0.5 / s3),
        ];
        let err = m1
            .alpha
            .iter()
            .zip(alpha)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        rep.push(
            CheckRecord::at_most(
                "alpha-n1-closed-form",
                "P_1 = -(1/6 + i/(2 sqrt 3)) w1 w2^2 w4 + (1/6 - i/(2 sqrt 3)) w2 w3 w4^2",
                err,
                1e-12,
            )
            .with_witness(json!({ "alpha": m1.alpha.iter().map(|z| complex_json(*z)).collect::<Vec<_>>() })),
        );
        rep.push(CheckRecord::at_most(
            "pde-residual-n1-exact",
            "w3 dP/dw2 - w1 dP/dw4 = R_n on C^4",
            m1.pde_residual(),
            1e-14,
        ));
    }

    // The argument condition needs only z, so it runs well past n_max.
    let worst = (1..=20u32)
        .map(|n| {
            let (num, den) = crate::map_factory::critical_angle_fraction(n);
            let z = Complex64::half_line_point(num, den);
            let p = z.powu(2 * n + 1);
            (p.re.abs() / p.norm(), n)
        })
        .fold((0.0, 0), |a, x| if x.0 > a.0 { x } else { a });
    rep.push(
        CheckRecord::at_most(
            "arg-condition-n1-20",
            "Re (1/2 + i a_n)^(2n+1) = 0",
            worst.0,
            tol.arg_condition,
        )
        .with_witness(json!({ "worst_n": worst.1 })),
    );
    rep.extend(verify_threshold_sequence(10.0, 40));
    rep
}

/// Smallest `|criterion|` over `points`, and the point attaining it.
fn min_criterion(crit: &Criterion, points: &[crate::quadric::QuadricPoint]) -> (f64, usize) {
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| (crit.eval(&p.w).norm(), i))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .unwrap_or((f64::INFINITY, 0))
}

fn nondegeneracy_for(n: u32, cfg: &RunConfig) -> VerificationReport {
    let tol = &cfg.tolerances;
    let mut rep = VerificationReport::new("nondegeneracy");
    let Some(m) = build_or_record(n, &mut rep) else {
        return rep;
    };
    let crit = Criterion::new(&m.p);
    let z = m.critical_point();

    let t = (1.0 + m.t_threshold) / 2.0;
    let pts = sample_level(
        &LevelSpec::new(t).expect("t > 1"),
        cfg.samples,
        cfg.seed.wrapping_add(n as u64),
    );
    let (min, at) = min_criterion(&crit, &pts);
    let d = distance_to_level_region(z, t);
    let bound = d.powi(2 * n as i32) * (1.0 - tol.margin_factor);
    rep.push(
        CheckRecord::at_least(
            format!("criterion-below-threshold-n{n}"),
            "w3 dP_n/dw2 - w1 dP_n/dw4 has no zero on M_t for 1 < t < t_n",
            min,
            bound,
        )
        .with_witness(json!({ "t": t, "distance": d, "samples": pts.len(), "argmin": pts[at].to_json() })),
    );

    let sphere = sample_level(
        &LevelSpec::sphere(),
        cfg.samples,
        cfg.seed.wrapping_add(100 + n as u64),
    );
    let (min, at) = min_criterion(&crit, &sphere);
    rep.push(
        CheckRecord::at_least(
            format!("criterion-on-sphere-n{n}"),
            "the criterion does not vanish on the sphere",
            min,
            m.a.powi(2 * n as i32) * (1.0 - tol.margin_factor),
        )
        .with_witness(json!({ "samples": sphere.len(), "argmin": sphere[at].to_json() })),
    );

    match (degenerate_witness(&m, m.t_threshold), ExtendedCriterion::new(n)) {
        (Ok(w), Ok(ext)) => rep.push(
            CheckRecord::at_most(
                format!("degenerate-witness-n{n}"),
                "F_n degenerates at some point of M_t for t = t_n",
                ext.eval(&w.w).norm(),
                tol.witness_criterion,
            )
            .with_witness(json!({ "point": w.to_json(), "binary64_criterion": crit.eval(&w.w).norm() })),
        ),
        (Err(e), _) => rep.push(
            CheckRecord::pass_if(format!("degenerate-witness-n{n}"), "plumbing", false)
                .with_note(e.to_string()),
        ),
        (_, Err(e)) => rep.push(
            CheckRecord::pass_if(format!("degenerate-witness-n{n}"), "plumbing", false)
                .with_note(e.to_string()),
        ),
    }
    rep.push(CheckRecord::pass_if(
        format!("no-witness-below-threshold-n{n}"),
        "F_n is nondegenerate on M_t for 1 < t < t_n",
        matches!(
            degenerate_witness(&m, t),
            Err(QuadricError::NoWitnessBelowThreshold { .. })
        ),
    ));
    rep
}

pub fn nondegeneracy_suite(cfg: &RunConfig) -> VerificationReport {
    let parts: Vec<VerificationReport> = (1..=cfg.nondegeneracy_n_max)
        .into_par_iter()
        .map(|n| nondegeneracy_for(n, cfg))
        .collect();
    let mut rep = VerificationReport::new("nondegeneracy");
    for p in parts {
        rep.extend(p);
    }
    rep
}

pub fn fibers_suite(cfg: &RunConfig) -> VerificationReport {
    let tol = &cfg.tolerances;
    let mut rep = VerificationReport::new("fibers");
    let Some(m1) = build_or_record(1, &mut rep) else {
        return rep;
    };
    for (k, t) in [1.05, 1.10].into_iter().enumerate() {
        let pts = sample_level_with(
            &LevelSpec::new(t).expect("t > 1"),
            cfg.fiber_samples,
            cfg.seed.wrapping_add(200 + k as u64),
            &SamplerConfig::generic(),
        );
        match fiber_stats(&m1, &pts) {
            Ok(s) => {
                let anchor = "the fiber of F_1 through a point of M_t consists of at most three points";
                let wit = json!({ "t": t, "samples": s.points });
                rep.push(
                    CheckRecord::at_most(
                        format!("fiber-roots-t{t}"),
                        anchor,
                        s.max_root_mismatch,
                        tol.fiber_roots,
                    )
                    .with_witness(wit.clone()),
                );
                rep.push(
                    CheckRecord::at_least(
                        format!("fiber-distinct-t{t}"),
                        "for t < t_1 the three w4 values of a fiber are pairwise distinct",
                        s.min_separation,
                        tol.fiber_roots,
                    )
                    .with_witness(wit.clone()),
                );
                rep.push(
                    CheckRecord::at_most(
                        format!("fiber-values-t{t}"),
                        "P_1 takes equal values on a fiber",
                        s.max_value_residual,
                        tol.fiber_value,
                    )
                    .with_witness(wit.clone()),
                );
                rep.push(
                    CheckRecord::at_most(
                        format!("fiber-on-quadric-t{t}"),
                        "completed siblings lie on the quadric",
                        s.max_sibling_residual,
                        tol.quadric,
                    )
                    .with_witness(wit),
                );
            }
            Err(e) => rep.push(
                CheckRecord::pass_if(format!("fiber-roots-t{t}"), "plumbing", false).with_note(e.to_string()),
            ),
        }
    }
    let scans: Vec<VerificationReport> = cfg
        .injectivity_levels
        .par_iter()
        .enumerate()
        .map(|(k, t)| {
            injectivity_scan(
                &m1,
                *t,
                cfg.fiber_samples,
                cfg.seed.wrapping_add(300 + k as u64),
                tol,
            )
        })
        .collect();
    for s in scans {
        rep.extend(s);
    }
    let mut r = CheckRecord::at_least(
        "sum-bound-below-t1",
        "sqrt(5)/2 < t_1",
        m1.t_threshold - sum_bound(),
        0.0,
    );
    r.witness = json!({ "sqrt5_over_2": sum_bound(), "t1": m1.t_threshold });
    rep.push(r);
    rep
}

pub fn phi_suite(cfg: &RunConfig) -> VerificationReport {
    let tol = &cfg.tolerances;
    let mut rep = VerificationReport::new("phi");
    let anchor = "phi(b) >= 5/4 for all b in D";
    match min_phi_over_d(cfg.grid_resolution, cfg.refine_iters) {
        Some(m) => {
            rep.push(
                CheckRecord::at_most("phi-min", anchor, (m.min - 1.25).abs(), tol.phi_min)
                    .with_witness(phi_minimum_json(&m)),
            );
            rep.push(CheckRecord::at_least(
                "phi-min-lower-bound",
                anchor,
                m.min,
                1.25 - tol.phi_min,
            ));
            rep.push(
                CheckRecord::at_most(
                    "phi-argmin",
                    "phi attains 5/4 at (5 + i sqrt 3)/8",
                    (m.argmin - phi_argmin()).norm(),
                    tol.phi_argmin,
                )
                .with_witness(
                    json!({ "argmin": complex_json(m.argmin), "expected": complex_json(phi_argmin()) }),
                ),
            );
        }
        None => rep.push(CheckRecord::pass_if("phi-min", anchor, false).with_note("no interior grid cell")),
    }
    if let Some((m, at)) = min_phi_excluding(cfg.grid_resolution.min(801), phi_argmin(), 0.05) {
        rep.push(
            CheckRecord::at_least("phi-min-off-disc", anchor, m - 1.25, f64::MIN_POSITIVE)
                .with_witness(json!({ "min": m, "at": complex_json(at), "radius": 0.05 })),
        );
    }

    // Restrictions at random in-domain parameters.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(400));
    let (lo, hi) = sigma_range();
    let domain = EllipseDomain::default();
    let (mut line_err, mut orth_err, mut orth_count) = (0.0f64, 0.0f64, 0);
    for _ in 0..1000 {
        let s = rng.gen_range(lo..hi);
        if let Ok(v) = phi(line_point(s)) {
            line_err = line_err.max((v - phi_hat(s).0).abs());
        }
        let tau = rng.gen_range(-0.3..0.3);
        let b = orth_point(s, tau);
        if domain.contains(b) {
            if let (Ok(a), Ok(e)) = (phi(b), phi_hat_orth(s, tau)) {
                orth_err = orth_err.max((a - e).abs() / a.abs().max(1.0));
                orth_count += 1;
            }
        }
    }
    rep.push(CheckRecord::at_most(
        "phi-line-restriction",
        "phi restricted to L is (3 sigma^2 - 6 sigma + 8)/4",
        line_err,
        tol.restriction,
    ));
    rep.push(
        CheckRecord::at_most(
            "phi-orthogonal-restriction",
            "phi restricted to the lines orthogonal to L",
            orth_err,
            tol.restriction,
        )
        .with_witness(json!({ "points": orth_count })),
    );
    let stationary = (0..=200)
        .map(|k| lo + (hi - lo) * k as f64 / 200.0)
        .map(|s| phi_hat_orth_dtau(s, 0.0).map(f64::abs).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    rep.push(CheckRecord::at_most(
        "phi-orthogonal-stationary",
        "the orthogonal restrictions take their minimum at tau = 0",
        stationary,
        0.0,
    ));

    let (hmin, hat) = h_min_on_range(100_000);
    rep.push(
        CheckRecord::at_least(
            "h-positive",
            "h(sigma) > 0 on the closed parameter range",
            hmin,
            0.59,
        )
        .with_witness(json!({ "argmin": hat })),
    );
    rep.push(
        CheckRecord::at_most(
            "h-min-at-right-endpoint",
            "h is decreasing; its minimum is h((3 + sqrt 15)/6) = (45 - 11 sqrt 15)/4",
            (hmin - h_right_endpoint()).abs().max((hat - hi).abs()),
            1e-9,
        )
        .with_witness(json!({ "h_min": hmin, "closed_form": h_right_endpoint() })),
    );
    let hp = (0..=10_000)
        .map(|k| h_prime(lo + (hi - lo) * k as f64 / 10_000.0))
        .fold(f64::NEG_INFINITY, f64::max);
    rep.push(CheckRecord::at_most(
        "h-prime-negative",
        "h'(sigma) = -27 sigma^2 + 60 sigma - 36 < 0",
        hp,
        0.0,
    ));
    let printed = 918.0 * 15f64.sqrt() - 3555.0;
    let mut r = CheckRecord::new(
        "h-printed-constant",
        "h(1) = 918 sqrt 15 - 3555 > 0",
        Status::Skip,
    )
    .with_witness(json!({
        "printed": printed,
        "h_at_1": h_poly(1.0),
        "h_at_right_endpoint": h_right_endpoint(),
    }))
    .with_note(
        "the printed constant matches neither h(1) nor h at the right endpoint; \
             positivity is checked directly by h-positive",
    );
    r.observed = Some(printed);
    rep.push(r);

    let (s1, s2) = domain.focal_sums(line_point(hi));
    let (t1, t2) = domain.focal_sums(line_point(lo));
    let end_err = [s1, s2, t1, t2]
        .iter()
        .map(|s| (s - sum_bound()).abs())
        .fold(0.0, f64::max);
    rep.push(CheckRecord::at_most(
        "sigma-endpoints-on-both-ellipses",
        "the closure of L ∩ D joins the two points of the intersection of the ellipse boundaries",
        end_err,
        1e-10,
    ));
    rep
}

pub fn witnesses_suite(cfg: &RunConfig) -> VerificationReport {
    let tol = &cfg.tolerances;
    let mut rep = VerificationReport::new("witnesses");
    for n in [1, 3] {
        let Some(m) = build_or_record(n, &mut rep) else {
            continue;
        };
        for t in &cfg.witness_levels {
            rep.extend(collision_record(&m, *t, tol));
        }
    }

    let profiles: Vec<(
        u32,
        Result<Vec<crate::roots::RootMultiplicity>, String>,
        Complex64,
    )> = (1..=6u32)
        .into_par_iter()
        .map(|n| match build_immersion(n) {
            Ok(m) => (
                n,
                degeneracy_root_profile(&m.p, tol.root_cluster).map_err(|e| e.to_string()),
                m.critical_point(),
            ),
            Err(e) => (n, Err(e.to_string()), Complex64::new(0.0, 0.0)),
        })
        .collect();
    for (n, prof, z) in profiles {
        let id = format!("root-profile-n{n}");
        let anchor = "R_n restricted to the quadric has only one (multiple) root";
        match prof {
            Ok(p) => {
                let ok = p.len() == 1 && p[0].multiplicity == 2 * n as usize;
                rep.push(CheckRecord::pass_if(id, anchor, ok).with_witness(json!({
                    "expected_root": complex_json(z),
                    "profile": p,
                })));
            }
            Err(e) => rep.push(CheckRecord::pass_if(id, anchor, false).with_note(e)),
        }
    }
    let anchor = "for P_hat the criterion restricted to the quadric has two distinct roots";
    match degeneracy_root_profile(&p_hat(), tol.root_cluster) {
        Ok(p) => {
            let gap = if p.len() == 2 {
                (p[0].root - p[1].root).norm()
            } else {
                0.0
            };
            let simple = p.iter().all(|r| r.multiplicity == 1);
            let mut r =
                CheckRecord::pass_if("root-profile-p-hat", anchor, p.len() == 2 && simple && gap > 1e-3)
                    .with_witness(json!({ "profile": p }));
            r.observed = Some(gap);
            r.threshold = Some(1e-3);
            r.margin = Some(gap - 1e-3);
            rep.push(r);
        }
        Err(e) => {
            rep.push(CheckRecord::pass_if("root-profile-p-hat", anchor, false).with_note(e.to_string()))
        }
    }

    if let Some(m1) = build_or_record(1, &mut rep) {
        let anchor = "P_1 comes from an inhomogeneous harmonic polynomial";
        match provenance_pipeline(&p1_source()) {
            Ok(p) => rep.push(CheckRecord::at_most(
                "p1-provenance",
                anchor,
                p.relative_residual(&m1.p),
                tol.provenance,
            )),
            Err(e) => rep.push(CheckRecord::pass_if("p1-provenance", anchor, false).with_note(e.to_string())),
        }
        if let Ok(p) = provenance_pipeline(&p1_source_as_printed()) {
            let neg_conj = m1.p.map_coeffs(|z: &Complex64| -z.conj());
            let mut r = CheckRecord::new("p1-provenance-printed-signs", anchor, Status::Skip)
                .with_witness(json!({
                    "residual_vs_p1": p.relative_residual(&m1.p),
                    "residual_vs_minus_conj_p1": p.relative_residual(&neg_conj),
                }))
                .with_note(
                    "with the cubic terms signed as printed the pipeline yields -conj of the P_1 \
                     coefficients; p1-provenance uses the opposite sign on the cubic part",
                );
            r.observed = Some(p.relative_residual(&m1.p));
            rep.push(r);
        }
        for t in [m1.t_threshold, 1.5] {
            if let Ok(w) = degenerate_witness(&m1, t) {
                rep.push(
                    CheckRecord::at_most(
                        format!("degenerate-witness-n1-t{t}"),
                        "F_n degenerates at some point of M_t for t >= t_n",
                        Criterion::new(&m1.p).eval(&w.w).norm(),
                        tol.witness_criterion,
                    )
                    .with_witness(w.to_json()),
                );
            }
        }
    }
    rep
}

/// One row of a threshold sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub samples: usize,
    /// `min |criterion|` over the samples.
    pub min_criterion: f64,
    /// `d(t)^(2n)`, zero at or past the threshold.
    pub distance_bound: f64,
    pub criterion_ok: bool,
    /// `t >= t_n`: an explicit degenerate point exists.
    pub degenerate_witness: bool,
    pub witness_criterion: Option<f64>,
    /// Sibling level gap, for `n = 1` only.
    pub min_level_gap: Option<f64>,
    /// Present when `t < sqrt(5)/2`.
    pub gap_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub n: u32,
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn levels(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.t_min];
        }
        (0..self.steps)
            .map(|k| self.t_min + (self.t_max - self.t_min) * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// Per-level criterion margins (and level gaps for `n = 1`); the seed of step
/// `k` is `seed + k`.
pub fn sweep(
    spec: &SweepSpec,
    tol: &Tolerances,
) -> Result<Vec<SweepRow>, crate::map_factory::ConstructionError> {
    let m = build_immersion(spec.n)?;
    let crit = Criterion::new(&m.p);
    let ext = ExtendedCriterion::new(spec.n)?;
    let z = m.critical_point();
    let n = spec.n;
    Ok(spec
        .levels()
        .into_par_iter()
        .enumerate()
        .map(|(k, t)| {
            let seed = spec.seed.wrapping_add(k as u64);
            let pts = match LevelSpec::new(t) {
                Ok(l) => sample_level(&l, spec.samples, seed),
                Err(_) => Vec::new(),
            };
            let (min, _) = min_criterion(&crit, &pts);
            let d = distance_to_level_region(z, t);
            let bound = d.powi(2 * n as i32);
            let witness = degenerate_witness(&m, t).ok();
            let (gap, gap_ok) = if n == 1 {
                let g = crate::fiber::injectivity_stats(t, spec.samples, seed)
                    .ok()
                    .map(|s| s.min_gap);
                let ok = if t < sum_bound() {
                    g.map(|g| g > tol.level_gap)
                } else {
                    None
                };
                (g, ok)
            } else {
                (None, None)
            };
            SweepRow {
                t,
                samples: pts.len(),
                min_criterion: min,
                distance_bound: bound,
                criterion_ok: min >= bound * (1.0 - tol.margin_factor),
                degenerate_witness: witness.is_some(),
                witness_criterion: witness.map(|w| ext.eval(&w.w).norm()),
                min_level_gap: gap,
                gap_ok,
            }
        })
        .collect())
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Sweep rows as CSV; the fiber columns appear only when `with_fibers`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], with_fibers: bool, out: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec![
        "t",
        "samples",
        "min_criterion",
        "distance_bound",
        "criterion_ok",
        "degenerate_witness",
        "witness_criterion",
    ];
    if with_fibers {
        header.extend(["min_level_gap", "gap_ok"]);
    }
    wtr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            num(r.t),
            r.samples.to_string(),
            num(r.min_criterion),
            num(r.distance_bound),
            r.criterion_ok.to_string(),
            r.degenerate_witness.to_string(),
            opt(r.witness_criterion),
        ];
        if with_fibers {
            rec.push(opt(r.min_level_gap));
            rec.push(r.gap_ok.map(|b| b.to_string()).unwrap_or_default());
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Sweep rows pass: criterion margins hold and, where asserted, level gaps are
/// positive.
pub fn sweep_passed(rows: &[SweepRow]) -> bool {
    rows.iter().all(|r| r.criterion_ok && r.gap_ok.unwrap_or(true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            samples: 500,
            fiber_samples: 200,
            n_max: 4,
            nondegeneracy_n_max: 3,
            grid_resolution: 401,
            ..RunConfig::default()
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn every_suite_passes_on_a_small_config() {
        let cfg = small();
        for s in Suite::ALL {
            if s == Suite::All {
                continue;
            }
            let rep = run_suite(s, &cfg);
            let failures: Vec<_> = rep.failures().collect();
            assert!(failures.is_empty(), "{s}: {failures:#?}");
            assert!(!rep.records.is_empty());
            assert!(rep.records.iter().all(|r| !r.anchor.is_empty()));
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = small();
        let a = run_suite(Suite::Fibers, &cfg).without_timing();
        let b = run_suite(Suite::Fibers, &cfg).without_timing();
        assert_eq!(a.to_json_pretty(), b.to_json_pretty());
    }

    #[test]
    fn sweep_rows() {
        let spec = SweepSpec {
            n: 1,
            t_min: 1.01,
            t_max: 1.15,
            steps: 15,
            samples: 300,
            seed: 1,
        };
        let rows = sweep(&spec, &Tolerances::default()).unwrap();
        assert_eq!(rows.len(), 15);
        assert!(sweep_passed(&rows));
        assert!(rows.windows(2).all(|w| w[1].distance_bound < w[0].distance_bound));
        assert!(rows.iter().all(|r| !r.degenerate_witness));

        let past = SweepSpec {
            t_min: 1.16,
            t_max: 1.2,
            steps: 2,
            ..spec
        };
        let rows = sweep(&past, &Tolerances::default()).unwrap();
        assert!(rows[0].degenerate_witness);
        assert!(rows[0].witness_criterion.unwrap() < 1e-9);

        let mut buf = Vec::new();
        write_sweep_csv(&rows, false, &mut buf).unwrap();
        assert!(!String::from_utf8(buf).unwrap().contains("gap"));
    }
}
