//! Roots of univariate complex polynomials.
//!
//! Roots come from the eigenvalues of the companion matrix (complex Schur form
//! via `nalgebra`) followed by Newton polishing. Multiple roots are
//! recovered by [`root_profile`], which groups eigenvalues into clusters and
//! accepts a cluster of size `m` only if its refined center annihilates the
//! polynomial and its first `m - 1` derivatives to a relative tolerance.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::poly::UniPoly;

/// A root together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct RootMultiplicity {
    pub root: Complex64,
    pub multiplicity: usize,
}

/// Eigenvalues of the companion matrix of `p`.
pub fn companion_roots(p: &UniPoly) -> Vec<Complex64> {
    let Some(degree) = p.degree() else {
        return Vec::new();
    };
    if degree == 0 {
        return Vec::new();
    }
    let c = p.coeffs();
    let lead = c[degree];
    let mut m = DMatrix::<Complex64>::zeros(degree, degree);
    for i in 1..degree {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..degree {
        m[(i, degree - 1)] = -c[i] / lead;
    }
    let schur = nalgebra::linalg::Schur::new(m);
    let (_, t) = schur.unpack();
    (0..degree).map(|i| t[(i, i)]).collect()
}

/// Up to `steps` Newton iterations; stops early once a step fails to reduce
/// the residual.
pub fn newton_polish(p: &UniPoly, x0: Complex64, steps: usize) -> Complex64 {
    let dp = p.derivative();
    let mut x = x0;
    let mut res = p.evaluate(&x).norm();
    for _ in 0..steps {
        let d = dp.evaluate(&x);
        if d.norm() == 0.0 {
            break;
        }
        let next = x - p.evaluate(&x) / d;
        let next_res = p.evaluate(&next).norm();
        if !(next_res < res) {
            break;
        }
        x = next;
        res = next_res;
    }
    x
}

/// Companion roots with `polish_steps` Newton steps each.
pub fn polished_roots(p: &UniPoly, polish_steps: usize) -> Vec<Complex64> {
    companion_roots(p)
        .into_iter()
        .map(|r| newton_polish(p, r, polish_steps))
        .collect()
}

/// `|q(x)|` relative to `sum |q_i| |x|^i`.
fn relative_value(q: &UniPoly, x: Complex64) -> f64 {
    let scale: f64 = q
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm() * x.norm().powi(i as i32))
        .sum();
    if scale == 0.0 {
        0.0
    } else {
        q.evaluate(&x).norm() / scale
    }
}

fn nth_derivative(p: &UniPoly, k: usize) -> UniPoly {
    (0..k).fold(p.clone(), |q, _| q.derivative())
}

/// Largest relative residual of `p, p', ..., p^(m-1)` at `x`.
pub fn multiplicity_residual(p: &UniPoly, x: Complex64, m: usize) -> f64 {
    let mut q = p.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..m {
        worst = worst.max(relative_value(&q, x));
        q = q.derivative();
    }
    worst
}

fn refine_center(p: &UniPoly, members: &[Complex64]) -> Complex64 {
    let m = members.len();
    let mean = members.iter().sum::<Complex64>() / m as f64;
    // An m-fold root of p is a simple root of p^(m-1).
    let q = nth_derivative(p, m - 1);
    newton_polish(&q, mean, 30)
}

/// Roots of `p` with multiplicities.
///
/// Clusters are merged greedily, closest centers first; a merge is kept only
/// if the refined center passes [`multiplicity_residual`] at `tol`. Returned
/// roots are sorted by real then imaginary part.
pub fn root_profile(p: &UniPoly, tol: f64) -> Vec<RootMultiplicity> {
    let raw = companion_roots(p);
    let mut clusters: Vec<(Vec<Complex64>, Complex64)> = raw
        .into_iter()
        .map(|r| {
            let c = newton_polish(p, r, 30);
            (vec![r], c)
        })
        .collect();

    loop {
        let mut pairs = Vec::new();
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                pairs.push(((clusters[i].1 - clusters[j].1).norm(), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged = None;
        for (_, i, j) in pairs {
            let members: Vec<Complex64> = clusters[i]
                .0
                .iter()
                .chain(clusters[j].0.iter())
                .copied()
                .collect();
            let center = refine_center(p, &members);
            if multiplicity_residual(p, center, members.len()) <= tol {
                merged = Some((i, j, members, center));
                break;
            }
        }
        match merged {
            Some((i, j, members, center)) => {
                clusters.remove(j);
                clusters[i] = (members, center);
            }
            None => break,
        }
    }

    let mut out: Vec<RootMultiplicity> = clusters
        .into_iter()
        .map(|(members, center)| RootMultiplicity {
            root: center,
            multiplicity: members.len(),
        })
        .collect();
    out.sort_by(|a, b| {
        a.root
            .re
            .total_cmp(&b.root.re)
            .then(a.root.im.total_cmp(&b.root.im))
    });
    out
}

/// Roots of `a x^2 + b x + c` by the stable quadratic formula.
pub fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the sign that avoids cancellation.
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        let r = -b / (2.0 * a);
        return [r, r];
    }
    [q / a, c / q]
}

/// Matches two root lists greedily by distance; returns the largest matched
/// distance relative to `max(1, |root|)`.
pub fn match_roots(found: &[Complex64], expected: &[Complex64]) -> f64 {
    let mut remaining: Vec<Complex64> = found.to_vec();
    let mut worst: f64 = 0.0;
    for e in expected {
        let Some((idx, dist)) = remaining
            .iter()
            .enumerate()
            .map(|(i, r)| (i, (r - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return f64::INFINITY;
        };
        remaining.swap_remove(idx);
        worst = worst.max(dist / e.norm().max(1.0));
    }
    if remaining.is_empty() {
        worst
    } else {
        f64::INFINITY
    }
}
