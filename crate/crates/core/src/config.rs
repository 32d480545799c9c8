//! Default tolerances and run configuration, echoed into every report.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative coefficient residual of `L(P_n) - R_n` and of the
    /// two-sided alpha recursion.
    pub construction: f64,
    /// `|Re z^(2n+1)| / |z|^(2n+1)` at `z = 1/2 + i a_n`.
    pub arg_condition: f64,
    /// `|criterion|` at an explicit degeneracy witness.
    pub witness_criterion: f64,
    /// Relative slack on lower bounds for `|criterion|`.
    pub margin_factor: f64,
    /// Relative agreement of fiber roots with the closed forms.
    pub fiber_roots: f64,
    /// `|P1(base) - P1(sibling)| <= tol * (1 + |P1(base)|)`.
    pub fiber_value: f64,
    /// Distance of `min phi` from 5/4.
    pub phi_min: f64,
    /// Distance of the phi minimizer from `(5 + i sqrt 3) / 8`.
    pub phi_argmin: f64,
    /// Agreement of phi with its closed-form restrictions.
    pub restriction: f64,
    /// Sibling level gaps must exceed this to count as "different level".
    pub level_gap: f64,
    /// Relative residual used when clustering multiple roots.
    pub root_cluster: f64,
    /// Coefficient agreement of the harmonic provenance pipeline.
    pub provenance: f64,
    /// Residual for quadric membership and level equations.
    pub quadric: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            construction: 1e-10,
            arg_condition: 1e-9,
            witness_criterion: 1e-9,
            margin_factor: 1e-6,
            fiber_roots: 1e-8,
            fiber_value: 1e-9,
            phi_min: 1e-9,
            phi_argmin: 1e-6,
            restriction: 1e-10,
            level_gap: 1e-9,
            root_cluster: 1e-7,
            provenance: 1e-12,
            quadric: 1e-10,
        }
    }
}

impl Tolerances {
    /// Sets a tolerance by its field name; returns `false` for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name.replace('-', "_").as_str() {
            "construction" => &mut self.construction,
            "arg_condition" => &mut self.arg_condition,
            "witness_criterion" => &mut self.witness_criterion,
            "margin_factor" => &mut self.margin_factor,
            "fiber_roots" => &mut self.fiber_roots,
            "fiber_value" => &mut self.fiber_value,
            "phi_min" => &mut self.phi_min,
            "phi_argmin" => &mut self.phi_argmin,
            "restriction" => &mut self.restriction,
            "level_gap" => &mut self.level_gap,
            "root_cluster" => &mut self.root_cluster,
            "provenance" => &mut self.provenance,
            "quadric" => &mut self.quadric,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// Everything a suite run depends on besides the code itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Sampled points per level set for nondegeneracy checks.
    pub samples: usize,
    /// Sampled points per level set for fiber checks.
    pub fiber_samples: usize,
    /// Largest order for construction checks.
    pub n_max: u32,
    /// Largest order for the sampled nondegeneracy checks.
    pub nondegeneracy_n_max: u32,
    /// Grid points per axis for the phi minimization.
    pub grid_resolution: usize,
    pub refine_iters: usize,
    /// Levels at which the non-injectivity witnesses are built.
    pub witness_levels: Vec<f64>,
    /// Levels below sqrt(5)/2 at which injectivity is scanned.
    pub injectivity_levels: Vec<f64>,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            samples: 10_000,
            fiber_samples: 1_000,
            n_max: 8,
            nondegeneracy_n_max: 5,
            grid_resolution: 2001,
            refine_iters: 50,
            witness_levels: vec![std::f64::consts::SQRT_2, 1.5, 2.0],
            injectivity_levels: vec![1.05, 1.10, 1.117],
            tolerances: Tolerances::default(),
        }
    }
}
