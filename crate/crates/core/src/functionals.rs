//! Lyapunov energy, dissipation rate and per-step diagnostics.
//!
//! With `f = Δv - v + w` (the time derivative of `v`), the energy is
//!
//! ```text
//! F = ∫ u ln u - ∫ u v + τ/2 ∫ f² + 1/2 ∫ (εΔv - v)(Δv - v)
//! ```
//!
//! and the dissipation rate is
//!
//! ```text
//! D = ∫ u |∇(ln u - v)|² + (τ + ε) ∫ |∇f|² + (τ + 1) ∫ f².
//! ```
//!
//! For `τ = ε = 1` these reduce to `∫(u ln u - uv) + ½∫f² + ½∫(Δv - v)²` and
//! `2∫(|∇f|² + f²) + ∫ g²`. Gradient terms are evaluated on shell interfaces
//! with the same face areas the Laplacian uses, so `∫|∇f|² = -∫ f Δf` holds
//! exactly on the grid.

use serde::{Deserialize, Serialize};

use crate::grid::RadialGrid;
use crate::model::{ModelParams, SolutionState};

/// Below this density a face is treated as vacuum in the `∫ u |∇(ln u - v)|²` term.
pub const VACUUM_DENSITY: f64 = 1e-12;
/// Clamp on `u_r / u` at vacuum faces.
pub const LOG_GRADIENT_CLAMP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalConfig {
    /// Exponent of the weighted sup-norms; must exceed `n - 2`.
    pub kappa: f64,
    /// Use the `(τ, ε)` of the model instead of the `τ = ε = 1` energy.
    pub general_form: bool,
}

impl FunctionalConfig {
    /// `κ = n - 1`, fully parabolic energy.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            kappa: dim as f64 - 1.0,
            general_form: false,
        }
    }

    pub fn violations(&self, dim: usize) -> Vec<String> {
        if self.kappa > dim as f64 - 2.0 && self.kappa.is_finite() {
            Vec::new()
        } else {
            vec![format!(
                "kappa must exceed dim-2 = {} (got {})",
                dim as f64 - 2.0,
                self.kappa
            )]
        }
    }

    fn switches(&self, params: &ModelParams) -> (f64, f64) {
        if self.general_form {
            (params.tau(), params.eps())
        } else {
            (1.0, 1.0)
        }
    }
}

/// One row of per-step diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub dt: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub mass_w: f64,
    pub cross_uv: f64,
    pub entropy: f64,
    pub sup_u: f64,
    pub weighted_w: f64,
    pub weighted_v: f64,
    pub psi: f64,
}

/// `x ln x`, continuously extended by zero below `floor`.
pub fn entropy_density(x: f64, floor: f64) -> f64 {
    if x <= floor {
        0.0
    } else {
        x * x.ln()
    }
}

/// `∫ u ln u`.
pub fn entropy(params: &ModelParams, state: &SolutionState) -> f64 {
    let grid = state.grid();
    state
        .u
        .values()
        .iter()
        .zip(grid.quad_weights())
        .map(|(&u, w)| w * entropy_density(u, params.u_floor))
        .sum()
}

/// `∫ u v`.
pub fn cross_term(state: &SolutionState) -> f64 {
    state.grid().inner_slice(state.u.values(), state.v.values())
}

/// `Δv - v + w`, the time derivative of `v`.
pub fn signal_rate(state: &SolutionState) -> Vec<f64> {
    let grid = state.grid();
    let mut lap = vec![0.0; grid.cells()];
    grid.laplacian_slice(state.v.values(), &mut lap);
    lap.iter()
        .zip(state.v.values())
        .zip(state.w.values())
        .map(|((l, v), w)| l - v + w)
        .collect()
}

/// `Σ_faces A_j (δf)² / h`, i.e. `∫ |∇f|²` on the grid.
pub fn gradient_energy(grid: &RadialGrid, f: &[f64]) -> f64 {
    let h = grid.spacing();
    f.windows(2)
        .zip(&grid.face_areas()[1..])
        .map(|(p, a)| a * (p[1] - p[0]).powi(2) / h)
        .sum()
}

/// Face contribution `ū |δ(ln u - v) / h|² · A h` of `∫ u |∇(ln u - v)|²`.
fn drift_face_term(a: f64, b: f64, dv: f64, h: f64) -> f64 {
    if a > VACUUM_DENSITY && b > VACUUM_DENSITY {
        let dlog = b.ln() - a.ln();
        let mean = if (b - a).abs() <= 1e-12 * a.max(b) {
            0.5 * (a + b)
        } else {
            (b - a) / dlog
        };
        mean * ((dlog - dv) / h).powi(2)
    } else {
        let mean = 0.5 * (a + b);
        if mean <= 0.0 {
            return 0.0;
        }
        let log_grad = ((b - a) / (h * mean)).clamp(-LOG_GRADIENT_CLAMP, LOG_GRADIENT_CLAMP);
        mean * (log_grad - dv / h).powi(2)
    }
}

/// `∫ u |∇(ln u - v)|²`, the `∫ g²` part of the dissipation.
pub fn drift_dissipation(state: &SolutionState) -> f64 {
    let grid = state.grid();
    let h = grid.spacing();
    let u = state.u.values();
    let v = state.v.values();
    (1..grid.cells())
        .map(|j| {
            let term = drift_face_term(u[j - 1], u[j], v[j] - v[j - 1], h);
            grid.face_areas()[j] * h * term
        })
        .sum()
}

pub fn energy(params: &ModelParams, cfg: &FunctionalConfig, state: &SolutionState) -> f64 {
    let (tau, eps) = cfg.switches(params);
    let grid = state.grid();
    let mut lap = vec![0.0; grid.cells()];
    grid.laplacian_slice(state.v.values(), &mut lap);
    let v = state.v.values();
    let w = state.w.values();
    let quad = grid.quad_weights();
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for i in 0..grid.cells() {
        let f = lap[i] - v[i] + w[i];
        kinetic += quad[i] * f * f;
        potential += quad[i] * (eps * lap[i] - v[i]) * (lap[i] - v[i]);
    }
    entropy(params, state) - cross_term(state) + 0.5 * tau * kinetic + 0.5 * potential
}

pub fn dissipation(params: &ModelParams, cfg: &FunctionalConfig, state: &SolutionState) -> f64 {
    let (tau, eps) = cfg.switches(params);
    let grid = state.grid();
    let f = signal_rate(state);
    let f_sq: f64 = grid.inner_slice(&f, &f);
    drift_dissipation(state) + (tau + eps) * gradient_energy(grid, &f) + (tau + 1.0) * f_sq
}

/// `max_i r_i^κ |w_i|`.
pub fn weighted_sup(grid: &RadialGrid, kappa: f64, w: &[f64]) -> f64 {
    grid.centers()
        .iter()
        .zip(w)
        .map(|(r, w)| r.powf(kappa) * w.abs())
        .fold(0.0, f64::max)
}

/// `max_i r_i^{κ-1} (|v_i| + |v_r,i|)`, the grid proxy for `‖|x|^{κ-1} v‖_{W^{1,∞}}`.
pub fn weighted_sobolev_sup(grid: &RadialGrid, kappa: f64, v: &[f64]) -> f64 {
    let mut dv = vec![0.0; grid.cells()];
    grid.radial_derivative_slice(v, &mut dv);
    grid.centers()
        .iter()
        .zip(v.iter().zip(&dv))
        .map(|(r, (v, d))| r.powf(kappa - 1.0) * (v.abs() + d.abs()))
        .fold(0.0, f64::max)
}

/// Fills every [`EnergyRecord`] field for `state`; `psi` is taken as given.
pub fn diagnostics_row(
    params: &ModelParams,
    cfg: &FunctionalConfig,
    state: &SolutionState,
    psi: f64,
) -> EnergyRecord {
    let grid = state.grid();
    EnergyRecord {
        t: state.t,
        dt: state.dt,
        energy: energy(params, cfg, state),
        dissipation: dissipation(params, cfg, state),
        mass_u: state.u.integrate(),
        mass_v: state.v.integrate(),
        mass_w: state.w.integrate(),
        cross_uv: cross_term(state),
        entropy: entropy(params, state),
        sup_u: state.sup_u(),
        weighted_w: weighted_sup(grid, cfg.kappa, state.w.values()),
        weighted_v: weighted_sobolev_sup(grid, cfg.kappa, state.v.values()),
        psi,
    }
}
