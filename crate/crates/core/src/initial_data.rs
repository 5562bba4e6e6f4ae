//! Initial data with arbitrarily negative energy.
//!
//! A smooth bump `φ` supported in the unit ball is concentrated at scale `η`
//! and added to a base triple with the weights
//!
//! ```text
//! u_η = u_0 + (ln 1/η)^{2γ} η^{-n/2-2} φ(x/η)
//! v_η = v_0 + (ln 1/η)^{-γ}  η^{2-n/2}  φ(x/η)
//! w_η = w_0 + (ln 1/η)^{-γ}  η^{2-n/2}  φ(x/η)
//! ```
//!
//! With a zero base the cross term is `∫u_η v_η = (ln 1/η)^γ ‖φ‖²_{L²}`
//! exactly, so the energy is driven to `-∞` as `η → 0` while `u_η → u_0`
//! in `L¹` (for `n ≥ 5`) and `v_η → v_0` in `W^{2,2}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy, gradient_energy, FunctionalConfig};
use crate::grid::{unit_sphere_area, RadialField, RadialGrid};
use crate::model::{ModelParams, SolutionState};

/// Cells required inside `B_η` before a member of the family is trusted.
pub const MIN_CELLS_PER_ETA: usize = 32;

/// Subintervals of the Simpson rule used for the bump normalization.
const NORMALIZATION_INTERVALS: usize = 1 << 16;

/// Unnormalized profile `exp(-1/(1-r²))` on `[0, 1)`, zero outside.
fn bump_profile(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

/// The radial bump `φ(r) = c exp(-1/(1-r²))` with `∫_{R^n} φ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub dim: usize,
    pub normalization: f64,
}

impl MollifierSpec {
    pub fn new(dim: usize) -> Self {
        // composite Simpson on [0, 1] for ω_n ∫ profile(r) r^{n-1} dr
        let m = NORMALIZATION_INTERVALS;
        let h = 1.0 / m as f64;
        let g = |r: f64| bump_profile(r) * r.powi(dim as i32 - 1);
        let mut acc = g(0.0) + g(1.0);
        for k in 1..m {
            let coef = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += coef * g(k as f64 * h);
        }
        let integral = unit_sphere_area(dim) * acc * h / 3.0;
        Self {
            dim,
            normalization: 1.0 / integral,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.normalization * bump_profile(r)
    }

    /// `φ'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - r * r;
        -2.0 * r / (s * s) * self.value(r)
    }

    /// `φ''(r)`.
    pub fn second_derivative(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - r * r;
        // φ' = q φ with q = -2r/s², q' = -2/s² - 8r²/s³
        let q = -2.0 * r / (s * s);
        let dq = -2.0 / (s * s) - 8.0 * r * r / (s * s * s);
        (dq + q * q) * self.value(r)
    }

    /// `Δφ = φ'' + (n-1) φ'/r`.
    pub fn laplacian(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - r * r;
        // φ'/r is regular at the origin
        let dphi_over_r = -2.0 / (s * s) * self.value(r);
        self.second_derivative(r) + (self.dim as f64 - 1.0) * dphi_over_r
    }
}

/// Samples of the unit-mass bump on `grid`.
pub fn mollifier(grid: &Arc<RadialGrid>) -> RadialField {
    let phi = MollifierSpec::new(grid.dim());
    RadialField::from_fn(grid.clone(), |r| phi.value(r))
}

/// Largest admissible concentration scale, `min{1/2, R}`.
pub fn eta_star(radius: f64) -> f64 {
    radius.min(0.5)
}

#[derive(Debug, Clone)]
pub struct FamilyParams {
    pub gamma: f64,
    pub eta: f64,
    pub base: (RadialField, RadialField, RadialField),
}

impl FamilyParams {
    /// Zero base triple.
    pub fn concentrated(grid: &Arc<RadialGrid>, gamma: f64, eta: f64) -> Self {
        let z = RadialField::zeros(grid.clone());
        Self {
            gamma,
            eta,
            base: (z.clone(), z.clone(), z),
        }
    }
}

/// Weights `(ln 1/η)^{2γ} η^{-n/2-2}` and `(ln 1/η)^{-γ} η^{2-n/2}` of the
/// density and signal spikes.
pub fn spike_amplitudes(dim: usize, gamma: f64, eta: f64) -> (f64, f64) {
    let log = (1.0 / eta).ln();
    let n = dim as f64;
    (
        log.powf(2.0 * gamma) * eta.powf(-n / 2.0 - 2.0),
        log.powf(-gamma) * eta.powf(2.0 - n / 2.0),
    )
}

fn check_family(grid: &RadialGrid, gamma: f64, eta: f64) -> Result<()> {
    let mut v = Vec::new();
    if !(gamma > 0.0 && gamma.is_finite()) {
        v.push(format!("gamma must be positive (got {gamma})"));
    }
    let star = eta_star(grid.radius());
    if !(eta > 0.0 && eta < star) {
        v.push(format!("eta must lie in (0, {star}) (got {eta})"));
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(v))
    }
}

pub fn synth_family(
    grid: &Arc<RadialGrid>,
    params: &FamilyParams,
) -> Result<(RadialField, RadialField, RadialField)> {
    check_family(grid, params.gamma, params.eta)?;
    let (u0, v0, w0) = &params.base;
    for f in [u0, v0, w0] {
        if !(Arc::ptr_eq(f.grid(), grid) || **f.grid() == **grid) {
            return Err(Error::GridMismatch);
        }
    }
    let phi = MollifierSpec::new(grid.dim());
    let eta = params.eta;
    let (a_u, a_v) = spike_amplitudes(grid.dim(), params.gamma, eta);
    let spike: Vec<f64> = grid.centers().iter().map(|&r| phi.value(r / eta)).collect();
    let add = |base: &RadialField, amp: f64| {
        let values = base
            .values()
            .iter()
            .zip(&spike)
            .map(|(b, s)| b + amp * s)
            .collect();
        RadialField::from_values(grid.clone(), values)
    };
    Ok((add(u0, a_u)?, add(v0, a_v)?, add(w0, a_v)?))
}

/// One row of the energy-divergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub eta: f64,
    pub energy: f64,
    pub cross_uv: f64,
    pub l1_dist_u: f64,
    pub w22_dist_v: f64,
    /// `F + ∫uv`: the entropy and signal parts of the energy.
    pub non_cross: f64,
}

/// Discrete `W^{2,2}` proxy `(∫d² + ∫|∇d|² + ∫(Δd)²)^{1/2}`.
pub fn w22_proxy(grid: &RadialGrid, d: &[f64]) -> f64 {
    let mut lap = vec![0.0; d.len()];
    grid.laplacian_slice(d, &mut lap);
    (grid.inner_slice(d, d) + gradient_energy(grid, d) + grid.inner_slice(&lap, &lap)).sqrt()
}

/// Evaluates the family at each `η` (strictly decreasing) with the given base.
pub fn energy_divergence_table(
    params: &ModelParams,
    grid: &Arc<RadialGrid>,
    gamma: f64,
    base: &(RadialField, RadialField, RadialField),
    etas: &[f64],
) -> Result<Vec<FamilyRow>> {
    if etas.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::Validation(vec![
            "eta ladder must be strictly decreasing".to_string(),
        ]));
    }
    for &eta in etas {
        check_family(grid, gamma, eta)?;
        let cells = grid.cells_within(eta);
        if cells < MIN_CELLS_PER_ETA {
            return Err(Error::UnderresolvedEta {
                eta,
                cells,
                required: MIN_CELLS_PER_ETA,
            });
        }
    }
    let fcfg = FunctionalConfig::for_dim(params.dim);
    etas.iter()
        .map(|&eta| {
            let fam = FamilyParams {
                gamma,
                eta,
                base: base.clone(),
            };
            let (u, v, w) = synth_family(grid, &fam)?;
            let du: Vec<f64> = u
                .values()
                .iter()
                .zip(base.0.values())
                .map(|(a, b)| (a - b).abs())
                .collect();
            let dv: Vec<f64> = v
                .values()
                .iter()
                .zip(base.1.values())
                .map(|(a, b)| a - b)
                .collect();
            let state = SolutionState {
                u,
                v,
                w,
                t: 0.0,
                dt: 1.0,
            };
            let f = energy(params, &fcfg, &state);
            let cross = crate::functionals::cross_term(&state);
            Ok(FamilyRow {
                eta,
                energy: f,
                cross_uv: cross,
                l1_dist_u: grid.integrate_slice(&du),
                w22_dist_v: w22_proxy(grid, &dv),
                non_cross: f + cross,
            })
        })
        .collect()
}
