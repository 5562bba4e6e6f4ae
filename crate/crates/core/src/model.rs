//! Model parameters, the evolving solution triple and run verdicts.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::tridiag::solve_shifted_laplacian;

/// Default clamp below which `u ln u` is treated as zero.
pub const DEFAULT_U_FLOOR: f64 = 1e-300;

/// Parameters of
///
/// ```text
///   u_t = Δu - ∇·(u ∇v)
///   v_t = Δv - v + w
/// τ w_t = εΔw - w + u
/// ```
///
/// on `B_R ⊂ R^n` with homogeneous Neumann data. `τ, ε ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: usize,
    pub radius: f64,
    pub tau: u8,
    pub eps: u8,
    pub u_floor: f64,
}

impl ModelParams {
    /// The fully parabolic system `τ = ε = 1`.
    pub fn fully_parabolic(dim: usize, radius: f64) -> Self {
        Self {
            dim,
            radius,
            tau: 1,
            eps: 1,
            u_floor: DEFAULT_U_FLOOR,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.dim < 2 {
            v.push(format!("dim must be at least 2 (got {})", self.dim));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            v.push(format!("radius must be positive (got {})", self.radius));
        }
        if self.tau > 1 {
            v.push(format!("tau must be 0 or 1 (got {})", self.tau));
        }
        if self.eps > 1 {
            v.push(format!("eps must be 0 or 1 (got {})", self.eps));
        }
        if !(self.u_floor > 0.0) {
            v.push(format!("u_floor must be positive (got {})", self.u_floor));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau as f64
    }

    pub fn eps(&self) -> f64 {
        self.eps as f64
    }
}

#[derive(Debug, Clone)]
pub struct SolutionState {
    pub u: RadialField,
    pub v: RadialField,
    pub w: RadialField,
    pub t: f64,
    pub dt: f64,
}

impl SolutionState {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.u.grid()
    }

    pub fn sup_u(&self) -> f64 {
        self.u.max()
    }

    pub fn is_finite(&self) -> bool {
        [&self.u, &self.v, &self.w]
            .iter()
            .all(|f| f.values().iter().all(|x| x.is_finite()))
            && self.t.is_finite()
            && self.dt.is_finite()
    }
}

/// Solves the elliptic `w`-equation `εΔw - w + u = 0` used when `τ = 0`.
pub(crate) fn elliptic_w(grid: &RadialGrid, eps: f64, u: &[f64]) -> Vec<f64> {
    let mut w = u.to_vec();
    if eps > 0.0 {
        solve_shifted_laplacian(grid, eps, 0.0, &mut w);
    }
    w
}

/// Assembles the state at `t = 0`.
///
/// All three fields must share the grid and be nonnegative. When `τ = 0`
/// the `w` component carries no initial datum and is replaced by the
/// solution of its elliptic equation.
pub fn initial_state(
    params: &ModelParams,
    grid: &Arc<RadialGrid>,
    u0: RadialField,
    v0: RadialField,
    w0: RadialField,
) -> Result<SolutionState> {
    params.validate()?;
    if grid.dim() != params.dim || grid.radius() != params.radius {
        return Err(Error::Config(format!(
            "grid (dim {}, radius {}) does not match the model (dim {}, radius {})",
            grid.dim(),
            grid.radius(),
            params.dim,
            params.radius
        )));
    }
    for f in [&u0, &v0, &w0] {
        if !(Arc::ptr_eq(f.grid(), grid) || **f.grid() == **grid) {
            return Err(Error::GridMismatch);
        }
    }
    for (name, f) in [("u0", &u0), ("v0", &v0), ("w0", &w0)] {
        for (index, &value) in f.values().iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { field: name, index });
            }
            if value < 0.0 {
                return Err(Error::NegativeInitialData {
                    field: name,
                    index,
                    value,
                });
            }
        }
    }
    let w0 = if params.tau == 0 {
        let w = elliptic_w(grid, params.eps(), u0.values());
        RadialField::from_values(grid.clone(), w)?
    } else {
        w0
    };
    let h = grid.spacing();
    Ok(SolutionState {
        u: u0,
        v: v0,
        w: w0,
        t: 0.0,
        dt: 0.1 * h * h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    BlowupIndicated,
    GlobalWithinHorizon,
    Inconclusive,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerdictKind::BlowupIndicated => "BlowupIndicated",
            VerdictKind::GlobalWithinHorizon => "GlobalWithinHorizon",
            VerdictKind::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub kind: VerdictKind,
    pub t_end: f64,
    pub sup_u_end: f64,
    pub reason: String,
}
