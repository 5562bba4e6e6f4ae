//! Radial finite-volume discretization of the ball `B_R ⊂ R^n`.
//!
//! The ball is cut into `N` concentric shells of width `h = R/N`. Unknowns
//! live at the shell midpoints `r_i = (i + 1/2) h`; there is no node at the
//! origin, so the `(n-1)/r` term of the radial Laplacian never has to be
//! evaluated at `r = 0`. Fluxes live on the shell interfaces `r_{i+1/2}`, and
//! both the innermost interface (`r = 0`, symmetry) and the outermost one
//! (`r = R`, homogeneous Neumann) carry zero flux.
//!
//! Cell weights are the exact shell volumes `ω_n (r_{i+1/2}^n - r_{i-1/2}^n) / n`.
//! They sum to `|B_R|` up to roundoff and make the discrete Laplacian exact on
//! `r²`; every divergence below is normalized by the same weights, so
//! integrals of divergences telescope to zero.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Smallest number of shells accepted by [`RadialGrid::new`].
pub const MIN_CELLS: usize = 16;

/// `Γ(n/2)` for integer `n ≥ 1`, by the half-integer recursion.
pub fn gamma_half_integer(n: usize) -> f64 {
    assert!(n >= 1, "gamma_half_integer needs n >= 1");
    let (mut x, mut g) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = n as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area of the unit sphere `S^{n-1} ⊂ R^n`, `2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma_half_integer(dim)
}

/// Volume of `B_R ⊂ R^n`.
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    unit_sphere_area(dim) * radius.powi(dim as i32) / dim as f64
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    cells: usize,
    h: f64,
    sphere_area: f64,
    centers: Vec<f64>,
    faces: Vec<f64>,
    /// `ω_n r_{j}^{n-1}` for every face `j = 0..=N`.
    face_areas: Vec<f64>,
    quad_weights: Vec<f64>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.radius == other.radius && self.cells == other.cells
    }
}

impl RadialGrid {
    pub fn new(dim: usize, radius: f64, cells: usize) -> Result<Self> {
        let mut problems = Vec::new();
        if dim < 2 {
            problems.push(format!("dim must be at least 2 (got {dim})"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            problems.push(format!("radius must be positive and finite (got {radius})"));
        }
        if cells < MIN_CELLS {
            problems.push(format!("cells must be at least {MIN_CELLS} (got {cells})"));
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems.join("; ")));
        }

        let h = radius / cells as f64;
        let sphere_area = unit_sphere_area(dim);
        let centers: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * h).collect();
        let mut faces: Vec<f64> = (0..=cells).map(|j| j as f64 * h).collect();
        faces[0] = 0.0;
        faces[cells] = radius;
        let face_areas = faces
            .iter()
            .map(|&r| sphere_area * r.powi(dim as i32 - 1))
            .collect();
        let nd = dim as i32;
        let quad_weights = (0..cells)
            .map(|i| sphere_area * (faces[i + 1].powi(nd) - faces[i].powi(nd)) / dim as f64)
            .collect();

        Ok(Self {
            dim,
            radius,
            cells,
            h,
            sphere_area,
            centers,
            faces,
            face_areas,
            quad_weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Shell width `h = R / N`.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// `ω_n`, the surface area of the unit sphere.
    pub fn sphere_area(&self) -> f64 {
        self.sphere_area
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Number of cell centers strictly inside `B_rho`.
    pub fn cells_within(&self, rho: f64) -> usize {
        self.centers.iter().take_while(|&&r| r < rho).count()
    }

    /// `Σ f_i w_i`.
    pub fn integrate_slice(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.cells);
        f.iter().zip(&self.quad_weights).map(|(f, w)| f * w).sum()
    }

    /// Weighted integral of the product of two sampled functions.
    pub fn inner_slice(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.quad_weights)
            .map(|((f, g), w)| f * g * w)
            .sum()
    }

    /// Coefficients of the conservative Laplacian row `i`:
    /// `(Δf)_i = lower_i (f_{i-1} - f_i) + upper_i (f_{i+1} - f_i)`.
    /// Boundary rows have the missing coefficient set to zero.
    pub(crate) fn laplacian_coefficients(&self, i: usize) -> (f64, f64) {
        let n = self.cells;
        let vol = self.quad_weights[i];
        let lower = if i == 0 { 0.0 } else { self.face_areas[i] / (self.h * vol) };
        let upper = if i + 1 == n { 0.0 } else { self.face_areas[i + 1] / (self.h * vol) };
        (lower, upper)
    }

    pub fn laplacian_slice(&self, f: &[f64], out: &mut [f64]) {
        let n = self.cells;
        debug_assert!(f.len() == n && out.len() == n);
        for i in 0..n {
            let (lo, up) = self.laplacian_coefficients(i);
            let mut acc = 0.0;
            if i > 0 {
                acc += lo * (f[i - 1] - f[i]);
            }
            if i + 1 < n {
                acc += up * (f[i + 1] - f[i]);
            }
            out[i] = acc;
        }
    }

    /// Divergence of the chemotactic flux `u v_r`, first-order upwind in `u`.
    pub fn chemotactic_divergence_slice(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        let n = self.cells;
        out.iter_mut().for_each(|o| *o = 0.0);
        // interior faces j = 1..N-1 sit between cells j-1 and j
        for j in 1..n {
            let grad = (v[j] - v[j - 1]) / self.h;
            let upwind = if grad >= 0.0 { u[j - 1] } else { u[j] };
            let flux = self.face_areas[j] * upwind * grad;
            out[j - 1] += flux;
            out[j] -= flux;
        }
        for (o, w) in out.iter_mut().zip(&self.quad_weights) {
            *o /= w;
        }
    }

    /// Face gradients `(f_{j} - f_{j-1}) / h` on the `N - 1` interior faces.
    pub fn face_gradients(&self, f: &[f64]) -> Vec<f64> {
        f.windows(2).map(|p| (p[1] - p[0]) / self.h).collect()
    }

    /// Largest `|v_r|` over interior faces.
    pub fn max_face_gradient(&self, v: &[f64]) -> f64 {
        v.windows(2)
            .map(|p| ((p[1] - p[0]) / self.h).abs())
            .fold(0.0, f64::max)
    }

    /// Largest time step for which explicit upwind transport with velocity
    /// `v_r` keeps every cell nonnegative: `dt · (outflow rate of cell i) ≤ 1`.
    pub fn upwind_positivity_limit(&self, v: &[f64]) -> f64 {
        let n = self.cells;
        let mut outflow = vec![0.0; n];
        for j in 1..n {
            let grad = (v[j] - v[j - 1]) / self.h;
            let rate = self.face_areas[j] * grad.abs();
            if grad >= 0.0 {
                outflow[j - 1] += rate;
            } else {
                outflow[j] += rate;
            }
        }
        outflow
            .iter()
            .zip(&self.quad_weights)
            .map(|(o, w)| if *o > 0.0 { w / o } else { f64::INFINITY })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn radial_derivative_slice(&self, f: &[f64], out: &mut [f64]) {
        let n = self.cells;
        let h = self.h;
        for i in 1..n - 1 {
            out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        }
        // Second-order one-sided stencils at both ends. At the innermost cell
        // the stencil is exact for a + b r + c r², so smooth radial profiles
        // (b = 0) give c h, which vanishes with h like f_r(0) = 0 requires.
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    }
}

/// Builds a shared grid; see [`RadialGrid::new`] for the accepted ranges.
pub fn build_grid(dim: usize, radius: f64, cells: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(dim, radius, cells).map(Arc::new)
}

/// Cell-center samples of a radial function on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn from_values(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::Config(format!(
                "field has {} samples but the grid has {} cells",
                values.len(),
                grid.cells()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: "field",
                index,
            });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cells());
        Self { grid, values }
    }

    pub fn constant(grid: Arc<RadialGrid>, c: f64) -> Self {
        let values = vec![c; grid.cells()];
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f(r)` at every cell center.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.centers().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫_{B_R} f dx`.
    pub fn integrate(&self) -> f64 {
        self.grid.integrate_slice(&self.values)
    }

    pub fn laplacian(&self) -> RadialField {
        let mut out = vec![0.0; self.len()];
        self.grid.laplacian_slice(&self.values, &mut out);
        Self::from_values_unchecked(self.grid.clone(), out)
    }

    pub fn radial_derivative(&self) -> RadialField {
        let mut out = vec![0.0; self.len()];
        self.grid.radial_derivative_slice(&self.values, &mut out);
        Self::from_values_unchecked(self.grid.clone(), out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialField {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::from_values_unchecked(self.grid.clone(), values)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &RadialField, f: impl Fn(f64, f64) -> f64) -> Result<RadialField> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_values_unchecked(self.grid.clone(), values))
    }
}

/// `∫_{B_R} f dx` on the field's own grid.
pub fn integrate(f: &RadialField) -> f64 {
    f.integrate()
}

/// Conservative radial Laplacian with zero flux at `r = 0` and `r = R`.
pub fn laplacian(f: &RadialField) -> RadialField {
    f.laplacian()
}

/// `∇·(u ∇v)` in conservative upwind form.
pub fn chemotactic_divergence(u: &RadialField, v: &RadialField) -> Result<RadialField> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch);
    }
    let mut out = vec![0.0; u.len()];
    u.grid
        .chemotactic_divergence_slice(&u.values, &v.values, &mut out);
    Ok(RadialField::from_values_unchecked(u.grid.clone(), out))
}

pub fn radial_derivative(f: &RadialField) -> RadialField {
    f.radial_derivative()
}
