//! IMEX time stepping for the radial system.
//!
//! One step of size `dt`:
//!
//! 1. `u* = u - dt ∇·(u ∇v)` (explicit, upwind),
//! 2. `(I - dt Δ) u' = u*`,
//! 3. `(I - dt (Δ - I)) v' = v + dt w`,
//! 4. `τ = 1`: `(I - dt (εΔ - I)) w' = w + dt u'`; `τ = 0`: `(I - εΔ) w' = u'`.
//!
//! Every implicit solve is a diagonally dominant tridiagonal M-matrix system
//! with the no-flux closure, so it conserves the discrete integral and maps
//! nonnegative data to nonnegative data.

use serde::{Deserialize, Serialize};

use crate::blowup::{psi_update, PsiAccumulator};
use crate::error::{Error, Result};
use crate::functionals::{diagnostics_row, energy, EnergyRecord, FunctionalConfig};
use crate::grid::RadialField;
use crate::model::{elliptic_w, ModelParams, RunVerdict, SolutionState, VerdictKind};
use crate::tridiag::solve_shifted_laplacian;

/// Undershoots of `u*` below `-NEGATIVITY_TOLERANCE · max u` reject the step.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// A remaining interval up to `1 + HORIZON_SNAP` trial steps long is taken
/// in one step.
const HORIZON_SNAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    /// Advective CFL number in `(0, 1]`.
    pub cfl: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Step growth factor after an accepted step.
    pub growth: f64,
    /// Final time `T_end`.
    pub horizon: f64,
    /// Required escalation `sup u / sup u_0` for a blowup verdict.
    pub blowup_factor: f64,
    /// Emit one record every `record_stride` accepted steps.
    pub record_stride: usize,
    /// Largest accepted relative growth of `sup u` within one step.
    pub max_sup_growth: f64,
    /// Constant step size for convergence studies; disables adaptivity
    /// except for rejections.
    pub fixed_dt: Option<f64>,
    /// Give up with an inconclusive verdict after this many accepted steps.
    pub max_steps: Option<usize>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            dt_min: 1e-12,
            dt_max: 1e-2,
            growth: 1.1,
            horizon: 1.0,
            blowup_factor: 1e6,
            record_stride: 10,
            max_sup_growth: 0.25,
            fixed_dt: None,
            max_steps: None,
        }
    }
}

impl StepperConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            v.push(format!("cfl must lie in (0, 1] (got {})", self.cfl));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max) {
            v.push(format!(
                "need 0 < dt_min < dt_max (got dt_min = {}, dt_max = {})",
                self.dt_min, self.dt_max
            ));
        }
        if !(self.growth > 1.0) {
            v.push(format!("growth must exceed 1 (got {})", self.growth));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            v.push(format!("horizon must be positive (got {})", self.horizon));
        }
        if !(self.blowup_factor > 1.0) {
            v.push(format!("blowup_factor must exceed 1 (got {})", self.blowup_factor));
        }
        if self.record_stride == 0 {
            v.push("stride must be at least 1".to_string());
        }
        if !(self.max_sup_growth > 0.0) {
            v.push(format!(
                "max_sup_growth must be positive (got {})",
                self.max_sup_growth
            ));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) {
                v.push(format!("fixed_dt must be positive (got {dt})"));
            }
        }
        if self.max_steps == Some(0) {
            v.push("max_steps must be at least 1".to_string());
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
}

/// Why a trial step was thrown away.
#[derive(Debug, Clone, PartialEq)]
enum Rejection {
    NonFinite,
    Negative(f64),
    SupGrowth(f64),
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::NonFinite => f.write_str("non-finite value produced"),
            Rejection::Negative(x) => write!(f, "density undershoot {x:e}"),
            Rejection::SupGrowth(x) => write!(f, "sup u grew by factor {x}"),
        }
    }
}

/// Step-size bound from the advective CFL condition and upwind positivity.
pub fn stable_dt(state: &SolutionState, cfg: &StepperConfig) -> f64 {
    let grid = state.grid();
    let v = state.v.values();
    let max_grad = grid.max_face_gradient(v);
    let cfl = if max_grad > 0.0 {
        cfg.cfl * grid.spacing() / max_grad
    } else {
        f64::INFINITY
    };
    let positivity = cfg.cfl * grid.upwind_positivity_limit(v);
    cfl.min(positivity).min(cfg.dt_max)
}

fn try_step(
    params: &ModelParams,
    state: &SolutionState,
    dt: f64,
    cfg: &StepperConfig,
) -> std::result::Result<SolutionState, Rejection> {
    let grid = state.grid().clone();
    let n = grid.cells();
    let u = state.u.values();
    let v = state.v.values();
    let w = state.w.values();

    let mut div = vec![0.0; n];
    grid.chemotactic_divergence_slice(u, v, &mut div);
    let mut u_new: Vec<f64> = u.iter().zip(&div).map(|(u, d)| u - dt * d).collect();

    let sup_u = state.u.max().max(0.0);
    let min_star = u_new.iter().copied().fold(f64::INFINITY, f64::min);
    if !min_star.is_finite() {
        return Err(Rejection::NonFinite);
    }
    if min_star < -NEGATIVITY_TOLERANCE * sup_u {
        return Err(Rejection::Negative(min_star));
    }
    u_new.iter_mut().for_each(|x| *x = x.max(0.0));
    solve_shifted_laplacian(&grid, dt, 0.0, &mut u_new);

    let mut v_new: Vec<f64> = v.iter().zip(w).map(|(v, w)| v + dt * w).collect();
    solve_shifted_laplacian(&grid, dt, dt, &mut v_new);

    let w_new = match (params.tau, params.eps) {
        (1, eps) => {
            let mut rhs: Vec<f64> = w.iter().zip(&u_new).map(|(w, u)| w + dt * u).collect();
            if eps == 1 {
                solve_shifted_laplacian(&grid, dt, dt, &mut rhs);
            } else {
                rhs.iter_mut().for_each(|x| *x /= 1.0 + dt);
            }
            rhs
        }
        _ => elliptic_w(&grid, params.eps(), &u_new),
    };

    for x in u_new.iter_mut().chain(v_new.iter_mut()) {
        if !x.is_finite() {
            return Err(Rejection::NonFinite);
        }
        *x = x.max(0.0);
    }
    if w_new.iter().any(|x| !x.is_finite()) {
        return Err(Rejection::NonFinite);
    }
    let w_new: Vec<f64> = w_new.into_iter().map(|x| x.max(0.0)).collect();

    let new_sup = u_new.iter().copied().fold(0.0, f64::max);
    if sup_u > 0.0 && new_sup > (1.0 + cfg.max_sup_growth) * sup_u {
        return Err(Rejection::SupGrowth(new_sup / sup_u));
    }

    Ok(SolutionState {
        u: RadialField::from_values_unchecked(grid.clone(), u_new),
        v: RadialField::from_values_unchecked(grid.clone(), v_new),
        w: RadialField::from_values_unchecked(grid, w_new),
        t: state.t + dt,
        dt,
    })
}

/// Advances `state` by one accepted step.
///
/// The trial step size is `state.dt` (or `cfg.fixed_dt`), capped by
/// [`stable_dt`] and by the remaining time to the horizon. Rejected trials
/// halve the step; [`Error::DtUnderflow`] is returned once it drops below
/// `dt_min`. The returned state carries the step actually taken in `dt`.
pub fn step(params: &ModelParams, state: &SolutionState, cfg: &StepperConfig) -> Result<SolutionState> {
    let mut dt = cfg
        .fixed_dt
        .unwrap_or(state.dt)
        .min(stable_dt(state, cfg));
    // land exactly on the horizon instead of leaving a sliver of a step
    let remaining = cfg.horizon - state.t;
    let mut last = remaining > 0.0 && remaining <= dt * (1.0 + HORIZON_SNAP);
    if last {
        dt = remaining;
    }
    loop {
        if dt < cfg.dt_min && !(last && dt == remaining) {
            return Err(Error::DtUnderflow {
                t: state.t,
                dt,
                dt_min: cfg.dt_min,
            });
        }
        match try_step(params, state, dt, cfg) {
            Ok(mut next) => {
                if last {
                    next.t = cfg.horizon;
                }
                return Ok(next);
            }
            Err(_) => {
                dt *= 0.5;
                last = false;
            }
        }
    }
}

/// Proposed trial step after `accepted`, which used step size `accepted.dt`.
fn next_trial_dt(accepted: &SolutionState, cfg: &StepperConfig) -> f64 {
    match cfg.fixed_dt {
        Some(dt) => dt,
        None => (accepted.dt * cfg.growth).min(cfg.dt_max),
    }
}

/// Receives diagnostics rows in time order.
pub trait DiagnosticsSink {
    fn record(&mut self, rec: &EnergyRecord) -> Result<()>;

    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

impl DiagnosticsSink for Vec<EnergyRecord> {
    fn record(&mut self, rec: &EnergyRecord) -> Result<()> {
        self.push(*rec);
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;

impl DiagnosticsSink for NullSink {
    fn record(&mut self, _rec: &EnergyRecord) -> Result<()> {
        Ok(())
    }
}

/// Per-run observables besides the record stream.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub verdict: RunVerdict,
    pub accepted_steps: usize,
    pub initial_energy: f64,
    pub final_state: SolutionState,
    pub psi: PsiAccumulator,
}

/// Diagnostics options for [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunDiagnostics {
    pub functional: FunctionalConfig,
    /// `ℓ` of the `Ψ` accumulator.
    pub ell: f64,
}

/// Steps until the horizon or until the step size underflows.
pub fn run(
    params: &ModelParams,
    state0: SolutionState,
    cfg: &StepperConfig,
    sink: &mut dyn DiagnosticsSink,
) -> Result<RunVerdict> {
    let diag = RunDiagnostics {
        functional: FunctionalConfig::for_dim(params.dim),
        ell: 2.0,
    };
    run_with(params, state0, cfg, &diag, sink).map(|s| s.verdict)
}

pub fn run_with(
    params: &ModelParams,
    state0: SolutionState,
    cfg: &StepperConfig,
    diag: &RunDiagnostics,
    sink: &mut dyn DiagnosticsSink,
) -> Result<RunSummary> {
    params.validate()?;
    cfg.validate()?;
    let sup0 = state0.sup_u();
    let f0 = energy(params, &diag.functional, &state0);
    let mut psi = PsiAccumulator::new(f0, diag.ell);
    psi.prime(params, &state0);

    let mut state = state0;
    if let Some(dt) = cfg.fixed_dt {
        state.dt = dt;
    }
    sink.record(&diagnostics_row(params, &diag.functional, &state, psi.value))?;

    let mut accepted = 0usize;
    let mut last_recorded = 0usize;
    let mut last_dt = state.dt;
    let finish = |state: SolutionState,
                  kind: VerdictKind,
                  reason: String,
                  accepted: usize,
                  psi: PsiAccumulator| {
        RunSummary {
            verdict: RunVerdict {
                kind,
                t_end: state.t,
                sup_u_end: state.sup_u(),
                reason,
            },
            accepted_steps: accepted,
            initial_energy: f0,
            final_state: state,
            psi,
        }
    };

    let mut summary = loop {
        if state.t >= cfg.horizon {
            break finish(
                state,
                VerdictKind::GlobalWithinHorizon,
                format!("reached horizon t = {} after {accepted} steps", cfg.horizon),
                accepted,
                psi,
            );
        }
        if cfg.max_steps.is_some_and(|m| accepted >= m) {
            let reason = format!(
                "step budget of {accepted} exhausted at t = {} with dt = {last_dt:e} and sup u / sup u0 = {:e}",
                state.t,
                state.sup_u() / sup0
            );
            break finish(
                state,
                VerdictKind::Inconclusive,
                reason,
                accepted,
                psi,
            );
        }
        match step(params, &state, cfg) {
            Ok(next) => {
                accepted += 1;
                psi = psi_update(&psi, params, &next, next.dt);
                if !next.is_finite() {
                    break finish(
                        next,
                        VerdictKind::Inconclusive,
                        "non-finite state".into(),
                        accepted,
                        psi,
                    );
                }
                if accepted.is_multiple_of(cfg.record_stride) {
                    sink.record(&diagnostics_row(params, &diag.functional, &next, psi.value))?;
                    last_recorded = accepted;
                }
                last_dt = next.dt;
                let trial = next_trial_dt(&next, cfg);
                state = SolutionState { dt: trial, ..next };
            }
            Err(Error::DtUnderflow { t, dt, dt_min }) => {
                let sup = state.sup_u();
                let (kind, reason) = if sup >= cfg.blowup_factor * sup0 {
                    (
                        VerdictKind::BlowupIndicated,
                        format!(
                            "dt = {dt:e} fell below dt_min = {dt_min:e} at t = {t} with sup u / sup u0 = {:e}",
                            sup / sup0
                        ),
                    )
                } else {
                    (
                        VerdictKind::Inconclusive,
                        format!(
                            "dt = {dt:e} fell below dt_min = {dt_min:e} at t = {t} without sup-norm escalation (sup u / sup u0 = {:e})",
                            sup / sup0
                        ),
                    )
                };
                break finish(state, kind, reason, accepted, psi);
            }
            Err(e) => return Err(e),
        }
    };
    summary.final_state.dt = last_dt;
    if last_recorded != summary.accepted_steps && summary.accepted_steps > 0 {
        sink.record(&diagnostics_row(
            params,
            &diag.functional,
            &summary.final_state,
            summary.psi.value,
        ))?;
    }
    sink.finish()?;
    Ok(summary)
}
