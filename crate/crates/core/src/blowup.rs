//! Comparison machinery for finite-time blowup under low initial energy.
//!
//! Along a solution, `Ψ(s) = ∫_0^s ∫ u (v - ln u) + (F(0) + ℓ) s` satisfies
//! `Ψ' = ∫uv - ∫u ln u + F(0) + ℓ ≥ F(0) - F(s) + ℓ ≥ ℓ`, and an integral
//! inequality of the form
//!
//! ```text
//! ∫_0^s ∫ uv ≤ C (m̃ + A + 1)² (1 + s) (F(0) + ∫uv - ∫u ln u + 1)^θ
//! ```
//!
//! turns `Ψ` into a supersolution of `Φ' = K (1+s)^{-1/θ} Φ^{1/θ}`, `Φ(1) = ℓ`,
//! with `K = C^{-1/θ} (m̃ + A + 1)^{-2/θ}`. `Φ` has a closed form that diverges
//! at a finite `T(m̃, A)`. `C` and `θ` are not explicit, so everything here
//! treats them as user inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{cross_term, entropy, EnergyRecord};
use crate::model::{ModelParams, SolutionState};

/// Relative slack used when checking `Ψ' ≥ ℓ`.
pub const PSI_CHAIN_SLACK: f64 = 1e-6;

/// Running value of `Ψ(s)`, accumulated by the trapezoid rule in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiAccumulator {
    pub value: f64,
    pub f0: f64,
    pub ell: f64,
    pub last_t: f64,
    last_rate: Option<f64>,
}

impl PsiAccumulator {
    pub fn new(f0: f64, ell: f64) -> Self {
        Self {
            value: 0.0,
            f0,
            ell,
            last_t: 0.0,
            last_rate: None,
        }
    }

    /// `Ψ'` evaluated on `state`.
    pub fn rate(&self, params: &ModelParams, state: &SolutionState) -> f64 {
        cross_term(state) - entropy(params, state) + self.f0 + self.ell
    }

    /// Seeds the left endpoint of the first trapezoid.
    pub fn prime(&mut self, params: &ModelParams, state: &SolutionState) {
        self.last_rate = Some(self.rate(params, state));
        self.last_t = state.t;
    }
}

/// Advances `Ψ` over a step of length `dt` ending at `state`.
///
/// Uses the trapezoid rule when the previous rate is known and the
/// rectangle rule with the current rate otherwise.
pub fn psi_update(
    acc: &PsiAccumulator,
    params: &ModelParams,
    state: &SolutionState,
    dt: f64,
) -> PsiAccumulator {
    let rate = acc.rate(params, state);
    let mean = match acc.last_rate {
        Some(prev) => 0.5 * (prev + rate),
        None => rate,
    };
    PsiAccumulator {
        value: acc.value + dt * mean,
        last_t: acc.last_t + dt,
        last_rate: Some(rate),
        ..*acc
    }
}

/// The chain `Ψ' ≥ F(0) - F(s) + ℓ ≥ ℓ` evaluated at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiChainReport {
    pub psi_prime: f64,
    pub energy_drop: f64,
    pub ell: f64,
    pub violated: bool,
}

pub fn psi_lower_bound_check(
    acc: &PsiAccumulator,
    params: &ModelParams,
    state: &SolutionState,
    f_current: f64,
) -> PsiChainReport {
    let psi_prime = acc.rate(params, state);
    chain_report(psi_prime, acc.f0 - f_current + acc.ell, acc.ell)
}

/// Same chain evaluated from a diagnostics row.
pub fn psi_chain_from_record(rec: &EnergyRecord, f0: f64, ell: f64) -> PsiChainReport {
    let psi_prime = rec.cross_uv - rec.entropy + f0 + ell;
    chain_report(psi_prime, f0 - rec.energy + ell, ell)
}

fn chain_report(psi_prime: f64, energy_drop: f64, ell: f64) -> PsiChainReport {
    let slack = PSI_CHAIN_SLACK * (1.0 + ell.abs());
    PsiChainReport {
        psi_prime,
        energy_drop,
        ell,
        violated: psi_prime < ell - slack,
    }
}

/// Constants of the comparison ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonParams {
    pub ell: f64,
    pub c_user: f64,
    pub theta: f64,
    pub m_tilde: f64,
    pub a: f64,
}

impl ComparisonParams {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.theta > 0.0 && self.theta < 1.0) {
            v.push(format!("theta must lie in (0, 1) (got {})", self.theta));
        }
        if !(self.c_user > 0.0 && self.c_user.is_finite()) {
            v.push(format!("c_user must be positive (got {})", self.c_user));
        }
        if !(self.m_tilde > 0.0) {
            v.push(format!("m_tilde must be positive (got {})", self.m_tilde));
        }
        if !(self.a > 0.0) {
            v.push(format!("a must be positive (got {})", self.a));
        }
        if !(self.ell > 1.0 && self.ell.is_finite()) {
            v.push(format!("ell must exceed 1 (got {})", self.ell));
        }
        v
    }

    fn check(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(v.join("; ")))
        }
    }

    /// `(θ - 1) / θ`, negative.
    fn exponent(&self) -> f64 {
        (self.theta - 1.0) / self.theta
    }

    /// `K = C^{-1/θ} (m̃ + A + 1)^{-2/θ}`.
    pub fn rate_constant(&self) -> f64 {
        self.c_user.powf(-1.0 / self.theta) * (self.m_tilde + self.a + 1.0).powf(-2.0 / self.theta)
    }

    /// Lower bound `2 C^{1/(1-θ)} (m̃ + A + 1)^{2/(1-θ)} + 1` on `ℓ`.
    pub fn ell_threshold(&self) -> f64 {
        let q = 1.0 / (1.0 - self.theta);
        2.0 * self.c_user.powf(q) * (self.m_tilde + self.a + 1.0).powf(2.0 * q) + 1.0
    }

    /// `K(m̃, A) = ℓ + |Ω|/e`: initial energies below `-K` force blowup.
    pub fn energy_threshold(&self, domain_volume: f64) -> f64 {
        self.ell + domain_volume / std::f64::consts::E
    }

    /// Right-hand side `K (1+s)^{-1/θ} Φ^{1/θ}` of the comparison ODE.
    pub fn ode_rhs(&self, s: f64, phi: f64) -> f64 {
        self.rate_constant() * (1.0 + s).powf(-1.0 / self.theta) * phi.powf(1.0 / self.theta)
    }

    /// `ℓ^{-p}` times the bracket of the closed form, so that it equals one
    /// exactly at `s = 1`.
    fn normalized_bracket(&self, s: f64) -> f64 {
        let p = self.exponent();
        let k = self.rate_constant();
        1.0 + k * self.ell.powf(-p) * ((1.0 + s).powf(p) - 2f64.powf(p))
    }
}

/// Closed-form comparison function value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhiValue {
    Finite(f64),
    /// `s` lies at or beyond the divergence time.
    Diverged,
}

impl PhiValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PhiValue::Finite(x) => Some(x),
            PhiValue::Diverged => None,
        }
    }
}

impl std::fmt::Display for PhiValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhiValue::Finite(x) => write!(f, "{x}"),
            PhiValue::Diverged => f.write_str("inf"),
        }
    }
}

/// `Φ(s) = (ℓ^p - 2^p K + (1+s)^p K)^{1/p}` with `p = (θ-1)/θ`, for `s ≥ 1`.
pub fn phi_closed_form(s: f64, params: &ComparisonParams) -> Result<PhiValue> {
    params.check()?;
    if !(s >= 1.0) {
        return Err(Error::Domain(format!("phi is defined for s >= 1 (got {s})")));
    }
    let bracket = params.normalized_bracket(s);
    if bracket <= 0.0 {
        return Ok(PhiValue::Diverged);
    }
    let value = params.ell * bracket.powf(1.0 / params.exponent());
    Ok(if value.is_finite() {
        PhiValue::Finite(value)
    } else {
        PhiValue::Diverged
    })
}

/// Locates the zero of the closed-form bracket by bisection, i.e. the time
/// at which `Φ` diverges. `None` if the bracket stays positive up to `s_max`.
pub fn phi_bracket_root(params: &ComparisonParams, s_max: f64) -> Result<Option<f64>> {
    params.check()?;
    if params.normalized_bracket(s_max) > 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (1.0, s_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if params.normalized_bracket(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// `T(m̃, A) = (2^p - C^{1/θ} (m̃+A+1)^{2/θ} ℓ^p)^{1/p} - 1`.
pub fn blowup_time_bound(params: &ComparisonParams) -> Result<f64> {
    params.check()?;
    let threshold = params.ell_threshold();
    if !(params.ell > threshold) {
        return Err(Error::ConstraintViolated {
            ell: params.ell,
            threshold,
        });
    }
    let p = params.exponent();
    let base = 2f64.powf(p) - params.ell.powf(p) / params.rate_constant();
    Ok(base.powf(1.0 / p) - 1.0)
}

/// Step of the central difference used by [`phi_table`], relative to the
/// smaller of `s` and the distance `T - s` to the divergence time.
pub const PHI_FD_STEP: f64 = 1e-5;

/// One sample of the comparison function with its ODE residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiSample {
    pub s: f64,
    pub phi: f64,
    pub ode_rhs: f64,
    /// `|(Φ(s+δ) - Φ(s-δ))/2δ - rhs| / rhs` .
    pub residual: f64,
}

/// Samples `Φ` at `samples` equispaced points `1 + (T-1) k / samples` of
/// `[1, T)` and returns them with `T`.
pub fn phi_table(params: &ComparisonParams, samples: usize) -> Result<(Vec<PhiSample>, f64)> {
    let t_bound = blowup_time_bound(params)?;
    let p = params.exponent();
    // the closed form extends smoothly below s = 1, which the stencil needs
    let phi = |s: f64| params.ell * params.normalized_bracket(s).powf(1.0 / p);
    let rows = (0..samples)
        .map(|k| {
            let s = 1.0 + (t_bound - 1.0) * k as f64 / samples as f64;
            let value = phi(s);
            let rhs = params.ode_rhs(s, value);
            let delta = PHI_FD_STEP * s.min(t_bound - s);
            let fd = (phi(s + delta) - phi(s - delta)) / (2.0 * delta);
            PhiSample {
                s,
                phi: value,
                ode_rhs: rhs,
                residual: (fd - rhs).abs() / rhs.abs(),
            }
        })
        .collect();
    Ok((rows, t_bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityMonitorConfig {
    pub theta: f64,
    pub c_user: f64,
    pub m_tilde: f64,
    pub a: f64,
}

impl InequalityMonitorConfig {
    /// `θ = max{(n+3)/(n+4), 1 - 1/(2κ - n)}`.
    pub fn default_theta(dim: usize, kappa: f64) -> f64 {
        let n = dim as f64;
        ((n + 3.0) / (n + 4.0)).max(1.0 - 1.0 / (2.0 * kappa - n))
    }

    pub fn with_defaults(dim: usize, kappa: f64) -> Self {
        Self {
            theta: Self::default_theta(dim, kappa),
            c_user: 1.0,
            m_tilde: 1.0,
            a: 1.0,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.theta > 0.0 && self.theta < 1.0) {
            v.push(format!("theta must lie in (0, 1) (got {})", self.theta));
        }
        if !(self.c_user > 0.0) {
            v.push(format!("c_user must be positive (got {})", self.c_user));
        }
        if !(self.m_tilde > 0.0) {
            v.push(format!("m_tilde must be positive (got {})", self.m_tilde));
        }
        if !(self.a > 0.0) {
            v.push(format!("a must be positive (got {})", self.a));
        }
        v
    }

    pub fn comparison(&self, ell: f64) -> ComparisonParams {
        ComparisonParams {
            ell,
            c_user: self.c_user,
            theta: self.theta,
            m_tilde: self.m_tilde,
            a: self.a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityPoint {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `∫_0^s ∫uv` against `C (m̃+A+1)² (1+s) (F(0) + ∫uv - ∫u ln u + 1)^θ` at
/// every record time. `F(0)` is the energy of the first record. A ratio below
/// one is only meaningful for the true (non-explicit) constant.
pub fn inequality_ratio(records: &[EnergyRecord], cfg: &InequalityMonitorConfig) -> Vec<InequalityPoint> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let f0 = first.energy;
    let scale = cfg.c_user * (cfg.m_tilde + cfg.a + 1.0).powi(2);
    let mut lhs = 0.0;
    let mut prev: Option<&EnergyRecord> = None;
    records
        .iter()
        .map(|rec| {
            if let Some(p) = prev {
                lhs += 0.5 * (rec.t - p.t) * (rec.cross_uv + p.cross_uv);
            }
            prev = Some(rec);
            let base = (f0 + rec.cross_uv - rec.entropy + 1.0).max(0.0);
            let rhs = scale * (1.0 + rec.t) * base.powf(cfg.theta);
            let ratio = if lhs == 0.0 {
                0.0
            } else if rhs > 0.0 {
                lhs / rhs
            } else {
                f64::INFINITY
            };
            InequalityPoint {
                t: rec.t,
                lhs,
                rhs,
                ratio,
            }
        })
        .collect()
}
