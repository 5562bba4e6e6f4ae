//! Flat JSON run configuration.
//!
//! ```json
//! { "dim": 5, "radius": 1.0, "cells": 1024, "horizon": 1.0 }
//! ```
//!
//! is a complete configuration; every other key has a default. Parsing
//! reports the location of malformed input, validation reports every
//! violated constraint at once.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::blowup::{ComparisonParams, InequalityMonitorConfig};
use crate::error::{Error, Result};
use crate::functionals::FunctionalConfig;
use crate::grid::{build_grid, RadialField, RadialGrid, MIN_CELLS};
use crate::initial_data::{eta_star, synth_family, FamilyParams, MIN_CELLS_PER_ETA};
use crate::model::{initial_state, ModelParams, SolutionState, DEFAULT_U_FLOOR};
use crate::stepper::StepperConfig;

/// One axis of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub field: String,
    pub values: Vec<f64>,
}

/// Keys a sweep may vary.
pub const SWEEP_FIELDS: &[&str] = &[
    "radius",
    "cells",
    "horizon",
    "tau",
    "eps",
    "cfl",
    "dt_max",
    "kappa",
    "base_u",
    "base_v",
    "base_w",
    "perturbation",
    "gamma",
    "eta",
    "ell",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub radius: f64,
    pub cells: usize,
    pub horizon: f64,

    #[serde(default = "one")]
    pub tau: u8,
    #[serde(default = "one")]
    pub eps: u8,
    #[serde(default = "default_u_floor")]
    pub u_floor: f64,

    #[serde(default = "defaults::cfl")]
    pub cfl: f64,
    #[serde(default = "defaults::dt_min")]
    pub dt_min: f64,
    #[serde(default = "defaults::dt_max")]
    pub dt_max: f64,
    #[serde(default = "defaults::growth")]
    pub growth: f64,
    #[serde(default = "defaults::blowup_factor")]
    pub blowup_factor: f64,
    #[serde(default = "defaults::stride")]
    pub stride: usize,
    #[serde(default = "defaults::max_sup_growth")]
    pub max_sup_growth: f64,
    #[serde(default)]
    pub fixed_dt: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,

    /// Defaults to `dim - 1`.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub general_form: bool,

    /// Constant base triple; `u_0 = base_u (1 + perturbation cos(π r / R))`.
    #[serde(default = "unit")]
    pub base_u: f64,
    #[serde(default = "unit")]
    pub base_v: f64,
    #[serde(default = "unit")]
    pub base_w: f64,
    #[serde(default)]
    pub perturbation: f64,

    /// Concentration scale of the low-energy family; absent means the
    /// base triple alone.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "unit")]
    pub gamma: f64,
    /// Ladder evaluated by `synth-ic`.
    #[serde(default)]
    pub etas: Vec<f64>,

    /// `ℓ` of the `Ψ` accumulator and of the comparison function.
    #[serde(default = "defaults::ell")]
    pub ell: f64,
    /// Emit the inequality-ratio series and enforce the `ℓ` constraint.
    #[serde(default)]
    pub monitor: bool,
    /// Defaults to `max{(n+3)/(n+4), 1 - 1/(2κ-n)}`.
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "unit")]
    pub c_user: f64,
    #[serde(default = "unit")]
    pub m_tilde: f64,
    #[serde(default = "unit")]
    pub a: f64,
    #[serde(default = "defaults::phi_samples")]
    pub phi_samples: usize,

    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one() -> u8 {
    1
}

fn unit() -> f64 {
    1.0
}

fn default_u_floor() -> f64 {
    DEFAULT_U_FLOOR
}

mod defaults {
    use crate::stepper::StepperConfig;

    pub fn cfl() -> f64 {
        StepperConfig::default().cfl
    }
    pub fn dt_min() -> f64 {
        StepperConfig::default().dt_min
    }
    pub fn dt_max() -> f64 {
        StepperConfig::default().dt_max
    }
    pub fn growth() -> f64 {
        StepperConfig::default().growth
    }
    pub fn blowup_factor() -> f64 {
        StepperConfig::default().blowup_factor
    }
    pub fn stride() -> usize {
        StepperConfig::default().record_stride
    }
    pub fn max_sup_growth() -> f64 {
        StepperConfig::default().max_sup_growth
    }
    pub fn ell() -> f64 {
        2.0
    }
    pub fn phi_samples() -> usize {
        100
    }
}

impl RunConfig {
    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn model(&self) -> ModelParams {
        ModelParams {
            dim: self.dim,
            radius: self.radius,
            tau: self.tau,
            eps: self.eps,
            u_floor: self.u_floor,
        }
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            cfl: self.cfl,
            dt_min: self.dt_min,
            dt_max: self.dt_max,
            growth: self.growth,
            horizon: self.horizon,
            blowup_factor: self.blowup_factor,
            record_stride: self.stride,
            max_sup_growth: self.max_sup_growth,
            fixed_dt: self.fixed_dt,
            max_steps: self.max_steps,
        }
    }

    pub fn functional(&self) -> FunctionalConfig {
        FunctionalConfig {
            kappa: self.kappa.unwrap_or(self.dim as f64 - 1.0),
            general_form: self.general_form,
        }
    }

    pub fn inequality_monitor(&self) -> InequalityMonitorConfig {
        let kappa = self.functional().kappa;
        InequalityMonitorConfig {
            theta: self
                .theta
                .unwrap_or_else(|| InequalityMonitorConfig::default_theta(self.dim, kappa)),
            c_user: self.c_user,
            m_tilde: self.m_tilde,
            a: self.a,
        }
    }

    pub fn comparison(&self) -> ComparisonParams {
        self.inequality_monitor().comparison(self.ell)
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>> {
        build_grid(self.dim, self.radius, self.cells)
    }

    /// The base triple sampled on `grid`.
    pub fn base_fields(&self, grid: &Arc<RadialGrid>) -> (RadialField, RadialField, RadialField) {
        let (bu, p, r) = (self.base_u, self.perturbation, self.radius);
        (
            RadialField::from_fn(grid.clone(), |x| bu * (1.0 + p * (PI * x / r).cos())),
            RadialField::constant(grid.clone(), self.base_v),
            RadialField::constant(grid.clone(), self.base_w),
        )
    }

    /// Initial state: the base triple, plus the concentrated family when
    /// `eta` is set.
    pub fn initial_state(&self) -> Result<SolutionState> {
        let grid = self.grid()?;
        let base = self.base_fields(&grid);
        let (u, v, w) = match self.eta {
            Some(eta) => synth_family(
                &grid,
                &FamilyParams {
                    gamma: self.gamma,
                    eta,
                    base,
                },
            )?,
            None => base,
        };
        initial_state(&self.model(), &grid, u, v, w)
    }

    pub fn violations(&self) -> Vec<String> {
        let model = self.model();
        let mut v = model.violations();
        if self.cells < MIN_CELLS {
            v.push(format!("cells must be at least {MIN_CELLS} (got {})", self.cells));
        }
        v.extend(self.stepper().violations());
        v.extend(self.functional().violations(self.dim));

        for (name, x) in [
            ("base_u", self.base_u),
            ("base_v", self.base_v),
            ("base_w", self.base_w),
        ] {
            if !(x >= 0.0 && x.is_finite()) {
                v.push(format!("{name} must be a nonnegative number (got {x})"));
            }
        }
        if !(self.perturbation.abs() <= 1.0) {
            v.push(format!(
                "perturbation must lie in [-1, 1] (got {})",
                self.perturbation
            ));
        }

        let star = eta_star(self.radius);
        let resolved = |eta: f64| {
            RadialGrid::new(self.dim, self.radius, self.cells)
                .map(|g| g.cells_within(eta))
                .unwrap_or(usize::MAX)
        };
        let check_eta = |eta: f64, v: &mut Vec<String>| {
            if !(eta > 0.0 && eta < star) {
                v.push(format!("eta must lie in (0, {star}) (got {eta})"));
            } else if resolved(eta) < MIN_CELLS_PER_ETA {
                v.push(format!(
                    "eta = {eta} is resolved by {} cells; need at least {MIN_CELLS_PER_ETA}",
                    resolved(eta)
                ));
            }
        };
        let concentrated = self.eta.is_some() || !self.etas.is_empty();
        if concentrated && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            v.push(format!("gamma must be positive (got {})", self.gamma));
        }
        if let Some(eta) = self.eta {
            check_eta(eta, &mut v);
        }
        for &eta in &self.etas {
            check_eta(eta, &mut v);
        }
        if self.etas.windows(2).any(|p| !(p[1] < p[0])) {
            v.push("etas must be strictly decreasing".to_string());
        }

        if !(self.ell > 1.0 && self.ell.is_finite()) {
            v.push(format!("ell must exceed 1 (got {})", self.ell));
        }
        if self.monitor {
            let mon = self.inequality_monitor();
            v.extend(mon.violations());
            if mon.violations().is_empty() {
                let threshold = mon.comparison(self.ell).ell_threshold();
                if !(self.ell > threshold) {
                    v.push(format!(
                        "ell must exceed 2 C^(1/(1-theta)) (m_tilde + a + 1)^(2/(1-theta)) + 1 = {threshold} (got {})",
                        self.ell
                    ));
                }
            }
        }
        if self.phi_samples == 0 {
            v.push("phi_samples must be at least 1".to_string());
        }

        let mut seen = HashSet::new();
        for axis in &self.sweep {
            if !SWEEP_FIELDS.contains(&axis.field.as_str()) {
                v.push(format!("sweep field {} is not sweepable", axis.field));
            }
            if !seen.insert(axis.field.as_str()) {
                v.push(format!("sweep field {} appears twice", axis.field));
            }
            if axis.values.is_empty() {
                v.push(format!("sweep field {} has no values", axis.field));
            }
            let mut bits = HashSet::new();
            for x in &axis.values {
                if !bits.insert(x.to_bits()) {
                    v.push(format!("sweep field {} repeats the value {x}", axis.field));
                }
            }
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

    /// Copy with `field` set to `value`, without validation.
    pub fn with_field(&self, field: &str, value: f64) -> Result<Self> {
        let mut doc = serde_json::to_value(self).expect("configuration serializes");
        let number = if value.fract() == 0.0 && value.abs() < 9e15 {
            Value::from(value as i64)
        } else {
            Value::from(value)
        };
        match doc.get_mut(field) {
            Some(slot) => *slot = number,
            None => {
                return Err(Error::Validation(vec![format!("unknown field {field}")]));
            }
        }
        let mut cfg: RunConfig = serde_json::from_value(doc)
            .map_err(|e| Error::Validation(vec![format!("{field} = {value}: {e}")]))?;
        cfg.sweep.clear();
        Ok(cfg)
    }

    /// Points of the sweep grid in enumeration order (last axis fastest).
    pub fn sweep_points(&self) -> Vec<Vec<(String, f64)>> {
        let mut points: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for axis in &self.sweep {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push((axis.field.clone(), x));
                        q
                    })
                })
                .collect();
        }
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"dim": 5, "radius": 1, "cells": 1024, "horizon": 1}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.tau, 1);
        assert_eq!(cfg.eps, 1);
        assert_eq!(cfg.stride, 10);
        assert_eq!(cfg.functional().kappa, 4.0);
        assert_eq!(cfg.stepper(), StepperConfig { horizon: 1.0, ..Default::default() });
        let s = cfg.initial_state().unwrap();
        assert_eq!(s.u.len(), 1024);
    }

    #[test]
    fn kappa_at_threshold_is_rejected() {
        let err = RunConfig::parse(r#"{"dim": 5, "radius": 1, "cells": 64, "horizon": 1, "kappa": 3}"#)
            .unwrap_err();
        match err {
            Error::Validation(v) => assert!(v.iter().any(|m| m.contains("kappa must exceed dim-2"))),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn every_violation_is_listed() {
        let err = RunConfig::parse(
            r#"{"dim": 5, "radius": 1, "cells": 8, "horizon": -1, "tau": 2, "cfl": 3}"#,
        )
        .unwrap_err();
        let Error::Validation(v) = err else { panic!() };
        assert!(v.len() >= 4, "{v:?}");
        assert!(v.iter().any(|m| m.starts_with("tau")));
        assert!(v.iter().any(|m| m.starts_with("cells")));
        assert!(v.iter().any(|m| m.starts_with("cfl")));
        assert!(v.iter().any(|m| m.starts_with("horizon")));
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        let err = RunConfig::parse("{\n  \"dim\": 5,\n  \"radius\": ,\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = RunConfig::parse(r#"{"dim": 5, "radius": 1, "cells": 64, "horizon": 1, "bogus": 1}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn eta_guards() {
        let base = r#"{"dim": 5, "radius": 1, "cells": 256, "horizon": 1"#;
        assert!(RunConfig::parse(&format!("{base}, \"eta\": 0.5}}")).is_err());
        assert!(RunConfig::parse(&format!("{base}, \"eta\": 0.0625}}")).is_err());
        assert!(RunConfig::parse(&format!("{base}, \"eta\": 0.25}}")).is_ok());
        assert!(RunConfig::parse(&format!("{base}, \"etas\": [0.25, 0.25]}}")).is_err());
    }

    #[test]
    fn monitor_enforces_the_ell_constraint() {
        let base = r#"{"dim": 5, "radius": 1, "cells": 64, "horizon": 1, "monitor": true, "theta": 0.5, "c_user": 0.1, "m_tilde": 0.1, "a": 0.1"#;
        assert!(RunConfig::parse(&format!("{base}, \"ell\": 1.02}}")).is_err());
        assert!(RunConfig::parse(&format!("{base}, \"ell\": 3}}")).is_ok());
    }

    #[test]
    fn sweep_grid_and_duplicates() {
        let text = r#"{"dim": 5, "radius": 1, "cells": 64, "horizon": 1,
            "sweep": [{"field": "cells", "values": [64, 128]}, {"field": "base_u", "values": [1, 2]}]}"#;
        let cfg = RunConfig::parse(text).unwrap();
        let pts = cfg.sweep_points();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[1], vec![("cells".to_string(), 64.0), ("base_u".to_string(), 2.0)]);
        let p = cfg.with_field("cells", 128.0).unwrap();
        assert_eq!(p.cells, 128);
        assert!(p.sweep.is_empty());

        let dup = text.replace("[64, 128]", "[64, 64]");
        assert!(matches!(RunConfig::parse(&dup), Err(Error::Validation(_))));
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_json()).unwrap(), cfg);
    }
}
