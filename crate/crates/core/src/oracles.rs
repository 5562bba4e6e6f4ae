//! Reference values computed independently of the simulation grid.
//!
//! The closed forms here are used by tests as ground truth. Quadrature
//! references use a plain midpoint rule in `r` with the weight
//! `ω_n r^{n-1}`, which shares no code with the finite-volume weights.
//!
//! Minted constants live in `data/oracle_constants.txt`, one
//! `name value provenance` record per line; [`recompute_constant`]
//! reproduces each of them from scratch.

use crate::error::{Error, Result};
use crate::grid::{ball_volume, unit_sphere_area};
use crate::initial_data::MollifierSpec;

/// Smallest resolution accepted by [`fine_quadrature`].
pub const FINE_CELLS: usize = 1 << 16;

/// Relative drift tolerated between the constants file and a recomputation.
pub const CONSTANT_DRIFT: f64 = 1e-6;

/// The checked-in constants file.
pub const CONSTANTS_FILE: &str = include_str!("../data/oracle_constants.txt");

/// `∫w(t)` for the `w`-equation integrated over the ball.
pub fn exact_w_mass(t: f64, mass_u0: f64, mass_w0: f64) -> f64 {
    let decay = (-t).exp();
    decay * mass_w0 + (1.0 - decay) * mass_u0
}

/// Upper envelope for `∫v(t)`: the largest of the three initial masses.
pub fn exact_v_mass_bound(masses: [f64; 3]) -> f64 {
    masses.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Energy of the spatially constant triple `(a, b, c)` on a domain of
/// volume `volume`.
pub fn constant_state_energy(volume: f64, tau: f64, (a, b, c): (f64, f64, f64)) -> f64 {
    let entropy = if a > 0.0 { a * a.ln() } else { 0.0 };
    let f = c - b;
    volume * (entropy - a * b + 0.5 * tau * f * f + 0.5 * b * b)
}

/// Midpoint rule for `∫_{B_R} f(|x|) dx` with `cells` radial intervals.
///
/// Fails when `cells < FINE_CELLS`.
pub fn fine_quadrature(f: impl Fn(f64) -> f64, dim: usize, radius: f64, cells: usize) -> Result<f64> {
    if cells < FINE_CELLS {
        return Err(Error::Config(format!(
            "reference quadrature needs at least {FINE_CELLS} cells (got {cells})"
        )));
    }
    let h = radius / cells as f64;
    let p = dim as i32 - 1;
    let sum: f64 = (0..cells)
        .map(|i| {
            let r = (i as f64 + 0.5) * h;
            f(r) * r.powi(p)
        })
        .sum();
    Ok(unit_sphere_area(dim) * sum * h)
}

/// One record of the constants file.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConstant {
    pub name: String,
    pub value: f64,
    pub provenance: String,
}

/// Parses `name value provenance` records. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_constants(text: &str) -> Result<Vec<OracleConstant>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(3, char::is_whitespace);
        let name = parts.next().unwrap_or_default();
        let value = parts.next().ok_or_else(|| Error::Parse {
            line: k + 1,
            column: name.len() + 1,
            message: "missing value".into(),
        })?;
        let value: f64 = value.parse().map_err(|_| Error::Parse {
            line: k + 1,
            column: name.len() + 2,
            message: format!("not a number: {value}"),
        })?;
        out.push(OracleConstant {
            name: name.to_string(),
            value,
            provenance: parts.next().unwrap_or("").trim().to_string(),
        });
    }
    Ok(out)
}

/// Looks up a constant of the checked-in file.
pub fn reference_constant(name: &str) -> Option<f64> {
    parse_constants(CONSTANTS_FILE)
        .ok()?
        .into_iter()
        .find(|c| c.name == name)
        .map(|c| c.value)
}

/// Resolution of the recomputations, 16 times the largest grid used by
/// the suite.
const REFERENCE_CELLS: usize = 1 << 17;

/// Recomputes a named constant of the file from first principles.
pub fn recompute_constant(name: &str) -> Result<f64> {
    let phi = MollifierSpec::new(5);
    let q = |f: &dyn Fn(f64) -> f64| fine_quadrature(f, 5, 1.0, REFERENCE_CELLS);
    match name {
        "ball_volume_n5_r1" => q(&|_| 1.0),
        "ball_volume_closed_n5_r1" => Ok(ball_volume(5, 1.0)),
        "r4_moment_n5_r1" => q(&|r| r.powi(4)),
        "bump_normalization_n5" => Ok(phi.normalization),
        "bump_mass_n5" => q(&|r| phi.value(r)),
        "bump_l2_sq_n5" => q(&|r| phi.value(r).powi(2)),
        "bump_grad_sq_n5" => q(&|r| phi.derivative(r).powi(2)),
        "bump_lap_sq_n5" => q(&|r| phi.laplacian(r).powi(2)),
        "bump_w22_n5" => {
            let a = q(&|r| phi.value(r).powi(2))?;
            let b = q(&|r| phi.derivative(r).powi(2))?;
            let c = q(&|r| phi.laplacian(r).powi(2))?;
            Ok((a + b + c).sqrt())
        }
        _ => Err(Error::Config(format!("unknown oracle constant {name}"))),
    }
}
