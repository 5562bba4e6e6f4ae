//! Compares the discrete masses against the exact mass laws.

use radial_chemotaxis::config::RunConfig;
use radial_chemotaxis::oracles::{exact_v_mass_bound, exact_w_mass};
use radial_chemotaxis::stepper::{run_with, RunDiagnostics};

fn main() -> radial_chemotaxis::Result<()> {
    let cfg = RunConfig::parse(
        r#"{"dim": 5, "radius": 1, "cells": 512, "horizon": 2, "stride": 100,
            "base_u": 1, "base_v": 0.5, "base_w": 3, "perturbation": 0.5, "fixed_dt": 1e-3}"#,
    )?;
    let diag = RunDiagnostics {
        functional: cfg.functional(),
        ell: cfg.ell,
    };
    let mut recs = Vec::new();
    run_with(&cfg.model(), cfg.initial_state()?, &cfg.stepper(), &diag, &mut recs)?;
    let first = &recs[0];
    let bound = exact_v_mass_bound([first.mass_u, first.mass_v, first.mass_w]);
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "u drift", "w error", "v mass", "v bound");
    for r in &recs {
        let w = exact_w_mass(r.t, first.mass_u, first.mass_w);
        println!(
            "{:>6.2} {:>12.2e} {:>12.2e} {:>12.6} {:>12.6}",
            r.t,
            (r.mass_u - first.mass_u) / first.mass_u,
            r.mass_w - w,
            r.mass_v,
            bound
        );
    }
    Ok(())
}
