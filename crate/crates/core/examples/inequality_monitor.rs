//! Evaluates the integral inequality ratio along a run.

use radial_chemotaxis::blowup::inequality_ratio;
use radial_chemotaxis::config::RunConfig;
use radial_chemotaxis::stepper::{run_with, RunDiagnostics};

fn main() -> radial_chemotaxis::Result<()> {
    let cfg = RunConfig::parse(
        r#"{"dim": 5, "radius": 1, "cells": 256, "horizon": 1, "stride": 25,
            "perturbation": 0.5, "monitor": true,
            "theta": 0.9, "c_user": 0.2, "m_tilde": 0.1, "a": 0.1, "ell": 4}"#,
    )?;
    let diag = RunDiagnostics {
        functional: cfg.functional(),
        ell: cfg.ell,
    };
    let mut recs = Vec::new();
    run_with(&cfg.model(), cfg.initial_state()?, &cfg.stepper(), &diag, &mut recs)?;
    println!("{:>8} {:>12} {:>12} {:>10}", "t", "lhs", "rhs", "ratio");
    for p in inequality_ratio(&recs, &cfg.inequality_monitor()) {
        println!("{:>8.3} {:>12.5e} {:>12.5e} {:>10.4}", p.t, p.lhs, p.rhs, p.ratio);
    }
    Ok(())
}
