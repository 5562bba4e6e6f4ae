//! Simulates one configuration and prints a short trace.
//!
//! `cargo run --example simulate -- examples/configs/relaxation.json`

use radial_chemotaxis::config::RunConfig;
use radial_chemotaxis::stepper::{run_with, RunDiagnostics};

const DEFAULT: &str = r#"{"dim": 5, "radius": 1, "cells": 256, "horizon": 1,
    "perturbation": 0.5, "stride": 20}"#;

fn main() -> radial_chemotaxis::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => RunConfig::load(path.as_ref())?,
        None => RunConfig::parse(DEFAULT)?,
    };
    let diag = RunDiagnostics {
        functional: cfg.functional(),
        ell: cfg.ell,
    };
    let mut records = Vec::new();
    let summary = run_with(&cfg.model(), cfg.initial_state()?, &cfg.stepper(), &diag, &mut records)?;
    println!("{:>10} {:>10} {:>14} {:>12}", "t", "dt", "F", "sup u");
    for r in &records {
        println!("{:>10.4} {:>10.2e} {:>14.6} {:>12.6}", r.t, r.dt, r.energy, r.sup_u);
    }
    println!(
        "{} after {} steps: {}",
        summary.verdict.kind, summary.accepted_steps, summary.verdict.reason
    );
    Ok(())
}
