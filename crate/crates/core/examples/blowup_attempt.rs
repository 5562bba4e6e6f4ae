//! Budgeted run from a negative-energy state: a spike on top of a constant
//! state far above the critical mass.
//!
//! `cargo run --release --example blowup_attempt -- 512 20000`

use radial_chemotaxis::config::RunConfig;
use radial_chemotaxis::stepper::{run_with, RunDiagnostics};

fn main() -> radial_chemotaxis::Result<()> {
    let mut args = std::env::args().skip(1);
    let cells: usize = args.next().map_or(512, |a| a.parse().expect("cell count"));
    let budget: usize = args.next().map_or(20_000, |a| a.parse().expect("step budget"));
    let cfg = RunConfig::parse(&format!(
        r#"{{"dim": 5, "radius": 1, "cells": {cells}, "horizon": 5, "stride": 1000,
            "base_u": 5000, "base_v": 5000, "base_w": 5000, "eta": 0.0625,
            "max_steps": {budget}}}"#
    ))?;
    let diag = RunDiagnostics {
        functional: cfg.functional(),
        ell: cfg.ell,
    };
    let mut recs = Vec::new();
    let summary = run_with(&cfg.model(), cfg.initial_state()?, &cfg.stepper(), &diag, &mut recs)?;
    println!("F(0) = {:.4e}", recs[0].energy);
    for r in &recs {
        println!("t = {:.6} dt = {:.2e} sup u = {:.4e}", r.t, r.dt, r.sup_u);
    }
    println!("{}: {}", summary.verdict.kind, summary.verdict.reason);
    Ok(())
}
