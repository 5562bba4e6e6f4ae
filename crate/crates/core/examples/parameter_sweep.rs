//! Runs a small grid of base signal levels and resolutions into a scratch
//! directory and prints the summary.

use radial_chemotaxis::config::RunConfig;
use radial_chemotaxis::runner::cmd_sweep;

fn main() -> radial_chemotaxis::Result<()> {
    let cfg = RunConfig::parse(
        r#"{"dim": 5, "radius": 1, "cells": 64, "horizon": 0.5, "perturbation": 0.4,
            "sweep": [{"field": "base_v", "values": [0.5, 1, 2]},
                      {"field": "cells", "values": [64, 128]}]}"#,
    )?;
    let out = std::env::temp_dir().join("radial_chemotaxis_sweep");
    let rows = cmd_sweep(&cfg, &out, 4, false)?;
    for r in rows {
        println!("{:?} -> {} F_end = {:.6} sup u = {:.6}", r.point, r.verdict, r.final_energy, r.sup_u_end);
    }
    println!("outputs in {}", out.display());
    Ok(())
}
