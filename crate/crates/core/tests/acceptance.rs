//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radial_chemotaxis::blowup::{
    blowup_time_bound, phi_bracket_root, phi_closed_form, phi_table, psi_chain_from_record,
    ComparisonParams, PhiValue,
};
use radial_chemotaxis::config::RunConfig;
use radial_chemotaxis::functionals::EnergyRecord;
use radial_chemotaxis::grid::{ball_volume, build_grid, RadialField};
use radial_chemotaxis::initial_data::{energy_divergence_table, FamilyRow};
use radial_chemotaxis::model::{ModelParams, VerdictKind};
use radial_chemotaxis::oracles::{exact_v_mass_bound, exact_w_mass, reference_constant};
use radial_chemotaxis::stepper::{run_with, RunDiagnostics, RunSummary};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Relative slack on `F_{k+1} - F_k` for the monotonicity check.
const ENERGY_SLACK: f64 = 1e-8;

/// Accepted steps whose energy rose by more than the slack.
fn energy_increases(records: &[EnergyRecord]) -> usize {
    records
        .windows(2)
        .filter(|p| p[1].energy - p[0].energy > ENERGY_SLACK * (1.0 + p[0].energy.abs()))
        .count()
}

fn simulate(cfg: &RunConfig) -> (RunSummary, Vec<EnergyRecord>) {
    let state0 = cfg.initial_state().expect("valid initial data");
    let diag = RunDiagnostics {
        functional: cfg.functional(),
        ell: cfg.ell,
    };
    let mut records = Vec::new();
    let summary =
        run_with(&cfg.model(), state0, &cfg.stepper(), &diag, &mut records).expect("run completes");
    (summary, records)
}

fn config(text: &str) -> RunConfig {
    RunConfig::parse(text).expect("valid acceptance configuration")
}

/// Perturbed constants on the unit 5-ball, every step recorded. With
/// `v_0 = w_0` the mean of `Δv - v + w` never changes sign, so the energy has
/// no interior stationary point where an `O(dt²)` step error could show up
/// as an increase.
fn mass_config(fixed_dt: f64) -> RunConfig {
    config(&format!(
        r#"{{"dim": 5, "radius": 1, "cells": 1024, "horizon": 2, "stride": 1,
            "base_u": 1.0, "base_v": 2.0, "base_w": 2.0, "perturbation": 0.5,
            "fixed_dt": {fixed_dt}}}"#
    ))
}

fn record_at(records: &[EnergyRecord], t: f64) -> &EnergyRecord {
    records
        .iter()
        .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
        .unwrap()
}

struct MassRuns {
    coarse: Vec<EnergyRecord>,
    fine: Vec<EnergyRecord>,
    coarse_summary: RunSummary,
    seconds: f64,
}

fn mass_runs() -> MassRuns {
    let start = Instant::now();
    let (coarse_summary, coarse) = simulate(&mass_config(1e-3));
    let seconds = start.elapsed().as_secs_f64();
    let (_, fine) = simulate(&mass_config(5e-4));
    MassRuns {
        coarse,
        fine,
        coarse_summary,
        seconds,
    }
}

fn criterion_1(runs: &MassRuns) -> Outcome {
    let mut worst: f64 = 0.0;
    for recs in [&runs.coarse, &runs.fine] {
        let m0 = recs[0].mass_u;
        for r in recs.iter() {
            worst = worst.max((r.mass_u - m0).abs() / m0);
        }
    }
    let reached = runs.coarse_summary.verdict.kind == VerdictKind::GlobalWithinHorizon;
    outcome(
        worst <= 1e-10 && runs.seconds <= 30.0 && reached,
        format!(
            "max relative drift of the u-mass {worst:.2e} (limit 1e-10), {} steps to t = 2 in {:.1} s (limit 30 s)",
            runs.coarse_summary.accepted_steps, runs.seconds
        ),
    )
}

fn criterion_2(runs: &MassRuns) -> Outcome {
    let (mu, mw) = (runs.coarse[0].mass_u, runs.coarse[0].mass_w);
    let scale = mu + mw;
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        let exact = exact_w_mass(t, mu, mw);
        let c = record_at(&runs.coarse, t);
        let f = record_at(&runs.fine, t);
        let (rc, rf) = ((c.mass_w - exact).abs(), (f.mass_w - exact).abs());
        let ratio = rc / rf;
        let ok = rc <= 1e-3 * scale && (1.7..=2.3).contains(&ratio);
        pass &= ok && (c.t - t).abs() < 1e-9 && (f.t - t).abs() < 1e-9;
        parts.push(format!("t={t}: residual {rc:.2e} (limit {:.2e}), halving ratio {ratio:.3}", 1e-3 * scale));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_3(runs: &MassRuns) -> Outcome {
    let r0 = &runs.coarse[0];
    let bound = exact_v_mass_bound([r0.mass_u, r0.mass_v, r0.mass_w]);
    let mut excess = f64::NEG_INFINITY;
    for recs in [&runs.coarse, &runs.fine] {
        for r in recs.iter() {
            excess = excess.max(r.mass_v - bound);
        }
    }
    outcome(
        excess <= 1e-6,
        format!("max of (v-mass minus bound {bound:.6}) = {excess:.3e} (limit 1e-6)"),
    )
}

fn energy_config(fixed_dt: f64) -> RunConfig {
    config(&format!(
        r#"{{"dim": 5, "radius": 1, "cells": 128, "horizon": 0.2, "stride": 1,
            "perturbation": 0.5, "base_v": 1.3, "fixed_dt": {fixed_dt}}}"#
    ))
}

/// `Σ |ΔF + dt D|` over the run and the largest per-step ratio
/// `|ΔF + dt D| / dt`.
fn identity_residual(records: &[EnergyRecord]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut worst_rate: f64 = 0.0;
    for p in records.windows(2) {
        let r = (p[1].energy - p[0].energy + p[1].dt * p[1].dissipation).abs();
        sum += r;
        worst_rate = worst_rate.max(r / p[1].dt);
    }
    (sum, worst_rate)
}

fn criterion_4(monotone_runs: &[(&str, &[EnergyRecord])]) -> Outcome {
    let (_, coarse) = simulate(&energy_config(1e-3));
    let (_, fine) = simulate(&energy_config(5e-4));
    let (sum_c, rate_c) = identity_residual(&coarse);
    let (sum_f, rate_f) = identity_residual(&fine);
    let ratio = sum_c / sum_f;
    // tol(dt) = K dt with K the worst per-step rate of the coarse run; the
    // refined run must stay below the same line
    let linear = rate_f <= rate_c;
    let mut increases = Vec::new();
    for (name, recs) in monotone_runs
        .iter()
        .copied()
        .chain([("energy dt", coarse.as_slice()), ("energy dt/2", fine.as_slice())])
    {
        let k = energy_increases(recs);
        if k > 0 {
            increases.push(format!("{name}: {k}"));
        }
    }
    outcome(
        (1.7..=2.3).contains(&ratio) && linear && increases.is_empty(),
        format!(
            "cumulative residual {sum_c:.3e} -> {sum_f:.3e}, ratio {ratio:.3} (range [1.7, 2.3]); per-step residual/dt {rate_c:.3e} -> {rate_f:.3e}; energy increases beyond slack: {}",
            if increases.is_empty() { "none".to_string() } else { increases.join(", ") }
        ),
    )
}

const LADDER: [f64; 3] = [0.25, 0.125, 0.0625];

fn family_rows() -> (Vec<FamilyRow>, f64) {
    let start = Instant::now();
    let p = ModelParams::fully_parabolic(5, 1.0);
    let g = build_grid(5, 1.0, 2048).unwrap();
    let z = RadialField::zeros(g.clone());
    let rows = energy_divergence_table(&p, &g, 1.0, &(z.clone(), z.clone(), z), &LADDER).unwrap();
    (rows, start.elapsed().as_secs_f64())
}

fn strictly_decreasing(xs: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = xs.collect();
    v.windows(2).all(|p| p[1] < p[0])
}

fn criterion_5(rows: &[FamilyRow], seconds: f64) -> Outcome {
    let l2 = reference_constant("bump_l2_sq_n5").expect("constant present");
    let worst = rows
        .iter()
        .map(|r| ((r.cross_uv - (1.0 / r.eta).ln() * l2) / ((1.0 / r.eta).ln() * l2)).abs())
        .fold(0.0, f64::max);
    let decreasing = strictly_decreasing(rows.iter().map(|r| r.energy));
    let f: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.energy)).collect();
    outcome(
        decreasing && worst <= 1e-3 && seconds <= 10.0,
        format!(
            "F down the ladder [{}], cross term relative error {worst:.2e} (limit 1e-3), {seconds:.2} s",
            f.join(", ")
        ),
    )
}

fn criterion_6(rows: &[FamilyRow]) -> Outcome {
    let w22 = reference_constant("bump_w22_n5").expect("constant present");
    let l1_dec = strictly_decreasing(rows.iter().map(|r| r.l1_dist_u));
    let w_dec = strictly_decreasing(rows.iter().map(|r| r.w22_dist_v));
    let bounded = rows.iter().all(|r| r.w22_dist_v <= w22 / (1.0 / r.eta).ln());
    let l1: Vec<String> = rows.iter().map(|r| format!("{:.4e}", r.l1_dist_u)).collect();
    let w: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.4} <= {:.4}", r.w22_dist_v, w22 / (1.0 / r.eta).ln()))
        .collect();
    outcome(
        l1_dec && w_dec && bounded,
        format!("L1 distance [{}]; W22 distance [{}]", l1.join(", "), w.join(", ")),
    )
}

/// Concentrated family on a large constant base: the base mass makes the
/// energy strongly negative and the constant state unstable.
fn blowup_config(cells: usize) -> RunConfig {
    config(&format!(
        r#"{{"dim": 5, "radius": 1, "cells": {cells}, "horizon": 5, "stride": 1,
            "base_u": 5000, "base_v": 5000, "base_w": 5000,
            "eta": 0.0625, "gamma": 1, "max_steps": 200000}}"#
    ))
}

struct BlowupRuns {
    runs: Vec<(usize, RunSummary, Vec<EnergyRecord>, f64)>,
}

fn blowup_runs() -> BlowupRuns {
    let runs = [1024, 2048]
        .into_iter()
        .map(|n| {
            let start = Instant::now();
            let (s, r) = simulate(&blowup_config(n));
            (n, s, r, start.elapsed().as_secs_f64())
        })
        .collect();
    BlowupRuns { runs }
}

fn criterion_7(b: &BlowupRuns) -> Outcome {
    let threshold = -(2.0 + ball_volume(5, 1.0) / std::f64::consts::E);
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, s, recs, secs) in &b.runs {
        let f0 = recs[0].energy;
        let last = recs.last().unwrap();
        pass &= s.verdict.kind == VerdictKind::BlowupIndicated && f0 < threshold && *secs <= 600.0;
        parts.push(format!(
            "N={n}: F(0) = {f0:.4e}, verdict {} after {} steps (t = {:.6}, dt = {:.2e}, sup u / sup u0 = {:.2e}, {secs:.0} s)",
            s.verdict.kind,
            s.accepted_steps,
            last.t,
            last.dt,
            last.sup_u / recs[0].sup_u
        ));
    }
    let same = b.runs.windows(2).all(|p| p[0].1.verdict.kind == p[1].1.verdict.kind);
    parts.push(format!("verdicts agree: {same}"));
    outcome(pass && same, parts.join("; "))
}

fn criterion_8(b: &BlowupRuns) -> Outcome {
    let ell = 2.0;
    let mut violations = 0usize;
    let mut count = 0usize;
    let mut worst: f64 = f64::INFINITY;
    for (_, _, recs, _) in &b.runs {
        let f0 = recs[0].energy;
        for r in recs {
            let c = psi_chain_from_record(r, f0, ell);
            let slack = 1e-6 * (1.0 + c.psi_prime.abs().max(c.energy_drop.abs()));
            count += 1;
            let first = c.psi_prime >= c.energy_drop - slack;
            let second = c.energy_drop >= ell - 1e-6 * (1.0 + ell);
            if !(first && second) {
                violations += 1;
            }
            worst = worst.min(c.energy_drop - ell);
        }
    }
    outcome(
        violations == 0,
        format!("{count} records, {violations} chain violations, min(F0 - F + l - l) = {worst:.3e}"),
    )
}

fn random_comparison(rng: &mut ChaCha8Rng) -> ComparisonParams {
    let mut p = ComparisonParams {
        ell: 0.0,
        c_user: rng.gen_range(0.05..3.0),
        theta: rng.gen_range(0.3..0.95),
        m_tilde: rng.gen_range(0.05..3.0),
        a: rng.gen_range(0.05..3.0),
    };
    p.ell = rng.gen_range(1.01..10.0) * p.ell_threshold();
    p
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20261015);
    let (mut phi_one, mut worst_res, mut worst_root) = (true, 0.0f64, 0.0f64);
    let mut tuples = 0;
    while tuples < 100 {
        let p = random_comparison(&mut rng);
        let Ok(t) = blowup_time_bound(&p) else {
            continue;
        };
        if !t.is_finite() {
            continue;
        }
        tuples += 1;
        phi_one &= phi_closed_form(1.0, &p).unwrap() == PhiValue::Finite(p.ell);
        let (rows, _) = phi_table(&p, 100).unwrap();
        worst_res = rows.iter().map(|r| r.residual).fold(worst_res, f64::max);
        let root = phi_bracket_root(&p, 2.0 * t + 2.0).unwrap().unwrap_or(f64::NAN);
        worst_root = worst_root.max(((root - t) / t).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        phi_one && worst_res <= 1e-6 && worst_root <= 1e-9 && secs <= 1.0,
        format!(
            "Phi(1) = l exactly: {phi_one}; worst ODE residual {worst_res:.2e} (limit 1e-6); worst root vs T {worst_root:.2e} (limit 1e-9); {tuples} tuples in {secs:.3} s"
        ),
    )
}

fn criterion_10() -> Outcome {
    let g = build_grid(5, 1.0, 16).unwrap();
    let vol = ball_volume(5, 1.0);
    let vol_err = (g.quad_weights().iter().sum::<f64>() - vol).abs() / vol;
    let one = RadialField::constant(g.clone(), 1.0);
    let one_err = (one.integrate() - vol).abs() / vol;

    let g = build_grid(5, 1.0, 256).unwrap();
    let r2 = RadialField::from_fn(g.clone(), |r| r * r);
    let lap = r2.laplacian();
    // the outermost cell feels the no-flux closure
    let lap_err = lap.values()[..255]
        .iter()
        .map(|x| (x - 10.0).abs())
        .fold(0.0, f64::max);

    let u = RadialField::from_fn(g.clone(), |r| 1.0 + (PI * r).cos().powi(2));
    let v = RadialField::from_fn(g.clone(), |r| (-3.0 * r * r).exp());
    let div = radial_chemotaxis::grid::chemotactic_divergence(&u, &v).unwrap();
    let flux_sum = div.integrate().abs();
    let scale: f64 = g
        .quad_weights()
        .iter()
        .zip(div.values())
        .map(|(w, d)| (w * d).abs())
        .sum();

    let pass = vol_err <= 1e-12 && one_err <= 1e-12 && lap_err <= 1e-10 && flux_sum <= 1e-12 * scale;
    outcome(
        pass,
        format!(
            "N=16 ball volume error {vol_err:.1e}, integral of 1 error {one_err:.1e}; Laplacian of r^2 off 2n by {lap_err:.1e}; flux sum {flux_sum:.1e} against scale {scale:.2e}"
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();

    let mass = mass_runs();
    results.push((1, "mass conservation", criterion_1(&mass)));
    results.push((2, "exact w-mass law", criterion_2(&mass)));
    results.push((3, "v-mass bound", criterion_3(&mass)));

    let (rows, secs) = family_rows();
    let blow = blowup_runs();
    let monotone: Vec<(String, &[EnergyRecord])> = vec![
        ("mass dt".into(), mass.coarse.as_slice()),
        ("mass dt/2".into(), mass.fine.as_slice()),
    ]
    .into_iter()
    .chain(
        blow.runs
            .iter()
            .map(|(n, _, r, _)| (format!("blowup N={n}"), r.as_slice())),
    )
    .collect();
    let monotone: Vec<(&str, &[EnergyRecord])> =
        monotone.iter().map(|(n, r)| (n.as_str(), *r)).collect();
    results.push((4, "energy dissipation identity", criterion_4(&monotone)));
    results.push((5, "initial-data energy divergence", criterion_5(&rows, secs)));
    results.push((6, "L1 and W22 approach", criterion_6(&rows)));
    results.push((7, "blowup indication", criterion_7(&blow)));
    results.push((8, "Psi' chain", criterion_8(&blow)));
    results.push((9, "Phi closed form", criterion_9()));
    results.push((10, "discretization oracles", criterion_10()));

    let mut failed = 0;
    for (k, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("[{tag}] criterion {k:>2} {name}: {}", o.detail);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.0} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
