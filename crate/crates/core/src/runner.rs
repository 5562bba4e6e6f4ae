//! Run orchestration and persistence: CSV series, verdict files, sweeps
//! and SVG line plots.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::blowup::{inequality_ratio, phi_table};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::functionals::EnergyRecord;
use crate::initial_data::energy_divergence_table;
use crate::model::{RunVerdict, VerdictKind};
use crate::stepper::{run_with, DiagnosticsSink, RunDiagnostics, RunSummary};

/// Column names of `series.csv`, in order.
pub const SERIES_HEADER: &str =
    "t,dt,mass_u,mass_v,mass_w,sup_u,F,D,cross_uv,entropy,weighted_w,weighted_v,psi";

/// Column names of `family.csv`, in order.
pub const FAMILY_HEADER: &str = "eta,F,cross_uv,L1_dist_u,W22_dist_v";

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Streams records to a CSV writer; the header is written on creation.
/// Records are also kept in memory when `keep` is set.
pub struct CsvSink<W: Write> {
    out: W,
    path: PathBuf,
    kept: Option<Vec<EnergyRecord>>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut out: W, path: impl Into<PathBuf>, keep: bool) -> Result<Self> {
        let path = path.into();
        writeln!(out, "{SERIES_HEADER}").map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            out,
            path,
            kept: keep.then(Vec::new),
        })
    }

    pub fn records(&self) -> &[EnergyRecord] {
        self.kept.as_deref().unwrap_or(&[])
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> DiagnosticsSink for CsvSink<W> {
    fn record(&mut self, r: &EnergyRecord) -> Result<()> {
        let row = [
            r.t,
            r.dt,
            r.mass_u,
            r.mass_v,
            r.mass_w,
            r.sup_u,
            r.energy,
            r.dissipation,
            r.cross_uv,
            r.entropy,
            r.weighted_w,
            r.weighted_v,
            r.psi,
        ]
        .map(fmt_num)
        .join(",");
        writeln!(self.out, "{row}").map_err(|e| Error::io(&self.path, e))?;
        if let Some(k) = self.kept.as_mut() {
            k.push(*r);
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn verdict_text(v: &RunVerdict) -> String {
    format!(
        "kind: {}\nt_end: {}\nsup_u_end: {}\nreason: {}\n",
        v.kind,
        fmt_num(v.t_end),
        fmt_num(v.sup_u_end),
        v.reason
    )
}

/// Process exit status of a finished run.
pub fn verdict_exit_code(kind: VerdictKind) -> i32 {
    match kind {
        VerdictKind::Inconclusive => 2,
        _ => 0,
    }
}

/// What `run` produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: RunSummary,
    pub records: Vec<EnergyRecord>,
}

/// Runs the configuration and writes `series.csv`, `verdict.txt`, optional
/// plots and, with the monitor enabled, `inequality.csv` into `out`.
pub fn cmd_run(cfg: &RunConfig, out: &Path, plots: bool) -> Result<RunReport> {
    cfg.validate()?;
    let state0 = cfg.initial_state()?;
    ensure_dir(out)?;
    let series = out.join("series.csv");
    let mut sink = CsvSink::new(create(&series)?, &series, true)?;
    let diag = RunDiagnostics {
        functional: cfg.functional(),
        ell: cfg.ell,
    };
    let summary = run_with(&cfg.model(), state0, &cfg.stepper(), &diag, &mut sink)?;
    let records = sink.records().to_vec();
    write_text(&out.join("verdict.txt"), &verdict_text(&summary.verdict))?;

    if cfg.monitor {
        let path = out.join("inequality.csv");
        let mut w = create(&path)?;
        let io = |e| Error::io(&path, e);
        writeln!(w, "t,lhs,rhs,ratio").map_err(io)?;
        for p in inequality_ratio(&records, &cfg.inequality_monitor()) {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_num(p.t),
                fmt_num(p.lhs),
                fmt_num(p.rhs),
                fmt_num(p.ratio)
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)?;
    }

    if plots {
        let t: Vec<f64> = records.iter().map(|r| r.t).collect();
        let pair = |f: fn(&EnergyRecord) -> f64| -> Vec<(f64, f64)> {
            t.iter().zip(&records).map(|(&t, r)| (t, f(r))).collect()
        };
        let energy = line_plot_svg(
            "energy and dissipation",
            &[("F", pair(|r| r.energy)), ("D", pair(|r| r.dissipation))],
            false,
        );
        write_text(&out.join("energy.svg"), &energy)?;
        let sup = line_plot_svg("sup u", &[("sup u", pair(|r| r.sup_u))], true);
        write_text(&out.join("supnorm.svg"), &sup)?;
    }
    Ok(RunReport { summary, records })
}

/// Writes `family.csv` for the `etas` ladder of the configuration.
pub fn cmd_synth_ic(cfg: &RunConfig, out: &Path) -> Result<Vec<crate::initial_data::FamilyRow>> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let base = cfg.base_fields(&grid);
    let rows = energy_divergence_table(&cfg.model(), &grid, cfg.gamma, &base, &cfg.etas)?;
    ensure_dir(out)?;
    let path = out.join("family.csv");
    let mut w = create(&path)?;
    let io = |e| Error::io(&path, e);
    writeln!(w, "{FAMILY_HEADER}").map_err(io)?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_num(r.eta),
            fmt_num(r.energy),
            fmt_num(r.cross_uv),
            fmt_num(r.l1_dist_u),
            fmt_num(r.w22_dist_v)
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(rows)
}

/// Writes `phi_table.csv`: sample rows `sample,s,Φ(s),residual` on `[1, T)`
/// and a final `bound,T,inf,` row.
pub fn cmd_phi_table(cfg: &RunConfig, out: &Path) -> Result<f64> {
    cfg.validate()?;
    let (rows, t_bound) = phi_table(&cfg.comparison(), cfg.phi_samples)?;
    ensure_dir(out)?;
    let path = out.join("phi_table.csv");
    let mut w = create(&path)?;
    let io = |e| Error::io(&path, e);
    writeln!(w, "kind,s,phi,ode_residual").map_err(io)?;
    for r in &rows {
        writeln!(
            w,
            "sample,{},{},{}",
            fmt_num(r.s),
            fmt_num(r.phi),
            fmt_num(r.residual)
        )
        .map_err(io)?;
    }
    writeln!(w, "bound,{},inf,", fmt_num(t_bound)).map_err(io)?;
    w.flush().map_err(io)?;
    Ok(t_bound)
}

/// One row of `sweep_summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: Vec<(String, f64)>,
    pub verdict: VerdictKind,
    pub final_energy: f64,
    pub sup_u_end: f64,
    /// Set when the point failed before producing a verdict.
    pub error: Option<String>,
}

/// Runs every point of the sweep grid, at most `jobs` at a time, each in
/// its own `point_NNN` directory, then writes `sweep_summary.csv` in grid
/// order.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path, jobs: usize, plots: bool) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if cfg.sweep.is_empty() {
        return Err(Error::Validation(vec!["sweep needs at least one axis".into()]));
    }
    let points = cfg.sweep_points();
    let mut configs = Vec::with_capacity(points.len());
    let mut problems = Vec::new();
    for (k, p) in points.iter().enumerate() {
        let mut c = cfg.clone();
        for (field, x) in p {
            c = c.with_field(field, *x)?;
        }
        problems.extend(c.violations().into_iter().map(|m| format!("point {k}: {m}")));
        configs.push(c);
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    ensure_dir(out)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<RunReport>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(k, c)| {
                let dir = out.join(format!("point_{k:03}"));
                ensure_dir(&dir)?;
                write_text(&dir.join("config.json"), &c.to_json())?;
                cmd_run(c, &dir, plots)
            })
            .collect()
    });

    let rows: Vec<SweepRow> = points
        .into_iter()
        .zip(results)
        .map(|(point, res)| match res {
            Ok(r) => SweepRow {
                point,
                verdict: r.summary.verdict.kind,
                final_energy: r.records.last().map_or(f64::NAN, |x| x.energy),
                sup_u_end: r.summary.verdict.sup_u_end,
                error: None,
            },
            Err(e) => SweepRow {
                point,
                verdict: VerdictKind::Inconclusive,
                final_energy: f64::NAN,
                sup_u_end: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let path = out.join("sweep_summary.csv");
    let mut w = create(&path)?;
    let io = |e| Error::io(&path, e);
    let fields: Vec<&str> = cfg.sweep.iter().map(|a| a.field.as_str()).collect();
    writeln!(w, "point,{},verdict,F_end,sup_u_end,error", fields.join(",")).map_err(io)?;
    for (k, r) in rows.iter().enumerate() {
        let values: Vec<String> = r.point.iter().map(|(_, x)| fmt_num(*x)).collect();
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], " ");
        writeln!(
            w,
            "{k},{},{},{},{},{error}",
            values.join(","),
            r.verdict,
            fmt_num(r.final_energy),
            fmt_num(r.sup_u_end)
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(rows)
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Static SVG line chart of one or more `(x, y)` series. With `log_y`
/// nonpositive values are dropped and the axis is base 10.
pub fn line_plot_svg(title: &str, series: &[(&str, Vec<(f64, f64)>)], log_y: bool) -> String {
    let (w, h, m) = (640.0, 400.0, 60.0);
    let map_y = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, s)| {
            s.iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                .map(|&(x, y)| (x, map_y(y)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let label = |y: f64| if log_y { format!("1e{y:.1}") } else { format!("{y:.4e}") };

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n\
         <rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        w / 2.0,
        w - 2.0 * m,
        h - 2.0 * m
    );
    svg += &format!(
        "<text x=\"{m}\" y=\"{}\" text-anchor=\"middle\">{x0:.4e}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x1:.4e}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">t</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
        h - m + 16.0,
        w - m,
        h - m + 16.0,
        w / 2.0,
        h - m + 32.0,
        m - 4.0,
        h - m,
        label(y0),
        m - 4.0,
        m + 4.0,
        label(y1)
    );
    for (k, ((name, _), p)) in series.iter().zip(&pts).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let line: Vec<String> = p
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n\
             <text x=\"{}\" y=\"{}\" fill=\"{color}\">{name}</text>\n",
            line.join(" "),
            w - m - 60.0,
            m + 16.0 + 16.0 * k as f64
        );
    }
    svg += "</svg>\n";
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0, -2.5e-300, 6.02214076e23, 1.0 / 3.0, 0.0] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(1.0), "1.0");
    }

    #[test]
    fn csv_header_once_and_rows_in_order() {
        let mut sink = CsvSink::new(Vec::new(), "mem", true).unwrap();
        let mut r = EnergyRecord::default();
        for t in [0.0, 0.5, 1.0] {
            r.t = t;
            sink.record(&r).unwrap();
        }
        sink.finish().unwrap();
        assert_eq!(sink.records().len(), 3);
        let text = String::from_utf8(sink.into_inner()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SERIES_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0.5,"));
        assert_eq!(lines[1].split(',').count(), 13);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let s = line_plot_svg("x", &[("a", vec![(0.0, 1.0), (1.0, 10.0)])], true);
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert!(s.contains("polyline"));
        let empty = line_plot_svg("x", &[("a", vec![])], false);
        assert!(empty.contains("</svg>"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(verdict_exit_code(VerdictKind::Inconclusive), 2);
        assert_eq!(verdict_exit_code(VerdictKind::BlowupIndicated), 0);
        assert_eq!(verdict_exit_code(VerdictKind::GlobalWithinHorizon), 0);
    }
}
