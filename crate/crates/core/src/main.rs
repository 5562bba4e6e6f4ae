use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use radial_chemotaxis::config::RunConfig;
use radial_chemotaxis::model::VerdictKind;
use radial_chemotaxis::runner::{
    cmd_phi_table, cmd_run, cmd_sweep, cmd_synth_ic, verdict_exit_code,
};
use radial_chemotaxis::Error;

#[derive(Parser)]
#[command(version, about = "Radial indirect-signal chemotaxis simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration.
    Run(Common),
    /// Tabulate the concentrated initial-data family over the `etas` ladder.
    SynthIc(Common),
    /// Run every point of the configured parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Points simulated concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Tabulate the comparison function and its divergence time.
    PhiTable(Common),
    /// Parse and validate a configuration.
    CheckConfig(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record every k-th accepted step.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    plots: Switch,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, PathBuf), Error> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(k) = self.stride {
            cfg.stride = k;
            cfg.validate()?;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok((cfg, out))
    }
}

fn execute(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run(c) => {
            let (cfg, out) = c.load()?;
            let report = cmd_run(&cfg, &out, c.plots == Switch::On)?;
            let v = &report.summary.verdict;
            println!("{}: {}", v.kind, v.reason);
            Ok(verdict_exit_code(v.kind))
        }
        Command::SynthIc(c) => {
            let (cfg, out) = c.load()?;
            let rows = cmd_synth_ic(&cfg, &out)?;
            println!("wrote {} rows to {}", rows.len(), out.join("family.csv").display());
            Ok(0)
        }
        Command::Sweep { common, jobs } => {
            let (cfg, out) = common.load()?;
            let rows = cmd_sweep(&cfg, &out, jobs, common.plots == Switch::On)?;
            let failed = rows
                .iter()
                .filter(|r| r.verdict == VerdictKind::Inconclusive)
                .count();
            println!("{} points, {failed} inconclusive", rows.len());
            Ok(if failed > 0 { 2 } else { 0 })
        }
        Command::PhiTable(c) => {
            let (cfg, out) = c.load()?;
            let t = cmd_phi_table(&cfg, &out)?;
            println!("T = {t}");
            Ok(0)
        }
        Command::CheckConfig(c) => {
            let (cfg, _) = c.load()?;
            println!("{}", cfg.to_json());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
