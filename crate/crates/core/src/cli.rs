//! Command-line front end: `run`, `sweep` and `figdata`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{validate_config, ConfigFile, SimConfig, SystemKind};
use crate::error::{Error, Result};
use crate::figdata::write_figure;
use crate::output::{ensure_dir, unix_ms, write_manifest, write_rows, write_run};
use crate::sweep::{run_sweep, Output, SweepParam, SweepResult, SweepSpec};
use crate::systems::run_simulation;

pub const SWEEP_CSV: &str = "sweep.csv";
pub const TABLE_SUMMARY_CSV: &str = "table_summary.csv";

/// Exit status for a config that fails validation or cannot be parsed.
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_FAILURE: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "peerflow", version, about = "Monte Carlo simulator of journal and platform peer review")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write its CSVs and manifest.
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// One-at-a-time parameter sweep averaged over several runs per point.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        param: SweepParam,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long)]
        step: f64,
        #[arg(long, default_value_t = 10)]
        runs: usize,
    },
    /// Write the data series of one figure into a run directory.
    Figdata {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long)]
        figure: String,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat TOML file; flags below override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<SystemKind>,
    /// New manuscripts per issue.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub issues: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Accepted papers per journal per issue.
    #[arg(long)]
    pub capacity: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

impl CommonArgs {
    /// Defaults, then the file, then flags.
    pub fn effective_config(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => ConfigFile::load(path)?.apply_to(&SimConfig::default()),
            None => SimConfig::default(),
        };
        if let Some(s) = self.system {
            cfg.system = s;
        }
        if let Some(n) = self.n {
            cfg.n_new_per_issue = n;
        }
        if let Some(i) = self.issues {
            cfg.n_issues = i;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(c) = self.capacity {
            cfg.capacity_per_journal = c;
        }
        let violations = validate_config(&cfg);
        if !violations.is_empty() {
            return Err(Error::InvalidConfig(violations));
        }
        Ok(cfg)
    }
}

pub fn cmd_run(common: &CommonArgs) -> Result<PathBuf> {
    let started = unix_ms();
    let cfg = common.effective_config()?;
    let out = run_simulation(&cfg)?;
    write_run(&common.out, &out, started)?;
    Ok(common.out.clone())
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    parameter: String,
    lo: f64,
    hi: f64,
    step: f64,
    runs: usize,
    points: usize,
    q1_min: f64,
    q1_max: f64,
    q2_min: f64,
    q2_max: f64,
    q3_min: f64,
    q3_max: f64,
    q4_min: f64,
    q4_max: f64,
    burden_min: f64,
    burden_max: f64,
    first_try_min: f64,
    first_try_max: f64,
}

/// `sweep.csv`: one row per grid point, mean and standard deviation of each
/// output. `table_summary.csv`: one row with the min-max of every output.
pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<[PathBuf; 2]> {
    ensure_dir(dir)?;
    let sweep_path = dir.join(SWEEP_CSV);
    let file = std::fs::File::create(&sweep_path).map_err(|e| Error::io(&sweep_path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["parameter".to_string(), "value".to_string(), "runs".to_string()];
    for o in Output::ALL {
        header.push(format!("{}_mean", o.as_str()));
        header.push(format!("{}_sd", o.as_str()));
    }
    w.write_record(&header)?;
    for p in &result.points {
        let mut row = vec![result.spec.param.to_string(), p.value.to_string(), p.runs.to_string()];
        for o in Output::ALL {
            row.push(p.mean_of(o).to_string());
            row.push(p.sd_of(o).to_string());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(&sweep_path, e))?;

    let r = |o| result.range(o);
    let spec = &result.spec;
    let summary = SummaryRow {
        parameter: spec.param.to_string(),
        lo: spec.lo,
        hi: spec.hi,
        step: spec.step,
        runs: spec.runs_per_point,
        points: result.points.len(),
        q1_min: r(Output::Q1).0,
        q1_max: r(Output::Q1).1,
        q2_min: r(Output::Q2).0,
        q2_max: r(Output::Q2).1,
        q3_min: r(Output::Q3).0,
        q3_max: r(Output::Q3).1,
        q4_min: r(Output::Q4).0,
        q4_max: r(Output::Q4).1,
        burden_min: r(Output::Burden).0,
        burden_max: r(Output::Burden).1,
        first_try_min: r(Output::FirstTry).0,
        first_try_max: r(Output::FirstTry).1,
    };
    let summary_path = dir.join(TABLE_SUMMARY_CSV);
    write_rows(&summary_path, &[summary])?;
    Ok([sweep_path, summary_path])
}

pub fn cmd_sweep(common: &CommonArgs, param: SweepParam, lo: f64, hi: f64, step: f64, runs: usize) -> Result<PathBuf> {
    let started = unix_ms();
    let base = common.effective_config()?;
    let spec = SweepSpec::new(param, lo, hi, step, base.clone()).with_runs(runs);
    let result = run_sweep(&spec)?;
    let files = write_sweep(&common.out, &result)?;
    write_manifest(&common.out, "sweep", &base, started, &files)?;
    Ok(common.out.clone())
}

pub fn cmd_figdata(run_dir: &Path, figure: &str) -> Result<PathBuf> {
    write_figure(run_dir, figure)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::ConfigParse { .. } | Error::InvalidSweep(_) | Error::InvalidGridPoint { .. } => {
            EXIT_INVALID
        }
        _ => EXIT_FAILURE,
    }
}

pub fn execute(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Run { common } => cmd_run(common),
        Command::Sweep {
            common,
            param,
            lo,
            hi,
            step,
            runs,
        } => cmd_sweep(common, *param, *lo, *hi, *step, *runs),
        Command::Figdata { run_dir, figure } => cmd_figdata(run_dir, figure),
    };
    match result {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Error::InvalidConfig(violations) = &e {
                eprintln!("error: invalid configuration");
                for v in violations {
                    eprintln!("  - {v}");
                }
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("peerflow").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "system = \"regular\"\nn_issues = 7\nseed = 3\n").unwrap();
        let cli = parse(&["run", "--config", path.to_str().unwrap(), "--seed", "9", "--out", "x"]);
        let Command::Run { common } = cli.command else { panic!() };
        let cfg = common.effective_config().unwrap();
        assert_eq!(cfg.system, SystemKind::Regular);
        assert_eq!(cfg.n_issues, 7);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn invalid_override_is_reported() {
        let cli = parse(&["run", "--n", "1000", "--out", "x"]);
        let Command::Run { common } = cli.command else { panic!() };
        let err = common.effective_config().unwrap_err();
        assert_eq!(exit_code(&err), EXIT_INVALID);
        assert!(err.to_string().contains("total capacity 2500 ≥ n 1000"));
    }

    #[test]
    fn sweep_flags_parse() {
        let cli = parse(&[
            "sweep", "--param", "beta", "--lo", "0.02", "--hi", "0.2", "--step", "0.02", "--out", "d",
        ]);
        let Command::Sweep { param, runs, .. } = cli.command else { panic!() };
        assert_eq!(param, SweepParam::Beta);
        assert_eq!(runs, 10);
        assert!(Cli::try_parse_from(["peerflow", "sweep", "--param", "zeta", "--lo", "0", "--hi", "1", "--step", "1", "--out", "d"]).is_err());
    }
}
