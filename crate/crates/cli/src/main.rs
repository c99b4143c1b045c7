//! `sqzd`: simulate, evaluate and compare survival statistics under
//! correlated noise.
//!
//! Exit status: 0 success, 1 a Monte Carlo curve is outside tolerance,
//! 2 invalid configuration, 3 I/O or other runtime failure.

mod args;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sqzd_core::engine::{
    compare, load_run, run_experiment, write_report, CurveComparison, ExperimentConfig,
};
use sqzd_core::Error;

use args::{AnalyticArgs, Cli, Command, CompareArgs, RunArgs, SweepArgs};

const EXIT_TOLERANCE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analytic(a) => analytic(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io { .. } => EXIT_RUNTIME,
                _ => EXIT_CONFIG,
            })
        }
    }
}

fn output_dir(cfg: &ExperimentConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name))
}

fn verdict(table: &[CurveComparison], check: bool) -> ExitCode {
    print!("{}", report::comparison_table(table));
    if check && table.iter().any(|c| !c.pass) {
        ExitCode::from(EXIT_TOLERANCE)
    } else {
        ExitCode::SUCCESS
    }
}

fn simulate(a: RunArgs) -> sqzd_core::Result<ExitCode> {
    let cfg = a.experiment.resolve()?;
    let report = run_experiment(&cfg)?;
    let dir = output_dir(&cfg, a.out);
    write_report(&report, &dir, false)?;
    eprintln!("{}", report::run_summary(&report, &dir));
    Ok(verdict(&report.compare(&a.tolerance.get()), a.check))
}

fn analytic(a: AnalyticArgs) -> sqzd_core::Result<ExitCode> {
    let cfg = a.experiment.resolve()?;
    let csv = report::analytic_csv(&cfg)?;
    match a.out {
        Some(path) => std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn compare_cmd(a: CompareArgs) -> sqzd_core::Result<ExitCode> {
    let tol = a.tolerance.get();
    let table = match a.run_dir {
        Some(dir) => {
            let (_, series) = load_run(&dir)?;
            compare(&series, &tol)
        }
        None => {
            let cfg = a.experiment.resolve()?;
            let report = run_experiment(&cfg)?;
            if let Some(dir) = a.out {
                write_report(&report, &dir, false)?;
            }
            report.compare(&tol)
        }
    };
    Ok(verdict(&table, true))
}

fn sweep(a: SweepArgs) -> sqzd_core::Result<ExitCode> {
    let mut cfg = a.experiment.resolve_unchecked()?;
    // a grid replaces the config's correlation lists
    if a.p_grid.is_some() || a.tau_grid.is_some() {
        cfg.correlation.update_probs = a.p_grid.map(|g| g.linear());
        cfg.correlation.switch_times_ns = a.tau_grid.map(|g| g.logarithmic());
    }
    cfg.validate()?;
    let report = run_experiment(&cfg)?;
    let dir = output_dir(&cfg, a.out);
    write_report(&report, &dir, true)?;
    eprintln!("{}", report::run_summary(&report, &dir));
    print!("{}", sqzd_core::engine::sweep_summary_csv(&report));
    let table = report.compare(&a.tolerance.get());
    if a.check && table.iter().any(|c| !c.pass) {
        eprint!("{}", report::comparison_table(&table));
        return Ok(ExitCode::from(EXIT_TOLERANCE));
    }
    Ok(ExitCode::SUCCESS)
}
