//! CSV curves and the JSON run manifest.
//!
//! Numbers are written with Rust's shortest round-trip formatting, `.` as
//! decimal separator and `\n` line ends. Missing values are empty fields.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{sweep_rows, CurveReport, CurveSeries, ExperimentConfig, RunReport};
use crate::analytic::Regime;
use crate::noise::CorrelationSpec;
use crate::{Error, Result};

pub const CURVE_HEADER: &str = "m,mean,stddev,accum_stddev,analytic_mean,analytic_stddev";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SWEEP_FILE: &str = "sweep_summary.csv";

/// Full-precision decimal, exponent form for very small or large magnitudes.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// SHA-256 of the config's canonical TOML serialization.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let digest = Sha256::digest(config.to_toml_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCurve {
    pub label: String,
    /// `"discrete_hold"` or `"continuous_telegraph"`.
    pub model: String,
    /// Update probability, or mean switching time in ns.
    pub parameter: f64,
    /// `"annealed"`, `"finite_t"`, `"quenched"`, absent for telegraph curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    pub realizations: u64,
    pub underflowed: u64,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_average_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub seed_scheme: String,
    pub rng: String,
    pub measurements: usize,
    pub realizations: u64,
    pub time_average_truncation: usize,
    pub q_values: Vec<f64>,
    pub probs: Vec<f64>,
    pub threads: usize,
    pub elapsed_seconds: f64,
    pub curves: Vec<ManifestCurve>,
    pub config: ExperimentConfig,
}

fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::Annealed => "annealed",
        Regime::FiniteT(_) => "finite_t",
        Regime::Quenched => "quenched",
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Main curve CSV: one row per measurement index.
pub fn curve_csv(curve: &CurveReport) -> String {
    let stats = &curve.stats;
    let accum = stats.accumulated_stddevs();
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for j in 1..=stats.len() {
        let (am, asd) = match &curve.analytic {
            Some(a) => (Some(a.mean[j - 1]), Some(a.stddev[j - 1])),
            None => (None, None),
        };
        let _ = writeln!(
            out,
            "{j},{},{},{},{},{}",
            format_f64(stats.mean(j)),
            format_f64(stats.stddev(j)),
            format_f64(accum[j - 1]),
            opt(am),
            opt(asd)
        );
    }
    out
}

/// Time-average CSV: the annealed prediction, the quenched branches and one
/// column per sampled realization.
pub fn time_average_csv(report: &RunReport, curve: &CurveReport) -> String {
    let qd = &report.q_dist;
    let mut out = String::from("m,annealed_time_avg");
    for i in 0..qd.q_values().len() {
        let _ = write!(out, ",branch_{i}");
    }
    for s in &curve.time_averages {
        let _ = write!(out, ",ta_{}", s.index);
    }
    out.push('\n');
    for m in 1..=report.config.measurements {
        let _ = write!(out, "{m},{}", format_f64(qd.annealed_time_avg(m as u64)));
        for (b, _) in qd.quenched_time_avg_branches(m as u64) {
            let _ = write!(out, ",{}", format_f64(b));
        }
        for s in &curve.time_averages {
            let _ = write!(out, ",{}", format_f64(s.values[m - 1]));
        }
        out.push('\n');
    }
    out
}

fn trajectories_csv(raw: &[Vec<f64>]) -> String {
    let mut out = String::from("realization,m,p\n");
    for (a, series) in raw.iter().enumerate() {
        for (j, p) in series.iter().enumerate() {
            let _ = writeln!(out, "{a},{},{}", j + 1, format_f64(*p));
        }
    }
    out
}

pub fn sweep_summary_csv(report: &RunReport) -> String {
    let mut out = String::from(
        "label,parameter,mean,stddev,accum_stddev,analytic_mean,analytic_stddev,analytic_accum_stddev\n",
    );
    for r in sweep_rows(report) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.label,
            format_f64(r.parameter),
            format_f64(r.mean),
            format_f64(r.stddev),
            format_f64(r.accum_stddev),
            opt(r.analytic_mean),
            opt(r.analytic_stddev),
            opt(r.analytic_accum_stddev)
        );
    }
    out
}

/// Writes all curve files plus `manifest.json` into `dir` and returns the
/// manifest. With `sweep` set, also writes `sweep_summary.csv`.
pub fn write_report(report: &RunReport, dir: &Path, sweep: bool) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut curves = Vec::new();
    for c in &report.curves {
        let file = format!("{}.csv", c.label);
        write_file(&dir.join(&file), &curve_csv(c))?;
        let time_average_file = if c.time_averages.is_empty() {
            None
        } else {
            let f = format!("{}_time_avg.csv", c.label);
            write_file(&dir.join(&f), &time_average_csv(report, c))?;
            Some(f)
        };
        let trajectories_file = match &c.trajectories {
            Some(raw) => {
                let f = format!("{}_trajectories.csv", c.label);
                write_file(&dir.join(&f), &trajectories_csv(raw))?;
                Some(f)
            }
            None => None,
        };
        let (model, parameter) = match c.correlation {
            CorrelationSpec::DiscreteHold(p) => ("discrete_hold", p.get()),
            CorrelationSpec::ContinuousTelegraph { mean_switch_time } => {
                ("continuous_telegraph", mean_switch_time / crate::NS)
            }
        };
        curves.push(ManifestCurve {
            label: c.label.clone(),
            model: model.into(),
            parameter,
            regime: c.analytic.as_ref().map(|a| regime_name(a.regime).into()),
            realizations: c.stats.count(),
            underflowed: c.stats.underflowed(),
            file,
            time_average_file,
            trajectories_file,
        });
    }
    if sweep {
        write_file(&dir.join(SWEEP_FILE), &sweep_summary_csv(report))?;
    }
    let cfg = &report.config;
    let manifest = Manifest {
        name: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config_hash(cfg),
        master_seed: cfg.master_seed,
        seed_scheme: "splitmix64(master ^ splitmix64(index + 0x9E3779B97F4A7C15))".into(),
        rng: "ChaCha8".into(),
        measurements: cfg.measurements,
        realizations: cfg.realizations,
        time_average_truncation: cfg.time_average_truncation,
        q_values: report.q_dist.q_values().to_vec(),
        probs: report.q_dist.probs().to_vec(),
        threads: report.threads,
        elapsed_seconds: report.elapsed.as_secs_f64(),
        curves,
        config: cfg.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&dir.join(MANIFEST_FILE), &json)?;
    Ok(manifest)
}

/// `(mean, stddev, analytic_mean)` columns of a curve CSV.
pub type CurveColumns = (Vec<f64>, Vec<f64>, Option<Vec<f64>>);

pub fn read_curve_csv(path: &Path) -> Result<CurveColumns> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, what: &str| Error::Config {
        field: format!("{}:{line}", path.display()),
        message: what.into(),
    };
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    let (mut mean, mut sd, mut an) = (Vec::new(), Vec::new(), Vec::new());
    let mut has_analytic = true;
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(bad(i + 2, "expected 6 columns"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2, "bad number"));
        mean.push(num(cols[1])?);
        sd.push(num(cols[2])?);
        if cols[4].is_empty() {
            has_analytic = false;
        } else {
            an.push(num(cols[4])?);
        }
    }
    Ok((mean, sd, has_analytic.then_some(an)))
}

/// Reads a run directory back into comparable series.
pub fn load_run(dir: &Path) -> Result<(Manifest, Vec<CurveSeries>)> {
    let path: PathBuf = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Config {
        field: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut series = Vec::new();
    for c in &manifest.curves {
        let (mean, stddev, analytic_mean) = read_curve_csv(&dir.join(&c.file))?;
        let regime = match c.regime.as_deref() {
            Some("annealed") => Some(Regime::Annealed),
            Some("quenched") => Some(Regime::Quenched),
            Some("finite_t") => Some(Regime::FiniteT(c.parameter)),
            _ => None,
        };
        series.push(CurveSeries {
            label: c.label.clone(),
            regime,
            count: c.realizations,
            mean,
            stddev,
            analytic_mean,
        });
    }
    Ok((manifest, series))
}
