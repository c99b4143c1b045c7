//! Human-readable summaries and the closed-form CSV.

use std::fmt::Write as _;
use std::path::Path;

use sqzd_core::analytic::Regime;
use sqzd_core::engine::{format_f64, AnalyticCurve, CurveComparison, ExperimentConfig, RunReport};
use sqzd_core::noise::CorrelationSpec;
use sqzd_core::Result;

fn regime_name(r: Option<Regime>) -> String {
    match r {
        Some(Regime::Annealed) => "annealed".into(),
        Some(Regime::Quenched) => "quenched".into(),
        Some(Regime::FiniteT(p)) => format!("finite_t({p})"),
        None => "-".into(),
    }
}

pub fn comparison_table(rows: &[CurveComparison]) -> String {
    let mut out = format!(
        "{:<18} {:<16} {:>9} {:>9} {:>5} {:>8}  result\n",
        "curve", "regime", "max_se", "max_rel", "out", "worst_m"
    );
    for r in rows {
        if !r.compared {
            let _ = writeln!(
                out,
                "{:<18} {:<16} {:>9} {:>9} {:>5} {:>8}  no closed form",
                r.label, "-", "-", "-", "-", "-"
            );
            continue;
        }
        let _ = writeln!(
            out,
            "{:<18} {:<16} {:>9.2} {:>9.4} {:>5} {:>8}  {}",
            r.label,
            regime_name(r.regime),
            r.max_standardized,
            r.max_relative,
            r.failures,
            r.worst_m,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    out
}

pub fn run_summary(report: &RunReport, dir: &Path) -> String {
    let cfg = &report.config;
    let underflowed: u64 = report.curves.iter().map(|c| c.stats.underflowed()).sum();
    let q: Vec<String> = report
        .q_dist
        .q_values()
        .iter()
        .map(|q| format!("{q:.6}"))
        .collect();
    format!(
        "{}: {} curves x {} realizations x {} measurements on {} threads in {:.2}s; q = [{}]; \
         {underflowed} underflowed; written to {}",
        cfg.name,
        report.curves.len(),
        cfg.realizations,
        cfg.measurements,
        report.threads,
        report.elapsed.as_secs_f64(),
        q.join(", "),
        dir.display()
    )
}

/// Closed-form curves for every discrete-hold setting: the annealed time
/// average, the quenched branches, and mean and standard deviation per
/// update probability.
pub fn analytic_csv(cfg: &ExperimentConfig) -> Result<String> {
    let qd = cfg.q_distribution()?;
    let m = cfg.measurements;
    let mut curves = Vec::new();
    for corr in cfg.correlations()? {
        match corr {
            CorrelationSpec::DiscreteHold(p) => {
                let regime = Regime::from_update_prob(p.get())?;
                curves.push((
                    format!("p_{}", p.get()),
                    AnalyticCurve::new(&qd, regime, m)?,
                ));
            }
            CorrelationSpec::ContinuousTelegraph { .. } => {
                eprintln!("note: telegraph settings have no closed form and are skipped");
            }
        }
    }
    let mut out = String::from("m,annealed_time_avg");
    for i in 0..qd.q_values().len() {
        let _ = write!(out, ",branch_{i}");
    }
    for (label, _) in &curves {
        let _ = write!(out, ",{label}_mean,{label}_stddev");
    }
    out.push('\n');
    for j in 1..=m {
        let _ = write!(out, "{j},{}", format_f64(qd.annealed_time_avg(j as u64)));
        for (b, _) in qd.quenched_time_avg_branches(j as u64) {
            let _ = write!(out, ",{}", format_f64(b));
        }
        for (_, c) in &curves {
            let _ = write!(
                out,
                ",{},{}",
                format_f64(c.mean[j - 1]),
                format_f64(c.stddev[j - 1])
            );
        }
        out.push('\n');
    }
    Ok(out)
}
