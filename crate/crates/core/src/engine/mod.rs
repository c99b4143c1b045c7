//! End-to-end experiments: sample realizations in parallel, reduce ensemble
//! statistics, attach the closed-form curves and write plot-ready files.
//!
//! Realizations are split into fixed blocks of [`BLOCK`] indices. Each block
//! is accumulated in index order and the block partials are merged in block
//! order, so results do not depend on the number of worker threads.

mod compare;
mod config;
mod output;

use std::time::{Duration, Instant};

pub use compare::{compare, compare_series, CurveComparison, CurveSeries, Tolerance};
pub use config::{CorrelationConfig, DistributionConfig, ExperimentConfig, Mode, SystemConfig};
pub use output::{
    config_hash, format_f64, load_run, read_curve_csv, sweep_summary_csv, write_report, Manifest,
    CURVE_HEADER,
};

use crate::analytic::{QDistribution, Regime};
use crate::estimators::{
    run_realization, time_average_curve, EnsembleStats, RealizationResult, SurvivalSource,
};
use crate::noise::{self, CorrelationSpec, FieldDistribution};
use crate::Result;

/// Realizations per work item.
pub const BLOCK: u64 = 64;

/// Closed-form counterparts of one discrete-hold curve.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCurve {
    pub regime: Regime,
    /// `⟨P(j)⟩`, `j = 1…m`.
    pub mean: Vec<f64>,
    /// `ΔP(j)`.
    pub stddev: Vec<f64>,
}

impl AnalyticCurve {
    pub fn new(qd: &QDistribution, regime: Regime, m: usize) -> Result<Self> {
        let mut mean = Vec::with_capacity(m);
        let mut stddev = Vec::with_capacity(m);
        for j in 1..=m as u64 {
            mean.push(qd.ensemble_avg(regime, j)?);
            stddev.push(qd.variance(regime, j)?.stddev());
        }
        Ok(Self {
            regime,
            mean,
            stddev,
        })
    }
}

/// Time averages of a few individual realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeAverageSample {
    pub index: u64,
    /// `P̂_α(m)` for `m = 1…measurements`.
    pub values: Vec<f64>,
}

/// Results for one correlation setting.
#[derive(Debug, Clone)]
pub struct CurveReport {
    pub label: String,
    pub correlation: CorrelationSpec,
    pub stats: EnsembleStats,
    /// Present for discrete-hold curves.
    pub analytic: Option<AnalyticCurve>,
    pub time_averages: Vec<TimeAverageSample>,
    /// Raw `P_α(j)` series, only when the config asks for them.
    pub trajectories: Option<Vec<Vec<f64>>>,
}

impl CurveReport {
    pub fn series(&self) -> CurveSeries {
        CurveSeries {
            label: self.label.clone(),
            regime: self.analytic.as_ref().map(|a| a.regime),
            count: self.stats.count(),
            mean: self.stats.means(),
            stddev: self.stats.stddevs(),
            analytic_mean: self.analytic.as_ref().map(|a| a.mean.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub q_dist: QDistribution,
    pub curves: Vec<CurveReport>,
    pub elapsed: Duration,
    pub threads: usize,
}

/// Label used for file names: `p_0.03`, `tau_1000ns`.
pub fn curve_label(corr: &CorrelationSpec) -> String {
    match corr {
        CorrelationSpec::DiscreteHold(p) => format!("p_{}", p.get()),
        CorrelationSpec::ContinuousTelegraph { mean_switch_time } => {
            format!("tau_{}ns", mean_switch_time / crate::NS)
        }
    }
}

/// Runs every curve of the experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let dist = config.field_distribution()?;
    let q_dist = config.q_distribution()?;
    let source = match config.system_spec()? {
        Some(spec) => SurvivalSource::dynamics(spec, dist.clone()),
        None => SurvivalSource::abstract_q(q_dist.q_values().to_vec())?,
    };
    let ctx = RunContext {
        config,
        dist: &dist,
        source: &source,
    };
    let (curves, threads) = with_pool(config.threads, || {
        config
            .correlations()?
            .iter()
            .map(|corr| ctx.run_curve(corr, &q_dist))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(RunReport {
        config: config.clone(),
        q_dist,
        curves: curves?,
        elapsed: started.elapsed(),
        threads,
    })
}

struct RunContext<'a> {
    config: &'a ExperimentConfig,
    dist: &'a FieldDistribution,
    source: &'a SurvivalSource,
}

impl RunContext<'_> {
    fn realization(
        &self,
        corr: &CorrelationSpec,
        index: u64,
        len: usize,
    ) -> Result<RealizationResult> {
        let seed = noise::trajectory_seed(self.config.master_seed, index);
        let traj = noise::sample(self.dist, corr, len, self.config.mu(), seed)?;
        run_realization(self.source, &traj, index, seed)
    }

    fn block(&self, corr: &CorrelationSpec, block: u64) -> Result<(EnsembleStats, Vec<Vec<f64>>)> {
        let m = self.config.measurements;
        let n = self.config.realizations;
        let mut stats = EnsembleStats::new(m);
        let mut raw = Vec::new();
        for index in block * BLOCK..((block + 1) * BLOCK).min(n) {
            let r = self.realization(corr, index, m)?;
            debug_assert!(r.is_monotone());
            stats.accumulate(&r)?;
            if self.config.save_trajectories {
                raw.push(r.p_series());
            }
        }
        Ok((stats, raw))
    }

    fn run_curve(&self, corr: &CorrelationSpec, q_dist: &QDistribution) -> Result<CurveReport> {
        let cfg = self.config;
        let m = cfg.measurements;
        let blocks = cfg.realizations.div_ceil(BLOCK);
        let partials = par_map(blocks, |b| self.block(corr, b))?;

        let mut stats = EnsembleStats::new(m);
        let mut trajectories = cfg.save_trajectories.then(Vec::new);
        for (partial, raw) in &partials {
            stats.merge(partial)?;
            if let Some(t) = trajectories.as_mut() {
                t.extend(raw.iter().cloned());
            }
        }

        // the first few realizations again, long enough for the truncation
        let len = m.max(cfg.time_average_truncation);
        let time_averages = par_map(cfg.time_average_samples as u64, |index| {
            let r = self.realization(corr, index, len)?;
            Ok(TimeAverageSample {
                index,
                values: time_average_curve(&r, m, cfg.time_average_truncation)?,
            })
        })?;

        let analytic = match corr {
            CorrelationSpec::DiscreteHold(p) => Some(AnalyticCurve::new(
                q_dist,
                Regime::from_update_prob(p.get())?,
                m,
            )?),
            CorrelationSpec::ContinuousTelegraph { .. } => None,
        };

        Ok(CurveReport {
            label: curve_label(corr),
            correlation: *corr,
            stats,
            analytic,
            time_averages,
            trajectories,
        })
    }
}

/// Maps `0..n` in parallel, keeping index order in the output.
fn par_map<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `f` on a pool of `threads` workers (0 = default pool) and reports
/// the width used.
fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<(T, usize)> {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return Ok((f(), rayon::current_num_threads()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::config("threads", e.to_string()))?;
        Ok((pool.install(f), threads))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok((f(), 1))
    }
}

/// One row per curve: final mean, final stddev and `D(m)` with their
/// closed-form counterparts where defined.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    /// Update probability or mean switching time in ns.
    pub parameter: f64,
    pub mean: f64,
    pub stddev: f64,
    pub accum_stddev: f64,
    pub analytic_mean: Option<f64>,
    pub analytic_stddev: Option<f64>,
    pub analytic_accum_stddev: Option<f64>,
}

pub fn sweep_rows(report: &RunReport) -> Vec<SweepRow> {
    let m = report.config.measurements;
    report
        .curves
        .iter()
        .map(|c| SweepRow {
            label: c.label.clone(),
            parameter: match c.correlation {
                CorrelationSpec::DiscreteHold(p) => p.get(),
                CorrelationSpec::ContinuousTelegraph { mean_switch_time } => {
                    mean_switch_time / crate::NS
                }
            },
            mean: c.stats.mean(m),
            stddev: c.stats.stddev(m),
            accum_stddev: c.stats.accumulated_stddev(m),
            analytic_mean: c.analytic.as_ref().map(|a| a.mean[m - 1]),
            analytic_stddev: c.analytic.as_ref().map(|a| a.stddev[m - 1]),
            analytic_accum_stddev: c.analytic.as_ref().map(|a| a.stddev.iter().sum()),
        })
        .collect()
}
