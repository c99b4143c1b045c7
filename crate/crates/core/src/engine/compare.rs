use super::RunReport;
use crate::analytic::Regime;

/// Acceptance band for Monte Carlo versus closed form.
///
/// A point passes when `|mc − analytic| ≤ max(se_multiple·SE, rel·|analytic|)`
/// where `rel` is `finite_t_relative` for finite-temperature curves and
/// `exact_relative` for annealed and quenched curves. `SE = ΔP/√N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub se_multiple: f64,
    pub finite_t_relative: f64,
    pub exact_relative: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            se_multiple: 5.0,
            finite_t_relative: 0.03,
            exact_relative: 0.0,
        }
    }
}

/// The columns of one curve needed for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub label: String,
    pub regime: Option<Regime>,
    pub count: u64,
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
    pub analytic_mean: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveComparison {
    pub label: String,
    pub regime: Option<Regime>,
    /// `max_j |mc − analytic| / SE`, over points with non-zero SE.
    pub max_standardized: f64,
    /// `max_j |mc − analytic| / |analytic|`.
    pub max_relative: f64,
    /// Measurement index with the largest excess over the band.
    pub worst_m: usize,
    pub failures: usize,
    /// `false` only when a closed form exists and some point is out of band.
    pub pass: bool,
    pub compared: bool,
}

/// Compares a Monte Carlo mean against a closed-form curve.
pub fn compare_series(
    label: &str,
    regime: Option<Regime>,
    count: u64,
    mean: &[f64],
    stddev: &[f64],
    analytic: &[f64],
    tol: &Tolerance,
) -> CurveComparison {
    let rel = match regime {
        Some(Regime::FiniteT(_)) => tol.finite_t_relative,
        _ => tol.exact_relative,
    };
    let sqrt_n = (count as f64).sqrt();
    let mut out = CurveComparison {
        label: label.into(),
        regime,
        max_standardized: 0.0,
        max_relative: 0.0,
        worst_m: 0,
        failures: 0,
        pass: true,
        compared: true,
    };
    let mut worst_excess = f64::NEG_INFINITY;
    for (j, ((&mc, &sd), &an)) in mean.iter().zip(stddev).zip(analytic).enumerate() {
        let se = sd / sqrt_n;
        let diff = (mc - an).abs();
        if se > 0.0 {
            out.max_standardized = out.max_standardized.max(diff / se);
        }
        if an != 0.0 {
            out.max_relative = out.max_relative.max(diff / an.abs());
        }
        // absolute floor for exact agreement with zero spread
        let band = (tol.se_multiple * se).max(rel * an.abs()) + 1e-12;
        if diff - band > worst_excess {
            worst_excess = diff - band;
            out.worst_m = j + 1;
        }
        if diff > band {
            out.failures += 1;
        }
    }
    out.pass = out.failures == 0;
    out
}

fn compare_curve(series: &CurveSeries, tol: &Tolerance) -> CurveComparison {
    match &series.analytic_mean {
        Some(an) => compare_series(
            &series.label,
            series.regime,
            series.count,
            &series.mean,
            &series.stddev,
            an,
            tol,
        ),
        None => CurveComparison {
            label: series.label.clone(),
            regime: None,
            max_standardized: f64::NAN,
            max_relative: f64::NAN,
            worst_m: 0,
            failures: 0,
            pass: true,
            compared: false,
        },
    }
}

/// Pass/fail table for a finished run or a loaded run directory.
pub fn compare<'a>(
    curves: impl IntoIterator<Item = &'a CurveSeries>,
    tol: &Tolerance,
) -> Vec<CurveComparison> {
    curves.into_iter().map(|c| compare_curve(c, tol)).collect()
}

impl RunReport {
    pub fn compare(&self, tol: &Tolerance) -> Vec<CurveComparison> {
        let series: Vec<_> = self.curves.iter().map(|c| c.series()).collect();
        compare(&series, tol)
    }
}
