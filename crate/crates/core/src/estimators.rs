//! Per-realization survival series, time averages and mergeable ensemble
//! statistics.

use serde::{Deserialize, Serialize};

use crate::noise::{FieldDistribution, FieldTrajectory, Interval};
use crate::quantum::{q_table, SystemSpec};
use crate::{Error, Result};

/// `ln P` below this reads out as 0 and marks the realization as underflowed.
pub const LN_UNDERFLOW: f64 = -708.0;

/// Where single-interval survival probabilities come from.
#[derive(Debug, Clone)]
pub enum SurvivalSource {
    /// `q` injected per level, no dynamics. Intervals with a switch inside
    /// cannot be evaluated.
    Table(Vec<f64>),
    /// Held intervals use the cached `q` per level; switching intervals are
    /// propagated segment by segment.
    Dynamics {
        spec: Box<SystemSpec>,
        dist: FieldDistribution,
        table: Vec<f64>,
    },
}

impl SurvivalSource {
    pub fn abstract_q(q_values: Vec<f64>) -> Result<Self> {
        if let Some(q) = q_values.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(Error::InvalidDistribution(format!(
                "q = {q} outside [0, 1]"
            )));
        }
        Ok(SurvivalSource::Table(q_values))
    }

    pub fn dynamics(spec: SystemSpec, dist: FieldDistribution) -> Self {
        let table = q_table(&spec, &dist).into_iter().map(|(_, q)| q).collect();
        SurvivalSource::Dynamics {
            spec: Box::new(spec),
            dist,
            table,
        }
    }

    pub fn table(&self) -> &[f64] {
        match self {
            SurvivalSource::Table(t) => t,
            SurvivalSource::Dynamics { table, .. } => table,
        }
    }

    fn interval_q(&self, interval: &Interval) -> Result<f64> {
        let table = self.table();
        match interval {
            Interval::Held(level) => table.get(*level).copied().ok_or(Error::Dimension {
                expected: table.len(),
                got: *level,
            }),
            Interval::Switching(segs) => match self {
                SurvivalSource::Table(_) => Err(Error::UnsupportedModel(
                    "abstract q values cannot evaluate intervals with a field switch".into(),
                )),
                SurvivalSource::Dynamics { spec, dist, .. } => {
                    if let Some(s) = segs.iter().find(|s| s.level >= dist.len()) {
                        return Err(Error::Dimension {
                            expected: dist.len(),
                            got: s.level,
                        });
                    }
                    Ok(spec.survival_prob_levels(segs, dist))
                }
            },
        }
    }
}

/// Survival series `P_α(j)`, `j = 1…m`, of one realization, stored as
/// `ln P_α(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult {
    log_p: Vec<f64>,
    pub index: u64,
    pub seed: u64,
}

impl RealizationResult {
    /// Builds from per-interval `q` values: `P(j) = Π_{i≤j} q_i`.
    pub fn from_q(q: impl IntoIterator<Item = f64>, index: u64, seed: u64) -> Self {
        let mut acc = 0.0;
        let log_p = q
            .into_iter()
            .map(|q| {
                acc += q.ln();
                acc
            })
            .collect();
        Self { log_p, index, seed }
    }

    pub fn len(&self) -> usize {
        self.log_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_p.is_empty()
    }

    pub fn log_p(&self) -> &[f64] {
        &self.log_p
    }

    /// `P(j)` for `1 ≤ j ≤ m`; `P(0) = 1`.
    pub fn p(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            read_out(self.log_p[j - 1])
        }
    }

    pub fn p_series(&self) -> Vec<f64> {
        self.log_p.iter().map(|&l| read_out(l)).collect()
    }

    pub fn underflowed(&self) -> bool {
        self.log_p.last().is_some_and(|&l| l < LN_UNDERFLOW)
    }

    pub fn is_monotone(&self) -> bool {
        self.log_p.windows(2).all(|w| w[1] <= w[0]) && self.log_p.first().is_none_or(|&l| l <= 0.0)
    }
}

fn read_out(log_p: f64) -> f64 {
    if log_p < LN_UNDERFLOW {
        0.0
    } else {
        log_p.exp()
    }
}

/// `P_α(j) = Π_{i≤j} q(Ω_{i,α})` along one sampled trajectory.
pub fn run_realization(
    source: &SurvivalSource,
    trajectory: &FieldTrajectory,
    index: u64,
    seed: u64,
) -> Result<RealizationResult> {
    let q = trajectory
        .intervals()
        .iter()
        .map(|iv| source.interval_q(iv))
        .collect::<Result<Vec<_>>>()?;
    Ok(RealizationResult::from_q(q, index, seed))
}

/// Finite-`M` time average `(1/M) Σ_{j=1..M} P(j)^(m/j)`.
pub fn time_average(result: &RealizationResult, m_target: u64, truncation: usize) -> Result<f64> {
    let rates = extrapolation_rates(result, truncation)?;
    Ok(time_average_from_rates(&rates, m_target as f64))
}

/// Time averages for every `m = 1…m_max`, sharing the `ln P(j)/j` rates.
pub fn time_average_curve(
    result: &RealizationResult,
    m_max: usize,
    truncation: usize,
) -> Result<Vec<f64>> {
    let rates = extrapolation_rates(result, truncation)?;
    Ok((1..=m_max)
        .map(|m| time_average_from_rates(&rates, m as f64))
        .collect())
}

fn extrapolation_rates(result: &RealizationResult, truncation: usize) -> Result<Vec<f64>> {
    if truncation == 0 || truncation > result.len() {
        return Err(Error::Dimension {
            expected: result.len(),
            got: truncation,
        });
    }
    Ok(result.log_p[..truncation]
        .iter()
        .enumerate()
        .map(|(j, &l)| l / (j + 1) as f64)
        .collect())
}

fn time_average_from_rates(rates: &[f64], m: f64) -> f64 {
    rates.iter().map(|r| (m * r).exp()).sum::<f64>() / rates.len() as f64
}

/// Streaming per-`j` sums of `P` and `P²` over realizations.
///
/// Merging is plain addition of the sums, so any partition of the realization
/// set reduces to the same statistics up to floating-point reordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    count: u64,
    underflowed: u64,
    sum_p: Vec<f64>,
    sum_p2: Vec<f64>,
}

impl EnsembleStats {
    pub fn new(len: usize) -> Self {
        Self {
            count: 0,
            underflowed: 0,
            sum_p: vec![0.0; len],
            sum_p2: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.sum_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sum_p.is_empty()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Realizations whose final survival probability underflowed.
    pub fn underflowed(&self) -> u64 {
        self.underflowed
    }

    pub fn accumulate(&mut self, result: &RealizationResult) -> Result<()> {
        if result.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: result.len(),
            });
        }
        for ((s, s2), &l) in self
            .sum_p
            .iter_mut()
            .zip(&mut self.sum_p2)
            .zip(&result.log_p)
        {
            let p = read_out(l);
            *s += p;
            *s2 += p * p;
        }
        self.count += 1;
        self.underflowed += u64::from(result.underflowed());
        Ok(())
    }

    pub fn merge(&mut self, other: &EnsembleStats) -> Result<()> {
        if other.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: other.len(),
            });
        }
        for (a, b) in self.sum_p.iter_mut().zip(&other.sum_p) {
            *a += b;
        }
        for (a, b) in self.sum_p2.iter_mut().zip(&other.sum_p2) {
            *a += b;
        }
        self.count += other.count;
        self.underflowed += other.underflowed;
        Ok(())
    }

    /// `⟨P(j)⟩`, `1 ≤ j ≤ m`.
    pub fn mean(&self, j: usize) -> f64 {
        self.sum_p[j - 1] / self.count as f64
    }

    /// `⟨P²(j)⟩`.
    pub fn mean_sq(&self, j: usize) -> f64 {
        self.sum_p2[j - 1] / self.count as f64
    }

    /// Population variance, clamped at 0.
    pub fn variance(&self, j: usize) -> f64 {
        let mean = self.mean(j);
        (self.mean_sq(j) - mean * mean).max(0.0)
    }

    /// `ΔP(j)`.
    pub fn stddev(&self, j: usize) -> f64 {
        self.variance(j).sqrt()
    }

    /// `ΔP(j)/√N`.
    pub fn std_error(&self, j: usize) -> f64 {
        self.stddev(j) / (self.count as f64).sqrt()
    }

    /// `D(m) = Σ_{j≤m} ΔP(j)`.
    pub fn accumulated_stddev(&self, m: usize) -> f64 {
        (1..=m).map(|j| self.stddev(j)).sum()
    }

    pub fn means(&self) -> Vec<f64> {
        (1..=self.len()).map(|j| self.mean(j)).collect()
    }

    pub fn stddevs(&self) -> Vec<f64> {
        (1..=self.len()).map(|j| self.stddev(j)).collect()
    }

    /// Running `D(j)` for every `j`.
    pub fn accumulated_stddevs(&self) -> Vec<f64> {
        let mut acc = 0.0;
        (1..=self.len())
            .map(|j| {
                acc += self.stddev(j);
                acc
            })
            .collect()
    }
}
