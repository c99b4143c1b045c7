//! Closed-form disorder averages of the survival probability.
//!
//! Everything here depends only on the statistics of the single-interval
//! survival probability `q`, i.e. on a [`QDistribution`]. Averages over
//! `p(Ω)` are finite sums. Powers `q^m` are evaluated in the log domain so
//! that large `m` underflows gracefully to 0 instead of producing NaN.
//!
//! The finite-temperature expressions compound Poisson-distributed run
//! lengths (`λ = 1/p`) and a Poisson number of updates (mean `p·m`). They
//! are an approximation of the discrete-hold chain simulated by
//! [`crate::noise`]; [`markov_chain_moments`] gives the exact moments of that
//! chain for comparison.

use crate::noise::{validate_probs, FieldDistribution};
use crate::quantum::{q_table, SystemSpec};
use crate::{Error, Result};

/// Distribution of `q`: values `q_i ∈ [0, 1]` with probabilities `p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QDistribution {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl QDistribution {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.len() != p.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} q values, {} probabilities",
                q.len(),
                p.len()
            )));
        }
        if let Some(x) = q.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidDistribution(format!(
                "q = {x} outside [0, 1]"
            )));
        }
        validate_probs(&p).map_err(Error::InvalidDistribution)?;
        Ok(Self { q, p })
    }

    /// Maps `p(Ω)` through the held-field survival probabilities of `spec`.
    pub fn from_system(spec: &SystemSpec, dist: &FieldDistribution) -> Result<Self> {
        let q = q_table(spec, dist).into_iter().map(|(_, q)| q).collect();
        Self::new(q, dist.probs().to_vec())
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// True when some `q_i = 0` carries positive weight, which sends
    /// `⟨ln q⟩` to −∞ and the annealed time average to 0.
    pub fn has_zero_q(&self) -> bool {
        self.support().any(|(q, _)| q == 0.0)
    }

    fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.q
            .iter()
            .zip(&self.p)
            .filter(|(_, p)| **p > 0.0)
            .map(|(q, p)| (*q, *p))
    }

    /// `⟨f(q)⟩`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.support().map(|(q, p)| p * f(q)).sum()
    }

    pub fn mean_q(&self) -> f64 {
        self.expect(|q| q)
    }

    pub fn mean_q2(&self) -> f64 {
        self.expect(|q| q * q)
    }

    pub fn mean_ln_q(&self) -> f64 {
        self.expect(f64::ln)
    }

    /// `ln⟨q^k⟩` for real `k ≥ 0`, via log-sum-exp.
    pub fn ln_mean_pow(&self, k: f64) -> f64 {
        if k == 0.0 {
            return 0.0;
        }
        let terms: Vec<f64> = self.support().map(|(q, p)| p.ln() + k * q.ln()).collect();
        log_sum_exp(&terms)
    }

    /// `exp(m·⟨ln q⟩)`. Returns 0 when [`has_zero_q`](Self::has_zero_q).
    pub fn annealed_time_avg(&self, m: u64) -> f64 {
        if m == 0 {
            return 1.0;
        }
        (m as f64 * self.mean_ln_q()).exp()
    }

    /// `⟨q⟩^m`.
    pub fn annealed_ensemble_avg(&self, m: u64) -> f64 {
        pow_log(self.mean_q(), m as f64)
    }

    /// `⟨q^m⟩`.
    pub fn quenched_ensemble_avg(&self, m: u64) -> f64 {
        self.ln_mean_pow(m as f64).exp()
    }

    /// Branch values `q_i^m` with their weights `p_i`; a quenched realization
    /// sits on exactly one branch.
    pub fn quenched_time_avg_branches(&self, m: u64) -> Vec<(f64, f64)> {
        self.q
            .iter()
            .zip(&self.p)
            .map(|(&q, &p)| (pow_log(q, m as f64), p))
            .collect()
    }

    /// Survival factors of one constant-field run with Poisson length:
    /// `(⟨P_p⟩, ⟨P²_p⟩) = (Σ p_i e^((q_i−1)/p), Σ p_i e^((q_i²−1)/p))`.
    pub fn finite_t_sequence_factor(&self, update_prob: f64) -> Result<(f64, f64)> {
        if !(update_prob > 0.0 && update_prob < 1.0) {
            return Err(Error::Domain(format!(
                "finite-temperature formulas need 0 < p < 1, got {update_prob}"
            )));
        }
        let first = self.expect(|q| ((q - 1.0) / update_prob).exp());
        let second = self.expect(|q| ((q * q - 1.0) / update_prob).exp());
        Ok((first, second))
    }

    /// `exp(p·m·(⟨P_p⟩ − 1))`.
    pub fn finite_t_ensemble_avg(&self, update_prob: f64, m: u64) -> Result<f64> {
        let (first, _) = self.finite_t_sequence_factor(update_prob)?;
        Ok((update_prob * m as f64 * (first - 1.0)).exp())
    }

    /// `exp(p·m·(⟨P²_p⟩ − 1))`.
    pub fn finite_t_second_moment(&self, update_prob: f64, m: u64) -> Result<f64> {
        let (_, second) = self.finite_t_sequence_factor(update_prob)?;
        Ok((update_prob * m as f64 * (second - 1.0)).exp())
    }

    /// `⟨P(m)⟩` in the given regime.
    pub fn ensemble_avg(&self, regime: Regime, m: u64) -> Result<f64> {
        match regime {
            Regime::Annealed => Ok(self.annealed_ensemble_avg(m)),
            Regime::FiniteT(p) => self.finite_t_ensemble_avg(p, m),
            Regime::Quenched => Ok(self.quenched_ensemble_avg(m)),
        }
    }

    /// `⟨P²(m)⟩` in the given regime.
    pub fn second_moment(&self, regime: Regime, m: u64) -> Result<f64> {
        match regime {
            Regime::Annealed => Ok(pow_log(self.mean_q2(), m as f64)),
            Regime::FiniteT(p) => self.finite_t_second_moment(p, m),
            Regime::Quenched => Ok(self.ln_mean_pow(2.0 * m as f64).exp()),
        }
    }

    /// `Δ²P(m)` and `Δ²P(m)/⟨P(m)⟩²`.
    pub fn variance(&self, regime: Regime, m: u64) -> Result<Variance> {
        let mf = m as f64;
        let log_ratio = match regime {
            Regime::Annealed => mf * (self.mean_q2().ln() - 2.0 * self.mean_q().ln()),
            Regime::FiniteT(p) => {
                let (first, second) = self.finite_t_sequence_factor(p)?;
                p * mf * (second - 2.0 * first + 1.0)
            }
            Regime::Quenched => self.ln_mean_pow(2.0 * mf) - 2.0 * self.ln_mean_pow(mf),
        };
        let normalized = if log_ratio.is_nan() {
            // 0/0 when the mean vanishes: treat as no spread
            0.0
        } else {
            log_ratio.max(0.0).exp_m1()
        };
        let mean = self.ensemble_avg(regime, m)?;
        let mut absolute = normalized * mean * mean;
        if !absolute.is_finite() {
            absolute = (self.second_moment(regime, m)? - mean * mean).max(0.0);
        }
        Ok(Variance {
            absolute,
            normalized,
        })
    }

    /// Relative gap `exp(ln⟨q^m⟩ − ⟨ln q^m⟩) − 1` between the quenched
    /// ensemble average and the annealed time average.
    pub fn exact_gap(&self, m: u64) -> f64 {
        let mf = m as f64;
        (self.ln_mean_pow(mf) - mf * self.mean_ln_q()).exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variance {
    pub absolute: f64,
    pub normalized: f64,
}

impl Variance {
    pub fn stddev(&self) -> f64 {
        self.absolute.sqrt()
    }
}

/// Disorder regime selected by the update probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `p = 1`
    Annealed,
    /// `0 < p < 1`
    FiniteT(f64),
    /// `p = 0`
    Quenched,
}

impl Regime {
    pub fn from_update_prob(p: f64) -> Result<Self> {
        match p {
            0.0 => Ok(Regime::Quenched),
            1.0 => Ok(Regime::Annealed),
            p if p > 0.0 && p < 1.0 => Ok(Regime::FiniteT(p)),
            p => Err(Error::Domain(format!(
                "update probability {p} outside [0, 1]"
            ))),
        }
    }
}

/// Statistics needed by the Zeno-regime expansions.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub mean_q: f64,
    pub mean_ln_q: f64,
    pub mean_q2: f64,
    /// `⟨Ω²⟩` over raw field values.
    pub omega2: f64,
    /// `⟨Ω⁴⟩` over raw field values.
    pub omega4: f64,
    /// `Δ²H_noise` in the initial state.
    pub var_h_noise: f64,
    /// `q` statistics at the system's own interval length.
    pub q_dist: QDistribution,
}

impl MomentSet {
    pub fn from_system(spec: &SystemSpec, dist: &FieldDistribution) -> Result<Self> {
        let q_dist = QDistribution::from_system(spec, dist)?;
        Ok(Self {
            mean_q: q_dist.mean_q(),
            mean_ln_q: q_dist.mean_ln_q(),
            mean_q2: q_dist.mean_q2(),
            omega2: dist.moment(2),
            omega4: dist.moment(4),
            var_h_noise: spec.noise_variance(),
            q_dist,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoGap {
    /// `(m²/2)·(Δ²H_noise)²·(ω₄ − ω₂²)·μ⁴`
    pub approx: f64,
    /// `exp(ln⟨q^m⟩ − ⟨ln q^m⟩) − 1` from the moment set's own `q` values.
    pub exact: f64,
}

/// Quartic-in-`μ` gap between the quenched ensemble average and the annealed
/// time average. `exact` is evaluated at the interval length the moments were
/// built with, `approx` at `mu`.
pub fn zeno_gap(moments: &MomentSet, m: u64, mu: f64) -> ZenoGap {
    let mf = m as f64;
    let spread = (moments.omega4 - moments.omega2 * moments.omega2).max(0.0);
    ZenoGap {
        approx: 0.5 * mf * mf * moments.var_h_noise.powi(2) * spread * mu.powi(4),
        exact: moments.q_dist.exact_gap(m),
    }
}

/// Second-order approximation of `ΔP(m)/⟨P(m)⟩` in the Zeno regime.
pub fn zeno_normalized_stddev(moments: &MomentSet, m: u64, mu: f64, regime: Regime) -> f64 {
    let mf = m as f64;
    let scale = moments.var_h_noise * mu * mu;
    let spread = (moments.omega4 - moments.omega2 * moments.omega2)
        .max(0.0)
        .sqrt();
    match regime {
        Regime::Annealed => mf.sqrt() * scale * spread,
        Regime::FiniteT(p) => mf.sqrt() * (1.0 + 1.0 / p).sqrt() * scale * moments.omega4.sqrt(),
        Regime::Quenched => mf * scale * spread,
    }
}

/// Exact `(⟨P(j)⟩, ⟨P²(j)⟩)` for `j = 1…m` under the discrete-hold chain: the
/// first level is drawn from `p`, then each step redraws from `p` with
/// probability `update_prob` and holds otherwise.
///
/// Forward recursion over the level index: `a_1 = p∘q`,
/// `a_{j+1} = (u·p·Σa_j + (1−u)·a_j)∘q`.
pub fn markov_chain_moments(qd: &QDistribution, update_prob: f64, m: usize) -> Vec<(f64, f64)> {
    let step = |a: &mut Vec<f64>, qpow: &dyn Fn(f64) -> f64| {
        let total: f64 = a.iter().sum();
        for ((a, &p), &q) in a.iter_mut().zip(&qd.p).zip(&qd.q) {
            *a = (update_prob * p * total + (1.0 - update_prob) * *a) * qpow(q);
        }
    };
    let mut first: Vec<f64> = qd.p.iter().zip(&qd.q).map(|(p, q)| p * q).collect();
    let mut second: Vec<f64> = qd.p.iter().zip(&qd.q).map(|(p, q)| p * q * q).collect();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        if j > 0 {
            step(&mut first, &|q| q);
            step(&mut second, &|q| q * q);
        }
        out.push((first.iter().sum(), second.iter().sum()));
    }
    out
}

/// `x^k` through `exp(k·ln x)`, with `0^0 = 1`.
fn pow_log(x: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        (k * x.ln()).exp()
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
