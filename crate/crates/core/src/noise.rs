//! Time-correlated random field trajectories.
//!
//! Two models are supported:
//!
//! * **Discrete hold.** The field is constant within each measurement
//!   interval. Before every new interval an update fires with probability
//!   `p`; an update redraws the value from `p(Ω)` (possibly the same value),
//!   otherwise the previous value is held. `p = 0` is quenched disorder,
//!   `p = 1` annealed disorder.
//! * **Continuous telegraph.** A two-valued field that toggles at
//!   exponentially distributed waiting times with mean `τ`, sliced into
//!   piecewise-constant segments per interval.
//!
//! Trajectories refer to field values by their index ("level") in the
//! [`FieldDistribution`], so callers can look up cached per-level quantities.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use crate::{Error, Result};

const PROB_SUM_TOL: f64 = 1e-12;

/// Discrete distribution `p(Ω)` over distinct real field values (rad/s).
#[derive(Debug, Clone)]
pub struct FieldDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl FieldDistribution {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("no field values".into()));
        }
        if values.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!("non-finite value {v}")));
        }
        for (i, a) in values.iter().enumerate() {
            if values[i + 1..].contains(a) {
                return Err(Error::InvalidDistribution(format!("duplicate value {a}")));
            }
        }
        validate_probs(&probs).map_err(Error::InvalidDistribution)?;
        let sampler =
            WeightedIndex::new(&probs).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(Self {
            values,
            probs,
            sampler,
        })
    }

    /// A distribution over the level indices `0, 1, …, n-1`. Used when only
    /// the statistics of `q` matter and field values are never evaluated.
    pub fn levels(probs: Vec<f64>) -> Result<Self> {
        let values = (0..probs.len()).map(|i| i as f64).collect();
        Self::new(values, probs)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, level: usize) -> f64 {
        self.values[level]
    }

    /// Raw moment `Σ p_i Ω_i^k`.
    pub fn moment(&self, k: i32) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| p * v.powi(k))
            .sum()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }
}

/// Shared probability-vector validation, also used by the analytic module.
pub(crate) fn validate_probs(probs: &[f64]) -> std::result::Result<(), String> {
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(format!("probability {p} is not a non-negative number"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(format!("probabilities sum to {total}, not 1"));
    }
    Ok(())
}

/// Per-interval update probability of the discrete-hold model, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UpdateProb(f64);

impl UpdateProb {
    pub const QUENCHED: UpdateProb = UpdateProb(0.0);
    pub const ANNEALED: UpdateProb = UpdateProb(1.0);

    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::InvalidCorrelation(format!(
                "update probability {p} outside [0, 1]"
            )))
        }
    }

    /// Update probability `e^(−E/kT)` for a trapping barrier `E` at
    /// temperature `T`, given the ratio `E/kT`.
    pub fn from_barrier(barrier_over_kt: f64) -> Result<Self> {
        temperature_to_update_prob(barrier_over_kt).map(Self)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `p = e^(−E/kT)`. Zero barrier (infinite temperature) gives 1, an infinite
/// barrier (zero temperature) gives 0.
pub fn temperature_to_update_prob(barrier_over_kt: f64) -> Result<f64> {
    if barrier_over_kt.is_nan() || barrier_over_kt < 0.0 {
        return Err(Error::Domain(format!(
            "E/kT must be non-negative, got {barrier_over_kt}"
        )));
    }
    Ok((-barrier_over_kt).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationSpec {
    DiscreteHold(UpdateProb),
    /// Mean time between switches, seconds. May be `+inf`.
    ContinuousTelegraph {
        mean_switch_time: f64,
    },
}

impl CorrelationSpec {
    pub fn discrete_hold(update_prob: f64) -> Result<Self> {
        UpdateProb::new(update_prob).map(Self::DiscreteHold)
    }

    pub fn continuous_telegraph(mean_switch_time: f64) -> Result<Self> {
        if mean_switch_time.is_nan() || mean_switch_time <= 0.0 {
            return Err(Error::InvalidCorrelation(format!(
                "mean switch time must be positive, got {mean_switch_time}"
            )));
        }
        Ok(Self::ContinuousTelegraph { mean_switch_time })
    }
}

/// A stretch of constant field within one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Seconds, strictly positive.
    pub duration: f64,
    pub level: usize,
}

/// Field within one measurement interval.
#[derive(Debug, Clone, PartialEq)]
pub enum Interval {
    /// Constant for the whole interval.
    Held(usize),
    /// At least one switch inside the interval; segments in time order.
    Switching(Vec<Segment>),
}

/// One realization `Ω_{j,α}`, `j = 1…m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrajectory {
    intervals: Vec<Interval>,
}

impl FieldTrajectory {
    pub fn from_levels(levels: impl IntoIterator<Item = usize>) -> Self {
        Self {
            intervals: levels.into_iter().map(Interval::Held).collect(),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Level of each interval for an all-held trajectory, `None` if any
    /// interval contains a switch.
    pub fn held_levels(&self) -> Option<Vec<usize>> {
        self.intervals
            .iter()
            .map(|iv| match iv {
                Interval::Held(l) => Some(*l),
                Interval::Switching(_) => None,
            })
            .collect()
    }

    /// Number of level changes along the whole trajectory, including those at
    /// segment boundaries inside intervals.
    pub fn switch_count(&self) -> usize {
        let mut prev = None;
        let mut count = 0;
        for iv in &self.intervals {
            let levels: &mut dyn Iterator<Item = usize> = match iv {
                Interval::Held(l) => &mut std::iter::once(*l),
                Interval::Switching(segs) => &mut segs.iter().map(|s| s.level),
            };
            for l in levels {
                if prev.is_some_and(|p| p != l) {
                    count += 1;
                }
                prev = Some(l);
            }
        }
        count
    }

    /// Time-averaged field `Ω̃` of every interval.
    pub fn interval_means(&self, dist: &FieldDistribution, mu: f64) -> Vec<f64> {
        self.intervals
            .iter()
            .map(|iv| match iv {
                Interval::Held(l) => dist.value(*l),
                Interval::Switching(segs) => {
                    segs.iter()
                        .map(|s| s.duration * dist.value(s.level))
                        .sum::<f64>()
                        / mu
                }
            })
            .collect()
    }

    /// Checks level bounds, positive durations and per-interval duration sums.
    pub fn validate(&self, dist: &FieldDistribution, mu: f64) -> Result<()> {
        let check_level = |l: usize| {
            if l < dist.len() {
                Ok(())
            } else {
                Err(Error::Dimension {
                    expected: dist.len(),
                    got: l,
                })
            }
        };
        for iv in &self.intervals {
            match iv {
                Interval::Held(l) => check_level(*l)?,
                Interval::Switching(segs) => {
                    let mut total = 0.0;
                    for s in segs {
                        check_level(s.level)?;
                        if !(s.duration > 0.0) {
                            return Err(Error::Schedule {
                                expected: mu,
                                got: s.duration,
                            });
                        }
                        total += s.duration;
                    }
                    if (total - mu).abs() > 1e-12 * mu {
                        return Err(Error::Schedule {
                            expected: mu,
                            got: total,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Seed of realization `index` under `master_seed`.
///
/// `mix(s, i) = splitmix64(s ^ splitmix64(i + 0x9E3779B97F4A7C15))`, where
/// `splitmix64` is the finalizer of Steele, Lea and Flood's SplitMix64
/// generator. Each realization is reproducible on its own, independent of
/// the order or thread it runs on.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator used for every trajectory.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn require_intervals(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("need at least one interval".into()));
    }
    Ok(())
}

/// Discrete-hold trajectory of `m` intervals.
pub fn sample_discrete_hold(
    dist: &FieldDistribution,
    update_prob: UpdateProb,
    m: usize,
    seed: u64,
) -> Result<FieldTrajectory> {
    require_intervals(m)?;
    let mut rng = rng_from_seed(seed);
    let p = update_prob.get();
    let mut levels = Vec::with_capacity(m);
    let mut current = dist.draw(&mut rng);
    levels.push(current);
    for _ in 1..m {
        if rng.random_bool(p) {
            current = dist.draw(&mut rng);
        }
        levels.push(current);
    }
    Ok(FieldTrajectory::from_levels(levels))
}

/// Two-state random telegraph signal over `m` intervals of length `mu`.
pub fn sample_continuous_telegraph(
    dist: &FieldDistribution,
    mean_switch_time: f64,
    m: usize,
    mu: f64,
    seed: u64,
) -> Result<FieldTrajectory> {
    require_intervals(m)?;
    if dist.len() != 2 {
        return Err(Error::UnsupportedModel(format!(
            "telegraph noise needs exactly 2 field values, got {}",
            dist.len()
        )));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!(
            "interval length must be positive, got {mu}"
        )));
    }
    CorrelationSpec::continuous_telegraph(mean_switch_time)?;

    let mut rng = rng_from_seed(seed);
    let waiting =
        Exp::new(1.0 / mean_switch_time).map_err(|e| Error::InvalidCorrelation(e.to_string()))?;
    let next_wait = |rng: &mut ChaCha8Rng| {
        if mean_switch_time.is_infinite() {
            f64::INFINITY
        } else {
            waiting.sample(rng)
        }
    };

    let mut level = dist.draw(&mut rng);
    // time remaining until the next switch, measured from the current position
    let mut until_switch = next_wait(&mut rng);
    let mut intervals = Vec::with_capacity(m);
    for _ in 0..m {
        if until_switch >= mu {
            intervals.push(Interval::Held(level));
            until_switch -= mu;
            continue;
        }
        let mut segs = Vec::new();
        let mut elapsed = 0.0;
        while until_switch < mu - elapsed {
            if until_switch > 0.0 {
                segs.push(Segment {
                    duration: until_switch,
                    level,
                });
                elapsed += until_switch;
            }
            level = 1 - level;
            until_switch = next_wait(&mut rng);
        }
        let rest = mu - elapsed;
        until_switch -= rest;
        segs.push(Segment {
            duration: rest,
            level,
        });
        intervals.push(if segs.len() == 1 {
            Interval::Held(level)
        } else {
            Interval::Switching(segs)
        });
    }
    Ok(FieldTrajectory { intervals })
}

/// Dispatches on the correlation model. `mu` is only used by the telegraph
/// model.
pub fn sample(
    dist: &FieldDistribution,
    corr: &CorrelationSpec,
    m: usize,
    mu: f64,
    seed: u64,
) -> Result<FieldTrajectory> {
    match *corr {
        CorrelationSpec::DiscreteHold(p) => sample_discrete_hold(dist, p, m, seed),
        CorrelationSpec::ContinuousTelegraph { mean_switch_time } => {
            sample_continuous_telegraph(dist, mean_switch_time, m, mu, seed)
        }
    }
}
