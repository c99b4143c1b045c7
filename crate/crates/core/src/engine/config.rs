use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::QDistribution;
use crate::noise::{CorrelationSpec, FieldDistribution};
use crate::quantum::SystemSpec;
use crate::{Error, Result, NS, TWO_PI_MHZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Survival probabilities per field level are given directly.
    AbstractQ,
    /// `H = Δσz + Ωσx` qubit, `q` from the dynamics.
    QubitDynamics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub probs: Vec<f64>,
    /// Abstract mode: `q` of each level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_values: Option<Vec<f64>>,
    /// Qubit mode: field values in MHz (multiplied by 2π).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_mhz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    /// Discrete-hold update probabilities, one curve each.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update_probs: Option<Vec<f64>>,
    /// Telegraph mean switching times in ns, one curve each.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_times_ns: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Δ in MHz (multiplied by 2π).
    pub detuning_mhz: f64,
    /// Interval between measurements, ns.
    pub mu_ns: f64,
    /// Static mean field folded into `H₀`, MHz.
    #[serde(default)]
    pub mean_field_mhz: f64,
}

/// One experiment: a distribution, a list of correlation settings (one curve
/// set each) and the Monte Carlo sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub mode: Mode,
    /// `m`, measurements per realization.
    pub measurements: usize,
    /// `N`, realizations per curve.
    pub realizations: u64,
    /// `M` in the time average.
    #[serde(default = "default_truncation")]
    pub time_average_truncation: usize,
    /// Realizations whose time-average curves are written out.
    #[serde(default = "default_samples")]
    pub time_average_samples: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Also write the raw `P_α(j)` series of every realization.
    #[serde(default)]
    pub save_trajectories: bool,
    pub distribution: DistributionConfig,
    #[serde(default)]
    pub correlation: CorrelationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_truncation() -> usize {
    2000
}

fn default_samples() -> usize {
    50
}

impl ExperimentConfig {
    /// Unvalidated starting point with every optional field at its default
    /// and zero sizes, for building a config field by field.
    pub fn blank(mode: Mode) -> Self {
        Self {
            name: default_name(),
            mode,
            measurements: 0,
            realizations: 0,
            time_average_truncation: default_truncation(),
            time_average_samples: default_samples(),
            master_seed: 0,
            threads: 0,
            output_dir: None,
            save_trajectories: false,
            distribution: DistributionConfig {
                probs: Vec::new(),
                q_values: None,
                field_mhz: None,
            },
            correlation: CorrelationConfig::default(),
            system: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg = Self::from_toml_str_unchecked(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without the semantic checks of [`validate`](Self::validate).
    pub fn from_toml_str_unchecked(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .and_then(|s| text.get(s))
                .map(|s| s.trim().to_string())
                .unwrap_or_else(|| "<file>".into());
            Error::config(field, e.message())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every field; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.measurements == 0 {
            return Err(Error::config("measurements", "must be at least 1"));
        }
        if self.realizations == 0 {
            return Err(Error::config("realizations", "must be at least 1"));
        }
        if self.time_average_truncation == 0 {
            return Err(Error::config(
                "time_average_truncation",
                "must be at least 1",
            ));
        }
        if self.time_average_samples as u64 > self.realizations {
            return Err(Error::config(
                "time_average_samples",
                "cannot exceed the number of realizations",
            ));
        }
        self.field_distribution()?;
        self.q_distribution()?;
        self.correlations()?;
        Ok(())
    }

    pub fn field_distribution(&self) -> Result<FieldDistribution> {
        let d = &self.distribution;
        let wrap = |e: Error| Error::config("distribution.probs", e.to_string());
        match self.mode {
            Mode::AbstractQ => {
                if d.field_mhz.is_some() {
                    return Err(Error::config(
                        "distribution.field_mhz",
                        "not used in abstract_q mode",
                    ));
                }
                FieldDistribution::levels(d.probs.clone()).map_err(wrap)
            }
            Mode::QubitDynamics => {
                let values = d.field_mhz.as_ref().ok_or_else(|| {
                    Error::config("distribution.field_mhz", "required in qubit_dynamics mode")
                })?;
                if d.q_values.is_some() {
                    return Err(Error::config(
                        "distribution.q_values",
                        "not used in qubit_dynamics mode",
                    ));
                }
                let values = values.iter().map(|v| v * TWO_PI_MHZ).collect();
                FieldDistribution::new(values, d.probs.clone())
                    .map_err(|e| Error::config("distribution", e.to_string()))
            }
        }
    }

    pub fn system_spec(&self) -> Result<Option<SystemSpec>> {
        match (self.mode, &self.system) {
            (Mode::AbstractQ, _) => Ok(None),
            (Mode::QubitDynamics, None) => {
                Err(Error::config("system", "required in qubit_dynamics mode"))
            }
            (Mode::QubitDynamics, Some(s)) => {
                if !(s.mu_ns > 0.0 && s.mu_ns.is_finite()) {
                    return Err(Error::config("system.mu_ns", "must be positive"));
                }
                if !s.detuning_mhz.is_finite() {
                    return Err(Error::config("system.detuning_mhz", "must be finite"));
                }
                let spec = SystemSpec::qubit_rabi(s.detuning_mhz * TWO_PI_MHZ, s.mu_ns * NS)
                    .and_then(|spec| spec.with_static_field(s.mean_field_mhz * TWO_PI_MHZ))
                    .map_err(|e| Error::config("system", e.to_string()))?;
                Ok(Some(spec))
            }
        }
    }

    /// Interval length in seconds; abstract mode uses a unit interval.
    pub fn mu(&self) -> f64 {
        self.system.as_ref().map_or(1.0, |s| s.mu_ns * NS)
    }

    pub fn q_distribution(&self) -> Result<QDistribution> {
        match self.mode {
            Mode::AbstractQ => {
                let q = self.distribution.q_values.clone().ok_or_else(|| {
                    Error::config("distribution.q_values", "required in abstract_q mode")
                })?;
                QDistribution::new(q, self.distribution.probs.clone())
                    .map_err(|e| Error::config("distribution.q_values", e.to_string()))
            }
            Mode::QubitDynamics => {
                let spec = self.system_spec()?.expect("qubit mode has a system");
                QDistribution::from_system(&spec, &self.field_distribution()?)
                    .map_err(|e| Error::config("distribution", e.to_string()))
            }
        }
    }

    /// Correlation settings in file order: update probabilities first, then
    /// switching times.
    pub fn correlations(&self) -> Result<Vec<CorrelationSpec>> {
        let mut out = Vec::new();
        if let Some(ps) = &self.correlation.update_probs {
            for &p in ps {
                out.push(
                    CorrelationSpec::discrete_hold(p)
                        .map_err(|e| Error::config("correlation.update_probs", e.to_string()))?,
                );
            }
        }
        if let Some(taus) = &self.correlation.switch_times_ns {
            if self.mode == Mode::AbstractQ {
                return Err(Error::config(
                    "correlation.switch_times_ns",
                    "telegraph noise needs qubit_dynamics mode",
                ));
            }
            if self.distribution.probs.len() != 2 {
                return Err(Error::config(
                    "correlation.switch_times_ns",
                    "telegraph noise needs exactly two field values",
                ));
            }
            for &t in taus {
                out.push(
                    CorrelationSpec::continuous_telegraph(t * NS)
                        .map_err(|e| Error::config("correlation.switch_times_ns", e.to_string()))?,
                );
            }
        }
        if out.is_empty() {
            return Err(Error::config(
                "correlation",
                "give update_probs and/or switch_times_ns",
            ));
        }
        Ok(out)
    }
}
