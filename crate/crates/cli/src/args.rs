use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sqzd_core::engine::{ExperimentConfig, Mode, SystemConfig, Tolerance};
use sqzd_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "sqzd",
    version,
    about = "Survival statistics of repeatedly measured quantum systems under correlated noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run the Monte Carlo experiment and write curve files plus a manifest.
    Simulate(RunArgs),
    /// Evaluate the closed-form curves only and print them as CSV.
    Analytic(AnalyticArgs),
    /// Check Monte Carlo curves against the closed forms.
    Compare(CompareArgs),
    /// Run a grid of update probabilities or switching times.
    Sweep(SweepArgs),
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Output directory; defaults to `output_dir` from the config, then
    /// `runs/<name>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
    /// Exit with status 1 if any curve is outside tolerance.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Directory of a finished run (contains manifest.json). Without it the
    /// experiment is run from the config and flags.
    #[arg(long, conflicts_with = "config")]
    pub run_dir: Option<PathBuf>,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Also write the fresh run here.
    #[arg(long, requires = "config")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Linear grid of update probabilities, `START:STOP:COUNT`.
    #[arg(long, value_parser = parse_grid)]
    pub p_grid: Option<Grid>,
    /// Log-spaced grid of mean switching times in ns, `START:STOP:COUNT`.
    #[arg(long, value_parser = parse_grid)]
    pub tau_grid: Option<Grid>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Clone, Copy)]
pub struct ToleranceArgs {
    /// Allowed deviation in standard errors.
    #[arg(long, default_value_t = 5.0)]
    pub se: f64,
    /// Relative allowance for finite-temperature curves.
    #[arg(long, default_value_t = 0.03)]
    pub rel: f64,
    /// Relative allowance for annealed and quenched curves.
    #[arg(long, default_value_t = 0.0)]
    pub exact_rel: f64,
}

impl ToleranceArgs {
    pub fn get(self) -> Tolerance {
        Tolerance {
            se_multiple: self.se,
            finite_t_relative: self.rel,
            exact_relative: self.exact_rel,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    AbstractQ,
    QubitDynamics,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::AbstractQ => Mode::AbstractQ,
            ModeArg::QubitDynamics => Mode::QubitDynamics,
        }
    }
}

/// Config file plus per-field overrides. Flags win over the file.
#[derive(Args)]
pub struct ExperimentArgs {
    /// TOML experiment file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Measurements per realization, m.
    #[arg(long, short = 'm')]
    pub measurements: Option<usize>,
    /// Realizations per curve, N.
    #[arg(long, short = 'n')]
    pub realizations: Option<u64>,
    /// Time-average truncation M.
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Realizations whose time averages are written.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub q_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub field_mhz: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub update_probs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub switch_times_ns: Option<Vec<f64>>,
    #[arg(long)]
    pub detuning_mhz: Option<f64>,
    #[arg(long)]
    pub mu_ns: Option<f64>,
    #[arg(long)]
    pub mean_field_mhz: Option<f64>,
    /// Write every realization's survival series.
    #[arg(long)]
    pub save_trajectories: bool,
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let cfg = self.resolve_unchecked()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// File plus overrides, not yet validated.
    pub fn resolve_unchecked(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                // validated after the overrides are applied
                ExperimentConfig::from_toml_str_unchecked(&text)?
            }
            None => ExperimentConfig::blank(self.mode.map_or(Mode::AbstractQ, Into::into)),
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        set(&mut cfg.name, &self.name);
        if let Some(m) = self.mode {
            cfg.mode = m.into();
        }
        set(&mut cfg.measurements, &self.measurements);
        set(&mut cfg.realizations, &self.realizations);
        set(&mut cfg.time_average_truncation, &self.truncation);
        set(&mut cfg.time_average_samples, &self.samples);
        set(&mut cfg.master_seed, &self.seed);
        set(&mut cfg.threads, &self.threads);
        set(&mut cfg.distribution.probs, &self.probs);
        if self.q_values.is_some() {
            cfg.distribution.q_values.clone_from(&self.q_values);
        }
        if self.field_mhz.is_some() {
            cfg.distribution.field_mhz.clone_from(&self.field_mhz);
        }
        if self.update_probs.is_some() {
            cfg.correlation.update_probs.clone_from(&self.update_probs);
        }
        if self.switch_times_ns.is_some() {
            cfg.correlation
                .switch_times_ns
                .clone_from(&self.switch_times_ns);
        }
        if self.detuning_mhz.is_some() || self.mu_ns.is_some() || self.mean_field_mhz.is_some() {
            let sys = cfg.system.get_or_insert(SystemConfig {
                detuning_mhz: 0.0,
                mu_ns: 0.0,
                mean_field_mhz: 0.0,
            });
            set(&mut sys.detuning_mhz, &self.detuning_mhz);
            set(&mut sys.mu_ns, &self.mu_ns);
            set(&mut sys.mean_field_mhz, &self.mean_field_mhz);
        }
        cfg.save_trajectories |= self.save_trajectories;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    start: f64,
    stop: f64,
    count: usize,
}

impl Grid {
    pub fn linear(self) -> Vec<f64> {
        self.points(|a, b, t| a + (b - a) * t)
    }

    pub fn logarithmic(self) -> Vec<f64> {
        self.points(|a, b, t| (a.ln() + (b.ln() - a.ln()) * t).exp())
    }

    fn points(self, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| {
                let t = i as f64 / (self.count - 1) as f64;
                if i + 1 == self.count {
                    self.stop
                } else {
                    tidy(f(self.start, self.stop, t))
                }
            })
            .collect()
    }
}

/// Rounds to 12 significant digits so grid points print as typed.
fn tidy(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err("expected START:STOP:COUNT".into());
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}"));
    let count = n.trim().parse::<usize>().map_err(|e| format!("{n}: {e}"))?;
    if count == 0 {
        return Err("COUNT must be at least 1".into());
    }
    Ok(Grid {
        start: num(a)?,
        stop: num(b)?,
        count,
    })
}
