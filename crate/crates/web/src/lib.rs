//! Browser bindings. Each operation is a plain function returning JSON so it
//! can be tested natively; the `#[wasm_bindgen]` wrappers only convert
//! errors.

use serde_json::json;
use sqzd_core::analytic::{markov_chain_moments, QDistribution, Regime};
use sqzd_core::engine::{run_experiment, AnalyticCurve, ExperimentConfig, Mode};
use sqzd_core::quantum::SystemSpec;
use sqzd_core::{NS, TWO_PI_MHZ};
use wasm_bindgen::prelude::*;

/// Keeps a browser tab responsive.
const MAX_WORK: u64 = 20_000_000;

fn abstract_config(
    q_values: &[f64],
    probs: &[f64],
    update_prob: f64,
    m: usize,
    realizations: u64,
    seed: u32,
) -> Result<ExperimentConfig, String> {
    if realizations.saturating_mul(m as u64) > MAX_WORK {
        return Err(format!("m × N must stay below {MAX_WORK}"));
    }
    let mut cfg = ExperimentConfig::blank(Mode::AbstractQ);
    cfg.name = "web".into();
    cfg.measurements = m;
    cfg.realizations = realizations;
    cfg.master_seed = seed.into();
    cfg.distribution.probs = probs.to_vec();
    cfg.distribution.q_values = Some(q_values.to_vec());
    cfg.correlation.update_probs = Some(vec![update_prob]);
    Ok(cfg)
}

/// Monte Carlo ensemble mean and spread for one update probability, next to
/// the closed form of its regime and the exact chain moments.
pub fn ensemble(
    q_values: &[f64],
    probs: &[f64],
    update_prob: f64,
    m: usize,
    realizations: u64,
    seed: u32,
) -> Result<String, String> {
    let mut cfg = abstract_config(q_values, probs, update_prob, m, realizations, seed)?;
    cfg.time_average_samples = 0;
    cfg.validate().map_err(|e| e.to_string())?;
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let curve = &report.curves[0];
    let analytic = curve
        .analytic
        .as_ref()
        .expect("discrete-hold curve has a closed form");
    let chain = markov_chain_moments(&report.q_dist, update_prob, m);
    Ok(json!({
        "regime": format!("{:?}", analytic.regime),
        "mc_mean": curve.stats.means(),
        "mc_stddev": curve.stats.stddevs(),
        "mc_accum_stddev": curve.stats.accumulated_stddevs(),
        "analytic_mean": analytic.mean,
        "analytic_stddev": analytic.stddev,
        "chain_mean": chain.iter().map(|c| c.0).collect::<Vec<_>>(),
        "underflowed": curve.stats.underflowed(),
    })
    .to_string())
}

/// `q(Ω)` of the qubit `H = Δσz + Ωσx` over `Ω ∈ [0, field_max]`.
pub fn qubit_survival(
    detuning_mhz: f64,
    mu_ns: f64,
    field_max_mhz: f64,
    points: usize,
) -> Result<String, String> {
    if !(2..=10_000).contains(&points) || field_max_mhz.is_nan() || field_max_mhz <= 0.0 {
        return Err("need 2–10000 points and a positive field range".into());
    }
    let spec =
        SystemSpec::qubit_rabi(detuning_mhz * TWO_PI_MHZ, mu_ns * NS).map_err(|e| e.to_string())?;
    let fields: Vec<f64> = (0..points)
        .map(|i| field_max_mhz * i as f64 / (points - 1) as f64)
        .collect();
    let q: Vec<f64> = fields
        .iter()
        .map(|f| spec.survival_prob(f * TWO_PI_MHZ))
        .collect();
    Ok(json!({ "field_mhz": fields, "q": q }).to_string())
}

/// Time averages of `count` single realizations with the annealed prediction
/// and the quenched branches.
pub fn time_averages(
    q_values: &[f64],
    probs: &[f64],
    update_prob: f64,
    m: usize,
    truncation: usize,
    count: u64,
    seed: u32,
) -> Result<String, String> {
    if count.saturating_mul(m.max(truncation) as u64) > MAX_WORK {
        return Err(format!("count × max(m, M) must stay below {MAX_WORK}"));
    }
    let mut cfg = abstract_config(q_values, probs, update_prob, m, count, seed)?;
    cfg.time_average_truncation = truncation;
    cfg.time_average_samples = count as usize;
    cfg.validate().map_err(|e| e.to_string())?;
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let qd: &QDistribution = &report.q_dist;
    let steps = 1..=m as u64;
    let branches: Vec<Vec<f64>> = (0..qd.q_values().len())
        .map(|i| {
            steps
                .clone()
                .map(|j| qd.quenched_time_avg_branches(j)[i].0)
                .collect()
        })
        .collect();
    let annealed = AnalyticCurve::new(qd, Regime::Annealed, m).map_err(|e| e.to_string())?;
    Ok(json!({
        "time_averages": report.curves[0].time_averages.iter().map(|s| &s.values).collect::<Vec<_>>(),
        "annealed_time_avg": steps.map(|j| qd.annealed_time_avg(j)).collect::<Vec<_>>(),
        "annealed_ensemble_avg": annealed.mean,
        "branches": branches,
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = ensemble)]
pub fn ensemble_js(
    q_values: Vec<f64>,
    probs: Vec<f64>,
    update_prob: f64,
    m: usize,
    realizations: u32,
    seed: u32,
) -> Result<String, JsValue> {
    js(ensemble(
        &q_values,
        &probs,
        update_prob,
        m,
        realizations.into(),
        seed,
    ))
}

#[wasm_bindgen(js_name = qubitSurvival)]
pub fn qubit_survival_js(
    detuning_mhz: f64,
    mu_ns: f64,
    field_max_mhz: f64,
    points: usize,
) -> Result<String, JsValue> {
    js(qubit_survival(detuning_mhz, mu_ns, field_max_mhz, points))
}

#[wasm_bindgen(js_name = timeAverages)]
pub fn time_averages_js(
    q_values: Vec<f64>,
    probs: Vec<f64>,
    update_prob: f64,
    m: usize,
    truncation: usize,
    count: u32,
    seed: u32,
) -> Result<String, JsValue> {
    js(time_averages(
        &q_values,
        &probs,
        update_prob,
        m,
        truncation,
        count.into(),
        seed,
    ))
}
