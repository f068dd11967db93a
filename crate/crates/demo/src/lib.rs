//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Results are flat `Float64Array`s; the layout of each is given on the
//! function.

use bindet::closedform::{closed_form_fim, default_order};
use bindet::detection::detection_probability;
use bindet::fisher::{expected_fim_quadrature, tau_grid};
use bindet::montecarlo::{ml_estimate, sample_decisions, sample_field};
use bindet::{DetectorConfig, FieldConfig, QuadratureSpec, SimConfig, TargetParams};
use wasm_bindgen::prelude::*;

fn js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

/// CRBs over a threshold sweep at noise variance `sigma2` and `T = 1`.
///
/// Five values per threshold: `tau, crb_P, crb_x` from quadrature, then
/// `crb_P, crb_x` from the closed form (NaN when unavailable for `alpha`).
#[wasm_bindgen]
pub fn crb_curve(
    alpha: f64,
    sigma2: f64,
    power: f64,
    rho: f64,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<Vec<f64>, JsError> {
    let field = FieldConfig::new(rho).map_err(js)?;
    let quad = QuadratureSpec::default();
    let m = default_order(alpha);
    let mut out = Vec::new();
    for tau in tau_grid(start, stop, step) {
        let cfg = DetectorConfig::new(tau, sigma2, 1.0, alpha).map_err(js)?;
        let exact = expected_fim_quadrature(&cfg, power, &field, &quad).map_err(js)?;
        let (cp, cx) = match closed_form_fim(&cfg, power, &field, m) {
            Ok((r, _)) => (r.crb_p, r.crb_x),
            Err(_) => (f64::NAN, f64::NAN),
        };
        out.extend([tau, exact.crb_p, exact.crb_x, cp, cx]);
    }
    Ok(out)
}

/// `n` pairs `(r, P_D(r))` for `r` evenly spaced in `(0, r_max]`, followed
/// by the false-alarm probability as a final single value.
#[wasm_bindgen]
pub fn detection_curve(
    tau: f64,
    sigma2: f64,
    alpha: f64,
    power: f64,
    r_max: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    let cfg = DetectorConfig::new(tau, sigma2, 1.0, alpha).map_err(js)?;
    let mut out = Vec::with_capacity(2 * n + 1);
    for i in 1..=n {
        let r = r_max * i as f64 / n as f64;
        out.push(r);
        out.push(detection_probability(&cfg, power, r).map_err(js)?);
    }
    out.push(cfg.false_alarm());
    Ok(out)
}

/// One simulated field with the target at the origin, its decisions and
/// the ML estimate.
///
/// Layout: `P_hat, x_hat, y_hat, converged (0/1), region_radius`, then one
/// `x, y, detected (0/1)` triple per sensor. The estimate is NaN when no
/// sensor detected. `region_radius <= 0` selects the default radius.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_trial(
    tau: f64,
    sigma2: f64,
    alpha: f64,
    power: f64,
    rho: f64,
    region_radius: f64,
    seed: u64,
    trial: u64,
) -> Result<Vec<f64>, JsError> {
    let det = DetectorConfig::new(tau, sigma2, 1.0, alpha).map_err(js)?;
    let field = FieldConfig::new(rho).map_err(js)?;
    let truth = TargetParams::new(power, 0.0, 0.0).map_err(js)?;
    let mut cfg = SimConfig::new(field, det, truth, 1, seed).map_err(js)?;
    if region_radius > 0.0 {
        cfg = cfg.with_region_radius(region_radius).map_err(js)?;
    }
    let sensors = sample_field(&cfg, trial);
    let records = sample_decisions(&cfg, &sensors, trial).map_err(js)?;
    let est = ml_estimate(&det, &records, &truth).ok();
    let mut out = Vec::with_capacity(5 + 3 * records.len());
    match est {
        Some(e) => out.extend([
            e.theta.power,
            e.theta.x,
            e.theta.y,
            e.converged as u8 as f64,
        ]),
        None => out.extend([f64::NAN, f64::NAN, f64::NAN, 0.0]),
    }
    out.push(cfg.region_radius);
    for r in &records {
        out.extend([r.x, r.y, r.detected as u8 as f64]);
    }
    Ok(out)
}
