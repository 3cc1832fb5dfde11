//! Browser bindings for the hydrogen weak-value experiment.
//!
//! Each export takes plain numbers and returns a JSON string. The `*_json`
//! functions hold the logic and run natively; the `#[wasm_bindgen]`
//! wrappers only convert errors.

use serde::Serialize;
use wasm_bindgen::prelude::*;
use weakcollapse::hydrogen::HydrogenScenario;
use weakcollapse::montecarlo::{convergence_report, SimulationSpec};
use weakcollapse::pointer::{shift_curve, weak_limit_slope};
use weakcollapse::protocol::averaged_weak_value;
use weakcollapse::{spectral_decompose, Averaging, Model, WeakValue, C64};

/// Amplitudes of the preselected (`a`) and postselected (`b`) spin states.
fn scenario(a_re: f64, a_im: f64, b_re: f64, b_im: f64) -> Result<HydrogenScenario, String> {
    HydrogenScenario::new(C64::new(a_re, a_im), C64::new(b_re, b_im), 1.0).map_err(|e| e.to_string())
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("report types always serialize")
}

#[derive(Serialize)]
struct PredictionPoint {
    ratio: f64,
    vn: f64,
    objective: f64,
}

/// Both averaged predictions against `Δt_c/Δt_m` on `[0, max_ratio]`.
pub fn prediction_curve_json(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    max_ratio: f64,
    points: usize,
) -> Result<String, String> {
    if points < 2 || max_ratio <= 0.0 || !max_ratio.is_finite() {
        return Err("need at least 2 points and a positive range".into());
    }
    let s = scenario(a_re, a_im, b_re, b_im)?;
    let curve = (0..points)
        .map(|k| {
            // Δt_c = 0 is outside the model; start the curve just above it.
            let ratio = (max_ratio * k as f64 / (points - 1) as f64).max(1e-9);
            let cfg = s.config(1.0, ratio).map_err(|e| e.to_string())?;
            let vn = averaged_weak_value(&cfg, Model::VonNeumann, Averaging::Uniform).map_err(|e| e.to_string())?;
            let obj = averaged_weak_value(&cfg, Model::Objective, Averaging::Uniform).map_err(|e| e.to_string())?;
            Ok(PredictionPoint { ratio, vn: vn.re(), objective: obj.re() })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(to_json(&curve))
}

#[derive(Serialize)]
struct ConvergencePoint {
    trials: u64,
    mean: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct Convergence {
    target: WeakValue,
    points: Vec<ConvergencePoint>,
}

/// Running Monte Carlo mean at decade checkpoints up to `10^decades` trials.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_json(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    ratio: f64,
    objective: bool,
    seed: u64,
    decades: u32,
) -> Result<String, String> {
    if !(1..=7).contains(&decades) {
        return Err("decades must be between 1 and 7".into());
    }
    let cfg = scenario(a_re, a_im, b_re, b_im)?.config(1.0, ratio).map_err(|e| e.to_string())?;
    let model = if objective { Model::Objective } else { Model::VonNeumann };
    let target = averaged_weak_value(&cfg, model, Averaging::Uniform).map_err(|e| e.to_string())?;
    let checkpoints: Vec<u64> = (1..=decades).map(|k| 10u64.pow(k)).collect();
    let trials = *checkpoints.last().unwrap();
    let report =
        convergence_report(&SimulationSpec { cfg, model, trials, seed }, &checkpoints).map_err(|e| e.to_string())?;
    let points =
        report.iter().map(|r| ConvergencePoint { trials: r.trials, mean: r.mean.re(), stderr: r.stderr }).collect();
    Ok(to_json(&Convergence { target, points }))
}

#[derive(Serialize)]
struct PointerCurve {
    weak_value: WeakValue,
    slope: f64,
    points: Vec<(f64, f64)>,
}

/// Pointer shift per unit coupling for `g/σ` on a log grid from `10^-3` to
/// `10^max_log10`, with the weak-limit slope.
pub fn pointer_json(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    max_log10: f64,
    points: usize,
) -> Result<String, String> {
    if points < 2 || !(-3.0 < max_log10 && max_log10 <= 2.0) {
        return Err("need at least 2 points and -3 < max_log10 <= 2".into());
    }
    let s = scenario(a_re, a_im, b_re, b_im)?;
    let cfg = s.config(1.0, 1.0).map_err(|e| e.to_string())?;
    let obs = spectral_decompose(cfg.weak_observable(), 1e-9).map_err(|e| e.to_string())?;
    let (psi1, psi2) = (s.psi_in(), s.psi_fin());
    let grid: Vec<f64> =
        (0..points).map(|k| 10f64.powf(-3.0 + (max_log10 + 3.0) * k as f64 / (points - 1) as f64)).collect();
    let fit_grid: Vec<f64> = (1..=5).map(|k| k as f64 * 1e-4).collect();
    let fit = weak_limit_slope(&psi1, &psi2, &obs, 1.0, &fit_grid).map_err(|e| e.to_string())?;
    let curve = shift_curve(&psi1, &psi2, &obs, 1.0, &grid).map_err(|e| e.to_string())?;
    let points = curve.into_iter().map(|(g, shift)| (g, shift / g)).collect();
    Ok(to_json(&PointerCurve { weak_value: WeakValue(fit.weak_value), slope: fit.slope, points }))
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = predictionCurve)]
pub fn prediction_curve(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    max_ratio: f64,
    points: usize,
) -> Result<String, JsError> {
    js(prediction_curve_json(a_re, a_im, b_re, b_im, max_ratio, points))
}

#[wasm_bindgen(js_name = monteCarlo)]
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    ratio: f64,
    objective: bool,
    seed: u32,
    decades: u32,
) -> Result<String, JsError> {
    js(monte_carlo_json(a_re, a_im, b_re, b_im, ratio, objective, seed.into(), decades))
}

#[wasm_bindgen(js_name = pointerCurve)]
pub fn pointer_curve(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    max_log10: f64,
    points: usize,
) -> Result<String, JsError> {
    js(pointer_json(a_re, a_im, b_re, b_im, max_log10, points))
}
