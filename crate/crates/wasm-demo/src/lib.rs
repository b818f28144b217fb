//! Browser bindings for the demo page. Results cross the boundary as JSON
//! strings to keep the JS side dependency-free.

use beamgp_core::beam_oracle::{
    fe_solve, synth_dataset, BeamResponse, BeamSpec, SensorPlan, Support, Truth,
};
use beamgp_core::fit::{fit, FitConfig};
use beamgp_core::inference::{normalized_rmse, predict_mixture};
use beamgp_core::kernel::se_kernel_deriv;
use beamgp_core::{KernelParams, QuantityKind};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn grid(n: usize, length: f64) -> Vec<f64> {
    (0..n).map(|i| length * i as f64 / (n - 1) as f64).collect()
}

/// `∂^m/∂x^m ∂^n/∂x'^n k(x, 0)` for x over ±4ℓ, as `{x, k}`.
#[wasm_bindgen]
pub fn kernel_curve(
    sigma_s: f64,
    ell: f64,
    m: usize,
    n: usize,
    points: usize,
) -> Result<String, JsValue> {
    let params = KernelParams::new(sigma_s, ell).map_err(js_err)?;
    let xs: Vec<f64> = grid(points.max(2), 8.0 * ell)
        .iter()
        .map(|x| x - 4.0 * ell)
        .collect();
    let k = xs
        .iter()
        .map(|&x| se_kernel_deriv(&params, m, n, x, 0.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(js_err)?;
    Ok(json!({ "x": xs, "k": k }).to_string())
}

/// Synthesizes the unit cantilever benchmark, fits EI and returns the
/// stiffness posterior with mixture predictions of u and m.
#[wasm_bindgen]
pub fn fit_cantilever(
    snr: f64,
    points_per_sensor: usize,
    seed: u32,
    n_steps: usize,
) -> Result<String, JsValue> {
    let spec = BeamSpec::uniform(1.0, 1.0, 20, Support::CantileverLeft, 1.0);
    let plan = SensorPlan {
        snr,
        points_per_sensor,
        seed: seed as u64,
        ..SensorPlan::benchmark(1.0)
    };
    let syn = synth_dataset(&spec, &plan, Truth::Analytic).map_err(js_err)?;
    let mut cfg = FitConfig::default();
    cfg.mh.n_steps = n_steps.max(200);
    cfg.mh.burn_in = cfg.mh.n_steps / 4;
    cfg.mh.seed = seed as u64;
    let res = fit(&syn.problem, 1.0, &cfg).map_err(js_err)?;

    let truth = fe_solve(&spec).map_err(js_err)?;
    let xs = grid(60, 1.0);
    let draws = res.chain.len().min(60);
    let mut fields = serde_json::Map::new();
    for kind in [QuantityKind::Deflection, QuantityKind::Moment] {
        let pred = predict_mixture(&syn.problem, &res.chain, kind, &xs, draws).map_err(js_err)?;
        let exact = xs
            .iter()
            .map(|&x| truth.eval(kind, x, None))
            .collect::<Result<Vec<_>, _>>()
            .map_err(js_err)?;
        fields.insert(
            kind.tag().to_string(),
            json!({
                "mean": pred.mean,
                "std": pred.std,
                "truth": exact,
                "nrmse": normalized_rmse(&pred.mean, &exact),
            }),
        );
    }
    let data = &syn.problem.sets()[0];
    Ok(json!({
        "mu_ei": res.stiffness.mu_ei,
        "sigma_ei": res.stiffness.sigma_ei,
        "d_m": res.stiffness.mahalanobis().ok(),
        "acceptance": res.chain.acceptance_rate,
        "x": xs,
        "fields": fields,
        "data": { "x": data.locations, "y": data.values },
    })
    .to_string())
}

/// FE deflection of the unit cantilever with one element weakened by
/// `reduction`, alongside the undamaged curve.
#[wasm_bindgen]
pub fn damage_deflection(
    element: usize,
    reduction: f64,
    n_elements: usize,
) -> Result<String, JsValue> {
    let n_elements = n_elements.max(1);
    if element == 0 || element > n_elements || !(0.0..1.0).contains(&reduction) {
        return Err(js_err("element must be in 1..=n and reduction in [0, 1)"));
    }
    let intact = BeamSpec::uniform(1.0, 1.0, n_elements, Support::CantileverLeft, 1.0);
    let mut damaged = intact.clone();
    damaged.ei_elements[element - 1] *= 1.0 - reduction;
    let xs = grid(101, 1.0);
    let eval = |spec: &BeamSpec| -> Result<Vec<f64>, JsValue> {
        let sol = fe_solve(spec).map_err(js_err)?;
        xs.iter()
            .map(|&x| sol.eval(QuantityKind::Deflection, x, None).map_err(js_err))
            .collect()
    };
    Ok(json!({ "x": xs, "intact": eval(&intact)?, "damaged": eval(&damaged)? }).to_string())
}
