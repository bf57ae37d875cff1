//! Browser bindings for the demo page. Every export returns a JSON string;
//! the `*_json` functions hold the logic so they can be tested natively.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use spectral_cig::admm::{w_update, GroupProxMode};
use spectral_cig::estimator::{fit, FitConfig};
use spectral_cig::eval::{f1_score, hamming};
use spectral_cig::linalg::{CMatrix, C64};
use spectral_cig::penalty::{
    penalty_derivative, penalty_value, LlaWeights, PenaltyFamily, PenaltySpec, DEFAULT_EPSILON, DEFAULT_SCAD_A,
};
use spectral_cig::spectral::half_window_for;
use spectral_cig::synth::{generate, simulate_var, true_log_magnitude, ModelSpec};
use spectral_cig::EdgeSet;
use wasm_bindgen::prelude::*;

/// Largest channel count the page will fit.
const MAX_CHANNELS: usize = 32;

fn family(name: &str, param: f64) -> Result<PenaltyFamily, String> {
    let fam = match name {
        "lasso" => PenaltyFamily::Lasso,
        "logsum" => PenaltyFamily::LogSum { epsilon: param },
        "scad" => PenaltyFamily::Scad { a: param },
        other => return Err(format!("unknown penalty family '{other}'")),
    };
    Ok(fam)
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Penalty value and derivative sampled on `[0, umax]`.
pub fn penalty_curves_json(name: &str, lambda: f64, param: f64, umax: f64, points: usize) -> Result<String, String> {
    let spec = PenaltySpec::new(family(name, param)?, lambda).map_err(|e| e.to_string())?;
    if !(umax > 0.0 && umax.is_finite()) || !(2..=10_000).contains(&points) {
        return Err("need umax > 0 and 2 <= points <= 10000".into());
    }
    let u: Vec<f64> = (0..points).map(|i| umax * i as f64 / (points - 1) as f64).collect();
    let value: Vec<f64> = u.iter().map(|&x| penalty_value(x, &spec)).collect();
    let derivative: Vec<f64> = u.iter().map(|&x| penalty_derivative(x, &spec)).collect();
    Ok(json!({ "u": u, "value": value, "derivative": derivative }).to_string())
}

/// Output of the sparse-group proximal step on a two-node, single-attribute,
/// single-frequency problem as the off-diagonal input sweeps `[0, amax]`.
pub fn prox_path_json(lambda: f64, alpha: f64, rho: f64, amax: f64, points: usize) -> Result<String, String> {
    if !(lambda >= 0.0 && rho > 0.0 && (0.0..=1.0).contains(&alpha) && amax > 0.0) {
        return Err("need lambda >= 0, rho > 0, alpha in [0, 1], amax > 0".into());
    }
    if !(2..=10_000).contains(&points) {
        return Err("need 2 <= points <= 10000".into());
    }
    let weights = LlaWeights::uniform(lambda, 1, 1, 2);
    let mut input = Vec::with_capacity(points);
    let mut output = Vec::with_capacity(points);
    for i in 0..points {
        let a = amax * i as f64 / (points - 1) as f64;
        let mut mat = CMatrix::identity(2, 2);
        mat[(0, 1)] = C64::new(a, 0.0);
        mat[(1, 0)] = C64::new(a, 0.0);
        let w = w_update(&[mat], &weights, alpha, rho, GroupProxMode::Stacked).map_err(|e| e.to_string())?;
        input.push(a);
        output.push(w[0][(0, 1)].re);
    }
    Ok(json!({ "input": input, "output": output }).to_string())
}

fn edge_list(e: &EdgeSet) -> Vec<[usize; 2]> {
    e.pairs().map(|(a, b)| [a, b]).collect()
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<Value>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| finite(m[(i, j)])).collect()).collect()
}

/// Draws a clustered VAR model, simulates `n` samples and fits the graph.
/// `lambda <= 0` selects it by BIC.
pub fn simulate_and_fit_json(
    nodes: usize,
    attributes: usize,
    clusters: usize,
    n: usize,
    seed: u64,
    name: &str,
    lambda: f64,
) -> Result<String, String> {
    if nodes * attributes > MAX_CHANNELS {
        return Err(format!("at most {MAX_CHANNELS} channels in the browser"));
    }
    let param = if name == "scad" { DEFAULT_SCAD_A } else { DEFAULT_EPSILON };
    let fam = family(name, param)?;
    let half_window = half_window_for(n, 4).ok_or_else(|| format!("n = {n} is too short for 4 frequencies"))?;
    let mut spec = ModelSpec::model1(nodes, attributes);
    spec.clusters = clusters;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = generate(&spec, &mut rng).map_err(|e| e.to_string())?;
    let series = simulate_var(&truth.model, n, 100, &mut rng).map_err(|e| e.to_string())?;

    let penalty = PenaltySpec { family: fam, lambda: lambda.max(0.0) };
    let config = if lambda > 0.0 { FitConfig::fixed(penalty, half_window) } else { FitConfig::bic(penalty, half_window) };
    let result = fit(&series, &config).map_err(|e| e.to_string())?;

    Ok(json!({
        "nodes": nodes,
        "attributes": attributes,
        "lambda": result.lambda,
        "converged": result.converged,
        "true_edges": edge_list(&truth.edges),
        "edges": edge_list(&result.edges),
        "f1": f1_score(&result.edges, &truth.edges).map_err(|e| e.to_string())?,
        "hamming": hamming(&result.edges, &truth.edges).map_err(|e| e.to_string())?,
        "true_heatmap": matrix_rows(&true_log_magnitude(&truth.model, spec.f_step)),
        "heatmap": matrix_rows(&result.precision.log_magnitude()),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn penalty_curves(name: &str, lambda: f64, param: f64, umax: f64, points: usize) -> Result<String, JsError> {
    penalty_curves_json(name, lambda, param, umax, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn prox_path(lambda: f64, alpha: f64, rho: f64, amax: f64, points: usize) -> Result<String, JsError> {
    prox_path_json(lambda, alpha, rho, amax, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate_and_fit(
    nodes: usize,
    attributes: usize,
    clusters: usize,
    n: usize,
    seed: u32,
    name: &str,
    lambda: f64,
) -> Result<String, JsError> {
    simulate_and_fit_json(nodes, attributes, clusters, n, seed as u64, name, lambda).map_err(|e| JsError::new(&e))
}
