//! Browser bindings: one triple-law point, a first-touch curve and a
//! Wiener-Hopf identity check for a KoBoL model.
//!
//! The `demo_*` functions return JSON strings and are plain Rust, so they run
//! in native tests; the `#[wasm_bindgen]` wrappers only convert the error type.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use levy_triple::contours::{select_fourier_params, Direction};
use levy_triple::joint_cpdf::{triple_batch, v_ftd, EngineConfig, InnerMethod, Method};
use levy_triple::wiener_hopf::WhfSolver;
use levy_triple::LevyModel;

#[derive(Clone, Copy, Debug, Deserialize)]
pub struct Model {
    pub nu: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    #[serde(default)]
    pub mu: f64,
    pub m2: f64,
}

impl Model {
    fn build(&self) -> Result<LevyModel, String> {
        LevyModel::kobol(self.nu, self.lambda_minus, self.lambda_plus, self.mu, self.m2).map_err(|e| e.to_string())
    }
}

fn model(json: &str) -> Result<LevyModel, String> {
    serde_json::from_str::<Model>(json).map_err(|e| format!("model: {e}"))?.build()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct Point {
    value: f64,
    error_estimate: f64,
    method: &'static str,
    warnings: Vec<String>,
}

/// V(a1, a2; T, t) by the sinh method at tolerance 10^-ne.
pub fn demo_triple(model_json: &str, big_t: f64, t: f64, a1: f64, a2: f64, ne: f64) -> Result<String, String> {
    let m = model(model_json)?;
    let cfg = EngineConfig::with_ne(ne, ne + 2.0);
    let r = triple_batch(&m, big_t, t, &[(a1, a2)], Method::Sinh, &cfg)
        .map_err(|e| e.to_string())?
        .remove(0);
    to_json(&Point {
        value: r.value,
        error_estimate: r.error_estimate,
        method: r.method.name(),
        warnings: r.warnings,
    })
}

#[derive(Debug, Serialize)]
struct Curve {
    h: Vec<f64>,
    survival: Vec<f64>,
}

/// 1 - V_ftd(h, s) on `n` log-spaced barriers in [h_min, h_max].
pub fn demo_first_touch(model_json: &str, s: f64, h_min: f64, h_max: f64, n: usize, ne: f64) -> Result<String, String> {
    if !(h_min > 0.0 && h_max > h_min) || n < 2 {
        return Err("need 0 < h_min < h_max and n >= 2".into());
    }
    let m = model(model_json)?;
    let cfg = EngineConfig {
        pair_scale: None,
        ..EngineConfig::with_ne(ne, ne + 2.0)
    };
    let ratio = (h_max / h_min).ln() / (n - 1) as f64;
    let h: Vec<f64> = (0..n).map(|i| h_min * (ratio * i as f64).exp()).collect();
    let survival = h
        .iter()
        .map(|&x| Ok(1.0 - v_ftd(&m, x, s, InnerMethod::Sinh, &cfg).map_err(|e| e.to_string())?.raw_value))
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&Curve { h, survival })
}

#[derive(Debug, Serialize)]
struct Identity {
    xi: Vec<f64>,
    residual: Vec<f64>,
    max_residual: f64,
}

/// |phi+ phi- (q + psi)/q - 1| on a real xi grid in [-xi_max, xi_max].
pub fn demo_whf(model_json: &str, q_re: f64, q_im: f64, xi_max: f64, n: usize, ne_whf: f64) -> Result<String, String> {
    if !(q_re > 0.0) {
        return Err("q needs a positive real part".into());
    }
    if !(xi_max > 0.0) || n < 2 {
        return Err("need xi_max > 0 and n >= 2".into());
    }
    let m = model(model_json)?;
    let err = |e: levy_triple::Error| e.to_string();
    let down = select_fourier_params(&m, Direction::Down, ne_whf, 0.0).map_err(err)?;
    let up = select_fourier_params(&m, Direction::Up, ne_whf, 0.0).map_err(err)?;
    let solver = WhfSolver::new(&m, &down, &up).map_err(err)?;
    let q = C64::new(q_re, q_im);
    let xi: Vec<f64> = (0..n).map(|i| -xi_max + 2.0 * xi_max * i as f64 / (n - 1) as f64).collect();
    let xs: Vec<C64> = xi.iter().map(|&x| C64::new(x, 0.0)).collect();
    let fp = solver.phi_plus(q, &xs).map_err(err)?;
    let fm = solver.phi_minus(q, &xs).map_err(err)?;
    let residual: Vec<f64> = (0..n).map(|k| (fp[k] * fm[k] * (q + m.psi(xs[k])) / q - 1.0).norm()).collect();
    let max_residual = residual.iter().cloned().fold(0.0, f64::max);
    to_json(&Identity { xi, residual, max_residual })
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn triple(model_json: &str, big_t: f64, t: f64, a1: f64, a2: f64, ne: f64) -> Result<String, JsError> {
    js(demo_triple(model_json, big_t, t, a1, a2, ne))
}

#[wasm_bindgen]
pub fn first_touch(model_json: &str, s: f64, h_min: f64, h_max: f64, n: usize, ne: f64) -> Result<String, JsError> {
    js(demo_first_touch(model_json, s, h_min, h_max, n, ne))
}

#[wasm_bindgen]
pub fn whf_identity(model_json: &str, q_re: f64, q_im: f64, xi_max: f64, n: usize, ne_whf: f64) -> Result<String, JsError> {
    js(demo_whf(model_json, q_re, q_im, xi_max, n, ne_whf))
}
