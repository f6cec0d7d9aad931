//! WebAssembly bindings for the static demo page in `www/`. Every export
//! returns a JSON string.

use std::sync::Arc;

use fockhtm::basis::HermitianFrame;
use fockhtm::experiment::dip::{dip_curve, DipModel};
use fockhtm::experiment::prepare::prepare_state_hom;
use fockhtm::fock::{lift_on, ScatteringUnitary};
use fockhtm::invariants::invariants;
use fockhtm::json::matrix_to_rows;
use fockhtm::optics::qhq_unitary;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn frame() -> Result<Arc<HermitianFrame>, String> {
    HermitianFrame::build(2, 2).map(Arc::new).map_err(|e| e.to_string())
}

pub fn prepare_json(theta_deg: f64) -> Result<String, String> {
    let f = frame()?;
    let p = prepare_state_hom(theta_deg.to_radians(), &f).map_err(|e| e.to_string())?;
    let inv = invariants(&p.state).map_err(|e| e.to_string())?;
    Ok(json!({
        "theta_deg": theta_deg,
        "alpha_deg": p.alpha.to_degrees(),
        "amplitudes": p.amplitudes.iter().map(|z| z.re).collect::<Vec<_>>(),
        "invariants": inv,
    })
    .to_string())
}

pub fn evolve_json(theta_deg: f64, t1_deg: f64, t2_deg: f64, t3_deg: f64) -> Result<String, String> {
    let f = frame()?;
    let p = prepare_state_hom(theta_deg.to_radians(), &f).map_err(|e| e.to_string())?;
    let u = qhq_unitary(t1_deg.to_radians(), t2_deg.to_radians(), t3_deg.to_radians());
    let s = ScatteringUnitary::new(u).map_err(|e| e.to_string())?;
    let v = lift_on(&s, f.basis()).map_err(|e| e.to_string())?;
    let evolved = p.state.evolve(&v).map_err(|e| e.to_string())?;
    let before = invariants(&p.state).map_err(|e| e.to_string())?;
    let after = invariants(&evolved).map_err(|e| e.to_string())?;
    let populations: Vec<f64> = evolved.rho().diagonal().iter().map(|z| z.re).collect();
    Ok(json!({
        "before": before,
        "after": after,
        "max_deviation": before.max_deviation(&after),
        "populations": populations,
        "rho": matrix_to_rows(evolved.rho()),
    })
    .to_string())
}

pub fn hom_dip_curve_json(visibility: f64, sigma: f64, k: f64, count: usize) -> Result<String, String> {
    let model = DipModel::new(1.0, visibility, sigma, 0.0, k).map_err(|e| e.to_string())?;
    let span = 4.0 / sigma.abs().max(1e-3);
    let points: Vec<[f64; 2]> = dip_curve(&model, -span, span, count.clamp(2, 4096)).into_iter().map(|(x, y)| [x, y]).collect();
    Ok(json!({ "model": model, "points": points }).to_string())
}

/// `ψ_α` prepared at half-wave angle `theta_deg` with its invariants.
#[wasm_bindgen]
pub fn prepare(theta_deg: f64) -> Result<String, JsValue> {
    prepare_json(theta_deg).map_err(|e| JsValue::from_str(&e))
}

/// Invariants before and after the wave-plate sequence `Q(t1) H(t2) Q(t3)`.
#[wasm_bindgen]
pub fn evolve(theta_deg: f64, t1_deg: f64, t2_deg: f64, t3_deg: f64) -> Result<String, JsValue> {
    evolve_json(theta_deg, t1_deg, t2_deg, t3_deg).map_err(|e| JsValue::from_str(&e))
}

/// Coincidence probability against delay for a dip with baseline 1.
#[wasm_bindgen]
pub fn hom_dip_curve(visibility: f64, sigma: f64, k: f64, count: usize) -> Result<String, JsValue> {
    hom_dip_curve_json(visibility, sigma, k, count).map_err(|e| JsValue::from_str(&e))
}
