//! WebAssembly bindings for the qutrit explorer in `www/index.html`.
//!
//! Amplitudes arrive as `[re0, im0, re1, im1, re2, im2]` and are normalized
//! here. Results are JSON strings.

use serde_json::json;
use wasm_bindgen::prelude::*;

use particleness::measures::{bounds, coherence_trace, particleness_trace};
use particleness::resource::{classify, qutrit_pure_is_free, Label};
use particleness::states::{sample_state_of_rank, RandomSeed};
use particleness::{density_from_pure, PureState, SystemSpec, C64};

pub const SLOPE: f64 = 1.3;

fn qutrit(amplitudes: &[f64]) -> Result<PureState, String> {
    if amplitudes.len() != 6 {
        return Err(format!("expected 6 numbers, got {}", amplitudes.len()));
    }
    let amps = amplitudes.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
    PureState::normalized(amps).map_err(|e| e.to_string())
}

fn label_name(label: Label) -> &'static str {
    match label {
        Label::FreeInterior => "free",
        Label::Edge => "edge",
        Label::Resourceful => "resourceful",
    }
}

/// Classification of a pure qutrit by energy and by the `|c| ≤ |a|` test.
pub fn classify_json(amplitudes: &[f64]) -> Result<String, String> {
    let psi = qutrit(amplitudes)?;
    let spec = SystemSpec::zero_detuning(3);
    let c = classify(&density_from_pure(&psi), &spec).map_err(|e| e.to_string())?;
    let closed_form = qutrit_pure_is_free(&psi).map_err(|e| e.to_string())?;
    let populations: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm_sqr()).collect();
    Ok(json!({
        "label": label_name(c.label),
        "energy": c.energy,
        "closed_form_free": closed_form,
        "populations": populations,
    })
    .to_string())
}

/// Particleness, coherence, `P + 1.3·C` and the analytic bounds.
pub fn measure_json(amplitudes: &[f64]) -> Result<String, String> {
    let psi = qutrit(amplitudes)?;
    let spec = SystemSpec::zero_detuning(3);
    let rho = density_from_pure(&psi);
    let p = particleness_trace(&rho, &spec).map_err(|e| e.to_string())?;
    let c = coherence_trace(&rho).map_err(|e| e.to_string())?;
    let b = bounds(&rho, &spec, Some(&psi)).map_err(|e| e.to_string())?;
    Ok(json!({
        "particleness": p.value,
        "particleness_gap": p.certificate.gap,
        "coherence": c.value,
        "lhs": p.value + SLOPE * c.value,
        "witness_lower": b.witness_lower,
        "lemma_bound": b.lemma_bound,
        "line_bound": b.line_bound,
    })
    .to_string())
}

/// `count` random qutrits of the given rank as a flat `[C, P, C, P, …]` list.
pub fn scatter(rank: usize, count: usize, seed: u64) -> Result<Vec<f64>, String> {
    let spec = SystemSpec::zero_detuning(3);
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let mut rng = RandomSeed(seed).stream(i as u64);
        let rho = sample_state_of_rank(3, rank, &mut rng).map_err(|e| e.to_string())?;
        match (coherence_trace(&rho), particleness_trace(&rho, &spec)) {
            (Ok(c), Ok(p)) => {
                out.push(c.value);
                out.push(p.value);
            }
            _ => continue,
        }
    }
    Ok(out)
}

#[wasm_bindgen(js_name = classifyQutrit)]
pub fn classify_qutrit(amplitudes: &[f64]) -> Result<String, JsError> {
    classify_json(amplitudes).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = measureQutrit)]
pub fn measure_qutrit(amplitudes: &[f64]) -> Result<String, JsError> {
    measure_json(amplitudes).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sampleScatter)]
pub fn sample_scatter(rank: usize, count: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    scatter(rank, count, seed).map_err(|e| JsError::new(&e))
}
