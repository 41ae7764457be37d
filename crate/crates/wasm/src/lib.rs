//! wasm-bindgen exports backing `www/index.html`. Every function takes the
//! four boundary rates and returns a JSON string.

use serde_json::json;
use wasm_bindgen::prelude::*;

use ssep_mpo::cli::{spectrum_report, steady_state_report};
use ssep_mpo::model::{BoundaryRates, YVariant};
use ssep_mpo::mpo::Direction;
use ssep_mpo::observables::{density_profile, density_profile_dual, XConvention};
use ssep_mpo::suite::VariantChoice;
use ssep_mpo::verify::check_intertwining;

const MAX_DEMO_SITES: usize = 8;

fn rates(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<BoundaryRates, JsError> {
    BoundaryRates::new(alpha, beta, gamma, delta).map_err(js)
}

fn js(e: ssep_mpo::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn sites(n: usize) -> Result<usize, JsError> {
    if (1..=MAX_DEMO_SITES).contains(&n) {
        Ok(n)
    } else {
        Err(JsError::new(&format!("N must lie in 1..={MAX_DEMO_SITES}")))
    }
}

/// Density profile from the null vector and through the `Y_R` dual under
/// both insertion conventions.
#[wasm_bindgen]
pub fn density_profiles(alpha: f64, beta: f64, gamma: f64, delta: f64, n: usize) -> Result<String, JsError> {
    let r = rates(alpha, beta, gamma, delta)?;
    let n = sites(n)?;
    let direct = density_profile(&r, n).map_err(js)?;
    let mut out = json!({ "n": n, "direct": direct });
    for conv in XConvention::ALL {
        out[conv.name()] = json!(density_profile_dual(&r, n, YVariant::YR, conv).map_err(js)?);
    }
    Ok(out.to_string())
}

/// DEHP, null-vector and mapped Bernoulli steady states with their angles.
#[wasm_bindgen]
pub fn steady_states(alpha: f64, beta: f64, gamma: f64, delta: f64, n: usize) -> Result<String, JsError> {
    let r = rates(alpha, beta, gamma, delta)?;
    let (value, _) = steady_state_report::<f64>(&r, sites(n)?.min(6), VariantChoice::Both).map_err(js)?;
    Ok(value.to_string())
}

/// Eigenvalues of `H_NE` and both duals.
#[wasm_bindgen]
pub fn spectra(alpha: f64, beta: f64, gamma: f64, delta: f64, n: usize) -> Result<String, JsError> {
    let r = rates(alpha, beta, gamma, delta)?;
    let (value, _) = spectrum_report(&r, sites(n)?.min(6), VariantChoice::Both).map_err(js)?;
    Ok(value.to_string())
}

/// Relative intertwining residual for `N = 1..=n_max`, per variant and direction.
#[wasm_bindgen]
pub fn intertwining_residuals(alpha: f64, beta: f64, gamma: f64, delta: f64, n_max: usize) -> Result<String, JsError> {
    let r = rates(alpha, beta, gamma, delta)?;
    let n_max = sites(n_max)?;
    let mut out = serde_json::Map::new();
    for v in [YVariant::YR, YVariant::YL] {
        for d in [Direction::NeToE, Direction::EToNe] {
            let series = (1..=n_max)
                .map(|n| check_intertwining::<f64>(&r, n, d, v, 0.0).map(|rep| rep.residual))
                .collect::<Result<Vec<_>, _>>()
                .map_err(js)?;
            out.insert(format!("{}_{}", v.name(), d.name()), json!(series));
        }
    }
    Ok(serde_json::Value::Object(out).to_string())
}
