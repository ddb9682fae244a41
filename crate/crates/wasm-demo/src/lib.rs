//! Browser bindings. Each export is a thin wrapper over a plain function so
//! the logic can be tested natively.

use wasm_bindgen::prelude::*;

use iqc_core::lmi::Status;
use iqc_core::model::chatter;
use iqc_core::sweep::{certify_point, SweepConfig};
use iqc_core::{legendre, oracle};

/// Largest projection order offered by the page.
pub const MAX_DEMO_ORDER: usize = 7;

/// Shifted Legendre polynomials `0..=order` on `samples` points of `[0, 1]`,
/// row-major by degree.
pub fn legendre_samples(order: usize, samples: usize) -> Result<Vec<f64>, String> {
    if samples < 2 {
        return Err("need at least two samples".into());
    }
    let mut out = vec![0.0; (order + 1) * samples];
    for s in 0..samples {
        let x = s as f64 / (samples - 1) as f64;
        let vals = legendre::eval_all(order, x).map_err(|e| e.to_string())?;
        for (k, v) in vals.into_iter().enumerate() {
            out[k * samples + s] = v;
        }
    }
    Ok(out)
}

/// Rightmost characteristic root real part of the chatter model with gain
/// `k` at each delay of `delays`.
pub fn abscissa_scan(k: f64, delays: &[f64]) -> Result<Vec<f64>, String> {
    let (a, b) = chatter(k);
    delays.iter().map(|&h| oracle::dde_abscissa(&a, &b, h).map_err(|e| e.to_string())).collect()
}

/// Stable delay intervals of the chatter model, flattened as `[lo0, hi0, lo1, ...]`.
pub fn stable_delays(k: f64, h_max: f64, step: f64) -> Result<Vec<f64>, String> {
    let (a, b) = chatter(k);
    let ivs = oracle::stable_intervals(&a, &b, step, h_max, step, step / 20.0).map_err(|e| e.to_string())?;
    Ok(ivs.into_iter().flat_map(|(lo, hi)| [lo, hi]).collect())
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Certificate {
    certified: bool,
    status: String,
    margin: f64,
    iterations: usize,
}

#[wasm_bindgen]
impl Certificate {
    #[wasm_bindgen(getter)]
    pub fn certified(&self) -> bool {
        self.certified
    }

    #[wasm_bindgen(getter)]
    pub fn status(&self) -> String {
        self.status.clone()
    }

    /// Certified margin when feasible, otherwise the upper bound on it.
    #[wasm_bindgen(getter)]
    pub fn margin(&self) -> f64 {
        self.margin
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

pub fn certify(k: f64, order: usize, h: f64) -> Result<Certificate, String> {
    if order > MAX_DEMO_ORDER {
        return Err(format!("order {order} exceeds {MAX_DEMO_ORDER}"));
    }
    let cfg = SweepConfig::chatter(k, vec![order]);
    let v = certify_point(&cfg, order, h).map_err(|e| e.to_string())?;
    let (status, margin) = match v.status {
        Status::Feasible => ("feasible", v.diagnostics.margin_lower),
        Status::Infeasible => ("infeasible", v.diagnostics.margin_upper),
        Status::Inconclusive => ("inconclusive", v.diagnostics.margin_upper),
    };
    Ok(Certificate { certified: v.is_feasible(), status: status.into(), margin, iterations: v.diagnostics.iterations })
}

#[wasm_bindgen(js_name = legendreSamples)]
pub fn js_legendre_samples(order: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    legendre_samples(order, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = abscissaScan)]
pub fn js_abscissa_scan(k: f64, delays: Vec<f64>) -> Result<Vec<f64>, JsError> {
    abscissa_scan(k, &delays).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = stableDelays)]
pub fn js_stable_delays(k: f64, h_max: f64, step: f64) -> Result<Vec<f64>, JsError> {
    stable_delays(k, h_max, step).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = certify)]
pub fn js_certify(k: f64, order: usize, h: f64) -> Result<Certificate, JsError> {
    certify(k, order, h).map_err(|e| JsError::new(&e))
}
