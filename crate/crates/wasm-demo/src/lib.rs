//! Browser demo. Each export takes plain numbers or a measure JSON string
//! and returns a JSON string for the page to plot.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use levy_invert::fourier::GilPelaezCdf;
use levy_invert::geometry::{DirectionSet, SphericalMeasure};
use levy_invert::inversion::{beta_inversion, rosinski_inversion};
use levy_invert::json::{measure_from_json, measure_to_json};
use levy_invert::ks::{band95, ks_one_sample};
use levy_invert::measure::{ID0Law, LevyMeasure, MeasureRepr};
use levy_invert::simulate::sample_stable;
use levy_invert::specfun::{g_tail, g_tail_inverse, TemperingParams};

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

#[derive(Serialize)]
pub struct TailCurves {
    pub r: Vec<f64>,
    pub tail: Vec<f64>,
    pub inverted_tail: Vec<f64>,
    pub inverted: serde_json::Value,
}

/// Tails `M(|x| > r)` and `M^β(|x| > r)` on `count` radii in `[1e-3, 1e3]`.
/// Tempered measures are inverted at the Rosiński level.
pub fn inversion_tails(measure_json: &str, beta: f64, count: usize) -> Result<TailCurves, String> {
    let m = measure_from_json(measure_json).map_err(|e| e.to_string())?;
    let inv = match m.repr() {
        MeasureRepr::Tempered { params, rosinski } => {
            rosinski_inversion(rosinski, beta).and_then(|r| LevyMeasure::tempered(*params, r))
        }
        _ => beta_inversion(&m, beta),
    }
    .map_err(|e| e.to_string())?;
    let r = log_grid(1e-3, 1e3, count);
    let tails = |x: &LevyMeasure| -> Result<Vec<f64>, String> {
        r.iter()
            .map(|&v| x.tail_mass(v, &DirectionSet::All).map_err(|e| e.to_string()))
            .collect()
    };
    Ok(TailCurves {
        tail: tails(&m)?,
        inverted_tail: tails(&inv)?,
        inverted: serde_json::from_str(&measure_to_json(&inv)).expect("valid JSON"),
        r,
    })
}

#[derive(Serialize)]
pub struct GCurves {
    pub u: Vec<f64>,
    pub g: Vec<f64>,
    /// `G*(G(u))`, which reproduces `u`.
    pub g_star: Vec<f64>,
}

/// `G_{α,p}` and its inverse on `count` points of `[1e-3, 10]`.
pub fn tempered_tail_curves(alpha: f64, p: f64, count: usize) -> Result<GCurves, String> {
    let params = TemperingParams::new(p, alpha).map_err(|e| e.to_string())?;
    let u = log_grid(1e-3, 10.0, count);
    let g: Vec<f64> = u.iter().map(|&v| g_tail(v, &params)).collect();
    let g_star = g
        .iter()
        .map(|&v| g_tail_inverse(v, &params).unwrap_or(f64::NAN))
        .collect();
    Ok(GCurves { u, g, g_star })
}

#[derive(Serialize)]
pub struct StableFit {
    /// Sample quantiles shown on the plot.
    pub x: Vec<f64>,
    pub ecdf: Vec<f64>,
    pub cdf: Vec<f64>,
    pub ks: f64,
    pub band: f64,
}

/// `n` exact draws of `S_η(σ, 0)` with `σ = w₊δ₁ + w₋δ₋₁`, compared with
/// the Fourier-inverted CDF.
pub fn stable_fit(eta: f64, w_plus: f64, w_minus: f64, n: usize, seed: u64) -> Result<StableFit, String> {
    let sigma = SphericalMeasure::two_sided(w_plus, w_minus).map_err(|e| e.to_string())?;
    let law = LevyMeasure::stable(eta, sigma.clone())
        .map(ID0Law::centered)
        .map_err(|e| e.to_string())?;
    let cdf = GilPelaezCdf::new(&law).map_err(|e| e.to_string())?;
    let mut x = sample_stable(eta, &sigma, &[0.0], n.max(1), seed)
        .map_err(|e| e.to_string())?
        .column(0);
    x.sort_by(f64::total_cmp);
    let ks = ks_one_sample(&x, |v| cdf.cdf(v));
    // central 98% of the sample, at most 400 points
    let len = x.len();
    let (lo, hi) = (len / 100, len - len / 100 - 1);
    let step = ((hi - lo) / 400).max(1);
    let idx: Vec<usize> = (lo..=hi).step_by(step).collect();
    Ok(StableFit {
        x: idx.iter().map(|&i| x[i]).collect(),
        ecdf: idx.iter().map(|&i| (i + 1) as f64 / len as f64).collect(),
        cdf: idx.iter().map(|&i| cdf.cdf(x[i])).collect(),
        ks,
        band: band95(len),
    })
}

#[wasm_bindgen(js_name = inversionTails)]
pub fn inversion_tails_js(measure_json: &str, beta: f64, count: usize) -> Result<String, JsValue> {
    inversion_tails(measure_json, beta, count)
        .map(|c| to_json(&c))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = temperedTailCurves)]
pub fn tempered_tail_curves_js(alpha: f64, p: f64, count: usize) -> Result<String, JsValue> {
    tempered_tail_curves(alpha, p, count)
        .map(|c| to_json(&c))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = stableFit)]
pub fn stable_fit_js(eta: f64, w_plus: f64, w_minus: f64, n: usize, seed: u32) -> Result<String, JsValue> {
    stable_fit(eta, w_plus, w_minus, n, seed as u64)
        .map(|c| to_json(&c))
        .map_err(|e| JsValue::from_str(&e))
}
