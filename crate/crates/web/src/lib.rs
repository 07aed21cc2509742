//! wasm-bindgen front end for the browser demo in `www/`.
//!
//! Each export returns a JSON string; the pure `*_json` functions behind
//! them are what the native tests exercise.

use std::sync::Arc;

use serde::Serialize;
use sip_sampling::funcspace::{bandlimited_eval, Grid};
use sip_sampling::quadrature::{panels_for_bandwidth, DEFAULT_PANEL_ORDER};
use sip_sampling::sampling::{reconstruct, sample_at_nodes, tail_factor};
use sip_sampling::verifier::{bessel_bound, frame_bounds_m, riesz_bounds_s, EstimatorConfig};
use sip_sampling::{kernel_g, sinc, BandlimitedFn, Exponent, KernelBackend, SamplingSystem, Spectrum};
use wasm_bindgen::prelude::*;

/// Point counts above this are refused; the page never needs more.
const MAX_POINTS: usize = 4001;
const MAX_WINDOW: usize = 256;
const MAX_TRIALS: usize = 20_000;

fn points(a: f64, b: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(format!("need a finite range with a < b, got [{a}, {b}]"));
    }
    if !(2..=MAX_POINTS).contains(&n) {
        return Err(format!("point count must be in 2..={MAX_POINTS}"));
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

#[derive(Serialize)]
struct KernelCurve {
    t: Vec<f64>,
    closed: Vec<f64>,
    quadrature: Vec<f64>,
    max_diff: f64,
}

/// `t ↦ G(s, t)` by quadrature next to `sinc(t - s)`.
pub fn kernel_curve_json(p: f64, s: f64, t_min: f64, t_max: f64, n: usize) -> Result<String, String> {
    let t = points(t_min, t_max, n)?;
    if !s.is_finite() {
        return Err("s must be finite".into());
    }
    let span = t.iter().map(|t| (t - s).abs()).fold(0.0, f64::max);
    let grid = Grid::composite(panels_for_bandwidth(span + 1.0), DEFAULT_PANEL_ORDER).map_err(|e| e.to_string())?;
    let k = kernel_g(p, KernelBackend::Quadrature)
        .map_err(|e| e.to_string())?
        .with_grid(Arc::new(grid));
    let closed: Vec<f64> = t.iter().map(|&t| sinc(t - s)).collect();
    let quadrature: Vec<f64> = t.iter().map(|&t| k.eval(s, t).re).collect();
    let max_diff = closed
        .iter()
        .zip(&quadrature)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(to_json(&KernelCurve {
        t,
        closed,
        quadrature,
        max_diff,
    }))
}

#[derive(Serialize)]
struct SweepCurve {
    n: usize,
    value: Vec<f64>,
    abs_err: Vec<f64>,
    bound: Vec<f64>,
}

#[derive(Serialize)]
struct Sweep {
    spectrum: String,
    t: Vec<f64>,
    exact: Vec<f64>,
    curves: Vec<SweepCurve>,
}

/// Real parts of the truncated series for each window in `windows`,
/// with errors and the `‖f̂‖_p · tail_factor` bound at every point.
pub fn reconstruction_sweep_json(
    spectrum: &str,
    p: f64,
    t_min: f64,
    t_max: f64,
    n: usize,
    windows: &[usize],
) -> Result<String, String> {
    let t = points(t_min, t_max, n)?;
    if windows.is_empty() || windows.iter().any(|&w| w == 0 || w > MAX_WINDOW) {
        return Err(format!("windows must lie in 1..={MAX_WINDOW}"));
    }
    let e = Exponent::new(p).map_err(|e| e.to_string())?;
    let spec = Spectrum::parse(spectrum).map_err(|e| e.to_string())?;
    let reach = t_min.abs().max(t_max.abs());
    let grid = Arc::new(
        Grid::composite(
            panels_for_bandwidth(spec.bandwidth() + reach + 1.0),
            DEFAULT_PANEL_ORDER,
        )
        .map_err(|e| e.to_string())?,
    );
    let f = BandlimitedFn::new(spec, e);
    let norm = f.norm(&grid).map_err(|e| e.to_string())?;
    let exact_c = t
        .iter()
        .map(|&x| bandlimited_eval(&f, x, &grid))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut curves = Vec::with_capacity(windows.len());
    for &w in windows {
        let sys = SamplingSystem::sinc(w, e);
        let samples = sample_at_nodes(&sys, &f, &grid).map_err(|e| e.to_string())?;
        let mut curve = SweepCurve {
            n: w,
            value: Vec::new(),
            abs_err: Vec::new(),
            bound: Vec::new(),
        };
        for (&x, ex) in t.iter().zip(&exact_c) {
            let v = reconstruct(&sys, &samples, x).map_err(|e| e.to_string())?.value;
            curve.value.push(v.re);
            curve.abs_err.push((v - ex).norm());
            curve
                .bound
                .push(norm * tail_factor(x, w, e.q(), DEFAULT_PANEL_ORDER).map_err(|e| e.to_string())?);
        }
        curves.push(curve);
    }
    Ok(to_json(&Sweep {
        spectrum: f.spectrum.name(),
        t,
        exact: exact_c.iter().map(|c| c.re).collect(),
        curves,
    }))
}

/// One of `bessel`, `frame`, `riesz` for the sinc system.
pub fn bound_estimate_json(target: &str, p: f64, n: usize, trials: usize, seed: u64) -> Result<String, String> {
    if n == 0 || n > 64 {
        return Err("window half-width must lie in 1..=64".into());
    }
    if !(1..=MAX_TRIALS).contains(&trials) {
        return Err(format!("trials must lie in 1..={MAX_TRIALS}"));
    }
    let sys = SamplingSystem::sinc(n, Exponent::new(p).map_err(|e| e.to_string())?);
    let cfg = EstimatorConfig::new(trials, seed);
    let est = match target {
        "bessel" => bessel_bound(&sys, &cfg),
        "frame" => frame_bounds_m(&sys, &cfg),
        "riesz" => riesz_bounds_s(&sys, &cfg),
        other => return Err(format!("unknown target `{other}`")),
    }
    .map_err(|e| e.to_string())?;
    Ok(to_json(&est))
}

#[wasm_bindgen(js_name = kernelCurve)]
pub fn kernel_curve(p: f64, s: f64, t_min: f64, t_max: f64, n: usize) -> Result<String, JsValue> {
    kernel_curve_json(p, s, t_min, t_max, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = reconstructionSweep)]
pub fn reconstruction_sweep(
    spectrum: &str,
    p: f64,
    t_min: f64,
    t_max: f64,
    n: usize,
    windows: Vec<u32>,
) -> Result<String, JsValue> {
    let windows: Vec<usize> = windows.into_iter().map(|w| w as usize).collect();
    reconstruction_sweep_json(spectrum, p, t_min, t_max, n, &windows).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = boundEstimate)]
pub fn bound_estimate(target: &str, p: f64, n: usize, trials: usize, seed: u32) -> Result<String, JsValue> {
    bound_estimate_json(target, p, n, trials, seed as u64).map_err(|e| JsValue::from_str(&e))
}
