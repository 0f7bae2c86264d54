//! Browser bindings: bound curves, a learner error profile and symmetric fits.
//!
//! Every export takes plain numbers or a JSON string and returns JSON.

use serde_json::json;
use wasm_bindgen::prelude::*;

use modkit::constructions::adversarial::{noisy_linear, random_linear};
use modkit::expander::bounds::{bound_suite, kr, ks_v2, published_profile, union_bound_rate, STRONG_PAIR};
use modkit::learner::{learn, learner_error_profile, Method};
use modkit::metrics::{closest_linear, symmetric_modularity_eps, FitMode, Variant};
use modkit::SetFunction;

const MAX_SYMMETRIC_FIT: usize = 16;

fn grid(lo: f64, hi: f64, steps: usize) -> impl Iterator<Item = f64> {
    let steps = steps.max(2);
    (0..steps).map(move |i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
}

pub fn bound_curves_json(steps: usize) -> Result<String, String> {
    let e = |x: modkit::Error| x.to_string();
    let ks: Vec<[f64; 2]> = grid(1.5, 4.0, steps)
        .map(|d| Ok([d, ks_v2(d, STRONG_PAIR)?]))
        .collect::<Result<_, modkit::Error>>()
        .map_err(e)?;
    let kr_curve: Vec<[f64; 2]> = grid(3.0, 8.0, steps)
        .map(|r| Ok([r, kr(r, 2.0 / 3.0)?]))
        .collect::<Result<_, modkit::Error>>()
        .map_err(e)?;
    let rate: Vec<[f64; 2]> = grid(5.0, 10.0, steps)
        .map(|r| Ok([r, union_bound_rate(0.25, r, 0.5)?]))
        .collect::<Result<_, modkit::Error>>()
        .map_err(e)?;
    let suite = bound_suite(&published_profile()).map_err(e)?;
    Ok(json!({
        "ks_v2_vs_split": ks,
        "kr_vs_r": kr_curve,
        "rate_vs_r": rate,
        "preset": suite.values(),
    })
    .to_string())
}

pub fn learner_profile_json(n: usize, delta: f64, seed: u64, samples: usize) -> Result<String, String> {
    let e = |x: modkit::Error| x.to_string();
    if !(2..=64).contains(&n) {
        return Err(format!("n must be in 2..=64, got {n}"));
    }
    let g = random_linear(n, seed);
    let f = noisy_linear(g.clone(), delta, seed).map_err(e)?;
    let r = learn(&f, Method::Hadamard, None).map_err(e)?;
    let rows = learner_error_profile(&r.h, &f, delta, samples, seed).map_err(e)?;
    Ok(json!({
        "n": n,
        "delta": delta,
        "queries": r.query_count,
        "coefficient_error": r.h.max_coeff_diff(&g),
        "profile": rows,
    })
    .to_string())
}

/// `values[k]` is the value on sets of size `k`.
pub fn symmetric_fit_json(values: &str) -> Result<String, String> {
    let v: Vec<f64> = serde_json::from_str(values).map_err(|x| x.to_string())?;
    if v.len() < 2 || v.len() > MAX_SYMMETRIC_FIT + 1 {
        return Err(format!("give between 2 and {} values", MAX_SYMMETRIC_FIT + 1));
    }
    let e = |x: modkit::Error| x.to_string();
    let f = SetFunction::symmetric(v).map_err(e)?;
    let weak = symmetric_modularity_eps(&f, Variant::Weak).map_err(e)?;
    let strong = symmetric_modularity_eps(&f, Variant::Strong).map_err(e)?;
    let fit = closest_linear(&f, FitMode::Exact).map_err(e)?;
    Ok(json!({
        "n": f.n(),
        "eps_weak": weak.value,
        "eps_strong": strong.value,
        "weak_sizes": weak.sizes,
        "strong_sizes": strong.sizes,
        "delta": fit.delta,
        "c0": fit.g.c0,
        "coeffs": fit.g.coeffs,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn bound_curves(steps: usize) -> Result<String, JsError> {
    bound_curves_json(steps).map_err(|m| JsError::new(&m))
}

#[wasm_bindgen]
pub fn learner_profile(n: usize, delta: f64, seed: u64, samples: usize) -> Result<String, JsError> {
    learner_profile_json(n, delta, seed, samples).map_err(|m| JsError::new(&m))
}

#[wasm_bindgen]
pub fn symmetric_fit(values: &str) -> Result<String, JsError> {
    symmetric_fit_json(values).map_err(|m| JsError::new(&m))
}
