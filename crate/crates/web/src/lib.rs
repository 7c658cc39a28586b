//! Browser bindings. Every export takes plain numbers and returns a JSON
//! string, so the page needs no generated type glue beyond wasm-bindgen.

use influence::menu::willingness_to_pay;
use influence::{
    access_pricing, coercion_menu, contains, geometry, optimal_menu, sender_value, Environment,
    InfluenceBundle, TypeDistribution,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn env(mu_low: f64, mu_prior: f64, mu_high: f64) -> Result<Environment, String> {
    Environment::new(mu_low, mu_prior, mu_high).map_err(|e| e.to_string())
}

fn dist(low: f64, high: f64) -> Result<TypeDistribution, String> {
    TypeDistribution::uniform(low, high).map_err(|e| e.to_string())
}

fn point(b: &InfluenceBundle) -> Value {
    json!([b.q_l, b.q_r])
}

/// Implementable set, its vertices and the special bundles.
pub fn polytope(mu_low: f64, mu_prior: f64, mu_high: f64) -> Result<Value, String> {
    let e = env(mu_low, mu_prior, mu_high)?;
    let g = geometry(&e);
    let vertices: Vec<Value> = g
        .extreme_points
        .named()
        .iter()
        .map(|(name, b)| json!({ "label": name, "at": point(b) }))
        .collect();
    let mut marks =
        vec![json!({ "label": "equalizing", "at": point(&InfluenceBundle::EQUALIZING) })];
    for (label, b) in [
        ("B", e.crossing_bundle()),
        ("C*", e.coercive_outside_option()),
    ] {
        if !g.classification.solves_as_balanced() && contains(&e, &b).inside {
            marks.push(json!({ "label": label, "at": point(&b) }));
        }
    }
    Ok(json!({
        "classification": g.classification.to_string(),
        "kappa_l": g.kappa_l,
        "kappa_r": g.kappa_r,
        "vertices": vertices,
        "marks": marks,
    }))
}

/// Optimal menu for uniform types plus the utility curve on `points` types.
pub fn menu_curve(
    mu_low: f64,
    mu_prior: f64,
    mu_high: f64,
    low: f64,
    high: f64,
    points: usize,
) -> Result<Value, String> {
    let e = env(mu_low, mu_prior, mu_high)?;
    let d = dist(low, high)?;
    let m = optimal_menu(&e, &d).map_err(|e| e.to_string())?;
    let n = points.max(2);
    let curve = (0..n)
        .map(|k| {
            let t = low + (high - low) * k as f64 / (n - 1) as f64;
            let u = m.indirect_utility(t).map_err(|e| e.to_string())?;
            Ok(json!([t, u, willingness_to_pay(&e, t)]))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let segments: Vec<Value> = m
        .segments
        .iter()
        .map(|s| {
            json!({
                "label": s.label,
                "from": s.theta_lo,
                "to": s.theta_hi,
                "bundle": point(&s.bundle),
                "price_low": s.price.at(s.theta_lo),
                "price_high": s.price.at(s.theta_hi),
            })
        })
        .collect();
    Ok(json!({
        "revenue": m.revenue(&d),
        "theta0": m.theta0,
        "segments": segments,
        "curve": curve,
        "warnings": m.warnings,
    }))
}

/// Revenue under access pricing, screening and coercion, with the coercive
/// utility curve next to the outside option's value.
pub fn regimes(
    mu_low: f64,
    mu_prior: f64,
    mu_high: f64,
    low: f64,
    high: f64,
    points: usize,
) -> Result<Value, String> {
    let e = env(mu_low, mu_prior, mu_high)?;
    let d = dist(low, high)?;
    let a = access_pricing(&e, &d).map_err(|e| e.to_string())?;
    let c = coercion_menu(&e, &d).map_err(|e| e.to_string())?;
    let n = points.max(2);
    let curve = (0..n)
        .map(|k| {
            let t = low + (high - low) * k as f64 / (n - 1) as f64;
            let u = c.menu.indirect_utility(t).map_err(|e| e.to_string())?;
            Ok(json!([t, u, sender_value(&c.outside_option, t)]))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json!({
        "access": { "price": a.price, "revenue": a.revenue, "buying_set": a.buying_set },
        "screening_revenue": c.screening_revenue,
        "coercion": {
            "status": format!("{:?}", c.status),
            "outside_option": point(&c.outside_option),
            "revenue": c.revenue,
            "gain": c.revenue_gain,
            "advisory": c.advisory,
            "curve": curve,
        },
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = polytope)]
pub fn polytope_js(mu_low: f64, mu_prior: f64, mu_high: f64) -> Result<String, JsValue> {
    to_js(polytope(mu_low, mu_prior, mu_high))
}

#[wasm_bindgen(js_name = menuCurve)]
pub fn menu_curve_js(
    mu_low: f64,
    mu_prior: f64,
    mu_high: f64,
    low: f64,
    high: f64,
    points: usize,
) -> Result<String, JsValue> {
    to_js(menu_curve(mu_low, mu_prior, mu_high, low, high, points))
}

#[wasm_bindgen(js_name = regimes)]
pub fn regimes_js(
    mu_low: f64,
    mu_prior: f64,
    mu_high: f64,
    low: f64,
    high: f64,
    points: usize,
) -> Result<String, JsValue> {
    to_js(regimes(mu_low, mu_prior, mu_high, low, high, points))
}
