//! Browser bindings for the radbound engine.
//!
//! Each export takes plain strings and integers, runs the exact engine, and
//! returns a JSON document for the page to plot. Errors come back as plain
//! strings so the page can show them inline. The crate also builds natively,
//! where the same functions back the test suite.

use num::BigRational;
use radbound::concentration::{
    maurey_tail_check, LipschitzSpec, PermutationFunctional, ProductFunctional,
    DEFAULT_TAIL_BITS, MAX_EXACT_CONCENTRATION_N,
};
use radbound::hypergeometric::{default_psi2_grid, empirical_psi2_constant, HypergeomParams};
use radbound::moments::{constrained_khintchine_check, MomentOrder, WeightVector};
use radbound::numeric::{format_rational, parse_rational, rat_int, to_f64};
use radbound::report::Tolerance;
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

/// Cap on the weight-vector length for the in-browser chain explorer; the
/// zero-sum enumeration touches `C(N, N/2)` sign vectors per moment order.
pub const MAX_CHAIN_N: usize = 20;

/// Cap on the draw count for the in-browser hypergeometric profile.
pub const MAX_PROFILE_N: u64 = 300;

/// Cap on the moment order grid for the chain explorer.
pub const MAX_CHAIN_P: u32 = 16;

fn fin(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

fn parse_weights(text: &str) -> Result<WeightVector, String> {
    let vals: Vec<BigRational> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_rational(s).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    WeightVector::new(vals).map_err(|e| e.to_string())
}

fn default_b(a: &WeightVector) -> WeightVector {
    let n = a.len();
    if n % 2 == 0 {
        let vals = (0..n)
            .map(|i| if i < n / 2 { rat_int(1) } else { rat_int(-1) })
            .collect();
        WeightVector::new(vals).expect("split vector is non-empty")
    } else {
        a.clone()
    }
}

/// Exact two-link moment chain for the zero-sum sign model over integer
/// orders `2..=p_max`. Returns JSON with one point per order carrying the
/// root-domain sides and the exact verdicts of both links.
#[wasm_bindgen]
pub fn chain_explorer(weights: &str, p_max: u32) -> Result<String, String> {
    let a = parse_weights(weights)?;
    if a.len() > MAX_CHAIN_N {
        return Err(format!(
            "the in-browser explorer is capped at N = {MAX_CHAIN_N}, got {}",
            a.len()
        ));
    }
    if !(2..=MAX_CHAIN_P).contains(&p_max) {
        return Err(format!("p_max must be between 2 and {MAX_CHAIN_P}, got {p_max}"));
    }
    let tol = Tolerance::default();
    let mut points = Vec::new();
    for p in 2..=p_max {
        let order = MomentOrder::integer(p).map_err(|e| e.to_string())?;
        let [first, second] =
            constrained_khintchine_check(&a, order, tol).map_err(|e| e.to_string())?;
        points.push(json!({
            "p": p,
            "m_p": first.lhs.approx,
            "mid": first.rhs.approx,
            "right": second.rhs.approx,
            "first_satisfied": first.satisfied,
            "second_satisfied": second.satisfied,
        }));
    }
    let doc = json!({
        "n": a.len(),
        "weights": a.as_slice().iter().map(format_rational).collect::<Vec<_>>(),
        "points": points,
    });
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

/// Exact profile of the half-split hypergeometric `(2n, n, ell)`: the pmf
/// over its support, the mean, and the empirical sub-gaussian tail constant
/// against the classical benchmark `2 ell / n`. `ell = 0` degenerates to a
/// point mass and reports no tail constant. An infinite constant (every grid
/// point has zero tail mass) serializes as null.
#[wasm_bindgen]
pub fn hypergeom_profile(n: u64, ell: u64) -> Result<String, String> {
    if n == 0 || n > MAX_PROFILE_N {
        return Err(format!("n must be between 1 and {MAX_PROFILE_N}, got {n}"));
    }
    let params = HypergeomParams::new(2 * n, n, ell).map_err(|e| e.to_string())?;
    let pmf: Vec<_> = params
        .pmf_vec()
        .iter()
        .map(|(k, q)| json!({ "k": k, "prob": to_f64(q), "prob_exact": format_rational(q) }))
        .collect();
    let psi2 = if ell == 0 {
        serde_json::Value::Null
    } else {
        let outcome = empirical_psi2_constant(&params, &default_psi2_grid(ell))
            .map_err(|e| e.to_string())?;
        json!({
            "c_emp": fin(outcome.c_emp),
            "classical_c": outcome.classical_c,
            "beats_classical": outcome.beats_classical,
            "points": outcome
                .points
                .iter()
                .map(|pt| json!({ "t": pt.t, "tail": pt.tail, "c_at_t": fin(pt.c_at_t) }))
                .collect::<Vec<_>>(),
        })
    };
    let doc = json!({
        "N": params.big_n,
        "n": params.n,
        "ell": params.ell,
        "mean": to_f64(&params.mean()),
        "pmf": pmf,
        "psi2": psi2,
    });
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

/// Exact tail curve for the product functional `|sum_i a_{sigma(i)} b_i|`
/// under the uniform permutation measure: the counted tail mass at each
/// threshold against the `2 exp(-t^2 / (32 N))` envelope. An empty `b`
/// selects the default second vector (a half split of signs for even `N`,
/// a copy of `a` otherwise). `steps` thresholds are spread over `(0, 2N]`.
#[wasm_bindgen]
pub fn maurey_curve(weights_a: &str, weights_b: &str, steps: u32) -> Result<String, String> {
    let a = parse_weights(weights_a)?;
    if a.len() > MAX_EXACT_CONCENTRATION_N {
        return Err(format!(
            "the exact tail curve is capped at N = {MAX_EXACT_CONCENTRATION_N}, got {}",
            a.len()
        ));
    }
    if !(1..=64).contains(&steps) {
        return Err(format!("steps must be between 1 and 64, got {steps}"));
    }
    let b = if weights_b.trim().is_empty() { default_b(&a) } else { parse_weights(weights_b)? };
    let f = ProductFunctional::new(a.clone(), b.clone()).map_err(|e| e.to_string())?;
    let lipschitz = f.declared_lipschitz().expect("product functional declares a constant");
    let n = a.len() as i64;
    let ts: Vec<BigRational> = (1..=steps)
        .map(|k| rat_int(2 * n * k as i64) / rat_int(steps as i64))
        .collect();
    let reports = maurey_tail_check(&f, &ts, &LipschitzSpec::Auto, DEFAULT_TAIL_BITS, Tolerance::default())
        .map_err(|e| e.to_string())?;
    let points: Vec<_> = reports
        .iter()
        .zip(&ts)
        .map(|(r, t)| {
            json!({
                "t": to_f64(t),
                "tail": r.lhs.approx,
                "bound": r.rhs.approx,
                "satisfied": r.satisfied,
            })
        })
        .collect();
    let doc = json!({
        "n": a.len(),
        "a": a.as_slice().iter().map(format_rational).collect::<Vec<_>>(),
        "b": b.as_slice().iter().map(format_rational).collect::<Vec<_>>(),
        "lipschitz": to_f64(&lipschitz),
        "points": points,
    });
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}
