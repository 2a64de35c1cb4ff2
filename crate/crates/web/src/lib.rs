//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a JSON string; the plain `*_json` functions carry the
//! logic so they can be tested natively.

use gps_core::polymer::{constrained_partition, homogeneous_free_energy_diagonal, DisorderLaw, Pinning};
use gps_core::relevance::{deloc_certificate, CertParams};
use gps_core::renewal::renewal_mass;
use gps_core::{Budget, Kernel, SlowlyVarying};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Grids in the browser stay small.
const MAX_N: usize = 512;

fn kernel(alpha: f64) -> Result<Kernel, String> {
    Kernel::new(alpha, SlowlyVarying::constant(1.0), 20_000).map_err(|e| e.to_string())
}

fn check_n(n: usize) -> Result<(), String> {
    if n == 0 || n > MAX_N {
        return Err(format!("N must lie in [1, {MAX_N}], got {n}"));
    }
    Ok(())
}

fn finite(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

/// `u(n, n)` for `n = 1..=N` and the `log u(n,n)` slope over the upper half.
pub fn renewal_diagonal_json(alpha: f64, n: usize) -> Result<String, String> {
    check_n(n)?;
    let k = kernel(alpha)?;
    let g = renewal_mass(&k, n, n, &Budget::DEFAULT).map_err(|e| e.to_string())?;
    let u: Vec<serde_json::Value> = (1..=n).map(|i| finite(g.u(i, i))).collect();
    let lo = (n / 2).max(1);
    let slope = if n >= 4 { (g.ln_u(n, n) - g.ln_u(lo, lo)) / ((n as f64).ln() - (lo as f64).ln()) } else { f64::NAN };
    Ok(json!({ "alpha": alpha, "u_diag": u, "local_slope": finite(slope) }).to_string())
}

/// `F_N = (1/N) log Z_{N,N}` and the infinite-volume free energy on a grid of `h`.
pub fn free_energy_scan_json(alpha: f64, n: usize, h_max: f64, points: usize) -> Result<String, String> {
    check_n(n)?;
    if !(h_max > 0.0 && h_max.is_finite()) || !(2..=64).contains(&points) {
        return Err("need h_max > 0 and 2..=64 points".into());
    }
    let k = kernel(alpha)?;
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let h = h_max * i as f64 / (points - 1) as f64;
        let g = constrained_partition(&k, Pinning::homogeneous(h), None, n, n, &Budget::DEFAULT).map_err(|e| e.to_string())?;
        let exact = homogeneous_free_energy_diagonal(&k, h).map_err(|e| e.to_string())?;
        rows.push(json!({ "h": h, "f_n": finite(g.log_z(n, n) / n as f64), "f": finite(exact.mid()) }));
    }
    let inv_mu = (alpha > 1.0).then(|| 1.0 / k.mu());
    Ok(json!({ "alpha": alpha, "n": n, "rows": rows, "inv_mu": inv_mu }).to_string())
}

/// Delocalization certificate at `h = h_c^a(β) + gap`, Gaussian disorder.
pub fn certificate_json(alpha: f64, beta: f64, gap: f64, delta: f64, k_scale: usize) -> Result<String, String> {
    if !(1..=64).contains(&k_scale) {
        return Err("k_scale must lie in [1, 64] in the browser".into());
    }
    let k = kernel(alpha)?;
    let law = DisorderLaw::GaussianUnit;
    let h = -law.log_q(beta) + gap;
    let p = CertParams { delta, k_scale, epsilon: 0.5, schedule: None };
    let r = deloc_certificate(&k, law, beta, h, &p, &Budget::DEFAULT).map_err(|e| e.to_string())?;
    Ok(json!({
        "h": r.h,
        "rho1": r.rho.rho1,
        "rho2": r.rho.rho2,
        "rho3": r.rho.rho3,
        "rho_sum": r.rho_sum,
        "certified": r.certified,
        "per_cell_bound_source": r.per_cell_bound_source,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn renewal_diagonal(alpha: f64, n: usize) -> Result<String, JsError> {
    renewal_diagonal_json(alpha, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn free_energy_scan(alpha: f64, n: usize, h_max: f64, points: usize) -> Result<String, JsError> {
    free_energy_scan_json(alpha, n, h_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn certificate(alpha: f64, beta: f64, gap: f64, delta: f64, k_scale: usize) -> Result<String, JsError> {
    certificate_json(alpha, beta, gap, delta, k_scale).map_err(|e| JsError::new(&e))
}
