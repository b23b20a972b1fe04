//! Browser bindings. Each export takes and returns JSON text; the plain
//! functions behind them are usable (and tested) natively.

use gaudin_core::gl2rep::ProblemInstance;
use gaudin_core::numcore::{UniPoly, C64};
use gaudin_core::opscheme::{apply_dh, h_of_a, DhOperator};
use gaudin_core::workbench::{cmd_schubert, cmd_spectrum, InstanceConfig, Mode, Resolved};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Full spectrum report for a config.
pub fn spectrum_json(config: &str) -> Result<String, String> {
    let cfg = InstanceConfig::from_json(config).map_err(|e| e.to_string())?;
    let report = cmd_spectrum(&cfg, false).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// Intersection number for comma-separated weights.
pub fn schubert_count(m: &str, l: u32) -> Result<u64, String> {
    let m = m
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|_| format!("not a weight: {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(cmd_schubert(&m, l))
}

fn parse_roots(roots: &str) -> Result<Vec<C64>, String> {
    let v: Vec<Value> = serde_json::from_str(roots).map_err(|e| e.to_string())?;
    v.iter()
        .map(|r| match r {
            Value::Number(x) => x.as_f64().map(|x| C64::new(x, 0.0)),
            Value::Array(p) if p.len() == 2 => Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)),
            _ => None,
        })
        .map(|r| r.ok_or_else(|| format!("roots must be numbers or [re, im] pairs, got {roots}")))
        .collect()
}

/// Eigenvalues `h` attached to a set of Bethe roots, and how far the roots
/// are from solving the Bethe equations (the size of `D_h p`).
pub fn roots_to_eigenvalues(config: &str, roots: &str) -> Result<String, String> {
    let mut cfg = InstanceConfig::from_json(config).map_err(|e| e.to_string())?;
    cfg.mode = Mode::Float;
    let inst: ProblemInstance<C64> = match cfg.resolve().map_err(|e| e.to_string())? {
        Resolved::Float(i) => i,
        Resolved::Exact(_) => unreachable!("float mode resolves to complex points"),
    };
    let roots = parse_roots(roots)?;
    if roots.len() != inst.l() as usize {
        return Err(format!("expected {} roots, got {}", inst.l(), roots.len()));
    }
    let p = UniPoly::from_roots(&roots);
    let a = p.descending(inst.l() as usize + 1)[1..].to_vec();
    let h = h_of_a(&inst, &a).map_err(|e| e.to_string())?;
    let image = apply_dh(&DhOperator::new(&inst, h.clone()).map_err(|e| e.to_string())?, &p);
    let pair = |c: &C64| json!([c.re, c.im]);
    Ok(json!({
        "h": h.iter().map(pair).collect::<Vec<_>>(),
        "a": a.iter().map(pair).collect::<Vec<_>>(),
        "bethe_residual": image.max_modulus() / (1.0 + p.max_modulus()),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn spectrum(config: &str) -> Result<String, JsError> {
    spectrum_json(config).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn schubert(m: &str, l: u32) -> Result<f64, JsError> {
    schubert_count(m, l).map(|c| c as f64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn eigenvalues(config: &str, roots: &str) -> Result<String, JsError> {
    roots_to_eigenvalues(config, roots).map_err(|e| JsError::new(&e))
}
