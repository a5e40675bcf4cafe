//! Browser bindings: three interactive views over the solver library, each
//! returning a JSON string so the page needs no glue types.
//!
//! Build with `wasm-pack build --target web crates/wasm` and open
//! `crates/wasm/www/index.html` from a static file server.

use wasm_bindgen::prelude::wasm_bindgen;

use scsplit::problems::ProblemSpec;
use scsplit::solver::{run, MethodKind, SolverConfig};
use scsplit::spectral::{generalized_eigs, grid_search_alpha, optimal_alpha, tscsp_spectral_radius, SpectrumCase};

use serde_json::json;

/// Keep interactive runs snappy: grid parameter cap for solves/tuning and
/// an order cap for the dense spectral view.
const DEMO_M_CAP: usize = 64;
const DEMO_SPECTRUM_ORDER_CAP: usize = 400;

fn spec_for(example: u8, size: usize) -> Result<ProblemSpec, String> {
    if size == 0 {
        return Err("size must be at least 1".into());
    }
    Ok(match example {
        1 => ProblemSpec::ex1(size),
        2 => ProblemSpec::ex2(size),
        3 => ProblemSpec::ex3(size.max(2)),
        4 => ProblemSpec::ex4(size * size),
        other => return Err(format!("unknown example {other}")),
    })
}

fn err_json(message: String) -> String {
    json!({ "error": message }).to_string()
}

fn case_label(case: SpectrumCase) -> &'static str {
    match case {
        SpectrumCase::AllBelowOne => "all-below-one",
        SpectrumCase::AllAboveOne => "all-above-one",
        SpectrumCase::Straddling => "straddling",
    }
}

/// Run one method and return the residual history:
/// `{n, alpha, iterations, converged, final_relres, history: [..]}`.
///
/// `size` is the grid parameter m for examples 1-3 (order m^2) and the
/// square root of the order for example 4 (order size^2, matching the
/// published size ladder).
#[wasm_bindgen]
pub fn solve_history(example: u8, size: usize, method: &str, alpha: f64, max_iter: usize) -> String {
    let inner = || -> Result<String, String> {
        if size > DEMO_M_CAP {
            return Err(format!("size {size} exceeds the demo cap {DEMO_M_CAP}"));
        }
        let spec = spec_for(example, size)?;
        let problem = spec.build().map_err(|e| e.to_string())?;
        let method: MethodKind = method.parse().map_err(|e: scsplit::Error| e.to_string())?;
        let mut cfg = SolverConfig::new(method, alpha);
        cfg.max_iterations = max_iter.clamp(1, 2000);
        cfg.record_history = true;
        let report = run(&problem, &cfg).map_err(|e| e.to_string())?;
        Ok(json!({
            "n": problem.n,
            "alpha": alpha,
            "method": method.name(),
            "iterations": report.iterations,
            "converged": report.converged,
            "diverged": report.diverged,
            "final_relres": report.final_relative_residual,
            "history": report.residual_history,
        })
        .to_string())
    };
    inner().unwrap_or_else(err_json)
}

/// Spectral-radius curve of the two-step iteration over an alpha grid, with
/// the closed-form optimum: `{alphas, rhos, alpha_opt_minus, alpha_opt_plus,
/// rho_opt, mu_min, mu_max, case}`.
#[wasm_bindgen]
pub fn spectral_curve(example: u8, size: usize, alpha_max: f64, points: usize) -> String {
    let inner = || -> Result<String, String> {
        let spec = spec_for(example, size)?;
        if spec.dimension() > DEMO_SPECTRUM_ORDER_CAP {
            return Err(format!(
                "order {} exceeds the spectral demo cap {DEMO_SPECTRUM_ORDER_CAP}; pick a smaller size",
                spec.dimension()
            ));
        }
        let problem = spec.build().map_err(|e| e.to_string())?;
        let mus = generalized_eigs(&problem.w, &problem.t).map_err(|e| e.to_string())?;
        let info = optimal_alpha(&mus).map_err(|e| e.to_string())?;
        let points = points.clamp(16, 4000);
        let hi = if alpha_max > 0.0 { alpha_max } else { info.alpha_opt_plus + 1.0 };
        let mut alphas = Vec::with_capacity(points);
        let mut rhos = Vec::with_capacity(points);
        for k in 1..=points {
            let a = hi * k as f64 / points as f64;
            alphas.push(a);
            rhos.push(tscsp_spectral_radius(&mus, a).map_err(|e| e.to_string())?);
        }
        Ok(json!({
            "n": problem.n,
            "alphas": alphas,
            "rhos": rhos,
            "alpha_opt_minus": info.alpha_opt_minus,
            "alpha_opt_plus": info.alpha_opt_plus,
            "rho_opt": info.rho_opt,
            "mu_min": info.mus[0],
            "mu_max": info.mus[info.mus.len() - 1],
            "case": case_label(info.case),
        })
        .to_string())
    };
    inner().unwrap_or_else(err_json)
}

/// Iteration counts over an alpha grid for one method:
/// `{alphas, iterations, best_alpha, best_iterations}`. Non-converged grid
/// points report `max_iter + 1`.
#[wasm_bindgen]
pub fn tune_curve(
    example: u8,
    size: usize,
    method: &str,
    lo: f64,
    hi: f64,
    step: f64,
    max_iter: usize,
) -> String {
    let inner = || -> Result<String, String> {
        if size > DEMO_M_CAP {
            return Err(format!("size {size} exceeds the demo cap {DEMO_M_CAP}"));
        }
        let spec = spec_for(example, size)?;
        let problem = spec.build().map_err(|e| e.to_string())?;
        let method: MethodKind = method.parse().map_err(|e: scsplit::Error| e.to_string())?;
        let mut base = SolverConfig::new(method, 1.0);
        base.max_iterations = max_iter.clamp(1, 1000);
        let res = grid_search_alpha(&problem, &base, lo, hi, step).map_err(|e| e.to_string())?;
        let (alphas, iterations): (Vec<f64>, Vec<usize>) = res.grid.iter().copied().unzip();
        Ok(json!({
            "n": problem.n,
            "method": method.name(),
            "alphas": alphas,
            "iterations": iterations,
            "best_alpha": res.best_alpha,
            "best_iterations": res.best_iterations,
        })
        .to_string())
    };
    inner().unwrap_or_else(err_json)
}
