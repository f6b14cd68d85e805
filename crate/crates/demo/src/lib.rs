//! Two-dimensional playground for the browser page in `www/`.
//!
//! The problem is the ravine `|x − 1| + 1.2·|y − 1|` over the unit square,
//! optionally cut by `x + y ≤ b`. Each exported function has a plain Rust
//! twin that returns `Result<_, String>` so it can be tested off the browser.

use ralg_core::{
    Error, FdParams, PenalizedObjective, PenaltyParams, ProjectionParams, RAlgParams, RAlgSolver, RavineProblem,
};
use wasm_bindgen::prelude::*;

const DIM: usize = 2;
/// Iterate cap for the trajectory plot.
const MAX_ITERATIONS: usize = 400;

fn problem(budget: f64) -> Result<RavineProblem, Error> {
    if budget.is_finite() && budget < DIM as f64 {
        RavineProblem::with_budget(DIM, budget)
    } else {
        RavineProblem::unit_box(DIM)
    }
}

fn objective(method: &str, m: f64, problem: &RavineProblem) -> Result<PenalizedObjective, Error> {
    let params = PenaltyParams::with_m(m)?;
    let set = problem.set().clone();
    match method {
        "distance" => PenalizedObjective::distance(problem.oracle(), set, params),
        "projective" => PenalizedObjective::projective(problem.oracle(), set, params),
        other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
    }
}

/// Iterates of a run from `(x0, y0)`: interleaved `x, y` of the current
/// point after every outer iteration, starting with the initial point.
pub fn trajectory(method: &str, m: f64, budget: f64, x0: f64, y0: f64) -> Result<Vec<f64>, String> {
    let problem = problem(budget).map_err(|e| e.to_string())?;
    let oracle = objective(method, m, &problem)
        .map_err(|e| e.to_string())?
        .into_oracle(FdParams::default());
    let bounds = problem.set().bounds().expect("ravine sets carry a box");
    let params = RAlgParams {
        maxitn: MAX_ITERATIONS,
        ..RAlgParams::for_bounds(bounds)
    };
    let mut solver = RAlgSolver::new(&oracle, &[x0, y0], params).map_err(|e| e.to_string())?;
    let mut path = vec![x0, y0];
    loop {
        let stop = solver.step();
        path.extend_from_slice(&solver.state().x);
        if stop.is_some() {
            break;
        }
    }
    path.extend_from_slice(&solver.state().x_best);
    Ok(path)
}

/// Euclidean projection of `(x, y)` onto the feasible set.
pub fn projection(budget: f64, x: f64, y: f64) -> Result<Vec<f64>, String> {
    let problem = problem(budget).map_err(|e| e.to_string())?;
    problem
        .set()
        .project(&[x, y], &ProjectionParams::default())
        .map_err(|e| e.to_string())
}

/// Penalized objective on a `cols × rows` grid over `[x_min, x_max] × [y_min, y_max]`,
/// row-major from `y_min` upward.
#[allow(clippy::too_many_arguments)]
pub fn landscape(
    method: &str,
    m: f64,
    budget: f64,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    cols: usize,
    rows: usize,
) -> Result<Vec<f64>, String> {
    if cols < 2 || rows < 2 || cols * rows > 1 << 20 {
        return Err(format!("grid {cols}×{rows} out of range"));
    }
    let problem = problem(budget).map_err(|e| e.to_string())?;
    let obj = objective(method, m, &problem).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        let y = y_min + (y_max - y_min) * r as f64 / (rows - 1) as f64;
        for c in 0..cols {
            let x = x_min + (x_max - x_min) * c as f64 / (cols - 1) as f64;
            out.push(obj.value(&[x, y]).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Constrained minimizer `[x, y, f*]`.
pub fn optimum(budget: f64) -> Result<Vec<f64>, String> {
    let problem = problem(budget).map_err(|e| e.to_string())?;
    let (x, f) = problem.known_optimum().map_err(|e| e.to_string())?;
    Ok(vec![x[0], x[1], f])
}

#[wasm_bindgen(js_name = trajectory)]
pub fn trajectory_js(method: &str, m: f64, budget: f64, x0: f64, y0: f64) -> Result<Vec<f64>, JsError> {
    trajectory(method, m, budget, x0, y0).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = projection)]
pub fn projection_js(budget: f64, x: f64, y: f64) -> Result<Vec<f64>, JsError> {
    projection(budget, x, y).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = landscape)]
#[allow(clippy::too_many_arguments)]
pub fn landscape_js(
    method: &str,
    m: f64,
    budget: f64,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    cols: usize,
    rows: usize,
) -> Result<Vec<f64>, JsError> {
    landscape(method, m, budget, x_min, x_max, y_min, y_max, cols, rows).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = optimum)]
pub fn optimum_js(budget: f64) -> Result<Vec<f64>, JsError> {
    optimum(budget).map_err(|e| JsError::new(&e))
}
