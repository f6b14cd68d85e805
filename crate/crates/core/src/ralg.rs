//! Shor's r-algorithm in the `ralgb5` form: subgradient descent in a
//! transformed space, with space dilation along the difference of two
//! successive subgradients and an adaptive step along each direction.
//!
//! The transformation matrix `B` starts at the identity. Each outer
//! iteration moves along `d = B·ξ/‖ξ‖`, `ξ = Bᵀg`, in steps of length `h`
//! until the subgradient at the new point no longer opposes `d`; then `B` is
//! contracted by `1/α` along `r = Bᵀ(g_new − g)`.

use web_time::Instant;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot_unchecked, ensure_finite, norm2, SquareMatrix};
use crate::oracle::Oracle;
use crate::sets::Bounds;

/// Solver constants. Defaults follow the `ralgb5` parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RAlgParams {
    /// Initial step length.
    pub h0: f64,
    /// Space dilation coefficient.
    pub alpha: f64,
    /// Step factor applied after each outer iteration.
    pub q1: f64,
    /// Step growth factor, applied every `nh` inner steps.
    pub q2: f64,
    pub nh: usize,
    /// Stop when an outer iteration moves less than this.
    pub epsx: f64,
    /// Stop when the subgradient norm falls below this.
    pub epsg: f64,
    pub maxitn: usize,
    /// Inner-step cap per direction; reaching it ends the run.
    pub max_inner: usize,
}

impl Default for RAlgParams {
    fn default() -> Self {
        Self {
            h0: 1.0,
            alpha: 4.0,
            q1: 1.0,
            q2: 1.1,
            nh: 3,
            epsx: 1e-8,
            epsg: 1e-12,
            maxitn: 7000,
            max_inner: 500,
        }
    }
}

impl RAlgParams {
    /// Defaults with `h0 = ‖upper − lower‖`.
    pub fn for_bounds(bounds: &Bounds) -> Self {
        Self {
            h0: bounds.diameter(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return bad("h0 must be positive");
        }
        // alpha = 1 is allowed: no dilation, plain subgradient descent.
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return bad("alpha must be ≥ 1");
        }
        if !(self.q1 > 0.0 && self.q2 >= 1.0) {
            return bad("need q1 > 0 and q2 ≥ 1");
        }
        if !(self.epsx > 0.0 && self.epsg > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.nh == 0 || self.maxitn == 0 || self.max_inner == 0 {
            return bad("nh, maxitn and max_inner must be ≥ 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    StepTolerance,
    SubgradTolerance,
    MaxIterations,
    OracleFailure,
}

/// Result of a solve. `x_final` and `f_final` are the best point seen.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x_final: Vec<f64>,
    pub f_final: f64,
    pub itn: usize,
    pub time_sec: f64,
    pub termination: Termination,
    /// `‖x_final − π_X(x_final)‖`, filled in by callers that know `X`.
    pub feasibility_gap: Option<f64>,
    /// Calls to `Oracle::evaluate`.
    pub oracle_calls: usize,
    pub inner_steps: usize,
    /// Set when `termination` is `OracleFailure`.
    pub message: Option<String>,
}

/// Per-iteration trace record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub itn: usize,
    pub f_best: f64,
    pub g_norm: f64,
    pub h: f64,
    pub inner_steps: usize,
}

/// Mutable iteration state.
#[derive(Debug, Clone)]
pub struct RAlgState {
    pub x: Vec<f64>,
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub b: SquareMatrix,
    pub h: f64,
    pub itn: usize,
    /// Subgradient at `x`.
    pub g: Vec<f64>,
}

/// Step-wise driver; [`minimize`] runs it to completion.
pub struct RAlgSolver<'a> {
    oracle: &'a Oracle,
    params: RAlgParams,
    state: RAlgState,
    started: Instant,
    oracle_calls: usize,
    inner_steps: usize,
    done: Option<Termination>,
    message: Option<String>,
    last_inner: usize,
}

impl<'a> RAlgSolver<'a> {
    pub fn new(oracle: &'a Oracle, x0: &[f64], params: RAlgParams) -> Result<Self> {
        params.validate()?;
        ensure_finite(x0, "starting point")?;
        if x0.is_empty() {
            return Err(Error::InvalidParameter("empty starting point".into()));
        }
        let started = Instant::now();
        let (f0, g0) = oracle.evaluate(x0)?;
        check_dim(x0.len(), g0.len())?;
        let n = x0.len();
        Ok(Self {
            oracle,
            params,
            state: RAlgState {
                x: x0.to_vec(),
                x_best: x0.to_vec(),
                f_best: f0,
                b: SquareMatrix::identity(n),
                h: params.h0,
                itn: 0,
                g: g0,
            },
            started,
            oracle_calls: 1,
            inner_steps: 0,
            done: None,
            message: None,
            last_inner: 0,
        })
    }

    pub fn state(&self) -> &RAlgState {
        &self.state
    }

    pub fn termination(&self) -> Option<Termination> {
        self.done
    }

    pub fn trace_event(&self) -> TraceEvent {
        TraceEvent {
            itn: self.state.itn,
            f_best: self.state.f_best,
            g_norm: norm2(&self.state.g),
            h: self.state.h,
            inner_steps: self.last_inner,
        }
    }

    /// One outer iteration. Returns the termination reason once the run is over.
    pub fn step(&mut self) -> Option<Termination> {
        if self.done.is_some() {
            return self.done;
        }
        let p = self.params;
        let st = &mut self.state;

        if norm2(&st.g) <= p.epsg {
            return self.stop(Termination::SubgradTolerance);
        }
        if st.itn >= p.maxitn {
            return self.stop(Termination::MaxIterations);
        }
        st.itn += 1;

        let xi = st.b.tr_mul_vec(&st.g);
        let xi_norm = norm2(&xi);
        if !(xi_norm > 0.0 && xi_norm.is_finite()) {
            return self.stop(Termination::StepTolerance);
        }
        let xi: Vec<f64> = xi.iter().map(|v| v / xi_norm).collect();
        let d = st.b.mul_vec(&xi);
        let d_norm = norm2(&d);

        let mut path = 0.0;
        let mut inner = 0;
        let g_new = loop {
            for (xi, di) in st.x.iter_mut().zip(&d) {
                *xi -= st.h * di;
            }
            path += st.h * d_norm;
            inner += 1;
            self.oracle_calls += 1;
            let (f, g) = match self.oracle.evaluate(&st.x) {
                Ok(v) => v,
                Err(e) => {
                    self.inner_steps += inner;
                    self.last_inner = inner;
                    self.message = Some(e.to_string());
                    return self.stop(Termination::OracleFailure);
                }
            };
            if f < st.f_best {
                st.f_best = f;
                st.x_best.copy_from_slice(&st.x);
            }
            if inner % p.nh == 0 {
                st.h *= p.q2;
            }
            if norm2(&g) <= p.epsg {
                st.g = g;
                self.inner_steps += inner;
                self.last_inner = inner;
                return self.stop(Termination::SubgradTolerance);
            }
            if dot_unchecked(&d, &g) <= 0.0 {
                break g;
            }
            if inner >= p.max_inner {
                self.inner_steps += inner;
                self.last_inner = inner;
                self.message = Some(format!(
                    "no sign change of the directional derivative after {inner} steps"
                ));
                return self.stop(Termination::OracleFailure);
            }
        };
        self.inner_steps += inner;
        self.last_inner = inner;

        if path <= p.epsx {
            st.g = g_new;
            return self.stop(Termination::StepTolerance);
        }

        let diff: Vec<f64> = g_new.iter().zip(&st.g).map(|(a, b)| a - b).collect();
        let r = st.b.tr_mul_vec(&diff);
        let r_norm = norm2(&r);
        if r_norm > 0.0 && r_norm.is_finite() && p.alpha != 1.0 {
            let r: Vec<f64> = r.iter().map(|v| v / r_norm).collect();
            let br = st.b.mul_vec(&r);
            st.b.rank_one_update(1.0 / p.alpha - 1.0, &br, &r);
        }
        st.g = g_new;
        st.h *= p.q1;

        if !st.b.is_finite() || !st.h.is_finite() {
            self.message = Some("space transformation became non-finite".into());
            return self.stop(Termination::OracleFailure);
        }
        None
    }

    fn stop(&mut self, why: Termination) -> Option<Termination> {
        self.done = Some(why);
        self.done
    }

    /// Runs to completion, reporting each outer iteration to `trace`.
    pub fn run(mut self, mut trace: impl FnMut(&TraceEvent)) -> SolveReport {
        loop {
            let before = self.state.itn;
            let stop = self.step();
            if self.state.itn > before {
                trace(&self.trace_event());
            }
            if stop.is_some() {
                break;
            }
        }
        self.finish()
    }

    pub fn finish(self) -> SolveReport {
        SolveReport {
            x_final: self.state.x_best,
            f_final: self.state.f_best,
            itn: self.state.itn,
            time_sec: self.started.elapsed().as_secs_f64(),
            termination: self.done.unwrap_or(Termination::MaxIterations),
            feasibility_gap: None,
            oracle_calls: self.oracle_calls,
            inner_steps: self.inner_steps,
            message: self.message,
        }
    }
}

/// Minimizes `oracle` from `x0`.
pub fn minimize(oracle: &Oracle, x0: &[f64], params: &RAlgParams) -> Result<SolveReport> {
    minimize_with_trace(oracle, x0, params, |_| {})
}

pub fn minimize_with_trace(
    oracle: &Oracle,
    x0: &[f64],
    params: &RAlgParams,
    trace: impl FnMut(&TraceEvent),
) -> Result<SolveReport> {
    if !oracle.has_subgradient() {
        return Err(Error::MissingSubgradient);
    }
    Ok(RAlgSolver::new(oracle, x0, *params)?.run(trace))
}
