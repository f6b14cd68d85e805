//! Exact penalty reformulations of `min f(x) s.t. x ∈ X`.
//!
//! * max penalty: `F(x) = f(x) + M·max{0, h(x)}`
//! * distance penalty: `F(x) = f(x) + M·‖x − π_X(x)‖^γ`
//! * projective penalty: `F(x) = f(π_X(x)) + M·‖x − π_X(x)‖^γ`
//!
//! The projective form evaluates `f` only on `X`, so its minimizers project
//! onto the constrained solution for any `M > 0`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd::FdParams;
use crate::linalg::{distance_unchecked, norm2};
use crate::oracle::{Oracle, SubgradientRule, ValueFn};
use crate::projection::ProjectionParams;
use crate::sets::FeasibleSet;

/// Points this close to `X` (relative to `1 + ‖x‖`) count as feasible in the
/// distance-penalty subgradient.
const FEASIBLE_GAP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    /// Penalty coefficient `M`.
    pub m: f64,
    /// Distance exponent `γ`.
    pub gamma: f64,
}

impl PenaltyParams {
    pub fn new(m: f64, gamma: f64) -> Result<Self> {
        let p = Self { m, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn with_m(m: f64) -> Result<Self> {
        Self::new(m, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > 0.0 && self.m.is_finite() && self.gamma > 0.0 && self.gamma.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "penalty needs M > 0 and γ > 0, got M = {}, γ = {}",
                self.m, self.gamma
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    MaxPenalty,
    DistancePenalty,
    ProjectivePenalty,
}

/// A penalized objective `F`.
#[derive(Clone)]
pub struct PenalizedObjective {
    kind: PenaltyKind,
    inner: Oracle,
    set: Option<Arc<FeasibleSet>>,
    constraint: Option<ValueFn>,
    params: PenaltyParams,
    projection: ProjectionParams,
}

impl std::fmt::Debug for PenalizedObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PenalizedObjective")
            .field("kind", &self.kind)
            .field("set", &self.set)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl PenalizedObjective {
    /// `f(x) + M·max{0, h(x)}` for a user-supplied constraint function `h`.
    pub fn max_penalty<H>(inner: Oracle, constraint: H, params: PenaltyParams) -> Result<Self>
    where
        H: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        params.validate()?;
        Ok(Self {
            kind: PenaltyKind::MaxPenalty,
            inner,
            set: None,
            constraint: Some(Arc::new(move |x| Ok(constraint(x)))),
            params,
            projection: ProjectionParams::default(),
        })
    }

    pub fn distance(inner: Oracle, set: FeasibleSet, params: PenaltyParams) -> Result<Self> {
        Self::with_set(PenaltyKind::DistancePenalty, inner, set, params)
    }

    pub fn projective(inner: Oracle, set: FeasibleSet, params: PenaltyParams) -> Result<Self> {
        Self::with_set(PenaltyKind::ProjectivePenalty, inner, set, params)
    }

    fn with_set(kind: PenaltyKind, inner: Oracle, set: FeasibleSet, params: PenaltyParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            kind,
            inner,
            set: Some(Arc::new(set)),
            constraint: None,
            params,
            projection: ProjectionParams::default(),
        })
    }

    pub fn with_projection_params(mut self, projection: ProjectionParams) -> Self {
        self.projection = projection;
        self
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn params(&self) -> PenaltyParams {
        self.params
    }

    pub fn set(&self) -> Option<&FeasibleSet> {
        self.set.as_deref()
    }

    /// `F(x)` for whichever kind this is.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self.kind {
            PenaltyKind::MaxPenalty => self.max_penalty_value(x),
            PenaltyKind::DistancePenalty => self.distance_penalty_value(x),
            PenaltyKind::ProjectivePenalty => self.projective_penalty_value(x),
        }
    }

    pub fn max_penalty_value(&self, x: &[f64]) -> Result<f64> {
        self.expect(PenaltyKind::MaxPenalty)?;
        let h = self.constraint.as_ref().expect("max penalty carries a constraint")(x)?;
        if !h.is_finite() {
            return Err(Error::NonFinite("constraint function"));
        }
        Ok(self.inner.value(x)? + self.params.m * h.max(0.0))
    }

    pub fn distance_penalty_value(&self, x: &[f64]) -> Result<f64> {
        self.expect(PenaltyKind::DistancePenalty)?;
        let (_, dist) = self.project(x)?;
        Ok(self.inner.value(x)? + self.penalty_term(dist))
    }

    /// `g_f(x) + M·(x − π_X(x))/‖x − π_X(x)‖`, with a zero correction on `X`.
    pub fn distance_penalty_subgrad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.expect(PenaltyKind::DistancePenalty)?;
        if self.params.gamma != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "analytic distance-penalty subgradient needs γ = 1, got {}",
                self.params.gamma
            )));
        }
        if !matches!(self.inner.subgradient_rule(), SubgradientRule::Analytic(_)) {
            return Err(Error::MissingSubgradient);
        }
        let mut g = self.inner.subgradient(x)?;
        let (p, dist) = self.project(x)?;
        if dist > FEASIBLE_GAP * (1.0 + norm2(x)) {
            let scale = self.params.m / dist;
            for ((gi, xi), pi) in g.iter_mut().zip(x).zip(&p) {
                *gi += scale * (xi - pi);
            }
        }
        Ok(g)
    }

    pub fn projective_penalty_value(&self, x: &[f64]) -> Result<f64> {
        self.expect(PenaltyKind::ProjectivePenalty)?;
        let (p, dist) = self.project(x)?;
        Ok(self.inner.value(&p)? + self.penalty_term(dist))
    }

    /// Adapter for the solver. Distance penalty with `γ = 1` and an analytic
    /// inner subgradient gets the analytic rule, projective penalty gets
    /// finite differences, anything else is value-only.
    pub fn into_oracle(self, fd: FdParams) -> Oracle {
        let analytic_distance = self.kind == PenaltyKind::DistancePenalty
            && self.params.gamma == 1.0
            && matches!(self.inner.subgradient_rule(), SubgradientRule::Analytic(_));
        let kind = self.kind;
        let this = Arc::new(self);
        let value_obj = Arc::clone(&this);
        let oracle = Oracle::try_new(move |x| value_obj.value(x));
        if analytic_distance {
            oracle.try_with_subgradient(move |x| this.distance_penalty_subgrad(x))
        } else if kind == PenaltyKind::ProjectivePenalty {
            oracle.with_finite_differences(fd)
        } else {
            oracle
        }
    }

    fn expect(&self, kind: PenaltyKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "expected {kind:?}, objective is {:?}",
                self.kind
            )))
        }
    }

    fn project(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        let set = self.set.as_deref().expect("set-based penalty carries a set");
        let p = set.project(x, &self.projection)?;
        let d = distance_unchecked(x, &p);
        Ok((p, d))
    }

    fn penalty_term(&self, dist: f64) -> f64 {
        if self.params.gamma == 1.0 {
            self.params.m * dist
        } else {
            self.params.m * dist.powf(self.params.gamma)
        }
    }
}

/// Free-function form of [`PenalizedObjective::into_oracle`].
pub fn penalized_oracle(obj: PenalizedObjective, fd: FdParams) -> Oracle {
    obj.into_oracle(fd)
}
