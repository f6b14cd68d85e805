//! Feasible-set descriptions.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot_unchecked, ensure_finite, norm2};
use crate::projection::{self, ProjectionParams};

/// Axis-aligned box `{x : lower ≤ x ≤ upper}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidParameter("box must have dimension ≥ 1".into()));
        }
        ensure_finite(&lower, "box lower bound")?;
        ensure_finite(&upper, "box upper bound")?;
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::EmptySet(format!(
                "box bound {i}: lower {} > upper {}",
                lower[i], upper[i]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The box `[lo, hi]ⁿ`.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(c, d)| 0.5 * (c + d)).collect()
    }

    /// Length of the box diagonal, `‖upper − lower‖`.
    pub fn diameter(&self) -> f64 {
        crate::linalg::distance_unchecked(&self.lower, &self.upper)
    }

    pub(crate) fn violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .fold(0.0, |m, (xi, (c, d))| m.max(c - xi).max(xi - d))
    }
}

/// Closed halfspace `{x : a·x ≤ b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    normal: Vec<f64>,
    offset: f64,
    normal_sq: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let normal_sq = checked_normal(&normal, offset)?;
        Ok(Self {
            normal,
            offset,
            normal_sq,
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub(crate) fn normal_sq(&self) -> f64 {
        self.normal_sq
    }

    /// Scaled violation `max(0, a·x − b)/‖a‖`, the distance to the halfspace.
    pub(crate) fn violation(&self, x: &[f64]) -> f64 {
        (dot_unchecked(&self.normal, x) - self.offset).max(0.0) / self.normal_sq.sqrt()
    }
}

/// Hyperplane `{x : a·x = b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vec<f64>,
    offset: f64,
    normal_sq: f64,
}

impl Hyperplane {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let normal_sq = checked_normal(&normal, offset)?;
        Ok(Self {
            normal,
            offset,
            normal_sq,
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub(crate) fn normal_sq(&self) -> f64 {
        self.normal_sq
    }

    pub(crate) fn violation(&self, x: &[f64]) -> f64 {
        (dot_unchecked(&self.normal, x) - self.offset).abs() / self.normal_sq.sqrt()
    }
}

fn checked_normal(normal: &[f64], offset: f64) -> Result<f64> {
    ensure_finite(normal, "constraint normal")?;
    if !offset.is_finite() {
        return Err(Error::NonFinite("constraint offset"));
    }
    let nrm = norm2(normal);
    if nrm == 0.0 {
        return Err(Error::InvalidParameter("constraint normal must be nonzero".into()));
    }
    Ok(nrm * nrm)
}

/// `{x : Ax ≤ b, A_eq x = b_eq, x ∈ box}` with an optional box.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub(crate) inequalities: Vec<Halfspace>,
    pub(crate) equalities: Vec<Hyperplane>,
    pub(crate) bounds: Option<Bounds>,
    dim: usize,
}

impl Polyhedron {
    pub fn inequalities(&self) -> &[Halfspace] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[Hyperplane] {
        &self.equalities
    }

    pub fn bounds(&self) -> Option<&Bounds> {
        self.bounds.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest distance from `x` to any single constraint set.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let ineq = self.inequalities.iter().map(|h| h.violation(x));
        let eq = self.equalities.iter().map(|h| h.violation(x));
        let bx = self.bounds.iter().map(|b| b.violation(x));
        ineq.chain(eq).chain(bx).fold(0.0, f64::max)
    }
}

/// Convex feasible set `X`; drives projection dispatch.
///
/// Construction checks that the set is nonempty.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    BoxOnly(Bounds),
    BoxHalfspace(Bounds, Halfspace),
    Polyhedron(Polyhedron),
}

impl FeasibleSet {
    pub fn boxed(bounds: Bounds) -> Self {
        Self::BoxOnly(bounds)
    }

    /// `box ∩ {a·x ≤ b}`. Fails if the intersection is empty.
    pub fn box_halfspace(bounds: Bounds, halfspace: Halfspace) -> Result<Self> {
        check_dim(bounds.dim(), halfspace.dim())?;
        // min over the box of a·y
        let min_ax: f64 = halfspace
            .normal()
            .iter()
            .zip(bounds.lower().iter().zip(bounds.upper()))
            .map(|(a, (c, d))| if *a > 0.0 { a * c } else { a * d })
            .sum();
        let slack = ProjectionParams::default().tol * (1.0 + halfspace.offset().abs());
        if min_ax > halfspace.offset() + slack {
            return Err(Error::EmptySet(format!(
                "min of a·x over the box is {min_ax}, above offset {}",
                halfspace.offset()
            )));
        }
        Ok(Self::BoxHalfspace(bounds, halfspace))
    }

    /// `{x ∈ [0,1]ⁿ : Σ x_i ≤ budget}`.
    pub fn unit_box_with_budget(n: usize, budget: f64) -> Result<Self> {
        Self::box_halfspace(Bounds::uniform(n, 0.0, 1.0)?, Halfspace::new(vec![1.0; n], budget)?)
    }

    /// General polyhedron. Nonemptiness is checked by projecting the box
    /// midpoint (or the origin) and verifying the result is feasible.
    pub fn polyhedron(
        inequalities: Vec<Halfspace>,
        equalities: Vec<Hyperplane>,
        bounds: Option<Bounds>,
    ) -> Result<Self> {
        let dim = bounds
            .as_ref()
            .map(Bounds::dim)
            .or_else(|| inequalities.first().map(Halfspace::dim))
            .or_else(|| equalities.first().map(Hyperplane::dim))
            .ok_or_else(|| Error::InvalidParameter("polyhedron has no constraints".into()))?;
        for h in &inequalities {
            check_dim(dim, h.dim())?;
        }
        for h in &equalities {
            check_dim(dim, h.dim())?;
        }
        let poly = Polyhedron {
            inequalities,
            equalities,
            bounds,
            dim,
        };
        let start = poly
            .bounds
            .as_ref()
            .map(Bounds::midpoint)
            .unwrap_or_else(|| vec![0.0; dim]);
        let params = ProjectionParams::default();
        let y = projection::project_polyhedron(&start, &poly, &params).map_err(|e| match e {
            Error::ProjectionNotConverged { .. } => Error::EmptySet(format!("alternating projections failed: {e}")),
            other => other,
        })?;
        let viol = poly.max_violation(&y);
        if viol > 1e-6 * (1.0 + norm2(&y)) {
            return Err(Error::EmptySet(format!(
                "alternating projections ended at a point violating the constraints by {viol:e}"
            )));
        }
        Ok(Self::Polyhedron(poly))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::BoxOnly(b) | Self::BoxHalfspace(b, _) => b.dim(),
            Self::Polyhedron(p) => p.dim(),
        }
    }

    /// The box part, if any.
    pub fn bounds(&self) -> Option<&Bounds> {
        match self {
            Self::BoxOnly(b) | Self::BoxHalfspace(b, _) => Some(b),
            Self::Polyhedron(p) => p.bounds(),
        }
    }

    /// Largest distance from `x` to any single constraint.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        match self {
            Self::BoxOnly(b) => b.violation(x),
            Self::BoxHalfspace(b, h) => b.violation(x).max(h.violation(x)),
            Self::Polyhedron(p) => p.max_violation(x),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim() && self.max_violation(x) <= tol
    }

    pub fn project(&self, x: &[f64], params: &ProjectionParams) -> Result<Vec<f64>> {
        projection::project(x, self, params)
    }

    /// `‖x − π_X(x)‖`.
    pub fn distance(&self, x: &[f64], params: &ProjectionParams) -> Result<f64> {
        let p = self.project(x, params)?;
        Ok(crate::linalg::distance_unchecked(x, &p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_box() {
        assert!(matches!(
            Bounds::new(vec![0.0, 2.0], vec![1.0, 1.0]),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn rejects_zero_normal() {
        assert!(Halfspace::new(vec![0.0, 0.0], 1.0).is_err());
        assert!(Hyperplane::new(vec![0.0], 1.0).is_err());
    }

    #[test]
    fn rejects_empty_box_halfspace() {
        assert!(matches!(
            FeasibleSet::unit_box_with_budget(3, -0.5),
            Err(Error::EmptySet(_))
        ));
        assert!(FeasibleSet::unit_box_with_budget(3, 0.0).is_ok());
    }

    #[test]
    fn rejects_empty_polyhedron() {
        let n = 4;
        let eq = Hyperplane::new(vec![1.0; n], 2.0 * n as f64).unwrap();
        let res = FeasibleSet::polyhedron(vec![], vec![eq], Some(Bounds::uniform(n, 0.0, 1.0).unwrap()));
        assert!(matches!(res, Err(Error::EmptySet(_))), "{res:?}");
    }

    #[test]
    fn accepts_consistent_polyhedron() {
        let n = 3;
        let eq = Hyperplane::new(vec![1.0; n], 1.0).unwrap();
        let ineq = Halfspace::new(vec![1.0, -1.0, 0.0], 0.0).unwrap();
        let set = FeasibleSet::polyhedron(vec![ineq], vec![eq], Some(Bounds::uniform(n, 0.0, 1.0).unwrap())).unwrap();
        assert_eq!(set.dim(), 3);
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let b = Bounds::uniform(3, 0.0, 1.0).unwrap();
        let h = Halfspace::new(vec![1.0; 2], 1.0).unwrap();
        assert!(matches!(
            FeasibleSet::box_halfspace(b, h),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
