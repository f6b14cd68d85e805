//! Euclidean projection `π_X(x) = argmin_{y ∈ X} ‖y − x‖²` onto each
//! [`FeasibleSet`] variant.
//!
//! Box, halfspace and hyperplane projections are closed form. The
//! box ∩ halfspace case solves the one-multiplier KKT system
//! `y(λ) = clamp(x − λa)`, `a·y(λ) = b` by bisection on `λ` followed by an
//! exact solve on the final active set. General polyhedra use Dykstra's
//! alternating projections.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, distance_unchecked, dot_unchecked, norm2};
use crate::sets::{Bounds, FeasibleSet, Halfspace, Hyperplane, Polyhedron};

/// Tolerances for the iterative projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionParams {
    /// Feasibility / fixed-point tolerance.
    pub tol: f64,
    /// Bisection-step or Dykstra-cycle cap.
    pub max_iter: usize,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

impl ProjectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.max_iter > 0) {
            return Err(Error::InvalidParameter(format!(
                "projection tol must be > 0 and max_iter ≥ 1 (got {}, {})",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

/// Componentwise clamp `max(c_i, min(x_i, d_i))`.
pub fn project_box(x: &[f64], bounds: &Bounds) -> Result<Vec<f64>> {
    check_dim(bounds.dim(), x.len())?;
    let mut y = x.to_vec();
    clamp_in_place(&mut y, bounds);
    Ok(y)
}

fn clamp_in_place(y: &mut [f64], bounds: &Bounds) {
    for ((yi, c), d) in y.iter_mut().zip(bounds.lower()).zip(bounds.upper()) {
        *yi = yi.min(*d).max(*c);
    }
}

pub fn project_halfspace(x: &[f64], h: &Halfspace) -> Result<Vec<f64>> {
    check_dim(h.dim(), x.len())?;
    let mut y = x.to_vec();
    halfspace_in_place(&mut y, h);
    Ok(y)
}

fn halfspace_in_place(y: &mut [f64], h: &Halfspace) {
    let excess = dot_unchecked(h.normal(), y) - h.offset();
    if excess > 0.0 {
        axpy(-excess / h.normal_sq(), h.normal(), y);
    }
}

pub fn project_hyperplane(x: &[f64], h: &Hyperplane) -> Result<Vec<f64>> {
    check_dim(h.dim(), x.len())?;
    let mut y = x.to_vec();
    hyperplane_in_place(&mut y, h);
    Ok(y)
}

fn hyperplane_in_place(y: &mut [f64], h: &Hyperplane) {
    let excess = dot_unchecked(h.normal(), y) - h.offset();
    if excess != 0.0 {
        axpy(-excess / h.normal_sq(), h.normal(), y);
    }
}

/// Projection onto `box ∩ {a·y ≤ b}`.
pub fn project_box_halfspace(x: &[f64], bounds: &Bounds, h: &Halfspace, params: &ProjectionParams) -> Result<Vec<f64>> {
    check_dim(bounds.dim(), x.len())?;
    check_dim(h.dim(), x.len())?;
    params.validate()?;

    let a = h.normal();
    let b = h.offset();
    let clamped_at = |lambda: f64, y: &mut Vec<f64>| {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (x[i] - lambda * a[i]).min(bounds.upper()[i]).max(bounds.lower()[i]);
        }
        dot_unchecked(a, y) - b
    };

    let mut y = vec![0.0; x.len()];
    if clamped_at(0.0, &mut y) <= 0.0 {
        return Ok(y);
    }

    // a·y(λ) − b is continuous, piecewise linear and nonincreasing in λ.
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut iter = 0;
    loop {
        let g = clamped_at(hi, &mut y);
        if g <= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        iter += 1;
        if iter >= params.max_iter || !hi.is_finite() {
            return Err(Error::EmptySet(format!(
                "no multiplier brings a·y within the offset (residual {g:e})"
            )));
        }
    }

    let mut residual = f64::INFINITY;
    while iter < params.max_iter {
        let mid = 0.5 * (lo + hi);
        let g = clamped_at(mid, &mut y);
        residual = g.abs();
        if residual <= params.tol {
            lo = mid;
            hi = mid;
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        iter += 1;
    }
    if residual > params.tol && hi - lo > f64::EPSILON * hi {
        return Err(Error::ProjectionNotConverged {
            iterations: iter,
            residual,
        });
    }

    // Exact multiplier on the active set identified at the bracket midpoint.
    let lambda = 0.5 * (lo + hi);
    let (mut num, mut den) = (-b, 0.0);
    for i in 0..x.len() {
        let t = x[i] - lambda * a[i];
        if t > bounds.lower()[i] && t < bounds.upper()[i] {
            num += a[i] * x[i];
            den += a[i] * a[i];
        } else {
            num += a[i] * t.min(bounds.upper()[i]).max(bounds.lower()[i]);
        }
    }
    if den > 0.0 {
        let exact = num / den;
        let mut candidate = vec![0.0; x.len()];
        let g = clamped_at(exact.max(0.0), &mut candidate);
        if g.abs() <= params.tol {
            return Ok(candidate);
        }
    }
    let g = clamped_at(hi, &mut y);
    debug_assert!(g <= params.tol);
    Ok(y)
}

/// Projection onto a general polyhedron by Dykstra's algorithm, cycling over
/// the halfspaces, the hyperplanes and the box.
///
/// Stops once both the iterate and the correction terms move less than
/// `tol` over a full cycle. Every few cycles the active set read off the
/// iterate is tried in an exact least-distance solve, which ends slow
/// (small-angle) cases once the active set has settled.
pub fn project_polyhedron(x: &[f64], poly: &Polyhedron, params: &ProjectionParams) -> Result<Vec<f64>> {
    check_dim(poly.dim(), x.len())?;
    params.validate()?;

    let n = x.len();
    let m = poly.inequalities.len() + poly.equalities.len() + usize::from(poly.bounds.is_some());
    let mut corrections = vec![vec![0.0; n]; m];
    let mut y = x.to_vec();
    let mut z = vec![0.0; n];
    let mut residual = f64::INFINITY;

    for cycle in 1..=params.max_iter {
        let start = y.clone();
        let mut correction_change = 0.0;
        for (k, p) in corrections.iter_mut().enumerate() {
            for i in 0..n {
                z[i] = y[i] + p[i];
            }
            y.copy_from_slice(&z);
            apply_component(poly, k, &mut y);
            for i in 0..n {
                let new_p = z[i] - y[i];
                correction_change += (new_p - p[i]) * (new_p - p[i]);
                p[i] = new_p;
            }
        }
        let displacement = distance_unchecked(&start, &y);
        residual = displacement.max(correction_change.sqrt());
        if residual <= params.tol {
            return Ok(y);
        }
        if cycle % POLISH_EVERY == 0 {
            if let Some(exact) = polish_polyhedron(x, poly, &y, (10.0 * residual).max(1e-9), params.tol) {
                return Ok(exact);
            }
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::ProjectionNotConverged {
                iterations: cycle,
                residual,
            });
        }
    }
    Err(Error::ProjectionNotConverged {
        iterations: params.max_iter,
        residual,
    })
}

const POLISH_EVERY: usize = 50;

/// Primal active-set refinement of a Dykstra iterate. The working set starts
/// from the constraints within `near` of being tight at `y`; the most violated
/// constraint is added or the worst-signed multiplier dropped until the KKT
/// conditions hold. Returns `None` if that does not happen within a few
/// passes.
fn polish_polyhedron(x: &[f64], poly: &Polyhedron, y: &[f64], near: f64, tol: f64) -> Option<Vec<f64>> {
    let n = x.len();
    let ni = poly.inequalities.len();
    let bounds = poly.bounds.as_ref();

    // Bound state per coordinate: 0 free, -1 at lower, +1 at upper.
    let mut fixed = vec![0i8; n];
    if let Some(b) = bounds {
        for i in 0..n {
            if y[i] - b.lower()[i] <= near {
                fixed[i] = -1;
            } else if b.upper()[i] - y[i] <= near {
                fixed[i] = 1;
            }
        }
    }
    let mut active: Vec<bool> = poly
        .inequalities
        .iter()
        .map(|h| h.offset() - dot_unchecked(h.normal(), y) <= near * (1.0 + h.offset().abs()))
        .collect();
    let mut releases = 0;

    for _ in 0..4 * (n + ni + 1) {
        let fixed_value = |i: usize| -> f64 {
            let b = bounds.expect("only boxed coordinates are fixed");
            if fixed[i] < 0 {
                b.lower()[i]
            } else {
                b.upper()[i]
            }
        };
        let rows: Vec<(usize, &[f64], f64)> = poly
            .equalities
            .iter()
            .map(|h| (usize::MAX, h.normal(), h.offset()))
            .chain(
                poly.inequalities
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| active[*k])
                    .map(|(k, h)| (k, h.normal(), h.offset())),
            )
            .collect();

        // Reduced system over the free coordinates: (R Rᵀ) λ = R x_F − c.
        let free: Vec<usize> = (0..n).filter(|&i| fixed[i] == 0).collect();
        let k = rows.len();
        let mut gram = vec![0.0; k * k];
        let mut rhs = vec![0.0; k];
        for (r, (_, a, b)) in rows.iter().enumerate() {
            let shift: f64 = (0..n).filter(|&i| fixed[i] != 0).map(|i| a[i] * fixed_value(i)).sum();
            rhs[r] = free.iter().map(|&i| a[i] * x[i]).sum::<f64>() - (b - shift);
            for (c, (_, a2, _)) in rows.iter().enumerate() {
                gram[r * k + c] = free.iter().map(|&i| a[i] * a2[i]).sum();
            }
        }
        let Some(lambda) = solve_dense(&mut gram, &mut rhs, k) else {
            // Dependent working set: release members in rotation, bounds first.
            let members: Vec<usize> = (0..n)
                .filter(|&i| fixed[i] != 0)
                .map(|i| ni + i)
                .chain((0..ni).filter(|&k| active[k]))
                .collect();
            if members.is_empty() {
                return None;
            }
            releases += 1;
            match members[(releases - 1) % members.len()] {
                id if id < ni => active[id] = false,
                id => fixed[id - ni] = 0,
            }
            continue;
        };

        let mut push = vec![0.0; n];
        for ((_, a, _), l) in rows.iter().zip(&lambda) {
            axpy(*l, a, &mut push);
        }
        let candidate: Vec<f64> = (0..n)
            .map(|i| if fixed[i] == 0 { x[i] - push[i] } else { fixed_value(i) })
            .collect();

        // Most violated constraint outside the working set.
        let mut worst: Option<(f64, usize)> = None;
        let mut consider = |v: f64, id: usize| {
            if v > tol * (1.0 + norm2(&candidate)) && worst.is_none_or(|(w, _)| v > w) {
                worst = Some((v, id));
            }
        };
        for (k, h) in poly.inequalities.iter().enumerate() {
            if !active[k] {
                consider(dot_unchecked(h.normal(), &candidate) - h.offset(), k);
            }
        }
        if let Some(b) = bounds {
            for &i in &free {
                consider((b.lower()[i] - candidate[i]).max(candidate[i] - b.upper()[i]), ni + i);
            }
        }
        if let Some((_, id)) = worst {
            if id < ni {
                active[id] = true;
            } else {
                let i = id - ni;
                let b = bounds.expect("bound violation implies a box");
                fixed[i] = if candidate[i] < b.lower()[i] { -1 } else { 1 };
            }
            continue;
        }

        // Most wrongly signed multiplier in the working set.
        let mut wrong: Option<(f64, usize)> = None;
        for ((k, _, _), l) in rows.iter().zip(&lambda) {
            if *k != usize::MAX && *l < -tol && wrong.is_none_or(|(w, _)| -l > w) {
                wrong = Some((-l, *k));
            }
        }
        for i in 0..n {
            if fixed[i] != 0 {
                // Bound multiplier: x_i − v_i − (Aᵀλ)_i, ≤ 0 at lower, ≥ 0 at upper.
                let s = (x[i] - fixed_value(i) - push[i]) * f64::from(-fixed[i]);
                if s > tol && wrong.is_none_or(|(w, _)| s > w) {
                    wrong = Some((s, ni + i));
                }
            }
        }
        match wrong {
            Some((_, id)) if id < ni => active[id] = false,
            Some((_, id)) => fixed[id - ni] = 0,
            None => return Some(candidate),
        }
    }
    None
}

/// Gaussian elimination with partial pivoting on a row-major `k×k` system.
fn solve_dense(a: &mut [f64], b: &mut [f64], k: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))?;
        if a[pivot * k + col].abs() <= 1e-12 * scale {
            return None;
        }
        if pivot != col {
            for c in 0..k {
                a.swap(pivot * k + c, col * k + c);
            }
            b.swap(pivot, col);
        }
        for r in col + 1..k {
            let f = a[r * k + col] / a[col * k + col];
            for c in col..k {
                a[r * k + c] -= f * a[col * k + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut out = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r * k + c] * out[c]).sum();
        out[r] = (b[r] - s) / a[r * k + r];
    }
    Some(out)
}

fn apply_component(poly: &Polyhedron, k: usize, y: &mut [f64]) {
    let ni = poly.inequalities.len();
    let ne = poly.equalities.len();
    if k < ni {
        halfspace_in_place(y, &poly.inequalities[k]);
    } else if k < ni + ne {
        hyperplane_in_place(y, &poly.equalities[k - ni]);
    } else if let Some(b) = &poly.bounds {
        clamp_in_place(y, b);
    }
}

/// `π_X(x)` for any feasible-set variant.
pub fn project(x: &[f64], set: &FeasibleSet, params: &ProjectionParams) -> Result<Vec<f64>> {
    match set {
        FeasibleSet::BoxOnly(b) => project_box(x, b),
        FeasibleSet::BoxHalfspace(b, h) => project_box_halfspace(x, b, h, params),
        FeasibleSet::Polyhedron(p) => project_polyhedron(x, p, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_box(n: usize) -> Bounds {
        Bounds::uniform(n, 0.0, 1.0).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_abs_diff_eq!(*x, *y, epsilon = tol);
        }
    }

    #[test]
    fn box_examples() {
        let b = unit_box(2);
        assert_eq!(project_box(&[1.5, -0.3], &b).unwrap(), vec![1.0, 0.0]);
        assert_eq!(project_box(&[0.4, 0.7], &b).unwrap(), vec![0.4, 0.7]);
        assert_eq!(project_box(&[2.0; 3], &unit_box(3)).unwrap(), vec![1.0; 3]);
        assert!(project_box(&[0.0; 3], &b).is_err());
    }

    #[test]
    fn halfspace_examples() {
        let h = Halfspace::new(vec![1.0, 1.0], 1.0).unwrap();
        assert_close(&project_halfspace(&[1.0, 1.0], &h).unwrap(), &[0.5, 0.5], 1e-15);
        assert_eq!(project_halfspace(&[0.0, 0.0], &h).unwrap(), vec![0.0, 0.0]);
        let axis = Halfspace::new(vec![1.0, 0.0], 1.0).unwrap();
        assert_eq!(project_halfspace(&[2.0, 0.0], &axis).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn hyperplane_examples() {
        let h = Hyperplane::new(vec![1.0, 1.0], 1.0).unwrap();
        assert_close(&project_hyperplane(&[1.0, 1.0], &h).unwrap(), &[0.5, 0.5], 1e-15);
        assert_close(&project_hyperplane(&[0.3, 0.7], &h).unwrap(), &[0.3, 0.7], 1e-15);
        let coord = Hyperplane::new(vec![0.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(
            project_hyperplane(&[0.0, 0.0, 3.0], &coord).unwrap(),
            vec![0.0, 0.0, 1.0]
        );
        // below the plane moves up
        assert_eq!(
            project_hyperplane(&[0.0, 0.0, -1.0], &coord).unwrap(),
            vec![0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn box_halfspace_examples() {
        let b = unit_box(2);
        let h = Halfspace::new(vec![1.0, 1.0], 1.0).unwrap();
        let p = ProjectionParams::default();
        assert_close(
            &project_box_halfspace(&[1.0, 1.0], &b, &h, &p).unwrap(),
            &[0.5, 0.5],
            1e-12,
        );
        assert_eq!(project_box_halfspace(&[0.2, 0.1], &b, &h, &p).unwrap(), vec![0.2, 0.1]);
        // Brute force puts this at the vertex (1, 0), not (0.9, 0).
        assert_close(
            &project_box_halfspace(&[2.0, 0.1], &b, &h, &p).unwrap(),
            &[1.0, 0.0],
            1e-10,
        );
    }

    #[test]
    fn box_halfspace_with_mixed_sign_normal() {
        let b = Bounds::uniform(3, -1.0, 1.0).unwrap();
        let h = Halfspace::new(vec![1.0, -2.0, 0.5], -0.5).unwrap();
        let p = ProjectionParams::default();
        let y = project_box_halfspace(&[1.0, 0.5, 0.0], &b, &h, &p).unwrap();
        assert!(dot_unchecked(h.normal(), &y) <= h.offset() + p.tol);
        assert!(b.violation(&y) == 0.0);
        // KKT: y = clamp(x − λa) for a single λ ≥ 0
        let set = FeasibleSet::box_halfspace(b.clone(), h.clone()).unwrap();
        let dyk = FeasibleSet::polyhedron(vec![h], vec![], Some(b)).unwrap();
        let y2 = dyk.project(&[1.0, 0.5, 0.0], &p).unwrap();
        assert_close(&y, &y2, 1e-8);
        assert_close(&set.project(&[1.0, 0.5, 0.0], &p).unwrap(), &y, 0.0);
    }

    #[test]
    fn polyhedron_examples() {
        let p = ProjectionParams::default();
        let b = unit_box(4);
        let h = Halfspace::new(vec![1.0; 4], 2.0).unwrap();
        let FeasibleSet::Polyhedron(poly) = FeasibleSet::polyhedron(vec![h.clone()], vec![], Some(b.clone())).unwrap()
        else {
            unreachable!()
        };
        let y = project_polyhedron(&[1.0; 4], &poly, &p).unwrap();
        assert_close(&y, &[0.5; 4], 1e-8);
        assert_close(&y, &project_box_halfspace(&[1.0; 4], &b, &h, &p).unwrap(), 1e-8);

        let x = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(project_polyhedron(&x, &poly, &p).unwrap(), x.to_vec());

        let FeasibleSet::Polyhedron(single) = FeasibleSet::polyhedron(vec![h.clone()], vec![], None).unwrap() else {
            unreachable!()
        };
        let x = [3.0, -1.0, 0.5, 2.0];
        assert_close(
            &project_polyhedron(&x, &single, &p).unwrap(),
            &project_halfspace(&x, &h).unwrap(),
            1e-15,
        );
    }

    #[test]
    fn polyhedron_with_equality() {
        let p = ProjectionParams::default();
        let eq = Hyperplane::new(vec![1.0, 1.0, 1.0], 1.0).unwrap();
        let set = FeasibleSet::polyhedron(vec![], vec![eq], Some(unit_box(3))).unwrap();
        // projection onto the probability simplex: (0.8, 0.2, -0.5) → (0.8, 0.2, 0)
        let y = set.project(&[0.8, 0.2, -0.5], &p).unwrap();
        assert_close(&y, &[0.8, 0.2, 0.0], 1e-8);
    }

    #[test]
    fn dispatch_matches_variants() {
        let p = ProjectionParams::default();
        let b = unit_box(3);
        let x = [1.7, -0.2, 0.6];
        assert_eq!(
            FeasibleSet::boxed(b.clone()).project(&x, &p).unwrap(),
            project_box(&x, &b).unwrap()
        );
        let h = Halfspace::new(vec![1.0; 3], 1.2).unwrap();
        assert_eq!(
            FeasibleSet::box_halfspace(b.clone(), h.clone())
                .unwrap()
                .project(&x, &p)
                .unwrap(),
            project_box_halfspace(&x, &b, &h, &p).unwrap()
        );
    }

    #[test]
    fn invalid_params_rejected() {
        let b = unit_box(2);
        let h = Halfspace::new(vec![1.0, 1.0], 1.0).unwrap();
        let bad = ProjectionParams { tol: 0.0, max_iter: 10 };
        assert!(matches!(
            project_box_halfspace(&[1.0, 1.0], &b, &h, &bad),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn dykstra_cap_reports_nonconvergence() {
        let b = unit_box(2);
        let h = Halfspace::new(vec![1.0, 2.0], 1.0).unwrap();
        let FeasibleSet::Polyhedron(poly) = FeasibleSet::polyhedron(vec![h], vec![], Some(b)).unwrap() else {
            unreachable!()
        };
        let tight = ProjectionParams {
            tol: 1e-15,
            max_iter: 1,
        };
        assert!(matches!(
            project_polyhedron(&[5.0, 5.0], &poly, &tight),
            Err(Error::ProjectionNotConverged { .. })
        ));
    }
}
