use ralg_demo::{landscape, optimum, projection, trajectory};

#[test]
fn trajectories_end_at_the_optimum() {
    for (method, m) in [("distance", 1e4), ("projective", 1.0)] {
        let path = trajectory(method, m, 1.5, 0.1, 0.9).unwrap();
        assert_eq!(path.len() % 2, 0);
        assert_eq!(&path[..2], [0.1, 0.9]);
        let best = &path[path.len() - 2..];
        let p = projection(1.5, best[0], best[1]).unwrap();
        let opt = optimum(1.5).unwrap();
        assert!(
            (p[0] - opt[0]).abs() < 1e-3 && (p[1] - opt[1]).abs() < 1e-3,
            "{method}: {p:?} vs {opt:?}"
        );
    }
}

#[test]
fn projection_onto_budget_square() {
    assert_eq!(projection(1.0, 2.0, 2.0).unwrap(), [0.5, 0.5]);
    assert_eq!(projection(2.0, -1.0, 0.5).unwrap(), [0.0, 0.5]);
    // No cut when b ≥ 2.
    assert_eq!(projection(f64::INFINITY, 3.0, 0.25).unwrap(), [1.0, 0.25]);
}

#[test]
fn landscape_grid_shape_and_values() {
    let v = landscape("projective", 10.0, 1.5, -0.5, 1.5, -0.5, 1.5, 5, 3).unwrap();
    assert_eq!(v.len(), 15);
    // Bottom-left corner (-0.5, -0.5) projects to the origin: f = 2.2, distance √0.5.
    assert!((v[0] - (2.2 + 10.0 * 0.5f64.sqrt())).abs() < 1e-9);
    assert!(v.iter().all(|x| x.is_finite()));
    assert!(landscape("newton", 1.0, 1.5, 0.0, 1.0, 0.0, 1.0, 4, 4).is_err());
    assert!(landscape("distance", 1.0, 1.5, 0.0, 1.0, 0.0, 1.0, 1, 4).is_err());
}

#[test]
fn optimum_matches_closed_form() {
    // Heavier weight on y: fill y first.
    assert_eq!(optimum(1.5).unwrap(), [0.5, 1.0, 0.5]);
    assert_eq!(optimum(f64::INFINITY).unwrap(), [1.0, 1.0, 0.0]);
}
