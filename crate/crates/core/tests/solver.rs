use proptest::prelude::*;
use ralg_core::testbed::{ravine_subgrad, ravine_value, ravine_weights};
use ralg_core::{minimize, minimize_with_trace, Error, Oracle, RAlgParams, RAlgSolver, RavineProblem, Termination};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quadratic(target: Vec<f64>, scale: Vec<f64>) -> Oracle {
    let (t2, s2) = (target.clone(), scale.clone());
    Oracle::new(move |x: &[f64]| {
        x.iter()
            .zip(&scale)
            .zip(&target)
            .map(|((x, s), t)| (s * x - t).powi(2))
            .sum()
    })
    .with_subgradient(move |x: &[f64]| {
        x.iter()
            .zip(&s2)
            .zip(&t2)
            .map(|((x, s), t)| 2.0 * s * (s * x - t))
            .collect()
    })
}

#[test]
fn affine_invariance_on_quadratic() {
    let target = vec![0.4, -1.0, 2.0, 0.25];
    let s = vec![1.0, 2.0, 0.5, 4.0];
    let plain = minimize(
        &quadratic(target.clone(), vec![1.0; 4]),
        &[0.0; 4],
        &RAlgParams::default(),
    )
    .unwrap();
    // Minimizing f(Sx) from S⁻¹x0 should land on S⁻¹x̄.
    let scaled = minimize(&quadratic(target.clone(), s.clone()), &[0.0; 4], &RAlgParams::default()).unwrap();
    for i in 0..4 {
        assert!((plain.x_final[i] - target[i]).abs() <= 1e-4);
        assert!((s[i] * scaled.x_final[i] - plain.x_final[i]).abs() <= 1e-4);
    }
}

#[test]
fn ravine_subgradient_inequality_spot_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1, 3, 10, 40] {
        let w = ravine_weights(n);
        for _ in 0..250 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..3.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..3.0)).collect();
            let g = ravine_subgrad(&w, &x);
            let lin: f64 = g.iter().zip(y.iter().zip(&x)).map(|(g, (y, x))| g * (y - x)).sum();
            let fx = ravine_value(&w, &x);
            assert!(ravine_value(&w, &y) >= fx + lin - 1e-12 * (1.0 + fx.abs()));
        }
    }
}

#[test]
fn report_invariants_on_ravine() {
    let problem = RavineProblem::unit_box(6).unwrap();
    let oracle = problem.oracle();
    let params = RAlgParams {
        maxitn: 40,
        ..RAlgParams::default()
    };
    let r = minimize(&oracle, &[0.5; 6], &params).unwrap();
    assert!(r.itn <= 40);
    assert!(r.time_sec >= 0.0);
    assert!((r.f_final - oracle.value(&r.x_final).unwrap()).abs() <= 1e-12 * (1.0 + r.f_final.abs()));
}

#[test]
fn stepping_matches_run() {
    let oracle = quadratic(vec![1.0, 2.0, 3.0], vec![1.0; 3]);
    let params = RAlgParams::default();
    let mut solver = RAlgSolver::new(&oracle, &[0.0; 3], params).unwrap();
    let mut steps = 0;
    while solver.step().is_none() {
        steps += 1;
        assert!(steps <= params.maxitn);
    }
    let stepped = solver.finish();
    let mut events = 0;
    let run = minimize_with_trace(&oracle, &[0.0; 3], &params, |_| events += 1).unwrap();
    assert_eq!(stepped.x_final, run.x_final);
    assert_eq!(stepped.itn, run.itn);
    assert_eq!(events, run.itn);
}

#[test]
fn value_only_oracle_is_rejected() {
    let oracle = Oracle::new(|x: &[f64]| x[0].abs());
    assert!(matches!(
        minimize(&oracle, &[1.0], &RAlgParams::default()),
        Err(Error::MissingSubgradient)
    ));
}

#[test]
fn nonfinite_objective_stops_with_oracle_failure() {
    // Descent along −x runs into the NaN region.
    let oracle =
        Oracle::new(|x: &[f64]| if x[0] < -0.5 { f64::NAN } else { x[0] }).with_subgradient(|_: &[f64]| vec![1.0]);
    let r = minimize(&oracle, &[0.0], &RAlgParams::default()).unwrap();
    assert_eq!(r.termination, Termination::OracleFailure);
    assert!(r.message.is_some());
    assert!(r.x_final[0].is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn f_best_never_increases(x0 in prop::collection::vec(-3.0..3.0f64, 5)) {
        let problem = RavineProblem::unit_box(5).unwrap();
        let oracle = problem.oracle();
        let mut last = f64::INFINITY;
        let mut ok = true;
        let params = RAlgParams { maxitn: 200, ..RAlgParams::default() };
        minimize_with_trace(&oracle, &x0, &params, |ev| {
            ok &= ev.f_best <= last;
            last = ev.f_best;
        })
        .unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn quadratic_minimizer_is_found(target in prop::collection::vec(-5.0..5.0f64, 5)) {
        let r = minimize(&quadratic(target.clone(), vec![1.0; 5]), &[0.0; 5], &RAlgParams::default()).unwrap();
        let d = r.x_final.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(d <= 1e-6, "distance {d:e}");
    }
}
