//! Convergence and structure tests for the solver: exact-cap consistency
//! with measured order, comparison-principle decay, barrier ordering,
//! domain nesting and parabolic rescaling.

use hrho_core::exact::{solve_barrier, Scenario, SphereSolution};
use hrho_core::solver::{
    barrier_ordering, comparison_run, nested_domain_study, run, scaling_symmetry_deviation,
    BoundaryPolicy, FlowParams, TimeStepPolicy,
};
use hrho_core::grid::GridFunction;

/// Max-norm error of the evolved cap against the closed form at t_end.
fn cap_error(dim: usize, rho: f64, dx: f64, t_end: f64) -> f64 {
    let sphere = SphereSolution::new(dim, rho, 2.0).unwrap();
    let mut params = FlowParams::new(rho, dim, 0.5, dx, t_end);
    params.boundary = BoundaryPolicy::BarrierDirichlet(sphere);
    let spec = params.grid_spec().unwrap();
    let u0 = sphere.cap_graph(&spec, 0.0).unwrap();
    let traj = run(&u0, &params, usize::MAX).unwrap();
    let last = traj.final_state();
    let mut err: f64 = 0.0;
    for iy in 0..spec.nodes_axis1() {
        for ix in 0..spec.nodes_per_axis() {
            let exact = sphere
                .cap_height(spec.position([ix, iy]), last.time)
                .unwrap();
            err = err.max((last.value([ix, iy]) - exact).abs());
        }
    }
    err
}

#[test]
fn cap_convergence_is_second_order() {
    // fast variant of the full study: n = 1, rho = 1, three resolutions
    let errs: Vec<f64> = [1.0 / 30.0, 1.0 / 60.0, 1.0 / 120.0]
        .iter()
        .map(|&dx| cap_error(1, 1.0, dx, 0.02))
        .collect();
    println!("cap errors: {errs:?}");
    for pair in errs.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        println!("measured order: {order:.3}");
        assert!(order >= 1.8, "order {order}");
    }
}

#[test]
fn comparison_violation_decays_with_resolution() {
    // touching ordered pair: low is steeper, the gap closes near the edge
    let make = |dx: f64| {
        let params = FlowParams::new(1.0, 1, 0.4, dx, 0.02);
        let spec = params.grid_spec().unwrap();
        let low = GridFunction::from_fn(spec, |x, _| x * x);
        let high = GridFunction::from_fn(spec, |x, _| 0.1 + 0.5 * x * x);
        comparison_run(&low, &high, &params).unwrap()
    };
    let coarse = make(0.01);
    let fine = make(0.005);
    println!(
        "violations: {:.3e} (dx = 0.01), {:.3e} (dx = 0.005)",
        coarse.max_violation, fine.max_violation
    );
    assert!(coarse.passed, "violation {}", coarse.max_violation);
    assert!(fine.passed, "violation {}", fine.max_violation);
    assert!(fine.max_violation <= 0.6 * coarse.max_violation + 1e-14);
}

#[test]
fn scaled_paraboloid_stays_below_the_barrier_cap() {
    // barrier from the containment equation; datum below delta on the
    // barrier footprint
    let barrier = solve_barrier(1.0, 2.0, 0.05, 1.0, 1).unwrap();
    let sphere = barrier.sphere();
    let a = 0.9 * barrier.delta / (barrier.r_delta * barrier.r_delta);
    let mut params = FlowParams::new(1.0, 1, 2.0, 0.01, barrier.horizon);
    params.boundary = BoundaryPolicy::Extrapolation;
    let spec = params.grid_spec().unwrap();
    let u0 = Scenario::ScaledParaboloid { coefficient: a }
        .grid_function(&spec)
        .unwrap();
    let traj = run(&u0, &params, 100).unwrap();
    let rep = barrier_ordering(&traj, &sphere).unwrap();
    assert!(
        rep.passed,
        "graph crossed the cap: excess {} at t = {}",
        rep.max_excess, rep.time_of_max
    );
}

#[test]
fn nested_domains_contract_for_the_paraboloid() {
    // the horizon must be long enough for the innermost boundary to
    // influence the observation window above roundoff; influence decays
    // like exp(-d^2 / (4 nu t)) with nu ~ 1/W^2
    let params = FlowParams::new(1.0, 1, 2.0, 0.02, 0.25);
    let rep = nested_domain_study(
        |spec| Scenario::Paraboloid.grid_function(spec),
        &params,
        &[2.0, 3.0, 4.0],
        500,
        None,
    )
    .unwrap();
    println!("nested diffs: {:?}", rep.diffs);
    assert_eq!(rep.diffs.len(), 2);
    assert!(rep.diffs[0] > 1e-13, "first difference at noise level");
    assert!(rep.diffs[1] < 0.5 * rep.diffs[0], "{:?}", rep.diffs);
}

#[test]
fn nested_domains_bounded_by_reference_error_for_the_cap() {
    let sphere = SphereSolution::new(1, 1.0, 2.0).unwrap();
    let mut params = FlowParams::new(1.0, 1, 0.8, 0.01, 0.02);
    params.boundary = BoundaryPolicy::BarrierDirichlet(sphere);
    let sphere_for_ref = sphere;
    let reference = move |x1: f64, _x2: f64, t: f64| {
        sphere_for_ref.cap_height([x1, 0.0], t).unwrap()
    };
    let rep = nested_domain_study(
        |spec| sphere.cap_graph(spec, 0.0),
        &params,
        &[0.8, 1.0, 1.2],
        200,
        Some(&reference),
    )
    .unwrap();
    let errs = rep.reference_errors.as_ref().unwrap();
    println!("cap nested diffs {:?} vs reference errors {errs:?}", rep.diffs);
    for (k, d) in rep.diffs.iter().enumerate() {
        let budget = 1.5 * (errs[k] + errs[k + 1]) + 1e-12;
        assert!(d <= &budget, "diff {d} exceeds budget {budget}");
    }
}

#[test]
fn parabolic_rescaling_invariance() {
    let params = FlowParams::new(1.0, 1, 1.0, 0.01, 0.01);
    let (dev, threshold) = scaling_symmetry_deviation(
        |spec| Scenario::Paraboloid.grid_function(spec),
        &params,
        2.0,
        25,
    )
    .unwrap();
    println!("scaling deviation {dev:.3e} (threshold {threshold:.3e})");
    assert!(dev <= threshold);
}

#[test]
fn fixed_policy_honours_user_step() {
    let mut params = FlowParams::new(1.0, 1, 1.0, 0.05, 0.001);
    params.time_step = TimeStepPolicy::Fixed { dt: 2.5e-4 };
    let spec = params.grid_spec().unwrap();
    let u0 = Scenario::Paraboloid.grid_function(&spec).unwrap();
    let traj = run(&u0, &params, 1).unwrap();
    assert_eq!(traj.records.len(), 4);
    for r in &traj.records[..3] {
        assert_eq!(r.dt, 2.5e-4);
    }
}
