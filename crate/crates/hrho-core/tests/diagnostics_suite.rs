//! End-to-end checks of the diagnostics on exact spheres and short flows.

use hrho_core::diagnostics::{
    c2_monitor, cap_monitor_closed_form, dual_concavity_check, evolution_identity_check,
    harnack_check, nu_preservation_check, nu_profile, sample_lambdas, velocity_floor_check,
    IdentityKind, PatchSpec,
};
use hrho_core::exact::{Scenario, SphereSolution};
use hrho_core::solver::{run, BoundaryPolicy, FlowParams, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn paraboloid_traj(rho: f64, half_width: f64, dx: f64, t_end: f64, cadence: usize) -> Trajectory {
    let params = FlowParams::new(rho, 1, half_width, dx, t_end);
    let spec = params.grid_spec().unwrap();
    let u0 = Scenario::Paraboloid.grid_function(&spec).unwrap();
    run(&u0, &params, cadence).unwrap()
}

#[test]
fn identity_residuals_over_random_spheres() {
    // 50 random (rho, n, r) draws, each evaluated mid-life; the centred
    // difference is free of the near-extinction blowup there
    let mut rng = ChaCha8Rng::seed_from_u64(4217);
    for _ in 0..50 {
        let rho = rng.gen_range(0.3..4.0);
        let dim = if rng.gen::<bool>() { 1 } else { 2 };
        let r0 = rng.gen_range(0.5..3.0);
        let s = SphereSolution::new(dim, rho, r0).unwrap();
        let t = 0.3 * s.extinction_time();
        let angle = rng.gen_range(0.0..1.4);
        let rf = evolution_identity_check(&s, t, IdentityKind::Speed, angle).unwrap();
        let rv = evolution_identity_check(&s, t, IdentityKind::GradientFunction, angle).unwrap();
        let rx = evolution_identity_check(&s, t, IdentityKind::Position, angle).unwrap();
        assert!(rf < 1e-8, "speed residual {rf} (rho {rho}, n {dim}, r0 {r0})");
        assert!(rv < 1e-8, "gradient residual {rv}");
        assert!(rx < 1e-8, "position residual {rx}");
    }
}

#[test]
fn dual_concavity_acceptance_scale_sweep() {
    for &rho in &[0.5, 1.0, 2.0, 5.0] {
        let samples = sample_lambdas(42, 1000, 2, 1e-2, 1e2);
        let rep = dual_concavity_check(rho, &samples).unwrap();
        assert!(
            rep.passed(),
            "rho {rho}: eig {} minor {} hess {}",
            rep.worst_eigenvalue_ratio,
            rep.worst_minor_error,
            rep.worst_hessian_error
        );
    }
}

#[test]
fn nu_condition_is_preserved_along_the_flow() {
    let traj = paraboloid_traj(1.0, 4.0, 0.02, 0.05, 500);
    let radii = [2.0, 5.0, 10.0];
    let rep = nu_preservation_check(&traj, &radii, 1.0).unwrap();
    assert!(
        rep.passed,
        "excess {} over slack {}",
        rep.max_excess, rep.slack
    );
    // the initial profile decays in r
    let first = &rep.profiles[0];
    let eps: Vec<f64> = first.eps_of_r.iter().map(|e| e.unwrap()).collect();
    assert!(eps[0] > eps[1] && eps[1] > eps[2]);
}

#[test]
fn single_snapshot_preservation_is_trivial() {
    let traj = paraboloid_traj(1.0, 4.0, 0.05, 0.0, 1);
    let rep = nu_preservation_check(&traj, &[2.0, 5.0], 1.0).unwrap();
    assert!(rep.passed);
    assert_eq!(rep.profiles.len(), 1);
}

#[test]
fn cap_profile_tracks_the_shrinking_radius() {
    // over a fixed window the shrinking cap steepens: pair oscillations
    // scale like (pair distance)/r(t), so the profile grows by the factor
    // r(0)/r(t_end)
    let sphere = SphereSolution::new(1, 1.0, 2.0).unwrap();
    let mut params = FlowParams::new(1.0, 1, 0.5, 0.005, 0.8);
    params.boundary = BoundaryPolicy::BarrierDirichlet(sphere);
    let spec = params.grid_spec().unwrap();
    let u0 = sphere.cap_graph(&spec, 0.0).unwrap();
    let traj = run(&u0, &params, 100_000).unwrap();
    // graph-point norms are below ~0.54, so measure at small radii
    let radii = [0.05, 0.1];
    let first = nu_profile(traj.initial(), &radii, 0.2).unwrap();
    let last = nu_profile(traj.final_state(), &radii, 0.2).unwrap();
    let growth = sphere.radius(0.0).unwrap() / sphere.radius(0.8).unwrap();
    for (a, b) in first.eps_of_r.iter().zip(&last.eps_of_r) {
        let (a, b) = (a.unwrap(), b.unwrap());
        let measured = b / a;
        assert!(
            (measured - growth).abs() < 0.2 * growth,
            "profile ratio {measured} vs radius ratio {growth}"
        );
    }
}

#[test]
fn c2_monitor_matches_the_cap_closed_form() {
    let rho = 1.0;
    let sphere = SphereSolution::new(1, rho, 2.0).unwrap();
    let mut params = FlowParams::new(rho, 1, 0.5, 0.01, 0.02);
    params.boundary = BoundaryPolicy::BarrierDirichlet(sphere);
    let spec = params.grid_spec().unwrap();
    let u0 = sphere.cap_graph(&spec, 0.0).unwrap();
    let traj = run(&u0, &params, 50).unwrap();
    let beta = 2.0;
    let patch = PatchSpec::axis_aligned(0.5, 0.5);
    let mon = c2_monitor(&traj, beta, patch).unwrap();
    for (i, &t) in mon.times.iter().enumerate() {
        if t == 0.0 {
            assert_eq!(mon.time_weighted[i], 0.0);
            continue;
        }
        let exact = cap_monitor_closed_form(&sphere, &spec, &patch, beta, t).unwrap();
        let rel = (mon.time_weighted[i] - exact).abs() / exact;
        assert!(rel < 1e-4, "t = {t}: {} vs {exact}", mon.time_weighted[i]);
    }
}

#[test]
fn c2_series_stays_bounded_on_the_paraboloid() {
    // the patch must be one the flow crosses inside the window: the series
    // then peaks early and decays to zero once the graph escapes the slab
    let traj = paraboloid_traj(1.0, 2.0, 0.01, 0.8, 2000);
    let spec = traj.initial().spec;
    let seed = spec.nearest_node([1.0, 0.0]);
    let patch = PatchSpec::from_seed(traj.initial(), seed, 0.05, 0.5).unwrap();
    let mon = c2_monitor(&traj, 2.0, patch).unwrap();
    assert!(
        mon.bounded,
        "series max {} vs first-quarter max {}",
        mon.overall_max, mon.first_quarter_max
    );
    // the slab really was crossed
    assert_eq!(*mon.stationary.last().unwrap(), 0.0);
    assert!(mon.overall_max > 0.0);
}

#[test]
fn harnack_passes_across_speed_exponents() {
    for &rho in &[0.5, 1.0, 2.0] {
        let traj = paraboloid_traj(rho, 2.0, 0.01, 0.05, 50);
        let rec = harnack_check(&traj, [0.0, 0.0, -1.0], 0.01, 0.04).unwrap();
        assert!(
            rec.passed,
            "rho {rho}: ratio {} bound {} tol {}",
            rec.ratio, rec.bound, rec.tolerance_factor
        );
        println!(
            "rho {rho}: ratio {:.4} vs bound {:.4} (tolerance factor {:.3})",
            rec.ratio, rec.bound, rec.tolerance_factor
        );
    }
}

#[test]
fn velocity_floor_on_exact_cap_matches_closed_form() {
    // tracked at the south pole: H(t) = c_H / r(t), so the window minimum
    // is attained at the start of the window
    let sphere = SphereSolution::new(1, 1.0, 2.0).unwrap();
    let mut params = FlowParams::new(1.0, 1, 0.5, 0.005, 0.1);
    params.boundary = BoundaryPolicy::BarrierDirichlet(sphere);
    let spec = params.grid_spec().unwrap();
    let u0 = sphere.cap_graph(&spec, 0.0).unwrap();
    let traj = run(&u0, &params, 200).unwrap();
    let rep = velocity_floor_check(&traj, [0.0, 0.0], 0.1).unwrap();
    assert!(rep.passed);
    // H grows as the sphere shrinks; compare against c_H / r at each time
    for (t, h) in rep.times.iter().zip(&rep.mean_curvs) {
        let exact = 1.0 / sphere.radius(*t).unwrap();
        assert!(
            (h - exact).abs() < 1e-3,
            "H {h} vs exact {exact} at t = {t}"
        );
    }
}

#[test]
fn diagnostics_leave_the_trajectory_untouched() {
    let traj = paraboloid_traj(1.0, 4.0, 0.04, 0.01, 10);
    let before: Vec<Vec<u64>> = traj
        .snapshots
        .iter()
        .map(|s| s.values.iter().map(|v| v.to_bits()).collect())
        .collect();
    let _ = nu_profile(traj.final_state(), &[2.0, 5.0], 1.0).unwrap();
    let _ = nu_preservation_check(&traj, &[2.0, 5.0], 1.0).unwrap();
    let _ = harnack_check(&traj, [0.0, 0.0, -1.0], 0.004, 0.008).unwrap();
    let _ = velocity_floor_check(&traj, [0.0, 0.0], 0.01).unwrap();
    let after: Vec<Vec<u64>> = traj
        .snapshots
        .iter()
        .map(|s| s.values.iter().map(|v| v.to_bits()).collect())
        .collect();
    assert_eq!(before, after);
}
