//! Independent oracles for the exact-solution module: the radius law is
//! checked against adaptive Runge-Kutta integration of r' = -(c_H/r)^rho,
//! the extinction time against a root bracket, and the barrier solver
//! against brute-force residual scans.

use hrho_core::exact::{solve_barrier, BarrierSpec, SphereSolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adaptive fourth-order Runge-Kutta with step doubling; local error is
/// estimated from the two-half-steps comparison and kept below `tol`
/// relative per unit step.
fn integrate_radius(c: f64, rho: f64, r0: f64, t_end: f64, tol: f64) -> f64 {
    let f = |r: f64| -(c / r).powf(rho);
    let rk4 = |r: f64, h: f64| -> f64 {
        let k1 = f(r);
        let k2 = f(r + 0.5 * h * k1);
        let k3 = f(r + 0.5 * h * k2);
        let k4 = f(r + h * k3);
        r + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let mut t = 0.0;
    let mut r = r0;
    let mut h = t_end / 64.0;
    while t < t_end {
        h = h.min(t_end - t);
        let big = rk4(r, h);
        let half = rk4(rk4(r, 0.5 * h), 0.5 * h);
        let err = (big - half).abs() / 15.0;
        let scale = tol * r.max(1e-3);
        if err <= scale || h < 1e-13 {
            // fifth-order accept
            r = half + (half - big) / 15.0;
            t += h;
        }
        let factor = if err > 0.0 {
            0.9 * (scale / err).powf(0.2)
        } else {
            2.0
        };
        h *= factor.clamp(0.2, 2.0);
    }
    r
}

#[test]
fn radius_law_matches_ode_oracle() {
    // rho = 1, n = 1 circle and rho = 1, n = 2 sphere, plus fractional rho
    for &(dim, rho, r0) in &[
        (1usize, 1.0, 1.0),
        (2, 1.0, 1.0),
        (2, 2.0, 1.5),
        (1, 0.5, 2.0),
        (2, 3.3, 0.8),
    ] {
        let s = SphereSolution::new(dim, rho, r0).unwrap();
        let t_end = 0.8 * s.extinction_time();
        let oracle = integrate_radius(dim as f64, rho, r0, t_end, 1e-12);
        let closed = s.radius(t_end).unwrap();
        assert!(
            (closed - oracle).abs() <= 1e-10 * r0,
            "dim {dim} rho {rho}: closed {closed} vs oracle {oracle}"
        );
    }
}

#[test]
fn radius_law_satisfies_the_flow_ode() {
    // centred difference of r(t) against -(c_H/r)^rho
    let s = SphereSolution::new(2, 1.7, 1.3).unwrap();
    let h = 1e-6;
    for &frac in &[0.1, 0.4, 0.7] {
        let t = frac * s.extinction_time();
        let drdt = (s.radius(t + h).unwrap() - s.radius(t - h).unwrap()) / (2.0 * h);
        let rhs = -(s.curvature_sum_coefficient / s.radius(t).unwrap()).powf(s.rho);
        assert!((drdt - rhs).abs() < 1e-8 * rhs.abs(), "t = {t}");
    }
}

#[test]
fn extinction_time_matches_first_zero() {
    let s = SphereSolution::new(2, 2.0, 1.1).unwrap();
    let t_star = s.extinction_time();
    // bisect the first time where the radius vanishes (or errors)
    let gone = |t: f64| match s.radius(t) {
        Ok(r) => r <= 0.0,
        Err(_) => true,
    };
    let mut lo = 0.0;
    let mut hi = 2.0 * t_star;
    assert!(!gone(lo) && gone(hi));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if gone(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((0.5 * (lo + hi) - t_star).abs() < 1e-10);
}

#[test]
fn barrier_root_matches_brute_force_scan() {
    // rho = 1, n = 2, eps = 1, r_eps = 10, T = 0.1: scan the residual on a
    // fine grid for the sign change, then compare with the solver
    let (eps, r_eps, horizon, rho, dim) = (1.0, 10.0, 0.1, 1.0, 2usize);
    let c = dim as f64;
    let b = solve_barrier(eps, r_eps, horizon, rho, dim).unwrap();
    let mut bracket = None;
    let lo = eps / 2.0;
    let hi = 200.0;
    let steps = 2_000_000;
    let mut prev = BarrierSpec::residual(eps, r_eps, horizon, rho, c, lo);
    for i in 1..=steps {
        let h = lo + (hi - lo) * i as f64 / steps as f64;
        let res = BarrierSpec::residual(eps, r_eps, horizon, rho, c, h);
        if prev < 0.0 && res >= 0.0 {
            bracket = Some(h);
            break;
        }
        prev = res;
    }
    let scan = bracket.expect("sign change found by scan");
    assert!(
        (b.h - scan).abs() <= 2.0 * (hi - lo) / steps as f64,
        "solver {} vs scan {scan}",
        b.h
    );
}

#[test]
fn barrier_residual_property_sweep() {
    // 100 random admissible parameter sets: the returned root solves the
    // defining equation to 1e-10 relative
    let mut rng = ChaCha8Rng::seed_from_u64(20260810);
    let mut checked = 0;
    while checked < 100 {
        let eps = rng.gen_range(0.05..2.0);
        let r_eps = rng.gen_range(0.5..50.0);
        let horizon = rng.gen_range(0.0..5.0);
        let rho = rng.gen_range(0.4..3.0);
        let dim = if rng.gen::<bool>() { 1 } else { 2 };
        let Ok(b) = solve_barrier(eps, r_eps, horizon, rho, dim) else {
            continue;
        };
        let res = BarrierSpec::residual(eps, r_eps, horizon, rho, dim as f64, b.h);
        let scale = (b.h * b.h + r_eps * r_eps).sqrt();
        assert!(
            res.abs() <= 1e-10 * scale,
            "residual {res:.3e} at eps={eps} r_eps={r_eps} T={horizon} rho={rho} n={dim}"
        );
        // the evolved barrier still contains the ring
        let r_t = b.sphere().radius(horizon).unwrap();
        assert!(r_t >= scale - 1e-9 * scale);
        checked += 1;
    }
}

#[test]
fn exact_sphere_harnack_grid() {
    // the ratio beats the bound on a 10x10 grid of time pairs
    for &(dim, rho) in &[(1usize, 1.0), (2, 0.5), (2, 2.0)] {
        let s = SphereSolution::new(dim, rho, 2.0).unwrap();
        let t_star = s.extinction_time();
        let times: Vec<f64> = (1..=10).map(|i| 0.09 * i as f64 * t_star).collect();
        for (i, &t1) in times.iter().enumerate() {
            for &t2 in &times[i..] {
                let (ratio, bound) = s.harnack_ratio(t1, t2).unwrap();
                assert!(
                    ratio >= bound - 1e-12,
                    "dim {dim} rho {rho}: ratio {ratio} < bound {bound} at ({t1}, {t2})"
                );
            }
        }
    }
}
