//! Property tests for the pointwise geometry: algebraic identities of the
//! metric, eigenvalue consistency, symmetry under grid rotation, and the
//! divergence-form cross-check.

use hrho_core::exact::Scenario;
use hrho_core::geometry::{
    derivatives, divergence_form_speed, geometry_fields, pow_rho, tangent_plane_distance,
};
use hrho_core::grid::{dot3, norm3, sub3, GridFunction, GridSpec};
use proptest::prelude::*;

/// Random strictly convex quadratic u = a x^2 + b y^2 + c x y + <d, x> + e
/// with a, b > 0 and c^2 < 4 a b.
fn convex_quadratic() -> impl Strategy<Value = (f64, f64, f64, f64, f64, f64)> {
    (
        0.2..2.0f64,
        0.2..2.0f64,
        -0.9..0.9f64,
        -1.0..1.0f64,
        -1.0..1.0f64,
        -0.5..0.5f64,
    )
        .prop_map(|(a, b, t, d1, d2, e)| {
            let c = t * 2.0 * (a * b).sqrt();
            (a, b, c, d1, d2, e)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_inverse_and_eigenvalue_identities((a, b, c, d1, d2, e) in convex_quadratic()) {
        let spec = GridSpec::new(2, 1.0, 0.125).unwrap();
        let u = GridFunction::from_fn(spec, |x, y| {
            a * x * x + b * y * y + c * x * y + d1 * x + d2 * y + e
        });
        let g = geometry_fields(&u, 1.0).unwrap();
        for id in 0..spec.node_count() {
            // g_up g_lo = identity to 1e-12 per entry
            let lo = g.g_lo[id];
            let up = g.g_up[id];
            let p11 = up[0] * lo[0] + up[2] * lo[2];
            let p22 = up[2] * lo[2] + up[1] * lo[1];
            let p12 = up[0] * lo[2] + up[2] * lo[1];
            prop_assert!((p11 - 1.0).abs() < 1e-12);
            prop_assert!((p22 - 1.0).abs() < 1e-12);
            prop_assert!(p12.abs() < 1e-12);

            // v = W >= 1
            prop_assert!(g.w[id] >= 1.0);
            // downward unit normal
            prop_assert!((norm3(g.nu[id]) - 1.0).abs() < 1e-12);
            prop_assert!(g.nu[id][2] < 0.0);

            // H = sum of eigenvalues, K = product, to 1e-10 relative
            let [l1, l2] = g.lambdas[id];
            let h = g.mean_curv[id];
            let k = g.gauss_curv[id];
            prop_assert!((l1 + l2 - h).abs() <= 1e-10 * h.abs().max(1e-10));
            prop_assert!((l1 * l2 - k).abs() <= 1e-10 * k.abs().max(1e-10));
        }
    }

    #[test]
    fn curvatures_match_closed_forms_on_quadratics((a, b, c, d1, d2, e) in convex_quadratic()) {
        let dx = 0.125;
        let spec = GridSpec::new(2, 1.0, dx).unwrap();
        let u = GridFunction::from_fn(spec, |x, y| {
            a * x * x + b * y * y + c * x * y + d1 * x + d2 * y + e
        });
        let g = geometry_fields(&u, 1.0).unwrap();
        let tol = 5.0 * dx * dx;
        for iy in 0..spec.nodes_axis1() {
            for ix in 0..spec.nodes_per_axis() {
                if !spec.is_interior([ix, iy]) {
                    continue;
                }
                let id = spec.index(ix, iy);
                let [x, y] = spec.position([ix, iy]);
                // closed forms from the exact gradient and Hessian
                let u1 = 2.0 * a * x + c * y + d1;
                let u2 = 2.0 * b * y + c * x + d2;
                let w2 = 1.0 + u1 * u1 + u2 * u2;
                let w = w2.sqrt();
                let (h11, h22, h12) = (2.0 * a / w, 2.0 * b / w, c / w);
                let h_exact = (h11 * (1.0 - u1 * u1 / w2)
                    + h22 * (1.0 - u2 * u2 / w2)
                    + 2.0 * h12 * (-u1 * u2 / w2)) as f64;
                let k_exact = (h11 * h22 - h12 * h12) / w2;
                prop_assert!((g.mean_curv[id] - h_exact).abs() < tol);
                prop_assert!((g.gauss_curv[id] - k_exact).abs() < tol);
                // principal curvatures against the quadratic formula
                let mid = 0.5 * (h_exact);
                let disc = (mid * mid - k_exact).max(0.0).sqrt();
                prop_assert!((g.lambdas[id][0] - (mid - disc)).abs() < tol);
                prop_assert!((g.lambdas[id][1] - (mid + disc)).abs() < tol);
            }
        }
    }

    #[test]
    fn divergence_form_agrees_with_metric_contraction(
        (a, b, c, d1, d2, e) in convex_quadratic(),
        rho in prop_oneof![Just(0.5), Just(1.0), Just(2.0), 0.3..3.0f64],
    ) {
        let spec = GridSpec::new(2, 1.0, 0.25).unwrap();
        let u = GridFunction::from_fn(spec, |x, y| {
            a * x * x + b * y * y + c * x * y + d1 * x + d2 * y + e
        });
        let g = geometry_fields(&u, rho).unwrap();
        let (speed, mask) = divergence_form_speed(&u, rho).unwrap();
        for id in 0..spec.node_count() {
            prop_assert_eq!(mask[id], g.mean_convex[id]);
            if mask[id] {
                let reference = g.w[id] * g.speed[id];
                prop_assert!(
                    (speed[id] - reference).abs() <= 1e-8 * reference.abs(),
                    "divergence route {} vs contraction {}", speed[id], reference
                );
            }
        }
    }

    #[test]
    fn speed_is_monotone_in_rho_above_unit_curvature(
        (a, b, c, d1, d2, e) in convex_quadratic(),
        rho1 in 0.3..1.5f64,
        gap in 0.1..2.0f64,
    ) {
        let spec = GridSpec::new(2, 0.5, 0.125).unwrap();
        // steep quadratic so H > 1 somewhere
        let u = GridFunction::from_fn(spec, |x, y| {
            2.0 * (a * x * x + b * y * y + c * x * y) + 0.1 * (d1 * x + d2 * y) + e
        });
        let g1 = geometry_fields(&u, rho1).unwrap();
        let g2 = geometry_fields(&u, rho1 + gap).unwrap();
        let mut seen = false;
        for id in 0..spec.node_count() {
            if g1.mean_curv[id] > 1.0 {
                seen = true;
                prop_assert!(g1.speed[id] < g2.speed[id]);
            }
        }
        prop_assert!(seen, "no node with H > 1 in this draw");
    }

    #[test]
    fn tangent_plane_distance_matches_point_to_plane_oracle(
        (a, b, c, d1, d2, e) in convex_quadratic(),
        ix in 1usize..8,
        iy in 1usize..8,
        jx in 0usize..9,
        jy in 0usize..9,
    ) {
        prop_assume!((ix, iy) != (jx, jy));
        let spec = GridSpec::new(2, 1.0, 0.25).unwrap();
        let u = GridFunction::from_fn(spec, |x, y| {
            a * x * x + b * y * y + c * x * y + d1 * x + d2 * y + e
        });
        let d = tangent_plane_distance(&u, [ix, iy], [jx, jy]).unwrap();
        // oracle: |<(p0 - p), nu>| with nu from the discrete gradient
        let fields = geometry_fields(&u, 1.0).unwrap();
        let id = spec.index(ix, iy);
        let p = u.graph_point([ix, iy]);
        let p0 = u.graph_point([jx, jy]);
        let oracle = dot3(sub3(p0, p), fields.nu[id]).abs();
        prop_assert!((d - oracle).abs() <= 1e-12 * (1.0 + oracle));
    }
}

#[test]
fn rotation_by_quarter_turn_permutes_scalar_fields() {
    // radially symmetric data: rotating the samples by 90 degrees permutes
    // H, K and F node-for-node
    let spec = GridSpec::new(2, 1.0, 0.1).unwrap();
    let u = GridFunction::from_fn(spec, |x, y| {
        let r2 = x * x + y * y;
        0.8 * r2 + 0.3 * r2 * r2
    });
    let n = spec.nodes_per_axis();
    let rotated = GridFunction {
        spec,
        time: 0.0,
        values: {
            let mut v = vec![0.0; spec.node_count()];
            for iy in 0..n {
                for ix in 0..n {
                    // (x, y) -> (y, -x): node (i, j) reads from (j, n-1-i)
                    v[spec.index(ix, iy)] = u.value([iy, n - 1 - ix]);
                }
            }
            v
        },
    };
    let g = geometry_fields(&u, 2.0).unwrap();
    let gr = geometry_fields(&rotated, 2.0).unwrap();
    let mut max_rel: f64 = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let id = spec.index(ix, iy);
            let src = spec.index(iy, n - 1 - ix);
            for (a, b) in [
                (gr.mean_curv[id], g.mean_curv[src]),
                (gr.gauss_curv[id], g.gauss_curv[src]),
                (gr.speed[id], g.speed[src]),
            ] {
                max_rel = max_rel.max((a - b).abs() / b.abs().max(1e-300));
            }
        }
    }
    assert!(max_rel < 1e-13, "max relative mismatch {max_rel}");
}

#[test]
fn smoothed_cone_is_uniformly_close_to_the_cone() {
    let spec = GridSpec::new(2, 3.0, 0.25).unwrap();
    let mu = 0.05;
    let u = Scenario::SmoothedCone { smoothing: mu }.grid_function(&spec).unwrap();
    let bound = mu * 4.0_f64.ln() + 1e-12;
    for iy in 0..spec.nodes_axis1() {
        for ix in 0..spec.nodes_per_axis() {
            let [x, y] = spec.position([ix, iy]);
            let cone = x.abs().max(y.abs());
            let diff = u.value([ix, iy]) - cone;
            assert!(diff >= -1e-12 && diff <= bound, "diff {diff} at ({x}, {y})");
        }
    }
}

#[test]
fn pow_rho_fast_paths_match_powf() {
    for &h in &[1e-6, 0.3, 1.0, 2.5, 40.0] {
        for &rho in &[0.5, 1.0, 2.0] {
            assert!((pow_rho(h, rho) - h.powf(rho)).abs() <= 1e-15 * h.powf(rho));
        }
    }
    let d = derivatives(
        &Scenario::Paraboloid
            .grid_function(&GridSpec::new(1, 1.0, 0.5).unwrap())
            .unwrap(),
    )
    .unwrap();
    assert!(d.du.len() == 5);
}
