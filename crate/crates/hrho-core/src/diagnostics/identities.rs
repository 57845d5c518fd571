//! Evolution identities checked on exact shrinking spheres, where all
//! spatial covariant derivatives are closed-form and the time derivative can
//! be taken by centred differences.
//!
//! For motion with speed F = H^rho:
//!   dF/dt - F^ij F_;ij           = F F^ij h^k_i h_kj,
//!   dX/dt - F^ij X_;ij           = (F^ij h_ij - F) nu,
//!   dv/dt - F^ij v_;ij           = -v F^ij h^k_i h_kj - 2 (1/v) F^ij v_i v_j.
//! On a sphere of radius r: h^k_i = delta^k_i / r, F is spatially constant,
//! F^ij h^k_i h_kj = rho H^{rho-1} n / r^2, and for the height-direction
//! gradient function (vtilde = -<nu, e_{n+1}>, v = 1/vtilde):
//!   |grad vtilde|^2 = (1 - vtilde^2) / r^2,
//!   vtilde_;ij = -(vtilde / r^2) g_ij,
//! so F^ij v_;ij = rho H^{rho-1} (n/(r^2 vtilde) + 2 (1 - vtilde^2)/(r^2 vtilde^3)).

use crate::error::{FlowError, Result};
use crate::exact::SphereSolution;
use crate::geometry::pow_rho;

/// Which identity to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityKind {
    /// The F-identity.
    Speed,
    /// The v-identity at a material point of the lower cap.
    GradientFunction,
    /// The position identity at a material point of the lower cap.
    Position,
}

/// rho H^{rho-1}.
fn speed_derivative(h: f64, rho: f64) -> f64 {
    rho * pow_rho(h, rho) / h
}

/// Relative residual |LHS - RHS| / |RHS| of the selected identity at time
/// `t`, with the time derivative by a centred difference (step 1e-6, shrunk
/// near extinction).  `polar_angle` picks the material point on the lower
/// cap: omega = (sin a, 0, -cos a); it only matters for the v- and
/// position identities.
pub fn evolution_identity_check(
    sphere: &SphereSolution,
    t: f64,
    kind: IdentityKind,
    polar_angle: f64,
) -> Result<f64> {
    let t_ext = sphere.extinction_time();
    if !(t > 0.0 && t < t_ext) {
        return Err(FlowError::InvalidParameter(format!(
            "need 0 < t < extinction time {t_ext:.6e}, got {t}"
        )));
    }
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&polar_angle) {
        return Err(FlowError::InvalidParameter(
            "polar angle must lie in [0, pi/2)".into(),
        ));
    }
    // default step 1e-6, shrunk in proportion to the remaining lifetime so
    // the centred-difference truncation (h / (t_ext - t))^2 stays below the
    // 1e-8 residual budget for short-lived spheres
    let mut h_step = 1e-6_f64.min(1e-4 * (t_ext - t)).min(0.5 * t);
    if h_step < 1e-12 {
        return Err(FlowError::InvalidParameter(format!(
            "t = {t} too close to extinction for the centred difference"
        )));
    }
    // keep the step exactly representable around t
    h_step = (t + h_step) - t;

    let n = sphere.dim as f64;
    let rho = sphere.rho;
    let r = sphere.radius(t)?;
    let mean = sphere.curvature_sum_coefficient / r;
    let f = pow_rho(mean, rho);
    let df = speed_derivative(mean, rho);
    let omega = [polar_angle.sin(), 0.0, -polar_angle.cos()];

    match kind {
        IdentityKind::Speed => {
            let f_plus = sphere.speed(t + h_step)?;
            let f_minus = sphere.speed(t - h_step)?;
            let lhs = (f_plus - f_minus) / (2.0 * h_step);
            let rhs = f * df * n / (r * r);
            Ok((lhs - rhs).abs() / rhs.abs())
        }
        IdentityKind::GradientFunction => {
            // v at the material point via the evolving embedding
            let v_at = |tt: f64| -> Result<f64> {
                let rr = sphere.radius(tt)?;
                let x = [
                    sphere.center[0] + rr * omega[0],
                    sphere.center[1] + rr * omega[1],
                    sphere.center[2] + rr * omega[2],
                ];
                let nu = [
                    (x[0] - sphere.center[0]) / rr,
                    (x[1] - sphere.center[1]) / rr,
                    (x[2] - sphere.center[2]) / rr,
                ];
                Ok(1.0 / (-nu[2]))
            };
            let vdot = (v_at(t + h_step)? - v_at(t - h_step)?) / (2.0 * h_step);
            let vt = -omega[2]; // vtilde
            let lap_v = df * (n / (r * r * vt) + 2.0 * (1.0 - vt * vt) / (r * r * vt.powi(3)));
            let lhs = vdot - lap_v;
            let h_sq = df * n / (r * r); // F^ij h^k_i h_kj
            let grad_term = df * (1.0 - vt * vt) / (r * r * vt.powi(4)); // F^ij v_i v_j
            let rhs = -(1.0 / vt) * h_sq - 2.0 * vt * grad_term;
            Ok((lhs - rhs).abs() / rhs.abs())
        }
        IdentityKind::Position => {
            let x_at = |tt: f64| -> Result<[f64; 3]> {
                let rr = sphere.radius(tt)?;
                Ok([
                    sphere.center[0] + rr * omega[0],
                    sphere.center[1] + rr * omega[1],
                    sphere.center[2] + rr * omega[2],
                ])
            };
            let xp = x_at(t + h_step)?;
            let xm = x_at(t - h_step)?;
            let mut resid = 0.0_f64;
            let mut rhs_norm = 0.0_f64;
            for k in 0..3 {
                let xdot = (xp[k] - xm[k]) / (2.0 * h_step);
                // F^ij X_;ij = -F^ij h_ij nu = -rho H^rho nu
                let lhs = xdot + rho * f * omega[k];
                let rhs = (rho - 1.0) * f * omega[k];
                resid += (lhs - rhs) * (lhs - rhs);
                rhs_norm += rhs * rhs;
            }
            Ok(resid.sqrt() / rhs_norm.sqrt().max(f))
        }
    }
}
