//! Concavity of the dual speed function.
//!
//! With Delta = sum_i 1/lambda_i the dual function is Phi = -Delta^rho, with
//! gradient Phi_i = rho Delta^{rho-1} lambda_i^{-2} and Hessian
//!   Phi_{i,j} = -rho Delta^{rho-2} ((rho-1) lambda_i^{-2} lambda_j^{-2}
//!               + 2 Delta lambda_i^{-3} delta_ij).
//! The sign condition reduces to positive semidefiniteness of
//!   M_ij = 2 rho Delta^{rho-2} (-lambda_i^{-2} lambda_j^{-2}
//!          + Delta lambda_i^{-3} delta_ij),
//! whose leading principal minors are, by the matrix determinant lemma,
//!   (2 rho Delta^{rho-1})^k (prod_{i<=k} 1/lambda_i)^3
//!       (Delta - sum_{i<=k} 1/lambda_i) / Delta.
//! The k = n minor vanishes identically, so minor agreement is measured
//! against the natural scale (2 rho Delta^{rho-1})^k (prod 1/lambda)^3.

use crate::error::{FlowError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn delta(lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|l| 1.0 / l).sum()
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(FlowError::InvalidParameter("empty curvature sample".into()));
    }
    for &l in lambdas {
        if !(l > 0.0) || !l.is_finite() {
            return Err(FlowError::InvalidParameter(format!(
                "principal curvatures must be positive and finite, got {l}"
            )));
        }
    }
    Ok(())
}

/// Phi = -Delta^rho.
pub fn dual_value(rho: f64, lambdas: &[f64]) -> f64 {
    -delta(lambdas).powf(rho)
}

/// Hessian Phi_{i,j}, row-major n x n.
pub fn dual_hessian(rho: f64, lambdas: &[f64]) -> Vec<f64> {
    let n = lambdas.len();
    let d = delta(lambdas);
    let scale = rho * d.powf(rho - 2.0);
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let li = lambdas[i];
            let lj = lambdas[j];
            let mut v = -scale * (rho - 1.0) / (li * li * lj * lj);
            if i == j {
                v -= scale * 2.0 * d / (li * li * li);
            }
            m[i * n + j] = v;
        }
    }
    m
}

/// The sign-condition matrix M_ij, row-major n x n.  The diagonal
/// -lambda_i^{-4} + Delta lambda_i^{-3} is assembled as
/// lambda_i^{-3} sum_{k != i} 1/lambda_k, which is exact (not a
/// cancellation) and in particular exactly zero for n = 1.
pub fn concavity_matrix(rho: f64, lambdas: &[f64]) -> Vec<f64> {
    let n = lambdas.len();
    let d = delta(lambdas);
    let scale = 2.0 * rho * d.powf(rho - 2.0);
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        let li = lambdas[i];
        for j in 0..n {
            let lj = lambdas[j];
            m[i * n + j] = if i == j {
                let d_others: f64 = lambdas
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, l)| 1.0 / l)
                    .sum();
                scale * d_others / (li * li * li)
            } else {
                -scale / (li * li * lj * lj)
            };
        }
    }
    m
}

/// Closed-form leading principal minor of order k of the sign-condition
/// matrix.
pub fn principal_minor(rho: f64, lambdas: &[f64], k: usize) -> f64 {
    let d = delta(lambdas);
    let head: f64 = lambdas[..k].iter().map(|l| 1.0 / l).sum();
    principal_minor_scale(rho, lambdas, k) * (d - head) / d
}

/// Natural magnitude of the order-k minor:
/// (2 rho Delta^{rho-1})^k (prod_{i<=k} 1/lambda_i)^3.
pub fn principal_minor_scale(rho: f64, lambdas: &[f64], k: usize) -> f64 {
    let d = delta(lambdas);
    let prod_inv: f64 = lambdas[..k].iter().map(|l| 1.0 / l).product();
    (2.0 * rho * d.powf(rho - 1.0)).powi(k as i32) * prod_inv.powi(3)
}

/// Leading k x k minor determinant by Gaussian elimination with partial
/// pivoting.
pub fn leading_minor_det(matrix: &[f64], n: usize, k: usize) -> f64 {
    assert!(k <= n && matrix.len() == n * n);
    let mut a: Vec<f64> = (0..k)
        .flat_map(|i| matrix[i * n..i * n + k].to_vec())
        .collect();
    let mut det = 1.0;
    for col in 0..k {
        let mut pivot = col;
        for row in col + 1..k {
            if a[row * k + col].abs() > a[pivot * k + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * k + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(col * k + j, pivot * k + j);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for row in col + 1..k {
            let factor = a[row * k + col] / p;
            for j in col..k {
                a[row * k + j] -= factor * a[col * k + j];
            }
        }
    }
    det
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    if n == 1 {
        return vec![a[0]];
    }
    let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-15 * norm.max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eigs
}

/// Log-uniform curvature samples in [lo, hi]^n, reproducible from the seed.
pub fn sample_lambdas(seed: u64, count: usize, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| (ln_lo + (ln_hi - ln_lo) * rng.gen::<f64>()).exp())
                .collect()
        })
        .collect()
}

/// Worst-case results of the concavity check over a batch of samples.
#[derive(Debug, Clone)]
pub struct DualConcavityReport {
    pub rho: f64,
    pub samples: usize,
    /// min over samples of (min eigenvalue) / (max |eigenvalue|).
    pub worst_eigenvalue_ratio: f64,
    /// max over samples and orders of |direct minor - closed form| / scale.
    pub worst_minor_error: f64,
    /// max over samples of the matrix-relative Hessian mismatch.
    pub worst_hessian_error: f64,
    pub eigenvalue_ok: bool,
    pub minors_ok: bool,
    pub hessian_ok: bool,
}

impl DualConcavityReport {
    pub fn passed(&self) -> bool {
        self.eigenvalue_ok && self.minors_ok && self.hessian_ok
    }
}

/// Checks, for every sample: (a) the sign-condition matrix has min
/// eigenvalue >= -1e-10 of its norm, (b) the closed-form minors match
/// direct determinants to 1e-8 of their natural scale, (c) a central
/// finite-difference Hessian of Phi (relative step 1e-5) matches the
/// assembled Hessian to 1e-4 in matrix norm.
pub fn dual_concavity_check(rho: f64, samples: &[Vec<f64>]) -> Result<DualConcavityReport> {
    if !(rho > 0.0) {
        return Err(FlowError::InvalidParameter(format!(
            "rho must be > 0, got {rho}"
        )));
    }
    let mut worst_eig: f64 = f64::INFINITY;
    let mut worst_minor: f64 = 0.0;
    let mut worst_hess: f64 = 0.0;
    for lambdas in samples {
        check_lambdas(lambdas)?;
        let n = lambdas.len();

        let m = concavity_matrix(rho, lambdas);
        let eigs = symmetric_eigenvalues(&m, n);
        let min_eig = eigs[0];
        let norm = eigs.iter().fold(0.0_f64, |acc, e| acc.max(e.abs()));
        if norm > 0.0 {
            worst_eig = worst_eig.min(min_eig / norm);
        }

        for k in 1..=n {
            let direct = leading_minor_det(&m, n, k);
            let closed = principal_minor(rho, lambdas, k);
            let scale = principal_minor_scale(rho, lambdas, k).abs();
            worst_minor = worst_minor.max((direct - closed).abs() / scale);
        }

        let hess = dual_hessian(rho, lambdas);
        let fd = fd_hessian(rho, lambdas);
        let hnorm = hess.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let mismatch = hess
            .iter()
            .zip(&fd)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        worst_hess = worst_hess.max(mismatch / hnorm);
    }
    Ok(DualConcavityReport {
        rho,
        samples: samples.len(),
        worst_eigenvalue_ratio: worst_eig,
        worst_minor_error: worst_minor,
        worst_hessian_error: worst_hess,
        eigenvalue_ok: worst_eig >= -1e-10,
        minors_ok: worst_minor <= 1e-8,
        hessian_ok: worst_hess <= 1e-4,
    })
}

/// Central finite-difference Hessian of Phi with relative step 1e-5.
fn fd_hessian(rho: f64, lambdas: &[f64]) -> Vec<f64> {
    let n = lambdas.len();
    let mut out = vec![0.0; n * n];
    let phi = |x: &[f64]| dual_value(rho, x);
    let mut x = lambdas.to_vec();
    for i in 0..n {
        let hi = 1e-5 * lambdas[i];
        for j in 0..n {
            if i == j {
                let base = phi(&x);
                x[i] = lambdas[i] + hi;
                let plus = phi(&x);
                x[i] = lambdas[i] - hi;
                let minus = phi(&x);
                x[i] = lambdas[i];
                out[i * n + i] = (plus - 2.0 * base + minus) / (hi * hi);
            } else if j > i {
                let hj = 1e-5 * lambdas[j];
                let mut eval = |si: f64, sj: f64| {
                    x[i] = lambdas[i] + si * hi;
                    x[j] = lambdas[j] + sj * hj;
                    let v = phi(&x);
                    x[i] = lambdas[i];
                    x[j] = lambdas[j];
                    v
                };
                let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                    / (4.0 * hi * hj);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
    }
    out
}
