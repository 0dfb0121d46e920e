//! Conditional max- and min-entropies of Bell-diagonal states and the
//! decoherence quantity `Dec(A|E)`.
//!
//! For a Bell-diagonal state with weights `p` on a `d x d` system,
//! `H_max(A|B) = -log d + 2 log(Σ_j sqrt(p_j))` (base 2). A purification onto
//! `E` has `H_min(A|E) = -H_max(A|B)`, and `Dec(A|E) = 2^{-H_min(A|E)} / d_A`.
//!
//! The closed form is backed by two independent checks: a direct numeric
//! maximization of the fidelity in the max-entropy definition
//! ([`hmax_numeric_oracle`]) and explicit primal/dual SDP witnesses
//! ([`sdp_certificates_check`]).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::nelder_mead_max;
use crate::quantum::{
    bell_basis, identity2, kron, validate_probabilities, Axis, Mat2, Mat4, TwoQubitState, C64,
};
use crate::tol;

fn sum_sqrt(p: &[f64]) -> f64 {
    p.iter().map(|v| v.sqrt()).sum()
}

/// `H_max(A|B)` of a Bell-diagonal state with weights `p` (length `d^2`).
pub fn hmax_bell_diagonal(p: &[f64], d: usize) -> Result<f64> {
    if d < 2 || p.len() != d * d {
        return Err(Error::InvalidProbabilities(format!(
            "expected {} weights for d = {d}, got {}",
            d * d,
            p.len()
        )));
    }
    let p = validate_probabilities(p, tol::INPUT)?;
    Ok(-(d as f64).log2() + 2.0 * sum_sqrt(&p).log2())
}

/// `H_min(A|E)` of any purification of the two-qubit Bell-diagonal state `p`.
pub fn hmin_dual(p: &[f64]) -> Result<f64> {
    Ok(-hmax_bell_diagonal(p, 2)?)
}

/// `Dec(A|E) = (Σ_j sqrt(p_j))^2 / 4`, in `[1/4, 1]`.
pub fn dec_quantum(p: &[f64]) -> Result<f64> {
    let hmin = hmin_dual(p)?;
    Ok(0.5 * (-hmin).exp2())
}

/// `Dec(A|E)` from a min-entropy value, for `d_A = 2`.
pub fn dec_from_hmin(hmin: f64) -> f64 {
    0.5 * (-hmin).exp2()
}

fn hermitian_sqrt(m: &Mat4) -> Mat4 {
    let eig = m.symmetric_eigen();
    let mut out = Mat4::zeros();
    for k in 0..4 {
        let v = eig.eigenvectors.column(k);
        let lam = eig.eigenvalues[k].max(0.0);
        out += (v * v.adjoint()).scale(lam.sqrt());
    }
    out
}

/// Root fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, given `sqrt(rho)`.
fn root_fidelity(sqrt_rho: &Mat4, sigma: &Mat4) -> f64 {
    let m = sqrt_rho * sigma * sqrt_rho;
    let m = (m + m.adjoint()).unscale(2.0);
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| if l > -tol::PSD { l.max(0.0).sqrt() } else { 0.0 })
        .sum()
}

const ORACLE_STARTS: usize = 24;

/// `max_{sigma_B} log2(2 F^2(rho, 1/2 ⊗ sigma_B))`, by Nelder-Mead over the
/// Bloch ball from [`ORACLE_STARTS`] deterministic starting points.
///
/// Returns [`Error::NonConvergence`] if the best two starts disagree by more
/// than `1e-6`.
pub fn hmax_numeric_oracle(rho: &TwoQubitState) -> Result<f64> {
    let sqrt_rho = hermitian_sqrt(rho.matrix());
    let half_id = identity2().unscale(2.0);
    let value_at = |r: &[f64; 3]| -> f64 {
        let sigma: Mat2 = Axis::ALL
            .iter()
            .zip(r.iter())
            .fold(identity2(), |acc, (axis, c)| acc + axis.pauli().scale(*c))
            .unscale(2.0);
        let f = root_fidelity(&sqrt_rho, &kron(&half_id, &sigma));
        (2.0 * f * f).log2()
    };
    // Points outside the ball are projected back, with a penalty that keeps
    // the simplex from drifting away.
    let objective = |u: &[f64; 3]| -> f64 {
        let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        if norm <= 1.0 {
            value_at(u)
        } else {
            let r = [u[0] / norm, u[1] / norm, u[2] / norm];
            value_at(&r) - (norm - 1.0) * (norm - 1.0)
        }
    };

    let mut results: Vec<f64> = starting_points()
        .iter()
        .map(|start| {
            let run = nelder_mead_max(objective, *start, 0.25, 1e-15, 20_000);
            let u = run.point;
            let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            let r = if norm > 1.0 {
                [u[0] / norm, u[1] / norm, u[2] / norm]
            } else {
                u
            };
            value_at(&r)
        })
        .collect();
    results.sort_by(|a, b| b.total_cmp(a));
    let spread = results[0] - results[1];
    if !(spread <= tol::ENTROPY_ORACLE) {
        return Err(Error::NonConvergence {
            what: "max-entropy oracle",
            spread,
        });
    }
    Ok(results[0])
}

/// The ball centre plus Fibonacci-sphere points on two shells.
fn starting_points() -> Vec<[f64; 3]> {
    let mut pts = vec![[0.0; 3]];
    let shell = (ORACLE_STARTS - 1) / 2;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for (radius, count) in [(0.5, shell), (0.9, ORACLE_STARTS - 1 - shell)] {
        for i in 0..count {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let theta = golden * i as f64;
            pts.push([
                radius * rho * theta.cos(),
                radius * rho * theta.sin(),
                radius * z,
            ]);
        }
    }
    pts
}

/// One verified constraint of the SDP certificates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub constraint: &'static str,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub p: [f64; 4],
    pub primal_value: f64,
    pub dual_value: f64,
    /// `(1/2)(Σ_j sqrt(p_j))^2`.
    pub closed_form: f64,
    pub checks: Vec<CertificateCheck>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CertificateCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type CMat = DMatrix<C64>;

fn min_eigenvalue(m: &CMat) -> f64 {
    let h = (m + m.adjoint()).unscale(2.0);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn max_eigenvalue(m: &CMat) -> f64 {
    let h = (m + m.adjoint()).unscale(2.0);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn to_dynamic(m: &Mat4) -> CMat {
    CMat::from_fn(4, 4, |i, j| m[(i, j)])
}

fn kron_dyn(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    CMat::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Traces out the first factor of a `(da*db) x (da*db)` operator.
fn trace_first(m: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum())
}

/// Traces out the second factor of a `(da*db) x (da*db)` operator.
fn trace_second(m: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum())
}

/// Verifies the explicit primal and dual solutions of the max-entropy SDP
/// for the two-qubit Bell-diagonal state with weights `p`.
///
/// The purification is `|psi> = Σ_j sqrt(p_j) |Phi_j> ⊗ |j>` on `ABC` with
/// `dim C = 4`. Primal witness: `Z_AB = s Σ_k sqrt(p_k) |Phi_k><Phi_k|` with
/// `s = Σ_j sqrt(p_j)`; the smallest feasible `mu` is the largest eigenvalue
/// of `Tr_A Z_AB`. Dual witness: `Y_ABC = (1/2) Σ_jk |Phi_j><Phi_k| ⊗ |j><k|`
/// with `sigma_B = 1/2`. The inequality `Z_AB ⊗ 1_C >= rho_ABC` is checked
/// both through the support/inverse criterion for rank-one operators and by
/// a direct eigenvalue computation.
pub fn sdp_certificates_check(p: &[f64]) -> Result<CertificateReport> {
    if p.len() != 4 {
        return Err(Error::InvalidProbabilities(format!(
            "expected 4 Bell weights, got {}",
            p.len()
        )));
    }
    let p = validate_probabilities(p, tol::INPUT)?;
    let d = 2.0;
    let s = sum_sqrt(&p);
    let closed_form = s * s / d;
    let basis = bell_basis();
    let mut checks = Vec::new();
    let mut check = |constraint: &'static str, residual: f64| {
        checks.push(CertificateCheck {
            constraint,
            residual,
            passed: residual <= tol::CERTIFICATE,
        });
    };

    // Purification and the operators on ABC.
    let mut psi = nalgebra::DVector::<C64>::zeros(16);
    for (j, phi) in basis.iter().enumerate() {
        for ab in 0..4 {
            psi[ab * 4 + j] += phi[ab] * p[j].sqrt();
        }
    }
    let rho_abc = &psi * psi.adjoint();
    let id_c = CMat::identity(4, 4);

    // Primal witness.
    let mut z = Mat4::zeros();
    let mut support = Mat4::zeros();
    let mut z_pinv = Mat4::zeros();
    for (k, phi) in basis.iter().enumerate() {
        let proj = phi * phi.adjoint();
        z += proj.scale(s * p[k].sqrt());
        if p[k] > 0.0 {
            support += proj;
            z_pinv += proj.scale(1.0 / (s * p[k].sqrt()));
        }
    }
    let z = to_dynamic(&z);
    let tr_a_z = trace_first(&z, 2, 2);
    let mu = max_eigenvalue(&tr_a_z);
    check("primal: Z_AB >= 0", (-min_eigenvalue(&z)).max(0.0));
    check("primal: mu >= 0", (-mu).max(0.0));
    let mu_minus = CMat::identity(2, 2).scale(mu) - &tr_a_z;
    check("primal: mu 1_B >= Tr_A Z_AB", (-min_eigenvalue(&mu_minus)).max(0.0));

    let pi_psi = kron_dyn(&to_dynamic(&support), &id_c) * &psi;
    check("primal: support projector fixes psi_ABC", (pi_psi - &psi).norm());
    let inv_expect = (psi.adjoint() * kron_dyn(&to_dynamic(&z_pinv), &id_c) * &psi)[(0, 0)].re;
    check("primal: <psi| Z_AB^+ ⊗ 1_C |psi> <= 1", (inv_expect - 1.0).max(0.0));
    let gap = kron_dyn(&z, &id_c) - &rho_abc;
    check("primal: Z_AB ⊗ 1_C >= rho_ABC", (-min_eigenvalue(&gap)).max(0.0));

    // Dual witness.
    let mut omega = nalgebra::DVector::<C64>::zeros(16);
    for (j, phi) in basis.iter().enumerate() {
        for ab in 0..4 {
            omega[ab * 4 + j] += phi[ab];
        }
    }
    let y = (&omega * omega.adjoint()).unscale(d);
    let sigma_b = CMat::identity(2, 2).unscale(d);
    check("dual: Y_ABC >= 0", (-min_eigenvalue(&y)).max(0.0));
    check("dual: sigma_B >= 0", (-min_eigenvalue(&sigma_b)).max(0.0));
    let tr_sigma = sigma_b.trace().re;
    check("dual: Tr sigma_B <= 1", (tr_sigma - 1.0).max(0.0));
    let slack = kron_dyn(&CMat::identity(2, 2), &sigma_b) - trace_second(&y, 4, 4);
    check("dual: Tr_C Y_ABC <= 1_A ⊗ sigma_B", (-min_eigenvalue(&slack)).max(0.0));
    let dual_value = (&rho_abc * &y).trace().re;

    check("primal value equals closed form", (mu - closed_form).abs());
    check("dual value equals closed form", (dual_value - closed_form).abs());
    check("primal value equals dual value", (mu - dual_value).abs());

    Ok(CertificateReport {
        p: [p[0], p[1], p[2], p[3]],
        primal_value: mu,
        dual_value,
        closed_form,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::BellDiagonalState;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(hmax_bell_diagonal(&[1.0, 0.0, 0.0, 0.0], 2).unwrap(), -1.0);
        assert_abs_diff_eq!(hmax_bell_diagonal(&[0.25; 4], 2).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            hmax_bell_diagonal(&[0.5, 0.5, 0.0, 0.0], 2).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(hmin_dual(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(hmin_dual(&[0.25; 4]).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hmin_dual(&[0.5, 0.5, 0.0, 0.0]).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn higher_dimension_formula() {
        // d = 3: pure maximally entangled state has H_max = -log 3.
        let mut p = vec![0.0; 9];
        p[0] = 1.0;
        assert_abs_diff_eq!(hmax_bell_diagonal(&p, 3).unwrap(), -(3f64.log2()), epsilon = 1e-15);
        assert!(hmax_bell_diagonal(&p, 2).is_err());
    }

    #[test]
    fn dec_examples() {
        assert_abs_diff_eq!(dec_quantum(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.25);
        assert_abs_diff_eq!(dec_quantum(&[0.25; 4]).unwrap(), 1.0, epsilon = 1e-15);
        for r in [0.0, 0.5, 1.0] {
            let p = [(1.0 + r) / 2.0, (1.0 - r) / 2.0, 0.0, 0.0];
            assert_abs_diff_eq!(
                dec_quantum(&p).unwrap(),
                0.25 * (1.0 + (1.0 - r * r).sqrt()),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn rejects_invalid_probabilities() {
        assert!(dec_quantum(&[0.5, 0.6, 0.0, -0.1]).is_err());
        assert!(dec_quantum(&[0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(sdp_certificates_check(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn oracle_examples() {
        let half = BellDiagonalState::new([0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(hmax_numeric_oracle(&half.to_state()).unwrap(), 0.0, epsilon = 1e-6);
        let mixed = TwoQubitState::maximally_mixed();
        assert_abs_diff_eq!(hmax_numeric_oracle(&mixed).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn oracle_handles_boundary_optimum() {
        // |0><0| ⊗ |0><0|: the optimal sigma_B is pure, H_max = log2(2 * 1/2) = 0.
        let ket0 = Mat2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let rho = TwoQubitState::product(&ket0, &ket0).unwrap();
        assert_abs_diff_eq!(hmax_numeric_oracle(&rho).unwrap(), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn certificate_examples() {
        let r = sdp_certificates_check(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_abs_diff_eq!(r.primal_value, 0.5, epsilon = 1e-12);
        let r = sdp_certificates_check(&[0.25; 4]).unwrap();
        assert!(r.passed());
        assert_abs_diff_eq!(r.dual_value, 2.0, epsilon = 1e-12);
        let p = [0.7, 0.1, 0.1, 0.1];
        let r = sdp_certificates_check(&p).unwrap();
        assert!(r.passed());
        let expected = 0.5 * (0.7f64.sqrt() + 3.0 * 0.1f64.sqrt()).powi(2);
        assert_abs_diff_eq!(r.primal_value, expected, epsilon = 1e-10);
        assert_abs_diff_eq!(r.dual_value, expected, epsilon = 1e-10);
    }
}
