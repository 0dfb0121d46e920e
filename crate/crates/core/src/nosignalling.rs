//! A decoherence bound that assumes only no-signalling.
//!
//! Alice, Bob and an environment `C` share a tripartite no-signalling box
//! `ω`. If Alice and Bob win CHSH with probability at least `λ`, the linear
//! program built by [`build_delta_lp`] lower-bounds how far the `AC`
//! marginal of `ω` must stay, in total variation, from any perfectly
//! correlated bipartite box `ψ`. That distance `δ(λ)` gives
//! `Dec(A|E) <= 2^{-δ(λ)^2}`.
//!
//! Variable layout (97 in total):
//!
//! | range   | meaning                                 |
//! |---------|-----------------------------------------|
//! | 0..64   | `ω[a,b,c|x,y,z]`, see [`omega_index`]   |
//! | 64..80  | `ψ[a,c|x,z]`, see [`psi_index`]         |
//! | 80..96  | `δ_ac^xz`, see [`delta_ac_index`]       |
//! | 96      | `δ`                                     |

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{lp_solve, LpProblem, LpStatus};
use crate::quantum::validate_probabilities;
use crate::tol;

pub const NUM_VARS: usize = 97;
pub const DELTA_INDEX: usize = 96;
const PSI_OFFSET: usize = 64;
const DELTA_AC_OFFSET: usize = 80;

const BITS: [usize; 2] = [0, 1];

pub fn omega_index(a: usize, b: usize, c: usize, x: usize, y: usize, z: usize) -> usize {
    ((((a * 2 + b) * 2 + c) * 2 + x) * 2 + y) * 2 + z
}

fn pair_index(a: usize, c: usize, x: usize, z: usize) -> usize {
    ((a * 2 + c) * 2 + x) * 2 + z
}

pub fn psi_index(a: usize, c: usize, x: usize, z: usize) -> usize {
    PSI_OFFSET + pair_index(a, c, x, z)
}

pub fn delta_ac_index(a: usize, c: usize, x: usize, z: usize) -> usize {
    DELTA_AC_OFFSET + pair_index(a, c, x, z)
}

/// CHSH winning probability for a CHSH value: `λ = 1/2 + β/8`.
pub fn lambda_from_beta(beta: f64) -> Result<f64> {
    if !(-4.0..=4.0).contains(&beta) {
        return Err(Error::out_of_range("beta", beta, -4.0, 4.0));
    }
    Ok(0.5 + beta / 8.0)
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok((
        validate_probabilities(p, tol::INPUT)?,
        validate_probabilities(q, tol::INPUT)?,
    ))
}

/// Bhattacharyya coefficient `Σ sqrt(p_i q_i)`.
pub fn classical_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    let (p, q) = check_pair(p, q)?;
    let b: f64 = p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(b.min(1.0))
}

/// Total variation distance `(1/2) Σ |p_i - q_i|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    let (p, q) = check_pair(p, q)?;
    let d: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * d).min(1.0))
}

fn check_entries(pr: &[f64], tolerance: f64) -> Result<()> {
    if let Some(v) = pr
        .iter()
        .find(|v| !v.is_finite() || **v < -tolerance || **v > 1.0 + tolerance)
    {
        return Err(Error::InvalidProbabilities(format!("entry {v} outside [0, 1]")));
    }
    Ok(())
}

fn check_equal(lhs: f64, rhs: f64, what: &str, tolerance: f64) -> Result<()> {
    if (lhs - rhs).abs() > tolerance {
        return Err(Error::InvalidProbabilities(format!(
            "{what}: {lhs} != {rhs}"
        )));
    }
    Ok(())
}

/// A tripartite no-signalling box `Pr[a,b,c|x,y,z]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsDist3 {
    pr: Vec<f64>,
}

impl NsDist3 {
    /// Validates entries, normalization and no-signalling to `1e-9`.
    pub fn new(pr: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(pr, tol::LP_FEASIBILITY)
    }

    pub fn with_tolerance(pr: Vec<f64>, tolerance: f64) -> Result<Self> {
        if pr.len() != 64 {
            return Err(Error::Dimension(format!("expected 64 entries, got {}", pr.len())));
        }
        check_entries(&pr, tolerance)?;
        let d = NsDist3 { pr };
        for (x, y, z) in settings3() {
            let total: f64 = outcomes3().map(|(a, b, c)| d.get(a, b, c, x, y, z)).sum();
            check_equal(total, 1.0, "normalization", tolerance)?;
        }
        for (u, v, s, t) in quads() {
            // One party's setting must not influence the other two.
            let sum_a = |x| BITS.iter().map(|&a| d.get(a, u, v, x, s, t)).sum::<f64>();
            check_equal(sum_a(0), sum_a(1), "no-signalling from A", tolerance)?;
            let sum_b = |y| BITS.iter().map(|&b| d.get(u, b, v, s, y, t)).sum::<f64>();
            check_equal(sum_b(0), sum_b(1), "no-signalling from B", tolerance)?;
            let sum_c = |z| BITS.iter().map(|&c| d.get(u, v, c, s, t, z)).sum::<f64>();
            check_equal(sum_c(0), sum_c(1), "no-signalling from C", tolerance)?;
        }
        Ok(d)
    }

    pub fn get(&self, a: usize, b: usize, c: usize, x: usize, y: usize, z: usize) -> f64 {
        self.pr[omega_index(a, b, c, x, y, z)]
    }

    pub fn entries(&self) -> &[f64] {
        &self.pr
    }

    /// Probability that `a ⊕ b = x·y` under uniform `x, y`, with `C` measuring `z`.
    pub fn chsh_winning_probability(&self, z: usize) -> f64 {
        let mut total = 0.0;
        for (x, y) in settings2() {
            for (a, b, c) in outcomes3() {
                if a ^ b == x & y {
                    total += self.get(a, b, c, x, y, z);
                }
            }
        }
        0.25 * total
    }

    /// `Pr[a,c|x,z] = Σ_b Pr[a,b,c|x,y,z]`, indexed like `ψ`.
    pub fn marginal_ac(&self, y: usize) -> NsDist2 {
        let mut pr = vec![0.0; 16];
        for (a, c) in settings2() {
            for (x, z) in settings2() {
                pr[pair_index(a, c, x, z)] = BITS.iter().map(|&b| self.get(a, b, c, x, y, z)).sum();
            }
        }
        NsDist2 { pr }
    }
}

/// A bipartite no-signalling box `Pr[a,c|x,z]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsDist2 {
    pr: Vec<f64>,
}

impl NsDist2 {
    pub fn new(pr: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(pr, tol::LP_FEASIBILITY)
    }

    pub fn with_tolerance(pr: Vec<f64>, tolerance: f64) -> Result<Self> {
        if pr.len() != 16 {
            return Err(Error::Dimension(format!("expected 16 entries, got {}", pr.len())));
        }
        check_entries(&pr, tolerance)?;
        let d = NsDist2 { pr };
        for (x, z) in settings2() {
            let total: f64 = settings2().map(|(a, c)| d.get(a, c, x, z)).sum();
            check_equal(total, 1.0, "normalization", tolerance)?;
        }
        for (u, s) in settings2() {
            let sum_a = |x| BITS.iter().map(|&a| d.get(a, u, x, s)).sum::<f64>();
            check_equal(sum_a(0), sum_a(1), "no-signalling from A", tolerance)?;
            let sum_c = |z| BITS.iter().map(|&c| d.get(u, c, s, z)).sum::<f64>();
            check_equal(sum_c(0), sum_c(1), "no-signalling from C", tolerance)?;
        }
        Ok(d)
    }

    pub fn get(&self, a: usize, c: usize, x: usize, z: usize) -> f64 {
        self.pr[pair_index(a, c, x, z)]
    }

    pub fn entries(&self) -> &[f64] {
        &self.pr
    }

    /// The four outcome probabilities for settings `(x, z)`, ordered `(a, c)`.
    pub fn outcomes(&self, x: usize, z: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (a, c) in settings2() {
            out[a * 2 + c] = self.get(a, c, x, z);
        }
        out
    }

    /// `Pr[a = c | x = z] = 1` for both `x`.
    pub fn is_perfectly_correlated(&self, tolerance: f64) -> bool {
        BITS.iter()
            .all(|&x| (self.get(0, 0, x, x) + self.get(1, 1, x, x) - 1.0).abs() <= tolerance)
    }
}

fn settings2() -> impl Iterator<Item = (usize, usize)> {
    (0..4).map(|k| (k >> 1, k & 1))
}

fn settings3() -> impl Iterator<Item = (usize, usize, usize)> {
    (0..8).map(|k| (k >> 2, (k >> 1) & 1, k & 1))
}

fn outcomes3() -> impl Iterator<Item = (usize, usize, usize)> {
    settings3()
}

fn quads() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|k| (k >> 3, (k >> 2) & 1, (k >> 1) & 1, k & 1))
}

/// Which `(x, z)` pairs constrain `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// `δ >= Σ_ac δ_ac^xz` for every `(x, z)`: the worst setting pair.
    AllSettings,
    /// Only the given `(x, z)`.
    Setting { x: usize, z: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpOptions {
    /// Bob's setting in the `AC` marginal of `ω`.
    pub y_index: usize,
    /// The environment's setting at which the CHSH constraint is imposed.
    pub chsh_z: usize,
    pub aggregation: Aggregation,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            y_index: 0,
            chsh_z: 0,
            aggregation: Aggregation::AllSettings,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::out_of_range("lambda", lambda, 0.0, 1.0));
    }
    Ok(())
}

/// The canonical program for `δ(λ)`.
pub fn build_delta_lp(lambda: f64) -> Result<LpProblem> {
    build_delta_lp_with(lambda, &LpOptions::default())
}

pub fn build_delta_lp_with(lambda: f64, opts: &LpOptions) -> Result<LpProblem> {
    check_lambda(lambda)?;
    if opts.y_index > 1 || opts.chsh_z > 1 {
        return Err(Error::Dimension("setting index must be 0 or 1".into()));
    }
    if let Aggregation::Setting { x, z } = opts.aggregation {
        if x > 1 || z > 1 {
            return Err(Error::Dimension("setting index must be 0 or 1".into()));
        }
    }
    let mut lp = LpProblem::new(NUM_VARS);
    lp.set_objective(DELTA_INDEX, 1.0);

    // ω: normalization and no-signalling.
    for (x, y, z) in settings3() {
        let row: Vec<_> = outcomes3().map(|(a, b, c)| (omega_index(a, b, c, x, y, z), 1.0)).collect();
        lp.add_eq(&row, 1.0);
    }
    for (u, v, s, t) in quads() {
        let mut from_a = Vec::new();
        let mut from_b = Vec::new();
        let mut from_c = Vec::new();
        for &k in &BITS {
            from_a.push((omega_index(k, u, v, 0, s, t), 1.0));
            from_a.push((omega_index(k, u, v, 1, s, t), -1.0));
            from_b.push((omega_index(u, k, v, s, 0, t), 1.0));
            from_b.push((omega_index(u, k, v, s, 1, t), -1.0));
            from_c.push((omega_index(u, v, k, s, t, 0), 1.0));
            from_c.push((omega_index(u, v, k, s, t, 1), -1.0));
        }
        lp.add_eq(&from_a, 0.0);
        lp.add_eq(&from_b, 0.0);
        lp.add_eq(&from_c, 0.0);
    }

    // CHSH winning probability at least λ.
    let mut chsh = Vec::new();
    for (x, y) in settings2() {
        for (a, b, c) in outcomes3() {
            if a ^ b == x & y {
                chsh.push((omega_index(a, b, c, x, y, opts.chsh_z), 0.25));
            }
        }
    }
    lp.add_ge(&chsh, lambda);

    // ψ: normalization, no-signalling, perfect correlation at x = z.
    for (x, z) in settings2() {
        let row: Vec<_> = settings2().map(|(a, c)| (psi_index(a, c, x, z), 1.0)).collect();
        lp.add_eq(&row, 1.0);
    }
    for (u, s) in settings2() {
        let mut from_a = Vec::new();
        let mut from_c = Vec::new();
        for &k in &BITS {
            from_a.push((psi_index(k, u, 0, s), 1.0));
            from_a.push((psi_index(k, u, 1, s), -1.0));
            from_c.push((psi_index(u, k, s, 0), 1.0));
            from_c.push((psi_index(u, k, s, 1), -1.0));
        }
        lp.add_eq(&from_a, 0.0);
        lp.add_eq(&from_c, 0.0);
    }
    for &x in &BITS {
        lp.add_eq(&[(psi_index(0, 0, x, x), 1.0), (psi_index(1, 1, x, x), 1.0)], 1.0);
    }

    // δ_ac^xz >= ±(ψ - Σ_b ω) / 2.
    for (a, c) in settings2() {
        for (x, z) in settings2() {
            let d = delta_ac_index(a, c, x, z);
            for sign in [1.0, -1.0] {
                let mut row = vec![(d, 1.0), (psi_index(a, c, x, z), -0.5 * sign)];
                for &b in &BITS {
                    row.push((omega_index(a, b, c, x, opts.y_index, z), 0.5 * sign));
                }
                lp.add_ge(&row, 0.0);
            }
        }
    }

    // δ >= Σ_ac δ_ac^xz.
    for (x, z) in settings2() {
        if let Aggregation::Setting { x: sx, z: sz } = opts.aggregation {
            if (x, z) != (sx, sz) {
                continue;
            }
        }
        let mut row = vec![(DELTA_INDEX, 1.0)];
        row.extend(settings2().map(|(a, c)| (delta_ac_index(a, c, x, z), -1.0)));
        lp.add_ge(&row, 0.0);
    }
    Ok(lp)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSolution {
    pub lambda: f64,
    pub delta: f64,
    pub omega: Vec<f64>,
    pub psi: Vec<f64>,
    pub max_constraint_residual: f64,
}

impl DeltaSolution {
    pub fn omega_dist(&self) -> Result<NsDist3> {
        NsDist3::new(self.omega.clone())
    }

    pub fn psi_dist(&self) -> Result<NsDist2> {
        NsDist2::new(self.psi.clone())
    }
}

pub fn solve_delta_lp(lambda: f64, opts: &LpOptions) -> Result<DeltaSolution> {
    let lp = build_delta_lp_with(lambda, opts)?;
    let sol = lp_solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    Ok(DeltaSolution {
        lambda,
        // Round-off can leave the optimum a hair below zero.
        delta: sol.value.max(0.0),
        omega: sol.assignment[..PSI_OFFSET].to_vec(),
        psi: sol.assignment[PSI_OFFSET..DELTA_AC_OFFSET].to_vec(),
        max_constraint_residual: sol.max_constraint_residual,
    })
}

/// `δ(λ)`: optimal value of [`build_delta_lp`].
pub fn delta_of_lambda(lambda: f64) -> Result<f64> {
    Ok(solve_delta_lp(lambda, &LpOptions::default())?.delta)
}

/// The variant in which `δ` only has to dominate the distance at one
/// setting pair, minimized over the four pairs.
pub fn delta_min_over_settings(lambda: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for (x, z) in settings2() {
        let opts = LpOptions {
            aggregation: Aggregation::Setting { x, z },
            ..LpOptions::default()
        };
        best = best.min(solve_delta_lp(lambda, &opts)?.delta);
    }
    Ok(best)
}

/// `Dec(A|E) <= 2^{-δ(λ)^2}`.
pub fn gpt_dec_bound(lambda: f64) -> Result<f64> {
    let d = delta_of_lambda(lambda)?;
    Ok((-d * d).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// `ω` with `c = a`, `b` uniform, independent of all settings, and
    /// `ψ` its `AC` marginal.
    fn copy_point() -> Vec<f64> {
        let mut x = vec![0.0; NUM_VARS];
        for (a, b, c) in outcomes3() {
            for (s, t, u) in settings3() {
                x[omega_index(a, b, c, s, t, u)] = if a == c { 0.25 } else { 0.0 };
            }
        }
        for (a, c) in settings2() {
            for (s, u) in settings2() {
                x[psi_index(a, c, s, u)] = if a == c { 0.5 } else { 0.0 };
            }
        }
        x
    }

    #[test]
    fn fidelity_and_distance() {
        let p = [0.2, 0.3, 0.5];
        assert_abs_diff_eq!(classical_fidelity(&p, &p).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(classical_fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            classical_fidelity(&[0.5, 0.5], &[1.0, 0.0]).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(tv_distance(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), 0.5);
        assert!(tv_distance(&[0.5, 0.5], &[1.0]).is_err());
        assert!(classical_fidelity(&[0.5, 0.6], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn lambda_map() {
        assert_eq!(lambda_from_beta(2.0).unwrap(), 0.75);
        assert_eq!(lambda_from_beta(4.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            lambda_from_beta(2.0 * 2f64.sqrt()).unwrap(),
            (4.0 + 2.0 * 2f64.sqrt()) / 8.0,
            epsilon = 1e-15
        );
        assert!(lambda_from_beta(4.5).is_err());
    }

    #[test]
    fn program_shape() {
        let lp = build_delta_lp(0.8).unwrap();
        assert_eq!(lp.num_vars(), 97);
        let chsh = lp
            .ineq_rows()
            .iter()
            .find(|(_, _, rhs)| *rhs == 0.8)
            .expect("CHSH row");
        for (x, y) in settings2() {
            for (a, b, c) in outcomes3() {
                for z in BITS {
                    let coef = chsh.0[omega_index(a, b, c, x, y, z)];
                    let expected = if z == 0 && a ^ b == x & y { 0.25 } else { 0.0 };
                    assert_eq!(coef, expected);
                }
            }
        }
        assert!(build_delta_lp(1.5).is_err());
    }

    #[test]
    fn explicit_feasible_point_at_zero() {
        let lp = build_delta_lp(0.0).unwrap();
        let x = copy_point();
        assert!(lp.max_residual(&x) <= 1e-15);
        assert_eq!(lp.evaluate(&x), 0.0);
        let w = NsDist3::new(x[..64].to_vec()).unwrap();
        assert_eq!(w.chsh_winning_probability(0), 0.5);
        assert!(NsDist2::new(x[64..80].to_vec()).unwrap().is_perfectly_correlated(0.0));
    }

    #[test]
    fn distribution_validation() {
        let x = copy_point();
        let mut bad = x[..64].to_vec();
        // Make Alice's marginal depend on Bob's setting.
        bad[omega_index(0, 0, 0, 0, 1, 0)] += 0.25;
        bad[omega_index(1, 0, 1, 0, 1, 0)] -= 0.25;
        assert!(NsDist3::new(bad).is_err());
        assert!(NsDist3::new(vec![0.0; 10]).is_err());
        let w = NsDist3::new(x[..64].to_vec()).unwrap();
        assert_eq!(w.marginal_ac(1).entries(), &x[64..80]);
    }

    #[test]
    fn classical_threshold() {
        for lambda in [0.5, 0.7, 0.75] {
            assert!(delta_of_lambda(lambda).unwrap().abs() <= 1e-9);
            assert_eq!(gpt_dec_bound(lambda).unwrap(), 1.0);
        }
        assert!(delta_of_lambda(0.76).unwrap() > 1e-6);
        assert!(gpt_dec_bound(0.8).unwrap() < 1.0);
    }

    #[test]
    fn optimum_is_a_valid_box_pair() {
        let sol = solve_delta_lp(0.85, &LpOptions::default()).unwrap();
        assert!(sol.max_constraint_residual <= 1e-9);
        let w = sol.omega_dist().unwrap();
        assert!(w.chsh_winning_probability(0) >= 0.85 - 1e-9);
        assert!(sol.psi_dist().unwrap().is_perfectly_correlated(1e-9));
    }
}
