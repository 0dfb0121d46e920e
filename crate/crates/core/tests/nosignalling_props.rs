use decobound::lp::{lp_solve, LpProblem, LpStatus};
use decobound::nosignalling::*;
use decobound::sampling::random_distribution;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> Vec<f64> {
    (0..33).map(|k| k as f64 / 32.0).collect()
}

#[test]
fn delta_is_monotone_and_convex() {
    let lambdas = grid();
    let deltas: Vec<f64> = lambdas.iter().map(|&l| delta_of_lambda(l).unwrap()).collect();
    for (l, d) in lambdas.iter().zip(&deltas) {
        assert!((0.0..=0.5 + 1e-9).contains(d), "δ({l}) = {d}");
        if *l <= 0.75 {
            assert!(d.abs() <= 1e-9, "δ({l}) = {d}");
        } else if *l >= 0.76 {
            assert!(*d > 1e-6);
        }
    }
    for w in deltas.windows(2) {
        assert!(w[1] >= w[0] - 1e-9);
    }
    for w in deltas.windows(3) {
        assert!(w[1] <= 0.5 * (w[0] + w[2]) + 1e-8);
    }
}

/// At λ = 1 the `AB` marginal is a PR box, and monogamy forces `C` to be
/// independent of `A`: `Pr[a,c|x,z] = q(c|z) / 2`. Against a perfectly
/// correlated `ψ` with `Pr[0,0|x,x] = r`, the distance at `x = z` is
/// minimized by brute force over `(q, r)`.
fn monogamy_oracle() -> f64 {
    let n = 400;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let q = i as f64 / n as f64;
        for j in 0..=n {
            let r = j as f64 / n as f64;
            let omega_ac = [0.5 * q, 0.5 * (1.0 - q), 0.5 * q, 0.5 * (1.0 - q)];
            let psi = [r, 0.0, 0.0, 1.0 - r];
            best = best.min(tv_distance(&psi, &omega_ac).unwrap());
        }
    }
    best
}

#[test]
fn delta_at_one_matches_monogamy() {
    let oracle = monogamy_oracle();
    assert!((oracle - 0.5).abs() < 1e-12);
    let sol = solve_delta_lp(1.0, &LpOptions::default()).unwrap();
    assert!((sol.delta - oracle).abs() <= 1e-9, "δ(1) = {}", sol.delta);
    // The optimizer's AC marginal factorizes, as monogamy requires.
    let w = sol.omega_dist().unwrap();
    let ac = w.marginal_ac(0);
    for x in 0..2 {
        for z in 0..2 {
            let o = ac.outcomes(x, z);
            let pa = o[0] + o[1];
            let pc = o[0] + o[2];
            assert!((o[0] - pa * pc).abs() <= 1e-7);
        }
    }
    let bound = gpt_dec_bound(1.0).unwrap();
    assert!((bound - (-0.25f64).exp2()).abs() <= 1e-9);
}

#[test]
fn setting_variants_agree() {
    for lambda in [0.6, 0.8, 0.85, 0.9, 1.0] {
        let base = delta_of_lambda(lambda).unwrap();
        for (y_index, chsh_z) in [(1, 0), (0, 1), (1, 1)] {
            let opts = LpOptions {
                y_index,
                chsh_z,
                ..LpOptions::default()
            };
            let v = solve_delta_lp(lambda, &opts).unwrap().delta;
            assert!((v - base).abs() <= 1e-9, "λ = {lambda}: {v} vs {base}");
        }
        // Dominating one setting pair is a relaxation of dominating all.
        let relaxed = delta_min_over_settings(lambda).unwrap();
        assert!(relaxed <= base + 1e-9);
    }
}

#[test]
fn gpt_bound_above_quantum_bound() {
    use decobound::bound::{dec_bound_quantum, TSIRELSON};
    for k in 1..40 {
        let beta = 2.0 + (TSIRELSON - 2.0) * k as f64 / 40.0;
        let gpt = gpt_dec_bound(lambda_from_beta(beta).unwrap()).unwrap();
        assert!(gpt >= dec_bound_quantum(beta).unwrap());
    }
}

#[test]
fn classical_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let n = rng.random_range(2..8);
        let p = random_distribution(&mut rng, n);
        let q = random_distribution(&mut rng, n);
        let b = classical_fidelity(&p, &q).unwrap();
        let d = tv_distance(&p, &q).unwrap();
        assert!((0.0..=1.0).contains(&b) && (0.0..=1.0).contains(&d));
        assert!(2.0 * (1.0 - b) >= d * d - 1e-15);
    }
    for k in 1..=1000 {
        let x = k as f64 * 1e-3;
        assert!(-(x * x).log2() >= 2.0 * (1.0 - x) - 1e-15);
    }
}

/// Brute force: min c·x over {x >= 0, A x <= b} by trying every set of
/// `n` active constraints.
fn vertex_enumeration(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = c.len();
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = -1.0;
        rows.push((e, 0.0));
    }
    let m = rows.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let active: Vec<_> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let mat = DMatrix::from_fn(n, n, |i, j| rows[active[i]].0[j]);
        let rhs = DVector::from_fn(n, |i, _| rows[active[i]].1);
        let Some(x) = mat.lu().solve(&rhs) else { continue };
        if rows.iter().all(|(r, bi)| r.iter().zip(x.iter()).map(|(u, v)| u * v).sum::<f64>() <= bi + 1e-9) {
            let v: f64 = c.iter().zip(x.iter()).map(|(u, v)| u * v).sum();
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(2..=4);
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut a: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mut b: Vec<f64> = (0..m).map(|_| rng.random_range(-0.5..1.0)).collect();
        // A box keeps every instance bounded; some stay infeasible.
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            a.push(e);
            b.push(2.0);
        }
        let mut lp = LpProblem::new(n);
        for (i, ci) in c.iter().enumerate() {
            lp.set_objective(i, *ci);
        }
        for (row, bi) in a.iter().zip(&b) {
            let terms: Vec<_> = row.iter().copied().enumerate().collect();
            lp.add_le(&terms, *bi);
        }
        let sol = lp_solve(&lp).unwrap();
        match vertex_enumeration(&c, &a, &b) {
            Some(v) => {
                assert_eq!(sol.status, LpStatus::Optimal);
                assert!((sol.value - v).abs() <= 1e-8, "{} vs {v}", sol.value);
            }
            None => assert_eq!(sol.status, LpStatus::Infeasible),
        }
    }
}
