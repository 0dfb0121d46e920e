//! Acceptance suite: one PASS/FAIL line per criterion, each with its
//! tolerance and wall-clock budget. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use decobound::bellsim::{simulate_runs, BetaEstimate};
use decobound::bound::{dec_bound_quantum, f_of_v, optimal_bell_diagonal_state, TSIRELSON};
use decobound::entropy::{dec_quantum, hmax_bell_diagonal, hmax_numeric_oracle, sdp_certificates_check};
use decobound::nosignalling::{classical_fidelity, delta_of_lambda, gpt_dec_bound, lambda_from_beta, tv_distance};
use decobound::optomech::{Material, Model, OptomechParams};
use decobound::quantum::{beta_max, chsh_value, ChshMeasurementSet, TwoQubitState};
use decobound::sampling::{random_bell_diagonal, random_bell_diagonal_with_zeros, random_distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

/// Runs `body` and folds the wall-clock budget into the verdict.
fn criterion(id: u32, name: &str, budget: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let in_budget = budget.is_none_or(|b| elapsed < b);
    let passed = out.passed && in_budget;
    let budget_note = match budget {
        Some(b) if !in_budget => format!("; over budget {elapsed:.3?} > {b:?}"),
        Some(b) => format!("; {elapsed:.3?} < {b:?}"),
        None => format!("; {elapsed:.3?}"),
    };
    println!(
        "{} criterion {id}: {name} — {}{budget_note}",
        if passed { "PASS" } else { "FAIL" },
        out.detail
    );
    passed
}

fn c1_endpoints() -> Outcome {
    let at_tsirelson = dec_bound_quantum(TSIRELSON).unwrap();
    let classical = [2.0, 1.9, 0.0, 2.0 - 1e-12]
        .iter()
        .all(|&b| dec_bound_quantum(b).unwrap() == 1.0);
    let f_end = f_of_v(TSIRELSON).unwrap();
    let ok = (at_tsirelson - 0.25).abs() <= 1e-9 && classical && (f_end - 1.0).abs() <= 1e-9;
    Outcome::new(
        ok,
        format!("Dec(2√2) = {at_tsirelson:.12}, Dec(β ≤ 2) = 1: {classical}, f(2√2) = {f_end:.12}"),
    )
}

fn c2_tightness() -> Outcome {
    let mut worst_beta = 0.0f64;
    let mut worst_dec = 0.0f64;
    for k in 1..=20 {
        let beta = 2.0 + (TSIRELSON - 2.0) * k as f64 / 20.0;
        let s = optimal_bell_diagonal_state(beta).unwrap();
        worst_beta = worst_beta.max((beta_max(&s.to_state()) - beta).abs());
        let dec = dec_quantum(&s.probabilities()).unwrap();
        worst_dec = worst_dec.max((dec - dec_bound_quantum(beta).unwrap()).abs());
    }
    Outcome::new(
        worst_beta <= 1e-9 && worst_dec <= 1e-7,
        format!("20 states, max |β_max − β| = {worst_beta:.2e} (≤ 1e-9), max |Dec − bound| = {worst_dec:.2e} (≤ 1e-7)"),
    )
}

fn c3_converse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let s = random_bell_diagonal_with_zeros(&mut rng);
        let beta = beta_max(&s.to_state()).min(TSIRELSON);
        let excess = dec_quantum(&s.probabilities()).unwrap() - dec_bound_quantum(beta).unwrap();
        worst = worst.max(excess);
    }
    Outcome::new(
        worst <= 1e-9,
        format!("200 states, max (Dec − bound) = {worst:.2e} (≤ 1e-9)"),
    )
}

fn c4_entropy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_oracle = 0.0f64;
    for _ in 0..50 {
        let s = random_bell_diagonal(&mut rng);
        let closed = hmax_bell_diagonal(&s.probabilities(), 2).unwrap();
        let numeric = hmax_numeric_oracle(&s.to_state()).unwrap();
        worst_oracle = worst_oracle.max((numeric - closed).abs());
    }
    let mut worst_cert = 0.0f64;
    let mut all_constraints = true;
    for _ in 0..100 {
        let p = random_bell_diagonal_with_zeros(&mut rng).probabilities();
        let expected = 0.5 * p.iter().map(|v| v.sqrt()).sum::<f64>().powi(2);
        let r = sdp_certificates_check(&p).unwrap();
        all_constraints &= r.passed();
        worst_cert = worst_cert
            .max((r.primal_value - expected).abs())
            .max((r.dual_value - expected).abs());
    }
    Outcome::new(
        worst_oracle <= 1e-6 && worst_cert <= 1e-10 && all_constraints,
        format!(
            "oracle max dev {worst_oracle:.2e} (≤ 1e-6) on 50 states; certificates max dev {worst_cert:.2e} (≤ 1e-10), constraints ok: {all_constraints} on 100 states"
        ),
    )
}

fn c5_lp_threshold() -> Outcome {
    let zeros: Vec<f64> = [0.5, 0.7, 0.75].iter().map(|&l| delta_of_lambda(l).unwrap()).collect();
    let above = delta_of_lambda(0.76).unwrap();
    let grid: Vec<f64> = (0..33).map(|k| 0.5 + 0.5 * k as f64 / 32.0).collect();
    let deltas: Vec<f64> = grid.iter().map(|&l| delta_of_lambda(l).unwrap()).collect();
    let monotone = deltas.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let convex = deltas.windows(3).all(|w| w[1] <= 0.5 * (w[0] + w[2]) + 1e-9);
    let exact_zero = zeros.iter().all(|d| d.abs() <= 1e-12);
    Outcome::new(
        exact_zero && above > 1e-6 && monotone && convex,
        format!(
            "δ(0.5, 0.7, 0.75) = {zeros:?}, δ(0.76) = {above:.3e}, monotone {monotone}, convex {convex} on 33 points of [0.5, 1]"
        ),
    )
}

fn c6_ordering() -> Outcome {
    let n = 64;
    let mut worst = f64::INFINITY;
    for k in 1..n {
        let beta = 2.0 + (TSIRELSON - 2.0) * k as f64 / n as f64;
        let gpt = gpt_dec_bound(lambda_from_beta(beta).unwrap()).unwrap();
        worst = worst.min(gpt - dec_bound_quantum(beta).unwrap());
    }
    Outcome::new(worst >= 0.0, format!("min (GPT − quantum) over {} interior β = {worst:.4}", n - 1))
}

fn c7_optomech() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (material, target) in [(Material::Aluminum, 0.1), (Material::Rhenium, 0.2)] {
        let params = OptomechParams {
            temperature: 1e-9,
            ..OptomechParams::reference(material)
        };
        assert_eq!((params.g0, params.omega_m, params.gamma_m), (1.0, 1.0, 1e-10));
        let model = Model::with_codata(params).unwrap();
        let period = params.period();
        let mut drift = (period - 2.0 * PI).abs();
        for k in 0..64 {
            let t = 0.1 * k as f64;
            for grav in [true, false] {
                drift = drift
                    .max((model.dec_of_t(t + period, grav) - model.dec_of_t(t, grav)).abs())
                    .max((model.beta_mech(t + period, grav) - model.beta_mech(t, grav)).abs());
            }
        }
        let mut end_dev = 0.0f64;
        for t in [0.0, period] {
            end_dev = end_dev
                .max((model.dec_of_t(t, true) - 0.25).abs())
                .max((model.beta_mech(t, false) - TSIRELSON).abs());
        }
        let gap = model.optimal_time_default().map(|o| (o.gap, o.t_max));
        let gap_ok = matches!(gap, Ok((g, _)) if (g - target).abs() <= 0.05);
        ok &= drift <= 1e-9 && end_dev <= 1e-9 && gap_ok;
        notes.push(match gap {
            Ok((g, t)) => format!(
                "{}: period drift {drift:.1e}, endpoint dev {end_dev:.1e}, gap {g:.4} at t = {t:.5} s (want {target} ± 0.05{})",
                material.name(),
                if gap_ok { "" } else { ", OUT OF BAND" }
            ),
            Err(e) => format!("{}: {e}", material.name()),
        });
    }
    Outcome::new(ok, notes.join("; "))
}

fn c8_classical() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_pair = f64::INFINITY;
    for _ in 0..500 {
        let n = rng.random_range(2..=8);
        let p = random_distribution(&mut rng, n);
        let q = random_distribution(&mut rng, n);
        let b = classical_fidelity(&p, &q).unwrap();
        let d = tv_distance(&p, &q).unwrap();
        worst_pair = worst_pair.min(2.0 * (1.0 - b) - d * d);
    }
    let mut worst_log = f64::INFINITY;
    for k in 1..=1000 {
        let x = k as f64 * 1e-3;
        worst_log = worst_log.min(-(x * x).log2() - 2.0 * (1.0 - x));
    }
    Outcome::new(
        worst_pair >= -1e-15 && worst_log >= -1e-15,
        format!("min 2(1−b) − d² = {worst_pair:.2e} on 500 pairs; min −log(x²) − 2(1−x) = {worst_log:.2e} on 1000 points"),
    )
}

fn c9_monte_carlo() -> Outcome {
    let rho = TwoQubitState::canonical_entangled();
    let m = ChshMeasurementSet::standard();
    let exact = chsh_value(&rho, &m);
    let runs = simulate_runs(&rho, &m, 1_000_000, 1, 100).unwrap();
    let covered = runs.iter().filter(|r| r.contains(TSIRELSON)).count();
    let pooled = BetaEstimate::pooled(&runs).unwrap();
    let dec = pooled.dec_bound_point();
    Outcome::new(
        covered >= 99 && (dec - 0.25).abs() <= 0.02 && (exact - TSIRELSON).abs() < 1e-12,
        format!(
            "{covered}/100 runs cover 2√2 (radius {:.4}); pooled β̂ = {:.6}, Dec bound {dec:.5} (want 0.25 ± 0.02)",
            runs[0].confidence_radius, pooled.beta_hat
        ),
    )
}

fn run_cli(dir: &Path, tag: &str, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = dir.join(format!("{tag}.out"));
    let status = Command::new(env!("CARGO_BIN_EXE_decobound"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .env_remove("DECOBOUND_CONFIG")
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("{args:?} exited with {status}"));
    }
    let mut bytes = std::fs::read(&out).map_err(|e| e.to_string())?;
    // Extra CSV tables land next to the main output.
    let mut siblings: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with(&format!("{tag}.out.")))
        .collect();
    siblings.sort();
    for s in siblings {
        bytes.extend(std::fs::read(s).unwrap());
    }
    Ok(bytes)
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut errors = Vec::new();
    let mut compared = 0;
    for cmd in ["region", "channels", "optomech", "simulate", "certify"] {
        for format in ["csv", "json"] {
            let args = [cmd, "--format", format, "--seed", "11"];
            let a = run_cli(dir.path(), &format!("{cmd}-{format}-a"), &args);
            let b = run_cli(dir.path(), &format!("{cmd}-{format}-b"), &args);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    compared += 1;
                    if a != b {
                        differing.push(format!("{cmd}/{format}"));
                    }
                }
                (Err(e), _) | (_, Err(e)) => errors.push(e),
            }
        }
    }
    Outcome::new(
        differing.is_empty() && errors.is_empty(),
        format!("{compared} command/format pairs byte-identical across two runs; differing {differing:?}; errors {errors:?}"),
    )
}

fn main() {
    let ms = Duration::from_millis;
    let results = [
        criterion(1, "quantum bound endpoints", Some(ms(1)), c1_endpoints),
        criterion(2, "tightness suite", Some(ms(1000)), c2_tightness),
        criterion(3, "converse suite", Some(ms(1000)), c3_converse),
        criterion(4, "entropy oracle and SDP certificates", Some(ms(30_000)), c4_entropy),
        criterion(5, "no-signalling LP threshold", Some(ms(10_000)), c5_lp_threshold),
        criterion(6, "cross-theory ordering", Some(ms(10_000)), c6_ordering),
        criterion(7, "optomechanical reproduction", Some(ms(5_000)), c7_optomech),
        criterion(8, "classical-relation properties", Some(ms(1000)), c8_classical),
        criterion(9, "Monte-Carlo pipeline", Some(ms(60_000)), c9_monte_carlo),
        criterion(10, "CLI determinism", None, c10_determinism),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
