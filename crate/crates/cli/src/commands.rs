use decobound::bellsim::{simulate_runs, BetaEstimate};
use decobound::bound::{dec_bound_quantum, optimal_bell_diagonal_state, TSIRELSON};
use decobound::entropy::{dec_quantum, hmax_bell_diagonal, hmax_numeric_oracle, sdp_certificates_check};
use decobound::nosignalling::{delta_min_over_settings, delta_of_lambda, lambda_from_beta};
use decobound::optomech::{Model, OptimalTime, MIN_GRID};
use decobound::quantum::{
    beta_max, chsh_value, dephasing, depolarizing, twirl, Axis, BellDiagonalState,
    ChshMeasurementSet, TwoQubitState,
};
use decobound::sampling::{random_bell_diagonal, random_bell_diagonal_with_zeros};
use decobound::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::output::{num, opt, Report, Table};
use crate::CliError;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn gpt_bound(delta: f64) -> f64 {
    (-delta * delta).exp2()
}

#[derive(Serialize)]
struct RegionRow {
    beta: f64,
    lambda: f64,
    dec_bound_quantum: Option<f64>,
    delta: f64,
    gpt_dec_bound: f64,
    delta_min_settings: f64,
    gpt_dec_bound_min_settings: f64,
}

#[derive(Serialize)]
struct RegionBody {
    rows: Vec<RegionRow>,
}

/// Quantum and no-signalling bounds over β ∈ [2, 4].
pub fn region(grid: usize) -> Result<Report, CliError> {
    let mut rows = Vec::with_capacity(grid);
    for beta in linspace(2.0, 4.0, grid) {
        let lambda = lambda_from_beta(beta)?;
        let dec_q = if beta <= TSIRELSON + 1e-12 {
            Some(dec_bound_quantum(beta)?)
        } else {
            None
        };
        let delta = delta_of_lambda(lambda)?;
        let delta_min = delta_min_over_settings(lambda)?;
        rows.push(RegionRow {
            beta,
            lambda,
            dec_bound_quantum: dec_q,
            delta,
            gpt_dec_bound: gpt_bound(delta),
            delta_min_settings: delta_min,
            gpt_dec_bound_min_settings: gpt_bound(delta_min),
        });
    }
    let mut table = Table::new(
        "region",
        &[
            "beta",
            "lambda",
            "dec_bound_quantum",
            "delta",
            "gpt_dec_bound",
            "delta_min_settings",
            "gpt_dec_bound_min_settings",
        ],
    );
    for r in &rows {
        table.push(vec![
            num(r.beta),
            num(r.lambda),
            opt(r.dec_bound_quantum),
            num(r.delta),
            num(r.gpt_dec_bound),
            num(r.delta_min_settings),
            num(r.gpt_dec_bound_min_settings),
        ]);
    }
    Ok(Report::new("region", &RegionBody { rows }, vec![table]))
}

#[derive(Serialize)]
struct ChannelRow {
    channel: &'static str,
    noise: f64,
    channel_parameter: f64,
    beta: f64,
    dec: f64,
    dec_bound_quantum: f64,
}

#[derive(Serialize)]
struct ChannelsBody {
    rows: Vec<ChannelRow>,
}

/// Noisy copies of the canonical entangled state, with Bob's qubit sent
/// through depolarizing or z-dephasing noise. For dephasing the noise level
/// `n` maps to `Γ(ρ) = (1 - n/2) ρ + (n/2) ZρZ`, so `n = 1` dephases fully.
pub fn channels(grid: usize) -> Result<Report, CliError> {
    let rho = TwoQubitState::canonical_entangled();
    let standard = ChshMeasurementSet::standard();
    let mut rows = Vec::new();
    let dec_of = |s: &TwoQubitState| dec_quantum(&twirl(s).probabilities());
    for noise in linspace(0.0, 1.0, grid) {
        let depol = depolarizing(&rho, noise)?;
        let beta = chsh_value(&depol, &standard);
        rows.push(("depolarizing-standard", noise, noise, beta, dec_of(&depol)?));
    }
    for noise in linspace(0.0, 1.0, grid) {
        let p = 1.0 - noise / 2.0;
        let deph = dephasing(&rho, p, Axis::Z)?;
        let dec = dec_of(&deph)?;
        rows.push(("dephasing-standard", noise, p, chsh_value(&deph, &standard), dec));
    }
    for noise in linspace(0.0, 1.0, grid) {
        let p = 1.0 - noise / 2.0;
        let deph = dephasing(&rho, p, Axis::Z)?;
        let dec = dec_of(&deph)?;
        rows.push(("dephasing-optimal", noise, p, beta_max(&deph), dec));
    }
    let rows = rows
        .into_iter()
        .map(|(channel, noise, channel_parameter, beta, dec)| {
            // Round-off can put the noiseless point a hair above 2√2.
            let beta = beta.clamp(-4.0, TSIRELSON);
            Ok(ChannelRow {
                channel,
                noise,
                channel_parameter,
                beta,
                dec,
                dec_bound_quantum: dec_bound_quantum(beta.max(0.0))?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut table = Table::new(
        "channels",
        &["channel", "noise", "channel_parameter", "beta", "dec", "dec_bound_quantum"],
    );
    for r in &rows {
        table.push(vec![
            r.channel.to_string(),
            num(r.noise),
            num(r.channel_parameter),
            num(r.beta),
            num(r.dec),
            num(r.dec_bound_quantum),
        ]);
    }
    Ok(Report::new("channels", &ChannelsBody { rows }, vec![table]))
}

#[derive(Serialize)]
struct Summary {
    status: &'static str,
    t_max: Option<f64>,
    gap: Option<f64>,
    beta_mech: Option<f64>,
    beta_fals: Option<f64>,
    dec_grav: Option<f64>,
}

impl Summary {
    fn found(o: &OptimalTime) -> Self {
        Summary {
            status: "ok",
            t_max: Some(o.t_max),
            gap: Some(o.gap),
            beta_mech: Some(o.beta_mech),
            beta_fals: Some(o.beta_fals),
            dec_grav: Some(o.dec_grav),
        }
    }

    fn none() -> Self {
        Summary {
            status: "no_positive_gap",
            t_max: None,
            gap: None,
            beta_mech: None,
            beta_fals: None,
            dec_grav: None,
        }
    }
}

#[derive(Serialize)]
struct OptomechCaseBody {
    material: String,
    density: f64,
    temperature: f64,
    g0: f64,
    omega_m: f64,
    gamma_m: f64,
    lambda_grav: f64,
    lambda_heat: f64,
    nbar_with_gravity: f64,
    nbar_heat_only: f64,
    summary: Summary,
    curve: decobound::optomech::DecoherenceCurve,
}

#[derive(Serialize)]
struct OptomechBody {
    constants: decobound::optomech::PhysicalConstants,
    cases: Vec<OptomechCaseBody>,
}

/// Curves over one mechanical period and the best measurement time, per
/// configured (material, temperature).
pub fn optomech(cfg: &Config, grid: usize) -> Result<Report, CliError> {
    let mut cases = Vec::new();
    for case in cfg.optomech_cases() {
        let model = Model::new(case.params, cfg.constants)?;
        let period = case.params.period();
        let times = linspace(0.0, period, grid);
        let curve = model.curve(&times)?;
        let summary = match model.optimal_time((0.0, period), grid.max(MIN_GRID)) {
            Ok(o) => Summary::found(&o),
            Err(Error::NoPositiveGap { .. }) => Summary::none(),
            Err(e) => return Err(e.into()),
        };
        cases.push(OptomechCaseBody {
            material: case.material,
            density: case.params.density,
            temperature: case.params.temperature,
            g0: case.params.g0,
            omega_m: case.params.omega_m,
            gamma_m: case.params.gamma_m,
            lambda_grav: model.lambda_grav(),
            lambda_heat: model.lambda_heat(),
            nbar_with_gravity: model.nbar(true),
            nbar_heat_only: model.nbar(false),
            summary,
            curve,
        });
    }
    let mut curves = Table::new(
        "curves",
        &[
            "material",
            "density",
            "temperature",
            "t",
            "dec_grav",
            "dec_heat",
            "beta_mech",
            "beta_mech_optimal",
            "beta_fals",
            "gap",
        ],
    );
    let mut summary = Table::new(
        "summary",
        &["material", "density", "temperature", "status", "t_max", "gap", "beta_mech", "beta_fals", "dec_grav"],
    );
    for c in &cases {
        let k = &c.curve;
        for i in 0..k.times.len() {
            curves.push(vec![
                c.material.clone(),
                num(c.density),
                num(c.temperature),
                num(k.times[i]),
                num(k.dec_grav[i]),
                num(k.dec_heat[i]),
                num(k.beta_mech[i]),
                num(k.beta_mech_optimal[i]),
                opt(k.beta_fals[i]),
                opt(k.gap[i]),
            ]);
        }
        let s = &c.summary;
        summary.push(vec![
            c.material.clone(),
            num(c.density),
            num(c.temperature),
            s.status.to_string(),
            opt(s.t_max),
            opt(s.gap),
            opt(s.beta_mech),
            opt(s.beta_fals),
            opt(s.dec_grav),
        ]);
    }
    let body = OptomechBody {
        constants: cfg.constants,
        cases,
    };
    Ok(Report::new("optomech", &body, vec![curves, summary]))
}

#[derive(Serialize)]
struct RunRow {
    run: u64,
    #[serde(flatten)]
    estimate: BetaEstimate,
    covers_exact: bool,
    dec_bound_point: f64,
    dec_bound_conservative: f64,
}

#[derive(Serialize)]
struct SimulateBody {
    seed: u64,
    rounds_per_run: u64,
    bell_weights: [f64; 4],
    exact_beta: f64,
    exact_dec_bound: f64,
    runs: Vec<RunRow>,
    coverage: u64,
    pooled: RunRow,
}

const COUNT_COLUMNS: [&str; 16] = [
    "n_x0y0_a0b0", "n_x0y0_a0b1", "n_x0y0_a1b0", "n_x0y0_a1b1",
    "n_x0y1_a0b0", "n_x0y1_a0b1", "n_x0y1_a1b0", "n_x0y1_a1b1",
    "n_x1y0_a0b0", "n_x1y0_a0b1", "n_x1y0_a1b0", "n_x1y0_a1b1",
    "n_x1y1_a0b0", "n_x1y1_a0b1", "n_x1y1_a1b0", "n_x1y1_a1b1",
];

/// Repeated finite-statistics CHSH runs with the standard measurements.
/// Run `k` uses stream `k` of the seeded generator; the last row pools all
/// rounds.
pub fn simulate(cfg: &Config, seed: u64) -> Result<Report, CliError> {
    let s = &cfg.simulate;
    let state = BellDiagonalState::new(s.bell_weights)?.to_state();
    let m = ChshMeasurementSet::standard();
    let exact = chsh_value(&state, &m);
    let runs = simulate_runs(&state, &m, s.rounds, seed, s.runs)?
        .into_iter()
        .map(|mut e| {
            e.confidence_level = s.confidence;
            e.confidence_radius = decobound::bellsim::hoeffding_radius(e.n_rounds, s.confidence);
            e
        })
        .collect::<Vec<_>>();
    let pooled = {
        let mut p = BetaEstimate::pooled(&runs)?;
        p.confidence_radius = decobound::bellsim::hoeffding_radius(p.n_rounds, s.confidence);
        p
    };
    let row = |run: u64, e: BetaEstimate| RunRow {
        run,
        covers_exact: e.contains(exact),
        dec_bound_point: e.dec_bound_point(),
        dec_bound_conservative: e.dec_bound_conservative(),
        estimate: e,
    };
    let rows: Vec<RunRow> = runs.into_iter().enumerate().map(|(k, e)| row(k as u64, e)).collect();
    let coverage = rows.iter().filter(|r| r.covers_exact).count() as u64;
    let body = SimulateBody {
        seed,
        rounds_per_run: s.rounds,
        bell_weights: s.bell_weights,
        exact_beta: exact,
        exact_dec_bound: dec_bound_quantum(exact.clamp(0.0, TSIRELSON))?,
        coverage,
        pooled: row(s.runs, pooled),
        runs: rows,
    };

    let mut header = vec![
        "run",
        "n_rounds",
        "beta_hat",
        "confidence_level",
        "confidence_radius",
        "covers_exact",
        "dec_bound_point",
        "dec_bound_conservative",
    ];
    header.extend(COUNT_COLUMNS);
    let mut table = Table::new("runs", &header);
    for r in body.runs.iter().chain(std::iter::once(&body.pooled)) {
        let label = if r.run == s.runs { "pooled".to_string() } else { r.run.to_string() };
        let e = &r.estimate;
        let mut cells = vec![
            label,
            e.n_rounds.to_string(),
            num(e.beta_hat),
            num(e.confidence_level),
            num(e.confidence_radius),
            r.covers_exact.to_string(),
            num(r.dec_bound_point),
            num(r.dec_bound_conservative),
        ];
        cells.extend(e.counts.iter().flatten().map(|c| c.to_string()));
        table.push(cells);
    }
    Ok(Report::new("simulate", &body, vec![table]))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub case: String,
    pub quantity: &'static str,
    pub value: f64,
    pub reference: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Serialize)]
struct CertifyBody {
    seed: u64,
    passed: bool,
    checks: Vec<Check>,
    failures: Vec<Check>,
}

fn check(suite: &'static str, case: String, quantity: &'static str, value: f64, reference: f64, deviation: f64, tolerance: f64) -> Check {
    Check {
        suite,
        case,
        quantity,
        value,
        reference,
        deviation,
        tolerance,
        passed: deviation <= tolerance,
    }
}

fn fmt_p(p: &[f64; 4]) -> String {
    format!("p=[{}, {}, {}, {}]", p[0], p[1], p[2], p[3])
}

/// Certificate and oracle battery. Returns the report and whether every
/// check passed.
pub fn certify(cfg: &Config, seed: u64) -> Result<(Report, bool), CliError> {
    let c = &cfg.certify;
    let t = &cfg.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut cert_states = vec![
        BellDiagonalState::pure(0),
        BellDiagonalState::uniform(),
        BellDiagonalState::new([0.5, 0.5, 0.0, 0.0])?,
    ];
    while cert_states.len() < c.certificate_states {
        cert_states.push(random_bell_diagonal_with_zeros(&mut rng));
    }
    cert_states.truncate(c.certificate_states);
    for (k, s) in cert_states.iter().enumerate() {
        let p = s.probabilities();
        let r = sdp_certificates_check(&p)?;
        let case = format!("{k}: {}", fmt_p(&p));
        let worst = r.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
        checks.push(check("sdp_certificate", case.clone(), "max_constraint_residual", worst, 0.0, worst, t.certificate));
        checks.push(check(
            "sdp_certificate",
            case.clone(),
            "primal_value",
            r.primal_value,
            r.closed_form,
            (r.primal_value - r.closed_form).abs(),
            t.certificate,
        ));
        checks.push(check(
            "sdp_certificate",
            case,
            "dual_value",
            r.dual_value,
            r.closed_form,
            (r.dual_value - r.closed_form).abs(),
            t.certificate,
        ));
    }

    for k in 0..c.oracle_states {
        let s = random_bell_diagonal(&mut rng);
        let p = s.probabilities();
        let closed = hmax_bell_diagonal(&p, 2)?;
        let numeric = hmax_numeric_oracle(&s.to_state())?;
        checks.push(check(
            "entropy_oracle",
            format!("{k}: {}", fmt_p(&p)),
            "hmax",
            numeric,
            closed,
            (numeric - closed).abs(),
            t.oracle,
        ));
    }

    for k in 0..c.bound_samples {
        let beta = 2.0 + (TSIRELSON - 2.0) * (k as f64 + 1.0) / c.bound_samples as f64;
        let s = optimal_bell_diagonal_state(beta)?;
        let case = format!("beta={beta}");
        let bm = beta_max(&s.to_state());
        checks.push(check("tightness", case.clone(), "beta_max", bm, beta, (bm - beta).abs(), 1e-9));
        let dec = dec_quantum(&s.probabilities())?;
        let bound = dec_bound_quantum(beta)?;
        checks.push(check("tightness", case, "dec", dec, bound, (dec - bound).abs(), t.tightness));
    }

    for k in 0..10 * c.bound_samples {
        let s = random_bell_diagonal_with_zeros(&mut rng);
        let p = s.probabilities();
        let beta = beta_max(&s.to_state()).min(TSIRELSON);
        let dec = dec_quantum(&p)?;
        let bound = dec_bound_quantum(beta)?;
        checks.push(check(
            "converse",
            format!("{k}: {}", fmt_p(&p)),
            "dec_minus_bound",
            dec,
            bound,
            (dec - bound).max(0.0),
            1e-9,
        ));
    }

    let failures: Vec<Check> = checks.iter().filter(|c| !c.passed).cloned().collect();
    let passed = failures.is_empty();
    let mut table = Table::new(
        "checks",
        &["suite", "case", "quantity", "value", "reference", "deviation", "tolerance", "passed"],
    );
    for c in &checks {
        table.push(vec![
            c.suite.to_string(),
            c.case.clone(),
            c.quantity.to_string(),
            num(c.value),
            num(c.reference),
            num(c.deviation),
            num(c.tolerance),
            c.passed.to_string(),
        ]);
    }
    let body = CertifyBody {
        seed,
        passed,
        checks,
        failures,
    };
    Ok((Report::new("certify", &body, vec![table]), passed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_endpoints() {
        let g = linspace(2.0, 4.0, 5);
        assert_eq!(g, vec![2.0, 2.5, 3.0, 3.5, 4.0]);
        assert_eq!(linspace(0.0, 2.0 * PI, 3)[2], 2.0 * PI);
    }

    #[test]
    fn region_rows() {
        let r = region(5).unwrap();
        let t = &r.tables[0];
        assert_eq!(t.rows.len(), 5);
        // β = 2: both bounds trivial; β > 2√2: quantum bound undefined.
        assert_eq!(t.rows[0][2], "1");
        assert_eq!(t.rows[0][4], "1");
        assert_eq!(t.rows[2][2], "NA");
        assert_eq!(t.rows[4][2], "NA");
    }

    #[test]
    fn channel_rows_respect_bound() {
        let r = channels(11).unwrap();
        let rows = &r.tables[0].rows;
        assert_eq!(rows.len(), 33);
        for row in rows {
            let dec: f64 = row[4].parse().unwrap();
            let bound: f64 = row[5].parse().unwrap();
            assert!(dec <= bound + 1e-9, "{row:?}");
            if row[1] == "0" {
                let beta: f64 = row[3].parse().unwrap();
                assert!((beta - TSIRELSON).abs() < 1e-12);
                assert!((dec - 0.25).abs() < 1e-12);
            }
        }
        let last_depol = &rows[10];
        assert_eq!(last_depol[0], "depolarizing-standard");
        assert!(last_depol[3].parse::<f64>().unwrap().abs() < 1e-12);
        assert!((last_depol[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
        for k in 0..11 {
            let std: f64 = rows[11 + k][3].parse().unwrap();
            let best: f64 = rows[22 + k][3].parse().unwrap();
            assert!(best >= std - 1e-12);
        }
    }
}
