//! Finite-statistics CHSH experiments.
//!
//! Each round draws uniform settings `x, y`, samples outcomes from the Born
//! rule, and contributes `Z = 4 s_xy (-1)^{a⊕b}` with `s_xy = -1` only for
//! `x = y = 1`. The estimate `β̂ = mean(Z)` is unbiased, and since
//! `Z ∈ [-4, 4]` Hoeffding's inequality gives a confidence radius.
//!
//! Randomness comes from `ChaCha12Rng::seed_from_u64(seed)` with the stream
//! set to the run index, so every `(seed, run)` pair is an independent,
//! reproducible substream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{dec_bound_quantum, TSIRELSON};
use crate::error::{Error, Result};
use crate::quantum::{kron, ChshMeasurementSet, TwoQubitState};

pub const DEFAULT_CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub x: u8,
    pub y: u8,
    pub a: u8,
    pub b: u8,
}

/// `Pr[a, b | x, y]`, indexed `a * 2 + b`.
pub fn outcome_distribution(
    rho: &TwoQubitState,
    m: &ChshMeasurementSet,
    x: u8,
    y: u8,
) -> [f64; 4] {
    let mut p = [0.0; 4];
    for a in 0..2u8 {
        for b in 0..2u8 {
            let proj = kron(&m.alice(x).projector(a), &m.bob(y).projector(b));
            p[(a * 2 + b) as usize] = rho.expectation(&proj).max(0.0);
        }
    }
    let total: f64 = p.iter().sum();
    p.map(|v| v / total)
}

fn chsh_sign(x: u8, y: u8) -> f64 {
    if x == 1 && y == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Hoeffding radius for `β̂` after `n` rounds at the given confidence:
/// `4 sqrt(2 ln(2 / (1 - confidence)) * 4 / n)`.
///
/// The tight constant for `Z ∈ [-4, 4]` is half this; the wider radius is
/// kept so the bound also covers a per-cell analysis with `n/4` rounds
/// per setting pair.
pub fn hoeffding_radius(n: u64, confidence: f64) -> f64 {
    let delta = 1.0 - confidence;
    4.0 * (2.0 * (2.0 / delta).ln() * 4.0 / n as f64).sqrt()
}

/// Rounds of one run, drawn lazily.
pub struct TrialStream {
    rng: ChaCha12Rng,
    cdf: [[f64; 4]; 4],
    remaining: u64,
}

impl TrialStream {
    pub fn new(rho: &TwoQubitState, m: &ChshMeasurementSet, n: u64, seed: u64, stream: u64) -> Self {
        let mut cdf = [[0.0; 4]; 4];
        for (cell, row) in cdf.iter_mut().enumerate() {
            let p = outcome_distribution(rho, m, (cell >> 1) as u8, (cell & 1) as u8);
            let mut acc = 0.0;
            for (slot, pk) in row.iter_mut().zip(p) {
                acc += pk;
                *slot = acc;
            }
            row[3] = f64::INFINITY;
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        TrialStream { rng, cdf, remaining: n }
    }
}

impl Iterator for TrialStream {
    type Item = TrialRecord;

    fn next(&mut self) -> Option<TrialRecord> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let x = self.rng.random::<bool>() as u8;
        let y = self.rng.random::<bool>() as u8;
        let u: f64 = self.rng.random();
        let row = &self.cdf[(x * 2 + y) as usize];
        let k = row.iter().position(|&c| u < c).unwrap_or(3) as u8;
        Some(TrialRecord { x, y, a: k >> 1, b: k & 1 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaEstimate {
    pub beta_hat: f64,
    pub n_rounds: u64,
    pub confidence_level: f64,
    pub confidence_radius: f64,
    /// `counts[x * 2 + y][a * 2 + b]`.
    pub counts: [[u64; 4]; 4],
}

impl BetaEstimate {
    pub fn from_counts(counts: [[u64; 4]; 4], confidence: f64) -> Result<Self> {
        let n: u64 = counts.iter().flatten().sum();
        if n == 0 {
            return Err(Error::out_of_range("rounds", 0.0, 1.0, f64::INFINITY));
        }
        let mut sum = 0.0;
        for (cell, row) in counts.iter().enumerate() {
            let s = chsh_sign((cell >> 1) as u8, (cell & 1) as u8);
            // (-1)^{a⊕b}: +1 for (0,0), (1,1).
            let corr = row[0] as f64 - row[1] as f64 - row[2] as f64 + row[3] as f64;
            sum += s * corr;
        }
        Ok(BetaEstimate {
            beta_hat: 4.0 * sum / n as f64,
            n_rounds: n,
            confidence_level: confidence,
            confidence_radius: hoeffding_radius(n, confidence),
            counts,
        })
    }

    /// Combines independent runs into one estimate over all their rounds.
    pub fn pooled(runs: &[BetaEstimate]) -> Result<Self> {
        let mut counts = [[0u64; 4]; 4];
        for r in runs {
            for (dst, src) in counts.iter_mut().flatten().zip(r.counts.iter().flatten()) {
                *dst += src;
            }
        }
        let confidence = runs.first().map_or(DEFAULT_CONFIDENCE, |r| r.confidence_level);
        Self::from_counts(counts, confidence)
    }

    pub fn contains(&self, beta: f64) -> bool {
        (self.beta_hat - beta).abs() <= self.confidence_radius
    }

    /// Quantum Dec bound at the point estimate (clamped into `[0, 2√2]`).
    pub fn dec_bound_point(&self) -> f64 {
        dec_bound_at(self.beta_hat)
    }

    /// Quantum Dec bound at the lower confidence limit `β̂ - radius`.
    pub fn dec_bound_conservative(&self) -> f64 {
        dec_bound_at(self.beta_hat - self.confidence_radius)
    }
}

fn dec_bound_at(beta: f64) -> f64 {
    dec_bound_quantum(beta.clamp(0.0, TSIRELSON)).expect("clamped into the quantum range")
}

/// One run of `n` rounds from substream `stream` of `seed`.
pub fn simulate_stream(
    rho: &TwoQubitState,
    m: &ChshMeasurementSet,
    n: u64,
    seed: u64,
    stream: u64,
) -> Result<BetaEstimate> {
    if n == 0 {
        return Err(Error::out_of_range("rounds", 0.0, 1.0, f64::INFINITY));
    }
    let mut counts = [[0u64; 4]; 4];
    for t in TrialStream::new(rho, m, n, seed, stream) {
        counts[(t.x * 2 + t.y) as usize][(t.a * 2 + t.b) as usize] += 1;
    }
    BetaEstimate::from_counts(counts, DEFAULT_CONFIDENCE)
}

pub fn simulate(rho: &TwoQubitState, m: &ChshMeasurementSet, n: u64, seed: u64) -> Result<BetaEstimate> {
    simulate_stream(rho, m, n, seed, 0)
}

/// `runs` independent runs on streams `0..runs`, in stream order.
pub fn simulate_runs(
    rho: &TwoQubitState,
    m: &ChshMeasurementSet,
    n: u64,
    seed: u64,
    runs: u64,
) -> Result<Vec<BetaEstimate>> {
    (0..runs)
        .into_par_iter()
        .map(|stream| simulate_stream(rho, m, n, seed, stream))
        .collect()
}
