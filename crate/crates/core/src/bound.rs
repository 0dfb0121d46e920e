//! The quantum region of attainable `(β, Dec)` pairs.
//!
//! For `v ∈ (2, 2√2]` let
//!
//! ```text
//! f(v) = 3 - 2 log2 max_{c_z ∈ [-1, 1 - v/√2]} [ 2 sqrt(1 + c_z)
//!                                               + sqrt(1 - c_z + v/√2)
//!                                               + sqrt(1 - c_z - v/√2) ]
//! ```
//!
//! A state whose best CHSH value is `v` has `Dec(A|E) <= 2^{-f(v)} / 2`, and
//! the bound is attained by a Bell-diagonal state. At `v <= 2` nothing is
//! excluded and the bound is 1; the jump at `v = 2` is deliberate.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::{bisect_decreasing, golden_section_max};
use crate::quantum::BellDiagonalState;
use crate::tol;

/// Tsirelson's bound `2√2`.
pub const TSIRELSON: f64 = 2.0 * SQRT_2;

/// First `β` sampled by [`region_curve`]; the bound is not defined at 2.
pub const CURVE_START: f64 = 2.0 + 1e-9;

/// The concave `c_z`-objective inside `f`.
pub fn objective(v: f64, cz: f64) -> f64 {
    let s = v * FRAC_1_SQRT_2;
    2.0 * (1.0 + cz).max(0.0).sqrt()
        + (1.0 - cz + s).max(0.0).sqrt()
        + (1.0 - cz - s).max(0.0).sqrt()
}

/// `(argmax c_z, max)` of [`objective`], for `v ∈ [2, 2√2]`.
fn inner_max(v: f64) -> (f64, f64) {
    let hi = (1.0 - v * FRAC_1_SQRT_2).max(-1.0);
    golden_section_max(|cz| objective(v, cz), -1.0, hi, tol::GOLDEN_SECTION)
}

fn f_unchecked(v: f64) -> f64 {
    3.0 - 2.0 * inner_max(v).1.log2()
}

fn check_v(v: f64) -> Result<f64> {
    if !(v > 2.0 && v <= TSIRELSON + tol::TSIRELSON_SLACK) {
        return Err(Error::out_of_range("v", v, 2.0, TSIRELSON));
    }
    Ok(v.min(TSIRELSON))
}

/// `f(v)` for `2 < v <= 2√2` (plus a `1e-12` slack above).
pub fn f_of_v(v: f64) -> Result<f64> {
    Ok(f_unchecked(check_v(v)?))
}

/// The largest `Dec(A|E)` compatible with a CHSH value `beta`.
///
/// Returns 1 for `beta <= 2` and `2^{-f(beta)} / 2` above. Values beyond
/// Tsirelson's bound give [`Error::NonQuantum`].
pub fn dec_bound_quantum(beta: f64) -> Result<f64> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::out_of_range("beta", beta, 0.0, TSIRELSON));
    }
    if beta > TSIRELSON + tol::TSIRELSON_SLACK {
        return Err(Error::NonQuantum(beta));
    }
    if beta <= 2.0 {
        return Ok(1.0);
    }
    Ok(dec_from_f(f_unchecked(beta.min(TSIRELSON))))
}

fn dec_from_f(f: f64) -> f64 {
    0.5 * (-f).exp2()
}

/// `lim_{β -> 2+} dec_bound_quantum(β)` (about 0.7369): decoherence at or
/// above this level cannot be excluded by any CHSH value.
pub fn dec_bound_limit_at_classical() -> f64 {
    dec_from_f(f_unchecked(2.0))
}

/// The CHSH value above which a model predicting `Dec >= dec_value` is
/// falsified; inverse of [`dec_bound_quantum`] on `(2, 2√2]`.
///
/// `dec_value` must lie in `[1/4, dec_bound_limit_at_classical())`; values
/// within `1e-12` of `1/4` map to `2√2`.
pub fn beta_fals(dec_value: f64) -> Result<f64> {
    let limit = dec_bound_limit_at_classical();
    if dec_value.is_nan()
        || dec_value < 0.25 - tol::ALGEBRAIC
        || dec_value >= limit
    {
        return Err(Error::NotFalsifiable {
            dec: dec_value,
            limit,
        });
    }
    if dec_value <= 0.25 {
        return Ok(TSIRELSON);
    }
    let g = |beta: f64| dec_from_f(f_unchecked(beta));
    Ok(bisect_decreasing(g, dec_value, 2.0, TSIRELSON, tol::BISECTION))
}

/// The Bell-diagonal state attaining the bound at `beta ∈ (2, 2√2]`:
/// `c_x = c_y = beta / (2√2)` and `c_z` the maximizer of [`objective`].
pub fn optimal_bell_diagonal_state(beta: f64) -> Result<BellDiagonalState> {
    let v = check_v(beta)?;
    let (cz, _) = inner_max(v);
    let c = v / TSIRELSON;
    BellDiagonalState::from_correlations([c, c, cz])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSample {
    pub beta: f64,
    pub dec_bound: f64,
}

/// Samples of the boundary of the quantum region, `beta` increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleRegionCurve {
    pub samples: Vec<RegionSample>,
}

impl FeasibleRegionCurve {
    /// `beta` strictly increasing and `dec_bound` strictly decreasing.
    pub fn is_monotone(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].beta > w[0].beta && w[1].dec_bound < w[0].dec_bound)
    }
}

/// `n` evenly spaced samples from just above 2 up to `2√2`.
pub fn region_curve(n: usize) -> Result<FeasibleRegionCurve> {
    if n < 2 {
        return Err(Error::out_of_range("n", n as f64, 2.0, f64::INFINITY));
    }
    let step = (TSIRELSON - CURVE_START) / (n - 1) as f64;
    let samples = (0..n)
        .map(|i| {
            let beta = if i == n - 1 {
                TSIRELSON
            } else {
                CURVE_START + step * i as f64
            };
            Ok(RegionSample {
                beta,
                dec_bound: dec_bound_quantum(beta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeasibleRegionCurve { samples })
}
