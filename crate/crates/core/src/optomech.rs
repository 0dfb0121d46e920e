//! Gravitational decoherence in an optomechanical interferometer.
//!
//! A photon shared between two cavities displaces a mechanical mirror in one
//! arm. After time `t` the cavity modes are left in
//!
//! ```text
//! rho_f = (|01><01| + |10><10| + R(t) (|01><10| + |10><01|)) / 2
//! ```
//!
//! with `R = exp(-(1 + 2 n̄) |β(t)|^2 / 2)` and
//! `|β(t)|^2 = (4 g0^2 / ω_m^2) sin^2(ω_m t / 2)`. The mean phonon number
//! `n̄ = 2 Λ / γ_m` collects thermal heating and, optionally, gravitational
//! decoherence at rate `Λ_grav = (2π/3) G Δ / ω_m`.
//!
//! In the Bell basis `rho_f` has weights `(0, 0, (1+R)/2, (1-R)/2)`, so
//! `Dec = (1 + sqrt(1 - R^2)) / 4`. A model predicting that much
//! decoherence is falsified once CHSH exceeds `β_fals(Dec)`; the standard
//! measurements on the gravity-free state reach `β_mech = √2 (1 + R)`.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{beta_fals, TSIRELSON};
use crate::error::{Error, Result};
use crate::optimize::golden_section_max;
use crate::quantum::{beta_max, chsh_value, BellDiagonalState, ChshMeasurementSet};
use crate::tol;

/// Smallest grid used by [`Model::optimal_time`].
pub const MIN_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Newton's constant, m^3 / (kg s^2).
    pub g: f64,
    /// Boltzmann's constant, J / K.
    pub k_b: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
}

impl PhysicalConstants {
    /// CODATA 2018.
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        g: 6.67430e-11,
        k_b: 1.380649e-23,
        hbar: 1.054571817e-34,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Aluminum,
    Rhenium,
}

impl Material {
    pub const ALL: [Material; 2] = [Material::Aluminum, Material::Rhenium];

    /// Room-temperature mass density, kg / m^3.
    pub fn density(self) -> f64 {
        match self {
            Material::Aluminum => 2700.0,
            Material::Rhenium => 21020.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Material::Aluminum => "aluminum",
            Material::Rhenium => "rhenium",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptomechParams {
    /// Single-photon coupling rate, 1/s.
    pub g0: f64,
    /// Mechanical frequency, rad/s.
    pub omega_m: f64,
    /// Mechanical damping rate, 1/s.
    pub gamma_m: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    /// Mirror density, kg / m^3.
    pub density: f64,
}

impl OptomechParams {
    /// Coupling and frequency 1, damping 1e-10, at 1 nK.
    pub fn reference(material: Material) -> Self {
        OptomechParams {
            g0: 1.0,
            omega_m: 1.0,
            gamma_m: 1e-10,
            temperature: 1e-9,
            density: material.density(),
        }
    }

    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_m
    }

    /// Rates must be positive; temperature and density may be zero to
    /// switch a decoherence source off. `Q >= 1`.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("g0", self.g0), ("omega_m", self.omega_m), ("gamma_m", self.gamma_m)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::out_of_range(name, v, 0.0, f64::INFINITY));
            }
        }
        for (name, v) in [("temperature", self.temperature), ("density", self.density)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::out_of_range(name, v, 0.0, f64::INFINITY));
            }
        }
        let q = self.quality_factor();
        if q < 1.0 {
            return Err(Error::out_of_range("Q", q, 1.0, f64::INFINITY));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub params: OptomechParams,
    pub constants: PhysicalConstants,
}

/// Time series of the model on a grid. `beta_fals` and `gap` are `None`
/// where the predicted decoherence is too large for any CHSH value to
/// falsify it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceCurve {
    pub times: Vec<f64>,
    pub dec_grav: Vec<f64>,
    pub dec_heat: Vec<f64>,
    pub beta_mech: Vec<f64>,
    pub beta_mech_optimal: Vec<f64>,
    pub beta_fals: Vec<Option<f64>>,
    pub gap: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalTime {
    pub t_max: f64,
    pub gap: f64,
    pub beta_mech: f64,
    pub beta_fals: f64,
    pub dec_grav: f64,
}

/// `(1 + sqrt(1 - R^2)) / 4`.
pub fn dec_from_r(r: f64) -> f64 {
    0.25 * (1.0 + (1.0 - r * r).max(0.0).sqrt())
}

/// Bell weights of the cavity state with coherence `r`.
pub fn bell_state_from_r(r: f64) -> Result<BellDiagonalState> {
    BellDiagonalState::new([0.0, 0.0, 0.5 * (1.0 + r), 0.5 * (1.0 - r)])
}

impl Model {
    pub fn new(params: OptomechParams, constants: PhysicalConstants) -> Result<Self> {
        params.validate()?;
        Ok(Model { params, constants })
    }

    pub fn with_codata(params: OptomechParams) -> Result<Self> {
        Self::new(params, PhysicalConstants::CODATA)
    }

    pub fn lambda_grav(&self) -> f64 {
        (2.0 * PI / 3.0) * self.constants.g * self.params.density / self.params.omega_m
    }

    pub fn lambda_heat(&self) -> f64 {
        self.constants.k_b * self.params.temperature
            / (self.constants.hbar * self.params.quality_factor())
    }

    pub fn nbar(&self, include_gravity: bool) -> f64 {
        let heat = 2.0 * self.lambda_heat() / self.params.gamma_m;
        if include_gravity {
            heat + 2.0 * self.lambda_grav() / self.params.gamma_m
        } else {
            heat
        }
    }

    /// `|β(t)|^2`, the squared mirror displacement in phase space.
    pub fn displacement_sq(&self, t: f64) -> f64 {
        let p = &self.params;
        let s = (0.5 * p.omega_m * t).sin();
        4.0 * p.g0 * p.g0 / (p.omega_m * p.omega_m) * s * s
    }

    pub fn coherence_r(&self, t: f64, include_gravity: bool) -> f64 {
        (-(1.0 + 2.0 * self.nbar(include_gravity)) * self.displacement_sq(t) / 2.0).exp()
    }

    pub fn dec_of_t(&self, t: f64, include_gravity: bool) -> f64 {
        dec_from_r(self.coherence_r(t, include_gravity))
    }

    /// Standard-measurement CHSH value, `√2 (1 + R)`.
    pub fn beta_mech(&self, t: f64, include_gravity: bool) -> f64 {
        SQRT_2 * (1.0 + self.coherence_r(t, include_gravity))
    }

    /// Same, evaluated on the density matrix.
    pub fn beta_mech_matrix(&self, t: f64, include_gravity: bool) -> Result<f64> {
        let state = bell_state_from_r(self.coherence_r(t, include_gravity))?.to_state();
        Ok(chsh_value(&state, &ChshMeasurementSet::standard()))
    }

    /// Best CHSH value over all measurements, `2 sqrt(1 + R^2)`.
    pub fn beta_mech_optimal(&self, t: f64, include_gravity: bool) -> f64 {
        let r = self.coherence_r(t, include_gravity);
        2.0 * (1.0 + r * r).sqrt()
    }

    pub fn beta_mech_optimal_matrix(&self, t: f64, include_gravity: bool) -> Result<f64> {
        let state = bell_state_from_r(self.coherence_r(t, include_gravity))?.to_state();
        Ok(beta_max(&state))
    }

    /// `β_fals` for the gravity-included prediction, `None` when not
    /// falsifiable.
    pub fn beta_fals_at(&self, t: f64) -> Option<f64> {
        let dec = self.dec_of_t(t, true);
        if dec <= 0.25 + tol::ALGEBRAIC {
            return Some(TSIRELSON);
        }
        beta_fals(dec).ok()
    }

    /// `g(t) = β_mech(t) - β_fals(t)`.
    pub fn gap(&self, t: f64) -> Option<f64> {
        self.beta_fals_at(t).map(|bf| self.beta_mech(t, false) - bf)
    }

    pub fn beta_fals_curve(&self, times: &[f64]) -> Vec<Option<f64>> {
        times.par_iter().map(|&t| self.beta_fals_at(t)).collect()
    }

    pub fn curve(&self, times: &[f64]) -> Result<DecoherenceCurve> {
        if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(Error::out_of_range("t", *t, 0.0, f64::INFINITY));
        }
        let beta_fals = self.beta_fals_curve(times);
        let beta_mech: Vec<f64> = times.iter().map(|&t| self.beta_mech(t, false)).collect();
        let gap = beta_fals
            .iter()
            .zip(&beta_mech)
            .map(|(bf, bm)| bf.map(|bf| bm - bf))
            .collect();
        Ok(DecoherenceCurve {
            times: times.to_vec(),
            dec_grav: times.iter().map(|&t| self.dec_of_t(t, true)).collect(),
            dec_heat: times.iter().map(|&t| self.dec_of_t(t, false)).collect(),
            beta_mech,
            beta_mech_optimal: times.iter().map(|&t| self.beta_mech_optimal(t, false)).collect(),
            beta_fals,
            gap,
        })
    }

    /// Maximizes the gap over `[window.0, window.1]`: a grid of `grid`
    /// points (at least [`MIN_GRID`]) followed by golden-section refinement
    /// around the best grid point.
    pub fn optimal_time(&self, window: (f64, f64), grid: usize) -> Result<OptimalTime> {
        let (lo, hi) = window;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::out_of_range("window end", hi, lo.max(0.0), f64::INFINITY));
        }
        let n = grid.max(MIN_GRID);
        let step = (hi - lo) / (n - 1) as f64;
        let score = |t: f64| self.gap(t).unwrap_or(f64::NEG_INFINITY);
        let values: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| score(lo + step * k as f64))
            .collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // R is symmetric within a period; report the earliest of tied maxima.
        let k = values
            .iter()
            .position(|&v| v >= best - tol::ALGEBRAIC)
            .expect("non-empty grid");
        let mut t_max = lo + step * k as f64;
        let mut gap = values[k];
        let a = (t_max - step).max(lo);
        let b = (t_max + step).min(hi);
        let (t_ref, g_ref) = golden_section_max(score, a, b, tol::GOLDEN_SECTION * hi.max(1.0));
        if g_ref > gap {
            t_max = t_ref;
            gap = g_ref;
        }
        // Bisection noise leaves |gap| ~ 1e-13 where both sides are 2√2.
        if !(gap > tol::PHYSICAL) {
            return Err(Error::NoPositiveGap {
                best_gap: gap,
                time: t_max,
            });
        }
        Ok(OptimalTime {
            t_max,
            gap,
            beta_mech: self.beta_mech(t_max, false),
            beta_fals: self.beta_fals_at(t_max).unwrap_or(f64::NAN),
            dec_grav: self.dec_of_t(t_max, true),
        })
    }

    /// [`Model::optimal_time`] over one mechanical period.
    pub fn optimal_time_default(&self) -> Result<OptimalTime> {
        self.optimal_time((0.0, self.params.period()), MIN_GRID)
    }
}
