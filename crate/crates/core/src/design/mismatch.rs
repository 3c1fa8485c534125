//! Phase mismatch over the plane of signal and idler detunings.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use super::{phase_mismatch, phase_mismatch_quadratic, CrystalDispersion};
use crate::error::{invalid, Result};

/// Default level of negligible mismatch, `|Δ|·L/2 ≤ π/2`.
pub const DEFAULT_MISMATCH_THRESHOLD: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchModel {
    Linear,
    Quadratic,
}

/// `|Δ|` sampled on a grid, one row per idler detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchMap {
    pub omega_s: Vec<f64>,
    pub omega_i: Vec<f64>,
    /// Row-major: `abs_delta[row * omega_s.len() + col]`.
    pub abs_delta: Vec<f64>,
    pub negligible: Vec<bool>,
    pub threshold: f64,
    pub model: MismatchModel,
}

impl MismatchMap {
    pub fn at(&self, row: usize, col: usize) -> (f64, bool) {
        let k = row * self.omega_s.len() + col;
        (self.abs_delta[k], self.negligible[k])
    }
}

/// Samples `|Δ(Ω_s, Ω_i)|` and flags points with `|Δ|·L/2 ≤ threshold`.
/// `threshold = ∞` flags every point.
pub fn mismatch_map(
    disp: &CrystalDispersion,
    omega_s: &[f64],
    omega_i: &[f64],
    threshold: f64,
    model: MismatchModel,
) -> Result<MismatchMap> {
    if omega_s.iter().chain(omega_i).any(|w| !w.is_finite()) {
        return Err(invalid("detuning grids must be finite"));
    }
    if threshold.is_nan() || threshold < 0.0 {
        return Err(invalid("threshold must be non-negative"));
    }
    if model == MismatchModel::Quadratic {
        phase_mismatch_quadratic(disp, 0.0, 0.0)?;
    }
    let rows: Vec<Vec<f64>> = omega_i
        .par_iter()
        .map(|&wi| {
            omega_s
                .iter()
                .map(|&ws| match model {
                    MismatchModel::Linear => phase_mismatch(disp, ws, wi).abs(),
                    MismatchModel::Quadratic => {
                        (disp.k_double_prime_s * ws * ws + (disp.k_prime_p - disp.k_prime_i) * wi).abs()
                    }
                })
                .collect()
        })
        .collect();
    let abs_delta: Vec<f64> = rows.into_iter().flatten().collect();
    let negligible = abs_delta.iter().map(|d| d * disp.length / 2.0 <= threshold).collect();
    Ok(MismatchMap {
        omega_s: omega_s.to_vec(),
        omega_i: omega_i.to_vec(),
        abs_delta,
        negligible,
        threshold,
        model,
    })
}

/// Line `Ω_i = Ω_s + intercept` bounding the region of constant pump modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpLine {
    pub intercept: f64,
}

/// Band edges and boundary lines drawn over the mismatch map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overlays {
    pub signal_band: [f64; 2],
    pub idler_band: [f64; 2],
    pub pump_lines: [PumpLine; 2],
    /// Perpendicular distance between the pump lines, `δω_pa/√2`.
    pub pump_line_distance: f64,
    pub threshold: f64,
    /// Half-width in `Ω_i` of the negligible band of the linear model when
    /// signal and pump share the same group velocity; infinite if `τ_i = 0`.
    pub negligible_half_width_idler: Option<f64>,
}

impl Overlays {
    pub fn new(
        disp: &CrystalDispersion,
        signal_bandwidth: f64,
        idler_bandwidth: f64,
        active_pump_bandwidth: f64,
        threshold: f64,
    ) -> Self {
        let half_pa = active_pump_bandwidth / 2.0;
        let slope = (disp.k_prime_p - disp.k_prime_i).abs();
        let half_width = disp.is_degenerate().then(|| {
            if slope == 0.0 {
                f64::INFINITY
            } else {
                2.0 * threshold / (slope * disp.length)
            }
        });
        Self {
            signal_band: [-signal_bandwidth / 2.0, signal_bandwidth / 2.0],
            idler_band: [-idler_bandwidth / 2.0, idler_bandwidth / 2.0],
            pump_lines: [PumpLine { intercept: -half_pa }, PumpLine { intercept: half_pa }],
            pump_line_distance: active_pump_bandwidth / SQRT_2,
            threshold,
            negligible_half_width_idler: half_width,
        }
    }
}
