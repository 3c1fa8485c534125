//! Design budgets of an SFG time lens: phase matching in the crystal,
//! pump and idler bandwidths, pixel count and field of view.
//!
//! Strong inequalities `a ≪ b` are checked as `a·margin ≤ b` with an
//! explicit margin factor, [`DEFAULT_MARGIN`] unless configured.

pub mod file;
pub mod mismatch;
pub mod sellmeier;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub use file::{parse_dispersion_file, parse_dispersion_section, DispersionSource};
pub use mismatch::{mismatch_map, MismatchMap, MismatchModel, Overlays, DEFAULT_MISMATCH_THRESHOLD};
pub use sellmeier::{
    dispersion_from_sellmeier, IndexFormula, Polarization, SellmeierSpec, UniaxialCrystal, Wave,
};

pub const DEFAULT_MARGIN: f64 = 10.0;

/// Relative slack, in units of machine epsilon, granted at constraint
/// boundaries so that exact equality passes despite rounding.
const BOUNDARY_ULPS: f64 = 8.0;

/// First-order group delays [s/m], signal GVD [s²/m] and crystal length [m].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrystalDispersion {
    pub k_prime_s: f64,
    pub k_prime_p: f64,
    pub k_prime_i: f64,
    pub k_double_prime_s: f64,
    pub length: f64,
}

impl CrystalDispersion {
    pub fn new(
        k_prime_s: f64,
        k_prime_p: f64,
        k_prime_i: f64,
        k_double_prime_s: f64,
        length: f64,
    ) -> Result<Self> {
        if ![k_prime_s, k_prime_p, k_prime_i, k_double_prime_s].iter().all(|v| v.is_finite()) {
            return Err(invalid("dispersion coefficients must be finite"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid("crystal length must be positive"));
        }
        Ok(Self { k_prime_s, k_prime_p, k_prime_i, k_double_prime_s, length })
    }

    /// Signal and pump travel at the same group velocity.
    pub fn is_degenerate(&self) -> bool {
        (self.k_prime_s - self.k_prime_p).abs() <= 1e-12 * self.k_prime_s.abs().max(self.k_prime_p.abs())
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.k_prime_s, self.k_prime_p, self.k_prime_i, self.k_double_prime_s, length)
    }
}

/// Linearised mismatch `Δ = (k'_s − k'_p)Ω_s + (k'_p − k'_i)Ω_i` [1/m].
pub fn phase_mismatch(disp: &CrystalDispersion, omega_s: f64, omega_i: f64) -> f64 {
    (disp.k_prime_s - disp.k_prime_p) * omega_s + (disp.k_prime_p - disp.k_prime_i) * omega_i
}

/// `Δ = k''_s Ω_s² + (k'_p − k'_i)Ω_i`, valid when signal and pump share
/// the same group velocity.
pub fn phase_mismatch_quadratic(disp: &CrystalDispersion, omega_s: f64, omega_i: f64) -> Result<f64> {
    if !disp.is_degenerate() {
        return Err(invalid("quadratic mismatch requires k'_s = k'_p"));
    }
    Ok(disp.k_double_prime_s * omega_s * omega_s + (disp.k_prime_p - disp.k_prime_i) * omega_i)
}

/// `τ_i = |k'_p − k'_i|·L`.
pub fn idler_delay(disp: &CrystalDispersion) -> f64 {
    (disp.k_prime_p - disp.k_prime_i).abs() * disp.length
}

/// `τ_s = √(|k''_s|·L)`; see [`spreading_gdd_is_negative`] for the sign.
pub fn spreading_time(disp: &CrystalDispersion) -> f64 {
    (disp.k_double_prime_s.abs() * disp.length).sqrt()
}

pub fn spreading_gdd_is_negative(disp: &CrystalDispersion) -> bool {
    disp.k_double_prime_s < 0.0
}

fn check_bandwidth_args(n_pixels: f64, pixel_duration: f64, focal_gdd: f64, m: f64) -> Result<()> {
    if !(n_pixels >= 1.0 && n_pixels.is_finite()) {
        return Err(invalid("pixel count must be at least 1"));
    }
    if !(pixel_duration > 0.0 && pixel_duration.is_finite()) {
        return Err(invalid("pixel duration must be positive"));
    }
    if focal_gdd == 0.0 || !focal_gdd.is_finite() {
        return Err(invalid("focal GDD must be nonzero"));
    }
    if m == 0.0 || !m.is_finite() {
        return Err(invalid("magnification must be nonzero"));
    }
    Ok(())
}

/// `δω_i = δω_s/|M| + (N−1)τ0/|D_f|`.
pub fn idler_bandwidth(
    signal_bandwidth: f64,
    magnification: f64,
    n_pixels: f64,
    pixel_duration: f64,
    focal_gdd: f64,
) -> Result<f64> {
    check_bandwidth_args(n_pixels, pixel_duration, focal_gdd, magnification)?;
    Ok(signal_bandwidth / magnification.abs() + (n_pixels - 1.0) * pixel_duration / focal_gdd.abs())
}

/// `δω_pa = δω_s(1 + 1/|M|) + (N−1)τ0/|D_f|`, summed as `δω_s + δω_i`
/// so that the lossless relation holds bit for bit.
pub fn active_pump_bandwidth(
    signal_bandwidth: f64,
    magnification: f64,
    n_pixels: f64,
    pixel_duration: f64,
    focal_gdd: f64,
) -> Result<f64> {
    let idler = idler_bandwidth(signal_bandwidth, magnification, n_pixels, pixel_duration, focal_gdd)?;
    Ok(signal_bandwidth + idler)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PixelBudget {
    /// Real-valued pixel count; callers floor it.
    pub n: f64,
    /// `δω_s/|M|` is negligible against the idler bandwidth at the margin
    /// used, so `N ≈ 1 + D_f·δω_i/τ0`.
    pub high_magnification: bool,
}

/// `N = 1 + (|D_f|/τ0)(δω_i − δω_s/|M|)`.
pub fn pixel_budget(
    focal_gdd: f64,
    pixel_duration: f64,
    max_idler_bandwidth: f64,
    signal_bandwidth: f64,
    magnification: f64,
    margin: f64,
) -> Result<PixelBudget> {
    check_bandwidth_args(1.0, pixel_duration, focal_gdd, magnification)?;
    let per_pixel = signal_bandwidth / magnification.abs();
    if max_idler_bandwidth < per_pixel {
        return Err(Error::Infeasible(format!(
            "idler bandwidth {max_idler_bandwidth:.4e} rad/s is below the single-pixel \
             requirement δω_s/|M| = {per_pixel:.4e} rad/s"
        )));
    }
    Ok(PixelBudget {
        n: 1.0 + focal_gdd.abs() / pixel_duration * (max_idler_bandwidth - per_pixel),
        high_magnification: per_pixel * margin <= max_idler_bandwidth,
    })
}

/// `|M| ≫ τ_i/τ0` at the given margin.
pub fn is_high_magnification(magnification: f64, idler_delay: f64, pixel_duration: f64, margin: f64) -> bool {
    magnification.abs() * pixel_duration >= margin * idler_delay
}

/// Upper bounds on the quantum field of view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FovQuantum {
    /// `2π|D_f|/τ_i`; infinite when `τ_i = 0`.
    pub crystal_bound: f64,
    /// `2π|D_f|/τ_p`; `None` for a shaped pump.
    pub pump_bound: Option<f64>,
    pub min_bound: f64,
    pub margin: f64,
    /// `min_bound / margin`, the usable field of view.
    pub limit: f64,
}

fn bound(focal_gdd: f64, tau: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(invalid("delays and durations must be non-negative"));
    }
    Ok(if tau == 0.0 { f64::INFINITY } else { 2.0 * PI * focal_gdd.abs() / tau })
}

pub fn fov_quantum(
    focal_gdd: f64,
    idler_delay: f64,
    pump_duration: Option<f64>,
    margin: f64,
) -> Result<FovQuantum> {
    if !(margin >= 1.0 && margin.is_finite()) {
        return Err(invalid("margin must be at least 1"));
    }
    let crystal_bound = bound(focal_gdd, idler_delay)?;
    let pump_bound = pump_duration.map(|tp| bound(focal_gdd, tp)).transpose()?;
    let min_bound = pump_bound.map_or(crystal_bound, |p| p.min(crystal_bound));
    Ok(FovQuantum { crystal_bound, pump_bound, min_bound, margin, limit: min_bound / margin })
}

/// `T_F^cl = 2π|D_f|/√(τ_p² + τ_i²)`.
pub fn fov_classical(focal_gdd: f64, idler_delay: f64, pump_duration: f64) -> Result<f64> {
    if idler_delay < 0.0 || pump_duration < 0.0 {
        return Err(invalid("delays and durations must be non-negative"));
    }
    let width = idler_delay.hypot(pump_duration);
    if width == 0.0 {
        return Err(invalid("τ_p and τ_i cannot both vanish"));
    }
    Ok(2.0 * PI * focal_gdd.abs() / width)
}

/// One strong inequality `lhs ≪ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constraint {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// `rhs / lhs`; the constraint passes when this is at least the margin.
    pub ratio: f64,
    pub pass: bool,
}

impl Constraint {
    pub fn new(lhs: f64, rhs: f64, margin: f64) -> Self {
        let ratio = if lhs == 0.0 { f64::INFINITY } else { rhs / lhs };
        let pass = lhs * margin <= rhs * (1.0 + BOUNDARY_ULPS * f64::EPSILON);
        Self { lhs, rhs, margin, ratio, pass }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintFlags {
    /// `τ_i ≪ 2π/δω_i`.
    pub idler: Constraint,
    /// `τ_s ≪ 2π/δω_s`.
    pub signal: Constraint,
}

impl ConstraintFlags {
    pub fn all_pass(&self) -> bool {
        self.idler.pass && self.signal.pass
    }
}

pub fn check_constraints(
    disp: &CrystalDispersion,
    signal_bandwidth: f64,
    idler_bandwidth: f64,
    margin: f64,
) -> Result<ConstraintFlags> {
    if !(margin >= 1.0 && margin.is_finite()) {
        return Err(invalid("margin must be at least 1"));
    }
    if !(signal_bandwidth > 0.0 && idler_bandwidth > 0.0) {
        return Err(invalid("bandwidths must be positive"));
    }
    Ok(ConstraintFlags {
        idler: Constraint::new(idler_delay(disp), 2.0 * PI / idler_bandwidth, margin),
        signal: Constraint::new(spreading_time(disp), 2.0 * PI / signal_bandwidth, margin),
    })
}

/// How the time-lens pump is prepared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PumpPreparation {
    /// Transform-limited pulse of duration `τ_p` chirped by `−D_f`.
    Chirped { pulse_duration: f64 },
    /// Flat-topped pulse with sharp edges, window `T`.
    Shaped { window: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignInputs {
    pub dispersion: CrystalDispersion,
    pub focal_gdd: f64,
    pub magnification: f64,
    pub pixel_duration: f64,
    pub n_pixels: usize,
    pub pump: PumpPreparation,
    pub margin: f64,
}

/// Aggregate of every budget for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub inputs: DesignInputs,
    pub delta_s: f64,
    pub delta_pa: f64,
    pub delta_i: f64,
    pub tau_i: f64,
    pub tau_s: f64,
    pub spreading_gdd_negative: bool,
    pub n_pixels: usize,
    /// Pixels allowed by the idler constraint at the margin.
    pub n_max: f64,
    pub high_magnification: bool,
    pub stretched_pixel_duration: f64,
    pub stretched_waveform_duration: f64,
    pub pump_bandwidth: Option<f64>,
    pub pump_duration: Option<f64>,
    pub stretched_pump_duration: Option<f64>,
    pub field_of_view: f64,
    pub t_f_quantum: FovQuantum,
    pub t_f_classical: f64,
    pub idler_constraint: Constraint,
    pub signal_constraint: Constraint,
    /// `δω_pa ≪ δω_p` for a chirped pump, `T_s ≤ T` for a shaped one.
    pub pump_constraint: Constraint,
    /// `N·τ0 ≤ T_F^(q)` bound over the margin.
    pub fov_constraint: Constraint,
    pub feasible: bool,
}

impl DesignReport {
    pub fn new(inputs: DesignInputs) -> Result<Self> {
        let DesignInputs { dispersion, focal_gdd, magnification, pixel_duration, n_pixels, pump, margin } =
            inputs;
        if magnification == 1.0 {
            return Err(invalid("magnification 1 has no imaging solution"));
        }
        let n = n_pixels as f64;
        let delta_s = 2.0 * PI / pixel_duration;
        let delta_i = idler_bandwidth(delta_s, magnification, n, pixel_duration, focal_gdd)?;
        let delta_pa = active_pump_bandwidth(delta_s, magnification, n, pixel_duration, focal_gdd)?;
        let tau_i = idler_delay(&dispersion);
        let tau_s = spreading_time(&dispersion);
        let flags = check_constraints(&dispersion, delta_s, delta_i, margin)?;

        let max_idler = if tau_i == 0.0 { f64::INFINITY } else { 2.0 * PI / (tau_i * margin) };
        let (n_max, high_magnification) =
            match pixel_budget(focal_gdd, pixel_duration, max_idler, delta_s, magnification, margin) {
                Ok(b) => (b.n, b.high_magnification),
                Err(Error::Infeasible(_)) => (0.0, false),
                Err(e) => return Err(e),
            };

        let input_gdd = focal_gdd * (magnification - 1.0) / magnification;
        let stretched_pixel_duration = input_gdd.abs() * delta_s;
        let stretched_waveform_duration = stretched_pixel_duration + (n - 1.0) * pixel_duration;

        let (pump_duration, pump_bandwidth, stretched_pump_duration, pump_constraint) = match pump {
            PumpPreparation::Chirped { pulse_duration } => {
                if !(pulse_duration > 0.0) {
                    return Err(invalid("pump pulse duration must be positive"));
                }
                let bw = 2.0 * PI / pulse_duration;
                (
                    Some(pulse_duration),
                    Some(bw),
                    Some(focal_gdd.abs() * bw),
                    Constraint::new(delta_pa, bw, margin),
                )
            }
            PumpPreparation::Shaped { window } => {
                if !(window > 0.0) {
                    return Err(invalid("pump window must be positive"));
                }
                (None, None, None, Constraint::new(stretched_waveform_duration, window, 1.0))
            }
        };

        let t_f_quantum = fov_quantum(focal_gdd, tau_i, pump_duration, margin)?;
        let t_f_classical = fov_classical(focal_gdd, tau_i, pump_duration.unwrap_or(0.0))?;
        let field_of_view = n * pixel_duration;
        let fov_constraint = Constraint::new(field_of_view, t_f_quantum.min_bound, margin);
        let feasible = flags.all_pass() && pump_constraint.pass && fov_constraint.pass;

        Ok(Self {
            inputs,
            delta_s,
            delta_pa,
            delta_i,
            tau_i,
            tau_s,
            spreading_gdd_negative: spreading_gdd_is_negative(&dispersion),
            n_pixels,
            n_max,
            high_magnification,
            stretched_pixel_duration,
            stretched_waveform_duration,
            pump_bandwidth,
            pump_duration,
            stretched_pump_duration,
            field_of_view,
            t_f_quantum,
            t_f_classical,
            idler_constraint: flags.idler,
            signal_constraint: flags.signal,
            pump_constraint,
            fov_constraint,
            feasible,
        })
    }
}
