//! The sum-frequency-generation time lens.
//!
//! Inside the crystal the signal `a_s` and idler `a_i` envelopes obey, at each
//! retarded time τ,
//!
//! ```text
//! ∂z a_s = g a_p*(τ) a_i e^{-iΔz}
//! ∂z a_i = -g a_p(τ) a_s e^{iΔz}
//! ```
//!
//! with an undepleted pump `a_p = A_p e^{iφ_p}`. For Δ = 0 the solution is a
//! τ-dependent beam splitter with transmission `cos(g A_p L)` and reflection
//! `sin(g A_p L)`. The pump is always data; it is never evolved.
//!
//! The coupling argument used throughout is the dimensionless peak value
//! `g·A_p0·L`; the local value at τ is `coupling · |a_p(τ)| / A_p0`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::field::{apply_gdd, gaussian_pulse, ComplexEnvelope, TimeGrid};

/// Modulus level, relative to the peak, that bounds the aperture of a
/// chirped pump.
pub const APERTURE_MODULUS_THRESHOLD: f64 = 0.999;

/// Complex pump envelope together with its lens parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpProfile {
    envelope: ComplexEnvelope,
    focal_gdd: f64,
    aperture: (f64, f64),
    peak: f64,
}

impl PumpProfile {
    /// Wraps an arbitrary pump envelope. `peak` is the reference modulus
    /// `A_p0` against which the coupling is quoted.
    pub fn new(envelope: ComplexEnvelope, focal_gdd: f64, aperture: (f64, f64), peak: f64) -> Result<Self> {
        if !(peak > 0.0) {
            return Err(invalid("pump reference modulus must be positive"));
        }
        if aperture.1 < aperture.0 {
            return Err(invalid("pump aperture end precedes its start"));
        }
        Ok(Self { envelope, focal_gdd, aperture, peak })
    }

    /// Constant-modulus pump with quadratic phase over the whole grid.
    pub fn flat(grid: TimeGrid, focal_gdd: f64, peak: f64) -> Result<Self> {
        if focal_gdd == 0.0 || !focal_gdd.is_finite() {
            return Err(invalid("focal GDD must be finite and non-zero"));
        }
        let env = ComplexEnvelope::from_fn(grid, |t| Complex64::from_polar(peak, t * t / (2.0 * focal_gdd)));
        let end = grid.time(grid.len() - 1);
        Self::new(env, focal_gdd, (grid.t0(), end), peak)
    }

    pub fn envelope(&self) -> &ComplexEnvelope {
        &self.envelope
    }

    pub fn grid(&self) -> &TimeGrid {
        self.envelope.grid()
    }

    pub fn focal_gdd(&self) -> f64 {
        self.focal_gdd
    }

    /// Interval `[t0, t1]` over which the pump modulus is nearly uniform.
    pub fn aperture(&self) -> (f64, f64) {
        self.aperture
    }

    pub fn aperture_width(&self) -> f64 {
        self.aperture.1 - self.aperture.0
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// `A_p(τ)` at every grid point.
    pub fn modulus(&self) -> Vec<f64> {
        self.envelope.samples().iter().map(|a| a.norm()).collect()
    }

    /// `φ_p(τ)` at every grid point, wrapped to (-π, π].
    pub fn phase(&self) -> Vec<f64> {
        self.envelope.samples().iter().map(|a| a.arg()).collect()
    }

    /// Local coupling `g·A_p(τ)·L` for a peak coupling `g·A_p0·L`.
    pub fn coupling_profile(&self, coupling: f64) -> Vec<f64> {
        self.envelope.samples().iter().map(|a| coupling * a.norm() / self.peak).collect()
    }
}

/// Lens parameters: peak coupling `g·A_p0·L` and focal GDD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensConfig {
    pub coupling: f64,
    pub focal_gdd: f64,
}

impl LensConfig {
    pub fn new(coupling: f64, focal_gdd: f64) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(invalid("coupling must be finite"));
        }
        if focal_gdd == 0.0 || !focal_gdd.is_finite() {
            return Err(invalid("focal GDD must be finite and non-zero"));
        }
        Ok(Self { coupling, focal_gdd })
    }

    /// Lens with the smallest coupling in `[0, π/2]` giving efficiency `eta`.
    pub fn from_efficiency(eta: f64, focal_gdd: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid(format!("efficiency must lie in [0, 1], got {eta}")));
        }
        Self::new(eta.sqrt().asin(), focal_gdd)
    }

    /// Intensity reflection coefficient `η = sin²(g·A_p0·L)`.
    pub fn efficiency(&self) -> f64 {
        self.coupling.sin().powi(2)
    }
}

/// Pointwise `(cos, sin)` of a coupling profile.
pub fn lens_coefficients(coupling_profile: &[f64]) -> (Vec<f64>, Vec<f64>) {
    coupling_profile.iter().map(|&x| (x.cos(), x.sin())).unzip()
}

/// Beam-splitter solution of the coupled-mode equations at perfect phase
/// matching. Returns `(signal_out, idler_out)`.
pub fn apply_sfg_analytic(
    sig_in: &ComplexEnvelope,
    idl_in: &ComplexEnvelope,
    pump: &PumpProfile,
    coupling: f64,
) -> Result<(ComplexEnvelope, ComplexEnvelope)> {
    sig_in.check_same_grid(idl_in)?;
    sig_in.check_same_grid(&pump.envelope)?;
    let (c, s) = lens_coefficients(&pump.coupling_profile(coupling));
    let n = sig_in.grid().len();
    let mut sig_out = Vec::with_capacity(n);
    let mut idl_out = Vec::with_capacity(n);
    for i in 0..n {
        let a_s = sig_in.samples()[i];
        let a_i = idl_in.samples()[i];
        let p = pump.envelope.samples()[i];
        let phase = if p.norm() > 0.0 { p / p.norm() } else { Complex64::new(1.0, 0.0) };
        sig_out.push(c[i] * a_s + s[i] * phase.conj() * a_i);
        idl_out.push(-s[i] * phase * a_s + c[i] * a_i);
    }
    Ok((
        ComplexEnvelope::new(*sig_in.grid(), sig_out)?.with_carrier_detuning(sig_in.carrier_detuning()),
        ComplexEnvelope::new(*sig_in.grid(), idl_out)?.with_carrier_detuning(idl_in.carrier_detuning()),
    ))
}

/// Infinite-aperture lens at unit conversion: `a_i = -e^{iτ²/2D_f} a_s`.
pub fn apply_ideal_lens(sig_in: &ComplexEnvelope, focal_gdd: f64) -> Result<ComplexEnvelope> {
    if focal_gdd == 0.0 || !focal_gdd.is_finite() {
        return Err(invalid("focal GDD must be finite and non-zero"));
    }
    Ok(sig_in.map_samples(|t, a| -Complex64::from_polar(1.0, t * t / (2.0 * focal_gdd)) * a))
}

/// Fixed-step RK4 integration of the coupled-mode equations over the
/// crystal length, independently at every grid point.
///
/// `mismatch` is the scalar phase mismatch Δ [1/m]. Requires
/// `n_steps ≥ 100` and `|Δ·L/n_steps| < 0.1`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_sfg_ode(
    sig_in: &ComplexEnvelope,
    idl_in: &ComplexEnvelope,
    pump: &PumpProfile,
    coupling: f64,
    mismatch: f64,
    crystal_length: f64,
    n_steps: usize,
) -> Result<(ComplexEnvelope, ComplexEnvelope)> {
    sig_in.check_same_grid(idl_in)?;
    sig_in.check_same_grid(&pump.envelope)?;
    if !(crystal_length > 0.0) {
        return Err(invalid("crystal length must be positive"));
    }
    if n_steps < 100 {
        return Err(Error::Step(format!("{n_steps} steps requested, at least 100 required")));
    }
    let h = crystal_length / n_steps as f64;
    if (mismatch * h).abs() >= 0.1 {
        return Err(Error::Step(format!(
            "phase advance per step |Δ·h| = {:.3} must stay below 0.1",
            (mismatch * h).abs()
        )));
    }
    // g·a_p(τ) with g fixed by the peak coupling
    let g = coupling / (pump.peak * crystal_length);
    let out: Vec<(Complex64, Complex64)> = sig_in
        .samples()
        .par_iter()
        .zip(idl_in.samples().par_iter())
        .zip(pump.envelope.samples().par_iter())
        .map(|((&a_s, &a_i), &a_p)| rk4_point(a_s, a_i, g * a_p, mismatch, h, n_steps))
        .collect();
    let (sig, idl): (Vec<_>, Vec<_>) = out.into_iter().unzip();
    Ok((
        ComplexEnvelope::new(*sig_in.grid(), sig)?.with_carrier_detuning(sig_in.carrier_detuning()),
        ComplexEnvelope::new(*sig_in.grid(), idl)?.with_carrier_detuning(idl_in.carrier_detuning()),
    ))
}

fn rk4_point(
    a_s: Complex64,
    a_i: Complex64,
    kappa: Complex64,
    mismatch: f64,
    h: f64,
    n_steps: usize,
) -> (Complex64, Complex64) {
    let deriv = |z: f64, s: Complex64, i: Complex64| {
        let rot = Complex64::from_polar(1.0, mismatch * z);
        (kappa.conj() * i * rot.conj(), -kappa * s * rot)
    };
    let (mut s, mut i) = (a_s, a_i);
    for step in 0..n_steps {
        let z = step as f64 * h;
        let (k1s, k1i) = deriv(z, s, i);
        let (k2s, k2i) = deriv(z + h / 2.0, s + k1s * (h / 2.0), i + k1i * (h / 2.0));
        let (k3s, k3i) = deriv(z + h / 2.0, s + k2s * (h / 2.0), i + k2i * (h / 2.0));
        let (k4s, k4i) = deriv(z + h, s + k3s * h, i + k3i * h);
        s += (k1s + 2.0 * k2s + 2.0 * k3s + k4s) * (h / 6.0);
        i += (k1i + 2.0 * k2i + 2.0 * k3i + k4i) * (h / 6.0);
    }
    (s, i)
}

/// Pump prepared by sending a Gaussian pulse of duration `pulse_duration`
/// through a GDD of `-focal_gdd`, rescaled to peak modulus `peak`.
///
/// The global phase is removed at the modulus maximum, and the aperture is
/// the contiguous interval around it where the modulus stays above
/// [`APERTURE_MODULUS_THRESHOLD`] of the peak.
pub fn chirped_pump(grid: &TimeGrid, pulse_duration: f64, focal_gdd: f64, peak: f64) -> Result<PumpProfile> {
    chirped_pump_with_threshold(grid, pulse_duration, focal_gdd, peak, APERTURE_MODULUS_THRESHOLD)
}

pub fn chirped_pump_with_threshold(
    grid: &TimeGrid,
    pulse_duration: f64,
    focal_gdd: f64,
    peak: f64,
    threshold: f64,
) -> Result<PumpProfile> {
    if focal_gdd == 0.0 || !focal_gdd.is_finite() {
        return Err(invalid("focal GDD must be finite and non-zero"));
    }
    if !(peak > 0.0) {
        return Err(invalid("pump peak must be positive"));
    }
    if !(0.0..1.0).contains(&threshold) {
        return Err(invalid("aperture threshold must lie in [0, 1)"));
    }
    let short = gaussian_pulse(grid, 0.0, pulse_duration, 0.0)?;
    let stretched = apply_gdd(&short, -focal_gdd)?;
    let mags: Vec<f64> = stretched.samples().iter().map(|a| a.norm()).collect();
    let (imax, &max) =
        mags.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("grid has at least two samples");
    let ref_phase = stretched.samples()[imax] / max;
    let env = stretched.scale(ref_phase.conj() * (peak / max));

    let level = threshold * max;
    let mut lo = imax;
    while lo > 0 && mags[lo - 1] >= level {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < mags.len() && mags[hi + 1] >= level {
        hi += 1;
    }
    PumpProfile::new(env, focal_gdd, (grid.time(lo), grid.time(hi)), peak)
}

/// Pulse-shaped pump `A_p0·e^{it²/2D_f}·Π(t/T)`.
pub fn shaped_pump(grid: &TimeGrid, aperture: f64, focal_gdd: f64, peak: f64) -> Result<PumpProfile> {
    if focal_gdd == 0.0 || !focal_gdd.is_finite() {
        return Err(invalid("focal GDD must be finite and non-zero"));
    }
    if !(aperture >= 0.0) || aperture > grid.span() {
        return Err(invalid(format!(
            "aperture {aperture:e} s must be non-negative and fit the {:e} s grid",
            grid.span()
        )));
    }
    if !(peak > 0.0) {
        return Err(invalid("pump peak must be positive"));
    }
    let half = aperture / 2.0;
    let env = ComplexEnvelope::from_fn(*grid, |t| {
        if aperture > 0.0 && t.abs() <= half {
            Complex64::from_polar(peak, t * t / (2.0 * focal_gdd))
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    PumpProfile::new(env, focal_gdd, (-half, half), peak)
}

/// Peak coupling giving unit conversion.
pub const UNIT_CONVERSION_COUPLING: f64 = FRAC_PI_2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_time_grid, to_spectrum};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn grid() -> TimeGrid {
        make_time_grid(1024, 102.4e-12).unwrap()
    }

    fn zeros() -> ComplexEnvelope {
        ComplexEnvelope::zeros(grid())
    }

    #[test]
    fn coefficient_examples() {
        let (c, s) = lens_coefficients(&[FRAC_PI_2, 0.0, FRAC_PI_4]);
        assert!(c[0].abs() < 1e-16 && (s[0] - 1.0).abs() < 1e-16);
        assert_eq!((c[1], s[1]), (1.0, 0.0));
        assert!((s[2] * s[2] - 0.5).abs() < 1e-15);
        for (c, s) in c.iter().zip(&s) {
            assert!((c * c + s * s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lens_config_efficiency() {
        let l = LensConfig::new(FRAC_PI_2, 1e-24).unwrap();
        assert!((l.efficiency() - 1.0).abs() < 1e-15);
        let l = LensConfig::from_efficiency(0.8, 1e-24).unwrap();
        assert!((l.efficiency() - 0.8).abs() < 1e-14);
        assert!(LensConfig::from_efficiency(1.2, 1e-24).is_err());
        assert!(LensConfig::new(1.0, 0.0).is_err());
    }

    #[test]
    fn unit_conversion_moves_signal_to_idler() {
        let g = grid();
        let sig = gaussian_pulse(&g, 0.0, 5e-12, 0.0).unwrap();
        let pump = PumpProfile::flat(g, 2e-24, 1.0).unwrap();
        let (s_out, i_out) = apply_sfg_analytic(&sig, &zeros(), &pump, FRAC_PI_2).unwrap();
        for (k, t) in g.times().enumerate() {
            let expect = -Complex64::from_polar(1.0, t * t / 4e-24) * sig.samples()[k];
            assert!((i_out.samples()[k] - expect).norm() < 1e-12);
            assert!(s_out.samples()[k].norm() < 1e-12);
        }
    }

    #[test]
    fn zero_coupling_is_identity() {
        let g = grid();
        let sig = gaussian_pulse(&g, 1e-12, 5e-12, 3e11).unwrap();
        let idl = gaussian_pulse(&g, -2e-12, 4e-12, 0.0).unwrap();
        let pump = PumpProfile::flat(g, 2e-24, 1.0).unwrap();
        let (s, i) = apply_sfg_analytic(&sig, &idl, &pump, 0.0).unwrap();
        assert_eq!(s, sig);
        assert_eq!(i, idl);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let other = make_time_grid(512, 102.4e-12).unwrap();
        let pump = PumpProfile::flat(grid(), 2e-24, 1.0).unwrap();
        let r = apply_sfg_analytic(&ComplexEnvelope::zeros(other), &zeros(), &pump, 1.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn double_pass_returns_minus_signal() {
        let g = grid();
        let sig = gaussian_pulse(&g, 2e-12, 6e-12, 1e11).unwrap();
        let pump = chirped_pump(&g, 1e-12, 2e-24, 1.0).unwrap();
        let (s1, i1) = apply_sfg_analytic(&sig, &zeros(), &pump, FRAC_PI_2).unwrap();
        let (s2, _) = apply_sfg_analytic(&s1, &i1, &pump, FRAC_PI_2).unwrap();
        for k in 0..g.len() {
            // the chirped pump is not flat, so compare against the local coupling
            let x = FRAC_PI_2 * pump.modulus()[k];
            let expect = (2.0 * x).cos() * sig.samples()[k];
            assert!((s2.samples()[k] - expect).norm() < 1e-10);
        }
        let flat = PumpProfile::flat(g, 5e-24, 1.0).unwrap();
        let (s1, i1) = apply_sfg_analytic(&sig, &zeros(), &flat, FRAC_PI_2).unwrap();
        let (s2, i2f) = apply_sfg_analytic(&s1, &i1, &flat, FRAC_PI_2).unwrap();
        for k in 0..g.len() {
            assert!((s2.samples()[k] + sig.samples()[k]).norm() < 1e-10);
            assert!(i2f.samples()[k].norm() < 1e-10);
        }
    }

    #[test]
    fn ideal_lens_chirp_and_errors() {
        let g = grid();
        let df = 4e-24;
        let flat = ComplexEnvelope::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let out = apply_ideal_lens(&flat, df).unwrap();
        // instantaneous frequency from the phase difference of neighbours
        for k in [100usize, 400, 700] {
            let dphi = (out.samples()[k + 1] / out.samples()[k]).arg();
            let t_mid = g.time(k) + g.dt() / 2.0;
            assert!((dphi / g.dt() - t_mid / df).abs() < 1e-6 * (t_mid / df).abs().max(1.0));
        }
        assert!((out.energy() - flat.energy()).abs() < 1e-12 * flat.energy());
        assert!(apply_ideal_lens(&flat, 0.0).is_err());
    }

    #[test]
    fn ideal_lens_shifts_pixels_by_tau_over_df() {
        let g = make_time_grid(4096, 409.6e-12).unwrap();
        let df = 50e-24;
        let tau0 = 2e-12;
        let a = apply_ideal_lens(&gaussian_pulse(&g, 0.0, tau0, 0.0).unwrap(), df).unwrap();
        let b = apply_ideal_lens(&gaussian_pulse(&g, tau0, tau0, 0.0).unwrap(), df).unwrap();
        let dw = b.carrier_frequency() - a.carrier_frequency();
        assert!((dw - tau0 / df).abs() < g.d_omega());
    }

    #[test]
    fn ode_step_errors() {
        let g = grid();
        let pump = PumpProfile::flat(g, 1e-24, 1.0).unwrap();
        let z = zeros();
        assert!(matches!(integrate_sfg_ode(&z, &z, &pump, 1.0, 0.0, 1e-3, 50), Err(Error::Step(_))));
        assert!(matches!(integrate_sfg_ode(&z, &z, &pump, 1.0, 2e5, 1e-3, 1000), Err(Error::Step(_))));
    }

    #[test]
    fn chirped_pump_phase_and_aperture() {
        let g = make_time_grid(8192, 819.2e-12).unwrap();
        let df = 10e-24;
        let tau_p = 0.5e-12;
        let pump = chirped_pump(&g, tau_p, df, 3.0).unwrap();
        assert!((pump.peak() - 3.0).abs() < 1e-12);
        let (t0, t1) = pump.aperture();
        assert!(t0 < 0.0 && t1 > 0.0);
        let phase = pump.phase();
        for (k, t) in g.times().enumerate() {
            if t >= t0 && t <= t1 {
                let mut d = phase[k] - t * t / (2.0 * df);
                d = (d + PI).rem_euclid(2.0 * PI) - PI;
                assert!(d.abs() < 1e-3, "phase deviation {d} at {t:e}");
            }
        }
    }

    #[test]
    fn shaped_pump_examples() {
        let g = grid();
        let p = shaped_pump(&g, 20e-12, 3e-24, 2.0).unwrap();
        for (k, t) in g.times().enumerate() {
            let m = p.modulus()[k];
            if t.abs() <= 10e-12 {
                assert!((m - 2.0).abs() < 1e-15);
            } else {
                assert_eq!(m, 0.0);
            }
        }
        let z = shaped_pump(&g, 0.0, 3e-24, 2.0).unwrap();
        assert!(z.modulus().iter().all(|&m| m == 0.0));
        assert!(shaped_pump(&g, 1e-9, 3e-24, 1.0).is_err());
        // sharp edges: the spectrum extends over at least T/D_f
        let spec = to_spectrum(p.envelope());
        assert!(spec.width_at_level(0.01) >= 20e-12 / 3e-24);
    }
}
