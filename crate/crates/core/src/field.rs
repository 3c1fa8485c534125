//! Sampled field envelopes on a uniform time grid.
//!
//! Spectra use the transform `a(Ω) = ∫ a(t) e^{iΩt} dt` with the inverse
//! `a(t) = (1/2π) ∫ a(Ω) e^{-iΩt} dΩ`; the discrete versions carry the `dt`
//! and `dΩ/2π` measure factors so that Parseval holds with the continuous
//! normalisation.
//!
//! Frequencies reported for envelopes (carrier shifts, spectral centroids)
//! follow the phase-slope convention: an envelope `e^{iωt}` has carrier `ω`.
//! Under the transform above that component sits at `Ω = -ω`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};

/// Ratio between the pulse duration and the amplitude FWHM, `2π / (8 ln 2)`.
pub const DURATION_PER_FWHM: f64 = 2.0 * PI / (8.0 * LN_2);

/// Sign of the quadratic spectral phase imprinted by a dispersive element.
///
/// A GDD `D` multiplies the spectrum by `exp(i·GDD_PHASE_SIGN·D·Ω²/2)`. With
/// the `e^{iΩt}` transform kernel this makes a short pulse sent through `-D_f`
/// acquire the temporal phase `+τ²/(2D_f)`, and the cascade
/// `D_s → lens → D_i` reproduce the single-lens imaging equation.
pub const GDD_PHASE_SIGN: f64 = 1.0;

/// Maximum fraction of the energy allowed in the guard bands at the grid edges.
pub const WINDOW_EDGE_LIMIT: f64 = 1e-6;

/// Width of each guard band, as a fraction of the grid length.
pub const EDGE_GUARD_FRACTION: f64 = 1.0 / 16.0;

/// Uniform time grid `t_n = t0 + n·dt`, `n = 0..n_samples`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    n_samples: usize,
    dt: f64,
    t0: f64,
}

impl TimeGrid {
    pub fn new(n_samples: usize, dt: f64, t0: f64) -> Result<Self> {
        if n_samples < 2 {
            return Err(invalid(format!("grid needs at least 2 samples, got {n_samples}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(invalid("grid start must be finite"));
        }
        Ok(Self { n_samples, dt, t0 })
    }

    /// Grid of `n_samples` points covering `span`, centred on zero.
    pub fn centered(n_samples: usize, span: f64) -> Result<Self> {
        if !(span > 0.0) || !span.is_finite() {
            return Err(invalid(format!("grid span must be positive, got {span}")));
        }
        if n_samples < 2 {
            return Err(invalid(format!("grid needs at least 2 samples, got {n_samples}")));
        }
        Self::new(n_samples, span / n_samples as f64, -span / 2.0)
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn span(&self) -> f64 {
        self.dt * self.n_samples as f64
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t0 + index as f64 * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |i| self.time(i))
    }

    /// Spectral step `2π/(n·dt)`.
    pub fn d_omega(&self) -> f64 {
        2.0 * PI / self.span()
    }

    /// Transform frequencies in ascending order, `Ω_j = (j - n/2)·dΩ`.
    pub fn omegas(&self) -> Vec<f64> {
        let half = (self.n_samples / 2) as f64;
        let dw = self.d_omega();
        (0..self.n_samples).map(|j| (j as f64 - half) * dw).collect()
    }

    /// Index of the sample nearest to `t`, if inside the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = ((t - self.t0) / self.dt).round();
        (x >= 0.0 && x < self.n_samples as f64).then_some(x as usize)
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.n_samples == other.n_samples
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t0 - other.t0).abs() <= 1e-9 * self.dt
    }
}

/// Grid of `n_samples` points spanning `span` seconds, centred on zero.
pub fn make_time_grid(n_samples: usize, span: f64) -> Result<TimeGrid> {
    TimeGrid::centered(n_samples, span)
}

/// Slowly varying complex amplitude sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEnvelope {
    grid: TimeGrid,
    samples: Vec<Complex64>,
    carrier_detuning: f64,
}

impl ComplexEnvelope {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(invalid(format!(
                "envelope has {} samples but the grid has {}",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, samples, carrier_detuning: 0.0 })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self { grid, samples: vec![Complex64::new(0.0, 0.0); grid.len()], carrier_detuning: 0.0 }
    }

    /// Samples `f(t)` at every grid point.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = grid.times().map(f).collect();
        Self { grid, samples, carrier_detuning: 0.0 }
    }

    pub fn with_carrier_detuning(mut self, detuning: f64) -> Self {
        self.carrier_detuning = detuning;
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn carrier_detuning(&self) -> f64 {
        self.carrier_detuning
    }

    /// Energy `Σ|a|²·dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dt
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.samples.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map_samples(|_, a| a * factor)
    }

    /// Pointwise map `a(t) → f(t, a(t))`.
    pub fn map_samples(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let samples = self.samples.iter().enumerate().map(|(i, &a)| f(self.grid.time(i), a)).collect();
        Self { grid: self.grid, samples, carrier_detuning: self.carrier_detuning }
    }

    /// `self + other`; both envelopes must share a grid.
    pub fn add(&self, other: &ComplexEnvelope) -> Result<Self> {
        self.check_same_grid(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, samples, carrier_detuning: self.carrier_detuning })
    }

    pub(crate) fn check_same_grid(&self, other: &ComplexEnvelope) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(invalid("envelopes are defined on different grids"))
        }
    }

    /// Fraction of the energy lying in the guard bands at both grid edges.
    pub fn edge_energy_fraction(&self) -> f64 {
        let n = self.samples.len();
        let guard = ((n as f64 * EDGE_GUARD_FRACTION) as usize).max(1);
        let total: f64 = self.samples.iter().map(|a| a.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let edge: f64 =
            self.samples[..guard].iter().chain(&self.samples[n - guard..]).map(|a| a.norm_sqr()).sum();
        edge / total
    }

    /// Fails with a window error when the guard bands carry more than
    /// [`WINDOW_EDGE_LIMIT`] of the energy.
    pub fn check_window(&self) -> Result<()> {
        let edge_fraction = self.edge_energy_fraction();
        if edge_fraction > WINDOW_EDGE_LIMIT {
            Err(Error::Window { edge_fraction, limit: WINDOW_EDGE_LIMIT })
        } else {
            Ok(())
        }
    }

    /// Energy-weighted mean time.
    pub fn temporal_centroid(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, a) in self.samples.iter().enumerate() {
            let w = a.norm_sqr();
            num += w * self.grid.time(i);
            den += w;
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Full width at half maximum of `|a(t)|`, with linear interpolation of the
    /// crossings. `None` when the half-maximum level is not reached inside
    /// the grid on both sides of the peak.
    pub fn amplitude_fwhm(&self) -> Option<f64> {
        let mags: Vec<f64> = self.samples.iter().map(|a| a.norm()).collect();
        half_max_width(&mags, self.grid.dt)
    }

    /// Pulse duration in the `FWHM × 2π/(8 ln 2)` convention.
    pub fn duration(&self) -> Option<f64> {
        self.amplitude_fwhm().map(|w| w * DURATION_PER_FWHM)
    }

    /// Carrier frequency in the phase-slope convention, measured as the
    /// negated spectral centroid.
    pub fn carrier_frequency(&self) -> f64 {
        -to_spectrum(self).centroid()
    }

    /// Band-limited (trigonometric) interpolation of the envelope at
    /// arbitrary times. Points outside the grid evaluate to zero.
    pub fn interpolate(&self, times: &[f64]) -> Vec<Complex64> {
        let spec = to_spectrum(self);
        let grid = self.grid;
        let n = grid.len();
        let dw = grid.d_omega();
        let w_first = -((n / 2) as f64) * dw;
        let t_end = grid.t0 + grid.span();
        let norm = dw / (2.0 * PI);
        times
            .par_iter()
            .map(|&t| {
                if t < grid.t0 || t >= t_end {
                    return Complex64::new(0.0, 0.0);
                }
                let step = Complex64::from_polar(1.0, -dw * t);
                let mut phasor = Complex64::from_polar(1.0, -w_first * t);
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, a) in spec.samples.iter().enumerate() {
                    // resynchronise the recurrence to bound round-off drift
                    if j % 256 == 0 {
                        phasor = Complex64::from_polar(1.0, -(w_first + j as f64 * dw) * t);
                    }
                    acc += a * phasor;
                    phasor *= step;
                }
                acc * norm
            })
            .collect()
    }
}

pub(crate) fn half_max_width(mags: &[f64], dx: f64) -> Option<f64> {
    let (peak_idx, &peak) = mags.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if peak <= 0.0 {
        return None;
    }
    let half = peak / 2.0;
    let mut left = None;
    for i in (0..peak_idx).rev() {
        if mags[i] < half {
            let frac = (half - mags[i]) / (mags[i + 1] - mags[i]);
            left = Some(i as f64 + frac);
            break;
        }
    }
    let mut right = None;
    for i in peak_idx + 1..mags.len() {
        if mags[i] < half {
            let frac = (mags[i - 1] - half) / (mags[i - 1] - mags[i]);
            right = Some((i - 1) as f64 + frac);
            break;
        }
    }
    Some((right? - left?) * dx)
}

/// Spectral amplitudes on the ascending transform-frequency grid implied by
/// a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: TimeGrid,
    samples: Vec<Complex64>,
    carrier_detuning: f64,
}

impl Spectrum {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(invalid("spectrum length does not match the grid"));
        }
        Ok(Self { grid, samples, carrier_detuning: 0.0 })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.grid.omegas()
    }

    /// `(1/2π)·Σ|a(Ω)|²·dΩ`, equal to the temporal energy by Parseval.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.d_omega() / (2.0 * PI)
    }

    /// Power-weighted mean transform frequency `⟨Ω⟩`.
    pub fn centroid(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (w, a) in self.omegas().into_iter().zip(&self.samples) {
            let p = a.norm_sqr();
            num += p * w;
            den += p;
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// FWHM of the spectral amplitude `|a(Ω)|`.
    pub fn amplitude_fwhm(&self) -> Option<f64> {
        let mags: Vec<f64> = self.samples.iter().map(|a| a.norm()).collect();
        half_max_width(&mags, self.grid.d_omega())
    }

    /// Distance between the outermost frequencies whose amplitude reaches
    /// `level × max|a(Ω)|`.
    pub fn width_at_level(&self, level: f64) -> f64 {
        let peak = self.samples.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let thresh = level * peak;
        let first = self.samples.iter().position(|a| a.norm() >= thresh);
        let last = self.samples.iter().rposition(|a| a.norm() >= thresh);
        match (first, last) {
            (Some(i), Some(j)) => (j - i) as f64 * self.grid.d_omega(),
            _ => 0.0,
        }
    }

    /// Pointwise map `a(Ω) → f(Ω, a(Ω))`.
    pub fn map_samples(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let samples = self.omegas().into_iter().zip(&self.samples).map(|(w, &a)| f(w, a)).collect();
        Self { grid: self.grid, samples, carrier_detuning: self.carrier_detuning }
    }
}

fn fft_index(j: usize, n: usize) -> usize {
    // ascending position j holds the signed bin j - n/2
    (j + n - n / 2) % n
}

/// Forward transform `a(Ω_j) = Σ_n a(t_n) e^{iΩ_j t_n} dt`.
pub fn to_spectrum(env: &ComplexEnvelope) -> Spectrum {
    let grid = env.grid;
    let n = grid.len();
    let mut buf = env.samples.clone();
    // e^{+2πikn/N}, i.e. rustfft's unnormalised inverse
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut buf);
    let omegas = grid.omegas();
    let samples =
        (0..n).map(|j| buf[fft_index(j, n)] * Complex64::from_polar(grid.dt, omegas[j] * grid.t0)).collect();
    Spectrum { grid, samples, carrier_detuning: env.carrier_detuning }
}

/// Inverse transform `a(t_n) = (dΩ/2π) Σ_j a(Ω_j) e^{-iΩ_j t_n}`.
pub fn to_time(spec: &Spectrum) -> ComplexEnvelope {
    let grid = spec.grid;
    let n = grid.len();
    let omegas = grid.omegas();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        buf[fft_index(j, n)] = spec.samples[j] * Complex64::from_polar(1.0, -omegas[j] * grid.t0);
    }
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let norm = 1.0 / (n as f64 * grid.dt);
    let samples = buf.into_iter().map(|a| a * norm).collect();
    ComplexEnvelope { grid, samples, carrier_detuning: spec.carrier_detuning }
}

/// Gaussian standard deviation (of the amplitude) for a pulse `duration`.
pub fn gaussian_sigma(duration: f64) -> f64 {
    duration / DURATION_PER_FWHM / (2.0 * (2.0 * LN_2).sqrt())
}

/// Gaussian pulse `exp(-(t-c)²/2σ²)·exp(i·carrier_shift·(t-c))` whose
/// duration, in the `FWHM × 2π/(8 ln 2)` convention, equals `duration`.
pub fn gaussian_pulse(
    grid: &TimeGrid,
    center: f64,
    duration: f64,
    carrier_shift: f64,
) -> Result<ComplexEnvelope> {
    if !(duration > 3.0 * grid.dt) {
        return Err(Error::Resolution { duration, dt: grid.dt });
    }
    let sigma = gaussian_sigma(duration);
    let env = ComplexEnvelope::from_fn(*grid, |t| {
        let x = t - center;
        Complex64::from_polar((-x * x / (2.0 * sigma * sigma)).exp(), carrier_shift * x)
    });
    let first = env.samples[0].norm();
    let last = env.samples[grid.len() - 1].norm();
    let edge = first.max(last);
    if edge > 1e-6 {
        return Err(Error::Window { edge_fraction: edge, limit: 1e-6 });
    }
    Ok(env)
}

/// Propagates through a dispersive element of group delay dispersion `gdd`
/// without checking the window.
pub fn propagate_gdd(env: &ComplexEnvelope, gdd: f64) -> ComplexEnvelope {
    if gdd == 0.0 {
        return env.clone();
    }
    let spec = to_spectrum(env)
        .map_samples(|w, a| a * Complex64::from_polar(1.0, GDD_PHASE_SIGN * gdd * w * w / 2.0));
    to_time(&spec)
}

/// Propagates through a dispersive element of GDD `gdd` [s²]; fails if the
/// dispersed field reaches the grid edges.
pub fn apply_gdd(env: &ComplexEnvelope, gdd: f64) -> Result<ComplexEnvelope> {
    if !gdd.is_finite() {
        return Err(invalid("GDD must be finite"));
    }
    let out = propagate_gdd(env, gdd);
    out.check_window()?;
    Ok(out)
}

/// Relative L2 distance `‖a − e^{iφ}b‖/‖b‖` minimised over the global phase φ.
pub fn l2_error_mod_phase(a: &ComplexEnvelope, b: &ComplexEnvelope) -> Result<f64> {
    a.check_same_grid(b)?;
    let overlap: Complex64 = a.samples.iter().zip(&b.samples).map(|(x, y)| x * y.conj()).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    let num: f64 = a.samples.iter().zip(&b.samples).map(|(x, y)| (x - phase * y).norm_sqr()).sum();
    let den: f64 = b.samples.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        return Err(invalid("reference envelope is identically zero"));
    }
    Ok((num / den).sqrt())
}

/// Relative L2 distance `‖a − b‖/‖b‖`.
pub fn l2_error(a: &ComplexEnvelope, b: &ComplexEnvelope) -> Result<f64> {
    a.check_same_grid(b)?;
    let num: f64 = a.samples.iter().zip(&b.samples).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.samples.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        return Err(invalid("reference envelope is identically zero"));
    }
    Ok((num / den).sqrt())
}
