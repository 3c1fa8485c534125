//! Single-lens temporal imaging of pixel trains.
//!
//! The chain is: input dispersion `D_s` → time lens → output dispersion
//! `D_i`, with `1/D_s + 1/D_i = 1/D_f` and magnification `M = -D_i/D_s`.
//! Its output should reproduce the imaging equation
//! `a'(τ) = (-1/√M)·e^{iτ²/(2M·D_f)}·a(τ/M)` up to a global phase.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::{apply_gdd, gaussian_pulse, propagate_gdd, ComplexEnvelope, TimeGrid, DURATION_PER_FWHM};
use crate::lens::{apply_ideal_lens, apply_sfg_analytic, PumpProfile};

/// Pixels converted with less than this efficiency are flagged lossy.
pub const LOSSLESS_EFFICIENCY: f64 = 0.99;

/// Amplitude level, relative to the peak, allowed at the boundary between
/// adjacent measurement windows.
pub const WINDOW_OVERLAP_LEVEL: f64 = 1e-3;

/// Dispersion settings of a single-lens imaging system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagingConfig {
    pub focal_gdd: f64,
    pub magnification: f64,
    pub input_gdd: f64,
    pub output_gdd: f64,
}

impl ImagingConfig {
    /// Builds a configuration from the three GDDs, checking the imaging
    /// condition to 1e-12 relative.
    pub fn from_gdds(input_gdd: f64, output_gdd: f64, focal_gdd: f64) -> Result<Self> {
        if input_gdd == 0.0 || output_gdd == 0.0 || focal_gdd == 0.0 {
            return Err(invalid("all GDDs must be non-zero"));
        }
        let lhs = 1.0 / input_gdd + 1.0 / output_gdd;
        let rhs = 1.0 / focal_gdd;
        if (lhs - rhs).abs() > 1e-12 * rhs.abs() {
            return Err(invalid("GDDs violate the imaging condition 1/D_s + 1/D_i = 1/D_f"));
        }
        Ok(Self { focal_gdd, magnification: -output_gdd / input_gdd, input_gdd, output_gdd })
    }

    /// `Δt0 = D_s·δω_s` for a pixel of duration `tau0`.
    pub fn stretched_pixel_duration(&self, tau0: f64) -> f64 {
        self.input_gdd.abs() * 2.0 * PI / tau0
    }
}

/// Solves the imaging condition for a focal GDD and magnification:
/// `D_s = D_f(M−1)/M`, `D_i = D_f(1−M)`.
pub fn solve_imaging_config(focal_gdd: f64, magnification: f64) -> Result<ImagingConfig> {
    if focal_gdd == 0.0 || !focal_gdd.is_finite() {
        return Err(invalid("focal GDD must be finite and non-zero"));
    }
    if magnification == 0.0 || !magnification.is_finite() {
        return Err(invalid("magnification must be finite and non-zero"));
    }
    if magnification == 1.0 {
        return Err(invalid("magnification 1 needs zero input dispersion"));
    }
    Ok(ImagingConfig {
        focal_gdd,
        magnification,
        input_gdd: focal_gdd * (magnification - 1.0) / magnification,
        output_gdd: focal_gdd * (1.0 - magnification),
    })
}

/// Train of `N` Gaussian pixels of duration τ0, spaced by τ0 and centred on
/// zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelTrain {
    pixel_duration: f64,
    amplitudes: Vec<Complex64>,
}

impl PixelTrain {
    pub fn uniform(n_pixels: usize, pixel_duration: f64) -> Result<Self> {
        Self::with_amplitudes(vec![Complex64::new(1.0, 0.0); n_pixels], pixel_duration)
    }

    pub fn with_amplitudes(amplitudes: Vec<Complex64>, pixel_duration: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("a pixel train needs at least one pixel"));
        }
        if !(pixel_duration > 0.0) {
            return Err(invalid("pixel duration must be positive"));
        }
        Ok(Self { pixel_duration, amplitudes })
    }

    pub fn n_pixels(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn pixel_duration(&self) -> f64 {
        self.pixel_duration
    }

    pub fn spacing(&self) -> f64 {
        self.pixel_duration
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `T_F = N·τ0`.
    pub fn field_of_view(&self) -> f64 {
        self.n_pixels() as f64 * self.pixel_duration
    }

    /// Start of the field of view.
    pub fn start_time(&self) -> f64 {
        -self.field_of_view() / 2.0
    }

    /// Signal bandwidth `δω_s = 2π/τ0`.
    pub fn bandwidth(&self) -> f64 {
        2.0 * PI / self.pixel_duration
    }

    pub fn centers(&self) -> Vec<f64> {
        let n = self.n_pixels() as f64;
        (0..self.n_pixels()).map(|k| (k as f64 - (n - 1.0) / 2.0) * self.pixel_duration).collect()
    }

    /// Duration of the stretched train `T_s = Δt0 + (N−1)τ0`.
    pub fn stretched_duration(&self, config: &ImagingConfig) -> f64 {
        config.stretched_pixel_duration(self.pixel_duration)
            + (self.n_pixels() as f64 - 1.0) * self.pixel_duration
    }

    /// Pixel `k` alone, weighted by its amplitude.
    pub fn pixel_envelope(&self, grid: &TimeGrid, k: usize) -> Result<ComplexEnvelope> {
        let center = *self.centers().get(k).ok_or_else(|| invalid("pixel index out of range"))?;
        Ok(gaussian_pulse(grid, center, self.pixel_duration, 0.0)?.scale(self.amplitudes[k]))
    }

    pub fn synthesize(&self, grid: &TimeGrid) -> Result<ComplexEnvelope> {
        let mut env = ComplexEnvelope::zeros(*grid);
        for k in 0..self.n_pixels() {
            env = env.add(&self.pixel_envelope(grid, k)?)?;
        }
        Ok(env)
    }

    /// Grid with `dt = min(1, |M|)·τ0/10` spanning at least four times the
    /// largest extent met along the chain, rounded up to a power of two.
    pub fn suggested_grid(&self, config: &ImagingConfig) -> Result<TimeGrid> {
        let tau0 = self.pixel_duration;
        let m = config.magnification.abs();
        let dt = tau0 * m.min(1.0) / 10.0;
        let extent = self
            .stretched_duration(config)
            .max(m * (self.field_of_view() + 4.0 * tau0))
            .max(self.field_of_view() + 4.0 * tau0);
        let n = ((4.0 * extent / dt).ceil() as usize).next_power_of_two().max(64);
        TimeGrid::centered(n, n as f64 * dt)
    }
}

/// Lens used in [`simulate_chain`].
#[derive(Debug, Clone, PartialEq)]
pub enum LensMode {
    /// Infinite aperture, unit conversion.
    Ideal,
    /// Full SFG beam splitter with the given pump and peak coupling.
    Pumped { pump: PumpProfile, coupling: f64 },
}

/// Measurements of one pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelMeasurement {
    pub centroid: f64,
    /// Amplitude FWHM [s].
    pub fwhm: Option<f64>,
    /// FWHM × 2π/(8 ln 2) [s].
    pub duration: Option<f64>,
    /// Carrier frequency (phase-slope convention) [rad/s].
    pub carrier_frequency: f64,
    pub energy: f64,
    /// Converted fraction of the pixel energy, when known.
    pub efficiency: Option<f64>,
    pub lossy: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelReport {
    pub pixels: Vec<PixelMeasurement>,
    /// Mean signed distance between consecutive measured pixels, in the
    /// order the centres were given.
    pub spacing: f64,
    /// Mean carrier difference between consecutive pixels, same order.
    pub frequency_step: f64,
    /// Least-squares slope of output against input pixel centres.
    pub magnification: Option<f64>,
}

impl PixelReport {
    fn from_pixels(pixels: Vec<PixelMeasurement>) -> Self {
        let n = pixels.len();
        let (spacing, frequency_step) = if n > 1 {
            let span = pixels[n - 1].centroid - pixels[0].centroid;
            let dw = pixels[n - 1].carrier_frequency - pixels[0].carrier_frequency;
            (span / (n - 1) as f64, dw / (n - 1) as f64)
        } else {
            (0.0, 0.0)
        };
        Self { pixels, spacing, frequency_step, magnification: None }
    }

    /// True when the output order is reversed with respect to the input.
    pub fn inverted(&self) -> bool {
        self.magnification.is_some_and(|m| m < 0.0)
    }
}

fn measure_window(env: &ComplexEnvelope, lo: usize, hi: usize) -> PixelMeasurement {
    let samples: Vec<Complex64> = env
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &a)| if i >= lo && i < hi { a } else { Complex64::new(0.0, 0.0) })
        .collect();
    let win = ComplexEnvelope::new(*env.grid(), samples).expect("same grid length");
    let fwhm = win.amplitude_fwhm();
    PixelMeasurement {
        centroid: win.temporal_centroid(),
        fwhm,
        duration: fwhm.map(|w| w * DURATION_PER_FWHM),
        carrier_frequency: win.carrier_frequency(),
        energy: win.energy(),
        efficiency: None,
        lossy: false,
    }
}

/// Measures the pixels of `env` in windows bounded by the midpoints between
/// consecutive expected centres. Fails if the field at a window boundary
/// exceeds [`WINDOW_OVERLAP_LEVEL`] of the peak amplitude.
pub fn measure_pixels(env: &ComplexEnvelope, expected_centers: &[f64]) -> Result<PixelReport> {
    if expected_centers.is_empty() {
        return Err(Error::Measurement("no pixel centres given".into()));
    }
    let grid = env.grid();
    let mut order: Vec<usize> = (0..expected_centers.len()).collect();
    order.sort_by(|&a, &b| expected_centers[a].total_cmp(&expected_centers[b]));
    let peak = env.peak_amplitude();
    let mut bounds = vec![0usize];
    for w in order.windows(2) {
        let mid = 0.5 * (expected_centers[w[0]] + expected_centers[w[1]]);
        let idx = grid
            .index_of(mid)
            .ok_or_else(|| Error::Measurement(format!("window boundary {mid:e} s off grid")))?;
        let level = env.samples()[idx].norm();
        if level > WINDOW_OVERLAP_LEVEL * peak {
            return Err(Error::Measurement(format!(
                "pixels overlap: amplitude {:.3e} of peak at boundary {mid:e} s",
                level / peak
            )));
        }
        bounds.push(idx);
    }
    bounds.push(grid.len());
    let mut measured = vec![None; expected_centers.len()];
    for (slot, &k) in order.iter().enumerate() {
        measured[k] = Some(measure_window(env, bounds[slot], bounds[slot + 1]));
    }
    Ok(PixelReport::from_pixels(measured.into_iter().map(Option::unwrap).collect()))
}

/// Direct evaluation of the imaging equation by band-limited interpolation
/// of the input at `τ/M`.
pub fn ideal_image(env_in: &ComplexEnvelope, config: &ImagingConfig) -> Result<ComplexEnvelope> {
    let m = config.magnification;
    let grid = *env_in.grid();
    let query: Vec<f64> = grid.times().map(|t| t / m).collect();
    let values = env_in.interpolate(&query);
    let prefactor = -Complex64::new(m, 0.0).sqrt().inv();
    let samples = grid
        .times()
        .zip(values)
        .map(|(t, a)| prefactor * Complex64::from_polar(1.0, t * t / (2.0 * m * config.focal_gdd)) * a)
        .collect();
    let out = ComplexEnvelope::new(grid, samples)?;
    out.check_window()?;
    Ok(out)
}

/// Fields at every stage of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub input: ComplexEnvelope,
    /// After the input dispersion, at the lens.
    pub intermediate: ComplexEnvelope,
    /// Idler right after the lens.
    pub after_lens: ComplexEnvelope,
    pub output: ComplexEnvelope,
    /// Energy fraction in the guard bands of the output; only enforced in
    /// ideal mode.
    pub output_edge_fraction: f64,
    pub report: PixelReport,
}

struct Stages {
    intermediate: ComplexEnvelope,
    after_lens: ComplexEnvelope,
    output: ComplexEnvelope,
}

fn propagate_chain(input: &ComplexEnvelope, config: &ImagingConfig, lens: &LensMode) -> Result<Stages> {
    let intermediate = apply_gdd(input, config.input_gdd)?;
    let after_lens = match lens {
        LensMode::Ideal => apply_ideal_lens(&intermediate, config.focal_gdd)?,
        LensMode::Pumped { pump, coupling } => {
            let vacuum = ComplexEnvelope::zeros(*input.grid());
            apply_sfg_analytic(&intermediate, &vacuum, pump, *coupling)?.1
        }
    };
    let output = match lens {
        LensMode::Ideal => apply_gdd(&after_lens, config.output_gdd)?,
        // sharp pump edges make the converted field leak spectrally; the
        // edge fraction is reported instead of enforced
        LensMode::Pumped { .. } => propagate_gdd(&after_lens, config.output_gdd),
    };
    Ok(Stages { intermediate, after_lens, output })
}

/// Propagates a pixel train through the imaging chain and measures every
/// output pixel. Pixels are measured one at a time (the chain is linear), so
/// overlapping stretched pixels do not bias the diagnostics.
pub fn simulate_chain(
    train: &PixelTrain,
    config: &ImagingConfig,
    lens: &LensMode,
    grid: &TimeGrid,
) -> Result<ChainOutput> {
    if let LensMode::Pumped { pump, .. } = lens {
        if !pump.grid().same_as(grid) {
            return Err(invalid("pump and pixel train use different grids"));
        }
    }
    let input = train.synthesize(grid)?;
    let stages = propagate_chain(&input, config, lens)?;

    let centers = train.centers();
    let mut pixels = Vec::with_capacity(train.n_pixels());
    for (k, &c) in centers.iter().enumerate() {
        let single = train.pixel_envelope(grid, k)?;
        let st = propagate_chain(&single, config, lens)?;
        let mut m = measure_pixels(&st.output, &[config.magnification * c])?.pixels.remove(0);
        let e_in = single.energy();
        let eff = if e_in > 0.0 { st.after_lens.energy() / e_in } else { 0.0 };
        m.efficiency = Some(eff);
        m.lossy = eff < LOSSLESS_EFFICIENCY;
        pixels.push(m);
    }
    let mut report = PixelReport::from_pixels(pixels);
    if centers.len() > 1 {
        let mean_in = centers.iter().sum::<f64>() / centers.len() as f64;
        let mean_out = report.pixels.iter().map(|p| p.centroid).sum::<f64>() / centers.len() as f64;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (c, p) in centers.iter().zip(&report.pixels) {
            sxy += (c - mean_in) * (p.centroid - mean_out);
            sxx += (c - mean_in).powi(2);
        }
        report.magnification = Some(sxy / sxx);
    }
    Ok(ChainOutput {
        output_edge_fraction: stages.output.edge_energy_fraction(),
        input,
        intermediate: stages.intermediate,
        after_lens: stages.after_lens,
        output: stages.output,
        report,
    })
}
