//! Squeezed-light source and homodyne squeezing spectra.
//!
//! The source is described by its squeezing parameter `r(Ω)` and squeezing
//! angle `ψ(Ω)`, equivalent to the Bogoliubov pair `(U, V)` through
//! `e^{±r} = |U| ± |V|` and `ψ = ½ arg(V/U)`. Both functions are taken even
//! in Ω, so the two-sided spectrum is exact.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Result};

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Squeezing source model `(r(Ω), ψ(Ω))`.
#[derive(Clone)]
pub struct OpaModel {
    r_of: ProfileFn,
    psi_of: ProfileFn,
    omega_c: f64,
}

impl fmt::Debug for OpaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OpaModel")
            .field("r(0)", &self.r(0.0))
            .field("psi(0)", &self.psi(0.0))
            .field("omega_c", &self.omega_c)
            .finish()
    }
}

impl OpaModel {
    /// Model from arbitrary profiles. Both are evaluated at `|Ω|`; `r` must
    /// be non-negative.
    pub fn new(
        r_of: impl Fn(f64) -> f64 + Send + Sync + 'static,
        psi_of: impl Fn(f64) -> f64 + Send + Sync + 'static,
        omega_c: f64,
    ) -> Result<Self> {
        if !(omega_c > 0.0) {
            return Err(invalid("characteristic frequency must be positive"));
        }
        Ok(Self { r_of: Arc::new(r_of), psi_of: Arc::new(psi_of), omega_c })
    }

    /// Reference model: constant `r0` and quadratic angle
    /// `ψ(Ω) = ψ0 + ½(Ω/Ω_c)²`.
    pub fn reference(r0: f64, psi0: f64, omega_c: f64) -> Result<Self> {
        if !(r0 >= 0.0) {
            return Err(invalid("squeezing parameter must be non-negative"));
        }
        Self::new(move |_| r0, move |w| psi0 + 0.5 * (w / omega_c).powi(2), omega_c)
    }

    /// Reference model from the source GVD `β₂` [s²/m] and length `l` [m],
    /// with `Ω_c = (β₂·l)^{-1/2}`.
    pub fn from_dispersion(r0: f64, psi0: f64, gvd: f64, length: f64) -> Result<Self> {
        if !(gvd * length > 0.0) {
            return Err(invalid("source GVD times length must be positive"));
        }
        Self::reference(r0, psi0, (gvd * length).powf(-0.5))
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn r(&self, omega: f64) -> f64 {
        (self.r_of)(omega.abs())
    }

    pub fn psi(&self, omega: f64) -> f64 {
        (self.psi_of)(omega.abs())
    }
}

/// Local-oscillator phase φ, stored modulo 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneSetting {
    lo_phase: f64,
}

impl HomodyneSetting {
    pub fn new(lo_phase: f64) -> Self {
        Self { lo_phase: lo_phase.rem_euclid(2.0 * PI) }
    }

    /// LO phase that detects the squeezed quadrature at Ω = 0.
    pub fn squeezed_quadrature(model: &OpaModel) -> Self {
        Self::new(model.psi(0.0) - PI / 2.0)
    }

    pub fn lo_phase(&self) -> f64 {
        self.lo_phase
    }

    /// `θ(Ω) = ψ(Ω) − φ`.
    pub fn theta(&self, model: &OpaModel, omega: f64) -> f64 {
        model.psi(omega) - self.lo_phase
    }
}

/// Squeezing spectrum normalised to shot noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingSpectrum {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
}

impl SqueezingSpectrum {
    /// First frequency where the spectrum rises through the shot-noise level,
    /// located by bisection on `f` between the bracketing grid points.
    pub fn first_shot_noise_crossing(&self, f: impl Fn(f64) -> f64) -> Option<f64> {
        let idx = self.values.windows(2).position(|w| w[0] < 1.0 && w[1] >= 1.0)?;
        Some(bisect(|w| f(w) - 1.0, self.frequencies[idx], self.frequencies[idx + 1]))
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Bogoliubov coefficients with the gauge `arg U = 0`:
/// `U = cosh r`, `V = sinh r · e^{2iψ}`.
pub fn bogoliubov_from_rpsi(model: &OpaModel, omega: f64) -> (Complex64, Complex64) {
    let r = model.r(omega);
    let psi = model.psi(omega);
    (Complex64::new(r.cosh(), 0.0), Complex64::from_polar(r.sinh(), 2.0 * psi))
}

/// `(r, ψ)` from a Bogoliubov pair: `e^{±r} = |U| ± |V|`, `ψ = ½ arg(V/U)`.
pub fn rpsi_from_bogoliubov(u: Complex64, v: Complex64) -> (f64, f64) {
    ((u.norm() + v.norm()).ln(), 0.5 * (v / u).arg())
}

/// Homodyne spectrum `cos²θ·e^{2r} + sin²θ·e^{-2r}` at a single frequency.
pub fn squeezing_value(model: &OpaModel, lo: &HomodyneSetting, omega: f64) -> f64 {
    let theta = lo.theta(model, omega);
    let r = model.r(omega);
    theta.cos().powi(2) * (2.0 * r).exp() + theta.sin().powi(2) * (-2.0 * r).exp()
}

pub fn squeezing_spectrum(model: &OpaModel, lo: &HomodyneSetting, omegas: &[f64]) -> SqueezingSpectrum {
    SqueezingSpectrum {
        frequencies: omegas.to_vec(),
        values: omegas.iter().map(|&w| squeezing_value(model, lo, w)).collect(),
    }
}

/// Spectrum after an imaging system of magnification `m` and efficiency
/// `eta` at a single frequency: `1 − η + η·S_s(|M|Ω)`.
pub fn imaged_squeezing_value(
    model: &OpaModel,
    lo: &HomodyneSetting,
    magnification: f64,
    eta: f64,
    omega: f64,
) -> f64 {
    1.0 - eta + eta * squeezing_value(model, lo, magnification.abs() * omega)
}

pub fn imaged_squeezing_spectrum(
    model: &OpaModel,
    lo: &HomodyneSetting,
    magnification: f64,
    eta: f64,
    omegas: &[f64],
) -> Result<SqueezingSpectrum> {
    if !(magnification.abs() > 0.0) || !magnification.is_finite() {
        return Err(invalid("magnification must be finite and non-zero"));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("efficiency must lie in [0, 1], got {eta}")));
    }
    Ok(SqueezingSpectrum {
        frequencies: omegas.to_vec(),
        values: omegas.iter().map(|&w| imaged_squeezing_value(model, lo, magnification, eta, w)).collect(),
    })
}

/// Source and imaged spectra on a shared grid over `[0, 4Ω_c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPair {
    pub omega_c: f64,
    pub input: SqueezingSpectrum,
    pub output: SqueezingSpectrum,
}

pub fn spectrum_pair(
    model: &OpaModel,
    lo: &HomodyneSetting,
    magnification: f64,
    eta: f64,
    n_points: usize,
) -> Result<SpectrumPair> {
    if n_points < 2 {
        return Err(invalid("need at least two frequency points"));
    }
    let w_max = 4.0 * model.omega_c();
    let omegas: Vec<f64> = (0..n_points).map(|k| w_max * k as f64 / (n_points - 1) as f64).collect();
    Ok(SpectrumPair {
        omega_c: model.omega_c(),
        input: squeezing_spectrum(model, lo, &omegas),
        output: imaged_squeezing_spectrum(model, lo, magnification, eta, &omegas)?,
    })
}
