//! Refractive-index formulas for uniaxial crystals and wavevector
//! derivatives by adaptive finite differences.

use std::f64::consts::PI;

use serde::Serialize;

use super::CrystalDispersion;
use crate::error::{invalid, Error, Result};

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative agreement required between successive step halvings.
pub const FD_RELATIVE_TOLERANCE: f64 = 1e-6;

/// Initial finite-difference step, relative to the carrier frequency.
pub const FD_INITIAL_RELATIVE_STEP: f64 = 1e-2;

/// Index formula with the wavelength expressed in micrometres.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum IndexFormula {
    /// Wavelength-independent index.
    Constant(f64),
    /// `n² = a + Σ_j b_j·λ²/(λ² − c_j)`.
    Sellmeier { a: f64, terms: Vec<(f64, f64)> },
    /// `n² = a + b/(λ² − c) − d·λ²`.
    Eimerl { a: f64, b: f64, c: f64, d: f64 },
}

impl IndexFormula {
    pub fn index(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        match self {
            IndexFormula::Constant(n) => *n,
            IndexFormula::Sellmeier { a, terms } => {
                (a + terms.iter().map(|(b, c)| b * l2 / (l2 - c)).sum::<f64>()).sqrt()
            }
            IndexFormula::Eimerl { a, b, c, d } => (a + b / (l2 - c) - d * l2).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

/// Uniaxial crystal cut at `cut_angle_deg` to the optic axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniaxialCrystal {
    pub ordinary: IndexFormula,
    pub extraordinary: IndexFormula,
    pub cut_angle_deg: f64,
    /// Validity range of the coefficients [m].
    pub valid_range: (f64, f64),
}

impl UniaxialCrystal {
    /// β-barium borate, Eimerl et al. (1987) coefficients.
    pub fn bbo(cut_angle_deg: f64) -> Self {
        Self {
            ordinary: IndexFormula::Eimerl { a: 2.7405, b: 0.0184, c: 0.0179, d: 0.0155 },
            extraordinary: IndexFormula::Eimerl { a: 2.3730, b: 0.0128, c: 0.0156, d: 0.0044 },
            cut_angle_deg,
            valid_range: (0.22e-6, 1.06e-6),
        }
    }

    /// Isotropic medium with unit index everywhere.
    pub fn vacuum() -> Self {
        Self {
            ordinary: IndexFormula::Constant(1.0),
            extraordinary: IndexFormula::Constant(1.0),
            cut_angle_deg: 0.0,
            valid_range: (0.0, f64::INFINITY),
        }
    }

    pub fn check_wavelength(&self, wavelength: f64) -> Result<()> {
        let (min, max) = self.valid_range;
        if wavelength.is_finite() && wavelength >= min && wavelength <= max {
            Ok(())
        } else {
            Err(Error::Validity { wavelength, min, max })
        }
    }

    /// Index without a validity check; the extraordinary wave uses the
    /// angle-dependent index `1/n² = cos²θ/n_o² + sin²θ/n_e²`.
    pub fn index_unchecked(&self, wavelength: f64, pol: Polarization) -> f64 {
        let lambda_um = wavelength * 1e6;
        let n_o = self.ordinary.index(lambda_um);
        match pol {
            Polarization::Ordinary => n_o,
            Polarization::Extraordinary => {
                let n_e = self.extraordinary.index(lambda_um);
                let th = self.cut_angle_deg.to_radians();
                ((th.cos() / n_o).powi(2) + (th.sin() / n_e).powi(2)).powf(-0.5)
            }
        }
    }

    pub fn index(&self, wavelength: f64, pol: Polarization) -> Result<f64> {
        self.check_wavelength(wavelength)?;
        Ok(self.index_unchecked(wavelength, pol))
    }

    /// `k(ω) = n(ω)·ω/c`.
    pub fn wavenumber(&self, omega: f64, pol: Polarization) -> f64 {
        self.index_unchecked(2.0 * PI * SPEED_OF_LIGHT / omega, pol) * omega / SPEED_OF_LIGHT
    }
}

/// Carrier wavelength [m] and polarisation of one of the three waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wave {
    pub wavelength: f64,
    pub polarization: Polarization,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SellmeierSpec {
    pub crystal: UniaxialCrystal,
    pub signal: Wave,
    pub pump: Wave,
    pub idler: Wave,
    /// Crystal length [m].
    pub length: f64,
}

impl SellmeierSpec {
    /// 500 µm BBO cut at 28.1°, degenerate type-I: ordinary signal and pump
    /// at 830 nm, extraordinary idler at 415 nm.
    pub fn bbo_reference() -> Self {
        let o830 = Wave { wavelength: 830e-9, polarization: Polarization::Ordinary };
        Self {
            crystal: UniaxialCrystal::bbo(28.1),
            signal: o830,
            pump: o830,
            idler: Wave { wavelength: 415e-9, polarization: Polarization::Extraordinary },
            length: 500e-6,
        }
    }
}

/// Central finite-difference estimate of the first or second derivative.
fn central_difference(f: &impl Fn(f64) -> f64, x: f64, h: f64, order: u8) -> f64 {
    match order {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        _ => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
    }
}

/// First (`order = 1`) or second (`order = 2`) derivative of `f` at `x` by
/// central differences, halving the step from `h0` until successive
/// estimates agree to [`FD_RELATIVE_TOLERANCE`], then Richardson
/// extrapolating the last pair.
///
/// `scale` sets the absolute floor of the agreement test as
/// `1e-9 · scale`, so that derivatives that vanish still converge.
pub fn adaptive_derivative(f: impl Fn(f64) -> f64, x: f64, order: u8, h0: f64, scale: f64) -> Result<f64> {
    if !(order == 1 || order == 2) {
        return Err(invalid("only first and second derivatives are supported"));
    }
    let mut h = h0;
    let mut prev = central_difference(&f, x, h, order);
    for _ in 0..40 {
        h /= 2.0;
        let next = central_difference(&f, x, h, order);
        if (next - prev).abs() <= FD_RELATIVE_TOLERANCE * next.abs() + 1e-9 * scale.abs() {
            return Ok((4.0 * next - prev) / 3.0);
        }
        prev = next;
    }
    Err(invalid("finite-difference derivative did not converge"))
}

/// `(k, k', k'')` of one wave at its carrier, starting the difference step
/// at `rel_step` times the carrier frequency.
pub fn wave_derivatives(crystal: &UniaxialCrystal, wave: &Wave, rel_step: f64) -> Result<(f64, f64, f64)> {
    crystal.check_wavelength(wave.wavelength)?;
    let omega = 2.0 * PI * SPEED_OF_LIGHT / wave.wavelength;
    let k = |w: f64| crystal.wavenumber(w, wave.polarization);
    let k0 = k(omega);
    let h0 = rel_step * omega;
    let k1 = adaptive_derivative(k, omega, 1, h0, k0 / omega)?;
    let k2 = adaptive_derivative(k, omega, 2, h0, k0 / (omega * omega))?;
    Ok((k0, k1, k2))
}

pub fn dispersion_from_sellmeier_with_step(spec: &SellmeierSpec, rel_step: f64) -> Result<CrystalDispersion> {
    let (_, ks1, ks2) = wave_derivatives(&spec.crystal, &spec.signal, rel_step)?;
    let (_, kp1, _) = wave_derivatives(&spec.crystal, &spec.pump, rel_step)?;
    let (_, ki1, _) = wave_derivatives(&spec.crystal, &spec.idler, rel_step)?;
    CrystalDispersion::new(ks1, kp1, ki1, ks2, spec.length)
}

/// Wavevector derivatives of the three waves from the index formulas.
pub fn dispersion_from_sellmeier(spec: &SellmeierSpec) -> Result<CrystalDispersion> {
    dispersion_from_sellmeier_with_step(spec, FD_INITIAL_RELATIVE_STEP)
}
