//! Scenario files.
//!
//! ```text
//! units = SI
//!
//! [opa]
//! r0 = 1.0986122886681098      # squeezing parameter at Ω = 0
//! psi0 = 0                     # squeezing angle at Ω = 0 [rad]
//! omega_c = 1e12               # or `gvd` [s²/m] and `length` [m]
//! lo_phase = 0                 # optional; default: squeezed quadrature at Ω = 0
//! points = 401
//!
//! [imaging]
//! focal_gdd = 5e-24            # D_f [s²]
//! magnification = -3
//! efficiency = 0.8             # η
//!
//! [lens]
//! mode = ideal                 # ideal | chirped | shaped
//! pulse_duration = 5e-14       # chirped: τ_p [s]
//! window = 1e-11               # shaped: T [s]
//! coupling = 1.5707963267948966
//! peak = 1
//!
//! [pixels]
//! n = 4
//! duration = 1e-12             # τ0 [s]
//! weights = 1, 0.5, 1, 0.8     # optional real amplitudes
//!
//! [grid]
//! n = 8192                     # optional; default: derived from the pixel train
//! span = 4e-10                 # optional [s]
//!
//! [crystal]
//! file = bbo.conf              # dispersion file, relative to this file
//! # or the keys of a dispersion file inline, with an optional
//! # [crystal.sellmeier] section
//!
//! [design]
//! margin = 10
//!
//! [mismatch]
//! signal_extent = 1e13         # half-extent of the Ω_s axis [rad/s]; default δω_s
//! idler_extent = 1e14          # half-extent of the Ω_i axis [rad/s]; default max(δω_i, 2π/τ_i)
//! points = 101
//! threshold = 1.5707963267948966
//! model = linear               # linear | quadratic
//!
//! [sfg]
//! delta = 0                    # Δ [1/m]
//! n_steps = 1000
//! length = 1e-3                # default: crystal length, else 1 mm
//! ```
//!
//! Every section and key is optional; missing values take the defaults
//! above.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use chronolens::design::{
    parse_dispersion_file, parse_dispersion_section, DispersionSource, MismatchModel, DEFAULT_MARGIN,
    DEFAULT_MISMATCH_THRESHOLD,
};
use chronolens::kv::{Document, Entry, Section};
use chronolens::{Error, Result};

const SECTIONS: [(&str, &[&str]); 11] = [
    ("", &["units"]),
    ("opa", &["r0", "psi0", "omega_c", "gvd", "length", "lo_phase", "points"]),
    ("imaging", &["focal_gdd", "magnification", "efficiency"]),
    ("lens", &["mode", "pulse_duration", "window", "coupling", "peak"]),
    ("pixels", &["n", "duration", "weights"]),
    ("grid", &["n", "span"]),
    ("crystal", &[]),
    ("crystal.sellmeier", &[]),
    ("design", &["margin"]),
    ("mismatch", &["signal_extent", "idler_extent", "points", "threshold", "model"]),
    ("sfg", &["delta", "n_steps", "length"]),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaSpec {
    Direct(f64),
    Dispersion { gvd: f64, length: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpaSpec {
    pub r0: f64,
    pub psi0: f64,
    pub omega_c: OmegaSpec,
    pub lo_phase: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagingSpec {
    pub focal_gdd: f64,
    pub magnification: f64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LensKind {
    Ideal,
    Chirped { pulse_duration: f64 },
    Shaped { window: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensSpec {
    pub kind: LensKind,
    pub coupling: f64,
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelSpec {
    pub n: usize,
    pub duration: f64,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: Option<usize>,
    pub span: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchSpec {
    pub signal_extent: Option<f64>,
    pub idler_extent: Option<f64>,
    pub points: usize,
    pub threshold: f64,
    pub threshold_is_default: bool,
    pub model: MismatchModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfgSpec {
    pub delta: f64,
    pub n_steps: usize,
    pub length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub opa: OpaSpec,
    pub imaging: ImagingSpec,
    pub lens: LensSpec,
    pub pixels: PixelSpec,
    pub grid: GridSpec,
    pub crystal: Option<DispersionSource>,
    pub margin: f64,
    pub mismatch: MismatchSpec,
    pub sfg: SfgSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            opa: OpaSpec {
                r0: 3f64.ln(),
                psi0: 0.0,
                omega_c: OmegaSpec::Direct(1e12),
                lo_phase: None,
                points: 401,
            },
            imaging: ImagingSpec { focal_gdd: 5e-24, magnification: -3.0, efficiency: 0.8 },
            lens: LensSpec { kind: LensKind::Ideal, coupling: FRAC_PI_2, peak: 1.0 },
            pixels: PixelSpec { n: 4, duration: 1e-12, weights: None },
            grid: GridSpec { n: None, span: None },
            crystal: None,
            margin: DEFAULT_MARGIN,
            mismatch: MismatchSpec {
                signal_extent: None,
                idler_extent: None,
                points: 101,
                threshold: DEFAULT_MISMATCH_THRESHOLD,
                threshold_is_default: true,
                model: MismatchModel::Linear,
            },
            sfg: SfgSpec { delta: 0.0, n_steps: 1000, length: None },
        }
    }
}

fn config_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn f64_or(s: Option<&Section>, key: &str, default: f64) -> Result<f64> {
    Ok(opt_f64(s, key)?.unwrap_or(default))
}

fn opt_f64(s: Option<&Section>, key: &str) -> Result<Option<f64>> {
    s.and_then(|s| s.get(key)).map(Entry::as_f64).transpose()
}

fn opt_usize(s: Option<&Section>, key: &str) -> Result<Option<usize>> {
    s.and_then(|s| s.get(key)).map(Entry::as_usize).transpose()
}

fn positive(s: Option<&Section>, key: &str, value: f64) -> Result<f64> {
    if value > 0.0 {
        return Ok(value);
    }
    let line = s.and_then(|s| s.get(key)).map_or(1, |e| e.line);
    Err(config_error(line, format!("`{key}` must be positive")))
}

impl Scenario {
    /// Parses a scenario; relative crystal file paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let doc = Document::parse(text)?;
        doc.require_si_units()?;
        for section in doc.sections() {
            match SECTIONS.iter().find(|(name, _)| *name == section.name) {
                Some((name, keys)) if !name.starts_with("crystal") => section.check_keys(keys)?,
                Some(_) => {}
                None => {
                    return Err(config_error(section.line, format!("unknown section [{}]", section.name)))
                }
            }
        }
        let d = Scenario::default();

        let opa = doc.section("opa");
        let omega_c = match (opt_f64(opa, "omega_c")?, opt_f64(opa, "gvd")?, opt_f64(opa, "length")?) {
            (Some(w), None, None) => OmegaSpec::Direct(positive(opa, "omega_c", w)?),
            (None, Some(gvd), Some(length)) => OmegaSpec::Dispersion {
                gvd: positive(opa, "gvd", gvd)?,
                length: positive(opa, "length", length)?,
            },
            (None, None, None) => d.opa.omega_c,
            _ => {
                let line = opa.map_or(1, |s| s.line);
                return Err(config_error(line, "[opa] takes either `omega_c` or both `gvd` and `length`"));
            }
        };
        let r0 = f64_or(opa, "r0", d.opa.r0)?;
        if r0 < 0.0 {
            return Err(config_error(
                opa.and_then(|s| s.get("r0")).map_or(1, |e| e.line),
                "`r0` must be non-negative",
            ));
        }
        let points = opt_usize(opa, "points")?.unwrap_or(d.opa.points);
        if points < 2 {
            return Err(config_error(opa.map_or(1, |s| s.line), "[opa] `points` must be at least 2"));
        }
        let opa_spec = OpaSpec {
            r0,
            psi0: f64_or(opa, "psi0", d.opa.psi0)?,
            omega_c,
            lo_phase: opt_f64(opa, "lo_phase")?,
            points,
        };

        let im = doc.section("imaging");
        let imaging = ImagingSpec {
            focal_gdd: f64_or(im, "focal_gdd", d.imaging.focal_gdd)?,
            magnification: f64_or(im, "magnification", d.imaging.magnification)?,
            efficiency: f64_or(im, "efficiency", d.imaging.efficiency)?,
        };
        if imaging.focal_gdd == 0.0 {
            return Err(config_error(im.map_or(1, |s| s.line), "`focal_gdd` must be non-zero"));
        }
        if !(0.0..=1.0).contains(&imaging.efficiency) {
            let line = im.and_then(|s| s.get("efficiency")).map_or(1, |e| e.line);
            return Err(config_error(line, "`efficiency` must lie in [0, 1]"));
        }

        let lens = doc.section("lens");
        let mode = lens.and_then(|s| s.get("mode"));
        let kind = match mode.map_or("ideal", Entry::as_str) {
            "ideal" => LensKind::Ideal,
            "chirped" => {
                let tau = lens.unwrap().require("pulse_duration")?.as_f64()?;
                LensKind::Chirped { pulse_duration: positive(lens, "pulse_duration", tau)? }
            }
            "shaped" => {
                let window = lens.unwrap().require("window")?.as_f64()?;
                LensKind::Shaped { window: positive(lens, "window", window)? }
            }
            other => {
                return Err(mode
                    .unwrap()
                    .error(format!("unknown lens mode `{other}`; use ideal, chirped or shaped")))
            }
        };
        let lens_spec = LensSpec {
            kind,
            coupling: f64_or(lens, "coupling", d.lens.coupling)?,
            peak: positive(lens, "peak", f64_or(lens, "peak", d.lens.peak)?)?,
        };

        let px = doc.section("pixels");
        let n = opt_usize(px, "n")?.unwrap_or(d.pixels.n);
        if n == 0 {
            return Err(config_error(px.map_or(1, |s| s.line), "[pixels] `n` must be at least 1"));
        }
        let weights = match px.and_then(|s| s.get("weights")) {
            Some(e) => {
                let w = e.as_f64_list()?;
                if w.len() != n {
                    return Err(e.error(format!("`weights` has {} entries for {n} pixels", w.len())));
                }
                Some(w)
            }
            None => None,
        };
        let pixels = PixelSpec {
            n,
            duration: positive(px, "duration", f64_or(px, "duration", d.pixels.duration)?)?,
            weights,
        };

        let gr = doc.section("grid");
        let grid = GridSpec { n: opt_usize(gr, "n")?, span: opt_f64(gr, "span")? };
        if let Some(span) = grid.span {
            positive(gr, "span", span)?;
        }

        let crystal = match doc.section("crystal") {
            Some(main) => Some(crystal_source(main, doc.section("crystal.sellmeier"), base)?),
            None => match doc.section("crystal.sellmeier") {
                Some(s) => return Err(config_error(s.line, "[crystal.sellmeier] needs a [crystal] section")),
                None => None,
            },
        };

        let ds = doc.section("design");
        let margin = positive(ds, "margin", f64_or(ds, "margin", d.margin)?)?;

        let mm = doc.section("mismatch");
        let threshold = opt_f64(mm, "threshold")?;
        let model_entry = mm.and_then(|s| s.get("model"));
        let model = match model_entry.map_or("linear", Entry::as_str) {
            "linear" => MismatchModel::Linear,
            "quadratic" => MismatchModel::Quadratic,
            other => return Err(model_entry.unwrap().error(format!("unknown mismatch model `{other}`"))),
        };
        let mismatch = MismatchSpec {
            signal_extent: opt_f64(mm, "signal_extent")?
                .map(|v| positive(mm, "signal_extent", v))
                .transpose()?,
            idler_extent: opt_f64(mm, "idler_extent")?
                .map(|v| positive(mm, "idler_extent", v))
                .transpose()?,
            points: opt_usize(mm, "points")?.unwrap_or(d.mismatch.points).max(1),
            threshold: threshold.unwrap_or(d.mismatch.threshold),
            threshold_is_default: threshold.is_none(),
            model,
        };

        let sf = doc.section("sfg");
        let sfg = SfgSpec {
            delta: f64_or(sf, "delta", d.sfg.delta)?,
            n_steps: opt_usize(sf, "n_steps")?.unwrap_or(d.sfg.n_steps),
            length: opt_f64(sf, "length")?.map(|v| positive(sf, "length", v)).transpose()?,
        };

        Ok(Self { opa: opa_spec, imaging, lens: lens_spec, pixels, grid, crystal, margin, mismatch, sfg })
    }
}

fn crystal_source(main: &Section, sellmeier: Option<&Section>, base: &Path) -> Result<DispersionSource> {
    let Some(file) = main.get("file") else {
        return parse_dispersion_section(main, sellmeier, &[]);
    };
    if let Some(other) = main.entries.iter().find(|e| e.key != "file") {
        return Err(other.error("`file` excludes inline dispersion keys"));
    }
    if let Some(s) = sellmeier {
        return Err(config_error(s.line, "`file` excludes a [crystal.sellmeier] section"));
    }
    let path = base.join(file.as_str());
    let text = std::fs::read_to_string(&path)
        .map_err(|e| file.error(format!("cannot read {}: {e}", path.display())))?;
    parse_dispersion_file(&text).map_err(|e| match e {
        Error::Config { line, message } => file.error(format!("{}:{line}: {message}", path.display())),
        other => file.error(other.to_string()),
    })
}
