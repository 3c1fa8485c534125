//! Crystal dispersion files.
//!
//! Either the derivatives are given directly:
//!
//! ```text
//! units = SI
//! length = 5e-4
//! k_prime_s = 5.6e-9
//! k_prime_p = 5.6e-9
//! k_prime_i = 5.8e-9
//! k_double_prime_s = 7.5e-26
//! ```
//!
//! or they are derived from index formulas in a `[sellmeier]` block:
//!
//! ```text
//! units = SI
//! length = 5e-4
//! [sellmeier]
//! form = eimerl                        # eimerl | sellmeier | constant
//! ordinary = 2.7405, 0.0184, 0.0179, 0.0155
//! extraordinary = 2.3730, 0.0128, 0.0156, 0.0044
//! valid_range = 2.2e-7, 1.06e-6
//! cut_angle_deg = 28.1
//! signal = 8.3e-7, o
//! pump = 8.3e-7, o
//! idler = 4.15e-7, e
//! ```
//!
//! `form = eimerl` takes `a, b, c, d` of `n² = a + b/(λ² − c) − d·λ²`;
//! `form = sellmeier` takes `a, b1, c1, b2, c2, …` of
//! `n² = a + Σ b_j·λ²/(λ² − c_j)`; `form = constant` takes `n`.
//! Coefficients use λ in micrometres, every other quantity is SI.
//! `crystal = bbo` selects built-in coefficients instead of
//! `form`/`ordinary`/`extraordinary`/`valid_range`.

use serde::Serialize;

use super::sellmeier::{
    dispersion_from_sellmeier, IndexFormula, Polarization, SellmeierSpec, UniaxialCrystal, Wave,
};
use super::CrystalDispersion;
use crate::error::Result;
use crate::kv::{Document, Entry, Section};

const DIRECT_KEYS: [&str; 4] = ["k_prime_s", "k_prime_p", "k_prime_i", "k_double_prime_s"];
const SELLMEIER_KEYS: [&str; 10] = [
    "crystal",
    "form",
    "ordinary",
    "extraordinary",
    "valid_range",
    "cut_angle_deg",
    "signal",
    "pump",
    "idler",
    "length",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionSource {
    Direct(CrystalDispersion),
    Sellmeier(SellmeierSpec),
}

impl DispersionSource {
    pub fn resolve(&self) -> Result<CrystalDispersion> {
        match self {
            DispersionSource::Direct(d) => Ok(*d),
            DispersionSource::Sellmeier(spec) => dispersion_from_sellmeier(spec),
        }
    }
}

fn formula(entry: &Entry, form: &str) -> Result<IndexFormula> {
    let c = entry.as_f64_list()?;
    match form {
        "constant" if c.len() == 1 => Ok(IndexFormula::Constant(c[0])),
        "eimerl" if c.len() == 4 => Ok(IndexFormula::Eimerl { a: c[0], b: c[1], c: c[2], d: c[3] }),
        "sellmeier" if c.len() % 2 == 1 => {
            Ok(IndexFormula::Sellmeier { a: c[0], terms: c[1..].chunks(2).map(|p| (p[0], p[1])).collect() })
        }
        "constant" | "eimerl" | "sellmeier" => Err(entry.error(format!(
            "`{}` has the wrong number of coefficients ({}) for form `{form}`",
            entry.key,
            c.len()
        ))),
        _ => Err(entry.error(format!("unknown index form `{form}`"))),
    }
}

fn wave(entry: &Entry) -> Result<Wave> {
    let parts = entry.as_list();
    if parts.len() != 2 {
        return Err(entry.error(format!("`{}` expects `wavelength, o|e`", entry.key)));
    }
    let wavelength: f64 = parts[0]
        .parse()
        .ok()
        .filter(|w: &f64| w.is_finite() && *w > 0.0)
        .ok_or_else(|| entry.error(format!("`{}`: invalid wavelength `{}`", entry.key, parts[0])))?;
    let polarization = match parts[1] {
        "o" => Polarization::Ordinary,
        "e" => Polarization::Extraordinary,
        p => return Err(entry.error(format!("`{}`: polarisation must be `o` or `e`, got `{p}`", entry.key))),
    };
    Ok(Wave { wavelength, polarization })
}

fn crystal(s: &Section) -> Result<UniaxialCrystal> {
    let cut = s.require("cut_angle_deg")?.as_f64()?;
    if let Some(name) = s.get("crystal") {
        for key in ["form", "ordinary", "extraordinary", "valid_range"] {
            if let Some(e) = s.get(key) {
                return Err(e.error(format!("`{key}` conflicts with `crystal = {}`", name.value)));
            }
        }
        return match name.as_str() {
            "bbo" => Ok(UniaxialCrystal::bbo(cut)),
            other => Err(name.error(format!("unknown crystal `{other}`"))),
        };
    }
    let form = s.require("form")?;
    let range_entry = s.require("valid_range")?;
    let range = range_entry.as_f64_list()?;
    if range.len() != 2 || !(range[0] < range[1]) {
        return Err(range_entry.error("`valid_range` expects `min, max` with min < max"));
    }
    Ok(UniaxialCrystal {
        ordinary: formula(s.require("ordinary")?, form.as_str())?,
        extraordinary: formula(s.require("extraordinary")?, form.as_str())?,
        cut_angle_deg: cut,
        valid_range: (range[0], range[1]),
    })
}

/// Reads a dispersion description from `main` (direct derivatives and
/// `length`) and an optional Sellmeier block. Keys in `extra_keys` are
/// tolerated in `main`.
pub fn parse_dispersion_section(
    main: &Section,
    sellmeier: Option<&Section>,
    extra_keys: &[&str],
) -> Result<DispersionSource> {
    let mut known: Vec<&str> = DIRECT_KEYS.to_vec();
    known.push("length");
    known.extend_from_slice(extra_keys);
    main.check_keys(&known)?;
    let direct: Vec<&Entry> = DIRECT_KEYS.iter().filter_map(|k| main.get(k)).collect();

    if let Some(s) = sellmeier {
        if let Some(e) = direct.first() {
            return Err(e.error("direct derivatives conflict with the sellmeier block"));
        }
        s.check_keys(&SELLMEIER_KEYS)?;
        let length_entry = match (main.get("length"), s.get("length")) {
            (Some(_), Some(e)) => return Err(e.error("`length` given twice")),
            (Some(e), None) | (None, Some(e)) => e,
            (None, None) => main.require("length")?,
        };
        let spec = SellmeierSpec {
            crystal: crystal(s)?,
            signal: wave(s.require("signal")?)?,
            pump: wave(s.require("pump")?)?,
            idler: wave(s.require("idler")?)?,
            length: positive(length_entry)?,
        };
        return Ok(DispersionSource::Sellmeier(spec));
    }

    let length = positive(main.require("length")?)?;
    let v = |k: &str| main.require(k).and_then(Entry::as_f64);
    let disp = CrystalDispersion::new(
        v("k_prime_s")?,
        v("k_prime_p")?,
        v("k_prime_i")?,
        v("k_double_prime_s")?,
        length,
    )
    .map_err(|e| main.require("length").map(|en| en.error(e.to_string())).unwrap_or(e))?;
    Ok(DispersionSource::Direct(disp))
}

fn positive(e: &Entry) -> Result<f64> {
    let v = e.as_f64()?;
    if v <= 0.0 {
        return Err(e.error(format!("`{}` must be positive", e.key)));
    }
    Ok(v)
}

/// Parses a stand-alone dispersion file; see the module docs.
pub fn parse_dispersion_file(text: &str) -> Result<DispersionSource> {
    let doc = Document::parse(text)?;
    doc.require_si_units()?;
    if let Some(extra) = doc.sections().iter().skip(1).find(|s| s.name != "sellmeier") {
        return Err(crate::Error::Config {
            line: extra.line,
            message: format!("unknown section [{}]", extra.name),
        });
    }
    parse_dispersion_section(doc.root(), doc.section("sellmeier"), &["units"])
}
