use std::f64::consts::PI;

use chronolens::design::{
    active_pump_bandwidth, idler_bandwidth, idler_delay, mismatch_map, CrystalDispersion, DesignInputs,
    DesignReport, Overlays, PumpPreparation,
};
use chronolens::field::{apply_gdd, l2_error_mod_phase, TimeGrid};
use chronolens::imaging::{
    ideal_image, simulate_chain, solve_imaging_config, ImagingConfig, LensMode, PixelTrain,
};
use chronolens::lens::{apply_sfg_analytic, chirped_pump, integrate_sfg_ode, shaped_pump, PumpProfile};
use chronolens::squeezing::{spectrum_pair, HomodyneSetting, OpaModel, SqueezingSpectrum};
use chronolens::{Complex64, Error};
use serde_json::{json, Value};
use thiserror::Error;

use crate::output::{format_float, Artifact};
use crate::scenario::{LensKind, OmegaSpec, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{message}\nsuggestion: {suggestion}")]
    Window { message: String, suggestion: String },
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Window { .. } => 4,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidArgument(_) | Error::Validity { .. } | Error::Step(_) => {
                CliError::Config(e.to_string())
            }
            Error::Infeasible(_) => CliError::Infeasible(e.to_string()),
            Error::Window { .. } | Error::Resolution { .. } => CliError::Window {
                message: e.to_string(),
                suggestion: "enlarge the time grid with --grid-n or [grid] n/span".into(),
            },
            Error::Measurement(_) => CliError::Failure(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Files to write and whether the scenario met its budgets.
pub struct CommandOutput {
    pub artifacts: Vec<Artifact>,
    pub feasible: bool,
}

impl From<Vec<Artifact>> for CommandOutput {
    fn from(artifacts: Vec<Artifact>) -> Self {
        Self { artifacts, feasible: true }
    }
}

fn spectrum_csv(name: &str, omega_c: f64, s: &SqueezingSpectrum) -> Artifact {
    let rows =
        s.frequencies.iter().zip(&s.values).map(|(&w, &v)| vec![format_float(w / omega_c), format_float(v)]);
    Artifact::csv(name, &["omega_over_omega_c", "S"], rows)
}

pub fn spectrum(s: &Scenario) -> CliResult<CommandOutput> {
    let model = match s.opa.omega_c {
        OmegaSpec::Direct(w) => OpaModel::reference(s.opa.r0, s.opa.psi0, w)?,
        OmegaSpec::Dispersion { gvd, length } => {
            OpaModel::from_dispersion(s.opa.r0, s.opa.psi0, gvd, length)?
        }
    };
    let lo =
        s.opa.lo_phase.map_or_else(|| HomodyneSetting::squeezed_quadrature(&model), HomodyneSetting::new);
    let pair = spectrum_pair(&model, &lo, s.imaging.magnification, s.imaging.efficiency, s.opa.points)?;
    Ok(vec![
        spectrum_csv("spectrum_input.csv", pair.omega_c, &pair.input),
        spectrum_csv("spectrum_output.csv", pair.omega_c, &pair.output),
    ]
    .into())
}

fn pixel_train(s: &Scenario) -> CliResult<PixelTrain> {
    Ok(match &s.pixels.weights {
        Some(w) => PixelTrain::with_amplitudes(
            w.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            s.pixels.duration,
        )?,
        None => PixelTrain::uniform(s.pixels.n, s.pixels.duration)?,
    })
}

/// Grid from the scenario; without an explicit span, `n` extends the
/// suggested grid at its sampling step.
fn time_grid(s: &Scenario, suggested: &TimeGrid, grid_n: Option<usize>) -> CliResult<TimeGrid> {
    let n = grid_n.or(s.grid.n).unwrap_or(suggested.len());
    let span = s.grid.span.unwrap_or(n as f64 * suggested.dt());
    Ok(TimeGrid::centered(n, span)?)
}

fn with_grid_hint<T>(r: chronolens::Result<T>, setup: &Setup) -> CliResult<T> {
    let Setup { grid, suggested, span_fixed, .. } = setup;
    let (n, span) = (grid.len(), grid.span());
    r.map_err(|e| {
        let suggestion = match &e {
            Error::Resolution { duration, .. } => {
                let needed = ((4.0 * span / duration).ceil() as usize).next_power_of_two();
                format!(
                    "grid n = {n}, span = {} s is too coarse; set [grid] span = {} and n = {needed}",
                    format_float(span),
                    format_float(span)
                )
            }
            Error::Window { .. } if *span_fixed => format!(
                "grid span = {} s is too short; raise [grid] span to at least {} s",
                format_float(span),
                format_float(suggested.span().max(2.0 * span))
            ),
            Error::Window { .. } => format!(
                "grid n = {n}, span = {} s is too short; pass --grid-n {} to double the span at the same step",
                format_float(span),
                2 * n
            ),
            _ => return CliError::from(e),
        };
        CliError::Window { message: e.to_string(), suggestion }
    })
}

fn pump_profile(s: &Scenario, grid: &TimeGrid) -> chronolens::Result<PumpProfile> {
    let (df, peak) = (s.imaging.focal_gdd, s.lens.peak);
    match s.lens.kind {
        LensKind::Ideal => PumpProfile::flat(*grid, df, peak),
        LensKind::Chirped { pulse_duration } => chirped_pump(grid, pulse_duration, df, peak),
        LensKind::Shaped { window } => shaped_pump(grid, window, df, peak),
    }
}

struct Setup {
    train: PixelTrain,
    config: ImagingConfig,
    grid: TimeGrid,
    suggested: TimeGrid,
    span_fixed: bool,
}

fn setup(s: &Scenario, grid_n: Option<usize>) -> CliResult<Setup> {
    let train = pixel_train(s)?;
    let config = solve_imaging_config(s.imaging.focal_gdd, s.imaging.magnification)?;
    let suggested = train.suggested_grid(&config)?;
    let grid = time_grid(s, &suggested, grid_n)?;
    Ok(Setup { train, config, grid, suggested, span_fixed: s.grid.span.is_some() })
}

fn grid_json(g: &TimeGrid) -> Value {
    json!({ "n": g.len(), "dt": g.dt(), "span": g.span() })
}

pub fn pixels(s: &Scenario, grid_n: Option<usize>) -> CliResult<CommandOutput> {
    let setup = setup(s, grid_n)?;
    let Setup { train, config, grid, .. } = &setup;
    let lens = match s.lens.kind {
        LensKind::Ideal => LensMode::Ideal,
        _ => LensMode::Pumped {
            pump: with_grid_hint(pump_profile(s, grid), &setup)?,
            coupling: s.lens.coupling,
        },
    };
    let out = with_grid_hint(simulate_chain(train, config, &lens, grid), &setup)?;
    let ideal = with_grid_hint(ideal_image(&out.input, config), &setup)?;
    let l2 = l2_error_mod_phase(&out.output, &ideal)?;
    let rep = &out.report;
    let tau0 = train.pixel_duration();
    let pixels: Vec<Value> = rep
        .pixels
        .iter()
        .map(|p| {
            json!({
                "centroid": p.centroid,
                "fwhm": p.fwhm,
                "duration": p.duration,
                "carrier_frequency": p.carrier_frequency,
                "energy": p.energy,
                "efficiency": p.efficiency,
                "lossy": p.lossy,
            })
        })
        .collect();
    let report = json!({
        "magnification": config.magnification,
        "measured_magnification": rep.magnification,
        "inverted": rep.inverted(),
        "input_spacing": train.spacing(),
        "spacing": rep.spacing,
        "expected_spacing": config.magnification * tau0,
        "frequency_step": rep.frequency_step,
        "expected_frequency_step_magnitude": tau0 / config.focal_gdd.abs(),
        "stretched_pixel_duration": config.stretched_pixel_duration(tau0),
        "input_gdd": config.input_gdd,
        "output_gdd": config.output_gdd,
        "focal_gdd": config.focal_gdd,
        "l2_error_vs_ideal_image": l2,
        "output_edge_fraction": out.output_edge_fraction,
        "grid": grid_json(grid),
        "pixels": pixels,
    });
    Ok(vec![
        Artifact::envelope("envelope_input.csv", &out.input),
        Artifact::envelope("envelope_intermediate.csv", &out.intermediate),
        Artifact::envelope("envelope_output.csv", &out.output),
        Artifact::envelope("envelope_ideal_image.csv", &ideal),
        Artifact::json("pixel_report.json", report),
    ]
    .into())
}

fn crystal(s: &Scenario) -> CliResult<CrystalDispersion> {
    match &s.crystal {
        Some(src) => Ok(src.resolve()?),
        None => Err(CliError::Config("this command needs a [crystal] section".into())),
    }
}

pub fn design(s: &Scenario) -> CliResult<CommandOutput> {
    let dispersion = crystal(s)?;
    let pump = match s.lens.kind {
        LensKind::Chirped { pulse_duration } => PumpPreparation::Chirped { pulse_duration },
        LensKind::Shaped { window } => PumpPreparation::Shaped { window },
        LensKind::Ideal => {
            return Err(CliError::Config("design needs [lens] mode = chirped or shaped".into()))
        }
    };
    let report = DesignReport::new(DesignInputs {
        dispersion,
        focal_gdd: s.imaging.focal_gdd,
        magnification: s.imaging.magnification,
        pixel_duration: s.pixels.duration,
        n_pixels: s.pixels.n,
        pump,
        margin: s.margin,
    })?;
    let value = serde_json::to_value(&report).map_err(|e| CliError::Failure(e.to_string()))?;
    Ok(CommandOutput {
        artifacts: vec![Artifact::json("design_report.json", value)],
        feasible: report.feasible,
    })
}

fn axis(extent: f64, points: usize) -> Vec<f64> {
    let points = points | 1;
    let mid = (points / 2) as f64;
    (0..points).map(|k| (k as f64 - mid) / mid.max(1.0) * extent).collect()
}

pub fn mismatch(s: &Scenario) -> CliResult<CommandOutput> {
    let disp = crystal(s)?;
    let m = &s.mismatch;
    let (tau0, df, mag) = (s.pixels.duration, s.imaging.focal_gdd, s.imaging.magnification);
    let n = s.pixels.n as f64;
    let ds = 2.0 * PI / tau0;
    let di = idler_bandwidth(ds, mag, n, tau0, df)?;
    let dpa = active_pump_bandwidth(ds, mag, n, tau0, df)?;
    let ws = axis(m.signal_extent.unwrap_or(ds), m.points);
    // wide enough to show the edge of the negligible band
    let tau_i = idler_delay(&disp);
    let default_idler = if tau_i > 0.0 { di.max(2.0 * PI / tau_i) } else { di };
    let wi = axis(m.idler_extent.unwrap_or(default_idler), m.points);
    let map = mismatch_map(&disp, &ws, &wi, m.threshold, m.model)?;
    let (map, ws, wi) = (&map, &ws, &wi);
    let rows = (0..wi.len()).flat_map(|r| {
        (0..ws.len()).map(move |c| {
            let (d, flag) = map.at(r, c);
            vec![format_float(ws[c]), format_float(wi[r]), format_float(d), u8::from(flag).to_string()]
        })
    });
    let csv = Artifact::csv("mismatch.csv", &["Omega_s", "Omega_i", "abs_delta", "negligible_flag"], rows);
    let overlays = Overlays::new(&disp, ds, di, dpa, m.threshold);
    let value = json!({
        "model": m.model,
        "negligible_criterion": "abs_delta * length / 2 <= threshold",
        "threshold": m.threshold,
        "threshold_is_default": m.threshold_is_default,
        "length": disp.length,
        "signal_bandwidth": ds,
        "idler_bandwidth": di,
        "active_pump_bandwidth": dpa,
        "overlays": overlays,
    });
    Ok(vec![csv, Artifact::json("overlays.json", value)].into())
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn energy(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn sfg_verify(
    s: &Scenario,
    grid_n: Option<usize>,
    delta: Option<f64>,
    n_steps: Option<usize>,
) -> CliResult<CommandOutput> {
    let setup = setup(s, grid_n)?;
    let Setup { train, config, grid, .. } = &setup;
    let delta = delta.unwrap_or(s.sfg.delta);
    let n_steps = n_steps.unwrap_or(s.sfg.n_steps);
    let length = match (s.sfg.length, &s.crystal) {
        (Some(l), _) => l,
        (None, Some(src)) => src.resolve()?.length,
        (None, None) => 1e-3,
    };
    let pump = with_grid_hint(pump_profile(s, grid), &setup)?;
    let input = with_grid_hint(train.synthesize(grid), &setup)?;
    let sig = with_grid_hint(apply_gdd(&input, config.input_gdd), &setup)?;
    let vac = chronolens::field::ComplexEnvelope::zeros(*grid);
    let (sa, ia) = apply_sfg_analytic(&sig, &vac, &pump, s.lens.coupling)?;
    let (so, io) = integrate_sfg_ode(&sig, &vac, &pump, s.lens.coupling, delta, length, n_steps)?;
    let peak = sig.peak_amplitude();
    let max_error = max_diff(sa.samples(), so.samples()).max(max_diff(ia.samples(), io.samples())) / peak;
    let e_in = energy(sig.samples());
    let report = json!({
        "delta": delta,
        "n_steps": n_steps,
        "length": length,
        "delta_times_length": delta * length,
        "coupling": s.lens.coupling,
        "lens_mode": match s.lens.kind {
            LensKind::Ideal => "flat",
            LensKind::Chirped { .. } => "chirped",
            LensKind::Shaped { .. } => "shaped",
        },
        "max_error": max_error,
        "efficiency": energy(io.samples()) / e_in,
        "analytic_efficiency": energy(ia.samples()) / e_in,
        "energy_balance_error": ((energy(so.samples()) + energy(io.samples())) / e_in - 1.0).abs(),
        "grid": grid_json(grid),
    });
    Ok(vec![Artifact::json("sfg_verify.json", report)].into())
}
