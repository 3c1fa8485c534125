//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use chronolens::design::sellmeier::SPEED_OF_LIGHT;
use chronolens::design::{
    dispersion_from_sellmeier, CrystalDispersion, DesignInputs, DesignReport, Overlays, PumpPreparation,
    SellmeierSpec, DEFAULT_MISMATCH_THRESHOLD,
};
use serde_json::Value;

pub const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/bbo_design.json");

/// Eimerl form `n² = a + b/(λ² − c) − dλ²` and its first two λ-derivatives
/// (λ in µm), differentiated by hand.
pub fn eimerl(c: [f64; 4], l: f64) -> (f64, f64, f64) {
    let [a, b, cc, d] = c;
    let q = l * l - cc;
    let u = a + b / q - d * l * l;
    let u1 = -2.0 * b * l / (q * q) - 2.0 * d * l;
    let u2 = -2.0 * b / (q * q) + 8.0 * b * l * l / (q * q * q) - 2.0 * d;
    (u, u1, u2)
}

pub const BBO_O: [f64; 4] = [2.7405, 0.0184, 0.0179, 0.0155];
pub const BBO_E: [f64; 4] = [2.3730, 0.0128, 0.0156, 0.0044];

/// `(n, dn/dλ, d²n/dλ²)` per µm for the o-wave or the e-wave at angle θ.
pub fn bbo_index(l_um: f64, extraordinary: bool, theta_deg: f64) -> (f64, f64, f64) {
    let (uo, uo1, uo2) = eimerl(BBO_O, l_um);
    if !extraordinary {
        let n = uo.sqrt();
        let n1 = uo1 / (2.0 * n);
        return (n, n1, (uo2 - 2.0 * n1 * n1) / (2.0 * n));
    }
    let (ue, ue1, ue2) = eimerl(BBO_E, l_um);
    let inv =
        |u: f64, u1: f64, u2: f64| (1.0 / u, -u1 / (u * u), -u2 / (u * u) + 2.0 * u1 * u1 / (u * u * u));
    let (wo, wo1, wo2) = inv(uo, uo1, uo2);
    let (we, we1, we2) = inv(ue, ue1, ue2);
    let th = theta_deg.to_radians();
    let (c2, s2) = (th.cos().powi(2), th.sin().powi(2));
    let (w, w1, w2) = (c2 * wo + s2 * we, c2 * wo1 + s2 * we1, c2 * wo2 + s2 * we2);
    let n = w.powf(-0.5);
    let n1 = -0.5 * w.powf(-1.5) * w1;
    let n2 = 0.75 * w.powf(-2.5) * w1 * w1 - 0.5 * w.powf(-1.5) * w2;
    (n, n1, n2)
}

/// `k' = (n − λ·dn/dλ)/c`, `k'' = λ³/(2πc²)·d²n/dλ²`.
pub fn analytic_k(lambda_m: f64, extraordinary: bool) -> (f64, f64) {
    let l_um = lambda_m * 1e6;
    let (n, n1, n2) = bbo_index(l_um, extraordinary, 28.1);
    let k1 = (n - l_um * n1) / SPEED_OF_LIGHT;
    let k2 = lambda_m.powi(3) / (2.0 * PI * SPEED_OF_LIGHT.powi(2)) * n2 * 1e12;
    (k1, k2)
}

pub fn bbo() -> CrystalDispersion {
    dispersion_from_sellmeier(&SellmeierSpec::bbo_reference()).unwrap()
}

pub fn bbo_inputs() -> DesignInputs {
    DesignInputs {
        dispersion: bbo(),
        focal_gdd: 10e-24,
        magnification: -3.0,
        pixel_duration: 1e-12,
        n_pixels: 10,
        pump: PumpPreparation::Chirped { pulse_duration: 50e-15 },
        margin: 10.0,
    }
}

pub fn bbo_fixture_value() -> Value {
    let d = bbo();
    let report = DesignReport::new(bbo_inputs()).unwrap();
    let overlays =
        Overlays::new(&d, report.delta_s, report.delta_i, report.delta_pa, DEFAULT_MISMATCH_THRESHOLD);
    serde_json::json!({
        "dispersion": d,
        "band_half_width_idler": overlays.negligible_half_width_idler,
        "report": report,
    })
}

/// First numeric leaf of `a` that differs from `b` by more than `rel`.
pub fn compare_json(a: &Value, b: &Value, rel: f64, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= rel * y.abs() {
                Ok(())
            } else {
                Err(format!("{path}: {x:e} vs golden {y:e}"))
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: key sets differ"));
            }
            for (k, v) in y {
                let got = x.get(k).ok_or_else(|| format!("{path}.{k}: missing"))?;
                compare_json(got, v, rel, &format!("{path}.{k}"))?;
            }
            Ok(())
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: lengths differ"));
            }
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                compare_json(p, q, rel, &format!("{path}[{i}]"))?;
            }
            Ok(())
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} vs golden {b}")),
    }
}

pub fn assert_close(a: &Value, b: &Value, rel: f64, path: &str) {
    if let Err(e) = compare_json(a, b, rel, path) {
        panic!("{e}");
    }
}

pub fn load_golden() -> Value {
    serde_json::from_str(&std::fs::read_to_string(FIXTURE).unwrap()).unwrap()
}

/// Converted fraction for a flat pump of coupling `κL` and mismatch `ΔL`.
pub fn efficiency_oracle(kappa_l: f64, delta_l: f64) -> f64 {
    let k2 = kappa_l * kappa_l;
    let q2 = k2 + delta_l * delta_l / 4.0;
    if q2 == 0.0 {
        0.0
    } else {
        k2 / q2 * q2.sqrt().sin().powi(2)
    }
}

/// `S = cos²θ·e^{2r} + sin²θ·e^{−2r}`.
pub fn squeezing_oracle(r: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c * c * (2.0 * r).exp() + s * s * (-2.0 * r).exp()
}
