//! Deterministic CSV and JSON emission.

use std::fs;
use std::path::Path;

use chronolens::field::ComplexEnvelope;
use serde_json::Value;

/// Significant digits of every emitted float.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
    }
}

fn round_float(x: f64) -> f64 {
    format_float(x).parse().unwrap_or(x)
}

/// Rounds every float in `v` to [`SIGNIFICANT_DIGITS`].
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_float(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// One file to be written under the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn json(name: &str, value: Value) -> Self {
        let text = serde_json::to_string_pretty(&round_json(value)).expect("JSON values serialise");
        Self { name: name.to_string(), contents: text + "\n" }
    }

    pub fn csv(name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Self {
        let mut contents = header.join(",");
        contents.push('\n');
        for row in rows {
            contents.push_str(&row.join(","));
            contents.push('\n');
        }
        Self { name: name.to_string(), contents }
    }

    pub fn envelope(name: &str, env: &ComplexEnvelope) -> Self {
        let rows = env.grid().times().zip(env.samples()).map(|(t, a)| {
            vec![format_float(t), format_float(a.re), format_float(a.im), format_float(a.norm())]
        });
        Self::csv(name, &["t", "re", "im", "abs"], rows)
    }
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.contents)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_twelve_digits() {
        assert_eq!(format_float(13.0 / 45.0), "2.88888888889e-1");
        assert_eq!(format_float(-1e-12), "-1.00000000000e-12");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn json_is_rounded() {
        let v = round_json(serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 0.1 + 0.2}}));
        assert_eq!(v["a"][0].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["a"][1].as_u64().unwrap(), 2);
        assert_eq!(v["b"]["c"].as_f64().unwrap(), 0.3);
    }
}
