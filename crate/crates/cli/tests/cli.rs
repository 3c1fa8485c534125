use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_chronolens");

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env("CHRONOLENS_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn run_scenario(cmd: &str, text: &str, extra: &[&str]) -> (TempDir, Output) {
    let dir = TempDir::new().unwrap();
    let scenario = dir.path().join("scenario.conf");
    fs::write(&scenario, text).unwrap();
    let out_dir = dir.path().join("out");
    let mut args = vec![cmd, "--scenario", scenario.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = run(&args, &out_dir);
    (dir, out)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn assert_ok(out: &Output) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn spectrum_default_scenario() {
    let dir = TempDir::new().unwrap();
    let out = run(&["spectrum"], dir.path());
    assert_ok(&out);
    let (header, input) = read_csv(&dir.path().join("spectrum_input.csv"));
    assert_eq!(header, ["omega_over_omega_c", "S"]);
    let (_, output) = read_csv(&dir.path().join("spectrum_output.csv"));
    assert_eq!(output[0][0], 0.0);
    // 1 − η + η·e^{−2r} with e^r = 3, η = 0.8
    assert!((output[0][1] - 0.2889).abs() < 1e-4);
    assert!((output[0][1] - (0.2 + 0.8 / 9.0)).abs() < 1e-6);
    assert!((input[0][1] - 1.0 / 9.0).abs() < 1e-11);
}

#[test]
fn spectrum_compression_at_unit_efficiency() {
    let text = "units = SI\n[imaging]\nefficiency = 1\nmagnification = -3\n[opa]\npoints = 121\n";
    let (dir, out) = run_scenario("spectrum", text, &[]);
    assert_ok(&out);
    let (_, input) = read_csv(&dir.path().join("out/spectrum_input.csv"));
    let (_, output) = read_csv(&dir.path().join("out/spectrum_output.csv"));
    // rows are equally spaced, so S_out at row k equals S_in at row 3k
    for k in 0..=(input.len() - 1) / 3 {
        let (a, b) = (output[k][1], input[3 * k][1]);
        assert!((a - b).abs() <= 1e-11 * a.max(1.0), "row {k}: {a} vs {b}");
    }
}

#[test]
fn malformed_config_writes_nothing() {
    for text in [
        "units = SI\n[imaging]\nmagnification = -3\nfocal_gdd = five\n",
        "[imaging]\nmagnification = -3\n",
        "units = SI\n[imaging\n",
        "units = SI\n[lens]\nmode = magic\n",
    ] {
        for cmd in ["spectrum", "pixels", "design", "mismatch-map", "sfg-verify"] {
            let (dir, out) = run_scenario(cmd, text, &[]);
            assert_eq!(out.status.code(), Some(2), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
            assert!(!dir.path().join("out").exists());
            assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
        }
    }
}

#[test]
fn pixels_measures_magnification() {
    let dir = TempDir::new().unwrap();
    let out = run(&["pixels"], dir.path());
    assert_ok(&out);
    let report = read_json(&dir.path().join("pixel_report.json"));
    let m = report["measured_magnification"].as_f64().unwrap();
    assert!((m / -3.0 - 1.0).abs() < 0.01, "{m}");
    assert_eq!(report["inverted"], true);
    // stretched pixels overlap at the lens while their spacing stays τ0
    assert!(report["stretched_pixel_duration"].as_f64().unwrap() > 5.0 * 1e-12);
    for name in ["input", "intermediate", "output", "ideal_image"] {
        let (header, rows) = read_csv(&dir.path().join(format!("envelope_{name}.csv")));
        assert_eq!(header, ["t", "re", "im", "abs"]);
        assert_eq!(rows.len(), report["grid"]["n"].as_u64().unwrap() as usize);
    }
}

#[test]
fn single_pixel_matches_ideal_image_file() {
    let text = "units = SI\n[pixels]\nn = 1\n";
    let (dir, out) = run_scenario("pixels", text, &[]);
    assert_ok(&out);
    let (_, got) = read_csv(&dir.path().join("out/envelope_output.csv"));
    let (_, want) = read_csv(&dir.path().join("out/envelope_ideal_image.csv"));
    let peak = want.iter().map(|r| r[3]).fold(0.0, f64::max);
    // the two differ by a constant phase at most
    let err = got.iter().zip(&want).map(|(a, b)| (a[3] - b[3]).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6 * peak, "{err}");
}

#[test]
fn pixels_window_error_suggests_grid() {
    let text = "units = SI\n[grid]\nn = 256\nspan = 2e-11\n";
    let (dir, out) = run_scenario("pixels", text, &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("suggestion"));
    assert!(!dir.path().join("out").exists());
    let text = "units = SI\n[grid]\nn = 64\n";
    let (_, out) = run_scenario("pixels", text, &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--grid-n 128"));
}

#[test]
fn design_matches_golden_fixture() {
    let dir = TempDir::new().unwrap();
    let scenario = scenarios().join("bbo_design.conf");
    let out = run(&["design", "--scenario", scenario.to_str().unwrap()], dir.path());
    assert_ok(&out);
    let report = read_json(&dir.path().join("design_report.json"));
    let golden =
        read_json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/bbo_design.json"));
    compare(&report, &golden["report"], "report");
    let f = |k: &str| report[k].as_f64().unwrap();
    assert!((f("delta_pa") - f("delta_s") - f("delta_i")).abs() <= 1e-11 * f("delta_pa"));
    assert!(report["t_f_quantum"]["min_bound"].as_f64().unwrap() / 10.0 < f("t_f_classical"));
    assert_eq!(report["feasible"], true);
}

fn compare(a: &Value, b: &Value, path: &str) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            assert_eq!(x.len(), y.len(), "{path}");
            for (k, v) in x {
                compare(v, &y[k], &format!("{path}.{k}"));
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= 1e-9 * y.abs(), "{path}: {x} vs {y}");
        }
        _ => assert_eq!(a, b, "{path}"),
    }
}

#[test]
fn design_infeasible_exit_code() {
    let text = std::fs::read_to_string(scenarios().join("bbo_design.conf"))
        .unwrap()
        .replace(
            "file = bbo_dispersion.conf",
            &format!("file = {}", scenarios().join("bbo_dispersion.conf").display()),
        )
        .replace("n = 10", "n = 500");
    let (dir, out) = run_scenario("design", &text, &[]);
    assert_eq!(out.status.code(), Some(3));
    let report = read_json(&dir.path().join("out/design_report.json"));
    assert_eq!(report["feasible"], false);
    // a larger margin than the scenario's also fails the 10-pixel design
    let text = text.replace("n = 500", "n = 10");
    let (_, out) = run_scenario("design", &text, &["--margin", "1000"]);
    assert_eq!(out.status.code(), Some(3));
    let (_, out) = run_scenario("design", "units = SI\n", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatch_map_origin_and_degenerate_flags() {
    let dir = TempDir::new().unwrap();
    let scenario = scenarios().join("bbo_design.conf");
    let out = run(&["mismatch-map", "--scenario", scenario.to_str().unwrap()], dir.path());
    assert_ok(&out);
    let (header, rows) = read_csv(&dir.path().join("mismatch.csv"));
    assert_eq!(header, ["Omega_s", "Omega_i", "abs_delta", "negligible_flag"]);
    let origin = rows.iter().find(|r| r[0] == 0.0 && r[1] == 0.0).expect("origin sampled");
    assert_eq!(origin[2], 0.0);
    assert_eq!(origin[3], 1.0);
    // k′_s = k′_p: the flag depends on Ω_i only
    let mut by_idler = std::collections::BTreeMap::new();
    for r in &rows {
        let prev = by_idler.entry(r[1].to_bits()).or_insert(r[3]);
        assert_eq!(*prev, r[3]);
    }
    assert!(by_idler.values().any(|&f| f == 0.0) && by_idler.values().any(|&f| f == 1.0));

    let overlays = read_json(&dir.path().join("overlays.json"));
    assert_eq!(overlays["threshold_is_default"], true);
    let golden =
        read_json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/bbo_design.json"));
    let half = overlays["overlays"]["negligible_half_width_idler"].as_f64().unwrap();
    let want = golden["band_half_width_idler"].as_f64().unwrap();
    assert!((half / want - 1.0).abs() < 1e-9);
    let tau_i = golden["report"]["tau_i"].as_f64().unwrap();
    assert!((half * tau_i / PI - 1.0).abs() < 1e-9);
}

#[test]
fn sfg_verify_unit_conversion() {
    let dir = TempDir::new().unwrap();
    let out = run(&["sfg-verify", "--delta", "0"], dir.path());
    assert_ok(&out);
    let r = read_json(&dir.path().join("sfg_verify.json"));
    assert!(r["max_error"].as_f64().unwrap() < 1e-7);
    assert!((r["efficiency"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn sfg_verify_mismatch_matches_golden() {
    let dir = TempDir::new().unwrap();
    // Δ·L = π over the default 1 mm
    let delta = format!("{}", PI / 1e-3);
    let out = run(&["sfg-verify", "--delta", &delta, "--n-steps", "10000"], dir.path());
    assert_ok(&out);
    let r = read_json(&dir.path().join("sfg_verify.json"));
    let golden = read_json(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/sfg_mismatch_golden.json"),
    );
    let eta = r["efficiency"].as_f64().unwrap();
    let want = golden["efficiency_delta_l_pi"].as_f64().unwrap();
    assert!(eta < 1.0);
    assert!((eta - want).abs() < 1e-11, "{eta} vs {want}");
    let out = run(&["sfg-verify", "--delta", "1e6", "--n-steps", "100"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let scenario = scenarios().join("bbo_design.conf");
    let s = scenario.to_str().unwrap();
    for args in [
        vec!["design", "--scenario", s],
        vec!["mismatch-map", "--scenario", s],
        vec!["spectrum"],
        vec!["pixels"],
        vec!["sfg-verify"],
    ] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert_ok(&run(&args, a.path()));
        let out = Command::new(BIN)
            .args(&args)
            .arg("--out-dir")
            .arg(b.path())
            .env("CHRONOLENS_THREADS", "1")
            .output()
            .unwrap();
        assert_ok(&out);
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
        }
    }
}

#[test]
fn bad_thread_count_is_config_error() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(BIN)
        .args(["spectrum", "--out-dir"])
        .arg(dir.path().join("out"))
        .env("CHRONOLENS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}
