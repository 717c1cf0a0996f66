//! End-to-end tests of the `sf2d` binary: exit codes, file round trips,
//! determinism and the report content on generator ground truth.

use sf2d_core::{Component, SynthSpec};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sf2d"))
}

fn write_spec(dir: &Path, spec: &SynthSpec) -> PathBuf {
    let path = dir.join("spec.json");
    fs::write(&path, serde_json::to_string_pretty(spec).unwrap()).unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn sf2d");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("spawn sf2d").status.code().unwrap()
}

#[test]
fn synth_repeats_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let spec = SynthSpec {
        width: 48,
        height: 48,
        pixel_size_m: 50.0,
        seed: 1234,
        offset: 0.0,
        components: vec![
            Component::GaussianNoise { sigma: 1.0 },
            Component::Rolls {
                wavelength_px: 16.0,
                orientation_rad: 0.8,
                amplitude: 1.0,
                rise_fraction: 0.3,
                phase_rad: 0.0,
            },
        ],
    };
    let spec_path = write_spec(dir.path(), &spec);
    let (a, b) = (dir.path().join("a.f32"), dir.path().join("b.f32"));
    run_ok(bin().args(["synth", "--spec"]).arg(&spec_path).arg("--out").arg(&a));
    run_ok(bin().args(["synth", "--spec"]).arg(&spec_path).arg("--out").arg(&b));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn synth_bad_spec_exits_2() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("spec.json");
    fs::write(&path, "{\"width\": 0}").unwrap();
    let code = exit_code(
        bin()
            .args(["synth", "--spec"])
            .arg(&path)
            .arg("--out")
            .arg(dir.path().join("x.f32")),
    );
    assert_eq!(code, 2);
}

#[test]
fn analyze_missing_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let code = exit_code(
        bin()
            .args(["analyze", "--in"])
            .arg(dir.path().join("absent.f32"))
            .arg("--out-dir")
            .arg(dir.path().join("out")),
    );
    assert_eq!(code, 2);
}

#[test]
fn analyze_oversized_lag_exits_2() {
    let dir = TempDir::new().unwrap();
    let spec = SynthSpec {
        width: 32,
        height: 32,
        pixel_size_m: 50.0,
        seed: 1,
        offset: 0.0,
        components: vec![Component::GaussianNoise { sigma: 1.0 }],
    };
    let spec_path = write_spec(dir.path(), &spec);
    let field = dir.path().join("field.f32");
    run_ok(bin().args(["synth", "--spec"]).arg(&spec_path).arg("--out").arg(&field));
    let code = exit_code(
        bin()
            .args(["analyze", "--in"])
            .arg(&field)
            .args(["--max-lag", "32", "--min-count", "10"])
            .arg("--out-dir")
            .arg(dir.path().join("out")),
    );
    assert_eq!(code, 2);
}

#[test]
fn analyze_unwritable_out_dir_exits_3() {
    let dir = TempDir::new().unwrap();
    let spec = SynthSpec {
        width: 32,
        height: 32,
        pixel_size_m: 50.0,
        seed: 1,
        offset: 0.0,
        components: vec![Component::GaussianNoise { sigma: 1.0 }],
    };
    let spec_path = write_spec(dir.path(), &spec);
    let field = dir.path().join("field.f32");
    run_ok(bin().args(["synth", "--spec"]).arg(&spec_path).arg("--out").arg(&field));
    // a plain file blocks creation of the output directory under any uid
    let blocker = dir.path().join("blocked");
    fs::write(&blocker, b"file").unwrap();
    let code = exit_code(
        bin()
            .args(["analyze", "--in"])
            .arg(&field)
            .args(["--max-lag", "8", "--min-count", "10", "--ntheta", "24"])
            .arg("--out-dir")
            .arg(&blocker),
    );
    assert_eq!(code, 3);
}

#[test]
fn gaussian_scene_reports_low_anisotropy() {
    let dir = TempDir::new().unwrap();
    let spec = SynthSpec {
        width: 128,
        height: 128,
        pixel_size_m: 50.0,
        seed: 77,
        offset: 0.0,
        components: vec![Component::GaussianNoise { sigma: 1.0 }],
    };
    let spec_path = write_spec(dir.path(), &spec);
    let field = dir.path().join("field.f32");
    run_ok(bin().args(["synth", "--spec"]).arg(&spec_path).arg("--out").arg(&field));
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["analyze", "--in"])
            .arg(&field)
            .args(["--max-lag", "16", "--min-count", "100", "--ntheta", "24"])
            .arg("--out-dir")
            .arg(&out),
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["roll"]["flags"]["low_anisotropy"], true);
}

#[test]
fn sawtooth_scene_recovers_direction_size_and_asymmetry() {
    let dir = TempDir::new().unwrap();
    let theta_parallel = std::f64::consts::PI / 6.0;
    let spec = SynthSpec {
        width: 400,
        height: 400,
        pixel_size_m: 50.0,
        seed: 0,
        offset: 0.0,
        components: vec![Component::Rolls {
            wavelength_px: 40.0,
            orientation_rad: theta_parallel + std::f64::consts::FRAC_PI_2,
            amplitude: 1.0,
            rise_fraction: 0.2,
            phase_rad: 0.0,
        }],
    };
    let spec_path = write_spec(dir.path(), &spec);
    let field = dir.path().join("field.f32");
    run_ok(bin().args(["synth", "--spec"]).arg(&spec_path).arg("--out").arg(&field));
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["analyze", "--in"])
            .arg(&field)
            .args(["--max-lag", "60", "--min-count", "1000", "--ntheta", "72"])
            .arg("--out-dir")
            .arg(&out),
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let est = report["roll"]["theta_parallel_rad"].as_f64().unwrap();
    assert!(
        (est - theta_parallel).abs() <= std::f64::consts::PI / 72.0,
        "theta_parallel {est}"
    );
    let size = report["roll"]["size_m"].as_f64().unwrap();
    assert!((size - 1000.0).abs() <= 50.0 + 1e-9, "size {size}");
    assert_eq!(report["roll"]["flags"]["asymmetry_significant"], true);
}

#[test]
fn composite_scene_reports_swell_block() {
    let dir = TempDir::new().unwrap();
    // bands along 100 deg (multi-wavelength so S2 saturates) plus a short
    // wave propagating along the band axis
    let deg = std::f64::consts::PI / 180.0;
    let band_variation = 10.0 * deg;
    let mut components: Vec<Component> = [52.0, 60.0, 68.0]
        .iter()
        .map(|&wavelength_px| Component::Rolls {
            wavelength_px,
            orientation_rad: band_variation,
            amplitude: 0.577,
            rise_fraction: 0.5,
            phase_rad: 0.4 * wavelength_px,
        })
        .collect();
    components.push(Component::Swell {
        wavelength_px: 12.0,
        orientation_rad: 100.0 * deg,
        amplitude: 0.4,
        phase_rad: 0.0,
    });
    let spec = SynthSpec {
        width: 400,
        height: 400,
        pixel_size_m: 10.0,
        seed: 0,
        offset: 0.0,
        components,
    };
    let spec_path = write_spec(dir.path(), &spec);
    let field = dir.path().join("field.f32");
    run_ok(bin().args(["synth", "--spec"]).arg(&spec_path).arg("--out").arg(&field));
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["analyze", "--in"])
            .arg(&field)
            .args(["--max-lag", "60", "--min-count", "1000", "--ntheta", "72"])
            .arg("--out-dir")
            .arg(&out),
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["swell"]["present"], true, "{report}");
    let theta = report["swell"]["theta_swell_rad"].as_f64().unwrap();
    assert!(
        (theta - 100.0 * deg).abs() <= 5.0 * deg + 1e-12,
        "swell direction {theta}"
    );
}

#[test]
fn render_produces_deterministic_png() {
    let dir = TempDir::new().unwrap();
    let spec = SynthSpec {
        width: 64,
        height: 64,
        pixel_size_m: 50.0,
        seed: 3,
        offset: 0.0,
        components: vec![
            Component::Swell {
                wavelength_px: 16.0,
                orientation_rad: 0.5,
                amplitude: 1.0,
                phase_rad: 0.0,
            },
            Component::GaussianNoise { sigma: 0.2 },
        ],
    };
    let spec_path = write_spec(dir.path(), &spec);
    let field = dir.path().join("field.f32");
    run_ok(bin().args(["synth", "--spec"]).arg(&spec_path).arg("--out").arg(&field));
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["analyze", "--in"])
            .arg(&field)
            .args(["--max-lag", "16", "--min-count", "100", "--ntheta", "24"])
            .arg("--out-dir")
            .arg(&out),
    );
    let (png_a, png_b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    run_ok(
        bin()
            .args(["render", "--in"])
            .arg(out.join("skew.f32"))
            .arg("--out")
            .arg(&png_a)
            .args(["--mark-center"]),
    );
    run_ok(
        bin()
            .args(["render", "--in"])
            .arg(out.join("skew.f32"))
            .arg("--out")
            .arg(&png_b)
            .args(["--mark-center"]),
    );
    assert_eq!(fs::read(&png_a).unwrap(), fs::read(&png_b).unwrap());
    // field files render too
    run_ok(
        bin()
            .args(["render", "--in"])
            .arg(&field)
            .arg("--out")
            .arg(dir.path().join("field.png")),
    );
}

#[test]
fn render_bad_header_exits_2() {
    let dir = TempDir::new().unwrap();
    let payload = dir.path().join("map.f32");
    fs::write(&payload, [0u8; 16]).unwrap();
    fs::write(dir.path().join("map.json"), "{\"width\": 2}").unwrap();
    let code = exit_code(
        bin()
            .args(["render", "--in"])
            .arg(&payload)
            .arg("--out")
            .arg(dir.path().join("map.png")),
    );
    assert_eq!(code, 2);
}

#[test]
fn transect_csv_has_expected_shape() {
    let dir = TempDir::new().unwrap();
    let spec = SynthSpec {
        width: 64,
        height: 64,
        pixel_size_m: 50.0,
        seed: 12,
        offset: 0.0,
        components: vec![Component::GaussianNoise { sigma: 1.0 }],
    };
    let spec_path = write_spec(dir.path(), &spec);
    let field = dir.path().join("field.f32");
    run_ok(bin().args(["synth", "--spec"]).arg(&spec_path).arg("--out").arg(&field));
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["analyze", "--in"])
            .arg(&field)
            .args(["--max-lag", "12", "--min-count", "100", "--ntheta", "24"])
            .arg("--out-dir")
            .arg(&out),
    );
    let csv = fs::read_to_string(out.join("transect_s2_parallel.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r_m,value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12, "one row per radial bin");
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[0], "50");
}
