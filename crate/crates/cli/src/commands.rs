//! Subcommand implementations behind the thin argument parser.
//!
//! Error discipline: problems with inputs or parameters exit with code 2,
//! failures writing outputs with code 3.

use crate::formats::{self, FormatError};
use crate::render::{render_grid, Cmap, RenderOptions};
use crate::report::{sha256_hex, ConfigEcho, InputInfo, Report, ToolInfo};
use sf2d_core::{
    analyze_scene, compute_statmaps, generate, lowpass, to_polar, Engine, FeatureConfig,
    LagGridSpec, PolarMap, StatKind, SynthSpec,
};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

/// Failure with the exit code mandated for its category.
#[derive(Debug)]
pub enum CliError {
    /// Unusable input or parameters (exit 2).
    Input(String),
    /// Output could not be written (exit 3).
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Output(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Output(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

fn input_err(e: impl fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn output_err(e: impl fmt::Display) -> CliError {
    CliError::Output(e.to_string())
}

/// `synth --spec spec.json --out field.f32`
pub fn cmd_synth(spec_path: &Path, out: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(spec_path)
        .map_err(|e| input_err(format!("cannot read spec {}: {e}", spec_path.display())))?;
    let spec: SynthSpec = serde_json::from_str(&text)
        .map_err(|e| input_err(format!("bad spec {}: {e}", spec_path.display())))?;
    let field = generate(&spec).map_err(input_err)?;
    formats::write_field(out, &field).map_err(output_err)
}

#[derive(Clone, Debug)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    pub max_lag: usize,
    pub step: usize,
    pub min_count: u64,
    pub engine: String,
    pub n_theta: usize,
    pub out_dir: PathBuf,
    pub lowpass_m: Option<f64>,
    pub wind_dir_rad: Option<f64>,
}

fn write_transect_csv(path: &Path, polar: &PolarMap, theta: f64) -> Result<(), CliError> {
    let t = polar.transect(theta);
    let mut csv = String::from("r_m,value\n");
    for (r, v) in t.r_m.iter().zip(&t.values) {
        csv.push_str(&format!("{r},{v}\n"));
    }
    fs::write(path, csv).map_err(|e| output_err(format!("cannot write {}: {e}", path.display())))
}

/// `analyze --in field.f32 --max-lag 60 ... --out-dir D`
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let mut field = formats::read_field(&args.input).map_err(|e| match e {
        e @ FormatError::Io { .. } => input_err(format!("missing input: {e}")),
        e => input_err(e),
    })?;
    let payload =
        fs::read(&args.input).map_err(|e| input_err(format!("cannot hash input: {e}")))?;

    if let Some(cutoff) = args.lowpass_m {
        field = lowpass(&field, cutoff).map_err(input_err)?;
    }

    let engine: Engine = args.engine.parse().map_err(input_err)?;
    let spec = LagGridSpec::new(args.max_lag, args.step).map_err(input_err)?;
    let maps = compute_statmaps(&field, &spec, args.min_count, engine).map_err(input_err)?;

    let n_r = spec.half_width();
    let polars: Vec<PolarMap> = StatKind::ALL
        .iter()
        .map(|&kind| to_polar(maps.stat(kind), kind, n_r, args.n_theta).map_err(input_err))
        .collect::<Result<_, _>>()?;

    let cfg = FeatureConfig::default();
    let scene = analyze_scene(&maps, n_r, args.n_theta, &cfg).map_err(input_err)?;

    fs::create_dir_all(&args.out_dir).map_err(|e| {
        output_err(format!(
            "cannot create out dir {}: {e}",
            args.out_dir.display()
        ))
    })?;

    for (kind, polar) in StatKind::ALL.iter().zip(&polars) {
        let label = kind.label();
        formats::write_lag_map(
            &args.out_dir.join(format!("{label}.f32")),
            maps.stat(*kind),
            *kind,
        )
        .map_err(output_err)?;
        formats::write_polar_map(&args.out_dir.join(format!("{label}_polar.f32")), polar)
            .map_err(output_err)?;
    }

    let roll = &scene.roll;
    let directions = [
        ("parallel", roll.theta_parallel_rad),
        ("perp_pos", roll.theta_perp_pos_rad),
        ("perp_neg", roll.theta_perp_neg_rad),
    ];
    for (kind, polar) in StatKind::ALL.iter().zip(&polars) {
        if !matches!(kind, StatKind::S2 | StatKind::Skew | StatKind::Flat) {
            continue;
        }
        for (suffix, theta) in directions {
            let path = args
                .out_dir
                .join(format!("transect_{}_{suffix}.csv", kind.label()));
            write_transect_csv(&path, polar, theta)?;
        }
    }

    let report = Report {
        tool: ToolInfo::default(),
        input: InputInfo {
            path: args.input.display().to_string(),
            sha256: sha256_hex(&payload),
            width: field.width(),
            height: field.height(),
            pixel_size_m: field.pixel_size(),
        },
        config: ConfigEcho {
            max_lag_px: args.max_lag,
            step_px: args.step,
            min_count: args.min_count,
            engine: args.engine.clone(),
            n_theta: args.n_theta,
            n_r,
            lowpass_m: args.lowpass_m,
            wind_dir_rad: args.wind_dir_rad,
            features: cfg,
        },
        roll: scene.roll,
        swell: scene.swell,
    };
    let path = args.out_dir.join("report.json");
    fs::write(&path, crate::report::to_json(&report))
        .map_err(|e| output_err(format!("cannot write {}: {e}", path.display())))
}

/// `render --in map.f32 --out map.png [--cmap auto] [--mark-center]`
pub fn cmd_render(
    input: &Path,
    out: &Path,
    cmap: &str,
    mark_center: bool,
) -> Result<(), CliError> {
    let cmap: Cmap = cmap.parse().map_err(input_err)?;
    let (header, data) = formats::read_grid_for_render(input).map_err(input_err)?;
    let (img, any_defined) = render_grid(
        header.width,
        header.height,
        &data,
        header.statistic.as_deref(),
        &RenderOptions { cmap, mark_center },
    );
    if !any_defined {
        eprintln!(
            "warning: {} holds no defined samples; rendering neutral image",
            input.display()
        );
    }
    img.save(out)
        .map_err(|e| output_err(format!("cannot write {}: {e}", out.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sf2d_core::Component;
    use tempfile::TempDir;

    fn write_spec(dir: &Path, spec: &SynthSpec) -> PathBuf {
        let path = dir.join("spec.json");
        fs::write(&path, serde_json::to_string(spec).unwrap()).unwrap();
        path
    }

    #[test]
    fn synth_writes_constant_payload() {
        let dir = TempDir::new().unwrap();
        let spec = SynthSpec {
            width: 6,
            height: 4,
            pixel_size_m: 50.0,
            seed: 0,
            offset: 5.0,
            components: vec![],
        };
        let spec_path = write_spec(dir.path(), &spec);
        let out = dir.path().join("field.f32");
        cmd_synth(&spec_path, &out).unwrap();
        let bytes = fs::read(&out).unwrap();
        assert_eq!(bytes.len(), 6 * 4 * 4);
        for chunk in bytes.chunks_exact(4) {
            assert_eq!(
                f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]),
                5.0
            );
        }
    }

    #[test]
    fn synth_rejects_bad_spec() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("spec.json");
        fs::write(&path, "{\"width\": 6}").unwrap();
        let err = cmd_synth(&path, &dir.path().join("x.f32")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn analyze_full_pipeline_produces_outputs() {
        let dir = TempDir::new().unwrap();
        let spec = SynthSpec {
            width: 96,
            height: 96,
            pixel_size_m: 50.0,
            seed: 9,
            offset: 0.0,
            components: vec![
                Component::Swell {
                    wavelength_px: 24.0,
                    orientation_rad: 1.0,
                    amplitude: 1.0,
                    phase_rad: 0.0,
                },
                Component::GaussianNoise { sigma: 0.1 },
            ],
        };
        let spec_path = write_spec(dir.path(), &spec);
        let field_path = dir.path().join("field.f32");
        cmd_synth(&spec_path, &field_path).unwrap();

        let out_dir = dir.path().join("out");
        cmd_analyze(&AnalyzeArgs {
            input: field_path,
            max_lag: 20,
            step: 1,
            min_count: 100,
            engine: "fft".into(),
            n_theta: 36,
            out_dir: out_dir.clone(),
            lowpass_m: None,
            wind_dir_rad: Some(1.2),
        })
        .unwrap();

        for stat in ["s2", "s3", "s4", "skew", "flat"] {
            assert!(out_dir.join(format!("{stat}.f32")).exists());
            assert!(out_dir.join(format!("{stat}.json")).exists());
            assert!(out_dir.join(format!("{stat}_polar.f32")).exists());
            assert!(out_dir.join(format!("{stat}_polar.json")).exists());
        }
        for stat in ["s2", "skew", "flat"] {
            for dir_name in ["parallel", "perp_pos", "perp_neg"] {
                assert!(out_dir
                    .join(format!("transect_{stat}_{dir_name}.csv"))
                    .exists());
            }
        }
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap())
                .unwrap();
        assert_eq!(report["config"]["wind_dir_rad"], 1.2);
        assert_eq!(report["input"]["width"], 96);
        assert!(report["input"]["sha256"].as_str().unwrap().len() == 64);
    }

    #[test]
    fn analyze_missing_input_is_exit_2() {
        let dir = TempDir::new().unwrap();
        let err = cmd_analyze(&AnalyzeArgs {
            input: dir.path().join("nope.f32"),
            max_lag: 10,
            step: 1,
            min_count: 100,
            engine: "fft".into(),
            n_theta: 36,
            out_dir: dir.path().join("out"),
            lowpass_m: None,
            wind_dir_rad: None,
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
