use clap::{Parser, Subcommand};
use sf2d_cli::{cmd_analyze, cmd_render, cmd_synth, AnalyzeArgs};
use std::path::PathBuf;
use std::process::ExitCode;

/// Direction-dependent multiscale statistics of gridded scalar fields.
#[derive(Parser)]
#[command(name = "sf2d", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic field from a JSON component spec.
    Synth {
        /// JSON file describing the scene (dimensions, seed, components).
        #[arg(long)]
        spec: PathBuf,
        /// Output field file (f32 payload plus .json sidecar).
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute statistics maps, transects and the feature report.
    Analyze {
        /// Input field file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Largest lag in pixels.
        #[arg(long, default_value_t = 60)]
        max_lag: usize,
        /// Lag sampling step in pixels.
        #[arg(long, default_value_t = 1)]
        step: usize,
        /// Cells with fewer valid pairs are reported missing.
        #[arg(long, default_value_t = 1000)]
        min_count: u64,
        /// Computation path: `fft` or `direct`.
        #[arg(long, default_value = "fft")]
        engine: String,
        /// Angular bins of the polar maps (even, at least 8).
        #[arg(long, default_value_t = 72)]
        ntheta: usize,
        /// Directory receiving maps, transects and report.json.
        #[arg(long)]
        out_dir: PathBuf,
        /// Optional box-filter cutoff in meters applied before analysis.
        #[arg(long)]
        lowpass: Option<f64>,
        /// Optional wind direction in radians, echoed into the report.
        #[arg(long)]
        wind_dir: Option<f64>,
    },
    /// Render a grid file as a PNG heatmap.
    Render {
        /// Input field or map file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output PNG path.
        #[arg(long)]
        out: PathBuf,
        /// Palette: auto, viridis or diverging.
        #[arg(long, default_value = "auto")]
        cmap: String,
        /// Mark the zero-lag cell.
        #[arg(long)]
        mark_center: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth { spec, out } => cmd_synth(&spec, &out),
        Command::Analyze {
            input,
            max_lag,
            step,
            min_count,
            engine,
            ntheta,
            out_dir,
            lowpass,
            wind_dir,
        } => cmd_analyze(&AnalyzeArgs {
            input,
            max_lag,
            step,
            min_count,
            engine,
            n_theta: ntheta,
            out_dir,
            lowpass_m: lowpass,
            wind_dir_rad: wind_dir,
        }),
        Command::Render {
            input,
            out,
            cmap,
            mark_center,
        } => cmd_render(&input, &out, &cmap, mark_center),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
