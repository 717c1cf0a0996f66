//! Direction-dependent multiscale statistics of gridded scalar fields.
//!
//! The library computes two-dimensional structure functions of orders 2-4
//! together with standardized skewness and flatness over a centered lag
//! grid, resamples the maps onto polar (r, theta) coordinates, and extracts
//! quasi-periodic banding features: dominant direction, band size, rise/fall
//! asymmetry, intermittency and small-scale wave (swell) signatures.
//!
//! Pipeline sketch:
//!
//! ```no_run
//! use sf2d_core::{compute_statmaps, to_polar, Engine, Field2D, LagGridSpec, StatKind};
//!
//! let field = Field2D::from_values(400, 400, 50.0, vec![0.0; 160_000]).unwrap();
//! let spec = LagGridSpec::new(60, 1).unwrap();
//! let maps = compute_statmaps(&field, &spec, 1000, Engine::Fft).unwrap();
//! let s2_polar = to_polar(maps.s2(), StatKind::S2, 60, 72).unwrap();
//! ```
//!
//! With the default `parallel` feature the heavy loops fan out over a rayon
//! pool; results are identical for any thread count because every output
//! cell is accumulated in a fixed sequential order.

mod fft2;

pub mod features;
pub mod grid;
pub mod polar;
pub mod statmaps;
pub mod synth;

pub use features::{
    analyze_scene, classify_asymmetry, detect_swell, estimate_roll_direction, estimate_roll_size,
    summarize_flatness, AsymmetrySummary, FeatureConfig, FeatureError, FlatnessProfile,
    FlatnessSummary, RollDirection, RollFlags, RollReport, RollSize, SceneAnalysis, SwellReport,
};
pub use grid::{
    increment_moments, increment_power_sums, lowpass, Field2D, GridError, Lag, MomentSet,
    PowerSums,
};
pub use polar::{to_polar, PolarError, PolarMap, Transect};
pub use statmaps::{
    compute_statmaps, fft_cross_moments, increment_stats, CrossMomentGrid, Engine, IncrementStats,
    LagGrid, LagGridSpec, StatKind, StatMapSet, StatMapsError,
};
pub use synth::{generate, oracle_statmaps, Component, SynthError, SynthSpec};
