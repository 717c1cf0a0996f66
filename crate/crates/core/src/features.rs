//! Feature extraction from polar statistics maps: dominant banding
//! direction, band size, rise/fall asymmetry, flatness behavior and
//! small-scale wave (swell) signatures.
//!
//! Geometry conventions: `theta_parallel` (the band axis) lives in [0, pi);
//! the two perpendicular directions differ by pi and are labeled by the
//! sign of the skewness observed along them. All radii are meters.

use crate::polar::{PolarMap, Transect};
use crate::statmaps::{StatKind, StatMapSet};
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("map contains no defined samples to estimate from")]
    AllMissing,
    #[error("swell search radius {radius_m} m spans fewer than 3 radial bins of {bin_m} m")]
    SearchRadiusTooSmall { radius_m: f64, bin_m: f64 },
    #[error(transparent)]
    Polar(#[from] crate::polar::PolarError),
}

/// Thresholds for the feature estimators. The defaults are calibrated on
/// the synthetic suite; all of them are plain ratios so the estimators stay
/// invariant under affine rescaling of the field.
#[derive(Clone, Debug, Serialize)]
pub struct FeatureConfig {
    /// Fraction of the largest radii used as the plateau band.
    pub plateau_top_frac: f64,
    /// Crossing level for the half-plateau scale, relative to the plateau.
    pub half_plateau_level: f64,
    /// Minimum local-maximum prominence, relative to the transect span.
    pub min_prominence_frac: f64,
    /// |skew| below this is reported as not significant.
    pub skew_significance: f64,
    /// "Returns to zero" when the median |skew| beyond the band size stays
    /// below this fraction of the extremum.
    pub return_to_zero_frac: f64,
    /// Half-plateau scale spread (in radial bins) below which the scene is
    /// flagged as having no preferred direction.
    pub low_anisotropy_bins: f64,
    /// Rows whose S2 rise (or plateau, for the swell scan) stays below this
    /// fraction of the strongest row are treated as flat: no growth scale,
    /// no swell candidates. Guards against near-zero rows along the band
    /// axis whose values are interpolation cross-talk.
    pub flat_row_frac: f64,
    /// Minimum normalized oscillation amplitude for a swell detection.
    pub swell_min_amplitude: f64,
    /// Swell search radius as a fraction of the estimated band size.
    pub swell_search_frac: f64,
    /// Hard cap on the swell search radius in meters.
    pub swell_search_cap_m: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            plateau_top_frac: 0.2,
            half_plateau_level: 0.5,
            min_prominence_frac: 0.05,
            skew_significance: 0.1,
            return_to_zero_frac: 0.25,
            low_anisotropy_bins: 2.0,
            flat_row_frac: 0.05,
            swell_min_amplitude: 0.05,
            swell_search_frac: 0.5,
            swell_search_cap_m: 1000.0,
        }
    }
}

/// Median of the defined entries; None when all are missing.
fn median_defined(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Median over the top `top_frac` largest-radius bins of a transect row.
fn plateau_level(row: &[f64], top_frac: f64) -> Option<f64> {
    let n = row.len();
    let band = ((top_frac * n as f64).round() as usize).clamp(1, n);
    median_defined(row[n - band..].iter().copied())
}

/// Smallest radius where the row strictly exceeds `level`; None when the
/// level is never crossed.
fn crossing_radius(row: &[f64], level: f64, r_step_m: f64) -> Option<f64> {
    for (k, &v) in row.iter().enumerate() {
        if !v.is_nan() && v > level {
            return Some((k + 1) as f64 * r_step_m);
        }
    }
    None
}

/// Dominant band direction and the derived perpendicular pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RollDirection {
    /// Band axis in [0, pi).
    pub theta_parallel: f64,
    /// First perpendicular direction, `theta_parallel + pi/2`.
    pub theta_perp_a: f64,
    /// Opposite perpendicular direction, `theta_perp_a + pi`.
    pub theta_perp_b: f64,
    /// Spread of the half-plateau scale over angles, in radial bins.
    pub anisotropy_bins: f64,
    /// True when the spread stays within `low_anisotropy_bins`.
    pub low_anisotropy: bool,
}

/// Estimate the band axis from an S2 polar map.
///
/// For every angle in [0, pi) the half-rise scale `L_c` is the smallest
/// radius where S2 strictly exceeds its small-scale base plus
/// `half_plateau_level` times the rise (plateau minus base, with the
/// plateau the top-band median). Rows whose rise stays below
/// `flat_row_frac` of the strongest rise carry no growth scale and
/// saturate at the outer radius, as do rows that never cross. S2 grows
/// slowest along the band axis, so `theta_parallel = argmax L_c`, ties
/// resolved toward the smaller angle.
pub fn estimate_roll_direction(
    s2_polar: &PolarMap,
    cfg: &FeatureConfig,
) -> Result<RollDirection, FeatureError> {
    let half = s2_polar.n_theta() / 2;
    let dr = s2_polar.r_step_m();
    let r_max = s2_polar.r_max_m();

    // base = first defined bin clear of the center cell (bilinear samples
    // within two lag cells of the origin blend with its identically-zero
    // value), rise = plateau - base
    let clear_of_center = 2.0 * s2_polar.cell_m();
    let mut rows: Vec<Option<(f64, f64)>> = Vec::with_capacity(half);
    let mut max_plateau = 0.0f64;
    for j in 0..half {
        let row = s2_polar.row(j);
        let base = row
            .iter()
            .enumerate()
            .filter(|&(k, v)| !v.is_nan() && (k + 1) as f64 * dr >= clear_of_center)
            .map(|(_, &v)| v)
            .next()
            .or_else(|| row.iter().copied().find(|v| !v.is_nan()));
        let entry = match (base, plateau_level(row, cfg.plateau_top_frac)) {
            (Some(base), Some(plateau)) => {
                max_plateau = max_plateau.max(plateau);
                Some((base, (plateau - base).max(0.0)))
            }
            _ => None,
        };
        rows.push(entry);
    }
    if rows.iter().all(Option::is_none) {
        return Err(FeatureError::AllMissing);
    }

    let mut best: Option<(usize, f64)> = None;
    let mut lc_min = f64::MAX;
    let mut lc_max = f64::MIN;
    for (j, entry) in rows.iter().enumerate() {
        let &Some((base, rise)) = entry else { continue };
        let lc = if rise <= cfg.flat_row_frac * max_plateau {
            // no meaningful growth along this angle
            r_max
        } else {
            crossing_radius(
                s2_polar.row(j),
                base + cfg.half_plateau_level * rise,
                dr,
            )
            .unwrap_or(r_max)
        };
        lc_min = lc_min.min(lc);
        lc_max = lc_max.max(lc);
        if best.map_or(true, |(_, v)| lc > v) {
            best = Some((j, lc));
        }
    }
    let (j_best, _) = best.expect("at least one defined angle");
    let theta_parallel = 2.0 * PI * j_best as f64 / s2_polar.n_theta() as f64;
    let theta_perp_a = (theta_parallel + PI / 2.0).rem_euclid(2.0 * PI);
    let theta_perp_b = (theta_perp_a + PI).rem_euclid(2.0 * PI);
    let anisotropy_bins = (lc_max - lc_min) / dr;
    Ok(RollDirection {
        theta_parallel,
        theta_perp_a,
        theta_perp_b,
        anisotropy_bins,
        low_anisotropy: anisotropy_bins <= cfg.low_anisotropy_bins,
    })
}

/// Band size estimate from the S2 transect perpendicular to the band axis.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RollSize {
    /// Radius of the first prominent S2 maximum (meters); falls back to the
    /// global maximum when no interior maximum qualifies.
    pub size_m: f64,
    /// False when the fallback was taken.
    pub plateau_reached: bool,
}

/// Defined (radius, value) pairs of a transect.
fn defined_points(t: &Transect) -> Vec<(f64, f64)> {
    t.r_m
        .iter()
        .zip(&t.values)
        .filter(|(_, v)| !v.is_nan())
        .map(|(&r, &v)| (r, v))
        .collect()
}

/// Indices of strict interior local maxima of `v`.
fn local_maxima(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
        .collect()
}

/// Peak prominence: height above the higher of the two valley floors
/// reached before a taller point (or the end) on each side.
fn prominence(v: &[f64], peak: usize) -> f64 {
    let mut left = v[peak];
    let mut i = peak;
    while i > 0 {
        i -= 1;
        if v[i] > v[peak] {
            break;
        }
        left = left.min(v[i]);
    }
    let mut right = v[peak];
    let mut i = peak;
    while i + 1 < v.len() {
        i += 1;
        if v[i] > v[peak] {
            break;
        }
        right = right.min(v[i]);
    }
    v[peak] - left.max(right)
}

/// First prominent local maximum of the transect; see [`RollSize`].
pub fn estimate_roll_size(
    s2_transect_perp: &Transect,
    cfg: &FeatureConfig,
) -> Result<RollSize, FeatureError> {
    let pts = defined_points(s2_transect_perp);
    if pts.is_empty() {
        return Err(FeatureError::AllMissing);
    }
    let values: Vec<f64> = pts.iter().map(|&(_, v)| v).collect();
    let span = values.iter().cloned().fold(f64::MIN, f64::max)
        - values.iter().cloned().fold(f64::MAX, f64::min);
    for i in local_maxima(&values) {
        if prominence(&values, i) >= cfg.min_prominence_frac * span && span > 0.0 {
            return Ok(RollSize {
                size_m: pts[i].0,
                plateau_reached: true,
            });
        }
    }
    let i_max = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("non-empty");
    Ok(RollSize {
        size_m: pts[i_max].0,
        plateau_reached: false,
    })
}

/// Sign structure of the skewness across the band.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AsymmetrySummary {
    /// Extremal skewness (largest magnitude) at radii inside the band size,
    /// signed as observed along the queried perpendicular direction.
    pub extremum_value: f64,
    /// Radius of the extremum in meters.
    pub extremum_radius_m: f64,
    /// The perpendicular direction carrying positive skewness.
    pub positive_direction_rad: f64,
    /// True when the extremal |skew| reaches the significance threshold.
    pub significant: bool,
    /// True when the median |skew| over radii in [size, 1.5 size] drops
    /// below `return_to_zero_frac` of the extremum.
    pub returns_to_zero: bool,
}

/// Examine the skew transect at `theta_perp` below the band size.
pub fn classify_asymmetry(
    skew_polar: &PolarMap,
    theta_perp: f64,
    roll_size_m: f64,
    cfg: &FeatureConfig,
) -> Result<AsymmetrySummary, FeatureError> {
    let t = skew_polar.transect(theta_perp);
    let inner: Vec<(f64, f64)> = defined_points(&t)
        .into_iter()
        .filter(|&(r, _)| r < roll_size_m)
        .collect();
    let Some(&(radius, value)) = inner
        .iter()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    else {
        return Err(FeatureError::AllMissing);
    };

    let positive_direction_rad = if value >= 0.0 {
        t.theta
    } else {
        (t.theta + PI).rem_euclid(2.0 * PI)
    };
    let tail = t
        .r_m
        .iter()
        .zip(&t.values)
        .filter(|(&r, _)| r >= roll_size_m && r <= 1.5 * roll_size_m)
        .map(|(_, &v)| v.abs());
    let returns_to_zero = median_defined(tail)
        .map(|m| m <= cfg.return_to_zero_frac * value.abs())
        .unwrap_or(false);
    Ok(AsymmetrySummary {
        extremum_value: value,
        extremum_radius_m: radius,
        positive_direction_rad,
        significant: value.abs() >= cfg.skew_significance,
        returns_to_zero,
    })
}

/// Flatness/3 along one direction. Values are relative to the Gaussian
/// reference, so 1.0 means Gaussian-shaped increments.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FlatnessProfile {
    pub theta_rad: f64,
    /// First defined bin (smallest radius).
    pub small_r: f64,
    /// Top-band median.
    pub plateau: f64,
    pub min: f64,
    pub median: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FlatnessSummary {
    pub parallel: FlatnessProfile,
    pub perp: FlatnessProfile,
    /// Plateau minus minimum of flat/3 along the perpendicular direction;
    /// near zero for shape-stable (non-intermittent) increments.
    pub intermittency_index: f64,
}

fn flatness_profile(flat_polar: &PolarMap, theta: f64, cfg: &FeatureConfig) -> FlatnessProfile {
    let t = flat_polar.transect(theta);
    let rel: Vec<f64> = t.values.iter().map(|v| v / 3.0).collect();
    let defined: Vec<f64> = rel.iter().copied().filter(|v| !v.is_nan()).collect();
    FlatnessProfile {
        theta_rad: t.theta,
        small_r: defined.first().copied().unwrap_or(f64::NAN),
        plateau: plateau_level(&rel, cfg.plateau_top_frac).unwrap_or(f64::NAN),
        min: defined.iter().copied().fold(f64::NAN, f64::min),
        median: median_defined(defined.iter().copied()).unwrap_or(f64::NAN),
    }
}

/// Flatness behavior along the band axis and across it.
pub fn summarize_flatness(
    flat_polar: &PolarMap,
    theta_parallel: f64,
    theta_perp: f64,
    cfg: &FeatureConfig,
) -> FlatnessSummary {
    let parallel = flatness_profile(flat_polar, theta_parallel, cfg);
    let perp = flatness_profile(flat_polar, theta_perp, cfg);
    FlatnessSummary {
        parallel,
        perp,
        intermittency_index: perp.plateau - perp.min,
    }
}

/// Small-scale oscillation (swell) signature.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SwellReport {
    pub present: bool,
    /// Direction of the strongest oscillation, in [0, pi).
    pub theta_swell_rad: Option<f64>,
    /// Radius of the first S2 maximum (half the oscillation wavelength).
    pub r_first_max_m: Option<f64>,
    /// Radius of the following S2 minimum (one oscillation wavelength).
    pub r_first_min_m: Option<f64>,
    /// (first max - following min) / plateau along the detected direction.
    pub oscillation_amplitude: Option<f64>,
}

impl SwellReport {
    pub fn absent() -> Self {
        Self {
            present: false,
            theta_swell_rad: None,
            r_first_max_m: None,
            r_first_min_m: None,
            oscillation_amplitude: None,
        }
    }
}

/// Search for an S2 oscillation at radii up to `r_search_max_m`.
///
/// For every angle the first strict local maximum and the following local
/// minimum within the search radius form an oscillation candidate. A plane
/// wave oscillates along every angle (only the apparent wavelength
/// stretches away from its propagation direction), so the detected
/// direction is the candidate whose oscillation is tightest: smallest
/// first-minimum radius, then smallest first-maximum radius, then largest
/// amplitude. Amplitudes are normalized by the strongest per-angle plateau
/// of the map; rows whose own plateau falls below `flat_row_frac` of that
/// level are skipped as interpolation cross-talk. Keep the search radius
/// below the estimated band size so the band's own first maximum is not
/// mistaken for a wave signature.
pub fn detect_swell(
    s2_polar: &PolarMap,
    r_search_max_m: f64,
    cfg: &FeatureConfig,
) -> Result<SwellReport, FeatureError> {
    let dr = s2_polar.r_step_m();
    let bins = (r_search_max_m / dr).floor() as usize;
    if bins < 3 {
        return Err(FeatureError::SearchRadiusTooSmall {
            radius_m: r_search_max_m,
            bin_m: dr,
        });
    }
    let bins = bins.min(s2_polar.n_r());

    let half = s2_polar.n_theta() / 2;
    let plateaus: Vec<Option<f64>> = (0..half)
        .map(|j| plateau_level(s2_polar.row(j), cfg.plateau_top_frac))
        .collect();
    let max_plateau = plateaus.iter().flatten().copied().fold(0.0f64, f64::max);
    if !(max_plateau > 0.0) {
        return Ok(SwellReport::absent());
    }

    // amplitude, j, r_max, r_min
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for j in 0..half {
        let row = s2_polar.row(j);
        let Some(plateau) = plateaus[j] else {
            continue;
        };
        if plateau < cfg.flat_row_frac * max_plateau {
            continue;
        }
        let pts: Vec<(usize, f64)> = row[..bins]
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_nan())
            .map(|(k, &v)| (k, v))
            .collect();
        let values: Vec<f64> = pts.iter().map(|&(_, v)| v).collect();
        let Some(&peak) = local_maxima(&values).first() else {
            continue;
        };
        // following strict local minimum
        let mut trough = None;
        for i in peak + 1..values.len().saturating_sub(1) {
            if values[i] < values[i - 1] && values[i] < values[i + 1] {
                trough = Some(i);
                break;
            }
        }
        let Some(trough) = trough else { continue };
        let amplitude = (values[peak] - values[trough]) / max_plateau;
        if amplitude < cfg.swell_min_amplitude {
            // too weak to qualify; keep it from shadowing a real signature
            continue;
        }
        let r_peak = (pts[peak].0 + 1) as f64 * dr;
        let r_trough = (pts[trough].0 + 1) as f64 * dr;
        let tighter = match best {
            None => true,
            Some((best_amp, _, best_peak, best_trough)) => (r_trough, r_peak, -amplitude)
                < (best_trough, best_peak, -best_amp),
        };
        if tighter {
            best = Some((amplitude, j, r_peak, r_trough));
        }
    }

    match best {
        Some((amplitude, j, r_peak, r_trough)) => Ok(SwellReport {
            present: true,
            theta_swell_rad: Some(2.0 * PI * j as f64 / s2_polar.n_theta() as f64),
            r_first_max_m: Some(r_peak),
            r_first_min_m: Some(r_trough),
            oscillation_amplitude: Some(amplitude),
        }),
        None => Ok(SwellReport::absent()),
    }
}

/// Extremal skewness inside the band, reported against the direction that
/// carries the positive sign.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SkewExtremum {
    pub value: f64,
    pub radius_m: f64,
}

/// Confidence flags accompanying a [`RollReport`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RollFlags {
    /// S2 along the perpendicular direction crossed half its plateau inside
    /// the lag range.
    pub plateau_reached: bool,
    /// The band size came from a prominent interior maximum rather than the
    /// global-maximum fallback.
    pub prominence_found: bool,
    /// The half-plateau scale barely varies with angle; the direction
    /// estimate is a tie-break.
    pub low_anisotropy: bool,
    /// The extremal |skew| reached the significance threshold.
    pub asymmetry_significant: bool,
    /// |skew| relaxes beyond the band size.
    pub skew_returns_to_zero: bool,
}

/// Full description of the banding extracted from one scene.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RollReport {
    /// Band axis, radians in [0, pi).
    pub theta_parallel_rad: f64,
    /// Perpendicular direction with positive skewness.
    pub theta_perp_pos_rad: f64,
    /// Perpendicular direction with negative skewness
    /// (`theta_perp_pos + pi` mod 2 pi).
    pub theta_perp_neg_rad: f64,
    /// Band size in meters.
    pub size_m: f64,
    /// S2 plateau level along the perpendicular direction.
    pub plateau_s2: f64,
    /// Skewness extremum along `theta_perp_pos` (non-negative by labeling).
    pub skew_extremum: SkewExtremum,
    pub flatness: FlatnessSummary,
    pub anisotropy_bins: f64,
    pub flags: RollFlags,
}

/// Roll and swell reports for one scene.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SceneAnalysis {
    pub roll: RollReport,
    pub swell: SwellReport,
}

/// Run the full feature pipeline on a statistics map set.
///
/// The swell search radius defaults to
/// `min(swell_search_frac * size, swell_search_cap_m)` and the search is
/// skipped (reported absent) when that radius spans fewer than 3 bins.
pub fn analyze_scene(
    maps: &StatMapSet,
    n_r: usize,
    n_theta: usize,
    cfg: &FeatureConfig,
) -> Result<SceneAnalysis, FeatureError> {
    let s2_polar = crate::polar::to_polar(maps.s2(), StatKind::S2, n_r, n_theta)?;
    let skew_polar = crate::polar::to_polar(maps.skew(), StatKind::Skew, n_r, n_theta)?;
    let flat_polar = crate::polar::to_polar(maps.flat(), StatKind::Flat, n_r, n_theta)?;

    let direction = estimate_roll_direction(&s2_polar, cfg)?;
    let perp_transect = s2_polar.transect(direction.theta_perp_a);
    let size = estimate_roll_size(&perp_transect, cfg)?;
    let plateau_s2 =
        plateau_level(&perp_transect.values, cfg.plateau_top_frac).unwrap_or(f64::NAN);
    let plateau_crossed = plateau_level(&perp_transect.values, cfg.plateau_top_frac)
        .and_then(|p| {
            crossing_radius(
                &perp_transect.values,
                cfg.half_plateau_level * p,
                s2_polar.r_step_m(),
            )
        })
        .is_some();

    let asymmetry = classify_asymmetry(&skew_polar, direction.theta_perp_a, size.size_m, cfg);
    let (theta_pos, extremum, significant, returns_to_zero) = match &asymmetry {
        Ok(a) => (
            a.positive_direction_rad,
            SkewExtremum {
                value: a.extremum_value.abs(),
                radius_m: a.extremum_radius_m,
            },
            a.significant,
            a.returns_to_zero,
        ),
        Err(_) => (
            direction.theta_perp_a,
            SkewExtremum {
                value: f64::NAN,
                radius_m: f64::NAN,
            },
            false,
            false,
        ),
    };
    let theta_neg = (theta_pos + PI).rem_euclid(2.0 * PI);

    let flatness = summarize_flatness(
        &flat_polar,
        direction.theta_parallel,
        direction.theta_perp_a,
        cfg,
    );

    let r_search = (cfg.swell_search_frac * size.size_m).min(cfg.swell_search_cap_m);
    let swell = if (r_search / s2_polar.r_step_m()).floor() as usize >= 3 {
        detect_swell(&s2_polar, r_search, cfg)?
    } else {
        SwellReport::absent()
    };

    Ok(SceneAnalysis {
        roll: RollReport {
            theta_parallel_rad: direction.theta_parallel,
            theta_perp_pos_rad: theta_pos,
            theta_perp_neg_rad: theta_neg,
            size_m: size.size_m,
            plateau_s2,
            skew_extremum: extremum,
            flatness,
            anisotropy_bins: direction.anisotropy_bins,
            flags: RollFlags {
                plateau_reached: plateau_crossed,
                prominence_found: size.plateau_reached,
                low_anisotropy: direction.low_anisotropy,
                asymmetry_significant: significant,
                skew_returns_to_zero: returns_to_zero,
            },
        },
        swell,
    })
}
