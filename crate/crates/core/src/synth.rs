//! Deterministic synthetic fields with known ground truth, plus the naive
//! brute-force statistics oracle used by the equivalence tests.
//!
//! Components:
//!
//! * `rolls` — asymmetric triangular wave: rising over `rise_fraction * L`,
//!   falling over the rest. `orientation_rad` is the direction along which
//!   the profile varies (perpendicular to the roll axis).
//! * `swell` — plain sinusoid; `orientation_rad` is again the direction of
//!   variation (the propagation direction, perpendicular to the crests).
//! * `gaussian_noise` — i.i.d. normal samples from a pinned generator:
//!   ChaCha8 keyed by the spec seed with one stream per row, mapped through
//!   Box-Muller. Row streams make generation order-independent.

use crate::grid::{Field2D, GridError};
use crate::statmaps::{LagGridSpec, StatMapSet, StatMapsError, DEGENERACY_FLOOR_REL};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("component wavelength must be at least 4 px, got {0}")]
    WavelengthTooSmall(f64),
    #[error("rise_fraction must lie strictly between 0 and 1, got {0}")]
    BadRiseFraction(f64),
    #[error("amplitude must be finite and non-negative, got {0}")]
    BadAmplitude(f64),
    #[error("noise sigma must be finite and non-negative, got {0}")]
    BadSigma(f64),
    #[error("parameter {name} must be finite, got {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// One additive component of a synthetic field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Component {
    Rolls {
        wavelength_px: f64,
        /// Direction of variation in radians (0 = +x, counterclockwise).
        orientation_rad: f64,
        amplitude: f64,
        /// Fraction of the wavelength spent rising; 0.5 is the symmetric
        /// triangle.
        rise_fraction: f64,
        #[serde(default)]
        phase_rad: f64,
    },
    Swell {
        wavelength_px: f64,
        /// Direction of variation in radians (0 = +x, counterclockwise).
        orientation_rad: f64,
        amplitude: f64,
        #[serde(default)]
        phase_rad: f64,
    },
    GaussianNoise { sigma: f64 },
}

/// Parametric description of a synthetic scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub pixel_size_m: f64,
    pub seed: u64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub components: Vec<Component>,
}

fn check_finite(name: &'static str, value: f64) -> Result<(), SynthError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(SynthError::NonFiniteParameter { name, value })
    }
}

fn validate(spec: &SynthSpec) -> Result<(), SynthError> {
    check_finite("offset", spec.offset)?;
    for c in &spec.components {
        match *c {
            Component::Rolls {
                wavelength_px,
                orientation_rad,
                amplitude,
                rise_fraction,
                phase_rad,
            } => {
                if !(wavelength_px >= 4.0) {
                    return Err(SynthError::WavelengthTooSmall(wavelength_px));
                }
                if !(rise_fraction > 0.0 && rise_fraction < 1.0) {
                    return Err(SynthError::BadRiseFraction(rise_fraction));
                }
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(SynthError::BadAmplitude(amplitude));
                }
                check_finite("orientation_rad", orientation_rad)?;
                check_finite("phase_rad", phase_rad)?;
            }
            Component::Swell {
                wavelength_px,
                orientation_rad,
                amplitude,
                phase_rad,
            } => {
                if !(wavelength_px >= 4.0) {
                    return Err(SynthError::WavelengthTooSmall(wavelength_px));
                }
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(SynthError::BadAmplitude(amplitude));
                }
                check_finite("orientation_rad", orientation_rad)?;
                check_finite("phase_rad", phase_rad)?;
            }
            Component::GaussianNoise { sigma } => {
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return Err(SynthError::BadSigma(sigma));
                }
            }
        }
    }
    Ok(())
}

/// Standard normals from raw ChaCha8 output via Box-Muller.
struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    fn for_row(seed: u64, row: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(row);
        Self { rng, spare: None }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] so the log is finite; u2 in [0, 1)
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        let (s, c) = angle.sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }
}

/// Asymmetric triangular wave on [0, 1) with range [-amplitude, amplitude].
#[inline]
fn triangle(t: f64, rise: f64, amplitude: f64) -> f64 {
    if t < rise {
        -amplitude + 2.0 * amplitude * t / rise
    } else {
        amplitude - 2.0 * amplitude * (t - rise) / (1.0 - rise)
    }
}

#[inline]
fn fract(v: f64) -> f64 {
    v - v.floor()
}

/// Generate the field described by `spec`: `offset` plus the component sum,
/// fully valid mask. Same spec and seed always produce identical bytes.
pub fn generate(spec: &SynthSpec) -> Result<Field2D, SynthError> {
    validate(spec)?;
    let (w, h) = (spec.width, spec.height);
    let two_pi = 2.0 * std::f64::consts::PI;

    struct WaveParams {
        ex: f64,
        ey: f64,
        inv_wavelength: f64,
        amplitude: f64,
        rise: Option<f64>,
        phase_turns: f64,
    }
    let waves: Vec<WaveParams> = spec
        .components
        .iter()
        .filter_map(|c| match *c {
            Component::Rolls {
                wavelength_px,
                orientation_rad,
                amplitude,
                rise_fraction,
                phase_rad,
            } => Some(WaveParams {
                ex: orientation_rad.cos(),
                ey: orientation_rad.sin(),
                inv_wavelength: 1.0 / wavelength_px,
                amplitude,
                rise: Some(rise_fraction),
                phase_turns: phase_rad / two_pi,
            }),
            Component::Swell {
                wavelength_px,
                orientation_rad,
                amplitude,
                phase_rad,
            } => Some(WaveParams {
                ex: orientation_rad.cos(),
                ey: orientation_rad.sin(),
                inv_wavelength: 1.0 / wavelength_px,
                amplitude,
                rise: None,
                phase_turns: phase_rad / two_pi,
            }),
            Component::GaussianNoise { .. } => None,
        })
        .collect();
    let noise_sigmas: Vec<f64> = spec
        .components
        .iter()
        .filter_map(|c| match *c {
            Component::GaussianNoise { sigma } => Some(sigma),
            _ => None,
        })
        .collect();

    let fill_row = |y: usize, row: &mut [f64]| {
        let mut streams: Vec<NormalStream> = noise_sigmas
            .iter()
            .enumerate()
            .map(|(k, _)| NormalStream::for_row(spec.seed.wrapping_add(k as u64), y as u64))
            .collect();
        for (x, out) in row.iter_mut().enumerate() {
            let mut v = spec.offset;
            for wave in &waves {
                let u = x as f64 * wave.ex + y as f64 * wave.ey;
                let t = fract(u * wave.inv_wavelength + wave.phase_turns);
                v += match wave.rise {
                    Some(rise) => triangle(t, rise, wave.amplitude),
                    None => wave.amplitude * (two_pi * t).sin(),
                };
            }
            for (stream, sigma) in streams.iter_mut().zip(&noise_sigmas) {
                v += sigma * stream.next();
            }
            *out = v;
        }
    };

    let mut values = vec![0.0f64; w * h];
    #[cfg(feature = "parallel")]
    values
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, row)| fill_row(y, row));
    #[cfg(not(feature = "parallel"))]
    values
        .chunks_mut(w)
        .enumerate()
        .for_each(|(y, row)| fill_row(y, row));

    Ok(Field2D::new(
        w,
        h,
        spec.pixel_size_m,
        values,
        vec![true; w * h],
    )?)
}

/// Brute-force reference for the statistics maps.
///
/// Every lag of the full centered grid is evaluated by explicit double
/// loops with plain two-pass moment arithmetic; no code is shared with the
/// `statmaps` engines beyond elementary operations. Intended for small
/// fields (tests use up to 64 squared).
pub fn oracle_statmaps(
    field: &Field2D,
    spec: &LagGridSpec,
    min_count: u64,
) -> Result<StatMapSet, StatMapsError> {
    if spec.max_lag() >= field.width() || spec.max_lag() >= field.height() {
        return Err(StatMapsError::MaxLagTooLarge {
            max_lag: spec.max_lag(),
            width: field.width(),
            height: field.height(),
        });
    }
    if min_count < 2 {
        return Err(StatMapsError::MinCountTooSmall(min_count));
    }

    // Independent field-variance computation for the degeneracy floor.
    let (w, h) = (field.width() as i64, field.height() as i64);
    let mut sum = 0.0;
    let mut n_valid = 0u64;
    for y in 0..h {
        for x in 0..w {
            if field.is_valid(x as usize, y as usize) {
                sum += field.get(x as usize, y as usize);
                n_valid += 1;
            }
        }
    }
    let field_mean = sum / n_valid.max(1) as f64;
    let mut var_sum = 0.0;
    for y in 0..h {
        for x in 0..w {
            if field.is_valid(x as usize, y as usize) {
                let d = field.get(x as usize, y as usize) - field_mean;
                var_sum += d * d;
            }
        }
    }
    let m2_floor = DEGENERACY_FLOOR_REL * (var_sum / n_valid.max(1) as f64);

    let mut maps = StatMapSet::new_missing(*spec, field.pixel_size());
    let hw = spec.half_width() as isize;
    let step = spec.step() as i64;
    let mut increments: Vec<f64> = Vec::new();

    for jl in -hw..=hw {
        for il in -hw..=hw {
            let (lx, ly) = (il as i64 * step, jl as i64 * step);
            increments.clear();
            for y in 0..h {
                for x in 0..w {
                    let (xs, ys) = (x + lx, y + ly);
                    if xs < 0 || xs >= w || ys < 0 || ys >= h {
                        continue;
                    }
                    if field.is_valid(x as usize, y as usize)
                        && field.is_valid(xs as usize, ys as usize)
                    {
                        increments
                            .push(field.get(xs as usize, ys as usize) - field.get(x as usize, y as usize));
                    }
                }
            }
            let count = increments.len() as u64;
            let cell = if count < min_count {
                super::statmaps::oracle_cell(count, None)
            } else {
                let n = count as f64;
                let s2 = increments.iter().map(|d| d * d).sum::<f64>() / n;
                let s3 = increments.iter().map(|d| d * d * d).sum::<f64>() / n;
                let s4 = increments.iter().map(|d| d * d * d * d).sum::<f64>() / n;
                let mean = increments.iter().sum::<f64>() / n;
                let m2 = increments.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
                let m3 = increments.iter().map(|d| (d - mean).powi(3)).sum::<f64>() / n;
                let m4 = increments.iter().map(|d| (d - mean).powi(4)).sum::<f64>() / n;
                let (skew, flat) = if m2 > m2_floor {
                    (m3 / m2.powf(1.5), m4 / (m2 * m2))
                } else {
                    (f64::NAN, f64::NAN)
                };
                super::statmaps::oracle_cell(count, Some((s2, s3, s4, skew, flat)))
            };
            maps.write_cell(il, jl, &cell);
        }
    }
    Ok(maps)
}
