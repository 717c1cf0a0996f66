//! Polar resampling of centered lag-grid maps and theta-transects.
//!
//! Angles are measured from the +lx axis (grid columns), increasing
//! counterclockwise toward +ly (grid rows). Radii are uniform on
//! `(0, r_max]` with `r_max` the largest represented lag; corners of the
//! lag square beyond the inscribed circle are not sampled.

use crate::statmaps::{LagGrid, StatKind};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolarError {
    #[error("need at least 4 radial bins, got {0}")]
    TooFewRadialBins(usize),
    #[error("need at least 8 angular bins and an even count, got {0}")]
    BadAngularBins(usize),
}

/// One statistic resampled onto an (r, theta) grid.
///
/// Data is row-major with one row per angle; missing samples are NaN.
#[derive(Clone, Debug)]
pub struct PolarMap {
    stat: StatKind,
    n_r: usize,
    n_theta: usize,
    r_max_m: f64,
    cell_m: f64,
    data: Vec<f64>,
}

impl PolarMap {
    pub fn stat(&self) -> StatKind {
        self.stat
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// Outer sampling radius in meters.
    pub fn r_max_m(&self) -> f64 {
        self.r_max_m
    }

    /// Radial bin width in meters.
    pub fn r_step_m(&self) -> f64 {
        self.r_max_m / self.n_r as f64
    }

    /// Physical size of one source lag cell in meters.
    pub fn cell_m(&self) -> f64 {
        self.cell_m
    }

    /// Bin radii in meters: `(k + 1) * r_step` for k in `0..n_r`.
    pub fn r_values(&self) -> Vec<f64> {
        (0..self.n_r)
            .map(|k| (k + 1) as f64 * self.r_step_m())
            .collect()
    }

    /// Bin angles in radians, uniform on [0, 2 pi).
    pub fn theta_values(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|j| 2.0 * PI * j as f64 / self.n_theta as f64)
            .collect()
    }

    #[inline]
    pub fn value(&self, j_theta: usize, k_r: usize) -> f64 {
        self.data[j_theta * self.n_r + k_r]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Row of samples along one grid angle.
    pub fn row(&self, j_theta: usize) -> &[f64] {
        &self.data[j_theta * self.n_r..(j_theta + 1) * self.n_r]
    }

    /// Index of the grid angle nearest to `theta` (mod 2 pi, ties toward the
    /// smaller angle).
    pub fn nearest_angle_index(&self, theta: f64) -> usize {
        let step = 2.0 * PI / self.n_theta as f64;
        let t = theta.rem_euclid(2.0 * PI);
        let below = (t / step).floor() as usize % self.n_theta;
        let above = (below + 1) % self.n_theta;
        let d_below = t - below as f64 * step;
        let d_above = step - d_below;
        if d_below <= d_above {
            below
        } else {
            above
        }
    }

    /// Extract the transect at the grid angle nearest to `theta`; the
    /// snapped angle is recorded on the result.
    pub fn transect(&self, theta: f64) -> Transect {
        let j = self.nearest_angle_index(theta);
        Transect {
            theta: 2.0 * PI * j as f64 / self.n_theta as f64,
            r_m: self.r_values(),
            values: self.row(j).to_vec(),
        }
    }
}

/// Statistic values along one angle as a function of radius.
#[derive(Clone, Debug)]
pub struct Transect {
    /// Snapped grid angle in radians.
    pub theta: f64,
    /// Bin radii in meters.
    pub r_m: Vec<f64>,
    /// Statistic values; NaN marks missing bins.
    pub values: Vec<f64>,
}

/// Resample a lag grid onto polar coordinates with bilinear interpolation.
///
/// Samples whose four cartesian neighbors are all missing come out missing;
/// partially missing neighborhoods renormalize the weights over the valid
/// ones, so resampling never manufactures values outside the local range.
pub fn to_polar(
    grid: &LagGrid,
    stat: StatKind,
    n_r: usize,
    n_theta: usize,
) -> Result<PolarMap, PolarError> {
    if n_r < 4 {
        return Err(PolarError::TooFewRadialBins(n_r));
    }
    if n_theta < 8 || n_theta % 2 != 0 {
        return Err(PolarError::BadAngularBins(n_theta));
    }

    let hw = grid.half_width() as f64;
    let r_max_px = (grid.max_lag_px()) as f64;
    let r_max_m = r_max_px * grid.pixel_size();
    let side = grid.side();
    let data_in = grid.data();

    // Directions for the second half plane are exact negations of the first,
    // so inherited even/odd symmetries survive resampling to rounding.
    let half = n_theta / 2;
    let mut dirs: Vec<(f64, f64)> = Vec::with_capacity(n_theta);
    for j in 0..half {
        let th = 2.0 * PI * j as f64 / n_theta as f64;
        dirs.push((th.cos(), th.sin()));
    }
    for j in 0..half {
        let (c, s) = dirs[j];
        dirs.push((-c, -s));
    }

    let step_px = grid.step() as f64;
    let dr_px = r_max_px / n_r as f64;
    let mut data = vec![f64::NAN; n_theta * n_r];
    for (j, &(c, s)) in dirs.iter().enumerate() {
        for k in 0..n_r {
            let r_px = (k + 1) as f64 * dr_px;
            let fx = r_px * c / step_px + hw;
            let fy = r_px * s / step_px + hw;
            data[j * n_r + k] = bilinear(data_in, side, fx, fy);
        }
    }

    Ok(PolarMap {
        stat,
        n_r,
        n_theta,
        r_max_m,
        cell_m: step_px * grid.pixel_size(),
        data,
    })
}

fn bilinear(data: &[f64], side: usize, fx: f64, fy: f64) -> f64 {
    let x0 = fx.floor();
    let y0 = fy.floor();
    let tx = fx - x0;
    let ty = fy - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let corners = [
        (x0, y0, (1.0 - tx) * (1.0 - ty)),
        (x0 + 1, y0, tx * (1.0 - ty)),
        (x0, y0 + 1, (1.0 - tx) * ty),
        (x0 + 1, y0 + 1, tx * ty),
    ];
    let mut acc = 0.0;
    let mut weight = 0.0;
    for (x, y, w) in corners {
        if w <= 0.0 || x < 0 || y < 0 || x >= side as i64 || y >= side as i64 {
            continue;
        }
        let v = data[y as usize * side + x as usize];
        if v.is_nan() {
            continue;
        }
        acc += w * v;
        weight += w;
    }
    if weight > 0.0 {
        acc / weight
    } else {
        f64::NAN
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field2D;
    use crate::statmaps::{compute_statmaps, Engine, LagGridSpec};

    fn lag_grid_from<F: Fn(isize, isize) -> f64>(hw: usize, f: F) -> LagGrid {
        let mut g = LagGrid::new_missing(hw, 1, 50.0);
        for j in -(hw as isize)..=(hw as isize) {
            for i in -(hw as isize)..=(hw as isize) {
                g.set(i, j, f(i, j));
            }
        }
        g
    }

    #[test]
    fn isotropic_map_gives_equal_rows() {
        // gentle radial ramp: bilinear error is bounded by the curvature,
        // 1e-7 * (tx(1-tx) + ty(1-ty)) <= 5e-8 per sample
        let g = lag_grid_from(10, |i, j| 1e-7 * (i * i + j * j) as f64);
        let p = to_polar(&g, StatKind::S2, 10, 24).unwrap();
        for k in 0..p.n_r() {
            let reference = p.value(0, k);
            for j in 1..p.n_theta() {
                assert!(
                    (p.value(j, k) - reference).abs() < 1e-6,
                    "row {j} bin {k}: {} vs {reference}",
                    p.value(j, k)
                );
            }
        }
    }

    #[test]
    fn quarter_turn_symmetric_map_gives_matching_rows() {
        // f depends on i^2 + j^2 only, so rotating the sample points by 90
        // degrees lands on equivalent positions; rows must match to rounding
        // even where bilinear interpolation itself is inexact.
        let g = lag_grid_from(10, |i, j| ((i * i + j * j) as f64).sqrt());
        let p = to_polar(&g, StatKind::S2, 10, 24).unwrap();
        for j in 0..p.n_theta() {
            for k in 0..p.n_r() {
                let a = p.value(j, k);
                let b = p.value((j + 6) % 24, k);
                assert!((a - b).abs() < 1e-9, "rows {j}/{}: {a} vs {b}", (j + 6) % 24);
            }
        }
    }

    #[test]
    fn even_and_odd_symmetry_survive_resampling() {
        let f = {
            let mut state = 0x5DEECE66Du64;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let values: Vec<f64> = (0..48 * 48).map(|_| next()).collect();
            Field2D::from_values(48, 48, 50.0, values).unwrap()
        };
        let maps = compute_statmaps(&f, &LagGridSpec::new(10, 1).unwrap(), 10, Engine::Fft)
            .unwrap();
        let s2p = to_polar(maps.s2(), StatKind::S2, 10, 24).unwrap();
        let skp = to_polar(maps.skew(), StatKind::Skew, 10, 24).unwrap();
        let half = 12;
        for j in 0..half {
            for k in 0..10 {
                let a = s2p.value(j, k);
                let b = s2p.value(j + half, k);
                assert!((a - b).abs() < 1e-9, "s2 rows {j}/{}", j + half);
                let a = skp.value(j, k);
                let b = skp.value(j + half, k);
                assert!((a + b).abs() < 1e-9, "skew rows {j}/{}", j + half);
            }
        }
    }

    #[test]
    fn samples_stay_within_neighbor_range() {
        let g = lag_grid_from(8, |i, j| (i as f64 * 0.7).sin() + (j as f64 * 1.3).cos());
        let (lo, hi) = g
            .data()
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let p = to_polar(&g, StatKind::Flat, 8, 16).unwrap();
        for &v in p.data() {
            if !v.is_nan() {
                assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn missing_cells_renormalize_or_propagate() {
        // all missing -> all polar samples missing
        let g = LagGrid::new_missing(6, 1, 50.0);
        let p = to_polar(&g, StatKind::S2, 6, 12).unwrap();
        assert!(p.data().iter().all(|v| v.is_nan()));

        // half plane missing: samples pointing into the defined half survive
        let mut g = LagGrid::new_missing(6, 1, 50.0);
        for j in 0..=6isize {
            for i in -6isize..=6 {
                g.set(i, j, 1.0);
            }
        }
        let p = to_polar(&g, StatKind::S2, 6, 12).unwrap();
        // theta = pi/2 points straight into the defined half
        let t = p.transect(std::f64::consts::FRAC_PI_2);
        assert!(t.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn transect_snaps_to_nearest_angle() {
        let g = lag_grid_from(6, |i, j| (i + 10 * j) as f64);
        let p = to_polar(&g, StatKind::S3, 6, 12).unwrap();
        let step = 2.0 * PI / 12.0;
        let t = p.transect(0.49 * step);
        assert_eq!(t.theta, 0.0);
        let t = p.transect(0.51 * step);
        assert!((t.theta - step).abs() < 1e-15);
        // exact midpoint ties toward the smaller angle
        let t = p.transect(0.5 * step);
        assert_eq!(t.theta, 0.0);
        // wraps modulo 2 pi
        let t = p.transect(2.0 * PI + 0.2 * step);
        assert_eq!(t.theta, 0.0);
    }

    #[test]
    fn transect_at_zero_reads_positive_lx_axis() {
        let g = lag_grid_from(8, |i, _| i as f64);
        let p = to_polar(&g, StatKind::S2, 8, 16).unwrap();
        let t = p.transect(0.0);
        // r bins are (k+1) * (8 px * 50 m) / 8; values interpolate i = lx
        for (k, &v) in t.values.iter().enumerate() {
            let r_px = (k + 1) as f64;
            assert!((v - r_px).abs() < 1e-12, "bin {k}: {v}");
        }
    }

    #[test]
    fn rotating_the_grid_rotates_rows() {
        let g = lag_grid_from(8, |i, j| {
            (0.9 * i as f64 + 0.1 * j as f64).sin() + 0.3 * (j as f64 * 0.4).cos()
        });
        // rotate the lag grid by 90 degrees: cell (i, j) -> (-j, i)
        let r = lag_grid_from(8, |i, j| g.value_at(j, -i));
        let p = to_polar(&g, StatKind::S2, 8, 16).unwrap();
        let q = to_polar(&r, StatKind::S2, 8, 16).unwrap();
        for j in 0..16 {
            for k in 0..8 {
                let a = p.value(j, k);
                let b = q.value((j + 4) % 16, k);
                assert!((a - b).abs() < 1e-9, "row {j} bin {k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_bad_bin_counts() {
        let g = LagGrid::new_missing(6, 1, 50.0);
        assert!(matches!(
            to_polar(&g, StatKind::S2, 3, 12),
            Err(PolarError::TooFewRadialBins(3))
        ));
        assert!(matches!(
            to_polar(&g, StatKind::S2, 6, 7),
            Err(PolarError::BadAngularBins(7))
        ));
        assert!(matches!(
            to_polar(&g, StatKind::S2, 6, 6),
            Err(PolarError::BadAngularBins(6))
        ));
    }
}
