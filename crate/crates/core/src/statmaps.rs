//! Structure-function and standardized skewness/flatness maps over a
//! centered lag grid.
//!
//! For every lag `(lx, ly)` the maps hold the raw increment moments
//! `S_n = <(F(r+l) - F(r))^n>` for n = 2, 3, 4 plus skewness and flatness of
//! the centered increment population. Two engines produce identical results
//! within floating tolerance:
//!
//! * `direct` — per-lag compensated summation, O(K^2 * W * H);
//! * `fft` — binomial expansion of the increment powers into masked
//!   cross-correlations of field powers, evaluated spectrally.
//!
//! Both engines evaluate one half of the lag plane and mirror it: lag `l`
//! and `-l` share the same unordered pair set, so even statistics are copied
//! and odd ones negated. This makes the even/odd lag symmetry exact by
//! construction; the brute-force oracle in `synth` checks every lag
//! independently.

use crate::fft2::PlaneCorrelator;
use crate::grid::{increment_power_sums, Field2D, GridError, Lag, MomentSet, PowerSums};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Relative degeneracy floor on the increment variance: cells with
/// `m2 <= DEGENERACY_FLOOR_REL * var(field)` get no skewness/flatness.
pub const DEGENERACY_FLOOR_REL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StatMapsError {
    #[error("max lag must be >= step >= 1, got max_lag={max_lag}, step={step}")]
    BadLagSpec { max_lag: usize, step: usize },
    #[error("max lag {max_lag} px must be smaller than both field dimensions {width}x{height}")]
    MaxLagTooLarge {
        max_lag: usize,
        width: usize,
        height: usize,
    },
    #[error("min_count must be at least 2, got {0}")]
    MinCountTooSmall(u64),
    #[error("cross-moment powers must satisfy a, b <= 4 and a + b <= 4, got ({a}, {b})")]
    PowersOutOfRange { a: u32, b: u32 },
    #[error("unknown engine `{0}` (expected `direct` or `fft`)")]
    UnknownEngine(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Centered lag grid: lags `i * step` for `|i| <= max_lag / step` along both
/// axes; (0, 0) is always included.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LagGridSpec {
    max_lag: usize,
    step: usize,
}

impl LagGridSpec {
    pub fn new(max_lag: usize, step: usize) -> Result<Self, StatMapsError> {
        if step == 0 || max_lag < step {
            return Err(StatMapsError::BadLagSpec { max_lag, step });
        }
        Ok(Self { max_lag, step })
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Number of sampled lags on each side of zero.
    pub fn half_width(&self) -> usize {
        self.max_lag / self.step
    }

    /// Grid side length `2 * half_width + 1`.
    pub fn side(&self) -> usize {
        2 * self.half_width() + 1
    }

    /// Largest represented lag in pixels.
    pub fn max_lag_px(&self) -> usize {
        self.half_width() * self.step
    }
}

/// Statistic identifiers for the five per-lag maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StatKind {
    S2,
    S3,
    S4,
    Skew,
    Flat,
}

impl StatKind {
    pub const ALL: [StatKind; 5] = [
        StatKind::S2,
        StatKind::S3,
        StatKind::S4,
        StatKind::Skew,
        StatKind::Flat,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            StatKind::S2 => "s2",
            StatKind::S3 => "s3",
            StatKind::S4 => "s4",
            StatKind::Skew => "skew",
            StatKind::Flat => "flat",
        }
    }

    /// Statistics that are odd under lag negation.
    pub fn is_odd(&self) -> bool {
        matches!(self, StatKind::S3 | StatKind::Skew)
    }
}

impl std::str::FromStr for StatKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "s2" => Ok(StatKind::S2),
            "s3" => Ok(StatKind::S3),
            "s4" => Ok(StatKind::S4),
            "skew" => Ok(StatKind::Skew),
            "flat" => Ok(StatKind::Flat),
            other => Err(format!("unknown statistic `{other}`")),
        }
    }
}

/// One statistic over the centered lag grid. Missing cells are NaN.
#[derive(Clone, Debug)]
pub struct LagGrid {
    half_width: usize,
    step: usize,
    pixel_size: f64,
    data: Vec<f64>,
}

impl LagGrid {
    pub(crate) fn new_missing(half_width: usize, step: usize, pixel_size: f64) -> Self {
        let side = 2 * half_width + 1;
        Self {
            half_width,
            step,
            pixel_size,
            data: vec![f64::NAN; side * side],
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Largest represented lag in pixels.
    pub fn max_lag_px(&self) -> usize {
        self.half_width * self.step
    }

    /// Row-major cell data; rows index `ly`, columns `lx`, both from
    /// `-half_width * step` to `+half_width * step`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn idx(&self, il: isize, jl: isize) -> usize {
        let hw = self.half_width as isize;
        debug_assert!(il.abs() <= hw && jl.abs() <= hw);
        ((jl + hw) * (2 * hw + 1) + (il + hw)) as usize
    }

    /// Value at grid cell `(il, jl)` in step units; NaN marks missing.
    #[inline]
    pub fn value_at(&self, il: isize, jl: isize) -> f64 {
        self.data[self.idx(il, jl)]
    }

    /// Defined value at grid cell `(il, jl)`, or None when missing.
    pub fn get(&self, il: isize, jl: isize) -> Option<f64> {
        let v = self.value_at(il, jl);
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    #[cfg(test)]
    pub(crate) fn set(&mut self, il: isize, jl: isize, v: f64) {
        let i = self.idx(il, jl);
        self.data[i] = v;
    }
}

/// Which computation path evaluates the per-lag sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Direct,
    Fft,
}

impl std::str::FromStr for Engine {
    type Err = StatMapsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Engine::Direct),
            "fft" => Ok(Engine::Fft),
            other => Err(StatMapsError::UnknownEngine(other.to_string())),
        }
    }
}

/// Per-lag grids of S2/S3/S4, skewness, flatness and valid-pair counts.
#[derive(Clone, Debug)]
pub struct StatMapSet {
    spec: LagGridSpec,
    pixel_size: f64,
    s2: LagGrid,
    s3: LagGrid,
    s4: LagGrid,
    skew: LagGrid,
    flat: LagGrid,
    counts: Vec<u64>,
}

impl StatMapSet {
    pub(crate) fn new_missing(spec: LagGridSpec, pixel_size: f64) -> Self {
        let hw = spec.half_width();
        let step = spec.step();
        let side = spec.side();
        Self {
            spec,
            pixel_size,
            s2: LagGrid::new_missing(hw, step, pixel_size),
            s3: LagGrid::new_missing(hw, step, pixel_size),
            s4: LagGrid::new_missing(hw, step, pixel_size),
            skew: LagGrid::new_missing(hw, step, pixel_size),
            flat: LagGrid::new_missing(hw, step, pixel_size),
            counts: vec![0; side * side],
        }
    }

    pub fn spec(&self) -> LagGridSpec {
        self.spec
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn stat(&self, kind: StatKind) -> &LagGrid {
        match kind {
            StatKind::S2 => &self.s2,
            StatKind::S3 => &self.s3,
            StatKind::S4 => &self.s4,
            StatKind::Skew => &self.skew,
            StatKind::Flat => &self.flat,
        }
    }

    pub fn s2(&self) -> &LagGrid {
        &self.s2
    }

    pub fn s3(&self) -> &LagGrid {
        &self.s3
    }

    pub fn s4(&self) -> &LagGrid {
        &self.s4
    }

    pub fn skew(&self) -> &LagGrid {
        &self.skew
    }

    pub fn flat(&self) -> &LagGrid {
        &self.flat
    }

    pub fn count_at(&self, il: isize, jl: isize) -> u64 {
        let i = self.s2.idx(il, jl);
        self.counts[i]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub(crate) fn write_cell(&mut self, il: isize, jl: isize, cell: &CellStats) {
        let i = self.s2.idx(il, jl);
        self.counts[i] = cell.count;
        self.s2.data[i] = cell.s2;
        self.s3.data[i] = cell.s3;
        self.s4.data[i] = cell.s4;
        self.skew.data[i] = cell.skew;
        self.flat.data[i] = cell.flat;
    }
}

/// Central moments plus standardized skewness/flatness at one lag.
///
/// `skew` and `flat` are NaN when the population is degenerate (fewer than
/// two pairs, or `m2` at or below the degeneracy floor).
#[derive(Clone, Copy, Debug)]
pub struct IncrementStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub skew: f64,
    pub flat: f64,
}

/// Convert raw increment power sums at one lag to central moments and the
/// standardized skewness/flatness factors.
pub fn increment_stats(sums: &PowerSums, m2_floor: f64) -> IncrementStats {
    if sums.count < 2 {
        return IncrementStats {
            count: sums.count,
            mean: f64::NAN,
            m2: f64::NAN,
            m3: f64::NAN,
            m4: f64::NAN,
            skew: f64::NAN,
            flat: f64::NAN,
        };
    }
    let m = MomentSet::from_power_sums(sums);
    let degenerate = !(m.m2 > m2_floor);
    let (skew, flat) = if degenerate {
        (f64::NAN, f64::NAN)
    } else {
        (m.m3 / (m.m2 * m.m2.sqrt()), m.m4 / (m.m2 * m.m2))
    };
    IncrementStats {
        count: m.count,
        mean: m.mean,
        m2: m.m2,
        m3: m.m3,
        m4: m.m4,
        skew,
        flat,
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct CellStats {
    count: u64,
    s2: f64,
    s3: f64,
    s4: f64,
    skew: f64,
    flat: f64,
}

impl CellStats {
    fn missing(count: u64) -> Self {
        Self {
            count,
            s2: f64::NAN,
            s3: f64::NAN,
            s4: f64::NAN,
            skew: f64::NAN,
            flat: f64::NAN,
        }
    }

    fn mirrored(&self) -> Self {
        Self {
            count: self.count,
            s2: self.s2,
            s3: -self.s3,
            s4: self.s4,
            skew: -self.skew,
            flat: self.flat,
        }
    }

    fn from_sums(sums: &PowerSums, min_count: u64, m2_floor: f64) -> Self {
        if sums.count < min_count {
            return Self::missing(sums.count);
        }
        let n = sums.count as f64;
        let stats = increment_stats(sums, m2_floor);
        Self {
            count: sums.count,
            s2: (sums.s2 / n).max(0.0),
            s3: sums.s3 / n,
            s4: (sums.s4 / n).max(0.0),
            skew: stats.skew,
            flat: stats.flat,
        }
    }
}

/// Assemble a cell from independently computed values (used by the
/// brute-force oracle in `synth`).
pub(crate) fn oracle_cell(count: u64, stats: Option<(f64, f64, f64, f64, f64)>) -> CellStats {
    match stats {
        None => CellStats::missing(count),
        Some((s2, s3, s4, skew, flat)) => CellStats {
            count,
            s2,
            s3,
            s4,
            skew,
            flat,
        },
    }
}

/// Lag cells in the closed upper half plane, center excluded. The lower half
/// is filled by mirroring.
fn half_plane_cells(hw: isize) -> Vec<(isize, isize)> {
    let mut cells = Vec::with_capacity((2 * hw as usize + 1).pow(2) / 2 + 1);
    for j in 0..=hw {
        let i_min = if j == 0 { 1 } else { -hw };
        for i in i_min..=hw {
            cells.push((i, j));
        }
    }
    cells
}

fn direct_power_sums(
    field: &Field2D,
    cells: &[(isize, isize)],
    step: usize,
) -> Result<Vec<PowerSums>, GridError> {
    let step = step as i64;
    let eval = |&(i, j): &(isize, isize)| {
        increment_power_sums(field, Lag::new(i as i64 * step, j as i64 * step))
    };
    #[cfg(feature = "parallel")]
    {
        cells.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cells.iter().map(eval).collect()
    }
}

/// Correlation grids of masked power planes, indexed by pixel lag.
struct PowerCorrelations {
    max_lag: i64,
    g00: Vec<f64>,
    g10: Vec<f64>,
    g20: Vec<f64>,
    g11: Vec<f64>,
    g30: Vec<f64>,
    g21: Vec<f64>,
    g40: Vec<f64>,
    g31: Vec<f64>,
    g22: Vec<f64>,
}

impl PowerCorrelations {
    /// Compute from the mask plane and centered masked powers of the field.
    ///
    /// Centering by the valid mean leaves all increments unchanged (they are
    /// translation invariant) but keeps the binomial combination well
    /// conditioned when the field carries a large offset.
    fn compute(field: &Field2D, max_lag_px: usize) -> Self {
        let (w, h) = (field.width(), field.height());
        let mean = field.valid_mean();
        let mean = if mean.is_nan() { 0.0 } else { mean };
        let n = w * h;
        let mut g0 = vec![0.0f64; n];
        let mut g1 = vec![0.0f64; n];
        let mut g2 = vec![0.0f64; n];
        let mut g3 = vec![0.0f64; n];
        let mut g4 = vec![0.0f64; n];
        for i in 0..n {
            if field.mask()[i] {
                let v = field.values()[i] - mean;
                let v2 = v * v;
                g0[i] = 1.0;
                g1[i] = v;
                g2[i] = v2;
                g3[i] = v2 * v;
                g4[i] = v2 * v2;
            }
        }
        let corr = PlaneCorrelator::new(&[&g0, &g1, &g2, &g3, &g4], w, h, max_lag_px);
        Self {
            max_lag: max_lag_px as i64,
            g00: corr.correlate(0, 0),
            g10: corr.correlate(1, 0),
            g20: corr.correlate(2, 0),
            g11: corr.correlate(1, 1),
            g30: corr.correlate(3, 0),
            g21: corr.correlate(2, 1),
            g40: corr.correlate(4, 0),
            g31: corr.correlate(3, 1),
            g22: corr.correlate(2, 2),
        }
    }

    #[inline]
    fn at(grid: &[f64], k: i64, lx: i64, ly: i64) -> f64 {
        let side = 2 * k + 1;
        grid[((ly + k) * side + (lx + k)) as usize]
    }

    /// Raw increment power sums at pixel lag `(lx, ly)` via the binomial
    /// expansion of `(F(r+l) - F(r))^n`.
    fn power_sums(&self, lx: i64, ly: i64) -> PowerSums {
        let k = self.max_lag;
        let at = Self::at;
        let count_f = at(&self.g00, k, lx, ly);
        let count = count_f.round().max(0.0) as u64;
        let s1 = at(&self.g10, k, lx, ly) - at(&self.g10, k, -lx, -ly);
        let s2 = at(&self.g20, k, lx, ly) - 2.0 * at(&self.g11, k, lx, ly)
            + at(&self.g20, k, -lx, -ly);
        let s3 = at(&self.g30, k, lx, ly) - 3.0 * at(&self.g21, k, lx, ly)
            + 3.0 * at(&self.g21, k, -lx, -ly)
            - at(&self.g30, k, -lx, -ly);
        let s4 = at(&self.g40, k, lx, ly) - 4.0 * at(&self.g31, k, lx, ly)
            + 6.0 * at(&self.g22, k, lx, ly)
            - 4.0 * at(&self.g31, k, -lx, -ly)
            + at(&self.g40, k, -lx, -ly);
        PowerSums {
            count,
            s1,
            s2,
            s3,
            s4,
        }
    }
}

fn check_lag_range(field: &Field2D, max_lag: usize) -> Result<(), StatMapsError> {
    if max_lag >= field.width() || max_lag >= field.height() {
        return Err(StatMapsError::MaxLagTooLarge {
            max_lag,
            width: field.width(),
            height: field.height(),
        });
    }
    Ok(())
}

/// Compute the full map set over the centered lag grid.
///
/// Cells with fewer than `min_count` valid pairs are missing. Skewness and
/// flatness are additionally missing where the increment variance sits at or
/// below `DEGENERACY_FLOOR_REL` times the field variance, and at lag (0, 0).
pub fn compute_statmaps(
    field: &Field2D,
    spec: &LagGridSpec,
    min_count: u64,
    engine: Engine,
) -> Result<StatMapSet, StatMapsError> {
    check_lag_range(field, spec.max_lag())?;
    if min_count < 2 {
        return Err(StatMapsError::MinCountTooSmall(min_count));
    }

    let m2_floor = DEGENERACY_FLOOR_REL * field.valid_variance();
    let hw = spec.half_width() as isize;
    let cells = half_plane_cells(hw);

    let cell_stats: Vec<CellStats> = match engine {
        Engine::Direct => {
            let sums = direct_power_sums(field, &cells, spec.step())?;
            sums.iter()
                .map(|s| CellStats::from_sums(s, min_count, m2_floor))
                .collect()
        }
        Engine::Fft => {
            let corr = PowerCorrelations::compute(field, spec.max_lag_px());
            let step = spec.step() as i64;
            cells
                .iter()
                .map(|&(i, j)| {
                    let sums = corr.power_sums(i as i64 * step, j as i64 * step);
                    CellStats::from_sums(&sums, min_count, m2_floor)
                })
                .collect()
        }
    };

    let mut maps = StatMapSet::new_missing(*spec, field.pixel_size());
    for (&(i, j), cell) in cells.iter().zip(&cell_stats) {
        maps.write_cell(i, j, cell);
        maps.write_cell(-i, -j, &cell.mirrored());
    }

    // Lag (0, 0): increments are identically zero over the valid pixels.
    let n_valid = field.valid_count();
    let center = if n_valid >= min_count {
        CellStats {
            count: n_valid,
            s2: 0.0,
            s3: 0.0,
            s4: 0.0,
            skew: f64::NAN,
            flat: f64::NAN,
        }
    } else {
        CellStats::missing(n_valid)
    };
    maps.write_cell(0, 0, &center);

    Ok(maps)
}

/// Per-lag grid of `sum F^a(r+l) * F^b(r)` over valid-overlap pairs,
/// together with the pair counts, both indexed by pixel lag.
#[derive(Clone, Debug)]
pub struct CrossMomentGrid {
    max_lag: usize,
    sums: Vec<f64>,
    counts: Vec<u64>,
}

impl CrossMomentGrid {
    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn side(&self) -> usize {
        2 * self.max_lag + 1
    }

    #[inline]
    fn idx(&self, lx: i64, ly: i64) -> usize {
        let k = self.max_lag as i64;
        debug_assert!(lx.abs() <= k && ly.abs() <= k);
        ((ly + k) * (2 * k + 1) + (lx + k)) as usize
    }

    pub fn sum_at(&self, lx: i64, ly: i64) -> f64 {
        self.sums[self.idx(lx, ly)]
    }

    pub fn count_at(&self, lx: i64, ly: i64) -> u64 {
        self.counts[self.idx(lx, ly)]
    }
}

/// Spectral evaluation of masked cross power sums for one `(a, b)` pair.
///
/// Works on the raw field values (no centering); the companion count grid is
/// the (0, 0)-power correlation of the mask with itself.
pub fn fft_cross_moments(
    field: &Field2D,
    max_lag: usize,
    powers: (u32, u32),
) -> Result<CrossMomentGrid, StatMapsError> {
    let (a, b) = powers;
    if a > 4 || b > 4 || a + b > 4 {
        return Err(StatMapsError::PowersOutOfRange { a, b });
    }
    if max_lag == 0 {
        return Err(StatMapsError::BadLagSpec { max_lag, step: 1 });
    }
    check_lag_range(field, max_lag)?;

    let (w, h) = (field.width(), field.height());
    let n = w * h;
    let masked_power = |p: u32| -> Vec<f64> {
        let mut out = vec![0.0f64; n];
        for i in 0..n {
            if field.mask()[i] {
                out[i] = field.values()[i].powi(p as i32);
            }
        }
        out
    };
    let g0 = masked_power(0);
    let ga = masked_power(a);
    let gb = masked_power(b);
    let corr = PlaneCorrelator::new(&[&g0, &ga, &gb], w, h, max_lag);
    let sums = corr.correlate(1, 2);
    let counts: Vec<u64> = corr
        .correlate(0, 0)
        .iter()
        .map(|c| c.round().max(0.0) as u64)
        .collect();
    Ok(CrossMomentGrid {
        max_lag,
        sums,
        counts,
    })
}
