//! Masked 2D field container, increment extraction and moment accumulation.
//!
//! A [`Field2D`] is a row-major grid of real samples with a per-pixel
//! validity mask and a physical pixel size. Increments are differences
//! `F(x+lx, y+ly) - F(x, y)` taken over the "valid-overlap" set: both
//! endpoints inside the grid and both mask-valid. No wrapping, no padding.

use thiserror::Error;

/// Errors from field construction and per-field operations.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("field dimensions must be at least 2x2, got {width}x{height}")]
    DimensionTooSmall { width: usize, height: usize },
    #[error("pixel size must be finite and positive, got {0}")]
    BadPixelSize(f64),
    #[error("values/mask length {got} does not match width*height = {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("sample at index {0} is flagged valid but not finite")]
    NonFiniteSample(usize),
    #[error("lag ({lx}, {ly}) out of range for {width}x{height} field")]
    LagOutOfRange {
        lx: i64,
        ly: i64,
        width: usize,
        height: usize,
    },
    #[error("low-pass cutoff {cutoff} m is below two pixels ({min} m)")]
    CutoffTooSmall { cutoff: f64, min: f64 },
    #[error("low-pass window of {window} px exceeds the smaller field dimension {limit}")]
    WindowTooLarge { window: usize, limit: usize },
}

/// A 2D lag vector in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lag {
    pub lx: i64,
    pub ly: i64,
}

impl Lag {
    pub fn new(lx: i64, ly: i64) -> Self {
        Self { lx, ly }
    }
}

/// Masked scalar grid with physical pixel size.
///
/// Values are stored row-major with the origin at the top-left corner;
/// `x` indexes columns and `y` indexes rows. Immutable after construction,
/// so it can be shared read-only across worker threads.
#[derive(Clone, Debug)]
pub struct Field2D {
    width: usize,
    height: usize,
    pixel_size: f64,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl Field2D {
    /// Build a field from explicit values and mask.
    ///
    /// Every sample flagged valid must be finite; invalid samples may hold
    /// anything (they are never read by the statistics).
    pub fn new(
        width: usize,
        height: usize,
        pixel_size: f64,
        values: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self, GridError> {
        if width < 2 || height < 2 {
            return Err(GridError::DimensionTooSmall { width, height });
        }
        if !(pixel_size.is_finite() && pixel_size > 0.0) {
            return Err(GridError::BadPixelSize(pixel_size));
        }
        let expected = width * height;
        if values.len() != expected {
            return Err(GridError::LengthMismatch {
                got: values.len(),
                expected,
            });
        }
        if mask.len() != expected {
            return Err(GridError::LengthMismatch {
                got: mask.len(),
                expected,
            });
        }
        for (i, (&v, &m)) in values.iter().zip(&mask).enumerate() {
            if m && !v.is_finite() {
                return Err(GridError::NonFiniteSample(i));
            }
        }
        Ok(Self {
            width,
            height,
            pixel_size,
            values,
            mask,
        })
    }

    /// Build a fully-specified field where non-finite samples become masked.
    pub fn from_values(
        width: usize,
        height: usize,
        pixel_size: f64,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        let mask: Vec<bool> = values.iter().map(|v| v.is_finite()).collect();
        Self::new(width, height, pixel_size, values, mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Physical pixel size in meters per pixel.
    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn valid_count(&self) -> u64 {
        self.mask.iter().filter(|&&m| m).count() as u64
    }

    /// Mean of valid samples; NaN if no sample is valid.
    pub fn valid_mean(&self) -> f64 {
        let mut sum = Kahan::default();
        let mut n = 0u64;
        for (&v, &m) in self.values.iter().zip(&self.mask) {
            if m {
                sum.add(v);
                n += 1;
            }
        }
        if n == 0 {
            f64::NAN
        } else {
            sum.value() / n as f64
        }
    }

    /// Population variance of valid samples; NaN if no sample is valid.
    pub fn valid_variance(&self) -> f64 {
        let mean = self.valid_mean();
        if mean.is_nan() {
            return f64::NAN;
        }
        let mut sum = Kahan::default();
        let mut n = 0u64;
        for (&v, &m) in self.values.iter().zip(&self.mask) {
            if m {
                let d = v - mean;
                sum.add(d * d);
                n += 1;
            }
        }
        (sum.value() / n as f64).max(0.0)
    }

    /// Field rotated 90 degrees counterclockwise (structures along angle
    /// `theta` end up along `theta + pi/2`).
    pub fn rotate90_ccw(&self) -> Field2D {
        let (w, h) = (self.width, self.height);
        let mut values = vec![0.0; w * h];
        let mut mask = vec![false; w * h];
        // new dims: width' = h, height' = w; G(x', y') = F(y', h - 1 - x')
        for yp in 0..w {
            for xp in 0..h {
                let src = self.index(yp, h - 1 - xp);
                values[yp * h + xp] = self.values[src];
                mask[yp * h + xp] = self.mask[src];
            }
        }
        Field2D {
            width: h,
            height: w,
            pixel_size: self.pixel_size,
            values,
            mask,
        }
    }

    fn check_lag(&self, lag: Lag) -> Result<(), GridError> {
        if lag.lx.unsigned_abs() as usize >= self.width
            || lag.ly.unsigned_abs() as usize >= self.height
        {
            return Err(GridError::LagOutOfRange {
                lx: lag.lx,
                ly: lag.ly,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }
}

/// Compensated (Kahan) accumulator; fixed traversal order makes sums
/// bit-reproducible.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Raw power sums of increments at one lag over the valid-overlap set.
#[derive(Clone, Copy, Debug, Default)]
pub struct PowerSums {
    /// Number of valid pairs.
    pub count: u64,
    /// Sum of increments.
    pub s1: f64,
    /// Sum of squared increments.
    pub s2: f64,
    /// Sum of cubed increments.
    pub s3: f64,
    /// Sum of fourth-power increments.
    pub s4: f64,
}

/// Central moments of the increment population at one lag.
///
/// Population convention: divide by count, no bias correction. With
/// `count == 0` all moments are NaN.
#[derive(Clone, Copy, Debug)]
pub struct MomentSet {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl MomentSet {
    pub fn undefined() -> Self {
        Self {
            count: 0,
            mean: f64::NAN,
            m2: f64::NAN,
            m3: f64::NAN,
            m4: f64::NAN,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.count > 0
    }

    /// Convert raw power sums to central moments via the usual
    /// raw-to-central identities.
    pub fn from_power_sums(sums: &PowerSums) -> Self {
        if sums.count == 0 {
            return Self::undefined();
        }
        let n = sums.count as f64;
        let mean = sums.s1 / n;
        let r2 = sums.s2 / n;
        let r3 = sums.s3 / n;
        let r4 = sums.s4 / n;
        let m2 = (r2 - mean * mean).max(0.0);
        let m3 = r3 - 3.0 * mean * r2 + 2.0 * mean * mean * mean;
        let m4 = (r4 - 4.0 * mean * r3 + 6.0 * mean * mean * r2
            - 3.0 * mean * mean * mean * mean)
            .max(0.0);
        Self {
            count: sums.count,
            mean,
            m2,
            m3,
            m4,
        }
    }
}

/// Accumulate raw increment power sums at `lag` over the valid-overlap set.
///
/// Traversal is row-major over base positions with Kahan compensation, so
/// two runs over the same inputs produce identical bytes.
pub fn increment_power_sums(field: &Field2D, lag: Lag) -> Result<PowerSums, GridError> {
    field.check_lag(lag)?;
    let (w, h) = (field.width as i64, field.height as i64);
    let x0 = 0.max(-lag.lx) as usize;
    let x1 = (w.min(w - lag.lx)) as usize;
    let y0 = 0.max(-lag.ly) as usize;
    let y1 = (h.min(h - lag.ly)) as usize;

    let mut count = 0u64;
    let mut s1 = Kahan::default();
    let mut s2 = Kahan::default();
    let mut s3 = Kahan::default();
    let mut s4 = Kahan::default();
    let values = &field.values;
    let mask = &field.mask;
    let width = field.width;
    let off = (lag.ly * w + lag.lx) as isize;

    for y in y0..y1 {
        let row = y * width;
        for x in x0..x1 {
            let i = row + x;
            let j = (i as isize + off) as usize;
            if mask[i] && mask[j] {
                let d = values[j] - values[i];
                let d2 = d * d;
                s1.add(d);
                s2.add(d2);
                s3.add(d2 * d);
                s4.add(d2 * d2);
                count += 1;
            }
        }
    }
    Ok(PowerSums {
        count,
        s1: s1.value(),
        s2: s2.value(),
        s3: s3.value(),
        s4: s4.value(),
    })
}

/// Central moments of increments at `lag` (population convention).
pub fn increment_moments(field: &Field2D, lag: Lag) -> Result<MomentSet, GridError> {
    let sums = increment_power_sums(field, lag)?;
    Ok(MomentSet::from_power_sums(&sums))
}

/// Whole-sample symmetric reflection: `-1 -> 0`, `n -> n-1`.
#[inline]
fn reflect(i: i64, n: i64) -> usize {
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Box-average low-pass filter with a square window of side
/// `round(cutoff / pixel_size)` pixels, forced odd.
///
/// Boundary samples are mirrored (symmetric padding), which keeps the mean
/// of a fully valid field unchanged. An output pixel is valid iff at least
/// half of its window pixels are valid; valid output values average only
/// the valid window samples.
pub fn lowpass(field: &Field2D, cutoff_m: f64) -> Result<Field2D, GridError> {
    let min_cutoff = 2.0 * field.pixel_size;
    if !(cutoff_m.is_finite() && cutoff_m >= min_cutoff) {
        return Err(GridError::CutoffTooSmall {
            cutoff: cutoff_m,
            min: min_cutoff,
        });
    }
    let mut window = (cutoff_m / field.pixel_size).round() as usize;
    if window % 2 == 0 {
        window += 1;
    }
    let limit = field.width.min(field.height);
    if window > limit {
        return Err(GridError::WindowTooLarge { window, limit });
    }
    let half = (window / 2) as i64;
    let (w, h) = (field.width, field.height);

    // Horizontal pass: windowed sums of masked values and valid counts.
    let mut sum_x = vec![0.0f64; w * h];
    let mut cnt_x = vec![0u32; w * h];
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let mut s = 0.0;
            let mut c = 0u32;
            for dx in -half..=half {
                let xi = reflect(x as i64 + dx, w as i64);
                if field.mask[row + xi] {
                    s += field.values[row + xi];
                    c += 1;
                }
            }
            sum_x[row + x] = s;
            cnt_x[row + x] = c;
        }
    }

    // Vertical pass over the horizontal partial sums.
    let win_area = (window * window) as u32;
    let mut values = vec![0.0f64; w * h];
    let mut mask = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            let mut c = 0u32;
            for dy in -half..=half {
                let yi = reflect(y as i64 + dy, h as i64);
                s += sum_x[yi * w + x];
                c += cnt_x[yi * w + x];
            }
            let i = y * w + x;
            if 2 * c >= win_area && c > 0 {
                values[i] = s / c as f64;
                mask[i] = true;
            } else {
                values[i] = f64::NAN;
                mask[i] = false;
            }
        }
    }

    Field2D::new(w, h, field.pixel_size, values, mask)
}
