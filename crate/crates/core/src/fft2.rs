//! Zero-padded 2D spectral cross-correlation of real planes.
//!
//! Correlations are linear (padding prevents wraparound for all lags up to
//! the requested maximum). Each plane is transformed once; every requested
//! pair then costs one spectrum product and one inverse transform.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Smallest length >= `n` whose prime factors are all in {2, 3, 5}.
pub(crate) fn next_fast_len(n: usize) -> usize {
    fn is_smooth(mut n: usize) -> bool {
        for p in [2, 3, 5] {
            while n % p == 0 {
                n /= p;
            }
        }
        n == 1
    }
    let mut m = n.max(1);
    while !is_smooth(m) {
        m += 1;
    }
    m
}

fn fft_rows(buf: &mut [Complex<f64>], width: usize, fft: &Arc<dyn Fft<f64>>) {
    #[cfg(feature = "parallel")]
    {
        buf.par_chunks_mut(width).for_each_init(
            || vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for row in buf.chunks_mut(width) {
            fft.process_with_scratch(row, &mut scratch);
        }
    }
}

fn transpose(src: &[Complex<f64>], dst: &mut [Complex<f64>], width: usize, height: usize) {
    for y in 0..height {
        for x in 0..width {
            dst[x * height + y] = src[y * width + x];
        }
    }
}

/// In-place 2D transform: rows with `row_fft`, then columns with `col_fft`.
fn fft_2d(
    buf: &mut Vec<Complex<f64>>,
    width: usize,
    height: usize,
    row_fft: &Arc<dyn Fft<f64>>,
    col_fft: &Arc<dyn Fft<f64>>,
) {
    fft_rows(buf, width, row_fft);
    let mut t = vec![Complex::new(0.0, 0.0); buf.len()];
    transpose(buf, &mut t, width, height);
    fft_rows(&mut t, height, col_fft);
    transpose(&t, buf, height, width);
}

/// Cross-correlator over a fixed set of real planes sharing one geometry.
pub(crate) struct PlaneCorrelator {
    pad_w: usize,
    pad_h: usize,
    max_lag: usize,
    spectra: Vec<Vec<Complex<f64>>>,
    row_fwd: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl PlaneCorrelator {
    /// Transform `planes` (each `width * height`, row-major) once, ready to
    /// correlate at all lags with |lx|, |ly| <= `max_lag`.
    pub(crate) fn new(planes: &[&[f64]], width: usize, height: usize, max_lag: usize) -> Self {
        let pad_w = next_fast_len(width + max_lag);
        let pad_h = next_fast_len(height + max_lag);
        let mut planner = FftPlanner::new();
        let row_fwd = planner.plan_fft_forward(pad_w);
        let col_fwd = planner.plan_fft_forward(pad_h);
        let row_inv = planner.plan_fft_inverse(pad_w);
        let col_inv = planner.plan_fft_inverse(pad_h);

        let spectra = planes
            .iter()
            .map(|p| {
                let mut buf = vec![Complex::new(0.0, 0.0); pad_w * pad_h];
                for y in 0..height {
                    for x in 0..width {
                        buf[y * pad_w + x].re = p[y * width + x];
                    }
                }
                fft_2d(&mut buf, pad_w, pad_h, &row_fwd, &col_fwd);
                buf
            })
            .collect();

        Self {
            pad_w,
            pad_h,
            max_lag,
            spectra,
            row_fwd,
            col_fwd,
            row_inv,
            col_inv,
        }
    }

    /// Correlation grid `c(l) = sum_r a(r + l) * b(r)` for plane indices
    /// `(ia, ib)`, returned as a `(2K+1)^2` row-major grid centered on lag
    /// (0, 0).
    pub(crate) fn correlate(&self, ia: usize, ib: usize) -> Vec<f64> {
        let _ = &self.row_fwd; // planner handles kept alive with the spectra
        let _ = &self.col_fwd;
        let n = self.pad_w * self.pad_h;
        let mut buf: Vec<Complex<f64>> = self.spectra[ia]
            .iter()
            .zip(&self.spectra[ib])
            .map(|(a, b)| a * b.conj())
            .collect();
        fft_2d(&mut buf, self.pad_w, self.pad_h, &self.row_inv, &self.col_inv);

        let k = self.max_lag as i64;
        let side = (2 * self.max_lag + 1) as i64;
        let scale = 1.0 / n as f64;
        let mut out = vec![0.0f64; (side * side) as usize];
        for jl in -k..=k {
            let wy = if jl >= 0 {
                jl as usize
            } else {
                (self.pad_h as i64 + jl) as usize
            };
            for il in -k..=k {
                let wx = if il >= 0 {
                    il as usize
                } else {
                    (self.pad_w as i64 + il) as usize
                };
                let v = buf[wy * self.pad_w + wx].re * scale;
                out[((jl + k) * side + (il + k)) as usize] = v;
            }
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn side(&self) -> usize {
        2 * self.max_lag + 1
    }
}
