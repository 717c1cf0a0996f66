//! Heatmap rendering of grid files.
//!
//! Values map linearly onto the palette between the 1st and 99th
//! percentiles of the defined samples. Sequential (viridis-like) palettes
//! serve even statistics and plain fields; odd statistics (s3, skew)
//! automatically get a diverging palette centered at zero. Missing samples
//! render as neutral gray.

use image::{Rgb, RgbImage};

/// Palette selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmap {
    /// Diverging for odd statistics, sequential otherwise.
    Auto,
    Viridis,
    Diverging,
}

impl std::str::FromStr for Cmap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Cmap::Auto),
            "viridis" | "viridis-like" => Ok(Cmap::Viridis),
            "diverging" => Ok(Cmap::Diverging),
            other => Err(format!(
                "unknown cmap `{other}` (expected auto, viridis or diverging)"
            )),
        }
    }
}

const MISSING: Rgb<u8> = Rgb([128, 128, 128]);
const CENTER_MARK: Rgb<u8> = Rgb([255, 0, 0]);

/// Viridis anchor points, interpolated linearly.
const VIRIDIS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

/// Blue-white-red diverging anchors.
const DIVERGING: [[f64; 3]; 3] = [
    [59.0, 76.0, 192.0],
    [255.0, 255.0, 255.0],
    [180.0, 4.0, 38.0],
];

fn sample_anchors(anchors: &[[f64; 3]], t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0);
    let span = (anchors.len() - 1) as f64;
    let pos = t * span;
    let i = (pos.floor() as usize).min(anchors.len() - 2);
    let frac = pos - i as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * frac).round() as u8;
    Rgb([
        mix(anchors[i][0], anchors[i + 1][0]),
        mix(anchors[i][1], anchors[i + 1][1]),
        mix(anchors[i][2], anchors[i + 1][2]),
    ])
}

/// Resolve `auto` against the statistic label from the header.
pub fn resolve_cmap(cmap: Cmap, statistic: Option<&str>) -> Cmap {
    match cmap {
        Cmap::Auto => match statistic {
            Some("s3") | Some("skew") => Cmap::Diverging,
            _ => Cmap::Viridis,
        },
        other => other,
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Value scaling between the 1st and 99th percentile of defined samples.
/// Diverging palettes get a symmetric range centered at zero.
#[derive(Clone, Copy, Debug)]
pub struct ValueScale {
    lo: f64,
    hi: f64,
}

impl ValueScale {
    pub fn from_data(data: &[f64], cmap: Cmap) -> Option<ValueScale> {
        let mut defined: Vec<f64> = data.iter().copied().filter(|v| !v.is_nan()).collect();
        if defined.is_empty() {
            return None;
        }
        defined.sort_by(f64::total_cmp);
        let (p1, p99) = (percentile(&defined, 0.01), percentile(&defined, 0.99));
        Some(match cmap {
            Cmap::Diverging => {
                let m = p1.abs().max(p99.abs());
                ValueScale { lo: -m, hi: m }
            }
            _ => ValueScale { lo: p1, hi: p99 },
        })
    }

    /// Map a value to [0, 1]; degenerate ranges land mid-palette.
    pub fn normalize(&self, v: f64) -> f64 {
        if self.hi > self.lo {
            ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }
}

pub struct RenderOptions {
    pub cmap: Cmap,
    pub mark_center: bool,
}

/// Render a grid into an RGB image, integer-upscaled so the longer side
/// reaches at least 256 pixels. Returns the image and whether any sample
/// was defined.
pub fn render_grid(
    width: usize,
    height: usize,
    data: &[f64],
    statistic: Option<&str>,
    opts: &RenderOptions,
) -> (RgbImage, bool) {
    let cmap = resolve_cmap(opts.cmap, statistic);
    let scale = ValueScale::from_data(data, cmap);
    let up = (256 / width.max(height)).max(1) as u32;
    let mut img = RgbImage::new(width as u32 * up, height as u32 * up);

    for y in 0..height {
        for x in 0..width {
            let v = data[y * width + x];
            let color = match (&scale, v.is_nan()) {
                (_, true) | (None, _) => MISSING,
                (Some(s), false) => {
                    let t = s.normalize(v);
                    match cmap {
                        Cmap::Diverging => sample_anchors(&DIVERGING, t),
                        _ => sample_anchors(&VIRIDIS, t),
                    }
                }
            };
            for dy in 0..up {
                for dx in 0..up {
                    img.put_pixel(x as u32 * up + dx, y as u32 * up + dy, color);
                }
            }
        }
    }

    if opts.mark_center {
        let (cx, cy) = (width as u32 / 2, height as u32 / 2);
        for dy in 0..up {
            for dx in 0..up {
                img.put_pixel(cx * up + dx, cy * up + dy, CENTER_MARK);
            }
        }
    }
    (img, scale.is_some())
}
