//! Raw-binary grid files with JSON sidecar headers.
//!
//! A grid file holds little-endian IEEE-754 f32 samples, row-major from the
//! top-left corner. Its header lives next to it with the same basename and
//! a `.json` suffix. Missing samples are stored as the `nodata` sentinel
//! declared in the header (a finite value, since JSON cannot carry NaN).

use serde::{Deserialize, Serialize};
use sf2d_core::{Field2D, LagGrid, PolarMap, StatKind};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

/// Default missing-sample sentinel; far outside any physical value range.
pub const NODATA: f32 = -3.0e38;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad header {path}: {reason}")]
    BadHeader { path: PathBuf, reason: String },
    #[error("payload {path} holds {got} bytes, header implies {want}")]
    SizeMismatch {
        path: PathBuf,
        got: usize,
        want: usize,
    },
    #[error(transparent)]
    Grid(#[from] sf2d_core::GridError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Sidecar path: same basename, `.json` suffix.
pub fn sidecar_path(payload: &Path) -> PathBuf {
    payload.with_extension("json")
}

/// Kinds of grid described by a sidecar header.
#[derive(Clone, Debug, PartialEq)]
pub enum GridKind {
    /// Scalar field with physical pixel size.
    Field { pixel_size_m: f64 },
    /// Centered lag-grid statistic map.
    LagMap {
        statistic: String,
        pixel_size_m: f64,
        max_lag_px: usize,
        step: usize,
    },
    /// Polar-resampled statistic map.
    PolarMap {
        statistic: String,
        n_r: usize,
        n_theta: usize,
        r_max_m: f64,
    },
}

/// On-disk header. One struct covers fields, lag maps and polar maps; the
/// optional keys declare which kind it is.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Header {
    pub width: usize,
    pub height: usize,
    pub dtype: String,
    pub order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pixel_size_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodata: Option<f32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_lag_px: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max_m: Option<f64>,
}

impl Header {
    fn base(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            dtype: "f32".to_string(),
            order: "row-major".to_string(),
            pixel_size_m: None,
            nodata: None,
            statistic: None,
            max_lag_px: None,
            step: None,
            n_r: None,
            n_theta: None,
            r_max_m: None,
        }
    }

    pub fn kind(&self, path: &Path) -> Result<GridKind, FormatError> {
        let bad = |reason: &str| FormatError::BadHeader {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        if self.dtype != "f32" {
            return Err(bad(&format!("unsupported dtype `{}`", self.dtype)));
        }
        if self.order != "row-major" {
            return Err(bad(&format!("unsupported order `{}`", self.order)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(bad("zero dimension"));
        }
        match (&self.statistic, self.max_lag_px, self.n_r) {
            (Some(stat), Some(max_lag), None) => Ok(GridKind::LagMap {
                statistic: stat.clone(),
                pixel_size_m: self
                    .pixel_size_m
                    .ok_or_else(|| bad("lag map header lacks pixel_size_m"))?,
                max_lag_px: max_lag,
                step: self.step.unwrap_or(1),
            }),
            (Some(stat), None, Some(n_r)) => {
                let n_theta = self.n_theta.ok_or_else(|| bad("polar header lacks n_theta"))?;
                let r_max_m = self.r_max_m.ok_or_else(|| bad("polar header lacks r_max_m"))?;
                if n_r != self.width || n_theta != self.height {
                    return Err(bad("polar bin counts disagree with dimensions"));
                }
                Ok(GridKind::PolarMap {
                    statistic: stat.clone(),
                    n_r,
                    n_theta,
                    r_max_m,
                })
            }
            (None, None, None) => Ok(GridKind::Field {
                pixel_size_m: self
                    .pixel_size_m
                    .ok_or_else(|| bad("field header lacks pixel_size_m"))?,
            }),
            _ => Err(bad("ambiguous header: mixed field/lag/polar keys")),
        }
    }
}

fn write_payload(path: &Path, samples: impl Iterator<Item = f32>) -> Result<(), FormatError> {
    let mut bytes: Vec<u8> = Vec::new();
    for v in samples {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&bytes).map_err(io_err(path))
}

fn write_header(path: &Path, header: &Header) -> Result<(), FormatError> {
    let sidecar = sidecar_path(path);
    let json = serde_json::to_string_pretty(header).expect("header serializes");
    fs::write(&sidecar, json.as_bytes()).map_err(io_err(&sidecar))
}

fn read_payload(path: &Path, expected: usize) -> Result<Vec<f32>, FormatError> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .map_err(io_err(path))?
        .read_to_end(&mut bytes)
        .map_err(io_err(path))?;
    if bytes.len() != expected * 4 {
        return Err(FormatError::SizeMismatch {
            path: path.to_path_buf(),
            got: bytes.len(),
            want: expected * 4,
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub fn read_header(path: &Path) -> Result<Header, FormatError> {
    let sidecar = sidecar_path(path);
    let text = fs::read_to_string(&sidecar).map_err(io_err(&sidecar))?;
    serde_json::from_str(&text).map_err(|e| FormatError::BadHeader {
        path: sidecar,
        reason: e.to_string(),
    })
}

/// Write a field: masked pixels become the nodata sentinel (declared in the
/// header only when the mask has holes).
pub fn write_field(path: &Path, field: &Field2D) -> Result<(), FormatError> {
    let any_invalid = field.mask().iter().any(|&m| !m);
    let mut header = Header::base(field.width(), field.height());
    header.pixel_size_m = Some(field.pixel_size());
    if any_invalid {
        header.nodata = Some(NODATA);
    }
    write_payload(
        path,
        field
            .values()
            .iter()
            .zip(field.mask())
            .map(|(&v, &m)| if m { v as f32 } else { NODATA }),
    )?;
    write_header(path, &header)
}

/// Read a field file; nodata samples and non-finite samples become masked.
pub fn read_field(path: &Path) -> Result<Field2D, FormatError> {
    let header = read_header(path)?;
    let pixel_size = match header.kind(path)? {
        GridKind::Field { pixel_size_m } => pixel_size_m,
        _ => {
            return Err(FormatError::BadHeader {
                path: path.to_path_buf(),
                reason: "expected a field header, found a map header".to_string(),
            })
        }
    };
    let raw = read_payload(path, header.width * header.height)?;
    let nodata = header.nodata;
    let mut values = Vec::with_capacity(raw.len());
    let mut mask = Vec::with_capacity(raw.len());
    for v in raw {
        let invalid = !v.is_finite() || nodata.map_or(false, |nd| v == nd);
        mask.push(!invalid);
        values.push(if invalid { f64::NAN } else { v as f64 });
    }
    Ok(Field2D::new(
        header.width,
        header.height,
        pixel_size,
        values,
        mask,
    )?)
}

/// Write one lag-grid statistic map; missing cells become nodata.
pub fn write_lag_map(path: &Path, grid: &LagGrid, stat: StatKind) -> Result<(), FormatError> {
    let side = grid.side();
    let mut header = Header::base(side, side);
    header.pixel_size_m = Some(grid.pixel_size());
    header.nodata = Some(NODATA);
    header.statistic = Some(stat.label().to_string());
    header.max_lag_px = Some(grid.max_lag_px());
    header.step = Some(grid.step());
    write_payload(
        path,
        grid.data()
            .iter()
            .map(|&v| if v.is_nan() { NODATA } else { v as f32 }),
    )?;
    write_header(path, &header)
}

/// Write one polar statistic map; rows are angles, columns radii.
pub fn write_polar_map(path: &Path, map: &PolarMap) -> Result<(), FormatError> {
    let mut header = Header::base(map.n_r(), map.n_theta());
    header.nodata = Some(NODATA);
    header.statistic = Some(map.stat().label().to_string());
    header.n_r = Some(map.n_r());
    header.n_theta = Some(map.n_theta());
    header.r_max_m = Some(map.r_max_m());
    write_payload(
        path,
        map.data()
            .iter()
            .map(|&v| if v.is_nan() { NODATA } else { v as f32 }),
    )?;
    write_header(path, &header)
}

/// Read any grid file for rendering: header plus samples with nodata and
/// non-finite entries mapped to NaN.
pub fn read_grid_for_render(path: &Path) -> Result<(Header, Vec<f64>), FormatError> {
    let header = read_header(path)?;
    header.kind(path)?;
    let raw = read_payload(path, header.width * header.height)?;
    let nodata = header.nodata;
    let data = raw
        .into_iter()
        .map(|v| {
            if !v.is_finite() || nodata.map_or(false, |nd| v == nd) {
                f64::NAN
            } else {
                v as f64
            }
        })
        .collect();
    Ok((header, data))
}
