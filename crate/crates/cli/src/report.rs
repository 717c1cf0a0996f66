//! Deterministic analysis report: scene features plus full configuration
//! echo and input checksum. No timestamps, so identical inputs and flags
//! produce identical bytes.

use serde::Serialize;
use sf2d_core::{FeatureConfig, RollReport, SwellReport};

#[derive(Clone, Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: "sf2d",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub sha256: String,
    pub width: usize,
    pub height: usize,
    pub pixel_size_m: f64,
}

/// Echo of every analyze flag and threshold that shaped the outputs.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub max_lag_px: usize,
    pub step_px: usize,
    pub min_count: u64,
    pub engine: String,
    pub n_theta: usize,
    pub n_r: usize,
    pub lowpass_m: Option<f64>,
    /// Annotation only; supplied by the caller, never derived from data.
    pub wind_dir_rad: Option<f64>,
    pub features: FeatureConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub input: InputInfo,
    pub config: ConfigEcho,
    pub roll: RollReport,
    pub swell: SwellReport,
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
