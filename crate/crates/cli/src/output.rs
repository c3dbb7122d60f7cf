//! CSV and manifest emission. Every CSV opens with a comment line carrying
//! the configuration fingerprint and seed; files are written atomically so a
//! failed run never leaves a partial artifact behind.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};
use starpdr_core::{BeampatternGrid, CalibrationSummary, StatisticMaxima, SweepOutcome};

use crate::config::RunConfig;

/// Short hex fingerprint of the resolved configuration.
pub fn config_fingerprint(resolved: &RunConfig) -> anyhow::Result<String> {
    let canonical = resolved.to_toml()?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

fn manifest_line(hash: &str, seed: u64) -> String {
    format!("# config_hash={hash} seed={seed}\n")
}

pub fn sweep_csv(outcome: &SweepOutcome, hash: &str, seed: u64) -> String {
    let mut out = manifest_line(hash, seed);
    out.push_str("policy,P,snr_db,pd,pd_ci,rmse_mps,rmse_ci,far_achieved,trials\n");
    for row in &outcome.rows {
        let rmse = row.rmse_mps.map(|v| format!("{v:.6}")).unwrap_or_default();
        let rmse_ci = row.rmse_half_width.map(|v| format!("{v:.6}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{:.2},{:.6},{:.6},{},{},{:.6},{}",
            row.policy,
            row.pulses,
            row.snr_db,
            row.pd,
            row.pd_half_width,
            rmse,
            rmse_ci,
            row.far_achieved,
            row.trials
        );
    }
    out
}

pub fn beampattern_csv(grid: &BeampatternGrid, hash: &str, seed: u64) -> String {
    let mut out = manifest_line(hash, seed);
    out.push_str("az_deg,el_deg,normalized_gf\n");
    for (ia, az) in grid.azimuth_rad.iter().enumerate() {
        for (ie, el) in grid.elevation_rad.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.3},{:.3},{:.9}",
                az.to_degrees(),
                el.to_degrees(),
                grid.value(ia, ie)
            );
        }
    }
    out
}

/// No-target statistic maxima behind a calibration, for audits.
pub fn calibration_csv(
    per_combo: &[(CalibrationSummary, Vec<StatisticMaxima>)],
    hash: &str,
    seed: u64,
) -> String {
    let mut out = manifest_line(hash, seed);
    for (summary, _) in per_combo {
        let _ = writeln!(
            out,
            "# policy={} P={} eta={:.6} achieved_far={:.6} trials={}",
            summary.policy, summary.pulses, summary.eta, summary.achieved_far, summary.trials
        );
    }
    out.push_str("policy,P,trial,max_t,max_r,max_pair\n");
    for (summary, maxima) in per_combo {
        for (trial, m) in maxima.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{:.9},{:.9},{:.9}",
                summary.policy, summary.pulses, trial, m.single_t, m.single_r, m.pair
            );
        }
    }
    out
}

/// Run manifest: fingerprint, seed, calibrations, and the resolved
/// configuration echoed back.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub calibration: Vec<ManifestCalibration>,
    pub config: &'a RunConfig,
}

#[derive(Debug, Serialize)]
pub struct ManifestCalibration {
    pub policy: String,
    pub pulses: usize,
    pub eta: f64,
    pub achieved_far: f64,
    pub trials: usize,
}

impl ManifestCalibration {
    pub fn from_summary(s: &CalibrationSummary) -> Self {
        Self {
            policy: s.policy.to_string(),
            pulses: s.pulses,
            eta: s.eta,
            achieved_far: s.achieved_far,
            trials: s.trials,
        }
    }
}

pub fn manifest_toml(manifest: &Manifest<'_>) -> anyhow::Result<String> {
    toml::to_string(manifest).context("serializing run manifest")
}

/// Write through a temporary sibling and rename, so the target path either
/// holds the complete artifact or nothing new at all.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp.{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    let result =
        std::fs::write(&tmp, contents).and_then(|()| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

/// Manifest path next to an output artifact: `foo.csv` -> `foo.manifest.toml`.
pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    out.with_extension("manifest.toml")
}
