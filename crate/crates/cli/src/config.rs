//! Run configuration: a human-editable TOML schema mirroring the experiment
//! description, with angles in degrees and ratios in dB. Unknown keys are
//! rejected and every field has a documented default; only the `[scan]`
//! section (pulse counts and policies) is mandatory.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use starpdr_core::{AngleBoxDeg, Direction, ExperimentConfig, HalfSpace, PolicyKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scan: ScanSection,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub targets: TargetsSection,
    #[serde(default)]
    pub clutter: ClutterSection,
    #[serde(default)]
    pub detection: DetectionSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub beampattern: BeampatternSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Scanning policies to sweep: "simultaneous" and/or "sequential".
    pub policies: Vec<PolicyKind>,
    /// Pulse counts per coherent processing interval (even).
    pub pulses: Vec<usize>,
    #[serde(default = "default_oversampling")]
    pub doppler_oversampling: usize,
    /// Doppler search span in Hz; full unambiguous interval when absent.
    #[serde(default)]
    pub doppler_span_hz: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub carrier_hz: f64,
    pub pri_s: f64,
    /// Surface elements along y and z.
    pub ris_elements: [usize; 2],
    /// Receive elements along y and z.
    pub rx_elements: [usize; 2],
    /// Element spacing as a fraction of the carrier wavelength.
    pub spacing_wavelengths: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            carrier_hz: 28.0e9,
            pri_s: 0.5e-3,
            ris_elements: [16, 8],
            rx_elements: [16, 8],
            spacing_wavelengths: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetsSection {
    pub azimuth_t_deg: [f64; 2],
    pub elevation_t_deg: [f64; 2],
    pub azimuth_r_deg: [f64; 2],
    pub elevation_r_deg: [f64; 2],
    pub doppler_hz: [f64; 2],
}

impl Default for TargetsSection {
    fn default() -> Self {
        Self {
            azimuth_t_deg: [155.0, 160.0],
            elevation_t_deg: [20.0, 25.0],
            azimuth_r_deg: [20.0, 25.0],
            elevation_r_deg: [20.0, 25.0],
            doppler_hz: [500.0, 1000.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClutterSection {
    pub count_t: usize,
    pub count_r: usize,
    pub azimuth_t_deg: [f64; 2],
    pub elevation_t_deg: [f64; 2],
    pub azimuth_r_deg: [f64; 2],
    pub elevation_r_deg: [f64; 2],
    pub doppler_hz: [f64; 2],
    pub cnr_db: f64,
}

impl Default for ClutterSection {
    fn default() -> Self {
        Self {
            count_t: 10,
            count_r: 10,
            azimuth_t_deg: [200.0, 220.0],
            elevation_t_deg: [-40.0, -20.0],
            azimuth_r_deg: [-40.0, -20.0],
            elevation_r_deg: [-40.0, -20.0],
            doppler_hz: [-125.0, 125.0],
            cnr_db: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    /// Calibration target: expected declared targets per CPI with no target
    /// present.
    pub false_alarms_per_cpi: f64,
    pub calibration_trials: usize,
    pub noise_variance: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self { false_alarms_per_cpi: 1e-2, calibration_trials: 10_000, noise_variance: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            snr_db: vec![-5.0, -2.0, 1.0, 4.0, 7.0, 10.0, 13.0, 16.0],
            trials: 2000,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeampatternSection {
    /// Steered transmissive cell, azimuth/elevation in degrees.
    pub steer_t_deg: [f64; 2],
    /// Steered reflective cell, azimuth/elevation in degrees.
    pub steer_r_deg: [f64; 2],
    /// Half-space whose pattern is exported.
    pub half_space: String,
    pub grid_step_deg: f64,
}

impl Default for BeampatternSection {
    fn default() -> Self {
        Self {
            steer_t_deg: [157.5, 22.5],
            steer_r_deg: [22.0, 22.0],
            half_space: "reflective".into(),
            grid_step_deg: 1.0,
        }
    }
}

impl RunConfig {
    /// Built-in configuration: the documented defaults with the full
    /// policy/pulse grid.
    pub fn builtin() -> Self {
        Self {
            scan: ScanSection {
                policies: vec![PolicyKind::Simultaneous, PolicyKind::Sequential],
                pulses: vec![8, 16],
                doppler_oversampling: default_oversampling(),
                doppler_span_hz: None,
            },
            system: SystemSection::default(),
            targets: TargetsSection::default(),
            clutter: ClutterSection::default(),
            detection: DetectionSection::default(),
            sweep: SweepSection::default(),
            beampattern: BeampatternSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("configuration schema violation")?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        toml::to_string(self).context("serializing configuration")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading configuration file {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// Beampattern half-space, steered cell directions, and grid step.
    pub fn beampattern_request(&self) -> anyhow::Result<(HalfSpace, Direction, Direction, f64)> {
        let half = match self.beampattern.half_space.to_ascii_lowercase().as_str() {
            "reflective" => HalfSpace::Reflective,
            "transmissive" => HalfSpace::Transmissive,
            other => bail!(
                "beampattern.half_space: '{other}' is neither 'reflective' nor 'transmissive'"
            ),
        };
        let dir_t = Direction::from_degrees(
            self.beampattern.steer_t_deg[0],
            self.beampattern.steer_t_deg[1],
        )
        .map_err(|e| anyhow::anyhow!("beampattern.steer_t_deg: {e}"))?;
        let dir_r = Direction::from_degrees(
            self.beampattern.steer_r_deg[0],
            self.beampattern.steer_r_deg[1],
        )
        .map_err(|e| anyhow::anyhow!("beampattern.steer_r_deg: {e}"))?;
        if dir_t.half_space() != HalfSpace::Transmissive {
            bail!("beampattern.steer_t_deg: azimuth must lie in the transmissive range (90, 270) degrees");
        }
        if dir_r.half_space() != HalfSpace::Reflective {
            bail!("beampattern.steer_r_deg: azimuth must lie in the reflective range (-90, 90) degrees");
        }
        if self.beampattern.grid_step_deg <= 0.0 {
            bail!("beampattern.grid_step_deg: must be positive");
        }
        Ok((half, dir_t, dir_r, self.beampattern.grid_step_deg))
    }

    /// Resolve into the experiment description, validating every field.
    pub fn to_experiment(&self) -> anyhow::Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            carrier_hz: self.system.carrier_hz,
            pri: self.system.pri_s,
            ris_shape: (self.system.ris_elements[0], self.system.ris_elements[1]),
            rx_shape: (self.system.rx_elements[0], self.system.rx_elements[1]),
            spacing_wavelengths: self.system.spacing_wavelengths,
            policies: self.scan.policies.clone(),
            pulse_counts: self.scan.pulses.clone(),
            target_box_t: AngleBoxDeg::new(
                (self.targets.azimuth_t_deg[0], self.targets.azimuth_t_deg[1]),
                (self.targets.elevation_t_deg[0], self.targets.elevation_t_deg[1]),
            ),
            target_box_r: AngleBoxDeg::new(
                (self.targets.azimuth_r_deg[0], self.targets.azimuth_r_deg[1]),
                (self.targets.elevation_r_deg[0], self.targets.elevation_r_deg[1]),
            ),
            target_doppler_hz: (self.targets.doppler_hz[0], self.targets.doppler_hz[1]),
            clutter_count_t: self.clutter.count_t,
            clutter_count_r: self.clutter.count_r,
            clutter_box_t: AngleBoxDeg::new(
                (self.clutter.azimuth_t_deg[0], self.clutter.azimuth_t_deg[1]),
                (self.clutter.elevation_t_deg[0], self.clutter.elevation_t_deg[1]),
            ),
            clutter_box_r: AngleBoxDeg::new(
                (self.clutter.azimuth_r_deg[0], self.clutter.azimuth_r_deg[1]),
                (self.clutter.elevation_r_deg[0], self.clutter.elevation_r_deg[1]),
            ),
            clutter_doppler_hz: (self.clutter.doppler_hz[0], self.clutter.doppler_hz[1]),
            cnr_db: self.clutter.cnr_db,
            snr_db: self.sweep.snr_db.clone(),
            noise_variance: self.detection.noise_variance,
            false_alarms_per_cpi: self.detection.false_alarms_per_cpi,
            calibration_trials: self.detection.calibration_trials,
            trials: self.sweep.trials,
            seed: self.sweep.seed,
            doppler_oversampling: self.scan.doppler_oversampling,
            doppler_span_hz: self.scan.doppler_span_hz.map(|s| (s[0], s[1])),
            threads: 0,
            frozen_scene: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Flag overrides; flags win over file values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub policy: Option<String>,
    pub pulses: Option<usize>,
    pub trials: Option<usize>,
}

impl RunConfig {
    pub fn apply_overrides(&mut self, ov: &Overrides) -> anyhow::Result<()> {
        if let Some(seed) = ov.seed {
            self.sweep.seed = seed;
        }
        if let Some(policy) = &ov.policy {
            let kind = PolicyKind::from_str(policy)?;
            self.scan.policies = vec![kind];
        }
        if let Some(pulses) = ov.pulses {
            self.scan.pulses = vec![pulses];
        }
        if let Some(trials) = ov.trials {
            self.sweep.trials = trials;
        }
        Ok(())
    }
}

fn default_oversampling() -> usize {
    8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_all_defaults() {
        let cfg = RunConfig::from_toml("[scan]\npolicies = [\"simultaneous\"]\npulses = [16]\n")
            .unwrap();
        let exp = cfg.to_experiment().unwrap();
        assert_eq!(exp.carrier_hz, 28.0e9);
        assert_eq!(exp.pri, 0.5e-3);
        assert_eq!(exp.ris_shape, (16, 8));
        assert_eq!(exp.rx_shape, (16, 8));
        assert_eq!(exp.pulse_counts, vec![16]);
        assert_eq!(exp.policies, vec![PolicyKind::Simultaneous]);
        assert_eq!(exp.cnr_db, 20.0);
        assert_eq!(exp.false_alarms_per_cpi, 1e-2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml(
            "[scan]\npolicies = [\"simultaneous\"]\npulses = [16]\nwarp_factor = 9\n",
        );
        assert!(err.is_err());
    }

    #[test]
    fn odd_pulse_count_is_rejected_with_the_rule() {
        let cfg =
            RunConfig::from_toml("[scan]\npolicies = [\"simultaneous\"]\npulses = [7]\n").unwrap();
        let err = cfg.to_experiment().unwrap_err().to_string();
        assert!(err.contains("even"), "{err}");
    }

    #[test]
    fn out_of_half_space_box_is_rejected_with_the_rule() {
        let cfg = RunConfig::from_toml(
            "[scan]\npolicies = [\"simultaneous\"]\npulses = [16]\n[targets]\nazimuth_t_deg = [10.0, 20.0]\n",
        )
        .unwrap();
        let err = cfg.to_experiment().unwrap_err().to_string();
        assert!(err.contains("half-space"), "{err}");
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = RunConfig::builtin();
        let text = cfg.to_toml().unwrap();
        let again = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, again);

        let sparse = RunConfig::from_toml(
            "[scan]\npolicies = [\"sequential\"]\npulses = [8]\n[sweep]\nseed = 99\n",
        )
        .unwrap();
        let again = RunConfig::from_toml(&sparse.to_toml().unwrap()).unwrap();
        assert_eq!(sparse, again);
    }

    #[test]
    fn overrides_win_over_file_values() {
        let mut cfg = RunConfig::builtin();
        cfg.apply_overrides(&Overrides {
            seed: Some(42),
            policy: Some("sequential".into()),
            pulses: Some(8),
            trials: Some(10),
        })
        .unwrap();
        assert_eq!(cfg.sweep.seed, 42);
        assert_eq!(cfg.scan.policies, vec![PolicyKind::Sequential]);
        assert_eq!(cfg.scan.pulses, vec![8]);
        assert_eq!(cfg.sweep.trials, 10);
    }
}
