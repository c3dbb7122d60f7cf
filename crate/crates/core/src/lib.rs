//! Simulation toolkit for a pulse-Doppler radar built around a
//! simultaneously transmitting and reflecting reconfigurable intelligent
//! surface (STAR-RIS).
//!
//! A feeder illuminates the surface, which redirects energy into the
//! transmissive and reflective half-spaces while superimposing per-half-space
//! slow-time codes; a collocated receive array collects the echoes of both
//! sides in one data stream. The crate covers the full chain at desk scale:
//!
//! - [`array`]: uniform rectangular arrays and far-field steering vectors;
//! - [`ris`]: surface phase-profile synthesis, scanning codes, beampatterns;
//! - [`steering`]: space-time steering vectors, general and factored;
//! - [`scene`]: scatterer models and slow-time observation synthesis;
//! - [`covariance`]: low-rank disturbance models with fast whitened solves;
//! - [`detector`]: penalized multi-hypothesis detection and Doppler
//!   estimation, including the separable form for sequential scanning;
//! - [`experiment`]: false-alarm calibration and reproducible parallel
//!   Monte Carlo sweeps of detection probability and velocity accuracy.

pub mod array;
pub mod covariance;
pub mod detector;
mod error;
pub mod experiment;
mod linalg;
pub mod ris;
pub mod scene;
pub mod steering;
pub mod system;

pub use array::{steering_vector, ura_positions, ArrayGeometry, Direction, HalfSpace, SteeringVector};
pub use covariance::{build_covariance, ClutterColumn, DisturbanceModel};
pub use detector::{
    decide_from_maxima, doppler_resolution_hz, doppler_to_velocity, Decision, DetectorBank,
    DopplerGrid, Evaluation, Hypothesis, Scores, StatisticMaxima,
};
pub use error::{RadarError, Result};
pub use experiment::{
    calibrate_threshold, measure_false_alarm_rate, run_sweep, run_trial, run_trial_detailed,
    trial_rng, AngleBoxDeg, Calibration, CalibrationSummary, ExperimentConfig, StreamClass,
    SweepOutcome, SweepRow, TrialContext, TrialRecord,
};
pub use ris::{
    array_gain_factor, beampattern_grid, make_codes, stack_profile, synthesize_profiles,
    BeampatternGrid, FeederChannel, PolicyKind, ScanningPolicy, SlowTimeCodes, StarRisProfile,
};
pub use scene::{
    calibrate_amplitude_variance, calibrate_amplitude_variance_from_norm, synthesize_observation,
    Amplitude, PointScatterer, Scene,
};
pub use steering::{doppler_vector, space_time_steering, PulseWindow, SteeringTemplate};
pub use system::{RadarSystem, SPEED_OF_LIGHT};
