//! Scene description and slow-time observation synthesis.
//!
//! A scene holds at most one prospective target per inspected cell plus the
//! clutter discretes of each half-space and the thermal noise floor. Random
//! amplitudes follow a Swerling I fluctuation: one circularly-symmetric
//! Gaussian draw per coherent processing interval, constant across pulses.

use num_complex::Complex64;
use rand::Rng;

use crate::array::{Direction, HalfSpace};
use crate::error::{RadarError, Result};
use crate::linalg::{axpy, complex_normal, norm_sqr};
use crate::ris::{FeederChannel, StarRisProfile};
use crate::steering::SteeringTemplate;
use crate::system::RadarSystem;

/// Scatterer amplitude model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    /// Swerling I: drawn once per CPI from a circularly-symmetric Gaussian
    /// with this variance.
    Swerling { variance: f64 },
    /// Fixed complex amplitude, for deterministic tests.
    Fixed(Complex64),
}

impl Amplitude {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match *self {
            Amplitude::Swerling { variance } => complex_normal(rng, variance),
            Amplitude::Fixed(a) => a,
        }
    }

    /// Expected power `E[|amplitude|^2]`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            Amplitude::Swerling { variance } => variance,
            Amplitude::Fixed(a) => a.norm_sqr(),
        }
    }
}

/// A point scatterer: a prospective target or one clutter discrete.
#[derive(Debug, Clone)]
pub struct PointScatterer {
    pub direction: Direction,
    pub doppler_hz: f64,
    pub amplitude: Amplitude,
}

impl PointScatterer {
    pub fn swerling(direction: Direction, doppler_hz: f64, variance: f64) -> Result<Self> {
        if variance < 0.0 {
            return Err(RadarError::InvalidConfiguration(
                "amplitude variance must be nonnegative".into(),
            ));
        }
        Ok(Self { direction, doppler_hz, amplitude: Amplitude::Swerling { variance } })
    }

    pub fn fixed(direction: Direction, doppler_hz: f64, amplitude: Complex64) -> Self {
        Self { direction, doppler_hz, amplitude: Amplitude::Fixed(amplitude) }
    }
}

/// One inspected range-cell pair: optional target per half-space cell,
/// clutter discretes, and the noise floor.
#[derive(Debug, Clone)]
pub struct Scene {
    pub target_t: Option<PointScatterer>,
    pub target_r: Option<PointScatterer>,
    pub clutter_t: Vec<PointScatterer>,
    pub clutter_r: Vec<PointScatterer>,
    pub noise_variance: f64,
}

impl Scene {
    pub fn new(
        target_t: Option<PointScatterer>,
        target_r: Option<PointScatterer>,
        clutter_t: Vec<PointScatterer>,
        clutter_r: Vec<PointScatterer>,
        noise_variance: f64,
    ) -> Result<Self> {
        if noise_variance <= 0.0 {
            return Err(RadarError::InvalidConfiguration("noise variance must be positive".into()));
        }
        let check = |s: &PointScatterer, half: HalfSpace, what: &str| -> Result<()> {
            if s.direction.half_space() != half {
                return Err(RadarError::InvalidConfiguration(format!(
                    "{what} direction lies outside the {half} half-space"
                )));
            }
            Ok(())
        };
        if let Some(t) = &target_t {
            check(t, HalfSpace::Transmissive, "transmissive target")?;
        }
        if let Some(t) = &target_r {
            check(t, HalfSpace::Reflective, "reflective target")?;
        }
        for c in &clutter_t {
            check(c, HalfSpace::Transmissive, "transmissive clutter")?;
        }
        for c in &clutter_r {
            check(c, HalfSpace::Reflective, "reflective clutter")?;
        }
        Ok(Self { target_t, target_r, clutter_t, clutter_r, noise_variance })
    }

    /// Noise-only scene.
    pub fn empty(noise_variance: f64) -> Result<Self> {
        Self::new(None, None, Vec::new(), Vec::new(), noise_variance)
    }
}

/// Invert the per-pulse signal-to-noise definition
/// `snr = variance * ||h||^2 / (pulses * noise_variance)` for the amplitude
/// variance that realizes a requested per-pulse ratio.
pub fn calibrate_amplitude_variance(
    snr_per_pulse: f64,
    steering: &[Complex64],
    noise_variance: f64,
    pulses: usize,
) -> Result<f64> {
    calibrate_amplitude_variance_from_norm(snr_per_pulse, norm_sqr(steering), noise_variance, pulses)
}

/// Same as [`calibrate_amplitude_variance`] from a precomputed `||h||^2`.
pub fn calibrate_amplitude_variance_from_norm(
    snr_per_pulse: f64,
    steering_norm_sqr: f64,
    noise_variance: f64,
    pulses: usize,
) -> Result<f64> {
    if snr_per_pulse < 0.0 {
        return Err(RadarError::InvalidConfiguration("per-pulse SNR must be nonnegative".into()));
    }
    if steering_norm_sqr <= 0.0 {
        return Err(RadarError::DegenerateCell(
            "cannot calibrate an amplitude against a zero-norm steering vector".into(),
        ));
    }
    Ok(snr_per_pulse * pulses as f64 * noise_variance / steering_norm_sqr)
}

/// Synthesize one slow-time observation: the superposition of every present
/// scatterer's space-time response plus white noise.
///
/// Draw order is fixed (transmissive target, reflective target, transmissive
/// clutter in order, reflective clutter in order, then noise) so a seeded
/// generator reproduces the observation bit for bit.
pub fn synthesize_observation<R: Rng + ?Sized>(
    scene: &Scene,
    profile: &StarRisProfile,
    system: &RadarSystem,
    feeder: &FeederChannel,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let dim = profile.pulses() * system.rx.len();
    let mut y = vec![Complex64::new(0.0, 0.0); dim];
    let max_doppler = system.max_doppler_hz();

    let add = |s: &PointScatterer, rng: &mut R, y: &mut [Complex64]| -> Result<()> {
        if s.doppler_hz.abs() >= max_doppler {
            return Err(RadarError::InvalidConfiguration(format!(
                "scatterer Doppler {} Hz is outside the unambiguous interval (+-{max_doppler} Hz)",
                s.doppler_hz
            )));
        }
        let template = SteeringTemplate::for_cell(system, feeder, profile, s.direction)?;
        let amp = s.amplitude.draw(rng);
        if amp.norm_sqr() > 0.0 {
            axpy(y, amp, &template.materialize(s.doppler_hz));
        }
        Ok(())
    };

    if let Some(t) = &scene.target_t {
        add(t, rng, &mut y)?;
    }
    if let Some(t) = &scene.target_r {
        add(t, rng, &mut y)?;
    }
    for c in &scene.clutter_t {
        add(c, rng, &mut y)?;
    }
    for c in &scene.clutter_r {
        add(c, rng, &mut y)?;
    }
    if scene.noise_variance > 0.0 {
        for yi in &mut y {
            *yi += complex_normal(rng, scene.noise_variance);
        }
    }
    Ok(y)
}
