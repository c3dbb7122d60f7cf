//! Threshold calibration and Monte Carlo detection experiments.
//!
//! Trials are embarrassingly parallel and fully reproducible: every trial
//! derives its own counter-based random stream from the master seed, so the
//! results are independent of the worker count and of scheduling. Scene
//! parameters (cell directions, clutter discretes, feeder channel) are
//! redrawn on every trial and the detector bank is rebuilt for the drawn
//! scene; the low-rank whitening path keeps that affordable. A frozen-scene
//! mode reuses one drawn scene across trials for profiling.

use std::sync::Arc;


use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::array::{ura_positions, Direction};
use crate::covariance::build_covariance;
use crate::detector::{
    decide_from_maxima, doppler_to_velocity, Decision, DetectorBank, DopplerGrid, Hypothesis,
    StatisticMaxima,
};
use crate::error::{RadarError, Result};
use crate::linalg::complex_normal;
use crate::ris::{
    make_codes, stack_profile, synthesize_profiles, FeederChannel, PolicyKind, ScanningPolicy,
    StarRisProfile,
};
use crate::scene::{
    calibrate_amplitude_variance_from_norm, PointScatterer, Scene,
};
use crate::steering::SteeringTemplate;
use crate::system::RadarSystem;

/// Angular box (degrees) from which directions are drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleBoxDeg {
    pub azimuth: (f64, f64),
    pub elevation: (f64, f64),
}

impl AngleBoxDeg {
    pub fn new(azimuth: (f64, f64), elevation: (f64, f64)) -> Self {
        Self { azimuth, elevation }
    }
}

/// Full experiment description. Angles are in degrees and ratios in dB;
/// everything is converted at the point of use.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub carrier_hz: f64,
    /// Pulse repetition interval in seconds.
    pub pri: f64,
    /// Surface array shape (elements along y, along z).
    pub ris_shape: (usize, usize),
    /// Receive array shape (elements along y, along z).
    pub rx_shape: (usize, usize),
    /// Element spacing as a fraction of the carrier wavelength.
    pub spacing_wavelengths: f64,
    pub policies: Vec<PolicyKind>,
    pub pulse_counts: Vec<usize>,
    pub target_box_t: AngleBoxDeg,
    pub target_box_r: AngleBoxDeg,
    /// Target Doppler draw range in Hz.
    pub target_doppler_hz: (f64, f64),
    pub clutter_count_t: usize,
    pub clutter_count_r: usize,
    pub clutter_box_t: AngleBoxDeg,
    pub clutter_box_r: AngleBoxDeg,
    pub clutter_doppler_hz: (f64, f64),
    /// Per-pulse clutter-to-noise ratio in dB, applied to every discrete.
    pub cnr_db: f64,
    /// Per-pulse target SNR sweep in dB.
    pub snr_db: Vec<f64>,
    pub noise_variance: f64,
    /// Calibration target: expected declared targets per CPI with no target
    /// present.
    pub false_alarms_per_cpi: f64,
    pub calibration_trials: usize,
    /// Monte Carlo trials per sweep point.
    pub trials: usize,
    pub seed: u64,
    /// Doppler grid refinement relative to the resolution `1/(pulses*pri)`.
    pub doppler_oversampling: usize,
    /// Optional Doppler search span (Hz); the full unambiguous interval when
    /// absent.
    pub doppler_span_hz: Option<(f64, f64)>,
    /// Worker threads for trial execution; 0 uses the global default.
    pub threads: usize,
    /// Reuse one drawn scene for all trials of a sweep point (profiling aid).
    pub frozen_scene: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 28.0e9,
            pri: 0.5e-3,
            ris_shape: (16, 8),
            rx_shape: (16, 8),
            spacing_wavelengths: 0.5,
            policies: vec![PolicyKind::Simultaneous, PolicyKind::Sequential],
            pulse_counts: vec![8, 16],
            target_box_t: AngleBoxDeg::new((155.0, 160.0), (20.0, 25.0)),
            target_box_r: AngleBoxDeg::new((20.0, 25.0), (20.0, 25.0)),
            target_doppler_hz: (500.0, 1000.0),
            clutter_count_t: 10,
            clutter_count_r: 10,
            clutter_box_t: AngleBoxDeg::new((200.0, 220.0), (-40.0, -20.0)),
            clutter_box_r: AngleBoxDeg::new((-40.0, -20.0), (-40.0, -20.0)),
            clutter_doppler_hz: (-125.0, 125.0),
            cnr_db: 20.0,
            snr_db: vec![-5.0, -2.0, 1.0, 4.0, 7.0, 10.0, 13.0, 16.0],
            noise_variance: 1.0,
            false_alarms_per_cpi: 1e-2,
            calibration_trials: 10_000,
            trials: 2000,
            seed: 7,
            doppler_oversampling: 8,
            doppler_span_hz: None,
            threads: 0,
            frozen_scene: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(RadarError::InvalidConfiguration(msg));
        if self.policies.is_empty() {
            return fail("policies: at least one scanning policy is required".into());
        }
        if self.pulse_counts.is_empty() {
            return fail("pulses: at least one pulse count is required".into());
        }
        for &p in &self.pulse_counts {
            ScanningPolicy::new(PolicyKind::Simultaneous, p).map_err(|_| {
                RadarError::InvalidConfiguration(format!(
                    "pulses: {p} is not an even count of at least 2"
                ))
            })?;
        }
        if self.snr_db.is_empty() {
            return fail("snr_db: the sweep needs at least one point".into());
        }
        if self.trials == 0 {
            return fail("trials: at least one trial per point is required".into());
        }
        if !(self.false_alarms_per_cpi > 0.0 && self.false_alarms_per_cpi < 1.0) {
            return fail(format!(
                "false_alarms_per_cpi: {} is outside (0, 1)",
                self.false_alarms_per_cpi
            ));
        }
        if self.noise_variance <= 0.0 {
            return fail("noise_variance: must be positive".into());
        }
        if self.doppler_oversampling == 0 {
            return fail("doppler_oversampling: must be at least 1".into());
        }
        if self.spacing_wavelengths <= 0.0 {
            return fail("spacing_wavelengths: must be positive".into());
        }
        let check_box = |name: &str, b: &AngleBoxDeg, transmissive: bool| -> Result<()> {
            let (lo, hi) = b.azimuth;
            let (elo, ehi) = b.elevation;
            if lo >= hi || elo >= ehi {
                return fail(format!("{name}: box bounds must be strictly increasing"));
            }
            if elo <= -90.0 || ehi >= 90.0 {
                return fail(format!("{name}: elevation box must stay inside (-90, 90) degrees"));
            }
            let range = if transmissive { (90.0, 270.0) } else { (-90.0, 90.0) };
            if lo <= range.0 || hi >= range.1 {
                return fail(format!(
                    "{name}: azimuth box ({lo}, {hi}) must stay inside the {} half-space azimuth range ({}, {}) degrees",
                    if transmissive { "transmissive" } else { "reflective" },
                    range.0,
                    range.1
                ));
            }
            Ok(())
        };
        check_box("targets.transmissive", &self.target_box_t, true)?;
        check_box("targets.reflective", &self.target_box_r, false)?;
        check_box("clutter.transmissive", &self.clutter_box_t, true)?;
        check_box("clutter.reflective", &self.clutter_box_r, false)?;
        let max_doppler = 1.0 / (2.0 * self.pri);
        for (name, (lo, hi)) in [
            ("target_doppler_hz", self.target_doppler_hz),
            ("clutter_doppler_hz", self.clutter_doppler_hz),
        ] {
            if lo >= hi {
                return fail(format!("{name}: range must be strictly increasing"));
            }
            if lo <= -max_doppler || hi > max_doppler {
                return fail(format!(
                    "{name}: range ({lo}, {hi}) exceeds the unambiguous interval (+-{max_doppler} Hz)"
                ));
            }
        }
        if let Some((lo, hi)) = self.doppler_span_hz {
            if lo >= hi || lo <= -max_doppler || hi >= max_doppler {
                return fail(format!(
                    "doppler_span_hz: ({lo}, {hi}) must be increasing and inside (+-{max_doppler} Hz)"
                ));
            }
        }
        Ok(())
    }

    fn system(&self) -> Result<RadarSystem> {
        let wavelength = crate::system::SPEED_OF_LIGHT / self.carrier_hz;
        let spacing = self.spacing_wavelengths * wavelength;
        let ris = ura_positions(self.ris_shape.0, self.ris_shape.1, spacing, spacing)?;
        let rx = ura_positions(self.rx_shape.0, self.rx_shape.1, spacing, spacing)?;
        RadarSystem::new(self.carrier_hz, self.pri, ris, rx)
    }

    fn grid(&self, pulses: usize) -> Result<DopplerGrid> {
        let step = 1.0 / (self.doppler_oversampling as f64 * pulses as f64 * self.pri);
        match self.doppler_span_hz {
            Some((lo, hi)) => DopplerGrid::with_span(lo, hi, step, self.pri),
            None => DopplerGrid::unambiguous(self.pri, pulses, self.doppler_oversampling),
        }
    }
}

// ── deterministic stream layout ─────────────────────────────────────────

/// Purpose tag of a random stream; keeps calibration, sweep, validation, and
/// frozen-scene draws on disjoint streams of the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamClass {
    Calibration,
    Sweep,
    Validation,
    FrozenScene,
}

/// Counter-based generator for one trial: all trials share the keyed master
/// seed and differ only in the stream id, so any subset can be generated
/// independently and in any order.
pub fn trial_rng(
    seed: u64,
    class: StreamClass,
    policy: PolicyKind,
    pulses: usize,
    point: u32,
    trial: u32,
) -> ChaCha8Rng {
    let class_bits = match class {
        StreamClass::Calibration => 0u64,
        StreamClass::Sweep => 1,
        StreamClass::Validation => 2,
        StreamClass::FrozenScene => 3,
    };
    let policy_bits = match policy {
        PolicyKind::Simultaneous => 0u64,
        PolicyKind::Sequential => 1,
    };
    let stream = (class_bits << 62)
        | (policy_bits << 61)
        | (((pulses as u64) & 0x7FF) << 50)
        | (((point as u64) & 0x3FFFF) << 32)
        | trial as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// ── per-point context and single trials ─────────────────────────────────

#[derive(Debug, Clone)]
struct BoxRad {
    azimuth: (f64, f64),
    elevation: (f64, f64),
}

impl BoxRad {
    fn from_deg(b: &AngleBoxDeg) -> Self {
        Self {
            azimuth: (b.azimuth.0.to_radians(), b.azimuth.1.to_radians()),
            elevation: (b.elevation.0.to_radians(), b.elevation.1.to_radians()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Direction {
        let az = rng.random_range(self.azimuth.0..self.azimuth.1);
        let el = rng.random_range(self.elevation.0..self.elevation.1);
        Direction::new(az, el).expect("validated box produces valid directions")
    }
}

/// Scene layout shared by every trial of a point in frozen-scene mode.
#[derive(Debug)]
struct FrozenScene {
    feeder: FeederChannel,
    profile: StarRisProfile,
    dir_t: Direction,
    dir_r: Direction,
    clutter_t: Vec<PointScatterer>,
    clutter_r: Vec<PointScatterer>,
    norm_t: f64,
    norm_r: f64,
    bank: DetectorBank,
}

/// Everything needed to run trials of one sweep point: the resolved system,
/// policy, grid, penalty, and ratios.
#[derive(Debug, Clone)]
pub struct TrialContext {
    system: RadarSystem,
    policy: ScanningPolicy,
    grid: DopplerGrid,
    eta: f64,
    snr_linear: f64,
    cnr_linear: f64,
    noise_variance: f64,
    target_box_t: BoxRad,
    target_box_r: BoxRad,
    target_doppler: (f64, f64),
    clutter_count_t: usize,
    clutter_count_r: usize,
    clutter_box_t: BoxRad,
    clutter_box_r: BoxRad,
    clutter_doppler: (f64, f64),
    frozen: Option<Arc<FrozenScene>>,
}

impl TrialContext {
    /// Resolve a sweep point. `eta` is the calibrated penalty (use 0 while
    /// collecting calibration statistics).
    pub fn prepare(
        cfg: &ExperimentConfig,
        policy: PolicyKind,
        pulses: usize,
        snr_db: f64,
        eta: f64,
    ) -> Result<Self> {
        let system = cfg.system()?;
        let grid = cfg.grid(pulses)?;
        let mut ctx = Self {
            system,
            policy: ScanningPolicy::new(policy, pulses)?,
            grid,
            eta,
            snr_linear: 10f64.powf(snr_db / 10.0),
            cnr_linear: 10f64.powf(cfg.cnr_db / 10.0),
            noise_variance: cfg.noise_variance,
            target_box_t: BoxRad::from_deg(&cfg.target_box_t),
            target_box_r: BoxRad::from_deg(&cfg.target_box_r),
            target_doppler: cfg.target_doppler_hz,
            clutter_count_t: cfg.clutter_count_t,
            clutter_count_r: cfg.clutter_count_r,
            clutter_box_t: BoxRad::from_deg(&cfg.clutter_box_t),
            clutter_box_r: BoxRad::from_deg(&cfg.clutter_box_r),
            clutter_doppler: cfg.clutter_doppler_hz,
            frozen: None,
        };
        if cfg.frozen_scene {
            let mut rng = trial_rng(cfg.seed, StreamClass::FrozenScene, policy, pulses, 0, 0);
            let layout = ctx.draw_layout(&mut rng)?;
            let bank = ctx.build_bank(&layout)?;
            ctx.frozen = Some(Arc::new(FrozenScene {
                feeder: layout.feeder,
                profile: layout.profile,
                dir_t: layout.dir_t,
                dir_r: layout.dir_r,
                clutter_t: layout.clutter_t,
                clutter_r: layout.clutter_r,
                norm_t: layout.norm_t,
                norm_r: layout.norm_r,
                bank,
            }));
        }
        Ok(ctx)
    }

    pub fn grid(&self) -> &DopplerGrid {
        &self.grid
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn policy(&self) -> ScanningPolicy {
        self.policy
    }

    fn draw_layout(&self, rng: &mut ChaCha8Rng) -> Result<SceneLayout> {
        let dir_t = self.target_box_t.draw(rng);
        let dir_r = self.target_box_r.draw(rng);
        let mut clutter_t = Vec::with_capacity(self.clutter_count_t);
        for _ in 0..self.clutter_count_t {
            let dir = self.clutter_box_t.draw(rng);
            let nu = rng.random_range(self.clutter_doppler.0..self.clutter_doppler.1);
            clutter_t.push((dir, nu));
        }
        let mut clutter_r = Vec::with_capacity(self.clutter_count_r);
        for _ in 0..self.clutter_count_r {
            let dir = self.clutter_box_r.draw(rng);
            let nu = rng.random_range(self.clutter_doppler.0..self.clutter_doppler.1);
            clutter_r.push((dir, nu));
        }
        let feeder = FeederChannel::random(self.system.ris.len(), rng);
        let (xbar_t, xbar_r) =
            synthesize_profiles(&feeder, dir_t, dir_r, &self.system.ris, self.system.wavelength)?;
        let profile = stack_profile(xbar_t, xbar_r, make_codes(self.policy))?;
        let pulses = self.policy.pulses() as f64;

        let norm_t =
            SteeringTemplate::for_cell(&self.system, &feeder, &profile, dir_t)?.norm_sqr();
        let norm_r =
            SteeringTemplate::for_cell(&self.system, &feeder, &profile, dir_r)?.norm_sqr();
        let clutter_scatterers = |list: &[(Direction, f64)]| -> Result<Vec<PointScatterer>> {
            list.iter()
                .map(|&(dir, nu)| {
                    let norm =
                        SteeringTemplate::for_cell(&self.system, &feeder, &profile, dir)?
                            .norm_sqr();
                    let variance = calibrate_amplitude_variance_from_norm(
                        self.cnr_linear,
                        norm,
                        self.noise_variance,
                        pulses as usize,
                    )?;
                    PointScatterer::swerling(dir, nu, variance)
                })
                .collect()
        };
        let clutter_t = clutter_scatterers(&clutter_t)?;
        let clutter_r = clutter_scatterers(&clutter_r)?;
        Ok(SceneLayout { feeder, profile, dir_t, dir_r, clutter_t, clutter_r, norm_t, norm_r })
    }

    fn build_bank(&self, layout: &SceneLayout) -> Result<DetectorBank> {
        let scene = Scene::new(
            None,
            None,
            layout.clutter_t.clone(),
            layout.clutter_r.clone(),
            self.noise_variance,
        )?;
        let disturbance = build_covariance(&scene, &layout.profile, &self.system, &layout.feeder)?;
        DetectorBank::build(
            &self.system,
            &layout.feeder,
            &layout.profile,
            disturbance,
            layout.dir_t,
            layout.dir_r,
            self.grid.clone(),
            self.eta,
        )
    }
}

struct SceneLayout {
    feeder: FeederChannel,
    profile: StarRisProfile,
    dir_t: Direction,
    dir_r: Direction,
    clutter_t: Vec<PointScatterer>,
    clutter_r: Vec<PointScatterer>,
    norm_t: f64,
    norm_r: f64,
}

/// Outcome of a single Monte Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub truth: Hypothesis,
    pub decided: Hypothesis,
    pub true_doppler_t: Option<f64>,
    pub true_doppler_r: Option<f64>,
    pub est_doppler_t: Option<f64>,
    pub est_doppler_r: Option<f64>,
    pub max_single_t: f64,
    pub max_single_r: f64,
    pub max_pair: f64,
}

/// Run one trial under the given true hypothesis.
pub fn run_trial(
    ctx: &TrialContext,
    scenario: Hypothesis,
    rng: &mut ChaCha8Rng,
) -> Result<TrialRecord> {
    run_trial_detailed(ctx, scenario, rng).map(|(record, _)| record)
}

/// Like [`run_trial`] but also returning the full decision for inspection.
pub fn run_trial_detailed(
    ctx: &TrialContext,
    scenario: Hypothesis,
    rng: &mut ChaCha8Rng,
) -> Result<(TrialRecord, Decision)> {
    // Fixed draw order regardless of the scenario so common random numbers
    // are shared across hypotheses: target dopplers, scene layout (redraw
    // mode only), then target amplitudes; clutter amplitudes and noise are
    // consumed inside the observation synthesis.
    let nu_t = rng.random_range(ctx.target_doppler.0..ctx.target_doppler.1);
    let nu_r = rng.random_range(ctx.target_doppler.0..ctx.target_doppler.1);

    enum Parts<'a> {
        Frozen(&'a FrozenScene),
        Fresh(Box<(SceneLayout, DetectorBank)>),
    }
    let parts = match &ctx.frozen {
        Some(frozen) => Parts::Frozen(frozen),
        None => {
            let layout = ctx.draw_layout(rng)?;
            let bank = ctx.build_bank(&layout)?;
            Parts::Fresh(Box::new((layout, bank)))
        }
    };
    let (feeder, profile, dir_t, dir_r, clutter_t, clutter_r, norm_t, norm_r, bank) = match &parts
    {
        Parts::Frozen(f) => (
            &f.feeder,
            &f.profile,
            f.dir_t,
            f.dir_r,
            &f.clutter_t,
            &f.clutter_r,
            f.norm_t,
            f.norm_r,
            &f.bank,
        ),
        Parts::Fresh(b) => (
            &b.0.feeder,
            &b.0.profile,
            b.0.dir_t,
            b.0.dir_r,
            &b.0.clutter_t,
            &b.0.clutter_r,
            b.0.norm_t,
            b.0.norm_r,
            &b.1,
        ),
    };

    let pulses = ctx.policy.pulses();
    let variance_t = calibrate_amplitude_variance_from_norm(
        ctx.snr_linear,
        norm_t,
        ctx.noise_variance,
        pulses,
    )?;
    let variance_r = calibrate_amplitude_variance_from_norm(
        ctx.snr_linear,
        norm_r,
        ctx.noise_variance,
        pulses,
    )?;
    // Swerling draw, one per CPI; drawn unconditionally to keep the stream
    // layout scenario independent.
    let amp_t = complex_normal(rng, variance_t);
    let amp_r = complex_normal(rng, variance_r);

    let with_t = matches!(scenario, Hypothesis::H1T | Hypothesis::H2);
    let with_r = matches!(scenario, Hypothesis::H1R | Hypothesis::H2);
    let scene = Scene::new(
        with_t.then(|| PointScatterer::fixed(dir_t, nu_t, amp_t)),
        with_r.then(|| PointScatterer::fixed(dir_r, nu_r, amp_r)),
        clutter_t.clone(),
        clutter_r.clone(),
        ctx.noise_variance,
    )?;
    let y = crate::scene::synthesize_observation(&scene, profile, &ctx.system, feeder, rng)?;
    let evaluation = bank.evaluate(&y);
    let record = TrialRecord {
        truth: scenario,
        decided: evaluation.decision.hypothesis,
        true_doppler_t: with_t.then_some(nu_t),
        true_doppler_r: with_r.then_some(nu_r),
        est_doppler_t: evaluation.decision.doppler_t,
        est_doppler_r: evaluation.decision.doppler_r,
        max_single_t: evaluation.maxima.single_t,
        max_single_r: evaluation.maxima.single_r,
        max_pair: evaluation.maxima.pair,
    };
    Ok((record, evaluation.decision))
}

// ── threshold calibration ───────────────────────────────────────────────

/// Calibrated penalty with its achieved rate and the per-trial maxima the
/// calibration was computed from (kept for audit dumps).
#[derive(Debug, Clone)]
pub struct Calibration {
    pub eta: f64,
    pub achieved_far: f64,
    pub trials: usize,
    pub maxima: Vec<StatisticMaxima>,
}

/// Expected declared targets per CPI on a cached sample at a given penalty.
pub fn false_alarm_rate_from_maxima(maxima: &[StatisticMaxima], eta: f64) -> f64 {
    let declared: usize =
        maxima.iter().map(|m| decide_from_maxima(m, eta).0.declared_targets()).sum();
    declared as f64 / maxima.len() as f64
}

/// Calibrate the penalty of one (policy, pulse count) pair to the configured
/// false-alarm budget by simulating no-target trials and bisecting on the
/// cached statistic maxima. The declared count per CPI is non-increasing in
/// the penalty, so bisection converges; the achieved rate must land within
/// 10% of the target or the sample is deemed too small.
pub fn calibrate_threshold(
    cfg: &ExperimentConfig,
    policy: PolicyKind,
    pulses: usize,
) -> Result<Calibration> {
    let target = cfg.false_alarms_per_cpi;
    let trials = cfg.calibration_trials;
    if (trials as f64) < 10.0 / target {
        return Err(RadarError::InsufficientTrials(format!(
            "{trials} no-target trials cannot resolve a rate of {target}; at least {} are needed",
            (10.0 / target).ceil()
        )));
    }
    let ctx = TrialContext::prepare(cfg, policy, pulses, 0.0, 0.0)?;
    let maxima = (0..trials as u32)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, StreamClass::Calibration, policy, pulses, 0, trial);
            run_trial(&ctx, Hypothesis::H0, &mut rng).map(|r| StatisticMaxima {
                single_t: r.max_single_t,
                single_r: r.max_single_r,
                pair: r.max_pair,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rate = |eta: f64| false_alarm_rate_from_maxima(&maxima, eta);
    let mut lo = 0.0;
    let mut hi = maxima
        .iter()
        .map(|m| m.single_t.max(m.single_r).max(m.pair / 2.0))
        .fold(0.0f64, f64::max)
        + 1.0;
    if rate(lo) < target {
        return Err(RadarError::InsufficientTrials(format!(
            "target rate {target} exceeds the achievable maximum {} on this sample",
            rate(lo)
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rate_lo, rate_hi) = (rate(lo), rate(hi));
    let (eta, achieved) = if (rate_hi - target).abs() <= (rate_lo - target).abs() {
        (hi, rate_hi)
    } else {
        (lo, rate_lo)
    };
    if (achieved - target).abs() > 0.1 * target {
        return Err(RadarError::InsufficientTrials(format!(
            "achieved false-alarm rate {achieved} is outside 10% of the target {target}; \
             adjacent achievable rates are {rate_hi} and {rate_lo}"
        )));
    }
    Ok(Calibration { eta, achieved_far: achieved, trials, maxima })
}

/// Measure the false-alarm rate of a fixed penalty on fresh no-target
/// trials (independent streams from the calibration sample).
pub fn measure_false_alarm_rate(
    cfg: &ExperimentConfig,
    policy: PolicyKind,
    pulses: usize,
    eta: f64,
    trials: usize,
) -> Result<f64> {
    let ctx = TrialContext::prepare(cfg, policy, pulses, 0.0, eta)?;
    let declared: usize = (0..trials as u32)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, StreamClass::Validation, policy, pulses, 0, trial);
            run_trial(&ctx, Hypothesis::H0, &mut rng).map(|r| r.decided.declared_targets())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(declared as f64 / trials as f64)
}

// ── sweeps ──────────────────────────────────────────────────────────────

/// Aggregated result of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: PolicyKind,
    pub pulses: usize,
    pub snr_db: f64,
    /// Probability of declaring both targets when both are present.
    pub pd: f64,
    /// Wilson 95% half-width of `pd`.
    pub pd_half_width: f64,
    /// Radial-velocity RMSE over both cells on trials declared with both
    /// targets; absent when no trial qualified.
    pub rmse_mps: Option<f64>,
    /// Jackknife 95% half-width of the RMSE; absent below two qualifying
    /// trials.
    pub rmse_half_width: Option<f64>,
    pub far_achieved: f64,
    pub trials: usize,
}

/// Calibration summary of one (policy, pulse count) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSummary {
    pub policy: PolicyKind,
    pub pulses: usize,
    pub eta: f64,
    pub achieved_far: f64,
    pub trials: usize,
}

/// Sweep rows plus the per-pair calibrations behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub calibrations: Vec<CalibrationSummary>,
}

/// Run the full detection-probability / velocity-RMSE sweep: calibrate the
/// penalty per (policy, pulse count), then run both-target trials at every
/// SNR point. Deterministic for a fixed seed regardless of `threads`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    if cfg.threads == 0 {
        return run_sweep_inner(cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| RadarError::InvalidConfiguration(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep_inner(cfg))
}

fn run_sweep_inner(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    let mut rows = Vec::new();
    let mut calibrations = Vec::new();
    for &policy in &cfg.policies {
        for &pulses in &cfg.pulse_counts {
            let calibration = calibrate_threshold(cfg, policy, pulses)?;
            calibrations.push(CalibrationSummary {
                policy,
                pulses,
                eta: calibration.eta,
                achieved_far: calibration.achieved_far,
                trials: calibration.trials,
            });
            for (si, &snr_db) in cfg.snr_db.iter().enumerate() {
                let ctx = TrialContext::prepare(cfg, policy, pulses, snr_db, calibration.eta)?;
                let records = (0..cfg.trials as u32)
                    .into_par_iter()
                    .map(|trial| {
                        let mut rng = trial_rng(
                            cfg.seed,
                            StreamClass::Sweep,
                            policy,
                            pulses,
                            si as u32,
                            trial,
                        );
                        run_trial(&ctx, Hypothesis::H2, &mut rng)
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(aggregate_point(
                    policy,
                    pulses,
                    snr_db,
                    cfg.carrier_hz,
                    calibration.achieved_far,
                    &records,
                ));
            }
        }
    }
    Ok(SweepOutcome { rows, calibrations })
}

fn aggregate_point(
    policy: PolicyKind,
    pulses: usize,
    snr_db: f64,
    carrier_hz: f64,
    far_achieved: f64,
    records: &[TrialRecord],
) -> SweepRow {
    let n = records.len();
    let hits = records.iter().filter(|r| r.decided == Hypothesis::H2).count();
    let pd = hits as f64 / n as f64;
    let pd_half_width = wilson_half_width(hits, n);

    // Squared velocity errors per qualifying trial, paired by cell.
    let mut per_trial_sq: Vec<f64> = Vec::with_capacity(hits);
    for r in records.iter().filter(|r| r.decided == Hypothesis::H2 && r.truth == Hypothesis::H2) {
        let et = doppler_to_velocity(r.est_doppler_t.unwrap(), carrier_hz)
            - doppler_to_velocity(r.true_doppler_t.unwrap(), carrier_hz);
        let er = doppler_to_velocity(r.est_doppler_r.unwrap(), carrier_hz)
            - doppler_to_velocity(r.true_doppler_r.unwrap(), carrier_hz);
        per_trial_sq.push(et * et + er * er);
    }
    let m = per_trial_sq.len();
    let (rmse_mps, rmse_half_width) = if m == 0 {
        (None, None)
    } else {
        let total: f64 = per_trial_sq.iter().sum();
        let rmse = (total / (2.0 * m as f64)).sqrt();
        let half_width = (m >= 2).then(|| {
            let leave_one_out: Vec<f64> = per_trial_sq
                .iter()
                .map(|ss| ((total - ss) / (2.0 * (m as f64 - 1.0))).sqrt())
                .collect();
            let mean = leave_one_out.iter().sum::<f64>() / m as f64;
            let var: f64 = leave_one_out.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
            1.96 * ((m as f64 - 1.0) / m as f64 * var).sqrt()
        });
        (Some(rmse), half_width)
    };
    SweepRow {
        policy,
        pulses,
        snr_db,
        pd,
        pd_half_width,
        rmse_mps,
        rmse_half_width,
        far_achieved,
        trials: n,
    }
}

/// Wilson 95% confidence half-width for a binomial proportion.
pub fn wilson_half_width(successes: usize, trials: usize) -> f64 {
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    z * ((p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()) / (1.0 + z2 / n)
}
