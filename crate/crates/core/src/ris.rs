//! STAR-RIS spatial phase profiles, slow-time scanning codes, and the
//! resulting beampattern.
//!
//! Each surface atom splits an incident pulse between a transmitted and a
//! reflected wave under a per-atom energy constraint: for every pulse `p` and
//! atom `n`, `|x_t[p][n]|^2 + |x_r[p][n]|^2 = 1`. The profiles used here
//! factor into a spatial phase vector per half-space (unit modulus, steering
//! the beam) and a slow-time code per half-space (splitting energy across the
//! pulse train and making the two half-spaces separable at the receiver).

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::{steering_vector, ArrayGeometry, Direction, HalfSpace};
use crate::error::{RadarError, Result};
use crate::linalg::{cdot, complex_normal};

// ── feeder channel ──────────────────────────────────────────────────────

/// Complex channel between the transmitter and the surface atoms.
#[derive(Debug, Clone)]
pub struct FeederChannel {
    gains: Vec<Complex64>,
}

impl FeederChannel {
    pub fn from_gains(gains: Vec<Complex64>) -> Result<Self> {
        if gains.is_empty() || gains.iter().all(|g| g.norm_sqr() == 0.0) {
            return Err(RadarError::InvalidConfiguration(
                "feeder channel must have at least one nonzero entry".into(),
            ));
        }
        Ok(Self { gains })
    }

    /// I.i.d. circularly-symmetric complex Gaussian entries of unit variance.
    pub fn random<R: Rng + ?Sized>(atoms: usize, rng: &mut R) -> Self {
        let gains = (0..atoms).map(|_| complex_normal(rng, 1.0)).collect();
        Self { gains }
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Sum of entry magnitudes; the aligned-phase array gain factor is the
    /// square of this.
    pub fn abs_sum(&self) -> f64 {
        self.gains.iter().map(|g| g.norm()).sum()
    }
}

// ── scanning policies and slow-time codes ───────────────────────────────

/// The two scanning rules for serving both half-spaces within one coherent
/// processing interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Both half-spaces are illuminated on every pulse; a binary phase code
    /// on the transmissive side separates the echoes (code division).
    Simultaneous,
    /// The first half of the pulse train serves the transmissive side only,
    /// the second half the reflective side (time division).
    Sequential,
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicyKind::Simultaneous => write!(f, "simultaneous"),
            PolicyKind::Sequential => write!(f, "sequential"),
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = RadarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simultaneous" => Ok(PolicyKind::Simultaneous),
            "sequential" => Ok(PolicyKind::Sequential),
            other => Err(RadarError::InvalidConfiguration(format!(
                "unknown scanning policy '{other}' (expected 'simultaneous' or 'sequential')"
            ))),
        }
    }
}

/// A scanning policy bound to a pulse count. Both code constructions assume
/// an even number of pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanningPolicy {
    kind: PolicyKind,
    pulses: usize,
}

impl ScanningPolicy {
    pub fn new(kind: PolicyKind, pulses: usize) -> Result<Self> {
        if pulses < 2 || pulses % 2 != 0 {
            return Err(RadarError::InvalidConfiguration(format!(
                "pulse count {pulses} is invalid; both scanning policies require an even count of at least 2"
            )));
        }
        Ok(Self { kind, pulses })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn pulses(&self) -> usize {
        self.pulses
    }
}

/// Orthogonal slow-time code pair with a per-pulse energy split of one.
#[derive(Debug, Clone)]
pub struct SlowTimeCodes {
    transmissive: Vec<Complex64>,
    reflective: Vec<Complex64>,
    kind: Option<PolicyKind>,
}

impl SlowTimeCodes {
    /// Wrap externally supplied codes, checking the per-pulse energy split
    /// and the orthogonality that makes the half-spaces separable.
    pub fn from_vectors(transmissive: Vec<Complex64>, reflective: Vec<Complex64>) -> Result<Self> {
        if transmissive.len() != reflective.len() || transmissive.is_empty() {
            return Err(RadarError::InvalidConfiguration(
                "slow-time codes must be nonempty and of equal length".into(),
            ));
        }
        for (p, (t, r)) in transmissive.iter().zip(&reflective).enumerate() {
            let split = t.norm_sqr() + r.norm_sqr();
            if (split - 1.0).abs() > 1e-9 {
                return Err(RadarError::EnergyConservation(format!(
                    "per-pulse energy split at pulse {p} is {split}, expected 1"
                )));
            }
        }
        let cross = cdot(&transmissive, &reflective).norm();
        if cross > 1e-9 * transmissive.len() as f64 {
            return Err(RadarError::InvalidConfiguration(format!(
                "slow-time codes are not orthogonal (|c_t^H c_r| = {cross})"
            )));
        }
        Ok(Self { transmissive, reflective, kind: None })
    }

    pub fn transmissive(&self) -> &[Complex64] {
        &self.transmissive
    }

    pub fn reflective(&self) -> &[Complex64] {
        &self.reflective
    }

    pub fn for_half(&self, half: HalfSpace) -> &[Complex64] {
        match half {
            HalfSpace::Transmissive => &self.transmissive,
            HalfSpace::Reflective => &self.reflective,
        }
    }

    pub fn pulses(&self) -> usize {
        self.transmissive.len()
    }

    /// The policy these codes were generated from, when `make_codes` built
    /// them; `None` for externally supplied codes.
    pub fn kind(&self) -> Option<PolicyKind> {
        self.kind
    }
}

/// Build the slow-time code pair for a scanning policy.
///
/// Simultaneous scanning alternates the sign of the transmissive coefficient
/// pulse to pulse while splitting energy evenly; sequential scanning turns
/// each half-space on for half of the pulse train.
pub fn make_codes(policy: ScanningPolicy) -> SlowTimeCodes {
    let pulses = policy.pulses();
    let (transmissive, reflective) = match policy.kind() {
        PolicyKind::Simultaneous => {
            let amp = std::f64::consts::FRAC_1_SQRT_2;
            let t = (1..=pulses)
                .map(|p| Complex64::new(if p % 2 == 1 { -amp } else { amp }, 0.0))
                .collect();
            let r = vec![Complex64::new(amp, 0.0); pulses];
            (t, r)
        }
        PolicyKind::Sequential => {
            let one = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            let t = (0..pulses).map(|p| if p < pulses / 2 { one } else { zero }).collect();
            let r = (0..pulses).map(|p| if p < pulses / 2 { zero } else { one }).collect();
            (t, r)
        }
    };
    SlowTimeCodes { transmissive, reflective, kind: Some(policy.kind()) }
}

// ── spatial profile synthesis ───────────────────────────────────────────

/// Unit-modulus spatial phase vectors maximizing the array gain factor
/// towards one direction per half-space: atom `n` gets phase
/// `-(arg g[n] + arg u[n])` so the redirected contributions add coherently.
///
/// Returns `(xbar_t, xbar_r)`. Zero feeder entries contribute phase 0.
pub fn synthesize_profiles(
    feeder: &FeederChannel,
    dir_t: Direction,
    dir_r: Direction,
    ris_geometry: &ArrayGeometry,
    wavelength: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if dir_t.half_space() != HalfSpace::Transmissive {
        return Err(RadarError::InvalidConfiguration(
            "transmissive steer direction must have azimuth in (pi/2, 3*pi/2)".into(),
        ));
    }
    if dir_r.half_space() != HalfSpace::Reflective {
        return Err(RadarError::InvalidConfiguration(
            "reflective steer direction must have azimuth in (-pi/2, pi/2)".into(),
        ));
    }
    if feeder.len() != ris_geometry.len() {
        return Err(RadarError::InvalidConfiguration(format!(
            "feeder channel has {} entries but the surface has {} atoms",
            feeder.len(),
            ris_geometry.len()
        )));
    }
    let profile_for = |dir: Direction| -> Vec<Complex64> {
        let u = steering_vector(ris_geometry, dir, wavelength);
        feeder
            .gains()
            .iter()
            .zip(&u.entries)
            .map(|(g, u)| Complex64::from_polar(1.0, -(g.arg() + u.arg())))
            .collect()
    };
    Ok((profile_for(dir_t), profile_for(dir_r)))
}

// ── stacked profile ─────────────────────────────────────────────────────

/// Full STAR-RIS response over one coherent processing interval: spatial
/// phase vectors per half-space, the slow-time codes, and the stacked
/// per-pulse responses `x = c (x) xbar` (Kronecker product).
#[derive(Debug, Clone)]
pub struct StarRisProfile {
    xbar_t: Vec<Complex64>,
    xbar_r: Vec<Complex64>,
    codes: SlowTimeCodes,
    stacked_t: Vec<Complex64>,
    stacked_r: Vec<Complex64>,
}

impl StarRisProfile {
    pub fn atoms(&self) -> usize {
        self.xbar_t.len()
    }

    pub fn pulses(&self) -> usize {
        self.codes.pulses()
    }

    pub fn codes(&self) -> &SlowTimeCodes {
        &self.codes
    }

    /// Spatial phase vector for one half-space.
    pub fn spatial(&self, half: HalfSpace) -> &[Complex64] {
        match half {
            HalfSpace::Transmissive => &self.xbar_t,
            HalfSpace::Reflective => &self.xbar_r,
        }
    }

    /// Stacked response of length `pulses * atoms`, pulse-major.
    pub fn stacked(&self, half: HalfSpace) -> &[Complex64] {
        match half {
            HalfSpace::Transmissive => &self.stacked_t,
            HalfSpace::Reflective => &self.stacked_r,
        }
    }

    /// Atom response vector during one pulse for one half-space.
    pub fn pulse_response(&self, half: HalfSpace, pulse: usize) -> &[Complex64] {
        let n = self.atoms();
        &self.stacked(half)[pulse * n..(pulse + 1) * n]
    }
}

/// Stack spatial profiles and slow-time codes into a full response,
/// enforcing unit-modulus phases and the per-atom energy split.
pub fn stack_profile(
    xbar_t: Vec<Complex64>,
    xbar_r: Vec<Complex64>,
    codes: SlowTimeCodes,
) -> Result<StarRisProfile> {
    if xbar_t.len() != xbar_r.len() || xbar_t.is_empty() {
        return Err(RadarError::InvalidConfiguration(
            "spatial profiles must be nonempty and of equal length".into(),
        ));
    }
    for (n, x) in xbar_t.iter().chain(&xbar_r).enumerate() {
        if (x.norm() - 1.0).abs() > 1e-9 {
            return Err(RadarError::InvalidConfiguration(format!(
                "spatial profile entry {n} has modulus {}, expected 1",
                x.norm()
            )));
        }
    }
    let kron = |code: &[Complex64], xbar: &[Complex64]| -> Vec<Complex64> {
        let mut out = Vec::with_capacity(code.len() * xbar.len());
        for c in code {
            for x in xbar {
                out.push(c * x);
            }
        }
        out
    };
    let stacked_t = kron(codes.transmissive(), &xbar_t);
    let stacked_r = kron(codes.reflective(), &xbar_r);
    for (i, (t, r)) in stacked_t.iter().zip(&stacked_r).enumerate() {
        let split = t.norm_sqr() + r.norm_sqr();
        if (split - 1.0).abs() > 1e-9 {
            return Err(RadarError::EnergyConservation(format!(
                "stacked response entry {i} has energy split {split}, expected 1"
            )));
        }
    }
    Ok(StarRisProfile { xbar_t, xbar_r, codes, stacked_t, stacked_r })
}

// ── beampattern ─────────────────────────────────────────────────────────

/// Array gain factor `|u^T(dir) diag(x) g|^2` of an atom response vector
/// towards a direction. The element gain is taken as isotropic; callers that
/// model a per-element gain can scale the result by their own `G(dir)`.
pub fn array_gain_factor(
    response: &[Complex64],
    direction: Direction,
    feeder: &FeederChannel,
    ris_geometry: &ArrayGeometry,
    wavelength: f64,
) -> f64 {
    assert_eq!(response.len(), ris_geometry.len(), "response length mismatch");
    assert_eq!(feeder.len(), ris_geometry.len(), "feeder length mismatch");
    let u = steering_vector(ris_geometry, direction, wavelength);
    let sum: Complex64 = u
        .entries
        .iter()
        .zip(response)
        .zip(feeder.gains())
        .map(|((u, x), g)| u * x * g)
        .sum();
    sum.norm_sqr()
}

/// Normalized array gain factor sampled on an azimuth x elevation grid of
/// one half-space.
#[derive(Debug, Clone)]
pub struct BeampatternGrid {
    pub azimuth_rad: Vec<f64>,
    pub elevation_rad: Vec<f64>,
    /// Row-major over azimuth: `values[ia * elevation.len() + ie]`.
    pub values: Vec<f64>,
}

impl BeampatternGrid {
    pub fn value(&self, ia: usize, ie: usize) -> f64 {
        self.values[ia * self.elevation_rad.len() + ie]
    }

    /// Grid indices of the maximum (first occurrence in row-major order).
    pub fn peak_indices(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = f64::MIN;
        for ia in 0..self.azimuth_rad.len() {
            for ie in 0..self.elevation_rad.len() {
                let v = self.value(ia, ie);
                if v > best_v {
                    best_v = v;
                    best = (ia, ie);
                }
            }
        }
        best
    }
}

/// Evaluate the spatial beampattern of one half-space on a grid and
/// normalize it by its maximum. The slow-time code only scales the pattern
/// uniformly per pulse, so the normalized shape is code-independent.
pub fn beampattern_grid(
    profile: &StarRisProfile,
    half: HalfSpace,
    azimuth_rad: &[f64],
    elevation_rad: &[f64],
    feeder: &FeederChannel,
    ris_geometry: &ArrayGeometry,
    wavelength: f64,
) -> Result<BeampatternGrid> {
    if azimuth_rad.is_empty() || elevation_rad.is_empty() {
        return Err(RadarError::InvalidConfiguration("beampattern grid is empty".into()));
    }
    let mut values = Vec::with_capacity(azimuth_rad.len() * elevation_rad.len());
    for &az in azimuth_rad {
        for &el in elevation_rad {
            let dir = Direction::new(az, el)?;
            if dir.half_space() != half {
                return Err(RadarError::InvalidConfiguration(format!(
                    "grid azimuth {az} rad lies outside the {half} half-space"
                )));
            }
            values.push(array_gain_factor(profile.spatial(half), dir, feeder, ris_geometry, wavelength));
        }
    }
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    if max <= 0.0 {
        return Err(RadarError::InvalidConfiguration(
            "beampattern is identically zero on the grid".into(),
        ));
    }
    for v in &mut values {
        *v /= max;
    }
    Ok(BeampatternGrid {
        azimuth_rad: azimuth_rad.to_vec(),
        elevation_rad: elevation_rad.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ura_positions;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const WAVELENGTH: f64 = 0.0107;

    fn sim_policy(pulses: usize) -> ScanningPolicy {
        ScanningPolicy::new(PolicyKind::Simultaneous, pulses).unwrap()
    }

    fn seq_policy(pulses: usize) -> ScanningPolicy {
        ScanningPolicy::new(PolicyKind::Sequential, pulses).unwrap()
    }

    #[test]
    fn odd_pulse_counts_are_rejected() {
        assert!(ScanningPolicy::new(PolicyKind::Simultaneous, 7).is_err());
        assert!(ScanningPolicy::new(PolicyKind::Sequential, 0).is_err());
    }

    #[test]
    fn simultaneous_codes_match_stated_form() {
        let codes = make_codes(sim_policy(4));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect_t = [-s, s, -s, s];
        for (c, e) in codes.transmissive().iter().zip(expect_t) {
            assert!((c - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
        for c in codes.reflective() {
            assert!((c - Complex64::new(s, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn sequential_codes_match_stated_form() {
        let codes = make_codes(seq_policy(4));
        let got_t: Vec<f64> = codes.transmissive().iter().map(|c| c.re).collect();
        let got_r: Vec<f64> = codes.reflective().iter().map(|c| c.re).collect();
        assert_eq!(got_t, vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(got_r, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn codes_are_orthogonal_with_equal_energy() {
        for pulses in [2usize, 4, 10, 16, 32] {
            for policy in [sim_policy(pulses), seq_policy(pulses)] {
                let codes = make_codes(policy);
                let cross = cdot(codes.transmissive(), codes.reflective());
                assert!(cross.norm() < 1e-14);
                let et: f64 = codes.transmissive().iter().map(|c| c.norm_sqr()).sum();
                let er: f64 = codes.reflective().iter().map(|c| c.norm_sqr()).sum();
                assert!((et - pulses as f64 / 2.0).abs() < 1e-12);
                assert!((er - pulses as f64 / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boresight_profile_with_real_feeder_is_all_ones() {
        let geom = ura_positions(4, 2, WAVELENGTH / 2.0, WAVELENGTH / 2.0).unwrap();
        let feeder = FeederChannel::from_gains(vec![Complex64::new(2.0, 0.0); 8]).unwrap();
        let dir_t = Direction::new(PI, 0.0).unwrap();
        let dir_r = Direction::new(0.0, 0.0).unwrap();
        let (_, xbar_r) = synthesize_profiles(&feeder, dir_t, dir_r, &geom, WAVELENGTH).unwrap();
        for x in &xbar_r {
            assert!((x - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn synthesized_profile_attains_aligned_gain() {
        let geom = ura_positions(8, 4, WAVELENGTH / 2.0, WAVELENGTH / 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let feeder = FeederChannel::random(geom.len(), &mut rng);
            let dir_t = Direction::from_degrees(157.0, 22.0).unwrap();
            let dir_r = Direction::from_degrees(22.0, 22.0).unwrap();
            let (xbar_t, xbar_r) =
                synthesize_profiles(&feeder, dir_t, dir_r, &geom, WAVELENGTH).unwrap();
            for x in xbar_t.iter().chain(&xbar_r) {
                assert!((x.norm() - 1.0).abs() < 1e-12);
            }
            let expect = feeder.abs_sum().powi(2);
            let gf_t = array_gain_factor(&xbar_t, dir_t, &feeder, &geom, WAVELENGTH);
            let gf_r = array_gain_factor(&xbar_r, dir_r, &feeder, &geom, WAVELENGTH);
            assert!((gf_t - expect).abs() <= 1e-9 * expect);
            assert!((gf_r - expect).abs() <= 1e-9 * expect);
        }
    }

    #[test]
    fn synthesize_rejects_swapped_half_spaces() {
        let geom = ura_positions(2, 2, WAVELENGTH / 2.0, WAVELENGTH / 2.0).unwrap();
        let feeder = FeederChannel::from_gains(vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        let dir_t = Direction::new(PI, 0.0).unwrap();
        let dir_r = Direction::new(0.0, 0.0).unwrap();
        assert!(synthesize_profiles(&feeder, dir_r, dir_t, &geom, WAVELENGTH).is_err());
    }

    #[test]
    fn gain_factor_is_zero_for_dark_surface_and_homogeneous_in_feeder() {
        let geom = ura_positions(4, 4, WAVELENGTH / 2.0, WAVELENGTH / 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let feeder = FeederChannel::random(geom.len(), &mut rng);
        let dir = Direction::from_degrees(10.0, -5.0).unwrap();
        let dark = vec![Complex64::new(0.0, 0.0); geom.len()];
        assert_eq!(array_gain_factor(&dark, dir, &feeder, &geom, WAVELENGTH), 0.0);

        let response: Vec<Complex64> =
            (0..geom.len()).map(|_| complex_normal(&mut rng, 1.0)).collect();
        let beta = Complex64::new(-0.3, 1.7);
        let scaled =
            FeederChannel::from_gains(feeder.gains().iter().map(|g| g * beta).collect()).unwrap();
        let base = array_gain_factor(&response, dir, &feeder, &geom, WAVELENGTH);
        let boosted = array_gain_factor(&response, dir, &scaled, &geom, WAVELENGTH);
        assert!((boosted - beta.norm_sqr() * base).abs() <= 1e-9 * boosted.max(1.0));
    }

    #[test]
    fn aligned_profile_beats_random_perturbations() {
        let geom = ura_positions(6, 3, WAVELENGTH / 2.0, WAVELENGTH / 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let feeder = FeederChannel::random(geom.len(), &mut rng);
        let dir_t = Direction::from_degrees(200.0, -10.0).unwrap();
        let dir_r = Direction::from_degrees(22.0, 22.0).unwrap();
        let (_, xbar_r) = synthesize_profiles(&feeder, dir_t, dir_r, &geom, WAVELENGTH).unwrap();
        let best = array_gain_factor(&xbar_r, dir_r, &feeder, &geom, WAVELENGTH);
        for _ in 0..100 {
            let perturbed: Vec<Complex64> = xbar_r
                .iter()
                .map(|x| x * Complex64::from_polar(1.0, rng.random_range(-PI..PI)))
                .collect();
            let gf = array_gain_factor(&perturbed, dir_r, &feeder, &geom, WAVELENGTH);
            assert!(gf <= best + 1e-9);
        }
    }

    #[test]
    fn stacking_enforces_energy_split_per_atom_and_pulse() {
        let geom = ura_positions(4, 2, WAVELENGTH / 2.0, WAVELENGTH / 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let feeder = FeederChannel::random(geom.len(), &mut rng);
        let dir_t = Direction::from_degrees(157.0, 22.0).unwrap();
        let dir_r = Direction::from_degrees(22.0, 22.0).unwrap();
        let (xbar_t, xbar_r) =
            synthesize_profiles(&feeder, dir_t, dir_r, &geom, WAVELENGTH).unwrap();
        for policy in [sim_policy(8), seq_policy(8)] {
            let profile =
                stack_profile(xbar_t.clone(), xbar_r.clone(), make_codes(policy)).unwrap();
            for i in 0..profile.pulses() * profile.atoms() {
                let split = profile.stacked(HalfSpace::Transmissive)[i].norm_sqr()
                    + profile.stacked(HalfSpace::Reflective)[i].norm_sqr();
                assert!((split - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sequential_stacking_blanks_the_idle_half() {
        let codes = make_codes(seq_policy(4));
        let one = vec![Complex64::new(1.0, 0.0)];
        let profile = stack_profile(one.clone(), one, codes).unwrap();
        for p in 0..2 {
            assert_eq!(profile.pulse_response(HalfSpace::Reflective, p)[0].norm(), 0.0);
        }
        for p in 2..4 {
            assert_eq!(profile.pulse_response(HalfSpace::Transmissive, p)[0].norm(), 0.0);
        }
    }

    #[test]
    fn two_pulse_single_atom_stack_matches_hand_kronecker() {
        let codes = make_codes(sim_policy(2));
        let one = vec![Complex64::new(1.0, 0.0)];
        let profile = stack_profile(one.clone(), one, codes).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let xt = profile.stacked(HalfSpace::Transmissive);
        let xr = profile.stacked(HalfSpace::Reflective);
        assert!((xt[0].re + s).abs() < 1e-15 && (xt[1].re - s).abs() < 1e-15);
        assert!((xr[0].re - s).abs() < 1e-15 && (xr[1].re - s).abs() < 1e-15);
    }

    #[test]
    fn stacking_rejects_bad_moduli_and_bad_codes() {
        let codes = make_codes(sim_policy(2));
        let bad = vec![Complex64::new(0.5, 0.0)];
        let one = vec![Complex64::new(1.0, 0.0)];
        assert!(stack_profile(bad, one.clone(), codes).is_err());

        let not_split = SlowTimeCodes::from_vectors(
            vec![Complex64::new(1.0, 0.0); 2],
            vec![Complex64::new(1.0, 0.0); 2],
        );
        assert!(matches!(not_split, Err(RadarError::EnergyConservation(_))));
    }

    #[test]
    fn beampattern_peaks_at_the_steered_cell() {
        let geom = ura_positions(16, 8, WAVELENGTH / 2.0, WAVELENGTH / 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let feeder = FeederChannel::random(geom.len(), &mut rng);
        let dir_t = Direction::from_degrees(157.0, 22.0).unwrap();
        let dir_r = Direction::from_degrees(22.0, 22.0).unwrap();
        let (xbar_t, xbar_r) =
            synthesize_profiles(&feeder, dir_t, dir_r, &geom, WAVELENGTH).unwrap();
        let profile = stack_profile(xbar_t, xbar_r, make_codes(sim_policy(8))).unwrap();

        let az: Vec<f64> = (-88..=88).step_by(2).map(|d| (d as f64).to_radians()).collect();
        let el: Vec<f64> = (-88..=88).step_by(2).map(|d| (d as f64).to_radians()).collect();
        let grid = beampattern_grid(
            &profile,
            HalfSpace::Reflective,
            &az,
            &el,
            &feeder,
            &geom,
            WAVELENGTH,
        )
        .unwrap();
        assert!(grid.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        let (ia, ie) = grid.peak_indices();
        assert!((grid.azimuth_rad[ia].to_degrees() - 22.0).abs() <= 2.0);
        assert!((grid.elevation_rad[ie].to_degrees() - 22.0).abs() <= 2.0);
        assert!((grid.value(ia, ie) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn beampattern_rejects_wrong_half_space_and_empty_grids() {
        let geom = ura_positions(4, 2, WAVELENGTH / 2.0, WAVELENGTH / 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let feeder = FeederChannel::random(geom.len(), &mut rng);
        let dir_t = Direction::from_degrees(157.0, 22.0).unwrap();
        let dir_r = Direction::from_degrees(22.0, 22.0).unwrap();
        let (xbar_t, xbar_r) =
            synthesize_profiles(&feeder, dir_t, dir_r, &geom, WAVELENGTH).unwrap();
        let profile = stack_profile(xbar_t, xbar_r, make_codes(sim_policy(4))).unwrap();
        let err = beampattern_grid(
            &profile,
            HalfSpace::Reflective,
            &[PI],
            &[0.0],
            &feeder,
            &geom,
            WAVELENGTH,
        );
        assert!(err.is_err());
        let empty = beampattern_grid(
            &profile,
            HalfSpace::Reflective,
            &[],
            &[],
            &feeder,
            &geom,
            WAVELENGTH,
        );
        assert!(empty.is_err());
    }
}
