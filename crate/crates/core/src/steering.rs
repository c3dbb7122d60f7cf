//! Space-time steering vectors.
//!
//! The slow-time observation stacks one receive-array snapshot per pulse, so
//! a scatterer at direction `phi` with Doppler `nu` contributes along
//!
//! `h = (d(nu) .* G(phi) x) (x) u_rx(phi)`
//!
//! where `d(nu)` is the Doppler progression over pulses, `G(phi) x` collects
//! the per-pulse surface response towards `phi`, and `u_rx` is the receive
//! steering vector. When the surface response factors into a code and a
//! spatial phase vector, the whole thing collapses to a rank-one template
//! `gain * (d(nu) .* c) (x) u_rx`; [`SteeringTemplate`] carries that factored
//! form and is what makes large Monte Carlo campaigns affordable, since inner
//! products between templates cost O(pulses + antennas) instead of
//! O(pulses * antennas).

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::array::{steering_vector, Direction};
use crate::error::{RadarError, Result};
use crate::linalg::cdot;
use crate::ris::{FeederChannel, StarRisProfile};
use crate::system::RadarSystem;

/// Doppler progression over a pulse train: entry `p` (0-based) is
/// `exp(i * 2*pi * nu * pri * p)`.
pub fn doppler_vector(doppler_hz: f64, pri: f64, pulses: usize) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, TAU * doppler_hz * pri);
    let mut cur = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(pulses);
    for _ in 0..pulses {
        out.push(cur);
        cur *= rot;
    }
    out
}

/// A contiguous range of pulse indices. Temporal sums keep the global pulse
/// index so windowed quantities line up exactly with full-train ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PulseWindow {
    pub start: usize,
    pub len: usize,
}

impl PulseWindow {
    pub fn full(pulses: usize) -> Self {
        Self { start: 0, len: pulses }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// General space-time steering vector from an arbitrary stacked surface
/// response of length `pulses * atoms` (pulse-major).
pub fn space_time_steering(
    system: &RadarSystem,
    feeder: &FeederChannel,
    stacked_response: &[Complex64],
    direction: Direction,
    doppler_hz: f64,
) -> Result<Vec<Complex64>> {
    let atoms = system.ris.len();
    if feeder.len() != atoms {
        return Err(RadarError::InvalidConfiguration(format!(
            "feeder channel has {} entries but the surface has {atoms} atoms",
            feeder.len()
        )));
    }
    if stacked_response.is_empty() || stacked_response.len() % atoms != 0 {
        return Err(RadarError::InvalidConfiguration(format!(
            "stacked response length {} is not a positive multiple of the atom count {atoms}",
            stacked_response.len()
        )));
    }
    let pulses = stacked_response.len() / atoms;
    let u_ris = steering_vector(&system.ris, direction, system.wavelength);
    let u_rx = steering_vector(&system.rx, direction, system.wavelength);
    let doppler = doppler_vector(doppler_hz, system.pri, pulses);

    let n_rx = u_rx.entries.len();
    let mut out = Vec::with_capacity(pulses * n_rx);
    for p in 0..pulses {
        // Per-pulse surface gain towards the direction: u_ris^T diag(g) x_p.
        let x_p = &stacked_response[p * atoms..(p + 1) * atoms];
        let gain: Complex64 = u_ris
            .entries
            .iter()
            .zip(feeder.gains())
            .zip(x_p)
            .map(|((u, g), x)| u * g * x)
            .sum();
        let temporal = doppler[p] * gain;
        for u in &u_rx.entries {
            out.push(temporal * u);
        }
    }
    Ok(out)
}

/// Rank-one factored space-time response of one resolution cell:
/// `h(nu) = gain * (d(nu) .* code) (x) spatial`.
///
/// `gain` is the surface gain towards the cell, `code` the slow-time code of
/// the cell's half-space, and `spatial` the receive steering vector.
#[derive(Debug, Clone)]
pub struct SteeringTemplate {
    gain: Complex64,
    code: Vec<Complex64>,
    spatial: Vec<Complex64>,
    pri: f64,
}

impl SteeringTemplate {
    /// Build the template of a cell at `direction` through the profile half
    /// matching the direction's half-space.
    pub fn for_cell(
        system: &RadarSystem,
        feeder: &FeederChannel,
        profile: &StarRisProfile,
        direction: Direction,
    ) -> Result<Self> {
        let atoms = system.ris.len();
        if profile.atoms() != atoms || feeder.len() != atoms {
            return Err(RadarError::InvalidConfiguration(format!(
                "profile/feeder atom counts ({}, {}) do not match the surface ({atoms})",
                profile.atoms(),
                feeder.len()
            )));
        }
        let half = direction.half_space();
        let u_ris = steering_vector(&system.ris, direction, system.wavelength);
        let gain: Complex64 = u_ris
            .entries
            .iter()
            .zip(profile.spatial(half))
            .zip(feeder.gains())
            .map(|((u, x), g)| u * x * g)
            .sum();
        let spatial = steering_vector(&system.rx, direction, system.wavelength).entries;
        Ok(Self { gain, code: profile.codes().for_half(half).to_vec(), spatial, pri: system.pri })
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    pub fn pri(&self) -> f64 {
        self.pri
    }

    pub fn pulses(&self) -> usize {
        self.code.len()
    }

    pub fn antennas(&self) -> usize {
        self.spatial.len()
    }

    pub fn spatial(&self) -> &[Complex64] {
        &self.spatial
    }

    pub fn code(&self) -> &[Complex64] {
        &self.code
    }

    /// Materialize `h(nu)` over a pulse window (global Doppler indexing).
    pub fn materialize_window(&self, doppler_hz: f64, window: PulseWindow) -> Vec<Complex64> {
        let doppler = doppler_vector(doppler_hz, self.pri, window.end());
        let mut out = Vec::with_capacity(window.len * self.spatial.len());
        for p in window.start..window.end() {
            let temporal = self.gain * self.code[p] * doppler[p];
            for u in &self.spatial {
                out.push(temporal * u);
            }
        }
        out
    }

    /// Materialize `h(nu)` over the full pulse train.
    pub fn materialize(&self, doppler_hz: f64) -> Vec<Complex64> {
        self.materialize_window(doppler_hz, PulseWindow::full(self.pulses()))
    }

    /// `||h(nu)||^2` over a window; independent of the Doppler.
    pub fn norm_sqr_window(&self, window: PulseWindow) -> f64 {
        let code_energy: f64 =
            self.code[window.start..window.end()].iter().map(|c| c.norm_sqr()).sum();
        let spatial_energy: f64 = self.spatial.iter().map(|u| u.norm_sqr()).sum();
        self.gain.norm_sqr() * code_energy * spatial_energy
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr_window(PulseWindow::full(self.pulses()))
    }

    /// Inner product `h_self(nu_self)^H h_other(nu_other)` over a window.
    pub fn inner(
        &self,
        nu_self: f64,
        other: &SteeringTemplate,
        nu_other: f64,
        window: PulseWindow,
    ) -> Complex64 {
        let spatial = cdot(&self.spatial, &other.spatial);
        self.gain.conj()
            * other.gain
            * spatial
            * temporal_cross(&self.code, nu_self, &other.code, nu_other, self.pri, window)
    }

    /// `sum_p conj(code[p] * d(nu)[p]) * z[p]` over a window, where `z` holds
    /// per-pulse beamformed samples indexed from `window.start`. Multiplied
    /// by `conj(gain)` this is `h(nu)^H y` for `z[p] = spatial^H y_p`.
    pub(crate) fn code_doppler_sum(
        &self,
        z: &[Complex64],
        doppler_hz: f64,
        window: PulseWindow,
    ) -> Complex64 {
        debug_assert_eq!(z.len(), window.len);
        let rot = Complex64::from_polar(1.0, -TAU * doppler_hz * self.pri);
        let mut cur = Complex64::from_polar(1.0, -TAU * doppler_hz * self.pri * window.start as f64);
        let mut sum = Complex64::new(0.0, 0.0);
        for (p, zp) in (window.start..window.end()).zip(z) {
            sum += self.code[p].conj() * cur * zp;
            cur *= rot;
        }
        sum
    }
}

/// `sum_p conj(code_a[p] * e^{i 2 pi nu_a pri p}) * code_b[p] * e^{i 2 pi nu_b pri p}`
/// over a pulse window, with `p` the global 0-based pulse index.
pub(crate) fn temporal_cross(
    code_a: &[Complex64],
    nu_a: f64,
    code_b: &[Complex64],
    nu_b: f64,
    pri: f64,
    window: PulseWindow,
) -> Complex64 {
    let delta = nu_b - nu_a;
    let rot = Complex64::from_polar(1.0, TAU * delta * pri);
    let mut cur = Complex64::from_polar(1.0, TAU * delta * pri * window.start as f64);
    let mut sum = Complex64::new(0.0, 0.0);
    for p in window.start..window.end() {
        sum += code_a[p].conj() * code_b[p] * cur;
        cur *= rot;
    }
    sum
}

/// Per-pulse beamformed samples `z[p] = spatial^H y_p` for the blocks of a
/// stacked observation restricted to a pulse window.
pub(crate) fn beamform_pulses(
    spatial: &[Complex64],
    observation: &[Complex64],
    window: PulseWindow,
    n_rx: usize,
) -> Vec<Complex64> {
    debug_assert_eq!(spatial.len(), n_rx);
    (window.start..window.end())
        .map(|p| {
            let local = p - window.start;
            cdot(spatial, &observation[local * n_rx..(local + 1) * n_rx])
        })
        .collect()
}
