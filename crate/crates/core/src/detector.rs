//! Multi-hypothesis detection and Doppler estimation.
//!
//! The receiver decides among four hypotheses for one inspected cell pair
//! (no target, one target in either cell, or targets in both) by maximizing
//! penalized whitened matched-filter statistics over a Doppler grid: each
//! declared target costs a penalty chosen off-line to meet a false-alarm
//! budget. Under sequential scanning the two half trains carry disjoint
//! echoes and the covariance is block-diagonal, so the same decision is
//! reachable through two independent binary tests on half-size vectors;
//! [`DetectorBank::sequential_decide`] implements that reduced form.
//!
//! The bank caches everything that does not depend on the observation:
//! whitened norms per grid Doppler, clutter-subspace projections of every
//! grid steering vector, and the full table of whitened cross-terms between
//! the two cells. A single observation is then processed with one pass of
//! beamforming plus O(grid) scalar work for the single-target statistics and
//! O(grid^2) scalar work for the joint search.

use num_complex::Complex64;

use crate::array::{Direction, HalfSpace};
use crate::covariance::DisturbanceModel;
use crate::error::{RadarError, Result};
use crate::ris::{FeederChannel, PolicyKind, StarRisProfile};
use crate::steering::{beamform_pulses, temporal_cross, PulseWindow, SteeringTemplate};
use crate::system::{RadarSystem, SPEED_OF_LIGHT};

/// Radial velocity equivalent of a Doppler shift at a carrier frequency.
pub fn doppler_to_velocity(doppler_hz: f64, carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT * doppler_hz / (2.0 * carrier_hz)
}

/// Doppler resolution of one scanning policy: simultaneous scanning
/// integrates the full pulse train per cell, sequential scanning only half.
pub fn doppler_resolution_hz(kind: PolicyKind, pulses: usize, pri: f64) -> f64 {
    match kind {
        PolicyKind::Simultaneous => 1.0 / (pulses as f64 * pri),
        PolicyKind::Sequential => 2.0 / (pulses as f64 * pri),
    }
}

// ── Doppler grid ────────────────────────────────────────────────────────

/// Uniformly spaced Doppler hypotheses inside the open unambiguous interval.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerGrid {
    values: Vec<f64>,
    step: f64,
}

impl DopplerGrid {
    /// Symmetric grid over the full unambiguous interval with step
    /// `1 / (oversampling * pulses * pri)`.
    pub fn unambiguous(pri: f64, pulses: usize, oversampling: usize) -> Result<Self> {
        if pri <= 0.0 || pulses == 0 || oversampling == 0 {
            return Err(RadarError::InvalidConfiguration(
                "Doppler grid needs positive pri, pulses, and oversampling".into(),
            ));
        }
        let step = 1.0 / (oversampling as f64 * pulses as f64 * pri);
        let max = 1.0 / (2.0 * pri);
        let k_max = ((max / step).ceil() as i64 - 1).max(0);
        let values = (-k_max..=k_max).map(|k| k as f64 * step).collect();
        Ok(Self { values, step })
    }

    /// Grid of multiples of `step` covering `[lo, hi]`, all strictly inside
    /// the unambiguous interval for `pri`.
    pub fn with_span(lo: f64, hi: f64, step: f64, pri: f64) -> Result<Self> {
        if step <= 0.0 || lo > hi {
            return Err(RadarError::InvalidConfiguration(
                "Doppler span must be ordered and the step positive".into(),
            ));
        }
        let max = 1.0 / (2.0 * pri);
        if lo <= -max || hi >= max {
            return Err(RadarError::InvalidConfiguration(format!(
                "Doppler span ({lo}, {hi}) Hz exceeds the unambiguous interval (+-{max} Hz)"
            )));
        }
        let k_lo = (lo / step).ceil() as i64;
        let k_hi = (hi / step).floor() as i64;
        if k_lo > k_hi {
            return Err(RadarError::InvalidConfiguration(
                "Doppler span contains no grid point".into(),
            ));
        }
        let values = (k_lo..=k_hi).map(|k| k as f64 * step).collect();
        Ok(Self { values, step })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn index_of(&self, doppler_hz: f64) -> Option<usize> {
        let idx = ((doppler_hz - self.values[0]) / self.step).round();
        if idx < 0.0 || idx >= self.values.len() as f64 {
            return None;
        }
        let idx = idx as usize;
        ((self.values[idx] - doppler_hz).abs() <= 1e-6 * self.step).then_some(idx)
    }
}

// ── decisions ───────────────────────────────────────────────────────────

/// The four hypotheses on the inspected cell pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// No target in either cell.
    H0,
    /// Target in the transmissive cell only.
    H1T,
    /// Target in the reflective cell only.
    H1R,
    /// Targets in both cells.
    H2,
}

impl Hypothesis {
    /// Number of targets the hypothesis declares.
    pub fn declared_targets(&self) -> usize {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1T | Hypothesis::H1R => 1,
            Hypothesis::H2 => 2,
        }
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::H0 => write!(f, "H0"),
            Hypothesis::H1T => write!(f, "H1t"),
            Hypothesis::H1R => write!(f, "H1r"),
            Hypothesis::H2 => write!(f, "H2"),
        }
    }
}

/// Penalized objective values, one per hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub h0: f64,
    pub h1t: f64,
    pub h1r: f64,
    pub h2: f64,
}

/// Raw (unpenalized) statistic maxima of one observation. The decision for
/// any penalty follows from these three numbers, which is what makes
/// threshold calibration on cached maxima possible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticMaxima {
    pub single_t: f64,
    pub single_r: f64,
    pub pair: f64,
}

/// Apply the penalized selection rule to cached statistic maxima. Ties break
/// towards the hypothesis with fewer declared targets.
pub fn decide_from_maxima(maxima: &StatisticMaxima, eta: f64) -> (Hypothesis, Scores) {
    let scores = Scores {
        h0: 0.0,
        h1t: maxima.single_t - eta,
        h1r: maxima.single_r - eta,
        h2: maxima.pair - 2.0 * eta,
    };
    let ordered = [
        (Hypothesis::H0, scores.h0),
        (Hypothesis::H1T, scores.h1t),
        (Hypothesis::H1R, scores.h1r),
        (Hypothesis::H2, scores.h2),
    ];
    let mut best = Hypothesis::H0;
    let mut best_value = scores.h0;
    for (hypothesis, value) in ordered.into_iter().skip(1) {
        if value > best_value {
            best = hypothesis;
            best_value = value;
        }
    }
    (best, scores)
}

/// Outcome of one decision: selected hypothesis, Doppler and radial-velocity
/// estimates for the declared cells, and the objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub hypothesis: Hypothesis,
    pub doppler_t: Option<f64>,
    pub doppler_r: Option<f64>,
    pub velocity_t: Option<f64>,
    pub velocity_r: Option<f64>,
    pub scores: Scores,
}

/// A decision together with the raw statistic maxima behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub decision: Decision,
    pub maxima: StatisticMaxima,
}

// ── per-cell cached quantities ──────────────────────────────────────────

#[derive(Debug, Clone)]
struct CellBank {
    template: SteeringTemplate,
    window: PulseWindow,
    /// `h(nu)^H C^-1 h(nu)` per grid point.
    norms: Vec<f64>,
    /// `H^H h(nu)` per grid point.
    proj: Vec<nalgebra::DVector<Complex64>>,
    /// `M^-1 H^H h(nu)` per grid point.
    wproj: Vec<nalgebra::DVector<Complex64>>,
}

impl CellBank {
    fn build(
        template: SteeringTemplate,
        model: &DisturbanceModel,
        grid: &DopplerGrid,
    ) -> Result<Self> {
        let window = model.window();
        let norm_sqr = template.norm_sqr_window(window);
        if norm_sqr <= 0.0 {
            return Err(RadarError::DegenerateCell(
                "inspected cell has a zero-norm steering vector".into(),
            ));
        }
        let noise = model.noise_variance();
        // Spatial inner products against each clutter column are Doppler
        // independent; hoist them out of the grid loop.
        let spatial_gains: Vec<Complex64> = model
            .columns()
            .iter()
            .map(|c| {
                c.template.gain().conj()
                    * template.gain()
                    * crate::linalg::cdot(c.template.spatial(), template.spatial())
            })
            .collect();
        let k = model.num_columns();
        let mut norms = Vec::with_capacity(grid.len());
        let mut proj = Vec::with_capacity(grid.len());
        let mut wproj = Vec::with_capacity(grid.len());
        for &nu in grid.values() {
            let b = nalgebra::DVector::from_iterator(
                k,
                model.columns().iter().zip(&spatial_gains).map(|(c, &sg)| {
                    sg * temporal_cross(
                        c.template.code(),
                        c.doppler_hz,
                        template.code(),
                        nu,
                        template.pri(),
                        window,
                    )
                }),
            );
            let w = model.gram_solve(&b);
            let reduced = if k == 0 { 0.0 } else { b.dotc(&w).re };
            let n = ((norm_sqr - reduced) / noise).max(norm_sqr * 1e-15 / noise);
            norms.push(n);
            proj.push(b);
            wproj.push(w);
        }
        Ok(Self { template, window, norms, proj, wproj })
    }

    /// Whitened correlations `q(nu) = h(nu)^H C^-1 y` for every grid point,
    /// given the clutter coefficients `c_y = M^-1 H^H y` of the observation.
    fn correlations(
        &self,
        grid: &DopplerGrid,
        model: &DisturbanceModel,
        c_y: &nalgebra::DVector<Complex64>,
        y_window: &[Complex64],
        n_rx: usize,
    ) -> Vec<Complex64> {
        let z = beamform_pulses(self.template.spatial(), y_window, self.window, n_rx);
        let noise = model.noise_variance();
        let gain_conj = self.template.gain().conj();
        grid.values()
            .iter()
            .enumerate()
            .map(|(i, &nu)| {
                let raw = gain_conj * self.template.code_doppler_sum(&z, nu, self.window);
                let reduced = if model.num_columns() == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.proj[i].dotc(c_y)
                };
                (raw - reduced) / noise
            })
            .collect()
    }
}

// ── the bank ────────────────────────────────────────────────────────────

/// Precomputed whitened quantities for one scene layout and Doppler grid.
#[derive(Debug, Clone)]
pub struct DetectorBank {
    policy: Option<PolicyKind>,
    pulses: usize,
    n_rx: usize,
    carrier_hz: f64,
    eta: f64,
    grid: DopplerGrid,
    disturbance: DisturbanceModel,
    cell_t: CellBank,
    cell_r: CellBank,
    /// Whitened cross terms `h_t(nu_i)^H C^-1 h_r(nu_j)`, row-major over
    /// `(i, j)`.
    rho: Vec<Complex64>,
    sequential: Option<Box<SequentialDetector>>,
}

#[derive(Debug, Clone)]
struct SequentialDetector {
    t: HalfDetector,
    r: HalfDetector,
}

/// One half-train binary test: windowed disturbance model plus the windowed
/// cell cache.
#[derive(Debug, Clone)]
struct HalfDetector {
    model: DisturbanceModel,
    cell: CellBank,
}

impl HalfDetector {
    fn max_statistic(&self, y: &[Complex64], grid: &DopplerGrid, n_rx: usize) -> (f64, usize) {
        let w = self.model.window();
        let slice = &y[w.start * n_rx..w.end() * n_rx];
        let c_y = self.model.gram_solve(&self.model.project(slice));
        let q = self.cell.correlations(grid, &self.model, &c_y, slice, n_rx);
        argmax(q.iter().zip(&self.cell.norms).map(|(qi, &ni)| qi.norm_sqr() / ni))
    }
}

impl DetectorBank {
    /// Precompute the bank for one scene layout.
    ///
    /// `dir_t` and `dir_r` are the inspected transmissive and reflective
    /// cells; the disturbance model must cover the full pulse train of the
    /// profile. Under sequential scanning the separable half-train detectors
    /// are prepared as well.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        system: &RadarSystem,
        feeder: &FeederChannel,
        profile: &StarRisProfile,
        disturbance: DisturbanceModel,
        dir_t: Direction,
        dir_r: Direction,
        grid: DopplerGrid,
        eta: f64,
    ) -> Result<Self> {
        if eta < 0.0 || !eta.is_finite() {
            return Err(RadarError::InvalidConfiguration(
                "the detection penalty must be finite and nonnegative".into(),
            ));
        }
        if grid.is_empty() {
            return Err(RadarError::InvalidConfiguration("Doppler grid is empty".into()));
        }
        let max_doppler = system.max_doppler_hz();
        if grid.values().iter().any(|v| v.abs() >= max_doppler) {
            return Err(RadarError::InvalidConfiguration(
                "Doppler grid exceeds the unambiguous interval".into(),
            ));
        }
        if dir_t.half_space() != HalfSpace::Transmissive {
            return Err(RadarError::InvalidConfiguration(
                "the transmissive cell direction must lie in the transmissive half-space".into(),
            ));
        }
        if dir_r.half_space() != HalfSpace::Reflective {
            return Err(RadarError::InvalidConfiguration(
                "the reflective cell direction must lie in the reflective half-space".into(),
            ));
        }
        let pulses = profile.pulses();
        let n_rx = system.rx.len();
        if disturbance.dim() != pulses * n_rx || disturbance.window() != PulseWindow::full(pulses) {
            return Err(RadarError::InvalidConfiguration(
                "disturbance model does not cover the full pulse train".into(),
            ));
        }

        let tmpl_t = SteeringTemplate::for_cell(system, feeder, profile, dir_t)?;
        let tmpl_r = SteeringTemplate::for_cell(system, feeder, profile, dir_r)?;
        let cell_t = CellBank::build(tmpl_t, &disturbance, &grid)?;
        let cell_r = CellBank::build(tmpl_r, &disturbance, &grid)?;

        // Cross terms: the direct part depends only on the Doppler offset on
        // a uniform grid, so one pass of temporal sums covers all pairs.
        let window = disturbance.window();
        let len = grid.len();
        let spatial_tr = crate::linalg::cdot(cell_t.template.spatial(), cell_r.template.spatial());
        let gain_tr = cell_t.template.gain().conj() * cell_r.template.gain() * spatial_tr;
        let offsets: Vec<Complex64> = (-(len as i64 - 1)..=(len as i64 - 1))
            .map(|d| {
                temporal_cross(
                    cell_t.template.code(),
                    0.0,
                    cell_r.template.code(),
                    d as f64 * grid.step(),
                    system.pri,
                    window,
                )
            })
            .collect();
        let noise = disturbance.noise_variance();
        let mut rho = Vec::with_capacity(len * len);
        for i in 0..len {
            for j in 0..len {
                let direct = gain_tr * offsets[(j as i64 - i as i64 + len as i64 - 1) as usize];
                let reduced = if disturbance.num_columns() == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    cell_t.proj[i].dotc(&cell_r.wproj[j])
                };
                rho.push((direct - reduced) / noise);
            }
        }

        let policy = profile.codes().kind();
        let sequential = if policy == Some(PolicyKind::Sequential) {
            let half = pulses / 2;
            let window_t = PulseWindow { start: 0, len: half };
            let window_r = PulseWindow { start: half, len: half };
            let model_t = disturbance.restricted(window_t, HalfSpace::Transmissive)?;
            let model_r = disturbance.restricted(window_r, HalfSpace::Reflective)?;
            let cell_half_t = CellBank::build(cell_t.template.clone(), &model_t, &grid)?;
            let cell_half_r = CellBank::build(cell_r.template.clone(), &model_r, &grid)?;
            Some(Box::new(SequentialDetector {
                t: HalfDetector { model: model_t, cell: cell_half_t },
                r: HalfDetector { model: model_r, cell: cell_half_r },
            }))
        } else {
            None
        };

        Ok(Self {
            policy,
            pulses,
            n_rx,
            carrier_hz: system.carrier_hz,
            eta,
            grid,
            disturbance,
            cell_t,
            cell_r,
            rho,
            sequential,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn grid(&self) -> &DopplerGrid {
        &self.grid
    }

    pub fn policy(&self) -> Option<PolicyKind> {
        self.policy
    }

    pub fn dim(&self) -> usize {
        self.pulses * self.n_rx
    }

    pub fn disturbance(&self) -> &DisturbanceModel {
        &self.disturbance
    }

    /// Whitened energy `h(nu)^H C^-1 h(nu)` of one cell at a grid Doppler.
    pub fn whitened_norm_sqr(&self, half: HalfSpace, doppler_hz: f64) -> Result<f64> {
        let i = self.grid_index(doppler_hz)?;
        Ok(self.cell(half).norms[i])
    }

    fn cell(&self, half: HalfSpace) -> &CellBank {
        match half {
            HalfSpace::Transmissive => &self.cell_t,
            HalfSpace::Reflective => &self.cell_r,
        }
    }

    fn grid_index(&self, doppler_hz: f64) -> Result<usize> {
        self.grid.index_of(doppler_hz).ok_or_else(|| {
            RadarError::InvalidConfiguration(format!(
                "Doppler {doppler_hz} Hz is not a grid point"
            ))
        })
    }

    fn clutter_coefficients(&self, y: &[Complex64]) -> nalgebra::DVector<Complex64> {
        self.disturbance.gram_solve(&self.disturbance.project(y))
    }

    /// Single-cell whitened matched-filter statistic
    /// `|h(nu)^H C^-1 y|^2 / (h(nu)^H C^-1 h(nu))` at a grid Doppler.
    pub fn single_statistic(&self, half: HalfSpace, doppler_hz: f64, y: &[Complex64]) -> Result<f64> {
        assert_eq!(y.len(), self.dim(), "observation dimension mismatch");
        let i = self.grid_index(doppler_hz)?;
        let c_y = self.clutter_coefficients(y);
        let cell = self.cell(half);
        let q = cell.correlations(&self.grid, &self.disturbance, &c_y, y, self.n_rx);
        Ok(q[i].norm_sqr() / cell.norms[i])
    }

    /// Joint two-cell statistic at a grid Doppler pair; falls back to the
    /// better single-cell statistic when the pair steering vectors are
    /// numerically collinear.
    pub fn pair_statistic(&self, nu_t: f64, nu_r: f64, y: &[Complex64]) -> Result<f64> {
        assert_eq!(y.len(), self.dim(), "observation dimension mismatch");
        let i = self.grid_index(nu_t)?;
        let j = self.grid_index(nu_r)?;
        let c_y = self.clutter_coefficients(y);
        let q_t = self.cell_t.correlations(&self.grid, &self.disturbance, &c_y, y, self.n_rx);
        let q_r = self.cell_r.correlations(&self.grid, &self.disturbance, &c_y, y, self.n_rx);
        Ok(self.pair_value(i, j, q_t[i], q_r[j]))
    }

    fn pair_value(&self, i: usize, j: usize, q_t: Complex64, q_r: Complex64) -> f64 {
        let rho = self.rho[i * self.grid.len() + j];
        let n_t = self.cell_t.norms[i];
        let n_r = self.cell_r.norms[j];
        let t_t = q_t.norm_sqr() / n_t;
        let t_r = q_r.norm_sqr() / n_r;
        if rho.re == 0.0 && rho.im == 0.0 {
            // Orthogonal cells (always the case under sequential scanning):
            // the joint projection splits exactly.
            return t_t + t_r;
        }
        let det = n_t * n_r - rho.norm_sqr();
        if det <= 1e-12 * n_t * n_r {
            // Collinear steering pair: the joint subspace degenerates to one
            // dimension, keep the better single-cell statistic.
            return t_t.max(t_r);
        }
        (n_r * q_t.norm_sqr() + n_t * q_r.norm_sqr() - 2.0 * (rho * q_t.conj() * q_r).re) / det
    }

    /// Full evaluation of one observation: grid maximization of all three
    /// statistics and the penalized selection.
    pub fn evaluate(&self, y: &[Complex64]) -> Evaluation {
        assert_eq!(y.len(), self.dim(), "observation dimension mismatch");
        let c_y = self.clutter_coefficients(y);
        let q_t = self.cell_t.correlations(&self.grid, &self.disturbance, &c_y, y, self.n_rx);
        let q_r = self.cell_r.correlations(&self.grid, &self.disturbance, &c_y, y, self.n_rx);
        let t_t: Vec<f64> =
            q_t.iter().zip(&self.cell_t.norms).map(|(q, &n)| q.norm_sqr() / n).collect();
        let t_r: Vec<f64> =
            q_r.iter().zip(&self.cell_r.norms).map(|(q, &n)| q.norm_sqr() / n).collect();
        let (max_t, i_t) = argmax(t_t.iter().copied());
        let (max_r, i_r) = argmax(t_r.iter().copied());

        let len = self.grid.len();
        let mut max_pair = f64::NEG_INFINITY;
        let mut pair_idx = (0usize, 0usize);
        for i in 0..len {
            for j in 0..len {
                let value = self.pair_value(i, j, q_t[i], q_r[j]);
                if value > max_pair {
                    max_pair = value;
                    pair_idx = (i, j);
                }
            }
        }

        let maxima = StatisticMaxima { single_t: max_t, single_r: max_r, pair: max_pair };
        let (hypothesis, scores) = decide_from_maxima(&maxima, self.eta);
        let (doppler_t, doppler_r) = match hypothesis {
            Hypothesis::H0 => (None, None),
            Hypothesis::H1T => (Some(self.grid.values()[i_t]), None),
            Hypothesis::H1R => (None, Some(self.grid.values()[i_r])),
            Hypothesis::H2 => {
                (Some(self.grid.values()[pair_idx.0]), Some(self.grid.values()[pair_idx.1]))
            }
        };
        Evaluation {
            decision: Decision {
                hypothesis,
                doppler_t,
                doppler_r,
                velocity_t: doppler_t.map(|nu| doppler_to_velocity(nu, self.carrier_hz)),
                velocity_r: doppler_r.map(|nu| doppler_to_velocity(nu, self.carrier_hz)),
                scores,
            },
            maxima,
        }
    }

    /// Penalized multi-hypothesis decision on one observation.
    pub fn gic_decide(&self, y: &[Complex64]) -> Decision {
        self.evaluate(y).decision
    }

    /// Separable decision for sequential scanning: one binary test per half
    /// train against the penalty, outcomes combined into the four
    /// hypotheses. Errors under any other scanning policy.
    pub fn sequential_decide(&self, y: &[Complex64]) -> Result<Decision> {
        assert_eq!(y.len(), self.dim(), "observation dimension mismatch");
        let seq = self.sequential.as_ref().ok_or_else(|| {
            RadarError::InvalidConfiguration(
                "the separable decision requires sequential scanning".into(),
            )
        })?;
        let (max_t, i_t) = seq.t.max_statistic(y, &self.grid, self.n_rx);
        let (max_r, i_r) = seq.r.max_statistic(y, &self.grid, self.n_rx);
        let declare_t = max_t > self.eta;
        let declare_r = max_r > self.eta;
        let hypothesis = match (declare_t, declare_r) {
            (false, false) => Hypothesis::H0,
            (true, false) => Hypothesis::H1T,
            (false, true) => Hypothesis::H1R,
            (true, true) => Hypothesis::H2,
        };
        let doppler_t = declare_t.then(|| self.grid.values()[i_t]);
        let doppler_r = declare_r.then(|| self.grid.values()[i_r]);
        Ok(Decision {
            hypothesis,
            doppler_t,
            doppler_r,
            velocity_t: doppler_t.map(|nu| doppler_to_velocity(nu, self.carrier_hz)),
            velocity_r: doppler_r.map(|nu| doppler_to_velocity(nu, self.carrier_hz)),
            scores: Scores {
                h0: 0.0,
                h1t: max_t - self.eta,
                h1r: max_r - self.eta,
                h2: (max_t + max_r) - 2.0 * self.eta,
            },
        })
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut idx = 0;
    for (i, v) in values.enumerate() {
        if v > best {
            best = v;
            idx = i;
        }
    }
    (best, idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ura_positions;
    use crate::covariance::build_covariance;
    use crate::linalg::complex_normal;
    use crate::ris::{make_codes, stack_profile, synthesize_profiles, ScanningPolicy};
    use crate::scene::{PointScatterer, Scene};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PRI: f64 = 0.5e-3;

    struct Fixture {
        system: RadarSystem,
        feeder: FeederChannel,
        profile: StarRisProfile,
        scene: Scene,
        dir_t: Direction,
        dir_r: Direction,
    }

    fn fixture(kind: PolicyKind, pulses: usize, clutter_each: usize, seed: u64) -> Fixture {
        let carrier = 28.0e9;
        let wavelength = crate::system::SPEED_OF_LIGHT / carrier;
        let ris = ura_positions(4, 2, wavelength / 2.0, wavelength / 2.0).unwrap();
        let system = RadarSystem::new(carrier, PRI, ris.clone(), ris).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feeder = FeederChannel::random(system.ris.len(), &mut rng);
        let dir_t = Direction::from_degrees(157.0, 22.0).unwrap();
        let dir_r = Direction::from_degrees(22.0, 22.0).unwrap();
        let (xbar_t, xbar_r) =
            synthesize_profiles(&feeder, dir_t, dir_r, &system.ris, system.wavelength).unwrap();
        let profile =
            stack_profile(xbar_t, xbar_r, make_codes(ScanningPolicy::new(kind, pulses).unwrap()))
                .unwrap();
        let mut clutter_t = Vec::new();
        let mut clutter_r = Vec::new();
        for _ in 0..clutter_each {
            clutter_t.push(
                PointScatterer::swerling(
                    Direction::from_degrees(
                        rng.random_range(200.0..220.0),
                        rng.random_range(-40.0..-20.0),
                    )
                    .unwrap(),
                    rng.random_range(-125.0..125.0),
                    rng.random_range(20.0..100.0),
                )
                .unwrap(),
            );
            clutter_r.push(
                PointScatterer::swerling(
                    Direction::from_degrees(
                        rng.random_range(-40.0..-20.0),
                        rng.random_range(-40.0..-20.0),
                    )
                    .unwrap(),
                    rng.random_range(-125.0..125.0),
                    rng.random_range(20.0..100.0),
                )
                .unwrap(),
            );
        }
        let scene = Scene::new(None, None, clutter_t, clutter_r, 1.0).unwrap();
        Fixture { system, feeder, profile, scene, dir_t, dir_r }
    }

    fn bank_for(fx: &Fixture, oversampling: usize, eta: f64) -> DetectorBank {
        let disturbance = build_covariance(&fx.scene, &fx.profile, &fx.system, &fx.feeder).unwrap();
        let grid = DopplerGrid::unambiguous(PRI, fx.profile.pulses(), oversampling).unwrap();
        DetectorBank::build(
            &fx.system,
            &fx.feeder,
            &fx.profile,
            disturbance,
            fx.dir_t,
            fx.dir_r,
            grid,
            eta,
        )
        .unwrap()
    }

    #[test]
    fn velocity_mapping_matches_reported_scale() {
        let v = doppler_to_velocity(1000.0, 28.0e9);
        assert!((v - 5.353).abs() < 0.05, "velocity {v}");
        assert_eq!(doppler_to_velocity(0.0, 28.0e9), 0.0);
        assert!((doppler_to_velocity(2000.0, 28.0e9) - 2.0 * v).abs() < 1e-12);
    }

    #[test]
    fn doppler_resolution_follows_the_policy() {
        assert!((doppler_resolution_hz(PolicyKind::Simultaneous, 16, PRI) - 125.0).abs() < 1e-9);
        assert!((doppler_resolution_hz(PolicyKind::Sequential, 16, PRI) - 250.0).abs() < 1e-9);
    }

    #[test]
    fn unambiguous_grid_stays_inside_the_interval() {
        let grid = DopplerGrid::unambiguous(PRI, 8, 8).unwrap();
        assert_eq!(grid.len(), 8 * 8 - 1);
        assert!(grid.values().iter().all(|v| v.abs() < 1000.0));
        assert_eq!(grid.index_of(0.0), Some(grid.len() / 2));
        assert_eq!(grid.index_of(grid.step() * 0.4), None);
    }

    #[test]
    fn clutter_free_norms_reduce_to_scaled_energy() {
        let mut fx = fixture(PolicyKind::Simultaneous, 8, 0, 51);
        fx.scene.noise_variance = 2.0;
        let bank = bank_for(&fx, 8, 0.0);
        let grid = bank.grid().clone();
        let template =
            SteeringTemplate::for_cell(&fx.system, &fx.feeder, &fx.profile, fx.dir_t).unwrap();
        for &nu in grid.values().iter().step_by(7) {
            let n = bank.whitened_norm_sqr(HalfSpace::Transmissive, nu).unwrap();
            let expect = template.norm_sqr() / 2.0;
            assert!((n - expect).abs() <= 1e-9 * expect);
        }
    }

    #[test]
    fn sequential_cross_terms_vanish_exactly() {
        let fx = fixture(PolicyKind::Sequential, 8, 5, 52);
        let bank = bank_for(&fx, 8, 0.0);
        for rho in &bank.rho {
            assert_eq!(rho.re, 0.0);
            assert_eq!(rho.im, 0.0);
        }
    }

    #[test]
    fn statistics_vanish_on_a_dark_observation() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 3, 53);
        let bank = bank_for(&fx, 8, 1.0);
        let y = vec![Complex64::new(0.0, 0.0); bank.dim()];
        let nu = bank.grid().values()[5];
        assert_eq!(bank.single_statistic(HalfSpace::Transmissive, nu, &y).unwrap(), 0.0);
        assert_eq!(bank.pair_statistic(nu, nu, &y).unwrap(), 0.0);
        let decision = bank.gic_decide(&y);
        assert_eq!(decision.hypothesis, Hypothesis::H0);
        assert_eq!(decision.doppler_t, None);
        assert_eq!(decision.doppler_r, None);
    }

    #[test]
    fn matched_observation_attains_the_whitened_norm() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 4, 54);
        let bank = bank_for(&fx, 8, 0.0);
        let disturbance = build_covariance(&fx.scene, &fx.profile, &fx.system, &fx.feeder).unwrap();
        let template =
            SteeringTemplate::for_cell(&fx.system, &fx.feeder, &fx.profile, fx.dir_t).unwrap();
        let nu = bank.grid().values()[10];
        let h = template.materialize(nu);
        let stat = bank.single_statistic(HalfSpace::Transmissive, nu, &h).unwrap();
        let expect = disturbance.inv_quad_form(&h);
        assert!((stat - expect).abs() <= 1e-9 * expect, "stat {stat} expect {expect}");
        let n = bank.whitened_norm_sqr(HalfSpace::Transmissive, nu).unwrap();
        assert!((n - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn whitened_noise_statistic_has_unit_mean() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 4, 55);
        let bank = bank_for(&fx, 8, 0.0);
        let disturbance = build_covariance(&fx.scene, &fx.profile, &fx.system, &fx.feeder).unwrap();
        let nu = bank.grid().values()[20];
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let trials = 10_000;
        let mut mean = 0.0;
        for _ in 0..trials {
            let y = crate::scene::synthesize_observation(
                &fx.scene,
                &fx.profile,
                &fx.system,
                &fx.feeder,
                &mut rng,
            )
            .unwrap();
            mean += bank.single_statistic(HalfSpace::Transmissive, nu, &y).unwrap();
        }
        mean /= trials as f64;
        let _ = disturbance;
        assert!((mean - 1.0).abs() < 0.05, "mean statistic {mean}");
    }

    #[test]
    fn strong_single_target_is_declared_with_its_doppler() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 3, 57);
        let bank = bank_for(&fx, 8, 10.0);
        let template =
            SteeringTemplate::for_cell(&fx.system, &fx.feeder, &fx.profile, fx.dir_t).unwrap();
        let nu = bank.grid().values()[48];
        let beta = 40.0 / template.norm_sqr().sqrt();
        let y: Vec<Complex64> =
            template.materialize(nu).iter().map(|h| h * Complex64::new(beta, 0.0)).collect();
        let decision = bank.gic_decide(&y);
        assert_eq!(decision.hypothesis, Hypothesis::H1T);
        assert_eq!(decision.doppler_t, Some(nu));
        assert_eq!(decision.doppler_r, None);
        let v = decision.velocity_t.unwrap();
        assert!((v - doppler_to_velocity(nu, fx.system.carrier_hz)).abs() < 1e-12);
    }

    #[test]
    fn two_strong_targets_are_declared_jointly() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 3, 58);
        let bank = bank_for(&fx, 8, 10.0);
        let tmpl_t =
            SteeringTemplate::for_cell(&fx.system, &fx.feeder, &fx.profile, fx.dir_t).unwrap();
        let tmpl_r =
            SteeringTemplate::for_cell(&fx.system, &fx.feeder, &fx.profile, fx.dir_r).unwrap();
        let grid = bank.grid().clone();
        let nu_t = grid.values()[44];
        let nu_r = grid.values()[52];
        let mut y = vec![Complex64::new(0.0, 0.0); bank.dim()];
        let amp_t = Complex64::new(40.0 / tmpl_t.norm_sqr().sqrt(), 0.0);
        let amp_r = Complex64::new(0.0, 40.0 / tmpl_r.norm_sqr().sqrt());
        crate::linalg::axpy(&mut y, amp_t, &tmpl_t.materialize(nu_t));
        crate::linalg::axpy(&mut y, amp_r, &tmpl_r.materialize(nu_r));
        let decision = bank.gic_decide(&y);
        assert_eq!(decision.hypothesis, Hypothesis::H2);
        assert_eq!(decision.doppler_t, Some(nu_t));
        assert_eq!(decision.doppler_r, Some(nu_r));
    }

    #[test]
    fn pair_statistic_dominates_singles() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 4, 59);
        let bank = bank_for(&fx, 8, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let grid = bank.grid().clone();
        for _ in 0..20 {
            let y: Vec<Complex64> =
                (0..bank.dim()).map(|_| complex_normal(&mut rng, 1.0)).collect();
            let i = rng.random_range(0..grid.len());
            let j = rng.random_range(0..grid.len());
            let nu_t = grid.values()[i];
            let nu_r = grid.values()[j];
            let pair = bank.pair_statistic(nu_t, nu_r, &y).unwrap();
            let single_t = bank.single_statistic(HalfSpace::Transmissive, nu_t, &y).unwrap();
            let single_r = bank.single_statistic(HalfSpace::Reflective, nu_r, &y).unwrap();
            assert!(pair >= single_t.max(single_r) - 1e-9);
        }
    }

    #[test]
    fn sequential_pair_statistic_splits_exactly() {
        let fx = fixture(PolicyKind::Sequential, 8, 4, 61);
        let bank = bank_for(&fx, 8, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let grid = bank.grid().clone();
        for _ in 0..10 {
            let y: Vec<Complex64> =
                (0..bank.dim()).map(|_| complex_normal(&mut rng, 1.0)).collect();
            let nu_t = grid.values()[rng.random_range(0..grid.len())];
            let nu_r = grid.values()[rng.random_range(0..grid.len())];
            let pair = bank.pair_statistic(nu_t, nu_r, &y).unwrap();
            let sum = bank.single_statistic(HalfSpace::Transmissive, nu_t, &y).unwrap()
                + bank.single_statistic(HalfSpace::Reflective, nu_r, &y).unwrap();
            assert_eq!(pair, sum);
        }
    }

    #[test]
    fn unit_phase_rescaling_leaves_the_decision_unchanged() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 4, 63);
        let bank = bank_for(&fx, 8, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for _ in 0..10 {
            let y: Vec<Complex64> =
                (0..bank.dim()).map(|_| complex_normal(&mut rng, 2.0)).collect();
            let rotated: Vec<Complex64> = {
                let phase = Complex64::from_polar(1.0, rng.random_range(-3.0..3.0));
                y.iter().map(|v| v * phase).collect()
            };
            let a = bank.gic_decide(&y);
            let b = bank.gic_decide(&rotated);
            assert_eq!(a.hypothesis, b.hypothesis);
            assert_eq!(a.doppler_t, b.doppler_t);
            assert_eq!(a.doppler_r, b.doppler_r);
        }
    }

    #[test]
    fn raising_the_penalty_only_sheds_targets() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 4, 65);
        let bank = bank_for(&fx, 8, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        for _ in 0..50 {
            let y: Vec<Complex64> =
                (0..bank.dim()).map(|_| complex_normal(&mut rng, 4.0)).collect();
            let maxima = bank.evaluate(&y).maxima;
            let mut previous = usize::MAX;
            for step in 0..40 {
                let eta = step as f64 * 0.5;
                let (hypothesis, _) = decide_from_maxima(&maxima, eta);
                let count = hypothesis.declared_targets();
                assert!(count <= previous.min(2), "count grew when the penalty rose");
                previous = count;
            }
        }
    }

    #[test]
    fn sequential_and_joint_decisions_agree() {
        let fx = fixture(PolicyKind::Sequential, 8, 4, 67);
        let bank = bank_for(&fx, 8, 6.0);
        let tmpl_t =
            SteeringTemplate::for_cell(&fx.system, &fx.feeder, &fx.profile, fx.dir_t).unwrap();
        let tmpl_r =
            SteeringTemplate::for_cell(&fx.system, &fx.feeder, &fx.profile, fx.dir_r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(68);
        let grid = bank.grid().clone();
        for trial in 0..200 {
            let mut y = crate::scene::synthesize_observation(
                &fx.scene,
                &fx.profile,
                &fx.system,
                &fx.feeder,
                &mut rng,
            )
            .unwrap();
            // Mix in targets of varying strength so every hypothesis shows up.
            if trial % 4 >= 1 {
                let nu = grid.values()[rng.random_range(0..grid.len())];
                let a = complex_normal(&mut rng, 30.0 / tmpl_t.norm_sqr());
                crate::linalg::axpy(&mut y, a, &tmpl_t.materialize(nu));
            }
            if trial % 4 >= 2 {
                let nu = grid.values()[rng.random_range(0..grid.len())];
                let a = complex_normal(&mut rng, 30.0 / tmpl_r.norm_sqr());
                crate::linalg::axpy(&mut y, a, &tmpl_r.materialize(nu));
            }
            let joint = bank.gic_decide(&y);
            let separable = bank.sequential_decide(&y).unwrap();
            assert_eq!(joint.hypothesis, separable.hypothesis);
            assert_eq!(joint.doppler_t, separable.doppler_t);
            assert_eq!(joint.doppler_r, separable.doppler_r);
        }
    }

    #[test]
    fn strong_reflective_target_flips_the_sequential_tests() {
        let fx = fixture(PolicyKind::Sequential, 8, 3, 69);
        let bank = bank_for(&fx, 8, 8.0);
        let tmpl_r =
            SteeringTemplate::for_cell(&fx.system, &fx.feeder, &fx.profile, fx.dir_r).unwrap();
        let nu = bank.grid().values()[40];
        let beta = 50.0 / tmpl_r.norm_sqr().sqrt();
        let y: Vec<Complex64> =
            tmpl_r.materialize(nu).iter().map(|h| h * Complex64::new(beta, 0.0)).collect();
        let decision = bank.sequential_decide(&y).unwrap();
        assert_eq!(decision.hypothesis, Hypothesis::H1R);
        assert_eq!(decision.doppler_r, Some(nu));
    }

    #[test]
    fn sequential_decision_requires_the_matching_policy() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 2, 70);
        let bank = bank_for(&fx, 8, 1.0);
        let y = vec![Complex64::new(0.0, 0.0); bank.dim()];
        assert!(bank.sequential_decide(&y).is_err());
    }

    #[test]
    fn off_grid_doppler_queries_are_rejected() {
        let fx = fixture(PolicyKind::Simultaneous, 8, 2, 71);
        let bank = bank_for(&fx, 8, 1.0);
        let y = vec![Complex64::new(0.0, 0.0); bank.dim()];
        let off = bank.grid().values()[3] + 0.37 * bank.grid().step();
        assert!(bank.single_statistic(HalfSpace::Transmissive, off, &y).is_err());
    }
}
