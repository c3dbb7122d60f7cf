//! Disturbance (clutter plus noise) second-order model with fast whitened
//! solves.
//!
//! The disturbance covariance is `C = noise_variance * I + H D H^H` where the
//! columns of `H` are the space-time steering vectors of the clutter
//! discretes and `D` holds their power. With `K` clutter columns in an
//! ambient dimension of `pulses * antennas`, solves against `C` go through
//! the matrix-inversion lemma: only a `K x K` Hermitian factorization is ever
//! formed, so the per-observation cost is linear in the ambient dimension.
//! A dense materialization exists as a test oracle.

use nalgebra::{DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::array::HalfSpace;
use crate::error::{RadarError, Result};
use crate::linalg::{axpy, cdot, norm_sqr};
use crate::ris::{FeederChannel, StarRisProfile};
use crate::scene::Scene;
use crate::steering::{PulseWindow, SteeringTemplate};
use crate::system::RadarSystem;

/// One clutter discrete: its factored steering template, Doppler, and power.
#[derive(Debug, Clone)]
pub struct ClutterColumn {
    pub template: SteeringTemplate,
    pub doppler_hz: f64,
    pub variance: f64,
    pub half: HalfSpace,
}

/// Low-rank representation of the disturbance covariance over a pulse
/// window, with cached factorization of the `K x K` capacitance matrix
/// `M = noise_variance * D^-1 + H^H H`.
#[derive(Debug, Clone)]
pub struct DisturbanceModel {
    noise_variance: f64,
    columns: Vec<ClutterColumn>,
    materialized: Vec<Vec<Complex64>>,
    gram_chol: Option<nalgebra::Cholesky<Complex64, Dyn>>,
    window: PulseWindow,
    n_rx: usize,
}

impl DisturbanceModel {
    /// Build from clutter columns over a pulse window. Columns with zero
    /// power are dropped; they contribute nothing to the covariance.
    pub fn from_columns(
        noise_variance: f64,
        columns: Vec<ClutterColumn>,
        window: PulseWindow,
        n_rx: usize,
    ) -> Result<Self> {
        if noise_variance <= 0.0 {
            return Err(RadarError::InvalidConfiguration("noise variance must be positive".into()));
        }
        let columns: Vec<ClutterColumn> =
            columns.into_iter().filter(|c| c.variance > 0.0).collect();
        let materialized: Vec<Vec<Complex64>> = columns
            .iter()
            .map(|c| c.template.materialize_window(c.doppler_hz, window))
            .collect();
        let k = columns.len();
        let gram_chol = if k == 0 {
            None
        } else {
            let mut m = DMatrix::<Complex64>::zeros(k, k);
            for i in 0..k {
                for j in i..k {
                    let a = &columns[i];
                    let b = &columns[j];
                    let inner = a.template.inner(a.doppler_hz, &b.template, b.doppler_hz, window);
                    m[(i, j)] = inner;
                    m[(j, i)] = inner.conj();
                }
                m[(i, i)] += Complex64::new(noise_variance / columns[i].variance, 0.0);
            }
            Some(m.cholesky().ok_or_else(|| {
                RadarError::InvalidConfiguration(
                    "clutter capacitance matrix is not positive definite".into(),
                )
            })?)
        };
        Ok(Self { noise_variance, columns, materialized, gram_chol, window, n_rx })
    }

    /// Ambient dimension `window.len * antennas`.
    pub fn dim(&self) -> usize {
        self.window.len * self.n_rx
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ClutterColumn] {
        &self.columns
    }

    pub fn window(&self) -> PulseWindow {
        self.window
    }

    /// Clutter steering columns, materialized (dimension `dim x K`).
    pub fn column_vectors(&self) -> &[Vec<Complex64>] {
        &self.materialized
    }

    /// `H^H v`.
    pub(crate) fn project(&self, v: &[Complex64]) -> DVector<Complex64> {
        DVector::from_iterator(
            self.materialized.len(),
            self.materialized.iter().map(|col| cdot(col, v)),
        )
    }

    /// `M^-1 b` through the cached factorization.
    pub(crate) fn gram_solve(&self, b: &DVector<Complex64>) -> DVector<Complex64> {
        match &self.gram_chol {
            Some(chol) => chol.solve(b),
            None => b.clone(),
        }
    }

    /// `C^-1 v` by the matrix-inversion lemma.
    pub fn solve(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim(), "solve dimension mismatch");
        let mut out = v.to_vec();
        if !self.columns.is_empty() {
            let coeffs = self.gram_solve(&self.project(v));
            for (col, c) in self.materialized.iter().zip(coeffs.iter()) {
                axpy(&mut out, -c, col);
            }
        }
        let inv = 1.0 / self.noise_variance;
        for x in &mut out {
            *x *= inv;
        }
        out
    }

    /// Quadratic form `v^H C^-1 v` (clamped at zero against rounding).
    pub fn inv_quad_form(&self, v: &[Complex64]) -> f64 {
        assert_eq!(v.len(), self.dim(), "quadratic form dimension mismatch");
        let mut value = norm_sqr(v);
        if !self.columns.is_empty() {
            let b = self.project(v);
            let w = self.gram_solve(&b);
            value -= b.dotc(&w).re;
        }
        (value / self.noise_variance).max(0.0)
    }

    /// Whitened norm `||C^{-1/2} v|| = sqrt(v^H C^-1 v)`; no square-root
    /// factor is ever formed.
    pub fn whitened_norm(&self, v: &[Complex64]) -> f64 {
        self.inv_quad_form(v).sqrt()
    }

    /// Bilinear form `a^H C^-1 b`.
    pub fn inv_inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        assert_eq!(a.len(), self.dim());
        assert_eq!(b.len(), self.dim());
        let mut value = cdot(a, b);
        if !self.columns.is_empty() {
            let ba = self.project(a);
            let wb = self.gram_solve(&self.project(b));
            value -= ba.dotc(&wb);
        }
        value / self.noise_variance
    }

    /// Restrict the model to a pulse window, keeping only the clutter of one
    /// half-space. Used by the separable detector under sequential scanning,
    /// where the covariance is block-diagonal across the two half trains.
    pub(crate) fn restricted(&self, window: PulseWindow, keep: HalfSpace) -> Result<Self> {
        let columns: Vec<ClutterColumn> =
            self.columns.iter().filter(|c| c.half == keep).cloned().collect();
        Self::from_columns(self.noise_variance, columns, window, self.n_rx)
    }

    /// Dense covariance `C`, intended for small-dimension oracle checks.
    pub fn materialize_dense(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut c = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(self.noise_variance, 0.0);
        for (col, meta) in self.materialized.iter().zip(&self.columns) {
            let v = meta.variance;
            for i in 0..dim {
                let ci = col[i];
                for j in 0..dim {
                    c[(i, j)] += v * ci * col[j].conj();
                }
            }
        }
        c
    }
}

/// Assemble the disturbance model of a scene over the full pulse train:
/// clutter steering columns weighted by their expected power on top of the
/// white noise floor.
pub fn build_covariance(
    scene: &Scene,
    profile: &StarRisProfile,
    system: &RadarSystem,
    feeder: &FeederChannel,
) -> Result<DisturbanceModel> {
    let window = PulseWindow::full(profile.pulses());
    let mut columns = Vec::with_capacity(scene.clutter_t.len() + scene.clutter_r.len());
    for (list, half) in [
        (&scene.clutter_t, HalfSpace::Transmissive),
        (&scene.clutter_r, HalfSpace::Reflective),
    ] {
        for c in list.iter() {
            columns.push(ClutterColumn {
                template: SteeringTemplate::for_cell(system, feeder, profile, c.direction)?,
                doppler_hz: c.doppler_hz,
                variance: c.amplitude.second_moment(),
                half,
            });
        }
    }
    DisturbanceModel::from_columns(scene.noise_variance, columns, window, system.rx.len())
}
