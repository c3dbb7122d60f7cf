//! Uniform rectangular array geometry and far-field steering vectors.
//!
//! Both the STAR-RIS and the collocated receive array live in the (y,z)-plane
//! of a Cartesian frame whose positive x-axis points into the reflective
//! half-space. Directions carry an azimuth/elevation pair; the azimuth range
//! determines which half-space a direction belongs to.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::{RadarError, Result};

/// The two regions separated by the surface plane.
///
/// Reflective directions have azimuth in (-pi/2, pi/2); transmissive
/// directions have azimuth in (pi/2, 3*pi/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfSpace {
    Transmissive,
    Reflective,
}

impl std::fmt::Display for HalfSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HalfSpace::Transmissive => write!(f, "transmissive"),
            HalfSpace::Reflective => write!(f, "reflective"),
        }
    }
}

/// A far-field look direction.
///
/// Azimuth is the angle between the x-axis and the projection of the
/// direction onto the (x,y)-plane, positive towards +y; elevation is the
/// angle towards +z. Azimuth is normalized into [-pi/2, 3*pi/2) on
/// construction, and directions on the array plane itself (azimuth exactly
/// +-pi/2) are rejected, so every `Direction` has a well-defined half-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth: f64,
    elevation: f64,
}

impl Direction {
    /// Build a direction from angles in radians.
    pub fn new(azimuth_rad: f64, elevation_rad: f64) -> Result<Self> {
        if !azimuth_rad.is_finite() || !elevation_rad.is_finite() {
            return Err(RadarError::InvalidConfiguration(
                "direction angles must be finite".into(),
            ));
        }
        if elevation_rad <= -FRAC_PI_2 || elevation_rad >= FRAC_PI_2 {
            return Err(RadarError::InvalidConfiguration(format!(
                "elevation {elevation_rad} rad outside the open interval (-pi/2, pi/2)"
            )));
        }
        // Normalize azimuth into [-pi/2, 3*pi/2).
        let azimuth = (azimuth_rad + FRAC_PI_2).rem_euclid(TAU) - FRAC_PI_2;
        if azimuth == -FRAC_PI_2 || azimuth == FRAC_PI_2 {
            return Err(RadarError::InvalidConfiguration(format!(
                "azimuth {azimuth_rad} rad lies on the array plane; no half-space applies"
            )));
        }
        Ok(Self { azimuth, elevation: elevation_rad })
    }

    /// Build a direction from angles in degrees.
    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    /// Half-space this direction points into, classified by azimuth.
    pub fn half_space(&self) -> HalfSpace {
        if self.azimuth > -FRAC_PI_2 && self.azimuth < FRAC_PI_2 {
            HalfSpace::Reflective
        } else {
            HalfSpace::Transmissive
        }
    }

    /// Unit vector pointing towards the direction.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (az, el) = (self.azimuth, self.elevation);
        [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
    }
}

/// A uniform rectangular array in the (y,z)-plane, centered on its centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    n_y: usize,
    n_z: usize,
    spacing_y: f64,
    spacing_z: f64,
    positions: Vec<[f64; 3]>,
}

impl ArrayGeometry {
    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    /// Total element count `n_y * n_z`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn spacing_y(&self) -> f64 {
        self.spacing_y
    }

    pub fn spacing_z(&self) -> f64 {
        self.spacing_z
    }

    /// Element positions in meters. Element `n = iy * n_z + iz` sits at row
    /// `iy` along y and column `iz` along z (z varies fastest); this ordering
    /// is fixed so stacked vectors are bit-for-bit reproducible.
    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }
}

/// Lay out a centroid-centered uniform rectangular grid of `n_y * n_z`
/// elements in the (y,z)-plane.
pub fn ura_positions(
    n_y: usize,
    n_z: usize,
    spacing_y: f64,
    spacing_z: f64,
) -> Result<ArrayGeometry> {
    if n_y == 0 || n_z == 0 {
        return Err(RadarError::InvalidConfiguration(
            "array element counts must be at least 1".into(),
        ));
    }
    if spacing_y <= 0.0 || spacing_z <= 0.0 {
        return Err(RadarError::InvalidConfiguration(
            "array element spacings must be positive".into(),
        ));
    }
    let off_y = (n_y as f64 - 1.0) / 2.0;
    let off_z = (n_z as f64 - 1.0) / 2.0;
    let mut positions = Vec::with_capacity(n_y * n_z);
    for iy in 0..n_y {
        for iz in 0..n_z {
            positions.push([
                0.0,
                (iy as f64 - off_y) * spacing_y,
                (iz as f64 - off_z) * spacing_z,
            ]);
        }
    }
    Ok(ArrayGeometry { n_y, n_z, spacing_y, spacing_z, positions })
}

/// Far-field steering vector of an array towards a direction.
#[derive(Debug, Clone)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub direction: Direction,
    pub wavelength: f64,
}

/// Far-field steering vector: entry `n` is
/// `exp(+i * 2*pi/wavelength * <position_n, k>)` with `k` the unit vector of
/// the direction. All entries have unit modulus.
pub fn steering_vector(
    geometry: &ArrayGeometry,
    direction: Direction,
    wavelength: f64,
) -> SteeringVector {
    assert!(wavelength > 0.0, "wavelength must be positive");
    let k = direction.unit_vector();
    let scale = TAU / wavelength;
    let entries = geometry
        .positions()
        .iter()
        .map(|p| {
            let phase = scale * (p[0] * k[0] + p[1] * k[1] + p[2] * k[2]);
            Complex64::from_polar(1.0, phase)
        })
        .collect();
    SteeringVector { entries, direction, wavelength }
}
