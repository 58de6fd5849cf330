//! Inter-satellite spacing that makes the receive steering vectors orthogonal.
//!
//! Two satellites are separated in the receiver's beamspace by
//! `Δφ = cos θ_lead − cos θ_trail`. Their steering vectors are orthogonal when
//! `Δφ = 2k/Nr` with `k mod Nr ≠ 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polar_from_elevation, polar_spacing, slant_range, OrbitConfig, SwarmGeometry};
use crate::linalg::{gram, CMatrix};

/// Upper end of the search bracket, m.
pub const MAX_SEARCH_DISTANCE: f64 = 500e3;
const MAX_ITER: usize = 100;
const MONOTONICITY_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingQuery {
    /// Elevation of the leading satellite, rad.
    pub elevation: f64,
    pub rx_antennas: usize,
    pub orbit: OrbitConfig,
    /// Harmonic k of the orthogonality condition.
    pub harmonic: u32,
}

impl SpacingQuery {
    pub fn new(elevation: f64, rx_antennas: usize, orbit: OrbitConfig) -> Self {
        Self {
            elevation,
            rx_antennas,
            orbit,
            harmonic: 1,
        }
    }

    pub fn with_harmonic(mut self, k: u32) -> Self {
        self.harmonic = k;
        self
    }

    pub fn target(&self) -> f64 {
        2.0 * self.harmonic as f64 / self.rx_antennas as f64
    }

    fn validate(&self) -> Result<()> {
        if self.rx_antennas == 0 {
            return Err(Error::InvalidConfig("receiver needs at least one antenna".into()));
        }
        if self.harmonic == 0 || self.harmonic as usize % self.rx_antennas == 0 {
            return Err(Error::InvalidConfig(format!(
                "harmonic k={} must be positive with k mod Nr ≠ 0 (Nr={})",
                self.harmonic, self.rx_antennas
            )));
        }
        if !(self.elevation > 0.0 && self.elevation < std::f64::consts::PI) {
            return Err(Error::InvalidConfig(format!(
                "elevation {:.4} deg outside the visible range",
                self.elevation.to_degrees()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingResult {
    /// Smallest orthogonalizing distance, m.
    pub ds_orth: f64,
    pub delta_phi_achieved: f64,
    pub iterations: usize,
}

/// `cos θ` of a satellite at polar angle ϑ, from the receiver-relative position.
fn cos_elevation(polar_angle: f64, orbit: &OrbitConfig) -> f64 {
    orbit.orbital_radius() * polar_angle.cos() / slant_range(polar_angle, orbit)
}

/// Largest distance that keeps a trailing satellite above the horizon.
fn horizon_limited_distance(theta_lead: f64, orbit: &OrbitConfig) -> f64 {
    let (_, vis_hi) = orbit.visible_polar_range();
    let gap = (vis_hi - polar_from_elevation(theta_lead, orbit)).max(0.0);
    2.0 * orbit.orbital_radius() * (0.5 * gap).sin()
}

/// `Δφ` between a satellite at elevation `theta_lead` and one trailing it at
/// chord distance `distance`.
pub fn delta_phi(theta_lead: f64, distance: f64, orbit: &OrbitConfig) -> Result<f64> {
    let polar = polar_from_elevation(theta_lead, orbit);
    let trailing = polar + polar_spacing(distance, orbit)?;
    if !orbit.is_visible(trailing) {
        return Err(Error::InvalidConfig(format!(
            "trailing satellite {:.3} km behind elevation {:.4} deg is below the horizon",
            distance * 1e-3,
            theta_lead.to_degrees()
        )));
    }
    Ok(cos_elevation(polar, orbit) - cos_elevation(trailing, orbit))
}

/// Smallest distance with `Δφ = 2k/Nr`, found by bisection on
/// `(0, min(500 km, horizon limit)]`.
pub fn optimal_spacing(query: &SpacingQuery) -> Result<SpacingResult> {
    query.validate()?;
    let orbit = &query.orbit;
    let theta = query.elevation;
    let target = query.target();
    let upper = MAX_SEARCH_DISTANCE.min(horizon_limited_distance(theta, orbit));
    if upper <= 0.0 {
        return Err(Error::NoRoot(format!(
            "no room behind a satellite at elevation {:.4} deg",
            theta.to_degrees()
        )));
    }

    let mut previous = 0.0;
    for i in 1..=MONOTONICITY_SAMPLES {
        let v = delta_phi(theta, upper * i as f64 / MONOTONICITY_SAMPLES as f64, orbit)?;
        if v <= previous {
            return Err(Error::Numerical(format!(
                "Δφ not increasing in distance at elevation {:.4} deg",
                theta.to_degrees()
            )));
        }
        previous = v;
    }
    if previous < target {
        return Err(Error::NoRoot(format!(
            "Δφ = {target} unreachable at elevation {:.4} deg (max {previous:.6} at {:.3} km)",
            theta.to_degrees(),
            upper * 1e-3
        )));
    }

    let (mut lo, mut hi) = (0.0, upper);
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if delta_phi(theta, mid, orbit)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d_lo = delta_phi(theta, lo, orbit)?;
    let d_hi = delta_phi(theta, hi, orbit)?;
    let (ds_orth, achieved) = if (d_lo - target).abs() < (d_hi - target).abs() {
        (lo, d_lo)
    } else {
        (hi, d_hi)
    };
    Ok(SpacingResult {
        ds_orth,
        delta_phi_achieved: achieved,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxedCheck {
    pub satisfied: bool,
    /// Smallest `Δφ` between neighbours; infinite for a single satellite.
    pub min_delta_phi: f64,
}

/// Whether every pair of neighbours is at least `2/Nr` apart in beamspace.
pub fn relaxed_check(swarm: &SwarmGeometry, rx_antennas: usize) -> RelaxedCheck {
    let min_delta_phi = swarm
        .satellites
        .windows(2)
        .map(|w| (w[0].elevation.cos() - w[1].elevation.cos()).abs())
        .fold(f64::INFINITY, f64::min);
    RelaxedCheck {
        satisfied: min_delta_phi >= 2.0 / rx_antennas as f64,
        min_delta_phi,
    }
}

/// `‖A^H A / Nr − I‖_F / ‖I‖_F`, zero for an orthogonal steering set.
pub fn orthogonality_defect(a: &CMatrix) -> f64 {
    let ns = a.ncols();
    if ns == 0 {
        return 0.0;
    }
    let mut m = gram(a) / Complex64::new(a.nrows() as f64, 0.0);
    for i in 0..ns {
        m[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    m.norm() / (ns as f64).sqrt()
}
