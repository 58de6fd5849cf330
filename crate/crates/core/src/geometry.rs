//! In-plane geometry of a trail-formation swarm and a ground receiver.
//!
//! Coordinates are Earth-centered and two-dimensional: the orbit lies in the
//! xy-plane, satellites sit at `(r0 cos ϑ, r0 sin ϑ)` and the receiver at
//! `(0, rE)`. The elevation θ is the polar angle of a satellite seen from the
//! receiver, so θ ∈ [0, π] covers the visible arc from horizon to horizon.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::EARTH_RADIUS;

const PLACEMENT_TOL: f64 = 1e-9;
const PLACEMENT_MAX_ITER: usize = 200;
const INVERSE_TOL: f64 = 1e-12;
const INVERSE_MAX_ITER: usize = 50;
/// Slack for angles that land on an interval edge through rounding.
const ANGLE_SLACK: f64 = 1e-12;

/// Circular orbit of the swarm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    /// Altitude above the Earth's surface, m.
    pub altitude: f64,
    /// Earth radius, m.
    pub earth_radius: f64,
}

impl OrbitConfig {
    pub fn new(altitude: f64) -> Result<Self> {
        Self::with_earth_radius(altitude, EARTH_RADIUS)
    }

    pub fn with_earth_radius(altitude: f64, earth_radius: f64) -> Result<Self> {
        if !(altitude > 0.0 && altitude.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "orbit altitude must be positive, got {altitude} m"
            )));
        }
        if !(earth_radius > 0.0 && earth_radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "earth radius must be positive, got {earth_radius} m"
            )));
        }
        Ok(Self {
            altitude,
            earth_radius,
        })
    }

    /// Distance from the Earth's center to the satellites.
    pub fn orbital_radius(&self) -> f64 {
        self.earth_radius + self.altitude
    }

    /// Polar angles of the two horizon crossings, `[asin(rE/r0), π − asin(rE/r0)]`.
    pub fn visible_polar_range(&self) -> (f64, f64) {
        let edge = (self.earth_radius / self.orbital_radius()).asin();
        (edge, PI - edge)
    }

    pub fn is_visible(&self, polar_angle: f64) -> bool {
        let (lo, hi) = self.visible_polar_range();
        polar_angle >= lo - ANGLE_SLACK && polar_angle <= hi + ANGLE_SLACK
    }
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            altitude: 600e3,
            earth_radius: EARTH_RADIUS,
        }
    }
}

/// How a satellite's antenna array is rotated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointingPolicy {
    /// Boresight on the receiver at all times, so the AoD is zero.
    #[default]
    TrackReceiver,
    /// Constant rotation η in radians.
    FixedRotation(f64),
}

impl PointingPolicy {
    pub fn rotation(&self, elevation: f64) -> f64 {
        match *self {
            PointingPolicy::TrackReceiver => elevation - FRAC_PI_2,
            PointingPolicy::FixedRotation(eta) => eta,
        }
    }
}

/// One satellite at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteState {
    /// Earth-centered polar angle ϑ.
    pub polar_angle: f64,
    /// Angle of arrival θ at the receiver.
    pub elevation: f64,
    /// Distance to the receiver, m.
    pub slant_range: f64,
    /// Array rotation η; zero means parallel to the receiver array.
    pub rotation: f64,
    /// Angle of departure Θ relative to the array boresight.
    pub aod: f64,
}

impl SatelliteState {
    pub fn at_polar_angle(
        polar_angle: f64,
        orbit: &OrbitConfig,
        pointing: PointingPolicy,
    ) -> Result<Self> {
        let elevation = elevation_from_polar(polar_angle, orbit)?;
        let rotation = pointing.rotation(elevation);
        let aod = elevation - rotation - FRAC_PI_2;
        if aod.abs() > FRAC_PI_2 + ANGLE_SLACK {
            return Err(Error::InvalidConfig(format!(
                "rotation {rotation:.6} rad puts the receiver outside the transmit cone \
                 (AoD {aod:.6} rad at elevation {elevation:.6} rad)"
            )));
        }
        Ok(Self {
            polar_angle,
            elevation,
            slant_range: slant_range(polar_angle, orbit),
            rotation,
            aod,
        })
    }

    /// Satellite position relative to the receiver, m.
    pub fn relative_position(&self) -> [f64; 2] {
        [
            self.slant_range * self.elevation.cos(),
            self.slant_range * self.elevation.sin(),
        ]
    }
}

/// A trail formation at one instant, satellites ordered by polar angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmGeometry {
    pub orbit: OrbitConfig,
    pub satellites: Vec<SatelliteState>,
    /// Chord distance between neighbours, m.
    pub inter_sat_distance: f64,
    /// Polar-angle gap between neighbours.
    pub delta_polar: f64,
}

impl SwarmGeometry {
    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }

    pub fn elevations(&self) -> Vec<f64> {
        self.satellites.iter().map(|s| s.elevation).collect()
    }

    pub fn mean_elevation(&self) -> f64 {
        self.satellites.iter().map(|s| s.elevation).sum::<f64>() / self.len() as f64
    }

    /// Two or more satellites share an angle of arrival, so the geometric
    /// channel loses rank.
    pub fn is_degenerate(&self) -> bool {
        self.satellites
            .windows(2)
            .any(|w| w[0].elevation == w[1].elevation)
    }
}

/// Law of sines in the Earth-center/receiver/satellite triangle:
/// `ϑ = θ + asin(rE cos θ / r0)`.
pub fn polar_from_elevation(elevation: f64, orbit: &OrbitConfig) -> f64 {
    elevation + (orbit.earth_radius * elevation.cos() / orbit.orbital_radius()).asin()
}

/// `d = sqrt(d0² + 2 rE r0 (1 − sin ϑ))`.
pub fn slant_range(polar_angle: f64, orbit: &OrbitConfig) -> f64 {
    let d0 = orbit.altitude;
    let sq = d0 * d0
        + 2.0 * orbit.earth_radius * orbit.orbital_radius() * (1.0 - polar_angle.sin());
    sq.max(0.0).sqrt()
}

/// Inverse of [`polar_from_elevation`].
///
/// Starts from the exact `atan2` of the receiver-relative position and polishes
/// with Newton steps on the law-of-sines residual.
pub fn elevation_from_polar(polar_angle: f64, orbit: &OrbitConfig) -> Result<f64> {
    if !orbit.is_visible(polar_angle) {
        return Err(Error::InvalidConfig(format!(
            "satellite at polar angle {:.6} deg is below the horizon",
            polar_angle.to_degrees()
        )));
    }
    let r0 = orbit.orbital_radius();
    let re = orbit.earth_radius;
    let mut theta = (r0 * polar_angle.sin() - re)
        .max(0.0)
        .atan2(r0 * polar_angle.cos());
    for _ in 0..INVERSE_MAX_ITER {
        let residual = polar_from_elevation(theta, orbit) - polar_angle;
        if residual.abs() <= INVERSE_TOL {
            return Ok(theta.clamp(0.0, PI));
        }
        let c = re * theta.cos();
        let slope = 1.0 - re * theta.sin() / (r0 * r0 - c * c).sqrt();
        theta -= residual / slope;
    }
    Err(Error::NoConvergence(format!(
        "elevation for polar angle {polar_angle} rad"
    )))
}

/// Earth-centered angle between neighbours at chord distance `distance`:
/// `Δϑ = acos(1 − D²/(2 r0²))`, evaluated as `2 asin(D / (2 r0))` which
/// stays accurate for chords much shorter than the orbit radius.
pub fn polar_spacing(distance: f64, orbit: &OrbitConfig) -> Result<f64> {
    let r0 = orbit.orbital_radius();
    if !(0.0..=2.0 * r0).contains(&distance) {
        return Err(Error::InvalidConfig(format!(
            "inter-satellite distance {distance} m outside [0, {}] m",
            2.0 * r0
        )));
    }
    Ok(2.0 * (0.5 * distance / r0).asin())
}

fn mean_elevation_closed_form(center: f64, offsets: &[f64], orbit: &OrbitConfig) -> f64 {
    let r0 = orbit.orbital_radius();
    let re = orbit.earth_radius;
    offsets
        .iter()
        .map(|o| {
            let v = center + o;
            (r0 * v.sin() - re).max(0.0).atan2(r0 * v.cos())
        })
        .sum::<f64>()
        / offsets.len() as f64
}

/// Places `count` satellites spaced `distance` apart on the orbit such that
/// their mean angle of arrival equals `theta_mean`.
///
/// The swarm center's polar angle is found by bisection; the map from center
/// angle to mean elevation is monotone over the visible arc.
pub fn place_swarm(
    theta_mean: f64,
    distance: f64,
    count: usize,
    orbit: &OrbitConfig,
    pointing: PointingPolicy,
) -> Result<SwarmGeometry> {
    if count == 0 {
        return Err(Error::InvalidConfig("swarm needs at least one satellite".into()));
    }
    if !(0.0..=PI).contains(&theta_mean) {
        return Err(Error::InvalidConfig(format!(
            "mean elevation {theta_mean} rad outside [0, π]"
        )));
    }
    let delta_polar = polar_spacing(distance, orbit)?;
    let half_span = 0.5 * (count - 1) as f64 * delta_polar;
    let offsets: Vec<f64> = (0..count)
        .map(|i| i as f64 * delta_polar - half_span)
        .collect();

    let (vis_lo, vis_hi) = orbit.visible_polar_range();
    let mut lo = vis_lo + half_span;
    let mut hi = vis_hi - half_span;
    if lo > hi {
        return Err(Error::InvalidConfig(format!(
            "a swarm of {count} satellites spaced {:.3} km does not fit above the horizon",
            distance * 1e-3
        )));
    }
    let f_lo = mean_elevation_closed_form(lo, &offsets, orbit);
    let f_hi = mean_elevation_closed_form(hi, &offsets, orbit);
    if theta_mean < f_lo - PLACEMENT_TOL || theta_mean > f_hi + PLACEMENT_TOL {
        return Err(Error::InvalidConfig(format!(
            "mean elevation {:.4} deg is unreachable with every satellite above the horizon \
             (reachable [{:.4}, {:.4}] deg)",
            theta_mean.to_degrees(),
            f_lo.to_degrees(),
            f_hi.to_degrees()
        )));
    }

    let mut center = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..PLACEMENT_MAX_ITER {
        center = 0.5 * (lo + hi);
        let err = mean_elevation_closed_form(center, &offsets, orbit) - theta_mean;
        if err.abs() <= 1e-3 * PLACEMENT_TOL || hi - lo <= f64::EPSILON * center {
            converged = true;
            break;
        }
        if err < 0.0 {
            lo = center;
        } else {
            hi = center;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "swarm center for mean elevation {theta_mean} rad"
        )));
    }

    let satellites = offsets
        .iter()
        .map(|o| SatelliteState::at_polar_angle(center + o, orbit, pointing))
        .collect::<Result<Vec<_>>>()?;
    let swarm = SwarmGeometry {
        orbit: *orbit,
        satellites,
        inter_sat_distance: distance,
        delta_polar,
    };
    let achieved = swarm.mean_elevation();
    if (achieved - theta_mean).abs() > PLACEMENT_TOL {
        return Err(Error::NoConvergence(format!(
            "placed swarm has mean elevation {achieved} rad, wanted {theta_mean} rad"
        )));
    }
    Ok(swarm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orbit() -> OrbitConfig {
        OrbitConfig::new(600e3).unwrap()
    }

    /// Cartesian distance between the satellite and the receiver at `(0, rE)`.
    fn cartesian_distance(polar: f64, orbit: &OrbitConfig) -> f64 {
        let r0 = orbit.orbital_radius();
        let x = r0 * polar.cos();
        let y = r0 * polar.sin() - orbit.earth_radius;
        x.hypot(y)
    }

    #[test]
    fn zenith_is_fixed_point() {
        let o = orbit();
        assert!((polar_from_elevation(FRAC_PI_2, &o) - FRAC_PI_2).abs() < 1e-15);
        assert!((elevation_from_polar(FRAC_PI_2, &o).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((slant_range(FRAC_PI_2, &o) - 600e3).abs() < 1e-6);
    }

    #[test]
    fn horizon_elevation_polar() {
        let o = orbit();
        let expected = PI + (-o.earth_radius / o.orbital_radius()).asin();
        assert!((polar_from_elevation(PI, &o) - expected).abs() < 1e-15);
        assert!(expected < PI);
    }

    #[test]
    fn zero_altitude_zenith_range() {
        let o = OrbitConfig {
            altitude: 0.0,
            earth_radius: EARTH_RADIUS,
        };
        assert_eq!(slant_range(FRAC_PI_2, &o), 0.0);
        assert!(OrbitConfig::new(0.0).is_err());
    }

    #[test]
    fn thirty_degree_pin() {
        // Independent evaluation: ϑ = θ + asin(rE cos θ / r0) with rE = 6371 km,
        // r0 = 6971 km, θ = 30°.
        let o = orbit();
        let theta = 30f64.to_radians();
        let arg: f64 = 6371.0 * (3f64.sqrt() / 2.0) / 6971.0;
        let expected = theta + arg.asin();
        let polar = polar_from_elevation(theta, &o);
        assert!((polar - expected).abs() < 1e-14);
        // Frozen from a 40-digit evaluation.
        assert!((polar - 1.436_835_044_594_466_9).abs() < 1e-14);
        let d = slant_range(polar, &o);
        assert!((d - 1_075_088.016_929_118_7).abs() < 1e-6);
        let cart = cartesian_distance(polar, &o);
        assert!(((d - cart) / cart).abs() < 1e-6);
        assert!((elevation_from_polar(polar, &o).unwrap() - theta).abs() < 1e-10);
    }

    #[test]
    fn round_trip_named_angles() {
        let o = orbit();
        for deg in [40.0f64, 90.0, 140.0] {
            let t = deg.to_radians();
            let back = elevation_from_polar(polar_from_elevation(t, &o), &o).unwrap();
            assert!((back - t).abs() < 1e-10);
        }
    }

    #[test]
    fn below_horizon_rejected() {
        let o = orbit();
        let (lo, hi) = o.visible_polar_range();
        assert!(elevation_from_polar(lo - 1e-3, &o).is_err());
        assert!(elevation_from_polar(hi + 1e-3, &o).is_err());
        assert!(elevation_from_polar(lo, &o).unwrap().abs() < 1e-6);
    }

    #[test]
    fn single_satellite_at_zenith() {
        let o = orbit();
        let s = place_swarm(FRAC_PI_2, 50e3, 1, &o, PointingPolicy::TrackReceiver).unwrap();
        assert_eq!(s.len(), 1);
        let sat = s.satellites[0];
        assert!((sat.polar_angle - FRAC_PI_2).abs() < 1e-9);
        assert!((sat.slant_range - 600e3).abs() < 1e-2);
        assert!(sat.aod.abs() < 1e-15);
    }

    #[test]
    fn coincident_satellites_are_degenerate() {
        let o = orbit();
        let s = place_swarm(1.2, 0.0, 2, &o, PointingPolicy::TrackReceiver).unwrap();
        assert_eq!(s.satellites[0].elevation, s.satellites[1].elevation);
        assert!(s.is_degenerate());
    }

    #[test]
    fn three_satellite_mean_pinned() {
        let o = orbit();
        let s = place_swarm(FRAC_PI_2, 70e3, 3, &o, PointingPolicy::TrackReceiver).unwrap();
        assert!((s.mean_elevation() - FRAC_PI_2).abs() < 1e-9);
        assert!(!s.is_degenerate());
        // Symmetric about zenith.
        assert!((s.satellites[0].elevation + s.satellites[2].elevation - PI).abs() < 1e-9);
    }

    #[test]
    fn unreachable_mean_rejected() {
        let o = orbit();
        let err = place_swarm(0.01, 500e3, 3, &o, PointingPolicy::TrackReceiver).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        assert!(place_swarm(1.0, 1e3, 0, &o, PointingPolicy::TrackReceiver).is_err());
    }

    #[test]
    fn fixed_rotation_outside_cone_rejected() {
        let o = orbit();
        // η = π/2 at θ = 30° gives Θ = −π + 30°.
        let err = place_swarm(
            30f64.to_radians(),
            0.0,
            1,
            &o,
            PointingPolicy::FixedRotation(FRAC_PI_2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let ok = place_swarm(
            FRAC_PI_2,
            0.0,
            1,
            &o,
            PointingPolicy::FixedRotation(0.2),
        )
        .unwrap();
        assert!((ok.satellites[0].aod + 0.2).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn round_trip_identity(deg in 5.0f64..175.0) {
            let o = orbit();
            let t = deg.to_radians();
            let back = elevation_from_polar(polar_from_elevation(t, &o), &o).unwrap();
            prop_assert!((back - t).abs() < 1e-10);
        }

        #[test]
        fn slant_range_matches_cartesian(frac in 0.0f64..1.0, alt_km in 300.0f64..2000.0) {
            let o = OrbitConfig::new(alt_km * 1e3).unwrap();
            let (lo, hi) = o.visible_polar_range();
            let polar = lo + frac * (hi - lo);
            let cart = cartesian_distance(polar, &o);
            prop_assume!(cart > 1.0);
            let d = slant_range(polar, &o);
            prop_assert!(((d - cart) / cart).abs() < 1e-6);
        }

        #[test]
        fn placement_invariants(
            theta_deg in 30.0f64..150.0,
            ds_km in 0.5f64..120.0,
            count in 1usize..6,
        ) {
            let o = orbit();
            let s = place_swarm(theta_deg.to_radians(), ds_km * 1e3, count, &o, PointingPolicy::TrackReceiver).unwrap();
            prop_assert!((s.mean_elevation() - theta_deg.to_radians()).abs() < 1e-9);
            let r0 = o.orbital_radius();
            for w in s.satellites.windows(2) {
                let gap = w[1].polar_angle - w[0].polar_angle;
                prop_assert!((gap - s.delta_polar).abs() < 1e-12);
                let chord = 2.0 * r0 * (0.5 * gap).sin();
                prop_assert!(((chord - ds_km * 1e3) / (ds_km * 1e3)).abs() < 1e-6);
                // Elevation grows with polar angle across the visible arc.
                prop_assert!(w[1].elevation > w[0].elevation);
            }
            for sat in &s.satellites {
                prop_assert!(sat.aod.abs() <= FRAC_PI_2);
                prop_assert!(sat.slant_range > 0.0);
                prop_assert!((sat.aod - (sat.elevation - sat.rotation - FRAC_PI_2)).abs() < 1e-12);
                let lo = (-FRAC_PI_2).min(sat.elevation - PI);
                let hi = FRAC_PI_2.min(sat.elevation);
                prop_assert!(sat.rotation >= lo && sat.rotation <= hi);
            }
        }
    }
}
