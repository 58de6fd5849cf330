use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ArrayConfig, LossConfig};
use crate::error::{Error, Result};
use crate::geometry::{OrbitConfig, PointingPolicy};
use crate::units::{db_to_linear, km_to_m};

/// A complete experiment. File units: km, GHz, dBW and degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    #[serde(default = "defaults::trials")]
    pub trials: usize,
    pub num_satellites: usize,
    #[serde(default = "defaults::total_tx_antennas")]
    pub total_tx_antennas: usize,
    pub total_tx_power_dbw: f64,
    #[serde(default = "defaults::noise_power_dbw")]
    pub noise_power_dbw: f64,
    /// Edge of the pass used for time averaging.
    #[serde(default = "defaults::min_elevation_deg")]
    pub min_elevation_deg: f64,
    /// Fixed array rotation; satellites track the receiver when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_rotation_deg: Option<f64>,
    #[serde(default)]
    pub orbit: OrbitSection,
    #[serde(default)]
    pub arrays: ArraySection,
    #[serde(default)]
    pub loss: LossConfig,
    pub sweep: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitSection {
    pub altitude_km: f64,
    pub earth_radius_km: f64,
}

impl Default for OrbitSection {
    fn default() -> Self {
        Self {
            altitude_km: 600.0,
            earth_radius_km: 6371.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub rx_antennas: usize,
    pub carrier_frequency_ghz: f64,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            rx_antennas: 100,
            carrier_frequency_ghz: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Values are inter-satellite distances in km.
    InterSatDistance,
    /// Values are total transmit powers in dBW.
    TransmitPower,
    /// Values are mean elevations in degrees, one snapshot each.
    MeanElevationTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Mean elevation when not time averaging.
    #[serde(default = "defaults::fixed_theta_mean_deg")]
    pub fixed_theta_mean_deg: f64,
    /// Spacing for axes other than distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inter_sat_distance_km: Option<f64>,
    /// Average every point over the pass instead of one snapshot.
    #[serde(default)]
    pub time_average: bool,
    #[serde(default = "defaults::time_grid_points")]
    pub time_grid_points: usize,
}

mod defaults {
    pub fn trials() -> usize {
        200
    }
    pub fn total_tx_antennas() -> usize {
        60
    }
    pub fn noise_power_dbw() -> f64 {
        -120.0
    }
    pub fn min_elevation_deg() -> f64 {
        30.0
    }
    pub fn fixed_theta_mean_deg() -> f64 {
        90.0
    }
    pub fn time_grid_points() -> usize {
        121
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: defaults::trials(),
            num_satellites: 3,
            total_tx_antennas: defaults::total_tx_antennas(),
            total_tx_power_dbw: 10.0,
            noise_power_dbw: defaults::noise_power_dbw(),
            min_elevation_deg: defaults::min_elevation_deg(),
            fixed_rotation_deg: None,
            orbit: OrbitSection::default(),
            arrays: ArraySection::default(),
            loss: LossConfig::default(),
            sweep: SweepSpec {
                axis: SweepAxis::InterSatDistance,
                values: (1..=80).map(f64::from).collect(),
                fixed_theta_mean_deg: defaults::fixed_theta_mean_deg(),
                inter_sat_distance_km: None,
                time_average: false,
                time_grid_points: defaults::time_grid_points(),
            },
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

/// Sets `a.b.c = value` in a TOML table. The value is parsed as a TOML
/// literal and falls back to a bare string.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed table has the key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(invalid(format!("override key `{key}` is malformed")));
    }
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut node = table;
    for p in parents {
        node = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| invalid(format!("override `{key}`: `{p}` is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

impl ScenarioConfig {
    /// Parses a scenario, applies `key=value` overrides and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| invalid(format!("scenario file: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e| invalid(format!("scenario file: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, overrides)
            .map_err(|e| e.context(format!("loading {}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| invalid(format!("serializing scenario: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let ns = self.num_satellites;
        if ns == 0 {
            return Err(invalid("num_satellites must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.total_tx_antennas == 0 || self.total_tx_antennas % ns != 0 {
            return Err(invalid(format!(
                "total_tx_antennas = {} is not divisible by num_satellites = {ns}",
                self.total_tx_antennas
            )));
        }
        if self.arrays.rx_antennas < ns {
            return Err(invalid(format!(
                "rx_antennas = {} must be at least num_satellites = {ns}",
                self.arrays.rx_antennas
            )));
        }
        for (name, v) in [
            ("total_tx_power_dbw", self.total_tx_power_dbw),
            ("noise_power_dbw", self.noise_power_dbw),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        if !(self.min_elevation_deg > 0.0 && self.min_elevation_deg < 90.0) {
            return Err(invalid(format!(
                "min_elevation_deg = {} outside (0, 90)",
                self.min_elevation_deg
            )));
        }
        if let Some(r) = self.fixed_rotation_deg {
            if !r.is_finite() {
                return Err(invalid("fixed_rotation_deg must be finite"));
            }
        }
        self.orbit()?;
        self.arrays()?;
        self.loss.validate()?;
        self.validate_sweep()
    }

    fn validate_sweep(&self) -> Result<()> {
        let s = &self.sweep;
        if s.values.is_empty() {
            return Err(invalid("sweep.values is empty"));
        }
        if s.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sweep.values must be finite"));
        }
        if let Some(w) = s.values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(invalid(format!(
                "sweep.values must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if s.time_grid_points == 0 {
            return Err(invalid("sweep.time_grid_points must be at least 1"));
        }
        let lo = self.min_elevation_deg;
        let in_pass = |deg: f64| deg >= lo - 1e-9 && deg <= 180.0 - lo + 1e-9;
        match s.axis {
            SweepAxis::InterSatDistance => {
                if s.values[0] < 0.0 {
                    return Err(invalid("inter-satellite distances must be nonnegative"));
                }
            }
            SweepAxis::TransmitPower | SweepAxis::MeanElevationTime => match s.inter_sat_distance_km {
                Some(d) if d >= 0.0 && d.is_finite() => {}
                Some(d) => return Err(invalid(format!("sweep.inter_sat_distance_km = {d} is invalid"))),
                None => {
                    return Err(invalid(
                        "sweep.inter_sat_distance_km is required unless the axis is the distance",
                    ))
                }
            },
        }
        if s.axis == SweepAxis::MeanElevationTime {
            if s.time_average {
                return Err(invalid(
                    "time_average cannot be combined with the mean_elevation_time axis",
                ));
            }
            if let Some(v) = s.values.iter().find(|v| !in_pass(**v)) {
                return Err(invalid(format!(
                    "mean elevation {v} deg outside the pass [{lo}, {}] deg",
                    180.0 - lo
                )));
            }
        } else if !s.time_average && !in_pass(s.fixed_theta_mean_deg) {
            return Err(invalid(format!(
                "sweep.fixed_theta_mean_deg = {} outside the pass [{lo}, {}] deg",
                s.fixed_theta_mean_deg,
                180.0 - lo
            )));
        }
        Ok(())
    }

    pub fn orbit(&self) -> Result<OrbitConfig> {
        OrbitConfig::with_earth_radius(
            km_to_m(self.orbit.altitude_km),
            km_to_m(self.orbit.earth_radius_km),
        )
    }

    pub fn arrays(&self) -> Result<ArrayConfig> {
        ArrayConfig::new(
            self.tx_per_satellite(),
            self.arrays.rx_antennas,
            self.arrays.carrier_frequency_ghz * 1e9,
        )
    }

    pub fn pointing(&self) -> PointingPolicy {
        match self.fixed_rotation_deg {
            Some(d) => PointingPolicy::FixedRotation(d.to_radians()),
            None => PointingPolicy::TrackReceiver,
        }
    }

    pub fn tx_per_satellite(&self) -> usize {
        self.total_tx_antennas / self.num_satellites.max(1)
    }

    pub fn total_tx_power_w(&self) -> f64 {
        db_to_linear(self.total_tx_power_dbw)
    }

    pub fn noise_power_w(&self) -> f64 {
        db_to_linear(self.noise_power_dbw)
    }

    /// Mean elevations of the pass, uniform over
    /// `[θ_min, π − θ_min]`, in radians.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = self.sweep.time_grid_points;
        let lo = self.min_elevation_deg.to_radians();
        let hi = PI - lo;
        if n == 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes to JSON");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}
