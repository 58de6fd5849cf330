//! Steering vectors, the rank-one geometric channel and the exact
//! line-of-sight channel with its stochastic link budget.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SatelliteState, SwarmGeometry};
use crate::linalg::{hstack, CMatrix, CVector};
use crate::units::{db_loss_to_amplitude, db_to_linear, SPEED_OF_LIGHT};

/// Uniform linear arrays at the satellites and the ground station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    /// Antennas per satellite, `Nt`.
    pub tx_per_satellite: usize,
    /// Ground-station antennas, `Nr`.
    pub rx_antennas: usize,
    /// Carrier frequency, Hz.
    pub carrier_frequency: f64,
}

impl ArrayConfig {
    pub fn new(tx_per_satellite: usize, rx_antennas: usize, carrier_frequency: f64) -> Result<Self> {
        if tx_per_satellite == 0 || rx_antennas == 0 {
            return Err(Error::InvalidConfig(format!(
                "arrays need at least one element (Nt = {tx_per_satellite}, Nr = {rx_antennas})"
            )));
        }
        if !(carrier_frequency > 0.0 && carrier_frequency.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "carrier frequency must be positive, got {carrier_frequency} Hz"
            )));
        }
        Ok(Self {
            tx_per_satellite,
            rx_antennas,
            carrier_frequency,
        })
    }

    /// Half-wavelength element spacing, m.
    pub fn antenna_spacing(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.carrier_frequency)
    }

    /// Wavenumber `ν = 2π fc / c0`, 1/m.
    pub fn wavenumber(&self) -> f64 {
        TAU * self.carrier_frequency / SPEED_OF_LIGHT
    }
}

/// Link-budget model. Gas absorption, scintillation and shadow fading are
/// parametric surrogates: a zenith gas loss with cosecant scaling, Gaussian
/// scintillation in dB, and Gaussian shadow fading whose standard deviation
/// comes from a table of 10° elevation bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    /// Satellite antenna gain, dBi.
    pub tx_gain_db: f64,
    /// Ground-station antenna gain, dBi.
    pub rx_gain_db: f64,
    pub shadow_fading: bool,
    /// Shadow-fading standard deviation in dB; entry `i` is tabulated at
    /// `10 (i + 1)` degrees and applies to elevations in `(10 i, 10 (i + 1)]`.
    pub shadow_fading_sigma_db: Vec<f64>,
    /// Clutter loss, dB. Zero under line of sight.
    pub clutter_db: f64,
    pub gas: bool,
    /// Gas absorption toward zenith, dB.
    pub gas_zenith_db: f64,
    pub scintillation: bool,
    pub scintillation_sigma_db: f64,
    /// Overrides the channel-gain variance `σ_α²` used by the geometric
    /// equalizer instead of deriving it from the deterministic losses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_alpha_sq: Option<f64>,
}

/// Rural line-of-sight shadow-fading deviations (dB) at 10°, 20°, ..., 90°.
pub const RURAL_LOS_SHADOW_FADING_DB: [f64; 9] = [1.9, 1.6, 1.9, 2.3, 2.7, 3.1, 3.0, 3.6, 0.4];

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            tx_gain_db: 17.8,
            rx_gain_db: 20.0,
            shadow_fading: true,
            shadow_fading_sigma_db: RURAL_LOS_SHADOW_FADING_DB.to_vec(),
            clutter_db: 0.0,
            gas: true,
            gas_zenith_db: 0.5,
            scintillation: true,
            scintillation_sigma_db: 0.3,
            sigma_alpha_sq: None,
        }
    }
}

impl LossConfig {
    /// Free-space path loss only: no gains, no atmosphere, no fading.
    pub fn free_space() -> Self {
        Self {
            tx_gain_db: 0.0,
            rx_gain_db: 0.0,
            shadow_fading: false,
            shadow_fading_sigma_db: RURAL_LOS_SHADOW_FADING_DB.to_vec(),
            clutter_db: 0.0,
            gas: false,
            gas_zenith_db: 0.0,
            scintillation: false,
            scintillation_sigma_db: 0.0,
            sigma_alpha_sq: None,
        }
    }

    /// Default gains and gas loss with every random term switched off.
    pub fn deterministic() -> Self {
        Self {
            shadow_fading: false,
            scintillation: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shadow_fading_sigma_db.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidConfig(
                "shadow-fading deviations must be nonnegative".into(),
            ));
        }
        if !(self.scintillation_sigma_db >= 0.0) {
            return Err(Error::InvalidConfig(
                "scintillation deviation must be nonnegative".into(),
            ));
        }
        if let Some(s) = self.sigma_alpha_sq {
            if !(s > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "sigma_alpha_sq override must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }

    pub fn shadow_fading_sigma(&self, elevation: f64) -> Result<f64> {
        let deg = horizon_elevation(elevation).to_degrees();
        let n = self.shadow_fading_sigma_db.len();
        // Tolerance keeps tabulated angles in their own bin despite rounding.
        let bin = (deg / 10.0 - 1e-9).ceil() as isize - 1;
        if n == 0 || !(deg > 0.0) || bin >= n as isize {
            return Err(Error::InvalidConfig(format!(
                "elevation {deg:.3} deg outside the shadow-fading table ({n} bins of 10 deg)"
            )));
        }
        Ok(self.shadow_fading_sigma_db[bin.max(0) as usize])
    }

    /// Deterministic gas absorption, `L_zenith / sin(elevation)`.
    pub fn gas_loss(&self, elevation: f64) -> f64 {
        if !self.gas {
            return 0.0;
        }
        let e = horizon_elevation(elevation).max(1f64.to_radians());
        self.gas_zenith_db / e.sin()
    }
}

/// Elevation above the local horizon, in `[0, π/2]`.
fn horizon_elevation(theta: f64) -> f64 {
    theta.min(PI - theta).clamp(0.0, FRAC_PI_2)
}

/// Loss decomposition for one satellite, dB, plus its atmospheric phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub fspl_db: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub shadow_fading_db: f64,
    pub clutter_db: f64,
    pub gas_db: f64,
    pub scintillation_db: f64,
    pub total_db: f64,
    /// Atmospheric phase shift, uniform on `[0, 2π)`.
    pub atm_phase: f64,
}

impl LinkBudget {
    /// Total loss without the random terms.
    pub fn deterministic_total_db(&self) -> f64 {
        self.fspl_db - (self.tx_gain_db + self.rx_gain_db) + self.clutter_db + self.gas_db
    }
}

/// `20 log10(2 ν d)`.
pub fn free_space_loss_db(wavenumber: f64, distance: f64) -> f64 {
    20.0 * (2.0 * wavenumber * distance).log10()
}

/// Draws a link budget. Three variates are consumed per call in a fixed order
/// (shadow fading, scintillation, phase) whether or not the terms are enabled,
/// so toggling a loss component never shifts the rest of the random stream.
pub fn link_budget<R: Rng + ?Sized>(
    sat: &SatelliteState,
    arrays: &ArrayConfig,
    cfg: &LossConfig,
    rng: &mut R,
) -> Result<LinkBudget> {
    if !(sat.slant_range > 0.0) {
        return Err(Error::InvalidInput(format!(
            "slant range must be positive, got {} m",
            sat.slant_range
        )));
    }
    let z_sf: f64 = StandardNormal.sample(rng);
    let z_ts: f64 = StandardNormal.sample(rng);
    let atm_phase = rng.random_range(0.0..TAU);

    let fspl_db = free_space_loss_db(arrays.wavenumber(), sat.slant_range);
    let shadow_fading_db = if cfg.shadow_fading {
        cfg.shadow_fading_sigma(sat.elevation)? * z_sf
    } else {
        0.0
    };
    let scintillation_db = if cfg.scintillation {
        cfg.scintillation_sigma_db * z_ts
    } else {
        0.0
    };
    let gas_db = cfg.gas_loss(sat.elevation);
    let total_db = fspl_db - (cfg.tx_gain_db + cfg.rx_gain_db)
        + shadow_fading_db
        + cfg.clutter_db
        + gas_db
        + scintillation_db;
    Ok(LinkBudget {
        fspl_db,
        tx_gain_db: cfg.tx_gain_db,
        rx_gain_db: cfg.rx_gain_db,
        shadow_fading_db,
        clutter_db: cfg.clutter_db,
        gas_db,
        scintillation_db,
        total_db,
        atm_phase,
    })
}

/// `a[m] = exp(jπ m cos θ)`, m = 0..Nr.
pub fn rx_steering(elevation: f64, rx_antennas: usize) -> CVector {
    let c = PI * elevation.cos();
    CVector::from_fn(rx_antennas, |m, _| Complex64::cis(c * m as f64))
}

/// `b[n] = exp(−jπ n sin Θ)`, n = 0..Nt.
pub fn tx_steering(aod: f64, tx_antennas: usize) -> CVector {
    let s = PI * aod.sin();
    CVector::from_fn(tx_antennas, |n, _| Complex64::cis(-s * n as f64))
}

/// `A = [a_1 ... a_NS]`.
pub fn steering_matrix(elevations: &[f64], rx_antennas: usize) -> CMatrix {
    let mut a = CMatrix::zeros(rx_antennas, elevations.len());
    for (col, &theta) in elevations.iter().enumerate() {
        a.set_column(col, &rx_steering(theta, rx_antennas));
    }
    a
}

/// Rank-one model `α a b^H`.
pub fn approx_channel(alpha: Complex64, a: &CVector, b: &CVector) -> CMatrix {
    (a * b.adjoint()) * alpha
}

fn reference_gain(sat: &SatelliteState, arrays: &ArrayConfig, budget: &LinkBudget) -> Complex64 {
    let amplitude = db_loss_to_amplitude(budget.total_db);
    let phase = -(arrays.wavenumber() * sat.slant_range + budget.atm_phase);
    Complex64::from_polar(amplitude, phase.rem_euclid(TAU))
}

/// Exact line-of-sight channel `h[m, n] = L_mn^{-1/2} exp(−j(ν d_mn + φ_atm))`.
///
/// Antenna positions are exact: receive element `m` sits `m D_A` along the
/// ground tangent, transmit element `n` sits `n D_A` along the satellite array
/// axis rotated by η. Each pair gets its own free-space loss; all other loss
/// terms are shared. Entry `(0, 0)` equals the reference gain α exactly.
pub fn true_channel(sat: &SatelliteState, arrays: &ArrayConfig, budget: &LinkBudget) -> CMatrix {
    let nr = arrays.rx_antennas;
    let nt = arrays.tx_per_satellite;
    let da = arrays.antenna_spacing();
    let nu = arrays.wavenumber();
    let d = sat.slant_range;
    let [sx, sy] = sat.relative_position();
    let (uy, ux) = sat.rotation.sin_cos();

    let alpha = reference_gain(sat, arrays, budget);
    let amplitude = alpha.norm();
    let phase0 = alpha.arg();

    CMatrix::from_fn(nr, nt, |m, n| {
        let dx = n as f64 * da * ux - m as f64 * da;
        let dy = n as f64 * da * uy;
        // |s + δ|² − d², kept separate from d² to avoid cancellation.
        let excess_sq = 2.0 * (sx * dx + sy * dy) + dx * dx + dy * dy;
        let dist = (d * d + excess_sq).sqrt();
        let excess = excess_sq / (dist + d);
        Complex64::from_polar(amplitude * d / dist, phase0 - nu * excess)
    })
}

/// Every channel quantity for one swarm realization.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub per_satellite_true: Vec<CMatrix>,
    pub per_satellite_approx: Vec<CMatrix>,
    /// `H = [H_1 ... H_NS]`, `Nr × NS·Nt`.
    pub stacked_true: CMatrix,
    /// `A`, `Nr × NS`.
    pub steering_rx: CMatrix,
    pub steering_tx: Vec<CVector>,
    pub alpha: Vec<Complex64>,
    pub budgets: Vec<LinkBudget>,
    pub sigma_alpha_sq: f64,
}

/// `σ_α²` as the mean of `|α_ℓ|²` with the random loss terms switched off,
/// unless the configuration overrides it.
pub fn sigma_alpha_sq(swarm: &SwarmGeometry, arrays: &ArrayConfig, cfg: &LossConfig) -> f64 {
    if let Some(s) = cfg.sigma_alpha_sq {
        return s;
    }
    let nu = arrays.wavenumber();
    swarm
        .satellites
        .iter()
        .map(|sat| {
            let total = free_space_loss_db(nu, sat.slant_range) - (cfg.tx_gain_db + cfg.rx_gain_db)
                + cfg.clutter_db
                + cfg.gas_loss(sat.elevation);
            db_to_linear(-total)
        })
        .sum::<f64>()
        / swarm.len() as f64
}

pub fn channel_set<R: Rng + ?Sized>(
    swarm: &SwarmGeometry,
    arrays: &ArrayConfig,
    cfg: &LossConfig,
    rng: &mut R,
) -> Result<ChannelSet> {
    let ns = swarm.len();
    if arrays.rx_antennas < ns {
        return Err(Error::InvalidConfig(format!(
            "{} receive antennas cannot separate {ns} satellites",
            arrays.rx_antennas
        )));
    }
    let mut per_satellite_true = Vec::with_capacity(ns);
    let mut per_satellite_approx = Vec::with_capacity(ns);
    let mut steering_tx = Vec::with_capacity(ns);
    let mut alpha = Vec::with_capacity(ns);
    let mut budgets = Vec::with_capacity(ns);
    for sat in &swarm.satellites {
        let budget = link_budget(sat, arrays, cfg, rng)?;
        let gain = reference_gain(sat, arrays, &budget);
        let a = rx_steering(sat.elevation, arrays.rx_antennas);
        let b = tx_steering(sat.aod, arrays.tx_per_satellite);
        per_satellite_true.push(true_channel(sat, arrays, &budget));
        per_satellite_approx.push(approx_channel(gain, &a, &b));
        steering_tx.push(b);
        alpha.push(gain);
        budgets.push(budget);
    }
    Ok(ChannelSet {
        stacked_true: hstack(&per_satellite_true)?,
        per_satellite_true,
        per_satellite_approx,
        steering_rx: steering_matrix(&swarm.elevations(), arrays.rx_antennas),
        steering_tx,
        alpha,
        budgets,
        sigma_alpha_sq: sigma_alpha_sq(swarm, arrays, cfg),
    })
}
