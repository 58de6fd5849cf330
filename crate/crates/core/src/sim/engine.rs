use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ScenarioConfig, SweepAxis};
use super::output::SweepRecord;
use crate::channel::{channel_set, sigma_alpha_sq, steering_matrix, ArrayConfig};
use crate::equalization::{
    geometric_equalizer_small, normalized_noise, optimal_equalizer, Equalizer,
};
use crate::error::Result;
use crate::geometry::{place_swarm, SwarmGeometry};
use crate::linalg::CMatrix;
use crate::precoding::{equal_power, geometric_precoder, Precoder};
use crate::rates::{capacity, rate_ideal_rx, rate_linear, rate_upper_geo, sinr_per_stream, RateReport};
use crate::units::{db_to_linear, km_to_m};

/// Random stream of one trial, keyed by seed, mean elevation and trial index.
///
/// The distance and the power are not part of the key, so every point of a
/// distance or power sweep sees the same fading draws.
pub fn trial_rng(seed: u64, theta_mean: f64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&theta_mean.to_bits().to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Everything about one operating point that does not depend on the fading
/// draw: swarm placement, geometric precoder and equalizer, upper bound.
#[derive(Debug, Clone)]
pub struct PointContext {
    pub theta_mean: f64,
    pub tx_power: f64,
    pub swarm: SwarmGeometry,
    pub arrays: ArrayConfig,
    pub steering: CMatrix,
    pub precoder: Precoder,
    pub equalizer: Equalizer,
    pub normalized_noise: f64,
    pub upper_bound: f64,
    seed: u64,
    noise_power: f64,
    loss: crate::channel::LossConfig,
}

impl PointContext {
    pub fn new(config: &ScenarioConfig, theta_mean: f64, distance: f64, tx_power: f64) -> Result<Self> {
        let orbit = config.orbit()?;
        let arrays = config.arrays()?;
        let ns = config.num_satellites;
        let nt = arrays.tx_per_satellite;
        let swarm = place_swarm(theta_mean, distance, ns, &orbit, config.pointing())?;
        let per_sat = equal_power(tx_power, ns);
        let precoder = geometric_precoder(&swarm, nt, &per_sat)?;
        let steering = steering_matrix(&swarm.elevations(), arrays.rx_antennas);
        let noise_power = config.noise_power_w();
        let nbar = normalized_noise(
            noise_power,
            sigma_alpha_sq(&swarm, &arrays, &config.loss),
            nt,
            per_sat[0],
        );
        let equalizer = geometric_equalizer_small(&steering, nbar)?;
        let upper_bound = rate_upper_geo(&steering, nbar)?;
        Ok(Self {
            theta_mean,
            tx_power,
            swarm,
            arrays,
            steering,
            precoder,
            equalizer,
            normalized_noise: nbar,
            upper_bound,
            seed: config.seed,
            noise_power,
            loss: config.loss.clone(),
        })
    }

    /// Draws trial `trial` and evaluates every rate on it.
    pub fn evaluate(&self, trial: u64) -> Result<RateReport> {
        let mut rng = trial_rng(self.seed, self.theta_mean, trial);
        let set = channel_set(&self.swarm, &self.arrays, &self.loss, &mut rng)?;
        let h = &set.stacked_true;
        let sigma2 = self.noise_power;
        let r_opt = capacity(h, self.tx_power, sigma2)?;
        let r_per = rate_ideal_rx(h, &self.precoder, sigma2)?;
        let sinr_geo = sinr_per_stream(&self.equalizer, h, &self.precoder, sigma2)?;
        let w_opt = optimal_equalizer(h, &self.precoder, sigma2)?;
        let sinr_opt = sinr_per_stream(&w_opt, h, &self.precoder, sigma2)?;
        Ok(RateReport {
            r_opt,
            r_per,
            r_lin: rate_linear(&sinr_geo),
            r_lin_opt_eq: rate_linear(&sinr_opt),
            r_upper_geo: self.upper_bound,
            per_stream_sinr: sinr_geo,
        })
    }
}

/// One trial at one operating point. Deterministic in its arguments.
pub fn run_point(
    config: &ScenarioConfig,
    theta_mean: f64,
    distance: f64,
    tx_power: f64,
    trial: u64,
) -> Result<RateReport> {
    config.validate()?;
    PointContext::new(config, theta_mean, distance, tx_power)
        .and_then(|ctx| ctx.evaluate(trial))
        .map_err(|e| {
            e.context(format!(
                "θ_mean = {:.4} deg, D_S = {:.3} km, trial {trial}",
                theta_mean.to_degrees(),
                distance * 1e-3
            ))
        })
}

/// An axis value resolved to physical operating conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub distance: f64,
    pub tx_power: f64,
    /// Mean elevations averaged into this point, rad.
    pub thetas: Vec<f64>,
}

impl SweepPoint {
    fn label(&self, axis: SweepAxis) -> String {
        match axis {
            SweepAxis::InterSatDistance => format!("D_S = {} km", self.axis_value),
            SweepAxis::TransmitPower => format!("P_Tx = {} dBW", self.axis_value),
            SweepAxis::MeanElevationTime => format!("θ_mean = {} deg", self.axis_value),
        }
    }
}

pub fn sweep_points(config: &ScenarioConfig) -> Vec<SweepPoint> {
    let s = &config.sweep;
    let thetas = if s.time_average {
        config.time_grid()
    } else {
        vec![s.fixed_theta_mean_deg.to_radians()]
    };
    let fixed_distance = km_to_m(s.inter_sat_distance_km.unwrap_or(0.0));
    s.values
        .iter()
        .map(|&v| match s.axis {
            SweepAxis::InterSatDistance => SweepPoint {
                axis_value: v,
                distance: km_to_m(v),
                tx_power: config.total_tx_power_w(),
                thetas: thetas.clone(),
            },
            SweepAxis::TransmitPower => SweepPoint {
                axis_value: v,
                distance: fixed_distance,
                tx_power: db_to_linear(v),
                thetas: thetas.clone(),
            },
            SweepAxis::MeanElevationTime => SweepPoint {
                axis_value: v,
                distance: fixed_distance,
                tx_power: config.total_tx_power_w(),
                thetas: vec![v.to_radians()],
            },
        })
        .collect()
}

fn mean_std(samples: &[RateReport]) -> (RateReport, RateReport) {
    let n = samples.len() as f64;
    let streams = samples.first().map_or(0, |r| r.per_stream_sinr.len());
    let fields = |r: &RateReport| -> Vec<f64> {
        let mut v = vec![r.r_opt, r.r_per, r.r_lin, r.r_lin_opt_eq, r.r_upper_geo];
        v.extend_from_slice(&r.per_stream_sinr);
        v
    };
    let width = 5 + streams;
    let mut mean = vec![0.0; width];
    for s in samples {
        for (m, x) in mean.iter_mut().zip(fields(s)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; width];
    if samples.len() > 1 {
        for s in samples {
            for ((v, m), x) in var.iter_mut().zip(&mean).zip(fields(s)) {
                *v += (x - m) * (x - m);
            }
        }
        var.iter_mut().for_each(|v| *v /= n - 1.0);
    }
    let build = |v: Vec<f64>| RateReport {
        r_opt: v[0],
        r_per: v[1],
        r_lin: v[2],
        r_lin_opt_eq: v[3],
        r_upper_geo: v[4],
        per_stream_sinr: v[5..].to_vec(),
    };
    (build(mean), build(var.into_iter().map(f64::sqrt).collect()))
}

/// Runs every point of the configured sweep.
///
/// Trials run in parallel; results are merged in axis, elevation and trial
/// order, so the output does not depend on the number of worker threads.
pub fn run_sweep(config: &ScenarioConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let axis = config.sweep.axis;
    let points = sweep_points(config);
    let digest = config.digest();

    let mut contexts = Vec::new();
    let mut owner = Vec::new();
    for (p, point) in points.iter().enumerate() {
        for &theta in &point.thetas {
            let ctx = PointContext::new(config, theta, point.distance, point.tx_power).map_err(|e| {
                e.context(format!(
                    "sweep point {} at θ_mean = {:.4} deg",
                    point.label(axis),
                    theta.to_degrees()
                ))
            })?;
            contexts.push(ctx);
            owner.push(p);
        }
    }

    let trials = config.trials;
    let results: Vec<Result<RateReport>> = (0..contexts.len() * trials)
        .into_par_iter()
        .map(|unit| contexts[unit / trials].evaluate((unit % trials) as u64))
        .collect();

    let mut per_point: Vec<Vec<RateReport>> = vec![Vec::new(); points.len()];
    for (unit, result) in results.into_iter().enumerate() {
        let c = unit / trials;
        match result {
            Ok(r) => per_point[owner[c]].push(r),
            Err(e) => {
                return Err(e.context(format!(
                    "sweep point {} at θ_mean = {:.4} deg, trial {}",
                    points[owner[c]].label(axis),
                    contexts[c].theta_mean.to_degrees(),
                    unit % trials
                )))
            }
        }
    }

    Ok(points
        .iter()
        .zip(per_point)
        .map(|(point, samples)| {
            let (mean, std) = mean_std(&samples);
            SweepRecord {
                axis_value: point.axis_value,
                mean,
                std,
                num_trials: trials,
                config_digest: digest.clone(),
            }
        })
        .collect())
}
