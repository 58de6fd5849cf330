//! Transmit precoders: the centralized capacity-achieving SVD precoder and
//! the distributed geometric precoder that each satellite computes from its
//! own angle of departure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::tx_steering;
use crate::error::{Error, Result};
use crate::geometry::SwarmGeometry;
use crate::linalg::{gram, hermitian_eigen, outer_gram, CMatrix};

/// Beam powers from waterfilling, in the order the eigenvalues were given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub per_beam_powers: Vec<f64>,
    pub water_level: f64,
    pub total_budget: f64,
}

impl PowerAllocation {
    pub fn active_beams(&self) -> usize {
        self.per_beam_powers.iter().filter(|&&p| p > 0.0).count()
    }
}

/// Waterfilling over parallel channels with gains `eigenvalues`:
/// `p = max(0, μ − σ²/λ)` with `Σ p = total_power`.
///
/// The active set is found exactly: with eigenvalues sorted descending, the
/// largest `k` whose water level stays above `σ²/λ_k` wins.
pub fn waterfilling(
    eigenvalues: &[f64],
    total_power: f64,
    noise_power: f64,
) -> Result<PowerAllocation> {
    if !(total_power > 0.0 && total_power.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "total power must be positive, got {total_power}"
        )));
    }
    if !(noise_power > 0.0 && noise_power.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    if eigenvalues.iter().any(|l| l.is_nan()) {
        return Err(Error::InvalidInput("NaN eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..eigenvalues.len())
        .filter(|&i| eigenvalues[i] > 0.0)
        .collect();
    if order.is_empty() {
        return Err(Error::InvalidInput(
            "waterfilling needs at least one positive eigenvalue".into(),
        ));
    }
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let floors: Vec<f64> = order.iter().map(|&i| noise_power / eigenvalues[i]).collect();

    let mut prefix = 0.0;
    let mut active = 0;
    let mut level = 0.0;
    for (k, &floor) in floors.iter().enumerate() {
        let candidate = (total_power + prefix + floor) / (k + 1) as f64;
        if candidate <= floor {
            break;
        }
        prefix += floor;
        active = k + 1;
        level = candidate;
    }

    let mut powers = vec![0.0; eigenvalues.len()];
    for (&i, &floor) in order.iter().zip(&floors).take(active) {
        powers[i] = level - floor;
    }
    Ok(PowerAllocation {
        per_beam_powers: powers,
        water_level: level,
        total_budget: total_power,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrecoderKind {
    SvdOptimal,
    GeometricDistributed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    /// `G`, `N_Tx × M`.
    pub matrix: CMatrix,
    pub kind: PrecoderKind,
    /// Per-satellite power budgets ρ_ℓ.
    pub per_sat_budgets: Vec<f64>,
}

impl Precoder {
    pub fn streams(&self) -> usize {
        self.matrix.ncols()
    }

    /// `tr(G G^H)`.
    pub fn total_power(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `tr(G_ℓ G_ℓ^H)` for the rows belonging to satellite `sat`.
    pub fn block_power(&self, sat: usize, tx_per_satellite: usize) -> f64 {
        self.matrix
            .rows(sat * tx_per_satellite, tx_per_satellite)
            .iter()
            .map(|z| z.norm_sqr())
            .sum()
    }
}

/// Right singular structure of `H`: eigenvalues `λ_μ = σ_μ²` in descending
/// order and the matching right singular vectors as columns.
#[derive(Debug, Clone)]
pub struct SvdBeams {
    pub eigenvalues: Vec<f64>,
    pub right_vectors: CMatrix,
}

/// Computes the beams from the eigendecomposition of the smaller Gram matrix.
/// When `H` is wide, `v_μ = H^H u_μ / σ_μ`.
pub fn svd_beams(h: &CMatrix) -> Result<SvdBeams> {
    if h.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(Error::InvalidInput("channel matrix is zero".into()));
    }
    if h.ncols() <= h.nrows() {
        let eig = hermitian_eigen(&gram(h))?;
        let eigenvalues = eig.values.iter().map(|l| l.max(0.0)).collect();
        return Ok(SvdBeams {
            eigenvalues,
            right_vectors: eig.vectors,
        });
    }
    let eig = hermitian_eigen(&outer_gram(h))?;
    let mut v = h.adjoint() * &eig.vectors;
    let mut eigenvalues = Vec::with_capacity(eig.values.len());
    for (mu, &l) in eig.values.iter().enumerate() {
        let mut col = v.column_mut(mu);
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        }
        eigenvalues.push(l.max(0.0));
    }
    Ok(SvdBeams {
        eigenvalues,
        right_vectors: v,
    })
}

/// `G_opt = V P^{1/2}` restricted to the waterfilling-active beams.
pub fn svd_precoder_from_beams(
    beams: &SvdBeams,
    total_power: f64,
    noise_power: f64,
) -> Result<(Precoder, PowerAllocation)> {
    let alloc = waterfilling(&beams.eigenvalues, total_power, noise_power)?;
    let active: Vec<usize> = (0..alloc.per_beam_powers.len())
        .filter(|&i| alloc.per_beam_powers[i] > 0.0)
        .collect();
    let rows = beams.right_vectors.nrows();
    let mut g = CMatrix::zeros(rows, active.len());
    for (col, &mu) in active.iter().enumerate() {
        let scale = Complex64::new(alloc.per_beam_powers[mu].sqrt(), 0.0);
        g.set_column(col, &(beams.right_vectors.column(mu) * scale));
    }
    let precoder = Precoder {
        matrix: g,
        kind: PrecoderKind::SvdOptimal,
        per_sat_budgets: vec![total_power],
    };
    Ok((precoder, alloc))
}

/// Capacity-achieving precoder under a sum-power constraint.
pub fn svd_precoder(h: &CMatrix, total_power: f64, noise_power: f64) -> Result<Precoder> {
    let beams = svd_beams(h)?;
    Ok(svd_precoder_from_beams(&beams, total_power, noise_power)?.0)
}

/// Equal split `ρ = P_Tx / N_S`.
pub fn equal_power(total_power: f64, satellites: usize) -> Vec<f64> {
    vec![total_power / satellites as f64; satellites]
}

/// Block-diagonal `G_geo = blkdiag(√(ρ_1/Nt) b_1, ..., √(ρ_NS/Nt) b_NS)`.
///
/// Satellite ℓ only needs its own AoD and its own stream; every entry of its
/// block has modulus `√(ρ_ℓ/Nt)`.
pub fn geometric_precoder(
    swarm: &SwarmGeometry,
    tx_per_satellite: usize,
    per_sat_power: &[f64],
) -> Result<Precoder> {
    let ns = swarm.len();
    if per_sat_power.len() != ns {
        return Err(Error::InvalidInput(format!(
            "{} power budgets for {ns} satellites",
            per_sat_power.len()
        )));
    }
    if per_sat_power.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::InvalidInput("power budgets must be nonnegative".into()));
    }
    if tx_per_satellite == 0 {
        return Err(Error::InvalidInput("satellites need at least one antenna".into()));
    }
    let nt = tx_per_satellite;
    let mut g = CMatrix::zeros(ns * nt, ns);
    for (l, (sat, &rho)) in swarm.satellites.iter().zip(per_sat_power).enumerate() {
        let b = tx_steering(sat.aod, nt) * Complex64::new((rho / nt as f64).sqrt(), 0.0);
        g.view_mut((l * nt, l), (nt, 1)).copy_from(&b);
    }
    Ok(Precoder {
        matrix: g,
        kind: PrecoderKind::GeometricDistributed,
        per_sat_budgets: per_sat_power.to_vec(),
    })
}
