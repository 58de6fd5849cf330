//! Achievable-rate metrics, all in bit/s/Hz.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equalization::{effective_channels, Equalizer};
use crate::error::{Error, Result};
use crate::linalg::{add_to_diagonal, gram, log2_det_identity_plus, outer_gram, CMatrix};
use crate::precoding::{svd_beams, svd_precoder_from_beams, Precoder, SvdBeams};

/// Rates of one channel realization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Capacity with the SVD precoder and an ideal receiver.
    pub r_opt: f64,
    /// Geometric precoder with an ideal receiver.
    pub r_per: f64,
    /// Geometric precoder with the geometric linear equalizer.
    pub r_lin: f64,
    /// Geometric precoder with the SINR-optimal linear equalizer.
    pub r_lin_opt_eq: f64,
    /// Upper bound from the steering matrix alone.
    pub r_upper_geo: f64,
    /// Per-stream SINR of the geometric equalizer.
    pub per_stream_sinr: Vec<f64>,
}

/// Agreement required between the determinant and eigenvalue capacity forms.
pub const CAPACITY_FORM_TOL: f64 = 1e-9;

/// Channel capacity under a sum-power constraint.
///
/// Evaluates both `log2|I + H G G^H H^H / σ²|` with the SVD precoder and
/// `Σ log2(1 + λ_μ p_μ / σ²)` with the waterfilling powers, and fails if they
/// disagree.
pub fn capacity(h: &CMatrix, total_power: f64, noise_power: f64) -> Result<f64> {
    let beams = svd_beams(h)?;
    capacity_from_beams(&beams, h, total_power, noise_power)
}

pub fn capacity_from_beams(
    beams: &SvdBeams,
    h: &CMatrix,
    total_power: f64,
    noise_power: f64,
) -> Result<f64> {
    let (g, alloc) = svd_precoder_from_beams(beams, total_power, noise_power)?;
    let eigen_form: f64 = beams
        .eigenvalues
        .iter()
        .zip(&alloc.per_beam_powers)
        .map(|(l, p)| (1.0 + l * p / noise_power).log2())
        .sum();
    let det_form = rate_ideal_rx(h, &g, noise_power)?;
    let tol = CAPACITY_FORM_TOL * eigen_form.abs().max(det_form.abs()) + 1e-12;
    if (eigen_form - det_form).abs() > tol {
        return Err(Error::Numerical(format!(
            "capacity forms disagree: determinant {det_form}, eigenvalues {eigen_form}"
        )));
    }
    Ok(eigen_form)
}

/// `log2|I + H G G^H H^H / σ²|` for a fixed precoder and an ideal receiver,
/// evaluated in the stream domain through `|I + X X^H| = |I + X^H X|`.
pub fn rate_ideal_rx(h: &CMatrix, g: &Precoder, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::InvalidInput(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    if g.streams() == 0 {
        return Ok(0.0);
    }
    let x = effective_channels(h, g)?;
    let s = gram(&x) / Complex64::new(noise_power, 0.0);
    Ok(log2_det_identity_plus(&s)?.max(0.0))
}

/// Same rate assembled in the receive-antenna domain; used as a check.
pub fn rate_ideal_rx_full(h: &CMatrix, g: &Precoder, noise_power: f64) -> Result<f64> {
    let x = effective_channels(h, g)?;
    let s = outer_gram(&x) / Complex64::new(noise_power, 0.0);
    log2_det_identity_plus(&s)
}

/// `Γ_ℓ = |w_ℓ^H H_ℓ g_ℓ|² / (Σ_{i≠ℓ} |w_ℓ^H H_i g_i|² + σ² w_ℓ^H w_ℓ)`.
pub fn sinr_per_stream(
    w: &Equalizer,
    h: &CMatrix,
    g: &Precoder,
    noise_power: f64,
) -> Result<Vec<f64>> {
    let e = effective_channels(h, g)?;
    if w.streams() != e.ncols() || w.matrix.ncols() != e.nrows() {
        return Err(Error::InvalidInput(format!(
            "equalizer is {}x{} but effective channel is {}x{}",
            w.matrix.nrows(),
            w.matrix.ncols(),
            e.nrows(),
            e.ncols()
        )));
    }
    // Row ℓ of W E holds w_ℓ^H H_i g_i for every i.
    let we = &w.matrix * &e;
    Ok((0..w.streams())
        .map(|l| {
            let signal = we[(l, l)].norm_sqr();
            let interference: f64 = (0..we.ncols())
                .filter(|&i| i != l)
                .map(|i| we[(l, i)].norm_sqr())
                .sum();
            let noise = noise_power * w.matrix.row(l).norm_squared();
            let denom = interference + noise;
            if denom > 0.0 {
                signal / denom
            } else {
                0.0
            }
        })
        .collect())
}

/// The SINR as a generalized Rayleigh quotient
/// `w^H Q_ℓ w / w^H (Σ_{i≠ℓ} Q_i + σ² I) w` with `Q_i = H_i g_i g_i^H H_i^H`.
pub fn sinr_rayleigh_quotient(
    w: &Equalizer,
    h: &CMatrix,
    g: &Precoder,
    noise_power: f64,
) -> Result<Vec<f64>> {
    let e = effective_channels(h, g)?;
    let nr = e.nrows();
    Ok((0..w.streams())
        .map(|l| {
            let wl = w.combiner(l);
            let own = e.column(l);
            let signal_q = &own * own.adjoint();
            let mut interference_q = CMatrix::zeros(nr, nr);
            for (i, col) in e.column_iter().enumerate() {
                if i != l {
                    interference_q += &col * col.adjoint();
                }
            }
            add_to_diagonal(&mut interference_q, noise_power);
            let num = wl.dotc(&(signal_q * &wl)).re;
            let den = wl.dotc(&(interference_q * &wl)).re;
            num / den
        })
        .collect())
}

/// `Σ log2(1 + Γ_ℓ)`.
pub fn rate_linear(sinrs: &[f64]) -> f64 {
    sinrs.iter().map(|g| (1.0 + g.max(0.0)).log2()).sum()
}

/// `log2|I + A^H A / σ̄²|`, the rate bound of the geometric channel model.
pub fn rate_upper_geo(a: &CMatrix, normalized_noise: f64) -> Result<f64> {
    if !(normalized_noise > 0.0) {
        return Err(Error::InvalidInput(format!(
            "normalized noise must be positive, got {normalized_noise}"
        )));
    }
    let s = gram(a) / Complex64::new(normalized_noise, 0.0);
    log2_det_identity_plus(&s)
}
