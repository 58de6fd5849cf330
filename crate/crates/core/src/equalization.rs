//! Linear equalizers at the ground station.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add_to_diagonal, hermitian_solve, outer_gram, CMatrix, CVector};
use crate::precoding::Precoder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EqualizerKind {
    OptimalLinear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equalizer {
    /// `W = [w_1 ... w_NS]^H`, `N_S × N_r`.
    pub matrix: CMatrix,
    pub kind: EqualizerKind,
    /// `σ̄²` the geometric equalizer was built with.
    pub normalized_noise: Option<f64>,
}

impl Equalizer {
    /// Combining vector `w_ℓ` (the conjugate of row ℓ).
    pub fn combiner(&self, stream: usize) -> CVector {
        self.matrix.row(stream).adjoint()
    }

    pub fn streams(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Effective per-stream channels `H G`, one column per stream.
pub fn effective_channels(h: &CMatrix, g: &Precoder) -> Result<CMatrix> {
    if h.ncols() != g.matrix.nrows() {
        return Err(Error::InvalidInput(format!(
            "channel has {} columns but precoder has {} rows",
            h.ncols(),
            g.matrix.nrows()
        )));
    }
    Ok(h * &g.matrix)
}

/// SINR-optimal linear equalizer
/// `w_ℓ^H = g_ℓ^H H_ℓ^H (Σ_i H_i g_i g_i^H H_i^H + σ² I)^{-1}`.
///
/// Needs the true channel `h = [H_1 ... H_NS]`.
pub fn optimal_equalizer(h: &CMatrix, g: &Precoder, noise_power: f64) -> Result<Equalizer> {
    if !(noise_power > 0.0) {
        return Err(Error::InvalidInput(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    let e = effective_channels(h, g)?;
    let mut k = outer_gram(&e);
    add_to_diagonal(&mut k, noise_power);
    let x = hermitian_solve(k, &e)?;
    Ok(Equalizer {
        matrix: x.adjoint(),
        kind: EqualizerKind::OptimalLinear,
        normalized_noise: None,
    })
}

/// `σ̄² = σ_n² / (σ_α² N_t ρ)`.
pub fn normalized_noise(
    noise_power: f64,
    sigma_alpha_sq: f64,
    tx_per_satellite: usize,
    per_sat_power: f64,
) -> f64 {
    noise_power / (sigma_alpha_sq * tx_per_satellite as f64 * per_sat_power)
}

/// Geometry-only equalizer `W = A^H (A A^H + σ̄² I)^{-1}`. Uses nothing but
/// the angles of arrival (through `A`) and the normalized noise level.
pub fn geometric_equalizer(a: &CMatrix, normalized_noise: f64) -> Result<Equalizer> {
    if !(normalized_noise > 0.0 && normalized_noise.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "normalized noise must be positive, got {normalized_noise}"
        )));
    }
    let mut k = outer_gram(a);
    add_to_diagonal(&mut k, normalized_noise);
    let x = hermitian_solve(k, a)?;
    Ok(Equalizer {
        matrix: x.adjoint(),
        kind: EqualizerKind::Geometric,
        normalized_noise: Some(normalized_noise),
    })
}

/// Same equalizer assembled from the sum of rank-one terms `Σ a_i a_i^H`.
pub fn geometric_equalizer_rank_one_sum(a: &CMatrix, normalized_noise: f64) -> Result<Equalizer> {
    let nr = a.nrows();
    let mut k = CMatrix::zeros(nr, nr);
    for col in a.column_iter() {
        k += &col * col.adjoint();
    }
    add_to_diagonal(&mut k, normalized_noise);
    let x = hermitian_solve(k, a)?;
    Ok(Equalizer {
        matrix: x.adjoint(),
        kind: EqualizerKind::Geometric,
        normalized_noise: Some(normalized_noise),
    })
}

/// Same equalizer through the push-through identity
/// `A^H (A A^H + s I)^{-1} = (A^H A + s I)^{-1} A^H`, an `N_S × N_S` solve.
pub fn geometric_equalizer_small(a: &CMatrix, normalized_noise: f64) -> Result<Equalizer> {
    let mut k = a.adjoint() * a;
    add_to_diagonal(&mut k, normalized_noise);
    let w = hermitian_solve(k, &a.adjoint())?;
    Ok(Equalizer {
        matrix: w,
        kind: EqualizerKind::Geometric,
        normalized_noise: Some(normalized_noise),
    })
}

/// Scales every row of `w` by a nonzero complex factor.
pub fn rescale_rows(w: &Equalizer, factors: &[Complex64]) -> Equalizer {
    let mut out = w.clone();
    for (mut row, f) in out.matrix.row_iter_mut().zip(factors) {
        row *= *f;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{rx_steering, steering_matrix};
    use crate::linalg::frobenius_norm;
    use crate::precoding::PrecoderKind;
    use crate::rates::sinr_per_stream;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn block_precoder(rng: &mut impl Rng, ns: usize, nt: usize) -> Precoder {
        let mut g = CMatrix::zeros(ns * nt, ns);
        for l in 0..ns {
            let b = random_matrix(rng, nt, 1);
            g.view_mut((l * nt, l), (nt, 1)).copy_from(&b);
        }
        Precoder {
            matrix: g,
            kind: PrecoderKind::GeometricDistributed,
            per_sat_budgets: vec![1.0; ns],
        }
    }

    /// Angles with cos θ_ℓ = 2ℓ/Nr − 1 + offset, pairwise orthogonal.
    fn orthogonal_angles(ns: usize, nr: usize) -> Vec<f64> {
        (0..ns)
            .map(|l| (-0.9 + 2.0 * l as f64 / nr as f64).acos())
            .collect()
    }

    #[test]
    fn single_stream_is_matched_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_matrix(&mut rng, 6, 4);
        let g = block_precoder(&mut rng, 1, 4);
        let noise = 0.2;
        let w = optimal_equalizer(&h, &g, noise).unwrap();
        let e = &h * &g.matrix;
        let wl = w.combiner(0);
        let overlap = wl.dotc(&e.column(0)).norm() / (wl.norm() * e.column(0).norm());
        assert!((overlap - 1.0).abs() < 1e-12);
        let sinr = sinr_per_stream(&w, &h, &g, noise).unwrap();
        assert!((sinr[0] - e.norm_squared() / noise).abs() < 1e-9 * sinr[0]);
    }

    #[test]
    fn optimal_is_local_maximum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (ns, nt, nr) = (3, 4, 8);
        let h = random_matrix(&mut rng, nr, ns * nt);
        let g = block_precoder(&mut rng, ns, nt);
        let noise = 0.05;
        let w = optimal_equalizer(&h, &g, noise).unwrap();
        let base = sinr_per_stream(&w, &h, &g, noise).unwrap();
        for _ in 0..1_000 {
            let mut probe = w.clone();
            let scale = probe.matrix.norm() * 1e-3;
            probe.matrix += random_matrix(&mut rng, ns, nr) * Complex64::new(scale, 0.0);
            let s = sinr_per_stream(&probe, &h, &g, noise).unwrap();
            for (a, b) in s.iter().zip(&base) {
                assert!(*a <= *b * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn sinr_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_matrix(&mut rng, 6, 6);
        let g = block_precoder(&mut rng, 2, 3);
        let w = optimal_equalizer(&h, &g, 0.1).unwrap();
        let scaled = rescale_rows(&w, &[Complex64::new(-3.0, 2.0), Complex64::new(0.0, 1e-4)]);
        let a = sinr_per_stream(&w, &h, &g, 0.1).unwrap();
        let b = sinr_per_stream(&scaled, &h, &g, 0.1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10 * x);
        }
    }

    #[test]
    fn single_satellite_sherman_morrison() {
        let nr = 12;
        let a = steering_matrix(&[1.1], nr);
        let s = 0.7;
        let w = geometric_equalizer(&a, s).unwrap();
        let expected = rx_steering(1.1, nr).adjoint() / Complex64::new(nr as f64 + s, 0.0);
        assert!((w.matrix - expected).norm() < 1e-12);
    }

    #[test]
    fn orthogonal_set_has_no_leakage() {
        let nr = 16;
        let a = steering_matrix(&orthogonal_angles(4, nr), nr);
        let s = 0.3;
        let w = geometric_equalizer(&a, s).unwrap();
        let wa = &w.matrix * &a;
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { nr as f64 / (nr as f64 + s) } else { 0.0 };
                assert!((wa[(i, j)] - Complex64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matched_filter_limit() {
        let nr = 10;
        let a = steering_matrix(&[0.9, 1.3, 2.0], nr);
        let s = 1e12;
        let w = geometric_equalizer(&a, s).unwrap();
        let diff = w.matrix * Complex64::new(s, 0.0) - a.adjoint();
        assert!(frobenius_norm(&diff) / frobenius_norm(&a) < 1e-6);
    }

    #[test]
    fn algebraic_forms_agree() {
        let nr = 24;
        let a = steering_matrix(&[0.8, 1.0, 1.05, 1.7], nr);
        for s in [1e-3, 0.5, 40.0] {
            let gram = geometric_equalizer(&a, s).unwrap();
            let sum = geometric_equalizer_rank_one_sum(&a, s).unwrap();
            let small = geometric_equalizer_small(&a, s).unwrap();
            let scale = frobenius_norm(&gram.matrix);
            assert!(frobenius_norm(&(&gram.matrix - &sum.matrix)) < 1e-10 * scale);
            assert!(frobenius_norm(&(&gram.matrix - &small.matrix)) < 1e-10 * scale);
        }
    }

    #[test]
    fn rejects_nonpositive_noise() {
        let a = steering_matrix(&[1.0], 4);
        assert!(geometric_equalizer(&a, 0.0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_matrix(&mut rng, 4, 2);
        let g = block_precoder(&mut rng, 1, 2);
        assert!(optimal_equalizer(&h, &g, 0.0).is_err());
    }

    #[test]
    fn normalized_noise_formula() {
        assert!((normalized_noise(1e-12, 2e-14, 20, 10.0 / 3.0) - 0.75).abs() < 1e-12);
    }
}
