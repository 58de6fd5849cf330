//! Dense complex linear algebra on top of `nalgebra`.
//!
//! Inverses never appear explicitly: every `(X + s I)^{-1}` in the models is
//! a Hermitian positive-definite solve through a Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Cholesky factorization that rejects non-positive pivots. The complex
/// square root inside `nalgebra` never fails, so the pivots are checked here.
fn cholesky(a: CMatrix) -> Result<Cholesky<Complex64, nalgebra::Dyn>> {
    let n = a.nrows();
    let not_pd = || Error::Numerical(format!("{n}x{n} matrix is not positive definite"));
    let chol = Cholesky::new(a).ok_or_else(not_pd)?;
    let l = chol.l_dirty();
    if (0..n).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
        return Err(not_pd());
    }
    Ok(chol)
}

/// Solves `a x = b` for Hermitian positive-definite `a`.
pub fn hermitian_solve(a: CMatrix, b: &CMatrix) -> Result<CMatrix> {
    Ok(cholesky(a)?.solve(b))
}

/// `log2 det(I + s)` for Hermitian positive semi-definite `s`.
pub fn log2_det_identity_plus(s: &CMatrix) -> Result<f64> {
    let n = s.nrows();
    if n != s.ncols() {
        return Err(Error::InvalidInput(format!(
            "log-determinant of non-square {}x{} matrix",
            n,
            s.ncols()
        )));
    }
    let mut m = s.clone();
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    let chol = cholesky(m).map_err(|e| e.context("log-determinant of I + S"))?;
    let l = chol.l_dirty();
    Ok((0..n).map(|i| l[(i, i)].re.ln()).sum::<f64>() * 2.0 / std::f64::consts::LN_2)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; column `i` of `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::Numerical(format!("Hermitian eigendecomposition of {n}x{n} matrix failed"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("SVD failed to converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> Result<usize> {
    let s = singular_values(m)?;
    let Some(&max) = s.first() else { return Ok(0) };
    Ok(s.iter().filter(|&&v| v > rel_tol * max).count())
}

/// `m^H m`.
pub fn gram(m: &CMatrix) -> CMatrix {
    m.adjoint() * m
}

/// `m m^H`.
pub fn outer_gram(m: &CMatrix) -> CMatrix {
    m * m.adjoint()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Adds `s` to the diagonal in place.
pub fn add_to_diagonal(m: &mut CMatrix, s: f64) {
    let n = m.nrows().min(m.ncols());
    for i in 0..n {
        m[(i, i)] += s;
    }
}

/// Horizontal concatenation `[blocks[0] ... blocks[n-1]]`.
pub fn hstack(blocks: &[CMatrix]) -> Result<CMatrix> {
    let Some(first) = blocks.first() else {
        return Err(Error::InvalidInput("cannot stack zero blocks".into()));
    };
    let rows = first.nrows();
    if blocks.iter().any(|b| b.nrows() != rows) {
        return Err(Error::InvalidInput("blocks have different row counts".into()));
    }
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        out.view_mut((0, offset), (rows, b.ncols())).copy_from(b);
        offset += b.ncols();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn log_det_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_matrix(&mut rng, 5, 3);
        let s = outer_gram(&h);
        let via_chol = log2_det_identity_plus(&s).unwrap();
        let eig = hermitian_eigen(&s).unwrap();
        let via_eig: f64 = eig.values.iter().map(|l| (1.0 + l.max(0.0)).log2()).sum();
        assert!((via_chol - via_eig).abs() < 1e-12);
    }

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_matrix(&mut rng, 4, 6);
        let s = gram(&h);
        let eig = hermitian_eigen(&s).unwrap();
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            6,
            eig.values.iter().map(|&v| Complex64::new(v, 0.0)),
        ));
        let rebuilt = &eig.vectors * d * eig.vectors.adjoint();
        assert!(frobenius_norm(&(rebuilt - &s)) < 1e-12 * frobenius_norm(&s));
    }

    #[test]
    fn solve_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_matrix(&mut rng, 6, 6);
        let mut a = outer_gram(&h);
        add_to_diagonal(&mut a, 0.5);
        let b = random_matrix(&mut rng, 6, 2);
        let x = hermitian_solve(a.clone(), &b).unwrap();
        assert!(frobenius_norm(&(a * x - &b)) < 1e-12);
    }

    #[test]
    fn solve_rejects_indefinite() {
        let mut a = CMatrix::identity(3, 3);
        a[(1, 1)] = Complex64::new(-1.0, 0.0);
        assert!(matches!(
            hermitian_solve(a, &CMatrix::identity(3, 1)),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn hstack_layout() {
        let a = CMatrix::from_element(2, 1, Complex64::new(1.0, 0.0));
        let b = CMatrix::from_element(2, 2, Complex64::new(2.0, 0.0));
        let s = hstack(&[a, b]).unwrap();
        assert_eq!(s.shape(), (2, 3));
        assert_eq!(s[(1, 0)].re, 1.0);
        assert_eq!(s[(0, 2)].re, 2.0);
        assert!(hstack(&[]).is_err());
    }
}
