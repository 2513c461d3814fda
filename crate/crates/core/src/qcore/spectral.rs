use nalgebra::DVector;

use super::matrix::{hermiticity_error, CMatrix, CVector, C64};
use crate::config::ToleranceConfig;
use crate::error::{DistillError, Result};

const EIG_MAX_ITERS: usize = 10_000;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// as columns.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralData {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let lam = CMatrix::from_diagonal(&self.eigenvalues.map(C64::from));
        &self.eigenvectors * lam * self.eigenvectors.adjoint()
    }

    pub fn count_below(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < threshold).count()
    }

    pub fn count_above(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > threshold).count()
    }
}

/// Eigendecomposition of a Hermitian matrix. Non-Hermitian input is an input
/// error; a stalled QR iteration is reported as [`DistillError::Convergence`].
pub fn hermitian_eig(m: &CMatrix, cfg: &ToleranceConfig) -> Result<SpectralData> {
    if !m.is_square() {
        return Err(DistillError::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let herm = hermiticity_error(m);
    if herm > cfg.herm_tol * m.camax().max(1.0) {
        return Err(DistillError::NotHermitian(herm));
    }
    let sym = (m + m.adjoint()) * C64::from(0.5);
    let n = sym.nrows();
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, EIG_MAX_ITERS)
        .ok_or(DistillError::Convergence(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
    })
}

pub fn min_eigenvalue(m: &CMatrix, cfg: &ToleranceConfig) -> Result<f64> {
    Ok(hermitian_eig(m, cfg)?.min())
}

/// Numeric rank with orthonormal bases (as columns) of the kernel and range.
#[derive(Debug, Clone)]
pub struct RankKernelRange {
    pub rank: usize,
    pub kernel: CMatrix,
    pub range: CMatrix,
    pub singular_values: Vec<f64>,
}

/// SVD of `m` padded with zero rows to at least square, with singular values
/// sorted descending. Returns `(s, U restricted to m's rows, V)`.
fn padded_svd(m: &CMatrix) -> (Vec<f64>, CMatrix, CMatrix) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = CMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V^T").adjoint();
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = CMatrix::from_fn(r, k, |i, j| u[(i, order[j])]);
    let v = CMatrix::from_fn(c, k, |i, j| v[(i, order[j])]);
    (s, u, v)
}

/// Rank by relative thresholding `σ > rel_tol · σ_max`; rank + dim ker = cols.
pub fn numeric_rank_kernel_range(m: &CMatrix, rel_tol: f64) -> RankKernelRange {
    let (s, u, v) = padded_svd(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 {
        0
    } else {
        s.iter().filter(|&&x| x > rel_tol * smax).count()
    };
    let cols = m.ncols();
    let kernel = v.columns(rank, cols - rank).into_owned();
    let range = u.columns(0, rank).into_owned();
    RankKernelRange {
        rank,
        kernel,
        range,
        singular_values: s,
    }
}

/// Smallest singular value of `m` and a unit right singular vector for it.
/// Wide matrices have a nontrivial kernel and report 0.
pub fn smallest_right_singular(m: &CMatrix) -> (f64, CVector) {
    let (s, _, v) = padded_svd(m);
    let k = s.len() - 1;
    (s[k], v.column(k).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;

    fn random_hermitian(rng: &mut StreamRng, d: usize) -> CMatrix {
        let g = rng.ginibre(d, d);
        (&g + g.adjoint()) * C64::from(0.5)
    }

    #[test]
    fn diagonal_sorted() {
        let m =
            CMatrix::from_diagonal(&CVector::from_vec(vec![3.0.into(), 1.0.into(), 2.0.into()]));
        let s = hermitian_eig(&m, &ToleranceConfig::default()).unwrap();
        assert_eq!(s.eigenvalues.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 2)] = C64::from(1.0);
        assert!(matches!(
            hermitian_eig(&m, &ToleranceConfig::default()),
            Err(DistillError::NotHermitian(_))
        ));
    }

    #[test]
    fn reconstruction_and_orthonormality_on_random_matrices() {
        let cfg = ToleranceConfig::default();
        let mut rng = StreamRng::new(77);
        for trial in 0..100 {
            let d = if trial % 2 == 0 { 9 } else { 81 };
            let m = random_hermitian(&mut rng, d);
            let s = hermitian_eig(&m, &cfg).unwrap();
            let rec = (s.reconstruct() - &m).camax();
            assert!(rec <= cfg.spec_tol * m.camax(), "trial {trial}: {rec}");
            let orth =
                (s.eigenvectors.adjoint() * &s.eigenvectors - CMatrix::identity(d, d)).camax();
            assert!(orth <= cfg.spec_tol, "trial {trial}: {orth}");
            assert!(s.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let r = numeric_rank_kernel_range(&CMatrix::zeros(4, 4), 1e-8);
        assert_eq!(r.rank, 0);
        assert_eq!(r.kernel.ncols(), 4);
    }

    #[test]
    fn rank_plus_kernel_is_cols_for_wide_and_tall() {
        let mut rng = StreamRng::new(8);
        let g = rng.ginibre(6, 2);
        let low = &g * g.adjoint(); // rank 2
        let r = numeric_rank_kernel_range(&low, 1e-8);
        assert_eq!(r.rank, 2);
        assert_eq!(r.kernel.ncols(), 4);
        assert!((&low * &r.kernel).camax() < 1e-12);
        let wide = rng.ginibre(2, 5);
        let r = numeric_rank_kernel_range(&wide, 1e-8);
        assert_eq!(r.rank + r.kernel.ncols(), 5);
        assert!((&wide * &r.kernel).camax() < 1e-12);
        assert_eq!(r.range.nrows(), 2);
        let orth = (r.kernel.adjoint() * &r.kernel - CMatrix::identity(3, 3)).camax();
        assert!(orth < 1e-12);
    }

    #[test]
    fn smallest_singular_of_wide_is_zero() {
        let mut rng = StreamRng::new(9);
        let wide = rng.ginibre(2, 3);
        let (s, v) = smallest_right_singular(&wide);
        assert!(s < 1e-14);
        assert!((&wide * v).norm() < 1e-12);
    }
}
