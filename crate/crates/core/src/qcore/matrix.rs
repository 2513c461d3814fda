use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{DistillError, Result};

pub type C64 = Complex64;
/// Dense complex matrix. Stored column-major by nalgebra; all file formats and
/// constructors in this crate speak row-major.
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn matrix_from_rows(rows: usize, cols: usize, data: &[C64]) -> Result<CMatrix> {
    if rows == 0 || cols == 0 {
        return Err(DistillError::InvalidInput(
            "matrix dimensions must be positive".into(),
        ));
    }
    if data.len() != rows * cols {
        return Err(DistillError::DimensionMismatch(format!(
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            data.len()
        )));
    }
    let m = CMatrix::from_row_slice(rows, cols, data);
    check_finite(&m)?;
    Ok(m)
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(DistillError::InvalidInput(
            "matrix has non-finite entries".into(),
        ))
    }
}

/// Largest entry of `|m - m†|`; infinite for non-square input.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `|v⟩⟨v|`.
pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Real part of `⟨v|x|v⟩` (exact for Hermitian `x`).
pub fn quadratic_form(x: &CMatrix, v: &CVector) -> f64 {
    v.dotc(&(x * v)).re
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = C64::from(1.0);
    v
}

/// Extend orthonormal columns `cols` to `target` orthonormal columns of
/// dimension `cols.nrows()`, by Gram–Schmidt against standard basis vectors.
pub fn complete_orthonormal(cols: &CMatrix, target: usize) -> CMatrix {
    let dim = cols.nrows();
    let mut basis: Vec<CVector> = cols.column_iter().map(|c| c.into_owned()).collect();
    let mut candidate = 0;
    while basis.len() < target && candidate < dim {
        let mut v = basis_vector(dim, candidate);
        candidate += 1;
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            basis.push(v / C64::from(n));
        }
    }
    CMatrix::from_columns(&basis)
}
