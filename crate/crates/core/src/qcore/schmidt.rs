use super::bipartite::{BipartiteDims, PureState};
use super::matrix::{CMatrix, CVector};
use crate::error::{DistillError, Result};

/// `ψ = Σ_k s_k |left_k⟩ ⊗ |right_k⟩` with `s` descending.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left: CMatrix,
    pub right: CMatrix,
    pub rank: usize,
}

/// The `M×N` coefficient matrix `[ξ_ij]` of `Σ ξ_ij |i, j⟩`.
pub fn vector_as_matrix(v: &CVector, dims: BipartiteDims) -> Result<CMatrix> {
    dims.check_vector(v)?;
    Ok(CMatrix::from_fn(dims.dim_a, dims.dim_b, |i, j| {
        v[i * dims.dim_b + j]
    }))
}

pub fn schmidt_decompose(psi: &PureState, rel_tol: f64) -> Result<SchmidtDecomposition> {
    decompose_vector(psi.vector(), psi.dims(), rel_tol)
}

pub(crate) fn decompose_vector(
    v: &CVector,
    dims: BipartiteDims,
    rel_tol: f64,
) -> Result<SchmidtDecomposition> {
    let xi = vector_as_matrix(v, dims)?;
    if xi.camax() == 0.0 {
        return Err(DistillError::InvalidInput(
            "Schmidt decomposition of the zero vector".into(),
        ));
    }
    let svd = xi.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = CMatrix::from_fn(dims.dim_a, k, |i, j| u[(i, order[j])]);
    // ξ = U S V†, so the right Schmidt vectors are the rows of V† read as columns.
    let right = CMatrix::from_fn(dims.dim_b, k, |i, j| v_t[(order[j], i)]);
    let smax = coefficients[0];
    let rank = coefficients.iter().filter(|&&s| s > rel_tol * smax).count();
    Ok(SchmidtDecomposition {
        coefficients,
        left,
        right,
        rank,
    })
}

pub fn schmidt_rank(v: &CVector, dims: BipartiteDims, rel_tol: f64) -> Result<usize> {
    Ok(decompose_vector(v, dims, rel_tol)?.rank)
}
