use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::error::{DistillError, Result};
use crate::qcore::{
    partial_transpose, quadratic_form, schmidt_rank, tensor_power_bipartite, BipartiteDims,
    BipartiteState, CMatrix, CVector, PureState, C64,
};

/// Tolerance on the agreement between a stored and a recomputed witness value.
pub const VALUE_MATCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Route {
    /// Negative principal 2×2 minor of `ρ^Γ` across two A-blocks.
    Submatrix2x2,
    /// Combination of two eigenvectors of `ρ^Γ` with nonpositive eigenvalues.
    TwoNonpositive,
    /// Product vector in `ker ρ`, reduced to one of the two routes above.
    KernelProduct,
    /// Multistart rank-2 minimization.
    Optimizer,
    /// One local dimension is 2, so the bottom eigenvector of `ρ^Γ` qualifies.
    TwoByN,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Route::Submatrix2x2 => "submatrix2x2",
            Route::TwoNonpositive => "twoNonpositive",
            Route::KernelProduct => "kernelProduct",
            Route::Optimizer => "optimizer",
            Route::TwoByN => "twoByN",
        };
        f.write_str(s)
    }
}

/// A normalized `ψ` of Schmidt rank ≤ 2 across `A1…An : B1…Bn` and its value
/// `⟨ψ|(ρ^{⊗n})^Γ|ψ⟩`.
#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    pub psi: PureState,
    pub value: f64,
    pub copies: usize,
    pub route: Route,
    pub schmidt_rank: usize,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    /// Size of the perturbation used when `A⁻¹B` was nilpotent.
    pub perturbation: Option<f64>,
}

impl WitnessCertificate {
    /// Normalizes `v` and records its value against `pt`, the partial
    /// transpose of `ρ^{⊗copies}`.
    pub(crate) fn build(
        v: CVector,
        dims: BipartiteDims,
        pt: &CMatrix,
        copies: usize,
        route: Route,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let psi = PureState::new(v, dims)?;
        let value = quadratic_form(pt, psi.vector());
        let schmidt_rank = schmidt_rank(psi.vector(), dims, cfg.rank_rel_tol)?;
        Ok(Self {
            psi,
            value,
            copies,
            route,
            schmidt_rank,
            seed: None,
            restarts: None,
            perturbation: None,
        })
    }

    pub(crate) fn is_witness(&self, cfg: &ToleranceConfig) -> bool {
        self.schmidt_rank <= 2 && self.value < -cfg.psd_tol
    }
}

/// Recomputes the Schmidt rank and value of `cert` from `ρ` alone. True iff
/// the rank is at most 2, the value is below `-psd_tol` and agrees with the
/// stored value to 1e-10.
pub fn verify_certificate(
    cert: &WitnessCertificate,
    rho: &BipartiteState,
    copies: usize,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    let expected = rho.dims().pow(copies as u32);
    if cert.psi.dims() != expected {
        return Err(DistillError::DimensionMismatch(format!(
            "certificate lives on ({}, {}) but {copies} copies of the state live on ({}, {})",
            cert.psi.dims().dim_a,
            cert.psi.dims().dim_b,
            expected.dim_a,
            expected.dim_b
        )));
    }
    if cert.copies != copies {
        return Ok(false);
    }
    let pt = partial_transpose(rho.matrix(), rho.dims())?;
    let (pt_n, _) = tensor_power_bipartite(&pt, rho.dims(), copies, cfg)?;
    let v = cert.psi.vector();
    let norm2 = v.norm_squared();
    if norm2 == 0.0 {
        return Ok(false);
    }
    let value = quadratic_form(&pt_n, &(v / C64::from(norm2.sqrt())));
    let rank = schmidt_rank(v, expected, cfg.rank_rel_tol)?;
    Ok(rank <= 2 && value < -cfg.psd_tol && (value - cert.value).abs() <= VALUE_MATCH_TOL)
}
