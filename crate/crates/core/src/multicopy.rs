//! n-copy analysis around the separable Werner state `ρ_s = (I₉ − |Ψ⟩⟨Ψ|)/8`.
//!
//! Over Schmidt-rank-two `ψ` (cut `A₁…Aₙ : B₁…Bₙ`), `⟨ψ|ρ_s^{⊗n}|ψ⟩` lies in
//! `[1/24ⁿ, 1/8ⁿ]`; the minimum is conjectured to be `½·12⁻ⁿ`. With
//! `σ^Γ ≥ 8p₁ ρ_s` this yields an explicit ε(n) below which `ρ(b, θ, ε)` is
//! n-undistillable. Only n ≤ 2 is computed.

use serde::Serialize;

use crate::config::ToleranceConfig;
use crate::edgestate::{build_rho, mes3, p1_formula, sigma_gamma_closed_form, EdgeParams};
use crate::error::{DistillError, Result};
use crate::qcore::{
    basis_vector, hermitian_eig, numeric_rank_kernel_range, quadratic_form, tensor_power_bipartite,
    BipartiteDims, BipartiteState, CMatrix, PureState, C64,
};
use crate::witness::min_rank2_expectation;

const MAX_N: usize = 2;
const BISECTION_STEPS: usize = 60;

fn check_n(n: usize) -> Result<()> {
    if !(1..=MAX_N).contains(&n) {
        return Err(DistillError::InvalidInput(format!(
            "n must be 1 or 2, got {n}"
        )));
    }
    Ok(())
}

/// Copy of `cfg` whose caps admit `n ≤ 2` two-qutrit copies.
fn with_caps(cfg: &ToleranceConfig) -> ToleranceConfig {
    ToleranceConfig {
        max_copies: cfg.max_copies.max(MAX_N),
        max_dim: cfg.max_dim.max(81),
        ..*cfg
    }
}

/// `ρ_s = (I₉ − |Ψ⟩⟨Ψ|)/8`.
pub fn werner_projector() -> BipartiteState {
    let m = (CMatrix::identity(9, 9) - mes3().projector()) * C64::from(0.125);
    BipartiteState::new_unchecked(m, BipartiteDims::qutrits())
}

/// `max |⟨Ψ|ψ⟩|²` over Schmidt-rank-two `ψ`, by minimizing `−|Ψ⟩⟨Ψ|`.
pub fn max_rank2_overlap_mes(cfg: &ToleranceConfig) -> Result<f64> {
    let x = -mes3().projector();
    Ok(-min_rank2_expectation(&x, BipartiteDims::qutrits(), cfg)?.value)
}

#[derive(Debug, Clone, Serialize)]
pub struct MulticopyReport {
    pub n: usize,
    pub max_value: f64,
    pub max_witness: PureState,
    /// Value at `|0…0⟩_A ⊗ |1…1⟩_B`.
    pub product_maximizer_value: f64,
    pub min_value: f64,
    pub min_witness: PureState,
    /// `1/24ⁿ`.
    pub bound_lower: f64,
    /// `1/8ⁿ`.
    pub bound_upper: f64,
    /// `½·12⁻ⁿ`, probed only.
    pub conjecture_value: f64,
    /// `min_value − bound_lower`.
    pub margin_estimate: f64,
    /// `min_value − conjecture_value`.
    pub conjecture_gap: f64,
    pub eps_threshold: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
}

/// Multistart max and min of `⟨ψ|ρ_s^{⊗n}|ψ⟩` over Schmidt-rank-two `ψ`.
/// Fails with [`DistillError::InvariantViolation`] if the min drops below
/// `1/24ⁿ − 1e-8` or the max exceeds `1/8ⁿ + 1e-10`.
pub fn extremal_rank2_tensor_power(n: usize, cfg: &ToleranceConfig) -> Result<MulticopyReport> {
    check_n(n)?;
    let cfg = with_caps(cfg);
    let rs = werner_projector();
    let (x, dims) = tensor_power_bipartite(rs.matrix(), rs.dims(), n, &cfg)?;

    let max = min_rank2_expectation(&-&x, dims, &cfg)?;
    let min = min_rank2_expectation(&x, dims, &cfg)?;
    let max_value = -max.value;

    // |0…0⟩ on the A side, |1…1⟩ on the B side.
    let b_index = (0..n).fold(0, |acc, _| acc * 3 + 1);
    let maximizer = basis_vector(dims.total(), b_index);
    let product_maximizer_value = quadratic_form(&x, &maximizer);

    let nf = n as i32;
    let bound_lower = 24f64.powi(-nf);
    let bound_upper = 8f64.powi(-nf);
    let conjecture_value = 0.5 * 12f64.powi(-nf);
    if min.value < bound_lower - 1e-8 {
        return Err(DistillError::InvariantViolation(format!(
            "rank-2 minimum {} is below 1/24^{n}",
            min.value
        )));
    }
    if max_value > bound_upper + 1e-10 || product_maximizer_value > bound_upper + 1e-10 {
        return Err(DistillError::InvariantViolation(format!(
            "rank-2 maximum {max_value} exceeds 1/8^{n}"
        )));
    }
    Ok(MulticopyReport {
        n,
        max_value,
        max_witness: PureState::new(max.vector(), dims)?,
        product_maximizer_value,
        min_value: min.value,
        min_witness: PureState::new(min.vector(), dims)?,
        bound_lower,
        bound_upper,
        conjecture_value,
        margin_estimate: min.value - bound_lower,
        conjecture_gap: min.value - conjecture_value,
        eps_threshold: None,
        restarts: min.restarts,
        seed: min.seed,
    })
}

/// `(p₁/3)ⁿ − Σ_{k=1..n} C(n,k) εᵏ ‖σ^Γ‖ⁿ⁻ᵏ`, a lower bound on the rank-two
/// values of `(ρ^Γ)^{⊗n}`.
pub fn analytic_bound(p1: f64, sigma_gamma_norm: f64, eps: f64, n: usize) -> f64 {
    let mut binom = 1.0;
    let mut cross = 0.0;
    for k in 1..=n {
        binom = binom * (n + 1 - k) as f64 / k as f64;
        cross += binom * eps.powi(k as i32) * sigma_gamma_norm.powi((n - k) as i32);
    }
    (p1 / 3.0).powi(n as i32) - cross
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsThreshold {
    pub n: usize,
    pub eps: f64,
    pub p1: f64,
    pub sigma_gamma_norm: f64,
    /// [`analytic_bound`] at `eps`; strictly positive.
    pub bound_at_eps: f64,
    /// The cross-term estimate is an operator-norm bound, not part of the
    /// original argument.
    pub engineering_bound: bool,
}

/// Largest dyadic fraction `ε` of `p₁/3` (60 bisection steps) with
/// [`analytic_bound`] strictly positive.
pub fn eps_threshold_for_n(
    params: &EdgeParams,
    n: usize,
    cfg: &ToleranceConfig,
) -> Result<EpsThreshold> {
    check_n(n)?;
    let p = EdgeParams::new(params.b, params.theta, 0.0)?;
    let p1 = p1_formula(&p);
    let norm = hermitian_eig(&sigma_gamma_closed_form(&p)?, cfg)?.max();
    let f = |e: f64| analytic_bound(p1, norm, e, n);
    let (mut lo, mut hi) = (0.0, p1 / 3.0);
    if f(hi) > 0.0 {
        lo = hi;
    } else {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(EpsThreshold {
        n,
        eps: lo,
        p1,
        sigma_gamma_norm: norm,
        bound_at_eps: f(lo),
        engineering_bound: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UndistillabilityReport {
    pub n: usize,
    pub params: EdgeParams,
    pub threshold: EpsThreshold,
    /// [`analytic_bound`] at the ε used.
    pub analytic_bound: f64,
    pub numeric_min: f64,
    pub min_witness: PureState,
    /// Smallest eigenvalue of `ρ^Γ`; negative.
    pub rho_pt_min_eigenvalue: f64,
    pub restarts: usize,
    pub seed: u64,
    pub engineering_bound: bool,
}

/// Builds `ρ` with `ε = min(params.eps, ε(n)/2)` (default ε when
/// `params.eps` is zero), then checks that the rank-two minimum of
/// `(ρ^Γ)^{⊗n}` is positive and above [`analytic_bound`] while `ρ` is NPT.
pub fn verify_n_undistillable(
    params: &EdgeParams,
    n: usize,
    cfg: &ToleranceConfig,
) -> Result<UndistillabilityReport> {
    check_n(n)?;
    let cfg = with_caps(cfg);
    let threshold = eps_threshold_for_n(params, n, &cfg)?;
    let requested = if params.eps > 0.0 {
        params.eps
    } else {
        EdgeParams::with_default_eps(params.b, params.theta)?.eps
    };
    let eps = requested.min(threshold.eps / 2.0);
    let bundle = build_rho(&EdgeParams::new(params.b, params.theta, eps)?, &cfg)?;
    let eps = bundle.params.eps;

    let pt = bundle.rho.partial_transpose();
    let rho_pt_min_eigenvalue = hermitian_eig(&pt, &cfg)?.min();
    if rho_pt_min_eigenvalue >= -cfg.psd_tol {
        return Err(DistillError::InvariantViolation("rho is not NPT".into()));
    }
    let (x, dims) = tensor_power_bipartite(&pt, bundle.rho.dims(), n, &cfg)?;
    let min = min_rank2_expectation(&x, dims, &cfg)?;
    let bound = analytic_bound(threshold.p1, threshold.sigma_gamma_norm, eps, n);
    if !(min.value > 0.0 && min.value >= bound - 1e-8) {
        return Err(DistillError::InvariantViolation(format!(
            "rank-2 minimum {} of {n} copies violates the bound {bound}",
            min.value
        )));
    }
    Ok(UndistillabilityReport {
        n,
        params: bundle.params,
        threshold,
        analytic_bound: bound,
        numeric_min: min.value,
        min_witness: PureState::new(min.vector(), dims)?,
        rho_pt_min_eigenvalue,
        restarts: min.restarts,
        seed: min.seed,
        engineering_bound: true,
    })
}

/// Smallest eigenvalue of `(σ^Γ)^{⊗n} − (8p₁)ⁿ ρ_s^{⊗n}`; should be `≥ −psd_tol`.
pub fn operator_bound_min_eigenvalue(
    params: &EdgeParams,
    n: usize,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    check_n(n)?;
    let cfg = with_caps(cfg);
    let p = EdgeParams::new(params.b, params.theta, 0.0)?;
    let dims = BipartiteDims::qutrits();
    let (sg, _) = tensor_power_bipartite(&sigma_gamma_closed_form(&p)?, dims, n, &cfg)?;
    let (rs, _) = tensor_power_bipartite(werner_projector().matrix(), dims, n, &cfg)?;
    let scale = (8.0 * p1_formula(&p)).powi(n as i32);
    Ok(hermitian_eig(&(sg - rs * C64::from(scale)), &cfg)?.min())
}

/// Rank of `ρ_s`, exposed for checks.
pub fn werner_rank(cfg: &ToleranceConfig) -> usize {
    numeric_rank_kernel_range(werner_projector().matrix(), cfg.rank_rel_tol).rank
}
