use crate::config::ToleranceConfig;
use crate::error::{DistillError, Result};
use crate::qcore::{
    complete_orthonormal, hermitian_eig, numeric_rank_kernel_range, partial_transpose,
    quadratic_form, tensor_power_bipartite, vector_as_matrix, BipartiteDims, BipartiteState,
    CMatrix, CVector, C64,
};
use crate::rng::StreamRng;

use super::certificate::{Route, WitnessCertificate};
use super::optimizer::min_rank2_expectation;
use super::product::product_vector_in_subspace;

const PERTURBATION_SCHEDULE: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Result of [`submatrix_2x2_scan`].
#[derive(Debug, Clone)]
pub struct SubmatrixWitness {
    /// A-basis indices `k < l` of the two diagonal blocks.
    pub blocks: (usize, usize),
    /// Row indices of the principal 2×2 submatrix of `ρ^Γ`.
    pub rows: (usize, usize),
    pub determinant: f64,
    pub certificate: WitnessCertificate,
}

fn require_qutrits(dims: BipartiteDims, what: &str) -> Result<()> {
    if dims != BipartiteDims::qutrits() {
        return Err(DistillError::InvalidInput(format!(
            "{what} applies to two-qutrit states, got ({}, {})",
            dims.dim_a, dims.dim_b
        )));
    }
    Ok(())
}

fn scan_pt(
    pt: &CMatrix,
    dims: BipartiteDims,
    cfg: &ToleranceConfig,
) -> Result<Option<SubmatrixWitness>> {
    let n = dims.dim_b;
    let d = dims.total();
    let mut best: Option<(f64, usize, usize)> = None;
    for r1 in 0..d {
        for r2 in (r1 + 1)..d {
            if r1 / n == r2 / n {
                continue;
            }
            let det = pt[(r1, r1)].re * pt[(r2, r2)].re - pt[(r1, r2)].norm_sqr();
            if det < 0.0 && best.is_none_or(|(b, _, _)| det < b) {
                best = Some((det, r1, r2));
            }
        }
    }
    let Some((determinant, r1, r2)) = best else {
        return Ok(None);
    };
    let (k, l) = (r1 / n, r2 / n);
    // Compress ρ^Γ to span{|k⟩,|l⟩} ⊗ C^N, a 2×N system.
    let idx: Vec<usize> = (0..n)
        .map(|x| k * n + x)
        .chain((0..n).map(|x| l * n + x))
        .collect();
    let block = CMatrix::from_fn(2 * n, 2 * n, |i, j| pt[(idx[i], idx[j])]);
    let spec = hermitian_eig(&block, cfg)?;
    let w = spec.vector(0);
    let mut v = CVector::zeros(d);
    for (i, &target) in idx.iter().enumerate() {
        v[target] = w[i];
    }
    let certificate = WitnessCertificate::build(v, dims, pt, 1, Route::Submatrix2x2, cfg)?;
    if !certificate.is_witness(cfg) {
        return Ok(None);
    }
    Ok(Some(SubmatrixWitness {
        blocks: (k, l),
        rows: (r1, r2),
        determinant,
        certificate,
    }))
}

/// Looks for a principal 2×2 submatrix of `ρ^Γ` with negative determinant
/// whose diagonal entries sit in different diagonal blocks `k ≠ l`. The most
/// negative determinant wins; the certificate is the bottom eigenvector of
/// `ρ^Γ` compressed to `span{|k⟩,|l⟩} ⊗ C^N`, which has Schmidt rank ≤ 2.
pub fn submatrix_2x2_scan(
    rho: &BipartiteState,
    cfg: &ToleranceConfig,
) -> Result<Option<SubmatrixWitness>> {
    scan_pt(&rho.partial_transpose(), rho.dims(), cfg)
}

/// Zero out everything but the two leading Schmidt components.
fn truncate_rank2(v: &CVector, dims: BipartiteDims) -> Result<CVector> {
    let xi = vector_as_matrix(v, dims)?;
    let mut svd = xi.svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    for &i in order.iter().skip(2) {
        svd.singular_values[i] = 0.0;
    }
    let t = svd
        .recompose()
        .map_err(|e| DistillError::NumericalFailure(e.to_string()))?;
    Ok(CVector::from_fn(dims.total(), |r, _| {
        t[(r / dims.dim_b, r % dims.dim_b)]
    }))
}

fn is_rank_deficient(m: &CMatrix, cfg: &ToleranceConfig) -> bool {
    numeric_rank_kernel_range(m, cfg.rank_rel_tol).rank < m.nrows()
}

/// For invertible `A = mat(α)`, every nonzero eigenvalue `s` of `A⁻¹B` gives
/// `t = −1/s` with `det(A + tB) = 0`. Returns the lowest-valued normalized
/// `α + tβ` (truncated to Schmidt rank 2), or `None` when `A⁻¹B` is nilpotent.
fn singular_combination(
    alpha: &CVector,
    beta: &CVector,
    pt: &CMatrix,
    dims: BipartiteDims,
    cfg: &ToleranceConfig,
) -> Result<Option<(f64, CVector)>> {
    let a = vector_as_matrix(alpha, dims)?;
    let b = vector_as_matrix(beta, dims)?;
    let Some(a_inv) = a.clone().try_inverse() else {
        return Ok(None);
    };
    let nmat = a_inv * b;
    let scale = nmat.camax().max(f64::MIN_POSITIVE);
    let eigs = nmat.clone().schur().eigenvalues().ok_or_else(|| {
        DistillError::NumericalFailure("Schur form of A⁻¹B is not triangular".into())
    })?;
    let mut best: Option<(f64, CVector)> = None;
    for s in eigs.iter().filter(|s| s.norm() > cfg.rank_rel_tol * scale) {
        let t = -C64::from(1.0) / s;
        let phi = truncate_rank2(&(alpha + beta * t), dims)?;
        let phi = &phi / C64::from(phi.norm());
        let value = quadratic_form(pt, &phi);
        if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
            best = Some((value, phi));
        }
    }
    Ok(best)
}

/// Two-nonpositive-eigenvalue route on a given partial transpose `pt` (which
/// need not come from a PSD state).
pub fn two_nonpositive_from_pt(
    pt: &CMatrix,
    dims: BipartiteDims,
    cfg: &ToleranceConfig,
) -> Result<Option<WitnessCertificate>> {
    require_qutrits(dims, "the two-nonpositive-eigenvalue route")?;
    let spec = hermitian_eig(pt, cfg)?;
    let (lambda, mu) = (spec.eigenvalues[0], spec.eigenvalues[1]);
    if lambda >= -cfg.psd_tol || mu > cfg.psd_tol {
        return Ok(None);
    }
    let alpha = spec.vector(0);
    let beta = spec.vector(1);
    let build = |v: CVector| WitnessCertificate::build(v, dims, pt, 1, Route::TwoNonpositive, cfg);

    if is_rank_deficient(&vector_as_matrix(&alpha, dims)?, cfg) {
        let cert = build(truncate_rank2(&alpha, dims)?)?;
        if cert.is_witness(cfg) {
            return Ok(Some(cert));
        }
    }
    if mu < -cfg.psd_tol && is_rank_deficient(&vector_as_matrix(&beta, dims)?, cfg) {
        let cert = build(truncate_rank2(&beta, dims)?)?;
        if cert.is_witness(cfg) {
            return Ok(Some(cert));
        }
    }
    if let Some((value, phi)) = singular_combination(&alpha, &beta, pt, dims, cfg)? {
        if value < -cfg.psd_tol {
            let cert = build(phi)?;
            if cert.is_witness(cfg) {
                return Ok(Some(cert));
            }
        }
    }

    // A⁻¹B nilpotent (or no usable root): move α slightly, keeping it
    // orthogonal to β so the cross term with β vanishes.
    let mut rng = StreamRng::new(cfg.seed);
    for _ in 0..cfg.opt_restarts {
        let mut eta = rng.unit_vector(dims.total());
        let c = beta.dotc(&eta);
        eta -= &beta * c;
        for delta in PERTURBATION_SCHEDULE {
            let moved = &alpha + &eta * C64::from(delta);
            let moved = &moved / C64::from(moved.norm());
            if quadratic_form(pt, &moved) >= -cfg.psd_tol {
                continue;
            }
            if let Some((value, phi)) = singular_combination(&moved, &beta, pt, dims, cfg)? {
                if value < -cfg.psd_tol {
                    let mut cert = build(phi)?;
                    if cert.is_witness(cfg) {
                        cert.perturbation = Some(delta);
                        return Ok(Some(cert));
                    }
                }
            }
        }
    }
    Err(DistillError::NumericalFailure(format!(
        "no singular combination found after {} perturbation rounds",
        cfg.opt_restarts
    )))
}

/// If `ρ^Γ` of a two-qutrit state has a negative eigenvalue `λ` and a second
/// nonpositive one `μ`, combine their eigenvectors `α + tβ` so that the
/// coefficient matrix is singular; the value stays below zero. Returns `None`
/// when the hypothesis fails.
pub fn two_nonpositive_witness(
    rho: &BipartiteState,
    cfg: &ToleranceConfig,
) -> Result<Option<WitnessCertificate>> {
    two_nonpositive_from_pt(&rho.partial_transpose(), rho.dims(), cfg)
}

/// If `ker ρ` contains a product vector `a ⊗ b`, rotate it to `|0,0⟩`. Then
/// either the first column of `ρ^Γ` is nonzero and a 2×2 minor through the
/// zero diagonal entry is negative, or `|0,0⟩ ∈ ker ρ^Γ` and `ρ^Γ` has two
/// nonpositive eigenvalues. The certificate is mapped back to the original
/// basis.
pub fn kernel_product_witness(
    rho: &BipartiteState,
    cfg: &ToleranceConfig,
) -> Result<Option<WitnessCertificate>> {
    let dims = rho.dims();
    require_qutrits(dims, "the kernel-product route")?;
    let pt = rho.partial_transpose();
    if hermitian_eig(&pt, cfg)?.min() >= -cfg.psd_tol {
        return Ok(None);
    }
    let kernel = numeric_rank_kernel_range(rho.matrix(), cfg.rank_rel_tol).kernel;
    let Some(pv) = product_vector_in_subspace(&kernel, dims, cfg)? else {
        return Ok(None);
    };
    // U a = |0⟩, V b = |0⟩.
    let u = complete_orthonormal(
        &CMatrix::from_columns(std::slice::from_ref(&pv.a)),
        dims.dim_a,
    )
    .adjoint();
    let v = complete_orthonormal(
        &CMatrix::from_columns(std::slice::from_ref(&pv.b)),
        dims.dim_b,
    )
    .adjoint();
    let uv = u.kronecker(&v);
    let rotated = &uv * rho.matrix() * uv.adjoint();
    let pt_rot = partial_transpose(&rotated, dims)?;
    let first_col = (1..dims.total())
        .map(|r| pt_rot[(r, 0)].norm())
        .fold(0.0, f64::max);

    if first_col > cfg.rank_rel_tol * pt_rot.camax() {
        if let Some(w) = scan_pt(&pt_rot, dims, cfg)? {
            // (ρ')^Γ = (Ū ⊗ V) ρ^Γ (Ū ⊗ V)†, so ψ = (Uᵀ ⊗ V†) ψ'.
            let back = u.transpose().kronecker(&v.adjoint());
            let psi = back * w.certificate.psi.vector();
            let cert = WitnessCertificate::build(psi, dims, &pt, 1, Route::KernelProduct, cfg)?;
            if cert.is_witness(cfg) {
                return Ok(Some(cert));
            }
        }
    }
    match two_nonpositive_from_pt(&pt, dims, cfg) {
        Ok(Some(mut cert)) => {
            cert.route = Route::KernelProduct;
            Ok(Some(cert))
        }
        Ok(None) | Err(DistillError::NumericalFailure(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Outcome of [`certify_1_distillable`].
#[derive(Debug, Clone)]
pub enum Certification {
    /// `ρ^Γ ≥ 0`: no witness can exist.
    Ppt,
    Certified(WitnessCertificate),
    /// Every route came up empty. This is not a proof of undistillability.
    NoWitness {
        restarts: usize,
        best_value: f64,
        seed: u64,
    },
}

impl Certification {
    pub fn certificate(&self) -> Option<&WitnessCertificate> {
        match self {
            Certification::Certified(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.certificate().is_some()
    }
}

fn swallow_numerical<T>(r: Result<Option<T>>) -> Result<Option<T>> {
    match r {
        Err(DistillError::NumericalFailure(_)) => Ok(None),
        other => other,
    }
}

/// Tries the constructive routes in order (2×N bottom eigenvector, 2×2 minor
/// scan, two nonpositive eigenvalues, kernel product vector) and falls back
/// to the rank-2 optimizer on `ρ^Γ`.
pub fn certify_1_distillable(rho: &BipartiteState, cfg: &ToleranceConfig) -> Result<Certification> {
    let dims = rho.dims();
    let pt = rho.partial_transpose();
    let spec = hermitian_eig(&pt, cfg)?;
    if spec.min() >= -cfg.psd_tol {
        return Ok(Certification::Ppt);
    }
    if dims.dim_a.min(dims.dim_b) <= 2 {
        let cert = WitnessCertificate::build(spec.vector(0), dims, &pt, 1, Route::TwoByN, cfg)?;
        if cert.is_witness(cfg) {
            return Ok(Certification::Certified(cert));
        }
    }
    if let Some(w) = scan_pt(&pt, dims, cfg)? {
        return Ok(Certification::Certified(w.certificate));
    }
    if dims == BipartiteDims::qutrits() {
        if let Some(c) = swallow_numerical(two_nonpositive_from_pt(&pt, dims, cfg))? {
            return Ok(Certification::Certified(c));
        }
        if let Some(c) = swallow_numerical(kernel_product_witness(rho, cfg))? {
            return Ok(Certification::Certified(c));
        }
    }
    let min = min_rank2_expectation(&pt, dims, cfg)?;
    if min.value < -cfg.psd_tol {
        let mut cert =
            WitnessCertificate::build(min.vector(), dims, &pt, 1, Route::Optimizer, cfg)?;
        cert.seed = Some(min.seed);
        cert.restarts = Some(min.restarts);
        if cert.is_witness(cfg) {
            return Ok(Certification::Certified(cert));
        }
    }
    Ok(Certification::NoWitness {
        restarts: min.restarts,
        best_value: min.value,
        seed: min.seed,
    })
}

/// Witness search on `copies` copies of `ρ`. One copy runs
/// [`certify_1_distillable`]; more copies run the rank-2 optimizer on
/// `(ρ^Γ)^{⊗copies}` across the cut `A₁…Aₙ : B₁…Bₙ`.
pub fn certify_n_copies(
    rho: &BipartiteState,
    copies: usize,
    cfg: &ToleranceConfig,
) -> Result<Certification> {
    if copies == 1 {
        return certify_1_distillable(rho, cfg);
    }
    let pt = rho.partial_transpose();
    if hermitian_eig(&pt, cfg)?.min() >= -cfg.psd_tol {
        return Ok(Certification::Ppt);
    }
    let (x, dims) = tensor_power_bipartite(&pt, rho.dims(), copies, cfg)?;
    let min = min_rank2_expectation(&x, dims, cfg)?;
    if min.value < -cfg.psd_tol {
        let mut cert =
            WitnessCertificate::build(min.vector(), dims, &x, copies, Route::Optimizer, cfg)?;
        cert.seed = Some(min.seed);
        cert.restarts = Some(min.restarts);
        if cert.is_witness(cfg) {
            return Ok(Certification::Certified(cert));
        }
    }
    Ok(Certification::NoWitness {
        restarts: min.restarts,
        best_value: min.value,
        seed: min.seed,
    })
}
