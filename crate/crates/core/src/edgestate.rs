//! The two-qutrit edge-state family `σ(b, θ)` (birank (8, 5)) and the rank-5
//! NPT state `ρ = σ − ε|f,g⟩⟨f,g|` that admits no Schmidt-rank-two witness.
//!
//! `σ^Γ ≥ p₁ (I − |Ψ⟩⟨Ψ|)` with `|Ψ⟩` the maximally entangled state, and every
//! Schmidt-rank-two `ψ` has `|⟨Ψ|ψ⟩|² ≤ 2/3`, so `⟨ψ|ρ^Γ|ψ⟩ ≥ p₁/3 − ε`.

use std::f64::consts::FRAC_PI_3;

use serde::Serialize;

use crate::config::ToleranceConfig;
use crate::error::{DistillError, Result};
use crate::qcore::{
    hermitian_eig, numeric_rank_kernel_range, projector, BipartiteDims, BipartiteState, CMatrix,
    CVector, PureState, C64,
};
use crate::rng::StreamRng;
use crate::witness::{certify_1_distillable, min_rank2_expectation, Certification};

/// Fraction of `p₁/3` used when no ε is given.
pub const DEFAULT_EPS_FRACTION: f64 = 0.9;
const MIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeParams {
    pub b: f64,
    pub theta: f64,
    pub eps: f64,
}

impl EdgeParams {
    /// Requires `b > 0`, `0 < |θ| < π/3` and `ε ≥ 0`.
    pub fn new(b: f64, theta: f64, eps: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(DistillError::InvalidInput(format!(
                "b must be positive, got {b}"
            )));
        }
        if !(theta.is_finite() && theta != 0.0 && theta.abs() < FRAC_PI_3) {
            return Err(DistillError::InvalidInput(format!(
                "theta must satisfy 0 < |theta| < pi/3, got {theta}"
            )));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(DistillError::InvalidInput(format!(
                "eps must be nonnegative, got {eps}"
            )));
        }
        Ok(Self { b, theta, eps })
    }

    /// `ε = 0.9 · p₁/3`.
    pub fn with_default_eps(b: f64, theta: f64) -> Result<Self> {
        let p = Self::new(b, theta, 0.0)?;
        Ok(Self {
            eps: DEFAULT_EPS_FRACTION * p1_formula(&p) / 3.0,
            ..p
        })
    }

    fn normalization(&self) -> f64 {
        1.0 / (3.0 * (2.0 * self.theta.cos() + self.b + 1.0 / self.b))
    }
}

/// The fixed `(b, θ)` grid `{1/2, 1, 2} × {±π/6, ±π/4}` used by the suites.
pub fn default_grid() -> Vec<(f64, f64)> {
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
    let mut grid = Vec::new();
    for b in [0.5, 1.0, 2.0] {
        for theta in [FRAC_PI_6, -FRAC_PI_6, FRAC_PI_4, -FRAC_PI_4] {
            grid.push((b, theta));
        }
    }
    grid
}

fn fill(entries: &[(usize, usize, C64)], scale: f64) -> CMatrix {
    let mut m = CMatrix::zeros(9, 9);
    for &(r, c, v) in entries {
        m[(r, c)] = v * scale;
    }
    m
}

/// The 9×9 edge state, trace 1, rank 5.
pub fn build_sigma(params: &EdgeParams) -> Result<BipartiteState> {
    let p = EdgeParams::new(params.b, params.theta, params.eps)?;
    let (b, c) = (C64::from(p.b), C64::from(p.theta.cos()));
    let binv = C64::from(1.0 / p.b);
    let e = C64::from_polar(1.0, p.theta);
    let two_c = c * 2.0;
    let entries = [
        (0, 0, two_c),
        (0, 4, -c),
        (0, 8, -c),
        (1, 1, binv),
        (1, 3, -e.conj()),
        (2, 2, b),
        (2, 6, -e),
        (3, 1, -e),
        (3, 3, b),
        (4, 0, -c),
        (4, 4, two_c),
        (4, 8, -c),
        (5, 5, binv),
        (5, 7, -e.conj()),
        (6, 2, -e.conj()),
        (6, 6, binv),
        (7, 5, -e),
        (7, 7, b),
        (8, 0, -c),
        (8, 4, -c),
        (8, 8, two_c),
    ];
    Ok(BipartiteState::new_unchecked(
        fill(&entries, p.normalization()),
        BipartiteDims::qutrits(),
    ))
}

/// `σ^Γ` written out entry by entry; identical to the partial transpose of
/// [`build_sigma`].
pub fn sigma_gamma_closed_form(params: &EdgeParams) -> Result<CMatrix> {
    let p = EdgeParams::new(params.b, params.theta, params.eps)?;
    let (b, c) = (C64::from(p.b), C64::from(p.theta.cos()));
    let binv = C64::from(1.0 / p.b);
    let e = C64::from_polar(1.0, p.theta);
    let two_c = c * 2.0;
    let entries = [
        (0, 0, two_c),
        (0, 4, -e),
        (0, 8, -e.conj()),
        (1, 1, binv),
        (1, 3, -c),
        (2, 2, b),
        (2, 6, -c),
        (3, 1, -c),
        (3, 3, b),
        (4, 0, -e.conj()),
        (4, 4, two_c),
        (4, 8, -e),
        (5, 5, binv),
        (5, 7, -c),
        (6, 2, -c),
        (6, 6, binv),
        (7, 5, -c),
        (7, 7, b),
        (8, 0, -e),
        (8, 4, -e.conj()),
        (8, 8, two_c),
    ];
    Ok(fill(&entries, p.normalization()))
}

/// Smallest positive eigenvalue of `σ^Γ` in closed form:
/// `min{3cosθ − √3|sinθ|, (1 + b² − √(1 + b⁴ + 2b²cos2θ))/(2b)} / (6cosθ + 3b + 3/b)`.
pub fn p1_formula(params: &EdgeParams) -> f64 {
    let (b, t) = (params.b, params.theta);
    let first = 3.0 * t.cos() - 3f64.sqrt() * t.sin().abs();
    let second =
        (1.0 + b * b - (1.0 + b.powi(4) + 2.0 * b * b * (2.0 * t).cos()).sqrt()) / (2.0 * b);
    first.min(second) / (6.0 * t.cos() + 3.0 * b + 3.0 / b)
}

/// `(|00⟩ + |11⟩ + |22⟩)/√3`.
pub fn mes3() -> PureState {
    let mut v = CVector::zeros(9);
    for i in 0..3 {
        v[4 * i] = C64::from(1.0 / 3f64.sqrt());
    }
    PureState::new(v, BipartiteDims::qutrits()).expect("nonzero vector")
}

/// The product vector `|f,g⟩ ∈ R(σ)` and its partially conjugated partner.
#[derive(Debug, Clone)]
pub struct FgVectors {
    /// Unit vector along `|0⟩ + b^{1/2} e^{iθ/2}|1⟩`.
    pub f: CVector,
    /// Unit vector along `|0⟩ − b^{−1/2} e^{−iθ/2}|1⟩`.
    pub g: CVector,
    /// `(|0⟩ + …)(|0⟩ − …) / (b^{1/2} + b^{−1/2})`.
    pub fg: CVector,
    /// `|f*, g⟩`.
    pub fstar_g: CVector,
}

/// `|f,g⟩` with the displayed phase convention, after checking that it lies
/// in `R(σ)` and that `|f*,g⟩` has a nonzero overlap with `|Ψ⟩` (so it is
/// outside `R(σ^Γ)`).
pub fn product_vector_fg(params: &EdgeParams, cfg: &ToleranceConfig) -> Result<FgVectors> {
    let p = EdgeParams::new(params.b, params.theta, params.eps)?;
    let sb = p.b.sqrt();
    let f_raw = CVector::from_vec(vec![
        C64::from(1.0),
        C64::from_polar(sb, p.theta / 2.0),
        C64::from(0.0),
    ]);
    let g_raw = CVector::from_vec(vec![
        C64::from(1.0),
        -C64::from_polar(1.0 / sb, -p.theta / 2.0),
        C64::from(0.0),
    ]);
    let fg = f_raw.kronecker(&g_raw) / C64::from(sb + 1.0 / sb);
    let fstar_g = f_raw.conjugate().kronecker(&g_raw) / C64::from(sb + 1.0 / sb);

    let sigma = build_sigma(&p)?;
    let range = numeric_rank_kernel_range(sigma.matrix(), cfg.rank_rel_tol).range;
    let residual = (&fg - &range * (range.adjoint() * &fg)).norm();
    if residual >= 1e-10 {
        return Err(DistillError::NumericalFailure(format!(
            "|f,g> is not in the range of sigma (residual {residual:.3e})"
        )));
    }
    let overlap = mes3().vector().dotc(&fstar_g).norm();
    if overlap <= 1e-6 {
        return Err(DistillError::NumericalFailure(format!(
            "|f*,g> is (numerically) in the range of sigma^Gamma (overlap with |Psi> {overlap:.3e})"
        )));
    }
    let f = &f_raw / C64::from(f_raw.norm());
    let g = &g_raw / C64::from(g_raw.norm());
    Ok(FgVectors { f, g, fg, fstar_g })
}

/// Everything derived from one `(b, θ, ε)`.
#[derive(Debug, Clone)]
pub struct EdgeBundle {
    /// Parameters with the ε actually used.
    pub params: EdgeParams,
    /// The ε that was requested, before any halving.
    pub requested_eps: f64,
    pub sigma: BipartiteState,
    pub sigma_gamma: CMatrix,
    pub p1: f64,
    pub mes: PureState,
    pub fg: FgVectors,
    pub rho: BipartiteState,
    /// Proven lower bound `p₁/3 − ε` on the rank-2 values of `ρ^Γ`.
    pub margin: f64,
}

/// `ρ = σ − ε|f,g⟩⟨f,g|`. Halves ε until `ρ` is PSD, then checks rank 5 and,
/// for ε > 0, that `ρ` is NPT.
pub fn build_rho(params: &EdgeParams, cfg: &ToleranceConfig) -> Result<EdgeBundle> {
    let p = EdgeParams::new(params.b, params.theta, params.eps)?;
    let sigma = build_sigma(&p)?;
    let sigma_gamma = sigma_gamma_closed_form(&p)?;
    let p1 = p1_formula(&p);
    let fg = product_vector_fg(&p, cfg)?;
    let pfg = projector(&fg.fg);

    let mut eps = p.eps;
    let rho_mat = loop {
        let m = sigma.matrix() - &pfg * C64::from(eps);
        if hermitian_eig(&m, cfg)?.min() >= -cfg.psd_tol {
            break m;
        }
        eps /= 2.0;
        if eps < MIN_EPS {
            return Err(DistillError::NumericalFailure(
                "could not make sigma - eps|f,g><f,g| positive semidefinite".into(),
            ));
        }
    };
    let rank = numeric_rank_kernel_range(&rho_mat, cfg.rank_rel_tol).rank;
    if rank != 5 {
        return Err(DistillError::NumericalFailure(format!(
            "rho has rank {rank}, expected 5"
        )));
    }
    let rho = BipartiteState::new_unchecked(rho_mat, BipartiteDims::qutrits());
    if eps > 0.0 && hermitian_eig(&rho.partial_transpose(), cfg)?.min() >= -cfg.psd_tol {
        return Err(DistillError::NumericalFailure("rho is not NPT".into()));
    }
    let params = EdgeParams { eps, ..p };
    Ok(EdgeBundle {
        params,
        requested_eps: p.eps,
        sigma,
        sigma_gamma,
        p1,
        mes: mes3(),
        fg,
        rho,
        margin: p1 / 3.0 - eps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginReport {
    /// `p₁/3 − ε`.
    pub bound: f64,
    /// Best rank-2 value of `ρ^Γ` found by the optimizer.
    pub numeric_min: f64,
    pub restarts: usize,
    pub seed: u64,
}

/// The proven bound `p₁/3 − ε`, cross-checked against the rank-2 optimizer.
/// A numeric minimum below the bound means a bug and is reported as
/// [`DistillError::InvariantViolation`].
pub fn undistillability_margin(bundle: &EdgeBundle, cfg: &ToleranceConfig) -> Result<MarginReport> {
    let bound = bundle.p1 / 3.0 - bundle.params.eps;
    let pt = bundle.rho.partial_transpose();
    let min = min_rank2_expectation(&pt, bundle.rho.dims(), cfg)?;
    if min.value < bound - 1e-8 {
        return Err(DistillError::InvariantViolation(format!(
            "rank-2 minimum {} is below the proven bound {bound}",
            min.value
        )));
    }
    Ok(MarginReport {
        bound,
        numeric_min: min.value,
        restarts: min.restarts,
        seed: min.seed,
    })
}

/// `σ₄ + ε Σ_{i ≤ r−4} |a_i,b_i⟩⟨a_i,b_i|` for a rank-4 NPT two-qutrit `σ₄`,
/// with random product vectors chosen so the result has rank `r`; the result
/// must be NPT and carry a verified 1-distillability certificate.
pub fn build_distillable_rank_r(
    sigma4: &BipartiteState,
    r: usize,
    eps: f64,
    cfg: &ToleranceConfig,
) -> Result<BipartiteState> {
    let dims = BipartiteDims::qutrits();
    if sigma4.dims() != dims {
        return Err(DistillError::InvalidInput(
            "expected a two-qutrit state".into(),
        ));
    }
    if !(5..=9).contains(&r) {
        return Err(DistillError::InvalidInput(format!(
            "target rank must be in 5..=9, got {r}"
        )));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(DistillError::InvalidInput(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }
    let base = numeric_rank_kernel_range(sigma4.matrix(), cfg.rank_rel_tol);
    if base.rank != 4 {
        return Err(DistillError::InvalidInput(format!(
            "expected a rank-4 state, got rank {}",
            base.rank
        )));
    }
    if sigma4.is_ppt(cfg)? {
        return Err(DistillError::InvalidInput("expected an NPT state".into()));
    }
    if eps == 0.0 {
        return Ok(sigma4.clone());
    }
    let mut rng = StreamRng::new(cfg.seed);
    for _ in 0..cfg.opt_restarts {
        let products: Vec<CVector> = (0..r - 4)
            .map(|_| rng.unit_vector(3).kronecker(&rng.unit_vector(3)))
            .collect();
        let mut cols: Vec<CVector> = base.range.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(products.iter().cloned());
        if numeric_rank_kernel_range(&CMatrix::from_columns(&cols), cfg.rank_rel_tol).rank != r {
            continue;
        }
        let mut m = sigma4.matrix().clone();
        for v in &products {
            m += projector(v) * C64::from(eps);
        }
        let rank = numeric_rank_kernel_range(&m, cfg.rank_rel_tol).rank;
        let state = BipartiteState::new(m, dims, cfg)?;
        if rank != r {
            continue;
        }
        if state.is_ppt(cfg)? {
            return Err(DistillError::NumericalFailure(format!(
                "eps = {eps} is too large: the rank-{r} state is PPT"
            )));
        }
        return match certify_1_distillable(&state, cfg)? {
            Certification::Certified(_) => Ok(state),
            _ => Err(DistillError::NumericalFailure(format!(
                "no 1-distillability certificate for the rank-{r} construction"
            ))),
        };
    }
    Err(DistillError::NumericalFailure(format!(
        "could not reach rank {r} with random product vectors"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn params(b: f64, t: f64) -> EdgeParams {
        EdgeParams::new(b, t, 0.0).unwrap()
    }

    #[test]
    fn sigma_corner_entry() {
        let s = build_sigma(&params(1.0, FRAC_PI_6)).unwrap();
        let expected = 3f64.sqrt() / (3.0 * (3f64.sqrt() + 2.0));
        assert!((s.matrix()[(0, 0)].re - expected).abs() < 1e-15);
        assert!((expected - 0.154700).abs() < 1e-6);
    }

    #[test]
    fn rejects_boundary_theta_and_bad_b() {
        assert!(EdgeParams::new(1.0, FRAC_PI_3, 0.0).is_err());
        assert!(EdgeParams::new(1.0, -FRAC_PI_3, 0.0).is_err());
        assert!(EdgeParams::new(1.0, 0.0, 0.0).is_err());
        assert!(EdgeParams::new(0.0, FRAC_PI_6, 0.0).is_err());
        assert!(EdgeParams::new(1.0, FRAC_PI_6, -1e-3).is_err());
    }

    #[test]
    fn closed_form_gamma_entry() {
        let p = params(2.0, FRAC_PI_4);
        let sg = sigma_gamma_closed_form(&p).unwrap();
        let expected =
            -C64::from_polar(1.0, FRAC_PI_4) / C64::from(3.0 * (2.0 * FRAC_PI_4.cos() + 2.5));
        assert!((sg[(0, 4)] - expected).norm() < 1e-15);
    }

    #[test]
    fn p1_values() {
        // min{√3, (2 − √3)/2} / (3√3 + 6)
        let expected = ((2.0 - 3f64.sqrt()) / 2.0) / (3.0 * 3f64.sqrt() + 6.0);
        assert!((p1_formula(&params(1.0, FRAC_PI_6)) - expected).abs() < 1e-15);
        // Smallest positive eigenvalues of σ^Γ from an independent dense eigensolver.
        assert!((expected - 0.011966128287415).abs() < 1e-12);
        assert!((p1_formula(&params(1.0, FRAC_PI_4)) - 0.028595479208968).abs() < 1e-12);
        assert_eq!(
            p1_formula(&params(2.0, 0.3)),
            p1_formula(&params(2.0, -0.3))
        );
    }

    #[test]
    fn mes_is_kernel_of_sigma_gamma() {
        let sg = sigma_gamma_closed_form(&params(0.5, -FRAC_PI_6)).unwrap();
        assert!((sg * mes3().vector()).norm() < 1e-12);
        assert!((mes3().vector().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fg_is_normalized_and_overlap_matches_expansion() {
        for (b, t) in default_grid() {
            let fg = product_vector_fg(&params(b, t), &cfg()).unwrap();
            assert!((fg.fg.norm() - 1.0).abs() < 1e-14);
            assert!((fg.f.kronecker(&fg.g).norm() - 1.0).abs() < 1e-14);
        }
        // ⟨Ψ|f*,g⟩ = (1 − e^{−iθ}) / (√3 (b^{1/2} + b^{−1/2}))
        let fg = product_vector_fg(&params(1.0, FRAC_PI_6), &cfg()).unwrap();
        let expected =
            (C64::from(1.0) - C64::from_polar(1.0, -FRAC_PI_6)) / C64::from(2.0 * 3f64.sqrt());
        assert!((mes3().vector().dotc(&fg.fstar_g) - expected).norm() < 1e-15);
    }

    #[test]
    fn rho_default_eps_is_rank5_npt() {
        let p = EdgeParams::with_default_eps(1.0, FRAC_PI_6).unwrap();
        let bundle = build_rho(&p, &cfg()).unwrap();
        assert_eq!(bundle.params.eps, bundle.requested_eps);
        let spec = hermitian_eig(&bundle.rho.partial_transpose(), &cfg()).unwrap();
        assert_eq!(spec.count_below(-cfg().psd_tol), 1);
        assert_eq!(spec.count_above(cfg().psd_tol), 8);
        assert!((bundle.margin - 0.1 * bundle.p1 / 3.0).abs() < 1e-15);
        assert!((bundle.margin - 3.989e-4).abs() < 1e-6);
    }

    #[test]
    fn rho_at_eps_boundary_is_rank5_npt() {
        let p1 = p1_formula(&params(1.0, FRAC_PI_6));
        let bundle =
            build_rho(&EdgeParams::new(1.0, FRAC_PI_6, p1 / 3.0).unwrap(), &cfg()).unwrap();
        assert!(bundle.margin.abs() < 1e-15);
    }

    #[test]
    fn eps_too_large_is_halved() {
        let bundle = build_rho(&EdgeParams::new(1.0, FRAC_PI_6, 10.0).unwrap(), &cfg()).unwrap();
        assert!(bundle.params.eps < 10.0);
        assert_eq!(bundle.requested_eps, 10.0);
    }

    #[test]
    fn zero_eps_reduces_to_sigma() {
        let bundle = build_rho(&params(1.0, FRAC_PI_6), &cfg()).unwrap();
        assert_eq!(bundle.rho.matrix(), bundle.sigma.matrix());
        assert!((bundle.margin - bundle.p1 / 3.0).abs() < 1e-18);
    }

    #[test]
    fn margin_holds_for_sigma_alone() {
        let bundle = build_rho(&params(1.0, FRAC_PI_6), &cfg()).unwrap();
        let r = undistillability_margin(&bundle, &cfg().with_restarts(16)).unwrap();
        assert!(r.numeric_min >= bundle.p1 / 3.0 - 1e-8);
        assert!((bundle.p1 / 3.0 - 3.989e-3).abs() < 1e-6);
    }

    fn rank4_npt(seed: u64) -> BipartiteState {
        let mut rng = StreamRng::new(seed);
        loop {
            let g = rng.ginibre(9, 4);
            let m = &g * g.adjoint();
            let t = m.trace();
            let s = BipartiteState::new(m / t, BipartiteDims::qutrits(), &cfg()).unwrap();
            if hermitian_eig(&s.partial_transpose(), &cfg()).unwrap().min() < -0.01 {
                return s;
            }
        }
    }

    #[test]
    fn distillable_rank_five_and_nine() {
        let s4 = rank4_npt(17);
        for r in [5, 9] {
            let s = build_distillable_rank_r(&s4, r, 1e-3, &cfg()).unwrap();
            assert_eq!(
                numeric_rank_kernel_range(s.matrix(), cfg().rank_rel_tol).rank,
                r
            );
            assert!(!s.is_ppt(&cfg()).unwrap());
        }
        assert_eq!(build_distillable_rank_r(&s4, 5, 0.0, &cfg()).unwrap(), s4);
        assert!(build_distillable_rank_r(&s4, 4, 1e-3, &cfg()).is_err());
    }

    #[test]
    fn sigma_range_holds_a_product_vector() {
        let s = build_sigma(&params(1.0, FRAC_PI_6)).unwrap();
        let range = numeric_rank_kernel_range(s.matrix(), cfg().rank_rel_tol).range;
        assert_eq!(range.ncols(), 5);
        let pv =
            crate::witness::product_vector_in_subspace(&range, BipartiteDims::qutrits(), &cfg())
                .unwrap()
                .expect("R(sigma) contains |f,g>");
        assert!(pv.residual < 1e-7);
    }

    #[test]
    fn sigma_gamma_kernel_is_completely_entangled() {
        let sg = sigma_gamma_closed_form(&params(1.0, FRAC_PI_6)).unwrap();
        let k = numeric_rank_kernel_range(&sg, cfg().rank_rel_tol).kernel;
        assert_eq!(k.ncols(), 1);
        let c = cfg().with_restarts(16);
        assert!(
            crate::witness::product_vector_in_subspace(&k, BipartiteDims::qutrits(), &c)
                .unwrap()
                .is_none()
        );
    }
}
