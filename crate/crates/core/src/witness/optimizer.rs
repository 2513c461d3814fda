use rayon::prelude::*;

use crate::config::ToleranceConfig;
use crate::error::{DistillError, Result};
use crate::qcore::schmidt::decompose_vector;
use crate::qcore::{
    hermitian_eig, hermiticity_error, quadratic_form, vector_as_matrix, BipartiteDims, CMatrix,
    CVector, C64,
};
use crate::rng::{derive_seed, StreamRng};

/// `ψ = (frame_a ⊗ frame_b) vec(coeff)`: two orthonormal local frames and a
/// unit-norm 2×2 coefficient matrix. Schmidt rank ≤ 2 by construction.
#[derive(Debug, Clone)]
pub struct Rank2Ansatz {
    pub frame_a: CMatrix,
    pub frame_b: CMatrix,
    pub coeff: CMatrix,
}

impl Rank2Ansatz {
    pub fn dims(&self) -> BipartiteDims {
        BipartiteDims {
            dim_a: self.frame_a.nrows(),
            dim_b: self.frame_b.nrows(),
        }
    }

    pub fn vector(&self) -> CVector {
        let xi = &self.frame_a * &self.coeff * self.frame_b.transpose();
        let n = self.frame_b.nrows();
        CVector::from_fn(xi.nrows() * n, |r, _| xi[(r / n, r % n)])
    }

    /// Frames from the two leading Schmidt directions of `v`.
    pub fn from_vector(v: &CVector, dims: BipartiteDims) -> Result<Self> {
        if dims.dim_a < 2 || dims.dim_b < 2 {
            return Err(DistillError::InvalidInput(
                "a rank-2 ansatz needs both local dimensions at least 2".into(),
            ));
        }
        let sd = decompose_vector(v, dims, 0.0)?;
        let frame_a = sd.left.columns(0, 2).into_owned();
        let frame_b = sd.right.columns(0, 2).into_owned();
        let xi = vector_as_matrix(v, dims)?;
        let mut coeff = frame_a.adjoint() * xi * frame_b.conjugate();
        let n = coeff.norm();
        coeff /= C64::from(n);
        Ok(Self {
            frame_a,
            frame_b,
            coeff,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Rank2Minimum {
    pub value: f64,
    pub ansatz: Rank2Ansatz,
    /// Index of the restart that produced the minimum.
    pub restart: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Rank2Minimum {
    pub fn vector(&self) -> CVector {
        self.ansatz.vector()
    }
}

/// `L: C^{2M} → C^{MN}`, `(a_1, a_2) ↦ Σ_j a_j ⊗ v_j` for the columns `v_j` of `frame_b`.
fn left_factor_map(frame_b: &CMatrix, dims: BipartiteDims) -> CMatrix {
    let (m, n) = (dims.dim_a, dims.dim_b);
    let mut l = CMatrix::zeros(m * n, 2 * m);
    for j in 0..2 {
        for i in 0..m {
            for x in 0..n {
                l[(i * n + x, j * m + i)] = frame_b[(x, j)];
            }
        }
    }
    l
}

/// `L: C^{2N} → C^{MN}`, `(b_1, b_2) ↦ Σ_j u_j ⊗ b_j` for the columns `u_j` of `frame_a`.
fn right_factor_map(frame_a: &CMatrix, dims: BipartiteDims) -> CMatrix {
    let (m, n) = (dims.dim_a, dims.dim_b);
    let mut l = CMatrix::zeros(m * n, 2 * n);
    for j in 0..2 {
        for i in 0..m {
            for x in 0..n {
                l[(i * n + x, j * n + x)] = frame_a[(i, j)];
            }
        }
    }
    l
}

/// Bottom of `⟨ψ|X|ψ⟩` over `ψ = L c`, `‖c‖ = 1`; `L` is an isometry.
fn compressed_bottom(x: &CMatrix, l: &CMatrix, cfg: &ToleranceConfig) -> Result<(f64, CVector)> {
    let k = l.adjoint() * x * l;
    let spec = hermitian_eig(&k, cfg)?;
    Ok((spec.min(), l * spec.vector(0)))
}

fn orthonormal_frame(rng: &mut StreamRng, dim: usize) -> CMatrix {
    rng.ginibre(dim, 2).qr().q()
}

fn descend(
    x: &CMatrix,
    dims: BipartiteDims,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<(f64, CVector)> {
    let mut rng = StreamRng::new(seed);
    let mut frame_b = orthonormal_frame(&mut rng, dims.dim_b);
    let mut value = f64::INFINITY;
    let mut psi = CVector::zeros(dims.total());
    for _ in 0..cfg.opt_max_iters {
        let (_, v) = compressed_bottom(x, &left_factor_map(&frame_b, dims), cfg)?;
        let frame_a = decompose_vector(&v, dims, 0.0)?
            .left
            .columns(0, 2)
            .into_owned();
        let (next, v) = compressed_bottom(x, &right_factor_map(&frame_a, dims), cfg)?;
        frame_b = decompose_vector(&v, dims, 0.0)?
            .right
            .columns(0, 2)
            .into_owned();
        psi = v;
        let done = value - next <= cfg.opt_step_tol * next.abs().max(1.0);
        value = next;
        if done {
            break;
        }
    }
    let psi = &psi / C64::from(psi.norm());
    Ok((quadratic_form(x, &psi), psi))
}

/// Multistart minimization of `⟨ψ|X|ψ⟩` over unit `ψ` of Schmidt rank ≤ 2.
///
/// Each restart alternates two closed-form eigenproblems: with the B-side
/// frame fixed, `ψ = Σ_j a_j ⊗ v_j` is linear in `(a_1, a_2)` and the optimum
/// is the bottom eigenvector of the compressed `2M×2M` matrix; the A-side
/// frame is then re-read from the Schmidt decomposition of that `ψ` and the
/// roles swap. The objective never increases. Restarts use seeds
/// `derive_seed(cfg.seed, r)` and the winner is the lowest `(value, r)`, so the
/// result does not depend on thread scheduling.
pub fn min_rank2_expectation(
    x: &CMatrix,
    dims: BipartiteDims,
    cfg: &ToleranceConfig,
) -> Result<Rank2Minimum> {
    dims.check_square(x)?;
    let herm = hermiticity_error(x);
    if herm > cfg.herm_tol * x.camax().max(1.0) {
        return Err(DistillError::NotHermitian(herm));
    }
    if dims.dim_a < 2 || dims.dim_b < 2 {
        return Err(DistillError::InvalidInput(
            "rank-2 minimization needs both local dimensions at least 2".into(),
        ));
    }
    let xs = (x + x.adjoint()) * C64::from(0.5);
    let runs: Vec<Result<(f64, CVector)>> = (0..cfg.opt_restarts)
        .into_par_iter()
        .map(|r| descend(&xs, dims, derive_seed(cfg.seed, r as u64), cfg))
        .collect();
    let mut best: Option<(f64, usize, CVector)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let (value, psi) = run?;
        if best.as_ref().is_none_or(|(bv, _, _)| value < *bv) {
            best = Some((value, r, psi));
        }
    }
    let (_, restart, psi) = best.expect("at least one restart");
    let ansatz = Rank2Ansatz::from_vector(&psi, dims)?;
    let value = quadratic_form(&xs, &ansatz.vector());
    Ok(Rank2Minimum {
        value,
        ansatz,
        restart,
        restarts: cfg.opt_restarts,
        seed: cfg.seed,
    })
}
