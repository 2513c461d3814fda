use serde::{Deserialize, Serialize};

use super::matrix::{check_finite, hermiticity_error, CMatrix, CVector, C64};
use super::spectral::min_eigenvalue;
use crate::config::ToleranceConfig;
use crate::error::{DistillError, Result};

/// Local dimensions `(M, N)` of `C^M ⊗ C^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
}

impl BipartiteDims {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(DistillError::InvalidInput(format!(
                "local dimensions must be positive, got ({dim_a}, {dim_b})"
            )));
        }
        Ok(Self { dim_a, dim_b })
    }

    pub const fn qutrits() -> Self {
        Self { dim_a: 3, dim_b: 3 }
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn pow(&self, n: u32) -> Self {
        Self {
            dim_a: self.dim_a.pow(n),
            dim_b: self.dim_b.pow(n),
        }
    }

    pub fn check_square(&self, m: &CMatrix) -> Result<()> {
        let d = self.total();
        if m.nrows() != d || m.ncols() != d {
            return Err(DistillError::DimensionMismatch(format!(
                "expected a {d}x{d} matrix for dims ({}, {}), got {}x{}",
                self.dim_a,
                self.dim_b,
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }

    pub fn check_vector(&self, v: &CVector) -> Result<()> {
        if v.len() != self.total() {
            return Err(DistillError::DimensionMismatch(format!(
                "expected a vector of length {}, got {}",
                self.total(),
                v.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// Partial transpose with respect to A: block `(i, j)` of the output is block
/// `(j, i)` of the input. Pure entry permutation, hence exact and an involution.
pub fn partial_transpose(m: &CMatrix, dims: BipartiteDims) -> Result<CMatrix> {
    dims.check_square(m)?;
    let (ma, nb) = (dims.dim_a, dims.dim_b);
    let mut out = CMatrix::zeros(ma * nb, ma * nb);
    for i in 0..ma {
        for j in 0..ma {
            for x in 0..nb {
                for y in 0..nb {
                    out[(i * nb + x, j * nb + y)] = m[(j * nb + x, i * nb + y)];
                }
            }
        }
    }
    Ok(out)
}

/// Reduced operator on the kept party.
pub fn partial_trace(m: &CMatrix, dims: BipartiteDims, keep: Party) -> Result<CMatrix> {
    dims.check_square(m)?;
    let (ma, nb) = (dims.dim_a, dims.dim_b);
    let out = match keep {
        Party::A => CMatrix::from_fn(ma, ma, |i, j| {
            (0..nb).map(|x| m[(i * nb + x, j * nb + x)]).sum::<C64>()
        }),
        Party::B => CMatrix::from_fn(nb, nb, |x, y| {
            (0..ma).map(|i| m[(i * nb + x, i * nb + y)]).sum::<C64>()
        }),
    };
    Ok(out)
}

/// Map from the regrouped index `(a1 a2)(b1 b2)` to the Kronecker index
/// `(a1 b1)(a2 b2)`.
fn regroup_permutation(dx: BipartiteDims, dy: BipartiteDims) -> Vec<usize> {
    let (mx, nx, my, ny) = (dx.dim_a, dx.dim_b, dy.dim_a, dy.dim_b);
    let mut perm = vec![0; mx * nx * my * ny];
    for a1 in 0..mx {
        for a2 in 0..my {
            for b1 in 0..nx {
                for b2 in 0..ny {
                    let new = (a1 * my + a2) * (nx * ny) + b1 * ny + b2;
                    let old = (a1 * nx + b1) * (my * ny) + a2 * ny + b2;
                    perm[new] = old;
                }
            }
        }
    }
    perm
}

/// `x ⊗ y` regrouped as the bipartite operator on `A1A2 : B1B2`.
/// Entries are exactly those of the Kronecker product.
pub fn tensor_bipartite(
    x: &CMatrix,
    dx: BipartiteDims,
    y: &CMatrix,
    dy: BipartiteDims,
) -> Result<(CMatrix, BipartiteDims)> {
    dx.check_square(x)?;
    dy.check_square(y)?;
    let kron = x.kronecker(y);
    let perm = regroup_permutation(dx, dy);
    let d = perm.len();
    let out = CMatrix::from_fn(d, d, |r, c| kron[(perm[r], perm[c])]);
    let dims = BipartiteDims {
        dim_a: dx.dim_a * dy.dim_a,
        dim_b: dx.dim_b * dy.dim_b,
    };
    Ok((out, dims))
}

/// `u ⊗ v` regrouped onto `A1A2 : B1B2`.
pub fn regroup_vector(
    u: &CVector,
    du: BipartiteDims,
    v: &CVector,
    dv: BipartiteDims,
) -> Result<CVector> {
    du.check_vector(u)?;
    dv.check_vector(v)?;
    let kron = u.kronecker(v);
    let perm = regroup_permutation(du, dv);
    Ok(CVector::from_iterator(
        perm.len(),
        perm.iter().map(|&p| kron[p]),
    ))
}

/// `m^{⊗n}` as a bipartite operator on `A1…An : B1…Bn`.
pub fn tensor_power_bipartite(
    m: &CMatrix,
    dims: BipartiteDims,
    n: usize,
    cfg: &ToleranceConfig,
) -> Result<(CMatrix, BipartiteDims)> {
    dims.check_square(m)?;
    if n == 0 {
        return Err(DistillError::InvalidInput(
            "number of copies must be positive".into(),
        ));
    }
    let total = (dims.total() as u128).checked_pow(n as u32);
    if n > cfg.max_copies || total.is_none_or(|t| t > cfg.max_dim as u128) {
        return Err(DistillError::InvalidInput(format!(
            "{n} copies of a {}-dimensional system exceed the cap (max {} copies, dimension {})",
            dims.total(),
            cfg.max_copies,
            cfg.max_dim
        )));
    }
    let mut acc = m.clone();
    let mut acc_dims = dims;
    for _ in 1..n {
        let (next, next_dims) = tensor_bipartite(&acc, acc_dims, m, dims)?;
        acc = next;
        acc_dims = next_dims;
    }
    Ok((acc, acc_dims))
}

/// Positive-semidefinite, Hermitian operator on `C^M ⊗ C^N` with positive
/// trace. Not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    mat: CMatrix,
    dims: BipartiteDims,
}

impl BipartiteState {
    pub fn new(mat: CMatrix, dims: BipartiteDims, cfg: &ToleranceConfig) -> Result<Self> {
        dims.check_square(&mat)?;
        check_finite(&mat)?;
        let herm = hermiticity_error(&mat);
        if herm > cfg.herm_tol {
            return Err(DistillError::NotHermitian(herm));
        }
        let tr = mat.trace().re;
        if tr <= 0.0 {
            return Err(DistillError::InvalidInput(format!(
                "trace must be positive, got {tr}"
            )));
        }
        let lmin = min_eigenvalue(&mat, cfg)?;
        if lmin < -cfg.psd_tol {
            return Err(DistillError::InvalidInput(format!(
                "matrix is not positive semidefinite (smallest eigenvalue {lmin:.3e})"
            )));
        }
        Ok(Self { mat, dims })
    }

    /// Skips the PSD/Hermiticity checks; for constructions that are PSD by design.
    pub(crate) fn new_unchecked(mat: CMatrix, dims: BipartiteDims) -> Self {
        Self { mat, dims }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn normalized(&self) -> Self {
        let t = self.trace();
        Self::new_unchecked(&self.mat / C64::from(t), self.dims)
    }

    pub fn partial_transpose(&self) -> CMatrix {
        partial_transpose(&self.mat, self.dims).expect("state shape is validated at construction")
    }

    pub fn partial_trace(&self, keep: Party) -> CMatrix {
        partial_trace(&self.mat, self.dims, keep).expect("state shape is validated at construction")
    }

    /// True when the partial transpose has no eigenvalue below `-psd_tol`.
    pub fn is_ppt(&self, cfg: &ToleranceConfig) -> Result<bool> {
        Ok(min_eigenvalue(&self.partial_transpose(), cfg)? >= -cfg.psd_tol)
    }

    /// `ρ^{⊗n}` on `A1…An : B1…Bn`.
    pub fn tensor_power(&self, n: usize, cfg: &ToleranceConfig) -> Result<Self> {
        let (m, d) = tensor_power_bipartite(&self.mat, self.dims, n, cfg)?;
        Ok(Self::new_unchecked(m, d))
    }
}

/// Vector in `C^M ⊗ C^N`, index `i * N + j` for `|i⟩_A |j⟩_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: CVector,
    dims: BipartiteDims,
    normalized: bool,
}

impl PureState {
    /// Normalizes `vec`; fails on the zero vector.
    pub fn new(vec: CVector, dims: BipartiteDims) -> Result<Self> {
        dims.check_vector(&vec)?;
        let n = vec.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(DistillError::InvalidInput(
                "pure state must be a nonzero finite vector".into(),
            ));
        }
        Ok(Self {
            vec: vec / C64::from(n),
            dims,
            normalized: true,
        })
    }

    /// Keeps `vec` as given and flags it as unnormalized.
    pub fn unnormalized(vec: CVector, dims: BipartiteDims) -> Result<Self> {
        dims.check_vector(&vec)?;
        Ok(Self {
            vec,
            dims,
            normalized: false,
        })
    }

    pub fn product(a: &CVector, b: &CVector) -> Result<Self> {
        let dims = BipartiteDims::new(a.len(), b.len())?;
        Self::new(a.kronecker(b), dims)
    }

    pub fn vector(&self) -> &CVector {
        &self.vec
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn projector(&self) -> CMatrix {
        &self.vec * self.vec.adjoint()
    }
}
