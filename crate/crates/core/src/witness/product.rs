use rayon::prelude::*;

use crate::config::ToleranceConfig;
use crate::error::{DistillError, Result};
use crate::qcore::{
    basis_vector, numeric_rank_kernel_range, smallest_right_singular, BipartiteDims, CMatrix,
    CVector,
};
use crate::rng::{derive_seed, StreamRng};

/// Accept `a` once `σ_min(C(a))` drops below this.
pub const SIGMA_TARGET: f64 = 1e-8;
/// Final check on the distance of `a ⊗ b` from the subspace.
pub const RESIDUAL_TOL: f64 = 1e-7;
const SWEEPS_PER_RESTART: usize = 4000;
const MAX_LOCAL_DIM: usize = 4;

#[derive(Debug, Clone)]
pub struct ProductVector {
    pub a: CVector,
    pub b: CVector,
    /// `‖a ⊗ b − Π_K (a ⊗ b)‖`.
    pub residual: f64,
}

/// Constraint rows `⟨k_i|` of the orthogonal complement of K, stored so that
/// `C(a)[i, n] = Σ_m conj(k_i[m N + n]) a_m` and `D(b)[i, m] = Σ_n conj(k_i[m N + n]) b_n`.
struct Constraints {
    rows: CMatrix,
    dims: BipartiteDims,
}

impl Constraints {
    fn c_of_a(&self, a: &CVector) -> CMatrix {
        let (m, n) = (self.dims.dim_a, self.dims.dim_b);
        CMatrix::from_fn(self.rows.nrows(), n, |i, x| {
            (0..m).map(|y| self.rows[(i, y * n + x)] * a[y]).sum()
        })
    }

    fn d_of_b(&self, b: &CVector) -> CMatrix {
        let (m, n) = (self.dims.dim_a, self.dims.dim_b);
        CMatrix::from_fn(self.rows.nrows(), m, |i, y| {
            (0..n).map(|x| self.rows[(i, y * n + x)] * b[x]).sum()
        })
    }
}

fn attempt(cons: &Constraints, seed: u64) -> Option<(CVector, CVector)> {
    let mut rng = StreamRng::new(seed);
    let mut a = rng.unit_vector(cons.dims.dim_a);
    let mut last = f64::INFINITY;
    for sweep in 0..SWEEPS_PER_RESTART {
        let (_, b) = smallest_right_singular(&cons.c_of_a(&a));
        let (s, a_next) = smallest_right_singular(&cons.d_of_b(&b));
        a = a_next;
        if s < SIGMA_TARGET * 1e-3 {
            break;
        }
        // Stalled well away from zero: this basin holds no product vector.
        if sweep % 200 == 199 {
            if s > 1e-3 && last - s < 1e-3 * last {
                return None;
            }
            last = s;
        }
    }
    let (s, b) = smallest_right_singular(&cons.c_of_a(&a));
    (s < SIGMA_TARGET).then_some((a, b))
}

/// Searches the orthonormal columns of `basis` (a subspace K of `C^M ⊗ C^N`)
/// for a product vector `a ⊗ b`.
///
/// Minimizes `σ_min(C(a))` over unit `a`, where `C(a)` collects the
/// constraints `⟨k_i|a ⊗ ·⟩` from the orthogonal complement of K, by
/// alternating between the bottom right singular vectors of `C(a)` and of
/// its partner `D(b)`. Restarts run in parallel; the first success in restart
/// order is returned. `None` means no product vector was found after
/// `cfg.opt_restarts` restarts.
pub fn product_vector_in_subspace(
    basis: &CMatrix,
    dims: BipartiteDims,
    cfg: &ToleranceConfig,
) -> Result<Option<ProductVector>> {
    if basis.nrows() != dims.total() {
        return Err(DistillError::DimensionMismatch(format!(
            "subspace basis has {} rows, expected {}",
            basis.nrows(),
            dims.total()
        )));
    }
    if dims.dim_a > MAX_LOCAL_DIM || dims.dim_b > MAX_LOCAL_DIM {
        return Err(DistillError::InvalidInput(format!(
            "product-vector search supports local dimensions up to {MAX_LOCAL_DIM}"
        )));
    }
    if basis.ncols() == 0 {
        return Ok(None);
    }
    let complement = numeric_rank_kernel_range(&basis.adjoint(), cfg.rank_rel_tol).kernel;
    if complement.ncols() == 0 {
        return Ok(Some(ProductVector {
            a: basis_vector(dims.dim_a, 0),
            b: basis_vector(dims.dim_b, 0),
            residual: 0.0,
        }));
    }
    let cons = Constraints {
        rows: complement.adjoint(),
        dims,
    };
    let found = (0..cfg.opt_restarts)
        .into_par_iter()
        .find_map_first(|r| attempt(&cons, derive_seed(cfg.seed, r as u64)));
    Ok(found.and_then(|(a, b)| {
        let v = a.kronecker(&b);
        let residual = (&v - basis * (basis.adjoint() * &v)).norm();
        (residual < RESIDUAL_TOL).then_some(ProductVector { a, b, residual })
    }))
}
