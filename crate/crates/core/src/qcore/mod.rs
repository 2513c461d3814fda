//! Dense complex linear algebra and bipartite-system structure.

mod bipartite;
mod matrix;
pub(crate) mod schmidt;
mod spectral;

pub use bipartite::{
    partial_trace, partial_transpose, regroup_vector, tensor_bipartite, tensor_power_bipartite,
    BipartiteDims, BipartiteState, Party, PureState,
};
pub use matrix::{
    basis_vector, check_finite, complete_orthonormal, hermiticity_error, kron_vec,
    matrix_from_rows, projector, quadratic_form, tensor, CMatrix, CVector, C64,
};
pub use schmidt::{schmidt_decompose, schmidt_rank, vector_as_matrix, SchmidtDecomposition};
pub use spectral::{
    hermitian_eig, min_eigenvalue, numeric_rank_kernel_range, smallest_right_singular,
    RankKernelRange, SpectralData,
};
