use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::error::{DistillError, Result};
use crate::qcore::{hermitian_eig, numeric_rank_kernel_range, BipartiteDims, BipartiteState, C64};
use crate::rng::{derive_seed, StreamRng};
use crate::witness::product_vector_in_subspace;

pub const MAX_CONSECUTIVE_REJECTIONS: usize = 10_000;
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Filter {
    #[serde(rename = "any")]
    Any,
    #[serde(rename = "NPT")]
    Npt,
    #[serde(rename = "PPT")]
    Ppt,
    /// `ker ρ` contains a product vector.
    #[serde(rename = "kernelHasProduct")]
    KernelHasProduct,
    /// NPT with at least two nonpositive eigenvalues of `ρ^Γ`.
    #[serde(rename = "twoNonpositivePT")]
    TwoNonpositivePt,
}

impl Filter {
    pub fn accepts(&self, rho: &BipartiteState, cfg: &ToleranceConfig) -> Result<bool> {
        Ok(match self {
            Filter::Any => true,
            Filter::Npt => !rho.is_ppt(cfg)?,
            Filter::Ppt => rho.is_ppt(cfg)?,
            Filter::KernelHasProduct => {
                let kernel = numeric_rank_kernel_range(rho.matrix(), cfg.rank_rel_tol).kernel;
                kernel.ncols() > 0
                    && product_vector_in_subspace(&kernel, rho.dims(), cfg)?.is_some()
            }
            Filter::TwoNonpositivePt => {
                let ev = hermitian_eig(&rho.partial_transpose(), cfg)?.eigenvalues;
                ev[0] < -cfg.psd_tol && ev.len() > 1 && ev[1] <= cfg.psd_tol
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dims: BipartiteDims,
    pub rank: usize,
    pub count: usize,
    pub filter: Filter,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(
        dims: BipartiteDims,
        rank: usize,
        count: usize,
        filter: Filter,
        seed: u64,
    ) -> Result<Self> {
        let s = Self {
            dims,
            rank,
            count,
            filter,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 || self.rank > self.dims.total() {
            return Err(DistillError::InvalidInput(format!(
                "rank must lie in 1..={}, got {}",
                self.dims.total(),
                self.rank
            )));
        }
        if self.count == 0 {
            return Err(DistillError::InvalidInput("count must be positive".into()));
        }
        Ok(())
    }
}

/// `GG†/tr(GG†)` with `G` an `MN × rank` standard complex Gaussian matrix drawn
/// from the stream seeded by `seed`. The numeric rank is checked.
pub fn random_state(
    dims: BipartiteDims,
    rank: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<BipartiteState> {
    let d = dims.total();
    if rank == 0 || rank > d {
        return Err(DistillError::InvalidInput(format!(
            "rank must lie in 1..={d}, got {rank}"
        )));
    }
    let g = StreamRng::new(seed).ginibre(d, rank);
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m /= C64::from(tr);
    let got = numeric_rank_kernel_range(&m, cfg.rank_rel_tol).rank;
    if got != rank {
        return Err(DistillError::NumericalFailure(format!(
            "sampled state has rank {got}, expected {rank}"
        )));
    }
    BipartiteState::new(m, dims, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingStats {
    pub attempts: usize,
    pub accepted: usize,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone)]
pub struct Sample {
    /// `(seed, state)` in acceptance order; the seed reproduces the state via [`random_state`].
    pub states: Vec<(u64, BipartiteState)>,
    pub stats: SamplingStats,
}

/// Rejection sampling. Candidate `k` uses seed `derive_seed(spec.seed, k)`;
/// candidates are evaluated in parallel batches but accepted in index order,
/// so the result does not depend on the thread count. Fails after
/// [`MAX_CONSECUTIVE_REJECTIONS`] rejections in a row.
pub fn sample_ensemble(spec: &EnsembleSpec, cfg: &ToleranceConfig) -> Result<Sample> {
    spec.validate()?;
    let mut states = Vec::with_capacity(spec.count);
    let mut attempts = 0usize;
    let mut rejected_in_row = 0usize;
    while states.len() < spec.count {
        let batch: Vec<Result<(u64, Option<BipartiteState>)>> = (attempts..attempts + BATCH)
            .into_par_iter()
            .map(|k| {
                let seed = derive_seed(spec.seed, k as u64);
                let rho = random_state(spec.dims, spec.rank, seed, cfg)?;
                let ok = spec.filter.accepts(&rho, cfg)?;
                Ok((seed, ok.then_some(rho)))
            })
            .collect();
        for item in batch {
            attempts += 1;
            match item? {
                (seed, Some(rho)) => {
                    states.push((seed, rho));
                    rejected_in_row = 0;
                    if states.len() == spec.count {
                        break;
                    }
                }
                (_, None) => {
                    rejected_in_row += 1;
                    if rejected_in_row >= MAX_CONSECUTIVE_REJECTIONS {
                        return Err(DistillError::NumericalFailure(format!(
                            "rejection sampling gave up after {MAX_CONSECUTIVE_REJECTIONS} consecutive rejections \
                             ({} of {} states accepted)",
                            states.len(),
                            spec.count
                        )));
                    }
                }
            }
        }
    }
    let accepted = states.len();
    Ok(Sample {
        states,
        stats: SamplingStats {
            attempts,
            accepted,
            acceptance_rate: accepted as f64 / attempts as f64,
        },
    })
}
