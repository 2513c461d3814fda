use serde::{Deserialize, Serialize};

use crate::error::{DistillError, Result};

/// Numerical thresholds and optimizer budget shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Max-entry deviation from Hermiticity that is still accepted.
    pub herm_tol: f64,
    /// Eigenvalues above `-psd_tol` count as nonnegative; a witness value must lie below it.
    pub psd_tol: f64,
    /// Relative accuracy demanded of eigendecompositions.
    pub spec_tol: f64,
    /// Singular values below `rank_rel_tol * σ_max` are treated as zero.
    pub rank_rel_tol: f64,
    pub opt_restarts: usize,
    pub opt_max_iters: usize,
    pub opt_step_tol: f64,
    pub seed: u64,
    /// Largest number of copies accepted by tensor-power operations.
    pub max_copies: usize,
    /// Largest total dimension (rows) of a tensor-power operator.
    pub max_dim: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            herm_tol: 1e-10,
            psd_tol: 1e-9,
            spec_tol: 1e-10,
            rank_rel_tol: 1e-8,
            opt_restarts: 64,
            opt_max_iters: 500,
            opt_step_tol: 1e-12,
            seed: 42,
            max_copies: 2,
            max_dim: 729,
        }
    }
}

impl ToleranceConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.opt_restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("herm_tol", self.herm_tol),
            ("psd_tol", self.psd_tol),
            ("spec_tol", self.spec_tol),
            ("rank_rel_tol", self.rank_rel_tol),
            ("opt_step_tol", self.opt_step_tol),
        ];
        for (name, v) in tols {
            if !(0.0..1.0).contains(&v) {
                return Err(DistillError::InvalidInput(format!(
                    "{name} must lie in [0, 1), got {v}"
                )));
            }
        }
        if self.opt_restarts == 0 || self.opt_max_iters == 0 {
            return Err(DistillError::InvalidInput(
                "opt_restarts and opt_max_iters must be positive".into(),
            ));
        }
        if self.max_copies == 0 || self.max_dim == 0 {
            return Err(DistillError::InvalidInput(
                "max_copies and max_dim must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ToleranceConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.opt_restarts, 64);
        assert_eq!(cfg.opt_max_iters, 500);
        assert_eq!(cfg.rank_rel_tol, 1e-8);
    }

    #[test]
    fn rejects_tolerance_of_one() {
        let cfg = ToleranceConfig {
            psd_tol: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
