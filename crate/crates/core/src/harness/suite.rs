use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::config::ToleranceConfig;
use crate::edgestate::{
    build_rho, build_sigma, default_grid, p1_formula, sigma_gamma_closed_form, EdgeParams,
};
use crate::error::{DistillError, Result};
use crate::harness::ensemble::{sample_ensemble, EnsembleSpec, Filter, SamplingStats};
use crate::io::state_to_json;
use crate::multicopy::{
    extremal_rank2_tensor_power, operator_bound_min_eigenvalue, verify_n_undistillable,
};
use crate::qcore::{hermitian_eig, numeric_rank_kernel_range, BipartiteDims, BipartiteState};
use crate::witness::{
    certify_1_distillable, submatrix_2x2_scan, two_nonpositive_witness, verify_certificate,
    Certification,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    TheoremRank4,
    TheoremTwoEigs,
    Lemma2x2,
    EdgeFamily,
    Multicopy,
    All,
}

impl SuiteName {
    pub const ALL: [SuiteName; 5] = [
        SuiteName::TheoremRank4,
        SuiteName::TheoremTwoEigs,
        SuiteName::Lemma2x2,
        SuiteName::EdgeFamily,
        SuiteName::Multicopy,
    ];

    fn as_str(&self) -> &'static str {
        match self {
            SuiteName::TheoremRank4 => "theorem-rank4",
            SuiteName::TheoremTwoEigs => "theorem-two-eigs",
            SuiteName::Lemma2x2 => "lemma-2x2",
            SuiteName::EdgeFamily => "edge-family",
            SuiteName::Multicopy => "multicopy",
            SuiteName::All => "all",
        }
    }

    /// Ensemble used when the caller gives only a trial count and a seed.
    pub fn default_spec(&self, count: usize, seed: u64) -> Result<EnsembleSpec> {
        let (rank, filter) = match self {
            SuiteName::TheoremTwoEigs => (6, Filter::TwoNonpositivePt),
            _ => (4, Filter::Npt),
        };
        EnsembleSpec::new(BipartiteDims::qutrits(), rank, count, filter, seed)
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = DistillError;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .chain([SuiteName::All])
            .find(|n| n.as_str() == s)
            .ok_or_else(|| DistillError::InvalidInput(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Pass,
    Fail(String),
    /// The state does not meet the suite's hypothesis.
    NotQualified,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: Option<u64>,
    pub reason: String,
    /// The offending state in the matrix file format.
    pub state: Option<Box<RawValue>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub trials: usize,
    pub passes: usize,
    pub failures: Vec<TrialFailure>,
    /// No sampled state met the suite's hypothesis.
    pub skipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingStats>,
    pub config: ToleranceConfig,
    pub wall_time_s: f64,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty() && self.passes == self.trials
    }
}

fn lemma_2x2_qualifies(rho: &BipartiteState, cfg: &ToleranceConfig) -> bool {
    // A 2×2 principal block [[a, c], [c*, d]] of ρ^Γ whose smaller eigenvalue
    // is below -psd_tol; by interlacing the compressed 2×N block is then
    // negative enough to certify.
    let pt = rho.partial_transpose();
    let d = pt.nrows();
    (0..d).any(|i| {
        (i + 1..d).any(|j| {
            let (a, b) = (pt[(i, i)].re, pt[(j, j)].re);
            let lmin = 0.5 * ((a + b) - ((a - b).powi(2) + 4.0 * pt[(i, j)].norm_sqr()).sqrt());
            lmin < -cfg.psd_tol
        })
    })
}

/// Runs one suite's check on a single state. Only the ensemble suites apply.
pub fn check_trial(
    suite: SuiteName,
    rho: &BipartiteState,
    cfg: &ToleranceConfig,
) -> Result<TrialOutcome> {
    let verified = |c: &crate::witness::WitnessCertificate| -> Result<TrialOutcome> {
        if !verify_certificate(c, rho, 1, cfg)? {
            return Ok(TrialOutcome::Fail(format!(
                "{} certificate failed verification",
                c.route
            )));
        }
        if c.value >= -1e-9 {
            return Ok(TrialOutcome::Fail(format!(
                "certificate value {} is not below -1e-9",
                c.value
            )));
        }
        Ok(TrialOutcome::Pass)
    };
    match suite {
        SuiteName::TheoremRank4 => match certify_1_distillable(rho, cfg)? {
            Certification::Certified(c) => verified(&c),
            Certification::Ppt => Ok(TrialOutcome::Fail("state is PPT".into())),
            Certification::NoWitness { best_value, .. } => Ok(TrialOutcome::Fail(format!(
                "no witness found (best value {best_value})"
            ))),
        },
        SuiteName::TheoremTwoEigs => match two_nonpositive_witness(rho, cfg) {
            Ok(Some(c)) => verified(&c),
            Ok(None) => Ok(TrialOutcome::Fail(
                "two-nonpositive route found nothing".into(),
            )),
            Err(DistillError::NumericalFailure(m)) => Ok(TrialOutcome::Fail(m)),
            Err(e) => Err(e),
        },
        SuiteName::Lemma2x2 => {
            if !lemma_2x2_qualifies(rho, cfg) {
                return Ok(TrialOutcome::NotQualified);
            }
            match submatrix_2x2_scan(rho, cfg)? {
                Some(w) => verified(&w.certificate),
                None => Ok(TrialOutcome::Fail(
                    "negative minor present but the scan found no witness".into(),
                )),
            }
        }
        other => Err(DistillError::InvalidInput(format!(
            "suite {other} does not run on sampled states"
        ))),
    }
}

fn edge_point(b: f64, theta: f64, cfg: &ToleranceConfig) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            bad.push(what);
        }
    };
    let params = EdgeParams::with_default_eps(b, theta)?;
    let sigma = build_sigma(&params)?;
    let pt = sigma.partial_transpose();
    check(
        (sigma.trace() - 1.0).abs() <= 1e-12,
        format!("trace(sigma) = {}", sigma.trace()),
    );
    let rank = numeric_rank_kernel_range(sigma.matrix(), cfg.rank_rel_tol).rank;
    let rank_pt = numeric_rank_kernel_range(&pt, cfg.rank_rel_tol).rank;
    check(
        rank == 5 && rank_pt == 8,
        format!("birank ({rank_pt}, {rank})"),
    );
    let mes = crate::edgestate::mes3();
    let leak = (&pt * mes.vector()).norm();
    check(leak <= 1e-12, format!("|sigma^G Psi| = {leak}"));
    let closed = sigma_gamma_closed_form(&params)?;
    let diff = (&closed - &pt).camax();
    check(
        diff <= 1e-15,
        format!("closed-form partial transpose differs by {diff}"),
    );
    let ev = hermitian_eig(&pt, cfg)?.eigenvalues;
    let p1 = p1_formula(&params);
    let smallest_positive = ev.iter().copied().find(|&e| e > 1e-10).unwrap_or(f64::NAN);
    check(
        (p1 - smallest_positive).abs() <= 1e-10,
        format!("p1 {p1} vs eigenvalue {smallest_positive}"),
    );
    let op = operator_bound_min_eigenvalue(&params, 1, cfg)?;
    check(
        op >= -cfg.psd_tol,
        format!("sigma^G - 8 p1 rho_s has eigenvalue {op}"),
    );

    let bundle = build_rho(&params, cfg)?;
    let rho_ev = hermitian_eig(&bundle.rho.partial_transpose(), cfg)?.eigenvalues;
    let negatives = rho_ev.iter().filter(|&&e| e < -cfg.psd_tol).count();
    check(
        negatives == 1,
        format!("rho^G has {negatives} negative eigenvalues"),
    );
    match certify_1_distillable(&bundle.rho, cfg)? {
        Certification::NoWitness { best_value, .. } => check(
            best_value >= bundle.margin - 1e-8 && bundle.margin > 0.0,
            format!(
                "rank-2 minimum {best_value} below the margin {}",
                bundle.margin
            ),
        ),
        Certification::Certified(c) => check(
            false,
            format!("unexpected {} certificate with value {}", c.route, c.value),
        ),
        Certification::Ppt => check(false, "rho is PPT".into()),
    }
    Ok(bad)
}

fn multicopy_trial(n: usize, cfg: &ToleranceConfig) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let r = extremal_rank2_tensor_power(n, cfg)?;
    let upper = 8f64.powi(-(n as i32));
    let max_tol = if n == 1 { 1e-10 } else { 1e-6 };
    if (r.max_value - upper).abs() > max_tol {
        bad.push(format!("max {} differs from 1/8^{n}", r.max_value));
    }
    if (r.product_maximizer_value - upper).abs() > 1e-12 {
        bad.push(format!(
            "product maximizer gives {}",
            r.product_maximizer_value
        ));
    }
    if n == 1 && (r.min_value - 1.0 / 24.0).abs() > 1e-6 {
        bad.push(format!("min {} differs from 1/24", r.min_value));
    }
    let params = EdgeParams::with_default_eps(1.0, std::f64::consts::FRAC_PI_6)?;
    let op = operator_bound_min_eigenvalue(&params, n, cfg)?;
    if op < -cfg.psd_tol {
        bad.push(format!("operator bound has eigenvalue {op}"));
    }
    verify_n_undistillable(&params, n, cfg)?;
    Ok(bad)
}

type Outcome<'a> = (
    usize,
    Option<u64>,
    Option<&'a BipartiteState>,
    Result<TrialOutcome>,
);

fn collect(outcomes: Vec<Outcome<'_>>) -> Result<(usize, usize, Vec<TrialFailure>)> {
    let (mut trials, mut passes, mut failures) = (0, 0, Vec::new());
    for (trial, seed, state, outcome) in outcomes {
        let reason = match outcome {
            Ok(TrialOutcome::NotQualified) => continue,
            Ok(TrialOutcome::Pass) => {
                trials += 1;
                passes += 1;
                continue;
            }
            Ok(TrialOutcome::Fail(m)) => m,
            Err(e) => e.to_string(),
        };
        trials += 1;
        let state = match state {
            Some(s) => Some(RawValue::from_string(state_to_json(s, None)?)?),
            None => None,
        };
        failures.push(TrialFailure {
            trial,
            seed,
            reason,
            state,
        });
    }
    Ok((trials, passes, failures))
}

fn run_one(name: SuiteName, spec: &EnsembleSpec, cfg: &ToleranceConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let (ensemble, sampling, (trials, passes, failures)) = match name {
        SuiteName::TheoremRank4 | SuiteName::TheoremTwoEigs | SuiteName::Lemma2x2 => {
            let spec = match name {
                SuiteName::TheoremRank4 => EnsembleSpec {
                    dims: BipartiteDims::qutrits(),
                    rank: 4,
                    filter: Filter::Npt,
                    ..*spec
                },
                SuiteName::TheoremTwoEigs => EnsembleSpec {
                    dims: BipartiteDims::qutrits(),
                    filter: Filter::TwoNonpositivePt,
                    ..*spec
                },
                _ => *spec,
            };
            let sample = sample_ensemble(&spec, cfg)?;
            let outcomes: Vec<_> = sample
                .states
                .par_iter()
                .enumerate()
                .map(|(i, (seed, rho))| (i, Some(*seed), Some(rho), check_trial(name, rho, cfg)))
                .collect();
            (Some(spec), Some(sample.stats), collect(outcomes)?)
        }
        SuiteName::EdgeFamily => {
            let grid = default_grid();
            let outcomes: Vec<_> = grid
                .par_iter()
                .enumerate()
                .map(|(i, &(b, th))| {
                    let r = edge_point(b, th, cfg).map(|bad| {
                        if bad.is_empty() {
                            TrialOutcome::Pass
                        } else {
                            TrialOutcome::Fail(format!("b = {b}, theta = {th}: {}", bad.join("; ")))
                        }
                    });
                    (i, None, None, r)
                })
                .collect();
            (None, None, collect(outcomes)?)
        }
        SuiteName::Multicopy => {
            let outcomes: Vec<_> = [1usize, 2]
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    let r = multicopy_trial(n, cfg).map(|bad| {
                        if bad.is_empty() {
                            TrialOutcome::Pass
                        } else {
                            TrialOutcome::Fail(format!("n = {n}: {}", bad.join("; ")))
                        }
                    });
                    (i, None, None, r)
                })
                .collect();
            (None, None, collect(outcomes)?)
        }
        SuiteName::All => unreachable!(),
    };
    Ok(SuiteReport {
        suite: name,
        trials,
        passes,
        skipped: trials == 0,
        failures,
        ensemble,
        sampling,
        config: *cfg,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs a suite (every suite for [`SuiteName::All`]). The theorem suites
/// override the dimensions, filter and, for `theorem-rank4`, the rank of
/// `spec`; `lemma-2x2` samples `spec` as given and skips states without a
/// negative 2×2 minor. Trial failures are recorded, never raised; errors are
/// reserved for invalid specs and sampling that cannot make progress.
pub fn run_suite(
    name: SuiteName,
    spec: &EnsembleSpec,
    cfg: &ToleranceConfig,
) -> Result<Vec<SuiteReport>> {
    cfg.validate()?;
    spec.validate()?;
    match name {
        SuiteName::All => SuiteName::ALL
            .iter()
            .map(|&n| run_one(n, spec, cfg))
            .collect(),
        n => Ok(vec![run_one(n, spec, cfg)?]),
    }
}
