use std::f64::consts::FRAC_PI_6;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use distill_lab::edgestate::{build_rho, build_sigma, p1_formula, EdgeParams};
use distill_lab::harness::{
    random_state, run_suite, sample_ensemble, EnsembleSpec, Filter, SuiteName,
};
use distill_lab::io::{read_state_file, state_to_json};
use distill_lab::multicopy::{
    eps_threshold_for_n, extremal_rank2_tensor_power, verify_n_undistillable,
};
use distill_lab::qcore::numeric_rank_kernel_range;
use distill_lab::witness::{certify_n_copies, verify_certificate, Certification};
use distill_lab::{BipartiteDims, DistillError, Result, ToleranceConfig};

const THREADS_VAR: &str = "DISTILL_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "distill-lab",
    version,
    about = "Distillability witnesses, edge states and n-copy bounds for bipartite states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Werner,
    Rho,
}

#[derive(Subcommand)]
enum Command {
    /// Write the edge state sigma(b, theta).
    Sigma {
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write rho = sigma - eps |f,g><f,g| with its metadata.
    Rho {
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        /// A number or `auto` (0.9 p1/3).
        #[arg(long, default_value = "auto")]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a Schmidt-rank-two witness on one or two copies.
    Witness {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
        copies: u32,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Certify a rank-four two-qutrit NPT state.
    CertifyRank4 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// n-copy bounds for the Werner state or n-undistillability of rho.
    Multicopy {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value = "werner")]
        target: Target,
        #[arg(long)]
        json: bool,
    },
    /// Sample a random state GG^dagger / tr.
    Random {
        #[arg(long = "dimA")]
        dim_a: usize,
        #[arg(long = "dimB")]
        dim_b: usize,
        #[arg(long)]
        rank: usize,
        /// Rejection-sample until the state is NPT.
        #[arg(long)]
        npt: bool,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn certification_json(c: &Certification) -> Result<String> {
    match c {
        Certification::Certified(cert) => to_json(cert),
        Certification::Ppt => to_json(&json!({"status": "ppt"})),
        Certification::NoWitness {
            restarts,
            best_value,
            seed,
        } => to_json(&json!({
            "status": "noWitness",
            "best_value": best_value,
            "restarts": restarts,
            "seed": seed,
        })),
    }
}

fn certification_text(c: &Certification, verified: Option<bool>) -> String {
    match c {
        Certification::Certified(cert) => format!(
            "distillable: route {}, value {:.6e}, Schmidt rank {}, {} cop{}{}",
            cert.route,
            cert.value,
            cert.schmidt_rank,
            cert.copies,
            if cert.copies == 1 { "y" } else { "ies" },
            match verified {
                Some(true) => ", verified",
                Some(false) => ", VERIFICATION FAILED",
                None => "",
            }
        ),
        Certification::Ppt => "PPT: no witness exists".into(),
        Certification::NoWitness {
            restarts,
            best_value,
            seed,
        } => {
            format!("no witness found: best value {best_value:.6e} over {restarts} restarts (seed {seed})")
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = ToleranceConfig::default();
    match cli.command {
        Command::Sigma { b, theta, out } => {
            let params = EdgeParams::new(b, theta, 0.0)?;
            let sigma = build_sigma(&params)?;
            let meta = json!({"b": b, "theta": theta, "p1": p1_formula(&params)});
            emit(&state_to_json(&sigma, Some(&meta))?, out.as_ref())
        }
        Command::Rho { b, theta, eps, out } => {
            let params = if eps == "auto" {
                EdgeParams::with_default_eps(b, theta)?
            } else {
                let e: f64 = eps.parse().map_err(|_| {
                    DistillError::InvalidInput(format!(
                        "--eps expects a number or auto, got {eps:?}"
                    ))
                })?;
                EdgeParams::new(b, theta, e)?
            };
            let bundle = build_rho(&params, &cfg)?;
            let meta = json!({
                "b": b,
                "theta": theta,
                "eps": bundle.params.eps,
                "requested_eps": bundle.requested_eps,
                "p1": bundle.p1,
                "margin": bundle.margin,
            });
            emit(&state_to_json(&bundle.rho, Some(&meta))?, out.as_ref())
        }
        Command::Witness {
            input,
            copies,
            restarts,
            seed,
            json,
        } => {
            let mut cfg = cfg;
            if let Some(r) = restarts {
                cfg = cfg.with_restarts(r);
            }
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            cfg.validate()?;
            let rho = read_state_file(&input, &cfg)?;
            let copies = copies as usize;
            let c = certify_n_copies(&rho, copies, &cfg)?;
            if json {
                emit(&certification_json(&c)?, None)
            } else {
                let verified = c
                    .certificate()
                    .map(|cert| verify_certificate(cert, &rho, copies, &cfg))
                    .transpose()?;
                emit(&certification_text(&c, verified), None)
            }
        }
        Command::CertifyRank4 { input, json } => {
            let rho = read_state_file(&input, &cfg)?;
            if rho.dims() != BipartiteDims::qutrits() {
                return Err(DistillError::InvalidInput(
                    "certify-rank4 expects a two-qutrit state".into(),
                ));
            }
            let rank = numeric_rank_kernel_range(rho.matrix(), cfg.rank_rel_tol).rank;
            if rank != 4 {
                return Err(DistillError::InvalidInput(format!(
                    "expected a rank-4 state, got rank {rank}"
                )));
            }
            let c = certify_n_copies(&rho, 1, &cfg)?;
            if json {
                emit(&certification_json(&c)?, None)
            } else {
                let verified = c
                    .certificate()
                    .map(|cert| verify_certificate(cert, &rho, 1, &cfg))
                    .transpose()?;
                emit(&certification_text(&c, verified), None)
            }
        }
        Command::Multicopy {
            n,
            b,
            theta,
            eps,
            target,
            json,
        } => {
            let n = n as usize;
            let params = EdgeParams::new(
                b.unwrap_or(1.0),
                theta.unwrap_or(FRAC_PI_6),
                eps.unwrap_or(0.0),
            )?;
            match target {
                Target::Werner => {
                    let mut report = extremal_rank2_tensor_power(n, &cfg)?;
                    report.eps_threshold = Some(eps_threshold_for_n(&params, n, &cfg)?.eps);
                    if json {
                        emit(
                            &to_json(&json!({"engineering_bound": true, "report": report}))?,
                            None,
                        )
                    } else {
                        emit(
                            &format!(
                                "n = {n}\nmax  {:.12e}  (1/8^n = {:.12e}, product maximizer {:.12e})\n\
                                 min  {:.12e}  (1/24^n = {:.12e}, conjectured {:.12e}, gap {:.3e})\n\
                                 eps(n) at b = {}, theta = {}: {:.6e} (engineering bound)",
                                report.max_value,
                                report.bound_upper,
                                report.product_maximizer_value,
                                report.min_value,
                                report.bound_lower,
                                report.conjecture_value,
                                report.conjecture_gap,
                                params.b,
                                params.theta,
                                report.eps_threshold.unwrap_or(f64::NAN),
                            ),
                            None,
                        )
                    }
                }
                Target::Rho => {
                    let report = verify_n_undistillable(&params, n, &cfg)?;
                    if json {
                        emit(&to_json(&report)?, None)
                    } else {
                        emit(
                            &format!(
                                "rho(b = {}, theta = {}, eps = {:.6e}) is NPT (min PT eigenvalue {:.3e}) and {n}-undistillable:\n\
                                 rank-2 minimum {:.6e} >= analytic bound {:.6e} (eps({n}) = {:.6e}, engineering bound)",
                                report.params.b,
                                report.params.theta,
                                report.params.eps,
                                report.rho_pt_min_eigenvalue,
                                report.numeric_min,
                                report.analytic_bound,
                                report.threshold.eps,
                            ),
                            None,
                        )
                    }
                }
            }
        }
        Command::Random {
            dim_a,
            dim_b,
            rank,
            npt,
            seed,
            out,
        } => {
            let dims = BipartiteDims::new(dim_a, dim_b)?;
            let (rho, used_seed) = if npt {
                let spec = EnsembleSpec::new(dims, rank, 1, Filter::Npt, seed)?;
                let (s, rho) = sample_ensemble(&spec, &cfg)?.states.remove(0);
                (rho, s)
            } else {
                (random_state(dims, rank, seed, &cfg)?, seed)
            };
            let meta = json!({"rank": rank, "seed": seed, "sample_seed": used_seed, "npt": npt});
            emit(&state_to_json(&rho, Some(&meta))?, out.as_ref())
        }
        Command::Verify {
            suite,
            trials,
            seed,
            json,
        } => {
            let name: SuiteName = suite.parse()?;
            let spec = name.default_spec(trials, seed)?;
            let reports = run_suite(name, &spec, &cfg)?;
            if json {
                emit(&to_json(&reports)?, None)
            } else {
                for r in &reports {
                    let mut line = format!(
                        "{}: {}/{} passed in {:.2}s",
                        r.suite, r.passes, r.trials, r.wall_time_s
                    );
                    if r.skipped {
                        line.push_str(" (skipped: no qualifying states)");
                    }
                    if let Some(s) = &r.sampling {
                        line.push_str(&format!(", acceptance {}/{}", s.accepted, s.attempts));
                    }
                    emit(&line, None)?;
                    for f in &r.failures {
                        emit(
                            &format!("  trial {} (seed {:?}): {}", f.trial, f.seed, f.reason),
                            None,
                        )?;
                    }
                }
                Ok(())
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        DistillError::InvalidInput(format!(
            "{THREADS_VAR} must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| DistillError::InvalidInput(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
