//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! lines are always printed; exits nonzero if any criterion fails.

use std::f64::consts::FRAC_PI_6;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use distill_lab::edgestate::{
    build_rho, build_sigma, default_grid, mes3, p1_formula, sigma_gamma_closed_form, EdgeParams,
};
use distill_lab::harness::{run_suite, SuiteName};
use distill_lab::multicopy::{
    eps_threshold_for_n, extremal_rank2_tensor_power, max_rank2_overlap_mes,
    operator_bound_min_eigenvalue, verify_n_undistillable,
};
use distill_lab::qcore::{
    basis_vector, hermitian_eig, kron_vec, numeric_rank_kernel_range, partial_transpose,
    quadratic_form, schmidt_decompose, tensor_bipartite,
};
use distill_lab::rng::StreamRng;
use distill_lab::witness::{
    certify_1_distillable, two_nonpositive_witness, verify_certificate, Certification,
};
use distill_lab::{BipartiteDims, BipartiteState, PureState, ToleranceConfig, C64};

/// Smallest positive eigenvalue of σ^Γ at (b, θ) = (1, π/6), from an
/// independent dense eigensolver (LAPACK `zheevd` through numpy).
const P1_ORACLE: f64 = 0.011966128287415;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(err: T) -> String {
    err.to_string()
}

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn edge_structure() -> Check {
    let c = cfg();
    for (b, th) in default_grid() {
        let p = EdgeParams::new(b, th, 0.0).map_err(e)?;
        let sigma = build_sigma(&p).map_err(e)?;
        let pt = sigma.partial_transpose();
        let at = format!("(b, theta) = ({b}, {th:.4})");
        ensure(
            (sigma.trace() - 1.0).abs() <= 1e-12,
            format!("trace at {at}"),
        )?;
        let r = numeric_rank_kernel_range(sigma.matrix(), c.rank_rel_tol).rank;
        let rg = numeric_rank_kernel_range(&pt, c.rank_rel_tol).rank;
        ensure(r == 5 && rg == 8, format!("birank ({rg}, {r}) at {at}"))?;
        let leak = (&pt * mes3().vector()).norm();
        ensure(leak <= 1e-12, format!("|sigma^G Psi| = {leak:e} at {at}"))?;
        let diff = (sigma_gamma_closed_form(&p).map_err(e)? - &pt).camax();
        ensure(
            diff <= 1e-15,
            format!("closed form differs by {diff:e} at {at}"),
        )?;
    }
    Ok("12 grid points: trace 1, birank (8, 5), sigma^G Psi = 0, closed form exact".into())
}

fn p1_consistency() -> Check {
    let c = cfg();
    let mut worst: f64 = 0.0;
    for (b, th) in default_grid() {
        let p = EdgeParams::new(b, th, 0.0).map_err(e)?;
        let ev = hermitian_eig(&build_sigma(&p).map_err(e)?.partial_transpose(), &c)
            .map_err(e)?
            .eigenvalues;
        let smallest_positive = ev
            .iter()
            .copied()
            .find(|&x| x > 1e-10)
            .ok_or("no positive eigenvalue")?;
        worst = worst.max((p1_formula(&p) - smallest_positive).abs());
    }
    ensure(
        worst <= 1e-10,
        format!("p1 deviates from the spectrum by {worst:e}"),
    )?;
    let p1 = p1_formula(&EdgeParams::new(1.0, FRAC_PI_6, 0.0).map_err(e)?);
    ensure(
        (p1 - P1_ORACLE).abs() <= 1e-10,
        format!("p1(1, pi/6) = {p1}"),
    )?;
    Ok(format!("max deviation {worst:.1e}; p1(1, pi/6) = {p1:.10}"))
}

fn suite_all_pass(name: SuiteName, seed: u64) -> std::result::Result<(usize, usize), String> {
    let spec = name.default_spec(100, seed).map_err(e)?;
    let r = run_suite(name, &spec, &cfg()).map_err(e)?.remove(0);
    if let Some(f) = r.failures.first() {
        return Err(format!(
            "{} failures, first: trial {}: {}",
            r.failures.len(),
            f.trial,
            f.reason
        ));
    }
    ensure(
        r.trials == 100 && r.passes == 100,
        format!("{}/{} passed", r.passes, r.trials),
    )?;
    let s = r.sampling.ok_or("missing sampling stats")?;
    Ok((s.accepted, s.attempts))
}

fn rank4_distillable() -> Check {
    let (acc, att) = suite_all_pass(SuiteName::TheoremRank4, 20_240_101)?;
    Ok(format!(
        "100/100 rank-4 NPT states certified and verified (acceptance {acc}/{att})"
    ))
}

fn two_nonpositive() -> Check {
    let (acc, att) = suite_all_pass(SuiteName::TheoremTwoEigs, 20_240_102)?;
    let c = cfg();
    let rho = BipartiteState::new(mes3().projector(), BipartiteDims::qutrits(), &c).map_err(e)?;
    let cert = two_nonpositive_witness(&rho, &c)
        .map_err(e)?
        .ok_or("no witness for |Psi><Psi|")?;
    ensure(
        verify_certificate(&cert, &rho, 1, &c).map_err(e)?,
        "|Psi><Psi| certificate does not verify",
    )?;
    ensure(
        (cert.value + 1.0 / 3.0).abs() <= 1e-8,
        format!("|Psi><Psi| value {}", cert.value),
    )?;
    Ok(format!(
        "100/100 certified (acceptance {acc}/{att}); |Psi><Psi| value {:.12}",
        cert.value
    ))
}

fn undistillable_construction() -> Check {
    let c = cfg();
    let params = EdgeParams::with_default_eps(1.0, FRAC_PI_6).map_err(e)?;
    let bundle = build_rho(&params, &c).map_err(e)?;
    ensure(bundle.params.eps == params.eps, "eps was shrunk")?;
    let ev = hermitian_eig(bundle.rho.matrix(), &c).map_err(e)?;
    ensure(
        ev.min() >= -c.psd_tol,
        format!("rho has eigenvalue {}", ev.min()),
    )?;
    let rank = numeric_rank_kernel_range(bundle.rho.matrix(), c.rank_rel_tol).rank;
    ensure(rank == 5, format!("rank {rank}"))?;
    let pev = hermitian_eig(&bundle.rho.partial_transpose(), &c)
        .map_err(e)?
        .eigenvalues;
    let neg = pev.iter().filter(|&&x| x < -c.psd_tol).count();
    ensure(neg == 1, format!("{neg} negative PT eigenvalues"))?;
    let margin = bundle.p1 / 3.0 - bundle.params.eps;
    match certify_1_distillable(&bundle.rho, &c).map_err(e)? {
        Certification::NoWitness {
            restarts,
            best_value,
            ..
        } => {
            ensure(restarts >= 64, format!("only {restarts} restarts"))?;
            ensure(
                best_value >= margin - 1e-8,
                format!("best value {best_value} below margin {margin}"),
            )?;
            Ok(format!("PSD, rank 5, one negative PT eigenvalue; no witness over {restarts} restarts; best {best_value:.4e} >= margin {margin:.4e}"))
        }
        Certification::Certified(cert) => {
            Err(format!("unexpected certificate with value {}", cert.value))
        }
        Certification::Ppt => Err("rho is PPT".into()),
    }
}

fn overlap_bound() -> Check {
    let v = max_rank2_overlap_mes(&cfg()).map_err(e)?;
    ensure(
        (v - 2.0 / 3.0).abs() <= 1e-6 && v <= 2.0 / 3.0 + 1e-10,
        format!("max overlap {v}"),
    )?;
    Ok(format!("max rank-2 overlap {v:.12}"))
}

fn werner_bounds() -> Check {
    let c = cfg();
    let r1 = extremal_rank2_tensor_power(1, &c).map_err(e)?;
    ensure(
        (r1.min_value - 1.0 / 24.0).abs() <= 1e-6,
        format!("n=1 min {}", r1.min_value),
    )?;
    ensure(
        (r1.max_value - 0.125).abs() <= 1e-10,
        format!("n=1 max {}", r1.max_value),
    )?;
    let r2 = extremal_rank2_tensor_power(2, &c).map_err(e)?;
    ensure(
        (r2.max_value - 1.0 / 64.0).abs() <= 1e-6,
        format!("n=2 max {}", r2.max_value),
    )?;
    // |00>_{A1A2} |11>_{B1B2} sits at index 0 * 9 + 4.
    let rs = distill_lab::multicopy::werner_projector();
    let (x, _) =
        distill_lab::qcore::tensor_power_bipartite(rs.matrix(), rs.dims(), 2, &c).map_err(e)?;
    let at_product = quadratic_form(&x, &basis_vector(81, 4));
    ensure(
        (at_product - 1.0 / 64.0).abs() <= 1e-6,
        format!("product maximizer gives {at_product}"),
    )?;
    ensure(
        r2.min_value >= 1.0 / 576.0 - 1e-8,
        format!("n=2 min {}", r2.min_value),
    )?;
    Ok(format!(
        "n=1 min {:.10} max {:.12}; n=2 max {:.10}, min {:.10e} (distance to 1/288: {:.2e})",
        r1.min_value,
        r1.max_value,
        r2.max_value,
        r2.min_value,
        r2.min_value - 1.0 / 288.0
    ))
}

fn operator_bound() -> Check {
    let c = cfg();
    let p = EdgeParams::new(1.0, FRAC_PI_6, 0.0).map_err(e)?;
    let m1 = operator_bound_min_eigenvalue(&p, 1, &c).map_err(e)?;
    let m2 = operator_bound_min_eigenvalue(&p, 2, &c).map_err(e)?;
    ensure(
        m1 >= -1e-9 && m2 >= -1e-9,
        format!("min eigenvalues {m1:e}, {m2:e}"),
    )?;
    Ok(format!("min eigenvalues {m1:.2e} (n=1), {m2:.2e} (n=2)"))
}

fn two_copy_undistillable() -> Check {
    let c = cfg();
    let p = EdgeParams::with_default_eps(1.0, FRAC_PI_6).map_err(e)?;
    let t = eps_threshold_for_n(&p, 2, &c).map_err(e)?;
    ensure(t.eps > 0.0, "eps(2) is zero")?;
    let r = verify_n_undistillable(&p, 2, &c).map_err(e)?;
    ensure(
        r.numeric_min > 0.0 && r.numeric_min >= r.analytic_bound - 1e-8,
        format!("min {}", r.numeric_min),
    )?;
    Ok(format!(
        "eps(2) = {:.4e}; at eps = {:.4e} rank-2 minimum {:.4e} >= bound {:.4e}",
        t.eps, r.params.eps, r.numeric_min, r.analytic_bound
    ))
}

fn core_invariants() -> Check {
    let c = cfg();
    let mut rng = StreamRng::new(0x5eed);
    let shapes = [(2, 2), (2, 3), (3, 3), (3, 2), (4, 2)];
    for (m, n) in shapes {
        let dims = BipartiteDims::new(m, n).map_err(e)?;
        let d = dims.total();
        for _ in 0..40 {
            let a = rng.ginibre(d, d);
            let back =
                partial_transpose(&partial_transpose(&a, dims).map_err(e)?, dims).map_err(e)?;
            ensure(a == back, format!("involution fails for ({m}, {n})"))?;
        }
    }
    for _ in 0..20 {
        let (d1, d2) = (
            BipartiteDims::new(2, 3).map_err(e)?,
            BipartiteDims::qutrits(),
        );
        let (g1, g2) = (rng.ginibre(6, 6), rng.ginibre(9, 9));
        let (r1, r2) = (&g1 * g1.adjoint(), &g2 * g2.adjoint());
        let (prod, dp) = tensor_bipartite(&r1, d1, &r2, d2).map_err(e)?;
        let lhs = partial_transpose(&prod, dp).map_err(e)?;
        let (rhs, _) = tensor_bipartite(
            &partial_transpose(&r1, d1).map_err(e)?,
            d1,
            &partial_transpose(&r2, d2).map_err(e)?,
            d2,
        )
        .map_err(e)?;
        ensure(
            (lhs - rhs).camax() <= 1e-14,
            "partial transpose does not factorize",
        )?;
    }
    let dims = BipartiteDims::qutrits();
    let g = rng.ginibre(9, 9);
    let rho_pt = partial_transpose(
        &(&g * g.adjoint() / C64::from((&g * g.adjoint()).trace().re)),
        dims,
    )
    .map_err(e)?;
    let mut lowest = f64::INFINITY;
    for _ in 0..1000 {
        let v = kron_vec(&rng.unit_vector(3), &rng.unit_vector(3));
        lowest = lowest.min(quadratic_form(&rho_pt, &v));
    }
    ensure(
        lowest >= -c.psd_tol,
        format!("product vector value {lowest:e}"),
    )?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let psi = PureState::new(rng.complex_vector(9), dims).map_err(e)?;
        let u = rng.unitary(3).kronecker(&rng.unitary(3));
        let moved = PureState::new(u * psi.vector(), dims).map_err(e)?;
        let a = schmidt_decompose(&psi, c.rank_rel_tol)
            .map_err(e)?
            .coefficients;
        let b = schmidt_decompose(&moved, c.rank_rel_tol)
            .map_err(e)?
            .coefficients;
        ensure(
            a.len() == b.len(),
            "Schmidt rank changed under local unitaries",
        )?;
        worst = a
            .iter()
            .zip(&b)
            .fold(worst, |w, (x, y)| w.max((x - y).abs()));
    }
    ensure(
        worst <= 1e-10,
        format!("Schmidt coefficients move by {worst:e}"),
    )?;
    Ok(format!(
        "involution bit-exact; factorization to 1e-14; 1000 product values >= {lowest:.3e}; Schmidt drift {worst:.1e}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "edge-family structure",
            Duration::from_secs(1),
            edge_structure,
        ),
        ("p1 consistency", Duration::from_secs(1), p1_consistency),
        (
            "rank-4 distillability",
            Duration::from_secs(30),
            rank4_distillable,
        ),
        (
            "two nonpositive PT eigenvalues",
            Duration::from_secs(30),
            two_nonpositive,
        ),
        (
            "1-undistillable NPT construction",
            Duration::from_secs(60),
            undistillable_construction,
        ),
        (
            "rank-2 overlap with Psi",
            Duration::from_secs(10),
            overlap_bound,
        ),
        (
            "Werner rank-2 bounds, n = 1, 2",
            Duration::from_secs(300),
            werner_bounds,
        ),
        (
            "operator bound, n = 1, 2",
            Duration::from_secs(120),
            operator_bound,
        ),
        (
            "2-copy undistillability",
            Duration::from_secs(600),
            two_copy_undistillable,
        ),
        ("core invariants", Duration::from_secs(30), core_invariants),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = match result {
            Ok(msg) if took > *budget => Err(format!("{msg}; took {took:.2?}, budget {budget:?}")),
            other => other,
        };
        match result {
            Ok(msg) => println!("PASS {:>2} {name} ({took:.2?}): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({took:.2?}): {msg}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
