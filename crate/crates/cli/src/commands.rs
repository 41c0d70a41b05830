use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use riccati_core::dare::{lyapunov_solve_series, FixedPointOptions, FP_TOL, SERIES_TOL};
use riccati_core::floquet::{duality_check, floquet_factorize, iota_bound, uniform_bounds};
use riccati_core::kernel::{spectral_norm, to_rows};
use riccati_core::random::{generate_system, random_pd, GeneratorConfig, MAX_ATTEMPTS};
use riccati_core::riccati::{verify_identities, IDENTITY_TOL};
use riccati_core::system_file::Metadata;
use riccati_core::{solve_fixed_point, Error, FixedPointPair, SystemFile, SystemTriple};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::report::*;
use crate::{GenerateArgs, SolverArgs, VerifyArgs};

pub const TOL_ENV: &str = "RICCATI_LAB_TOL";
/// Epsilons used for the uniform-bound checks.
pub const EPSILONS: [f64; 3] = [0.1, 0.5, 0.9];
/// Relative tolerance of the two-route Lyapunov comparison.
const SERIES_AGREEMENT_TOL: f64 = 1e-8;
/// Absolute slack on `||L_n(P)^{-1}|| <= iota`.
const IOTA_SLACK: f64 = 1e-9;

fn load(path: &Path) -> CliResult<(SystemFile, SystemTriple)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let file = SystemFile::from_json(&text)?;
    let sys = file.to_system()?;
    Ok((file, sys))
}

fn name_of(file: &SystemFile) -> Option<String> {
    file.metadata.as_ref().and_then(|m| m.name.clone())
}

fn emit<T: Serialize>(report: &T, json: bool, human: impl FnOnce(&T) -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
    } else {
        print!("{}", human(report));
    }
}

/// `--tol`, then `RICCATI_LAB_TOL`, then the library default.
fn resolve_tol(flag: Option<f64>) -> CliResult<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{TOL_ENV}: not a number: {s:?}")))?,
            Err(_) => FP_TOL,
        },
    };
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Usage(format!("tolerance must be positive and finite, got {tol}")));
    }
    Ok(tol)
}

fn solve_system(sys: &SystemTriple, args: &SolverArgs) -> CliResult<(FixedPointPair, f64)> {
    let tol = resolve_tol(args.tol)?;
    sys.require_certified()?;
    let fp = solve_fixed_point(sys, &FixedPointOptions { tol, max_iter: args.max_iter })?;
    Ok((fp, tol))
}

pub fn certify(path: &Path, json: bool) -> CliResult<()> {
    let (file, sys) = load(path)?;
    let cert = sys.certify();
    let report = CertifyReport::new(name_of(&file), &cert);
    emit(&report, json, CertifyReport::human);
    if report.certified {
        Ok(())
    } else {
        Err(CliError::NotCertified(format!(
            "controllability rank {}, observability rank {}, dim {}",
            cert.ctrl_rank, cert.obs_rank, cert.dim
        )))
    }
}

pub fn solve(path: &Path, args: &SolverArgs, json: bool) -> CliResult<()> {
    let (_, sys) = load(path)?;
    let (fp, tol) = solve_system(&sys, args)?;
    emit(&SolveReport::new(&fp, tol), json, SolveReport::human);
    Ok(())
}

/// Per-trial generator: stream `trial` of the ChaCha8 generator seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

struct TrialContext<'a> {
    fp: &'a FixedPointPair,
    n: usize,
    seed: u64,
    floquet: bool,
    iota: f64,
}

fn run_trial(ctx: &TrialContext<'_>, trial: usize) -> TrialReport {
    let fp = ctx.fp;
    let r = fp.dim();
    let mut rng = trial_rng(ctx.seed, trial);
    let p = random_pd(r, 10f64.powf(rng.random_range(-2.0..3.0)), 1e-3, &mut rng);
    let q = random_pd(r, 10f64.powf(rng.random_range(-2.0..3.0)), 1e-3, &mut rng);
    let t = Some(trial);
    let mut checks = Vec::new();

    let identities = match verify_identities(&fp.sys, p.as_psd(), q.as_psd(), ctx.n) {
        Ok(rep) => {
            checks.push(Check::at_most("transport identities", t, rep.max_relative(), IDENTITY_TOL));
            Some(rep.max_relative())
        }
        Err(Error::IdentityViolation { name, residual, bound }) => {
            checks.push(Check::at_most(format!("identity {name}"), t, residual, bound));
            None
        }
        Err(e) => {
            checks.push(Check::errored("transport identities", t, &e));
            None
        }
    };

    let duality = match duality_check(&fp.sys, &p, &q, ctx.n) {
        Ok(rep) => {
            checks.push(Check::at_most("duality", t, rep.residual.relative(), IDENTITY_TOL));
            Some(DualityEntry { residual: rep.residual.into() })
        }
        Err(e) => {
            checks.push(Check::errored("duality", t, &e));
            None
        }
    };

    let floquet = if ctx.floquet {
        match floquet_factorize(fp, p.as_psd(), ctx.n) {
            Ok(c) => {
                checks.push(Check::at_most("floquet product", t, c.product_residual.relative(), IDENTITY_TOL));
                checks.push(Check::at_most("floquet iota bound", t, c.ln_inv_norm, ctx.iota + IOTA_SLACK));
                Some(FloquetEntry {
                    ln: to_rows(&c.ln),
                    ln_inv_norm: c.ln_inv_norm,
                    product_residual: c.product_residual.into(),
                    factor_residual: c.factor_residual.into(),
                })
            }
            Err(e) => {
                checks.push(Check::errored("floquet factorization", t, &e));
                None
            }
        }
    } else {
        None
    };

    let mut bounds = Vec::new();
    for eps in EPSILONS {
        let label = format!("uniform bounds eps={eps}");
        match uniform_bounds(fp, q.as_psd(), eps, r) {
            Ok(rep) => {
                checks.push(Check::at_most(label, t, 0.0, 0.0));
                bounds.push(BoundEntry {
                    epsilon: eps,
                    n_epsilon: rep.n_epsilon,
                    lower_margin: rep.lower_margin,
                    upper_margin: rep.upper_margin,
                });
            }
            Err(Error::BoundViolation { lower_margin, upper_margin }) => {
                checks.push(Check::at_most(label, t, -lower_margin.min(upper_margin), 0.0));
            }
            Err(e) => checks.push(Check::errored(label, t, &e)),
        }
    }

    TrialReport {
        trial,
        p_norm: spectral_norm(&p),
        q_norm: spectral_norm(&q),
        identities,
        duality,
        floquet,
        bounds,
        checks,
    }
}

pub fn verify(args: &VerifyArgs) -> CliResult<()> {
    let started = Instant::now();
    let (file, sys) = load(&args.path)?;
    let r = sys.dim();
    let n = args.n.unwrap_or(r);
    if n < r && !args.skip_floquet {
        return Err(CliError::Usage(format!(
            "the Floquet checks need n >= r, got n = {n} with r = {r}; pass --skip-floquet to run the others"
        )));
    }
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let cert = sys.certify();
    let (fp, _) = solve_system(&sys, &args.solver)?;

    let mut system_checks = Vec::new();
    system_checks.push(Check::at_most("Lyapunov residual", None, fp.lyapunov_residual.relative(), IDENTITY_TOL));
    let h_scale = spectral_norm(&fp.h).max(1.0);
    let series_agreement = match lyapunov_solve_series(&fp.e, &fp.f, SERIES_TOL * h_scale) {
        Ok(series) => spectral_norm(&(series.as_matrix() - fp.h.as_matrix())) / h_scale,
        Err(e) => {
            system_checks.push(Check::errored("Lyapunov series", None, &e));
            f64::NAN
        }
    };
    if series_agreement.is_finite() {
        system_checks.push(Check::at_most("Lyapunov two-route agreement", None, series_agreement, SERIES_AGREEMENT_TOL));
    }

    let iota = iota_bound(&fp)?;
    let ctx = TrialContext { fp: &fp, n, seed: args.seed, floquet: !args.skip_floquet, iota };
    let trials: Vec<TrialReport> = if args.parallel {
        (0..args.trials).into_par_iter().map(|t| run_trial(&ctx, t)).collect()
    } else {
        (0..args.trials).map(|t| run_trial(&ctx, t)).collect()
    };

    let all: Vec<&Check> = system_checks.iter().chain(trials.iter().flat_map(|t| &t.checks)).collect();
    let first_failure = all.iter().find(|c| !c.passed).map(|&c| c.clone());
    let floquet = ctx.floquet.then(|| {
        let entries = trials.iter().filter_map(|t| t.floquet.as_ref());
        let (mut prod, mut inv) = (0.0f64, 0.0f64);
        for e in entries {
            prod = prod.max(e.product_residual.relative);
            inv = inv.max(e.ln_inv_norm);
        }
        FloquetBlock { n, iota, max_product_residual: prod, max_ln_inv_norm: inv }
    });

    let report = AnalysisReport {
        name: name_of(&file),
        dim: r,
        n,
        seed: args.seed,
        certificate: CertifyReport::new(name_of(&file), &cert),
        fixed_point: FixedPointBlock {
            p_inf: to_rows(&fp.p_inf),
            phat_inf: to_rows(&fp.phat_inf),
            h: to_rows(&fp.h),
            rho_e: fp.rho_e,
            rho_ehat: fp.rho_ehat,
            fixed_point_residual: fp.residual,
            lyapunov_residual: fp.lyapunov_residual.into(),
            series_agreement,
            iterations: fp.iterations,
            dual_iterations: fp.dual_iterations,
        },
        floquet,
        checks_run: all.len(),
        checks_failed: all.iter().filter(|c| !c.passed).count(),
        first_failure,
        trials,
        elapsed_ms: args.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
    };
    emit(&report, args.json, AnalysisReport::human);
    match &report.first_failure {
        None => Ok(()),
        Some(c) => Err(CliError::CheckFailed(c.describe())),
    }
}

pub fn generate(args: &GenerateArgs) -> CliResult<()> {
    if args.dim == 0 {
        return Err(CliError::Usage("--dim must be at least 1".into()));
    }
    let cfg = GeneratorConfig {
        dim: args.dim,
        spectral_radius: Some(args.spectral_radius),
        rank_r: args.rank_r.unwrap_or(args.dim),
        rank_s: args.rank_s.unwrap_or(args.dim),
        ridge_r: args.ridge_r,
        ridge_s: args.ridge_s,
        max_attempts: MAX_ATTEMPTS,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let generated = generate_system(&cfg, &mut rng)?;
    let metadata = Metadata {
        name: args.name.clone(),
        seed: Some(args.seed),
        attempts: Some(generated.attempts),
        certification: Some(generated.certificate),
    };
    let text = SystemFile::from_system(&generated.system, Some(metadata)).to_json_pretty();
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}
