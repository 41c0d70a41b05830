//! Report types. `--json` serializes them as-is (shortest round-trip floats);
//! the human rendering uses 10 significant digits.

use std::fmt::Write as _;

use riccati_core::kernel::to_rows;
use riccati_core::{AssumptionCertificate, FixedPointPair, Residual};
use serde::Serialize;

pub type Rows = Vec<Vec<f64>>;

/// `x` with 10 significant digits.
pub fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.9e}")
    }
}

fn push_matrix(out: &mut String, label: &str, rows: &Rows) {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|&x| sig(x)).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
    let _ = writeln!(out, "{label}:");
    for row in cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "  [ {} ]", line.join("  "));
    }
}

fn push_residual(out: &mut String, label: &str, r: &ResidualEntry) {
    let _ = writeln!(out, "{label}: {} (scale {}, relative {})", sig(r.value), sig(r.scale), sig(r.relative));
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualEntry {
    pub value: f64,
    pub scale: f64,
    pub relative: f64,
}

impl From<Residual> for ResidualEntry {
    fn from(r: Residual) -> Self {
        Self { value: r.value, scale: r.scale, relative: r.relative() }
    }
}

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub name: Option<String>,
    pub dim: usize,
    pub ctrl_rank: usize,
    pub obs_rank: usize,
    pub controllable: bool,
    pub observable: bool,
    pub reach_pd_min_eig: f64,
    pub certified: bool,
}

impl CertifyReport {
    pub fn new(name: Option<String>, cert: &AssumptionCertificate) -> Self {
        Self {
            name,
            dim: cert.dim,
            ctrl_rank: cert.ctrl_rank,
            obs_rank: cert.obs_rank,
            controllable: cert.controllable,
            observable: cert.observable,
            reach_pd_min_eig: cert.reach_pd_min_eig,
            certified: cert.is_certified(),
        }
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        let verdict = |ok| if ok { "PASS" } else { "FAIL" };
        if let Some(name) = &self.name {
            let _ = writeln!(out, "system: {name}");
        }
        let _ = writeln!(out, "dim: {}", self.dim);
        let _ = writeln!(out, "controllability rank: {} / {}  {}", self.ctrl_rank, self.dim, verdict(self.controllable));
        let _ = writeln!(out, "observability rank: {} / {}  {}", self.obs_rank, self.dim, verdict(self.observable));
        let _ = writeln!(out, "lambda_min(A A' + R): {}", sig(self.reach_pd_min_eig));
        let _ = writeln!(out, "result: {}", verdict(self.certified));
        out
    }
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub dim: usize,
    pub tol: f64,
    pub p_inf: Rows,
    pub phat_inf: Rows,
    pub e: Rows,
    pub f: Rows,
    pub h: Rows,
    pub rho_e: f64,
    pub rho_ehat: f64,
    pub fixed_point_residual: f64,
    pub lyapunov_residual: ResidualEntry,
    pub iterations: usize,
    pub dual_iterations: usize,
}

impl SolveReport {
    pub fn new(fp: &FixedPointPair, tol: f64) -> Self {
        Self {
            dim: fp.dim(),
            tol,
            p_inf: to_rows(&fp.p_inf),
            phat_inf: to_rows(&fp.phat_inf),
            e: to_rows(&fp.e),
            f: to_rows(&fp.f),
            h: to_rows(&fp.h),
            rho_e: fp.rho_e,
            rho_ehat: fp.rho_ehat,
            fixed_point_residual: fp.residual,
            lyapunov_residual: fp.lyapunov_residual.into(),
            iterations: fp.iterations,
            dual_iterations: fp.dual_iterations,
        }
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        push_matrix(&mut out, "P_inf", &self.p_inf);
        push_matrix(&mut out, "Phat_inf", &self.phat_inf);
        push_matrix(&mut out, "E", &self.e);
        push_matrix(&mut out, "F", &self.f);
        push_matrix(&mut out, "H", &self.h);
        let _ = writeln!(out, "rho(E): {}", sig(self.rho_e));
        let _ = writeln!(out, "rho(Ehat): {}", sig(self.rho_ehat));
        let _ = writeln!(out, "fixed-point residual: {}", sig(self.fixed_point_residual));
        push_residual(&mut out, "Lyapunov residual", &self.lyapunov_residual);
        let _ = writeln!(out, "iterations: {} (dual {})", self.iterations, self.dual_iterations);
        out
    }
}

/// One named residual check and its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, trial: Option<usize>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), trial, value, bound, passed: value.is_finite() && value <= bound }
    }

    /// A check whose computation itself failed.
    pub fn errored(name: impl Into<String>, trial: Option<usize>, err: &riccati_core::Error) -> Self {
        Self {
            name: format!("{} ({err})", name.into()),
            trial,
            value: f64::NAN,
            bound: 0.0,
            passed: false,
        }
    }

    pub fn describe(&self) -> String {
        let at = self.trial.map(|t| format!(" in trial {t}")).unwrap_or_default();
        if self.value.is_nan() {
            format!("{}{at}", self.name)
        } else {
            format!("{}{at}: {} > {}", self.name, sig(self.value), sig(self.bound))
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DualityEntry {
    pub residual: ResidualEntry,
}

#[derive(Debug, Serialize)]
pub struct FloquetEntry {
    pub ln: Rows,
    pub ln_inv_norm: f64,
    pub product_residual: ResidualEntry,
    pub factor_residual: ResidualEntry,
}

#[derive(Debug, Serialize)]
pub struct BoundEntry {
    pub epsilon: f64,
    pub n_epsilon: usize,
    pub lower_margin: f64,
    pub upper_margin: f64,
}

#[derive(Debug, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub p_norm: f64,
    pub q_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality: Option<DualityEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floquet: Option<FloquetEntry>,
    pub bounds: Vec<BoundEntry>,
    #[serde(skip)]
    pub checks: Vec<Check>,
}

#[derive(Debug, Serialize)]
pub struct FixedPointBlock {
    pub p_inf: Rows,
    pub phat_inf: Rows,
    pub h: Rows,
    pub rho_e: f64,
    pub rho_ehat: f64,
    pub fixed_point_residual: f64,
    pub lyapunov_residual: ResidualEntry,
    /// `||H - sum_k (E^k)' F E^k|| / max(1, ||H||)`
    pub series_agreement: f64,
    pub iterations: usize,
    pub dual_iterations: usize,
}

#[derive(Debug, Serialize)]
pub struct FloquetBlock {
    pub n: usize,
    pub iota: f64,
    pub max_product_residual: f64,
    pub max_ln_inv_norm: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
    pub certificate: CertifyReport,
    pub fixed_point: FixedPointBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floquet: Option<FloquetBlock>,
    pub trials: Vec<TrialReport>,
    pub checks_run: usize,
    pub checks_failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl AnalysisReport {
    pub fn human(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            let _ = writeln!(out, "system: {name}");
        }
        let _ = writeln!(out, "dim: {}  n: {}  trials: {}  seed: {}", self.dim, self.n, self.trials.len(), self.seed);
        let c = &self.certificate;
        let _ = writeln!(out, "ranks: controllability {}, observability {}", c.ctrl_rank, c.obs_rank);
        let fp = &self.fixed_point;
        let _ = writeln!(out, "rho(E): {}  rho(Ehat): {}", sig(fp.rho_e), sig(fp.rho_ehat));
        push_matrix(&mut out, "P_inf", &fp.p_inf);
        push_matrix(&mut out, "H", &fp.h);
        push_residual(&mut out, "Lyapunov residual", &fp.lyapunov_residual);
        let _ = writeln!(out, "Lyapunov series agreement: {}", sig(fp.series_agreement));
        if let Some(fl) = &self.floquet {
            let _ = writeln!(
                out,
                "Floquet n = {}: iota {}, max ||L_n^-1|| {}, max product residual {}",
                fl.n,
                sig(fl.iota),
                sig(fl.max_ln_inv_norm),
                sig(fl.max_product_residual)
            );
        }
        for t in &self.trials {
            let mut parts = vec![format!("|P| {}", sig(t.p_norm)), format!("|Q| {}", sig(t.q_norm))];
            if let Some(x) = t.identities {
                parts.push(format!("identities {}", sig(x)));
            }
            if let Some(d) = &t.duality {
                parts.push(format!("duality {}", sig(d.residual.relative)));
            }
            if let Some(f) = &t.floquet {
                parts.push(format!("floquet {}", sig(f.product_residual.relative)));
            }
            for b in &t.bounds {
                parts.push(format!("eps {} (n_eps {}) margins {} / {}", b.epsilon, b.n_epsilon, sig(b.lower_margin), sig(b.upper_margin)));
            }
            let _ = writeln!(out, "trial {}: {}", t.trial, parts.join(", "));
        }
        let _ = writeln!(out, "checks: {} run, {} failed", self.checks_run, self.checks_failed);
        if let Some(f) = &self.first_failure {
            let _ = writeln!(out, "first failure: {}", f.describe());
        }
        if let Some(ms) = self.elapsed_ms {
            let _ = writeln!(out, "elapsed: {ms:.1} ms");
        }
        let _ = writeln!(out, "result: {}", if self.checks_failed == 0 { "PASS" } else { "FAIL" });
        out
    }
}
