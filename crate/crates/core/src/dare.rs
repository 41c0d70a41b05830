//! Fixed points of the primal and dual Riccati maps, the closed-loop data
//! `(E, E-hat, F, H)`, Lyapunov solutions and the negative fixed point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{
    loewner_compare, lu_inverse, matrix_power, min_lu_pivot, scale_of, spectral_norm,
    spectral_radius, Matrix, PdMatrix, PsdMatrix, Residual, SymMatrix,
};
use crate::riccati::{map_e, map_f, parallel_add, phi, IDENTITY_TOL};
use crate::system::SystemTriple;

/// Default relative stopping tolerance of the fixed-point iteration.
pub const FP_TOL: f64 = 1e-12;
pub const MAX_ITER: usize = 100_000;
/// Default relative truncation tolerance of the Lyapunov series.
pub const SERIES_TOL: f64 = 1e-13;
pub const SERIES_MAX_TERMS: usize = 100_000;
/// Consecutive non-decreasing term norms that flag a divergent series.
pub const DIVERGENCE_WINDOW: usize = 20;
/// `A` counts as invertible when its smallest LU pivot exceeds this times `||A||`.
pub const A_INVERTIBLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    /// Target accuracy relative to `max(1, ||P||)`; see [`iterate_fixed_point`].
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: FP_TOL,
            max_iter: MAX_ITER,
        }
    }
}

/// Result of the plain fixed-point iteration `P_{n+1} = Phi(P_n)`.
#[derive(Debug, Clone)]
pub struct FixedPointIterate {
    pub p: PsdMatrix,
    pub iterations: usize,
    pub last_step: f64,
}

/// Steps below `ROUNDING_FLOOR * max(1, ||P||)` are treated as rounding noise.
const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Iterates `Phi` from `start` until successive iterates agree.
///
/// Once the step passes `tol`, iteration continues while the geometric tail
/// estimate `step * q / (1 - q)` (with `q` the ratio of the last two steps)
/// still exceeds `tol`, unless the step has hit the rounding floor or
/// stopped shrinking. Without this, slowly contracting systems
/// (`rho(E)` near one) stop with an error far above `tol`.
pub fn iterate_fixed_point(
    sys: &SystemTriple,
    start: &PsdMatrix,
    opts: &FixedPointOptions,
) -> Result<FixedPointIterate> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let mut current = start.clone();
    let mut last_step = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = phi(sys, &current)?;
        let step = spectral_norm(&(next.as_matrix() - current.as_matrix()));
        let scale = spectral_norm(&next).max(1.0);
        let done = step <= opts.tol * scale && {
            let q = step / last_step;
            let tail_ok = q < 1.0 && step * q / (1.0 - q) <= opts.tol * scale;
            tail_ok || step <= ROUNDING_FLOOR * scale || q >= 1.0
        };
        last_step = step;
        current = next;
        if done {
            return Ok(FixedPointIterate {
                p: current,
                iterations: it,
                last_step,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last_step,
    })
}

/// `P_inf`, `P-hat_inf` and the closed-loop data built from them.
#[derive(Debug, Clone)]
pub struct FixedPointPair {
    pub sys: SystemTriple,
    pub p_inf: PdMatrix,
    pub phat_inf: PdMatrix,
    /// `A (I + P_inf S)^{-1}`
    pub e: Matrix,
    /// `A' (I + P-hat_inf R)^{-1}`
    pub ehat: Matrix,
    /// `S (I + P_inf S)^{-1}`
    pub f: PsdMatrix,
    /// `(P_inf + P-hat_inf^{-1})^{-1}`
    pub h: PdMatrix,
    pub rho_e: f64,
    pub rho_ehat: f64,
    pub iterations: usize,
    pub dual_iterations: usize,
    /// `max(||Phi(P_inf) - P_inf||, ||Phi-hat(P-hat_inf) - P-hat_inf||)`
    pub residual: f64,
    /// `||E' H E + F - H||` against `max(1, ||H||)`
    pub lyapunov_residual: Residual,
}

impl FixedPointPair {
    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    /// `E^n`.
    pub fn e_power(&self, n: usize) -> Matrix {
        matrix_power(&self.e, n)
    }
}

/// Solves both Riccati fixed points by monotone iteration from zero.
///
/// Requires both rank conditions. Fails with `SpectralCertificateFailure`
/// if a converged closed-loop matrix has `rho >= 1`.
pub fn solve_fixed_point(sys: &SystemTriple, opts: &FixedPointOptions) -> Result<FixedPointPair> {
    sys.require_certified()?;
    let dual = sys.dual();
    let zero = PsdMatrix::zeros(sys.dim());
    let primal = iterate_fixed_point(sys, &zero, opts)?;
    let dual_it = iterate_fixed_point(&dual, &zero, opts)?;

    let p_inf = PdMatrix::from_psd(primal.p)?;
    let phat_inf = PdMatrix::from_psd(dual_it.p)?;
    let e = map_e(sys, p_inf.as_psd())?;
    let ehat = map_e(&dual, phat_inf.as_psd())?;
    let f = map_f(sys, p_inf.as_psd())?;
    let h = parallel_add(&p_inf, &phat_inf)?;

    let rho_e = spectral_radius(&e);
    let rho_ehat = spectral_radius(&ehat);
    for rho in [rho_e, rho_ehat] {
        if !(rho < 1.0) {
            return Err(Error::SpectralCertificateFailure { rho });
        }
    }

    let res_p = spectral_norm(&(phi(sys, p_inf.as_psd())?.as_matrix() - p_inf.as_matrix()));
    let res_phat = spectral_norm(&(phi(&dual, phat_inf.as_psd())?.as_matrix() - phat_inf.as_matrix()));

    let lyap = e.transpose() * h.as_matrix() * &e + f.as_matrix();
    let lyapunov_residual = Residual::new(
        spectral_norm(&(&lyap - h.as_matrix())),
        scale_of(&[h.as_matrix()]),
    );

    Ok(FixedPointPair {
        sys: sys.clone(),
        p_inf,
        phat_inf,
        e,
        ehat,
        f,
        h,
        rho_e,
        rho_ehat,
        iterations: primal.iterations,
        dual_iterations: dual_it.iterations,
        residual: res_p.max(res_phat),
        lyapunov_residual,
    })
}

/// `X = sum_k (E')^k F E^k`, truncated once a term falls below
/// `tol * max(1, ||F||)`.
pub fn lyapunov_solve_series(e: &Matrix, f: &PsdMatrix, tol: f64) -> Result<PsdMatrix> {
    let scale = scale_of(&[f.as_matrix()]);
    let cutoff = tol * scale;
    let mut term = f.as_matrix().clone();
    let mut sum = term.clone();
    let mut prev_norm = spectral_norm(&term);
    let mut rising = 0;
    for k in 1..=SERIES_MAX_TERMS {
        if prev_norm <= cutoff {
            return PsdMatrix::from_result(sum);
        }
        term = e.transpose() * term * e;
        let norm = spectral_norm(&term);
        if !norm.is_finite() {
            return Err(Error::Divergence { terms: k, term_norm: norm });
        }
        rising = if norm >= prev_norm { rising + 1 } else { 0 };
        if rising >= DIVERGENCE_WINDOW {
            return Err(Error::Divergence { terms: k, term_norm: norm });
        }
        sum += &term;
        prev_norm = norm;
    }
    Err(Error::Divergence {
        terms: SERIES_MAX_TERMS,
        term_norm: prev_norm,
    })
}

/// Lyapunov solution from the dual Riccati fixed point,
/// `H = (P_inf + P-hat_inf^{-1})^{-1}`.
pub fn lyapunov_solve_dual(sys: &SystemTriple) -> Result<PdMatrix> {
    Ok(solve_fixed_point(sys, &FixedPointOptions::default())?.h)
}

/// `G_n = H - (E^n)' H E^n`.
pub fn limit_gramian(fp: &FixedPointPair, n: usize) -> Result<PsdMatrix> {
    let en = fp.e_power(n);
    PsdMatrix::from_result(fp.h.as_matrix() - en.transpose() * fp.h.as_matrix() * en)
}

/// `G_n` from `G_k = E' G_{k-1} E + F`, `G_0 = 0`.
pub fn limit_gramian_recursive(fp: &FixedPointPair, n: usize) -> Result<PsdMatrix> {
    let r = fp.dim();
    let mut g = Matrix::zeros(r, r);
    for _ in 0..n {
        g = fp.e.transpose() * g * &fp.e + fp.f.as_matrix();
    }
    PsdMatrix::from_result(g)
}

/// The negative fixed point `P^-_inf = -P-hat_inf^{-1}` of the extended map
/// `P -> A (P^{-1} + S)^{-1} A' + R`.
#[derive(Debug, Clone, Serialize)]
pub struct NegativeFixedPoint {
    #[serde(skip)]
    pub p_minus: SymMatrix,
    /// `||A ((P^-)^{-1} + S)^{-1} A' + R - P^-||`
    pub residual: Residual,
    /// `lambda_max(P^-)`, negative when certified.
    pub max_eigenvalue: f64,
    /// `lambda_min(P^- + S^{-1})` when `S` is PD.
    pub margin_above_minus_s_inv: Option<f64>,
}

impl NegativeFixedPoint {
    pub fn is_negative_definite(&self) -> bool {
        self.max_eigenvalue < 0.0
    }

    /// `-S^{-1} < P^-`, or `None` when `S` is singular.
    pub fn above_minus_s_inv(&self) -> Option<bool> {
        self.margin_above_minus_s_inv.map(|m| m > 0.0)
    }
}

pub fn negative_fixed_point(sys: &SystemTriple) -> Result<NegativeFixedPoint> {
    check_a_invertible(sys)?;
    let fp = solve_fixed_point(sys, &FixedPointOptions::default())?;
    negative_fixed_point_from(&fp)
}

fn check_a_invertible(sys: &SystemTriple) -> Result<()> {
    let pivot = min_lu_pivot(sys.a());
    if pivot > A_INVERTIBLE_TOL * spectral_norm(sys.a()) && pivot > 0.0 {
        Ok(())
    } else {
        Err(Error::SingularA { pivot })
    }
}

/// Negative fixed point from an already solved pair.
pub fn negative_fixed_point_from(fp: &FixedPointPair) -> Result<NegativeFixedPoint> {
    let sys = &fp.sys;
    check_a_invertible(sys)?;
    let phat_inv = fp.phat_inf.inverse()?;
    let p_minus = SymMatrix::symmetrize(-phat_inv.as_matrix())?;

    // (P^-)^{-1} + S = S - P-hat_inf
    let middle = sys.s().as_matrix() - fp.phat_inf.as_matrix();
    let middle_inv = lu_inverse(&middle, "S - P-hat_inf")?;
    let mapped = sys.a() * middle_inv * sys.a().transpose() + sys.r().as_matrix();
    let residual = Residual::new(
        spectral_norm(&(&mapped - p_minus.as_matrix())),
        scale_of(&[&mapped, p_minus.as_matrix()]),
    );
    if !residual.within(IDENTITY_TOL) {
        return Err(Error::IdentityViolation {
            name: "Phi(P^-) = P^-",
            residual: residual.value,
            bound: IDENTITY_TOL * residual.scale,
        });
    }
    let margin_above_minus_s_inv = PdMatrix::from_psd(sys.s().clone())
        .ok()
        .and_then(|s| s.inverse().ok())
        .map(|s_inv| loewner_compare(p_minus.as_matrix(), &-s_inv.as_matrix()).min_gap);
    Ok(NegativeFixedPoint {
        max_eigenvalue: p_minus.max_eigenvalue(),
        p_minus,
        residual,
        margin_above_minus_s_inv,
    })
}
