//! Duality and Floquet-type factorization of directed Riccati products.
//!
//! With `G_n = H - (E^n)' H E^n` and `L_n(P) = I + (P - P_inf) G_n`, every
//! horizon `n >= r` gives `E_n(P) = E^n L_n(P)^{-1}` and the uniform bound
//! `||L_n(P)^{-1}|| <= ||P-hat_inf|| ||G_r^{-1}||` (the iota bound).

use serde::Serialize;

use crate::dare::{limit_gramian, FixedPointPair};
use crate::error::{Error, Result};
use crate::kernel::{
    loewner_compare, lu_inverse, lu_solve, min_lu_pivot, scale_of, spectral_norm, tol, Matrix,
    PdMatrix, PsdMatrix, Residual,
};
use crate::riccati::{parallel_add, phi_n_with, Retention};
use crate::system::SystemTriple;

/// Cap of the linear `n_eps` scan.
pub const N_EPS_CAP: usize = 1_000_000;
/// Horizons after the first hit checked for persistence.
pub const PERSISTENCE_WINDOW: usize = 10;

fn require_horizon(fp: &FixedPointPair, n: usize) -> Result<()> {
    if n < fp.dim() {
        Err(Error::InvalidHorizon { n, min: fp.dim() })
    } else {
        Ok(())
    }
}

/// `L_n(P) = I + (P - P_inf) G_n`.
pub fn l_map(fp: &FixedPointPair, p: &PsdMatrix, n: usize) -> Result<Matrix> {
    let r = fp.dim();
    let g = limit_gramian(fp, n)?;
    Ok(Matrix::identity(r, r) + (p.as_matrix() - fp.p_inf.as_matrix()) * g.as_matrix())
}

/// `||P-hat_inf|| * ||G_r^{-1}||`.
pub fn iota_bound(fp: &FixedPointPair) -> Result<f64> {
    let g_r = PdMatrix::from_psd(limit_gramian(fp, fp.dim())?)?;
    Ok(spectral_norm(&fp.phat_inf) / g_r.min_eigenvalue())
}

#[derive(Debug, Clone, Serialize)]
pub struct FloquetCertificate {
    pub n: usize,
    #[serde(skip)]
    pub ln: Matrix,
    #[serde(skip)]
    pub ln_inv: Matrix,
    /// `E_n(P) - E^n L_n(P)^{-1}`
    pub factor_residual: Residual,
    /// `E_n(P) L_n(P) - E^n`
    pub product_residual: Residual,
    pub iota_bound: f64,
    pub ln_inv_norm: f64,
}

impl FloquetCertificate {
    pub fn within_iota(&self) -> bool {
        self.ln_inv_norm <= self.iota_bound + 1e-9
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.within_iota() && self.factor_residual.within(tol) && self.product_residual.within(tol)
    }
}

/// Inverts `L_n(P)` for `n >= r` and certifies `E_n(P) = E^n L_n(P)^{-1}`.
pub fn floquet_factorize(fp: &FixedPointPair, p: &PsdMatrix, n: usize) -> Result<FloquetCertificate> {
    require_horizon(fp, n)?;
    let ln = l_map(fp, p, n)?;
    let ln_inv = lu_inverse(&ln, "L_n(P)").map_err(|_| Error::SingularL {
        n,
        pivot: min_lu_pivot(&ln),
    })?;
    let traj = phi_n_with(&fp.sys, p, n, Retention::FinalOnly)?;
    let en_p = traj.final_product();
    let en = fp.e_power(n);

    let factored = &en * &ln_inv;
    let factor_residual = Residual::new(
        spectral_norm(&(en_p - &factored)),
        scale_of(&[en_p]).max(spectral_norm(&en) * spectral_norm(&ln_inv)),
    );
    let product_residual = Residual::new(
        spectral_norm(&(en_p * &ln - &en)),
        scale_of(&[&en]).max(spectral_norm(en_p) * spectral_norm(&ln)),
    );
    Ok(FloquetCertificate {
        n,
        ln_inv_norm: spectral_norm(&ln_inv),
        ln,
        ln_inv,
        factor_residual,
        product_residual,
        iota_bound: iota_bound(fp)?,
    })
}

/// Both sides of the semigroup duality formula
/// `H(P, Phi-hat_n(Q)) = E_n(P)' H(Phi_n(P), Q) E_n(P) + G_n(P)`.
#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    #[serde(skip)]
    pub lhs: Matrix,
    #[serde(skip)]
    pub rhs: Matrix,
    pub residual: Residual,
}

pub fn duality_check(sys: &SystemTriple, p: &PdMatrix, q: &PdMatrix, n: usize) -> Result<DualityReport> {
    if n == 0 {
        return Err(Error::InvalidHorizon { n, min: 1 });
    }
    let primal = phi_n_with(sys, p.as_psd(), n, Retention::FinalOnly)?;
    let dual = phi_n_with(&sys.dual(), q.as_psd(), n, Retention::FinalOnly)?;

    let phat_q = PdMatrix::from_psd(dual.final_state().clone())?;
    let lhs = parallel_add(p, &phat_q)?.as_matrix().clone();

    let phi_p = PdMatrix::from_psd(primal.final_state().clone())?;
    let inner = parallel_add(&phi_p, q)?;
    let en = primal.final_product();
    let rhs = en.transpose() * inner.as_matrix() * en + primal.final_gramian().as_matrix();

    let residual = Residual::between(&lhs, &rhs);
    Ok(DualityReport { lhs, rhs, residual })
}

/// `Phi_n(P) = P_inf + E^n L_n(P)^{-1} (P - P_inf) (E^n)'` for `n >= r`.
pub fn explicit_solution(fp: &FixedPointPair, p: &PsdMatrix, n: usize) -> Result<PsdMatrix> {
    require_horizon(fp, n)?;
    let ln = l_map(fp, p, n)?;
    let en = fp.e_power(n);
    let dev = p.as_matrix() - fp.p_inf.as_matrix();
    let solved = lu_solve(&ln, &dev, "L_n(P)").map_err(|_| Error::SingularL {
        n,
        pivot: min_lu_pivot(&ln),
    })?;
    PsdMatrix::from_result(fp.p_inf.as_matrix() + &en * solved * en.transpose())
}

/// `E_n(P) - E^n = E^n L_n(P)^{-1} (P_inf - P) G_n` for `n >= r`.
pub fn product_deviation(fp: &FixedPointPair, p: &PsdMatrix, n: usize) -> Result<Matrix> {
    require_horizon(fp, n)?;
    let ln = l_map(fp, p, n)?;
    let g = limit_gramian(fp, n)?;
    let en = fp.e_power(n);
    let rhs = (fp.p_inf.as_matrix() - p.as_matrix()) * g.as_matrix();
    let solved = lu_solve(&ln, &rhs, "L_n(P)").map_err(|_| Error::SingularL {
        n,
        pivot: min_lu_pivot(&ln),
    })?;
    Ok(en * solved)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzConstants {
    /// `(iota ||E^n||)^2`, bounds `||Phi_n(P) - Phi_n(Q)|| / ||P - Q||`.
    pub phi: f64,
    /// `iota^2 ||E^n|| ||H||`, bounds `||E_n(P) - E_n(Q)|| / ||P - Q||`.
    pub e: f64,
}

pub fn lipschitz_constants(fp: &FixedPointPair, n: usize) -> Result<LipschitzConstants> {
    require_horizon(fp, n)?;
    let iota = iota_bound(fp)?;
    let en_norm = spectral_norm(&fp.e_power(n));
    Ok(LipschitzConstants {
        phi: (iota * en_norm).powi(2),
        e: iota * iota * en_norm * spectral_norm(&fp.h),
    })
}

/// `Omega_n = sum_{k<n} (E^k)' S E^k`.
pub fn omega_gramian(fp: &FixedPointPair, n: usize) -> Result<PsdMatrix> {
    if n == 0 {
        return Err(Error::InvalidHorizon { n, min: 1 });
    }
    let r = fp.dim();
    let s = fp.sys.s().as_matrix();
    let mut power = Matrix::identity(r, r);
    let mut acc = Matrix::zeros(r, r);
    for _ in 0..n {
        acc += power.transpose() * s * &power;
        power = &power * &fp.e;
    }
    PsdMatrix::from_result(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NEpsilon {
    /// First `n >= 1` with `(E^n)' P_inf^{-1} E^n <= (1 - eps) H P-hat_inf^{-1} H`.
    pub n: usize,
    /// Whether the inequality also holds for the next `PERSISTENCE_WINDOW` horizons.
    pub persists: bool,
}

fn validate_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1), got {epsilon}")))
    }
}

/// First horizon satisfying the `n_eps` dominance condition (linear scan).
pub fn compute_n_epsilon(fp: &FixedPointPair, epsilon: f64) -> Result<NEpsilon> {
    validate_epsilon(epsilon)?;
    let p_inv = fp.p_inf.inverse()?;
    let phat_inv = fp.phat_inf.inverse()?;
    let target = fp.h.as_matrix() * phat_inv.as_matrix() * fp.h.as_matrix() * (1.0 - epsilon);
    let holds = |en: &Matrix| {
        let lhs = en.transpose() * p_inv.as_matrix() * en;
        let cmp = loewner_compare(&lhs, &target);
        cmp.max_gap <= tol::PSD * cmp.scale
    };
    let mut en = fp.e.clone();
    for n in 1..=N_EPS_CAP {
        if holds(&en) {
            let mut ahead = &en * &fp.e;
            let mut persists = true;
            for _ in 0..PERSISTENCE_WINDOW {
                persists &= holds(&ahead);
                ahead = &ahead * &fp.e;
            }
            return Ok(NEpsilon { n, persists });
        }
        en = &en * &fp.e;
    }
    Err(Error::ScanExhausted { cap: N_EPS_CAP })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformBoundReport {
    pub epsilon: f64,
    pub n_epsilon: usize,
    pub m: usize,
    /// Horizon of the upper check, `max(m, n_eps)`.
    pub n: usize,
    /// `G_r <= Phi-hat_m(Q)`
    pub lower_ok: bool,
    /// `Phi-hat_n(Q) <= eps^{-1} P-hat_inf`
    pub upper_ok: bool,
    /// `lambda_min(Phi-hat_m(Q) - G_r)`
    pub lower_margin: f64,
    /// `lambda_min(eps^{-1} P-hat_inf - Phi-hat_n(Q))`, infinite for `eps = 0`.
    pub upper_margin: f64,
}

/// Checks `G_r <= Phi-hat_m(Q)` and `Phi-hat_n(Q) <= eps^{-1} P-hat_inf`
/// for `n = max(m, n_eps)`, directly at a PSD `Q`.
pub fn uniform_bounds(fp: &FixedPointPair, q: &PsdMatrix, epsilon: f64, m: usize) -> Result<UniformBoundReport> {
    require_horizon(fp, m)?;
    validate_epsilon(epsilon)?;
    let n_eps = compute_n_epsilon(fp, epsilon)?.n;
    let n = m.max(n_eps);
    let traj = phi_n_with(&fp.sys.dual(), q, n, Retention::Full)?;
    let g_r = limit_gramian(fp, fp.dim())?;

    let lower = loewner_compare(traj.states()[m].as_matrix(), g_r.as_matrix());
    let lower_ok = lower.ge();
    let (upper_ok, upper_margin) = if epsilon == 0.0 {
        (true, f64::INFINITY)
    } else {
        let cap = fp.phat_inf.as_matrix() / epsilon;
        let upper = loewner_compare(&cap, traj.states()[n].as_matrix());
        (upper.ge(), upper.min_gap)
    };
    if !(lower_ok && upper_ok) {
        return Err(Error::BoundViolation {
            lower_margin: lower.min_gap,
            upper_margin,
        });
    }
    Ok(UniformBoundReport {
        epsilon,
        n_epsilon: n_eps,
        m,
        n,
        lower_ok,
        upper_ok,
        lower_margin: lower.min_gap,
        upper_margin,
    })
}
