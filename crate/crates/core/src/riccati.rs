//! Riccati maps and their semigroups.
//!
//! For a triple `(A, R, S)` and PSD `P`:
//!
//! ```text
//! Phi(P) = A (I + P S)^{-1} P A' + R
//! E(P)   = A (I + P S)^{-1}
//! F(P)   = S (I + P S)^{-1} = S^{1/2} (I + S^{1/2} P S^{1/2})^{-1} S^{1/2}
//! ```
//!
//! The trajectory `P_k = Phi_k(P_0)` is computed together with the directed
//! products `E_k(P_0) = E(P_{k-1}) ... E(P_0)` and the Gramians
//! `G_k(P_0) = sum_{j<k} E_j(P_0)' F(P_j) E_j(P_0)` in one forward sweep.

use serde::Serialize;

use crate::compensated::Sweep;
use crate::error::{Error, Result};
use crate::kernel::{
    ensure_same_dim, lu_solve, principal_sqrt, scale_of, spectral_norm, Matrix, PdMatrix,
    PsdMatrix, Residual, SymMatrix,
};
use crate::system::SystemTriple;

/// Relative residual bound for the algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-9;

fn check_dim(sys: &SystemTriple, p: &Matrix) -> Result<()> {
    ensure_same_dim(sys.a(), p, "system vs argument")
}

/// `E(P)`, `Phi(P)` (unsymmetrized) and `F(P)` from one Cholesky
/// factorization of `M = I + S^{1/2} P S^{1/2}`, using
/// `(I + P S)^{-1} = I - P S^{1/2} M^{-1} S^{1/2}`.
///
/// `M >= I` is always well conditioned, unlike `I + P S` when `||P||` is
/// large and `S` is singular, where an LU solve loses several digits.
fn step_maps(sys: &SystemTriple, p: &PsdMatrix) -> Result<(Matrix, Matrix, Matrix)> {
    check_dim(sys, p)?;
    let r = sys.dim();
    let root = sys.sqrt_s().as_matrix();
    let pm = p.as_matrix();
    let ps = pm * root;
    let inner = Matrix::identity(r, r) + root * &ps;
    let chol = SymMatrix::symmetrize(inner)?
        .into_matrix()
        .cholesky()
        .ok_or(Error::SingularFactor {
            context: "I + S^{1/2} P S^{1/2}",
            pivot: 0.0,
        })?;
    let k = chol.solve(root);
    let e = sys.a() - sys.a() * &ps * &k;
    let filtered = pm - &ps * chol.solve(&ps.transpose());
    let phi = sys.a() * filtered * sys.a().transpose() + sys.r().as_matrix();
    let f = root * k;
    Ok((e, phi, f))
}

/// `Phi(P)` before re-symmetrization.
pub fn phi_raw(sys: &SystemTriple, p: &PsdMatrix) -> Result<Matrix> {
    step_maps(sys, p).map(|(_, phi, _)| phi)
}

/// `Phi(P) = A (I + P S)^{-1} P A' + R`, symmetrized and PSD-certified.
pub fn phi(sys: &SystemTriple, p: &PsdMatrix) -> Result<PsdMatrix> {
    PsdMatrix::from_result(phi_raw(sys, p)?)
}

/// `Phi-hat(P)`, the Riccati map of the dual triple `(A', S, R)`.
pub fn phi_hat(sys: &SystemTriple, p: &PsdMatrix) -> Result<PsdMatrix> {
    phi(&sys.dual(), p)
}

/// `Phi_n(P)` without the product and Gramian bookkeeping.
pub fn phi_iterate(sys: &SystemTriple, p: &PsdMatrix, n: usize) -> Result<PsdMatrix> {
    let mut current = p.clone();
    for _ in 0..n {
        current = phi(sys, &current)?;
    }
    Ok(current)
}

/// `E(P) = A (I + P S)^{-1}`.
pub fn map_e(sys: &SystemTriple, p: &PsdMatrix) -> Result<Matrix> {
    step_maps(sys, p).map(|(e, _, _)| e)
}

/// `F(P)` in the symmetric form `S^{1/2} (I + S^{1/2} P S^{1/2})^{-1} S^{1/2}`.
pub fn map_f(sys: &SystemTriple, p: &PsdMatrix) -> Result<PsdMatrix> {
    PsdMatrix::from_result(step_maps(sys, p)?.2)
}

/// `F(P)` in the product form `S (I + P S)^{-1}`.
pub fn map_f_product(sys: &SystemTriple, p: &PsdMatrix) -> Result<Matrix> {
    check_dim(sys, p)?;
    let r = sys.dim();
    let i_sp = Matrix::identity(r, r) + sys.s().as_matrix() * p.as_matrix();
    // S (I + P S)^{-1} = ((I + S P)^{-1} S)'
    Ok(lu_solve(&i_sp, sys.s(), "I + S P")?.transpose())
}

/// Whether a trajectory keeps every step or only the last one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retention {
    #[default]
    Full,
    FinalOnly,
}

/// `P_k = Phi_k(P_0)` with `E_k(P_0)` and `G_k(P_0)`, for `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct RiccatiTrajectory {
    sys: SystemTriple,
    initial: PsdMatrix,
    steps: usize,
    retention: Retention,
    states: Vec<PsdMatrix>,
    products: Vec<Matrix>,
    gramians: Vec<PsdMatrix>,
}

impl RiccatiTrajectory {
    pub fn system(&self) -> &SystemTriple {
        &self.sys
    }

    pub fn initial(&self) -> &PsdMatrix {
        &self.initial
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn retention(&self) -> Retention {
        self.retention
    }

    /// `P_0 ..= P_n` (only `P_n` under `FinalOnly`).
    pub fn states(&self) -> &[PsdMatrix] {
        &self.states
    }

    /// `E_0(P_0) ..= E_n(P_0)` (only the last under `FinalOnly`).
    pub fn products(&self) -> &[Matrix] {
        &self.products
    }

    /// `G_0(P_0) ..= G_n(P_0)` (only the last under `FinalOnly`).
    pub fn gramians(&self) -> &[PsdMatrix] {
        &self.gramians
    }

    pub fn final_state(&self) -> &PsdMatrix {
        self.states.last().expect("trajectory is non-empty")
    }

    pub fn final_product(&self) -> &Matrix {
        self.products.last().expect("trajectory is non-empty")
    }

    pub fn final_gramian(&self) -> &PsdMatrix {
        self.gramians.last().expect("trajectory is non-empty")
    }
}

/// Full trajectory of `n` steps from `P_0`.
pub fn phi_n(sys: &SystemTriple, p0: &PsdMatrix, n: usize) -> Result<RiccatiTrajectory> {
    phi_n_with(sys, p0, n, Retention::Full)
}

pub fn phi_n_with(
    sys: &SystemTriple,
    p0: &PsdMatrix,
    n: usize,
    retention: Retention,
) -> Result<RiccatiTrajectory> {
    phi_n_opts(sys, p0, n, SweepOptions { retention, ..Default::default() })
}

/// Arithmetic used by the forward sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// Plain `f64`, one Cholesky solve per step.
    Double,
    /// Double-double accumulation, rounded to `f64` per stored entry.
    #[default]
    Compensated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    pub retention: Retention,
    pub precision: Precision,
}

pub fn phi_n_opts(
    sys: &SystemTriple,
    p0: &PsdMatrix,
    n: usize,
    opts: SweepOptions,
) -> Result<RiccatiTrajectory> {
    check_dim(sys, p0)?;
    let r = sys.dim();
    let keep = opts.retention == Retention::Full;
    let cap = if keep { n + 1 } else { 1 };
    let mut states = Vec::with_capacity(cap);
    let mut products = Vec::with_capacity(cap);
    let mut gramians = Vec::with_capacity(cap);
    let mut push = |state: PsdMatrix, product: Matrix, gramian: PsdMatrix| {
        if !keep {
            states.clear();
            products.clear();
            gramians.clear();
        }
        states.push(state);
        products.push(product);
        gramians.push(gramian);
    };
    push(p0.clone(), Matrix::identity(r, r), PsdMatrix::zeros(r));

    match opts.precision {
        Precision::Double => {
            let mut state = p0.clone();
            let mut product = Matrix::identity(r, r);
            let mut gramian = PsdMatrix::zeros(r);
            for _ in 0..n {
                let (e, next, f) = step_maps(sys, &state)?;
                gramian = PsdMatrix::from_result(
                    gramian.as_matrix() + product.transpose() * f * &product,
                )?;
                product = &e * &product;
                state = PsdMatrix::from_result(next)?;
                push(state.clone(), product.clone(), gramian.clone());
            }
        }
        Precision::Compensated => {
            let mut sweep = Sweep::new(sys.a(), sys.r().as_matrix(), sys.s().as_matrix(), p0.as_matrix());
            for _ in 0..n {
                sweep.step()?;
                push(
                    PsdMatrix::from_result(sweep.state())?,
                    sweep.product(),
                    PsdMatrix::from_result(sweep.gramian())?,
                );
            }
        }
    }
    Ok(RiccatiTrajectory {
        sys: sys.clone(),
        initial: p0.clone(),
        steps: n,
        retention: opts.retention,
        states,
        products,
        gramians,
    })
}

/// `G_n(P)` from the nested recursion `G_n(P) = F(P) + E(P)' G_{n-1}(Phi(P)) E(P)`,
/// unrolled backwards along `P_0, ..., P_{n-1}`. Independent of the forward
/// sum used by [`phi_n`].
pub fn gramian_by_recursion(sys: &SystemTriple, p: &PsdMatrix, n: usize) -> Result<PsdMatrix> {
    let mut states = Vec::with_capacity(n);
    let mut current = p.clone();
    for _ in 0..n {
        let next = phi(sys, &current)?;
        states.push(std::mem::replace(&mut current, next));
    }
    let mut acc = Matrix::zeros(sys.dim(), sys.dim());
    for state in states.iter().rev() {
        let (e, _, f) = step_maps(sys, state)?;
        acc = f + e.transpose() * acc * e;
    }
    PsdMatrix::from_result(acc)
}

/// `alpha_-(P) = (1 + lambda_max(P) lambda_max(S))^{-1}` and
/// `alpha_+(P) = (1 + lambda_min(P) lambda_min(S))^{-1}`, so that
/// `alpha_- S <= F(P) <= alpha_+ S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaBounds {
    pub alpha_minus: f64,
    pub alpha_plus: f64,
}

pub fn alpha_bounds(sys: &SystemTriple, p: &PsdMatrix) -> AlphaBounds {
    let p_max = p.max_eigenvalue().max(0.0);
    let p_min = p.min_eigenvalue().max(0.0);
    let s_max = sys.s().max_eigenvalue().max(0.0);
    let s_min = sys.s().min_eigenvalue().max(0.0);
    AlphaBounds {
        alpha_minus: 1.0 / (1.0 + p_max * s_max),
        alpha_plus: 1.0 / (1.0 + p_min * s_min),
    }
}

/// `(P + Q^{-1})^{-1}` evaluated as `Q^{1/2} (I + Q^{1/2} P Q^{1/2})^{-1} Q^{1/2}`,
/// which stays well defined for PSD `Q`.
pub fn parallel_add_psd(p: &PsdMatrix, q: &PsdMatrix) -> Result<PsdMatrix> {
    ensure_same_dim(p, q, "parallel addition")?;
    let r = p.dim();
    let root = principal_sqrt(q);
    let inner = Matrix::identity(r, r) + root.as_matrix() * p.as_matrix() * root.as_matrix();
    let chol = SymMatrix::symmetrize(inner)?
        .into_matrix()
        .cholesky()
        .ok_or(Error::SingularFactor {
            context: "I + Q^{1/2} P Q^{1/2}",
            pivot: 0.0,
        })?;
    PsdMatrix::from_result(root.as_matrix() * chol.solve(root.as_matrix()))
}

/// Parallel addition `H(P, Q) = (P + Q^{-1})^{-1}` of two PD matrices.
pub fn parallel_add(p: &PdMatrix, q: &PdMatrix) -> Result<PdMatrix> {
    PdMatrix::from_psd(parallel_add_psd(p.as_psd(), q.as_psd())?)
}

/// `grad Phi_n(P) . H = E_n(P) H E_n(P)'`.
pub fn frechet_apply(sys: &SystemTriple, p: &PsdMatrix, h: &SymMatrix, n: usize) -> Result<SymMatrix> {
    check_dim(sys, h)?;
    let traj = phi_n_with(sys, p, n, Retention::FinalOnly)?;
    let e = traj.final_product();
    SymMatrix::symmetrize(e * h.as_matrix() * e.transpose())
}

/// Residuals of the transport identities between two arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `E(Q) - E(P) (I + (P - Q) F(Q))`
    pub transport: Residual,
    /// `Phi_n(P) - Phi_n(Q) - E_n(P) (P - Q) E_n(Q)'`
    pub semigroup_difference: Residual,
    /// `E_n(Q) - E_n(P) (I + (P - Q) G_n(Q))`
    pub transport_n: Residual,
}

impl IdentityReport {
    pub fn max_relative(&self) -> f64 {
        [self.transport, self.semigroup_difference, self.transport_n]
            .iter()
            .map(Residual::relative)
            .fold(0.0, f64::max)
    }
}

/// Evaluates the three transport identities and fails with
/// `IdentityViolation` if any residual exceeds `IDENTITY_TOL * scale`.
pub fn verify_identities(
    sys: &SystemTriple,
    p: &PsdMatrix,
    q: &PsdMatrix,
    n: usize,
) -> Result<IdentityReport> {
    if n == 0 {
        return Err(Error::InvalidHorizon { n, min: 1 });
    }
    check_dim(sys, p)?;
    check_dim(sys, q)?;
    let r = sys.dim();
    let id = Matrix::identity(r, r);
    let diff = p.as_matrix() - q.as_matrix();

    let e_p = map_e(sys, p)?;
    let e_q = map_e(sys, q)?;
    let f_q = map_f(sys, q)?;
    let factor = &id + &diff * f_q.as_matrix();
    let transport = Residual::new(
        spectral_norm(&(&e_q - &e_p * &factor)),
        scale_of(&[&e_q]).max(spectral_norm(&e_p) * spectral_norm(&factor)),
    );

    let tp = phi_n_with(sys, p, n, Retention::FinalOnly)?;
    let tq = phi_n_with(sys, q, n, Retention::FinalOnly)?;
    let (phi_p, phi_q) = (tp.final_state().as_matrix(), tq.final_state().as_matrix());
    let (en_p, en_q) = (tp.final_product(), tq.final_product());
    let cross = en_p * &diff * en_q.transpose();
    let semigroup_difference = Residual::new(
        spectral_norm(&(phi_p - phi_q - &cross)),
        scale_of(&[phi_p, phi_q])
            .max(spectral_norm(en_p) * spectral_norm(&diff) * spectral_norm(en_q)),
    );

    let factor_n = &id + &diff * tq.final_gramian().as_matrix();
    let transport_n = Residual::new(
        spectral_norm(&(en_q - en_p * &factor_n)),
        scale_of(&[en_q]).max(spectral_norm(en_p) * spectral_norm(&factor_n)),
    );

    let report = IdentityReport {
        transport,
        semigroup_difference,
        transport_n,
    };
    for (name, res) in [
        ("E(Q) = E(P)(I + (P-Q)F(Q))", transport),
        ("Phi_n(P) - Phi_n(Q) = E_n(P)(P-Q)E_n(Q)'", semigroup_difference),
        ("E_n(Q) = E_n(P)(I + (P-Q)G_n(Q))", transport_n),
    ] {
        if !res.within(IDENTITY_TOL) {
            return Err(Error::IdentityViolation {
                name,
                residual: res.value,
                bound: IDENTITY_TOL * res.scale,
            });
        }
    }
    Ok(report)
}
