//! Random certified systems and random PSD/PD test matrices.
//!
//! All draws go through a caller-supplied RNG so seeded runs are
//! reproducible.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::{spectral_norm, spectral_radius, symmetrized, Matrix, PdMatrix, PsdMatrix, SymMatrix};
use crate::system::{AssumptionCertificate, SystemTriple};

/// Default rejection cap for [`generate_system`].
pub const MAX_ATTEMPTS: usize = 1000;

/// Parameters of the random system generator.
///
/// `A` has i.i.d. standard normal entries, optionally rescaled to a target
/// spectral radius. `R = B B' + ridge_r I` with `B` of size `dim x rank_r`,
/// and likewise `S = C C' + ridge_s I`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub dim: usize,
    pub spectral_radius: Option<f64>,
    pub rank_r: usize,
    pub rank_s: usize,
    pub ridge_r: f64,
    pub ridge_s: f64,
    pub max_attempts: usize,
}

impl GeneratorConfig {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            spectral_radius: Some(1.1),
            rank_r: dim,
            rank_s: dim,
            ridge_r: 0.0,
            ridge_s: 0.0,
            max_attempts: MAX_ATTEMPTS,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dim must be at least 1".into()));
        }
        if self.rank_r > self.dim || self.rank_s > self.dim {
            return Err(Error::InvalidParameter(format!(
                "inner ranks ({}, {}) exceed dim {}",
                self.rank_r, self.rank_s, self.dim
            )));
        }
        if self.ridge_r < 0.0 || self.ridge_s < 0.0 {
            return Err(Error::InvalidParameter("ridges must be nonnegative".into()));
        }
        if let Some(rho) = self.spectral_radius {
            if !(rho.is_finite() && rho >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "spectral radius must be finite and nonnegative, got {rho}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedSystem {
    pub system: SystemTriple,
    pub attempts: usize,
    pub certificate: AssumptionCertificate,
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn gram_plus_ridge<R: Rng + ?Sized>(dim: usize, rank: usize, ridge: f64, rng: &mut R) -> Matrix {
    let b = gaussian_matrix(dim, rank, rng);
    symmetrized(&(&b * b.transpose() + Matrix::identity(dim, dim) * ridge))
}

/// Draws systems until both rank conditions hold, up to `max_attempts`.
pub fn generate_system<R: Rng + ?Sized>(cfg: &GeneratorConfig, rng: &mut R) -> Result<GeneratedSystem> {
    cfg.validate()?;
    let dim = cfg.dim;
    for attempt in 1..=cfg.max_attempts {
        let mut a = gaussian_matrix(dim, dim, rng);
        if let Some(target) = cfg.spectral_radius {
            let rho = spectral_radius(&a);
            if rho > 0.0 {
                a *= target / rho;
            }
        }
        let r = gram_plus_ridge(dim, cfg.rank_r, cfg.ridge_r, rng);
        let s = gram_plus_ridge(dim, cfg.rank_s, cfg.ridge_s, rng);
        let system = SystemTriple::from_matrices(a, r, s)?;
        let certificate = system.certify();
        if certificate.is_certified() {
            return Ok(GeneratedSystem {
                system,
                attempts: attempt,
                certificate,
            });
        }
    }
    Err(Error::GenerationExhausted {
        attempts: cfg.max_attempts,
    })
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let g = gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column signs so the distribution does not depend on QR conventions
    let signs = Matrix::from_diagonal(&r.diagonal().map(|d| if d < 0.0 { -1.0 } else { 1.0 }));
    q * signs
}

/// `Q diag(eigs) Q'` for a random orthogonal `Q`.
pub fn with_spectrum<R: Rng + ?Sized>(eigs: &[f64], rng: &mut R) -> Matrix {
    let q = random_orthogonal(eigs.len(), rng);
    let d = Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigs));
    symmetrized(&(&q * d * q.transpose()))
}

/// Random PD matrix with `||P|| = norm` and eigenvalues log-uniform in
/// `[norm * min_ratio, norm]`.
pub fn random_pd<R: Rng + ?Sized>(dim: usize, norm: f64, min_ratio: f64, rng: &mut R) -> PdMatrix {
    let ln_ratio = min_ratio.ln();
    let mut eigs: Vec<f64> = (0..dim)
        .map(|_| norm * (rng.random::<f64>() * ln_ratio).exp())
        .collect();
    eigs[0] = norm;
    PdMatrix::new(with_spectrum(&eigs, rng)).expect("spectrum is positive")
}

/// Random PSD matrix `L L'` with `L` of size `dim x rank`, rescaled so that
/// `||P|| = norm` (zero when `rank = 0` or `norm = 0`).
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rank: usize, norm: f64, rng: &mut R) -> PsdMatrix {
    if rank == 0 || norm == 0.0 {
        return PsdMatrix::zeros(dim);
    }
    let l = gaussian_matrix(dim, rank, rng);
    let g = &l * l.transpose();
    let scale = norm / spectral_norm(&g);
    let g = g * scale;
    PsdMatrix::from_result(g).expect("Gram matrix is PSD")
}

/// Random symmetric matrix with unit spectral norm.
pub fn random_unit_symmetric<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SymMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    let h = symmetrized(&(&g + g.transpose()));
    let n = spectral_norm(&h);
    SymMatrix::symmetrize(h / n).expect("finite")
}
