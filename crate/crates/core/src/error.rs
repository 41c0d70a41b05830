use thiserror::Error;

/// Errors raised by the Riccati toolbox.
///
/// Several variants signal a broken standing assumption or a numerical
/// defect rather than bad user input (`SingularFactor` on PSD arguments,
/// `SingularL` for horizons `n >= r`, `IdentityViolation`, `BoundViolation`).
/// They carry the offending numbers so the failure can be diagnosed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e} > {bound:.3e})")]
    NotSymmetric { asymmetry: f64, bound: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eig:.6e}, bound {bound:.3e})")]
    NotPsd { min_eig: f64, bound: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eig:.6e}, bound {bound:.3e})")]
    NotPd { min_eig: f64, bound: f64 },

    #[error("singular factor in {context} (smallest pivot {pivot:.3e})")]
    SingularFactor { context: &'static str, pivot: f64 },

    #[error("overflow while forming matrix power {power}")]
    Overflow { power: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("system does not satisfy the rank conditions (controllability rank {ctrl_rank}, observability rank {obs_rank}, dim {dim})")]
    NotCertified {
        ctrl_rank: usize,
        obs_rank: usize,
        dim: usize,
    },

    #[error("fixed-point iteration did not converge in {iterations} iterations (last step {last_step:.3e})")]
    NoConvergence {
        iterations: usize,
        last_step: f64,
    },

    #[error("spectral radius certificate failed: rho = {rho:.12}")]
    SpectralCertificateFailure { rho: f64 },

    #[error("Lyapunov series diverges (term norm {term_norm:.3e} after {terms} terms)")]
    Divergence { terms: usize, term_norm: f64 },

    #[error("A is not invertible (smallest pivot {pivot:.3e}); negative fixed point unavailable")]
    SingularA { pivot: f64 },

    #[error("horizon n = {n} is below the required minimum {min}")]
    InvalidHorizon { n: usize, min: usize },

    #[error("L_n(P) is singular at n = {n} (smallest pivot {pivot:.3e})")]
    SingularL { n: usize, pivot: f64 },

    #[error("identity `{name}` violated: residual {residual:.3e} > bound {bound:.3e}")]
    IdentityViolation {
        name: &'static str,
        residual: f64,
        bound: f64,
    },

    #[error("no horizon satisfies the n_eps condition up to {cap}")]
    ScanExhausted { cap: usize },

    #[error("uniform bound violated (lower margin {lower_margin:.3e}, upper margin {upper_margin:.3e})")]
    BoundViolation {
        lower_margin: f64,
        upper_margin: f64,
    },

    #[error("could not generate a certified system after {attempts} attempts")]
    GenerationExhausted { attempts: usize },

    #[error("system file: {0}")]
    File(String),
}

pub type Result<T> = std::result::Result<T, Error>;
