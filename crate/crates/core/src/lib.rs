//! Discrete-time Riccati difference equations: fixed points, directed
//! products, Gramians and the Floquet-type factorization of the flow.

mod compensated;
pub mod dare;
pub mod error;
pub mod floquet;
pub mod kernel;
pub mod random;
pub mod riccati;
pub mod system;
pub mod system_file;

pub use dare::{solve_fixed_point, FixedPointOptions, FixedPointPair};
pub use error::{Error, Result};
pub use kernel::{Matrix, PdMatrix, PsdMatrix, Residual, SymMatrix};
pub use riccati::{phi, phi_n, RiccatiTrajectory};
pub use system::{AssumptionCertificate, SystemTriple};
pub use system_file::SystemFile;
