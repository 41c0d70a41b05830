//! The model triple `(A, R, S)`, its rank certificates, and the dual triple.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    self, ensure_finite, ensure_same_dim, ensure_square, principal_sqrt, Matrix, PsdMatrix,
    SymMatrix,
};

/// The triple `(A, R, S)` with cached symmetric square roots of `R` and `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemTriple {
    a: Matrix,
    r: PsdMatrix,
    s: PsdMatrix,
    sqrt_r: SymMatrix,
    sqrt_s: SymMatrix,
}

impl SystemTriple {
    pub fn new(a: Matrix, r: PsdMatrix, s: PsdMatrix) -> Result<Self> {
        ensure_square(&a, "A")?;
        ensure_finite(&a)?;
        ensure_same_dim(&a, &r, "A vs R")?;
        ensure_same_dim(&a, &s, "A vs S")?;
        let sqrt_r = principal_sqrt(&r);
        let sqrt_s = principal_sqrt(&s);
        Ok(Self {
            a,
            r,
            s,
            sqrt_r,
            sqrt_s,
        })
    }

    /// Builds a triple from raw matrices, certifying `R` and `S` as PSD.
    pub fn from_matrices(a: Matrix, r: Matrix, s: Matrix) -> Result<Self> {
        Self::new(a, PsdMatrix::new(r)?, PsdMatrix::new(s)?)
    }

    /// The scalar system `(a, r, s)`.
    pub fn scalar(a: f64, r: f64, s: f64) -> Result<Self> {
        Self::from_matrices(
            Matrix::from_element(1, 1, a),
            Matrix::from_element(1, 1, r),
            Matrix::from_element(1, 1, s),
        )
    }

    /// `(A, R, S) = (1, 1, 1)`, whose fixed point is the golden ratio.
    pub fn golden() -> Self {
        Self::scalar(1.0, 1.0, 1.0).expect("golden system is valid")
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn r(&self) -> &PsdMatrix {
        &self.r
    }

    pub fn s(&self) -> &PsdMatrix {
        &self.s
    }

    pub fn sqrt_r(&self) -> &SymMatrix {
        &self.sqrt_r
    }

    pub fn sqrt_s(&self) -> &SymMatrix {
        &self.sqrt_s
    }

    /// `(A', S, R)`. Involutive: `sys.dual().dual() == sys`.
    pub fn dual(&self) -> Self {
        Self {
            a: self.a.transpose(),
            r: self.s.clone(),
            s: self.r.clone(),
            sqrt_r: self.sqrt_s.clone(),
            sqrt_s: self.sqrt_r.clone(),
        }
    }

    pub fn certify(&self) -> AssumptionCertificate {
        let ctrl_rank = controllability_rank(self);
        let obs_rank = observability_rank(self);
        let dim = self.dim();
        AssumptionCertificate {
            dim,
            controllable: ctrl_rank == dim,
            observable: obs_rank == dim,
            ctrl_rank,
            obs_rank,
            reach_pd_min_eig: check_reach_pd(self),
        }
    }

    /// Fails with `NotCertified` unless both rank conditions hold.
    pub fn require_certified(&self) -> Result<AssumptionCertificate> {
        let cert = self.certify();
        if cert.is_certified() {
            Ok(cert)
        } else {
            Err(Error::NotCertified {
                ctrl_rank: cert.ctrl_rank,
                obs_rank: cert.obs_rank,
                dim: cert.dim,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCertificate {
    pub dim: usize,
    pub controllable: bool,
    pub observable: bool,
    pub ctrl_rank: usize,
    pub obs_rank: usize,
    /// `lambda_min(A A' + R)`.
    pub reach_pd_min_eig: f64,
}

impl AssumptionCertificate {
    pub fn is_certified(&self) -> bool {
        self.controllable && self.observable
    }
}

/// Numerical rank: singular values above `tol::RANK * sigma_max`.
pub fn numerical_rank(m: &Matrix) -> usize {
    let sv = m.singular_values();
    let top = sv.max();
    if top <= 0.0 || !top.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > kernel::tol::RANK * top).count()
}

/// `[B, A B, ..., A^{r-1} B]`.
pub fn krylov_block(a: &Matrix, b: &Matrix) -> Matrix {
    let r = a.nrows();
    let k = b.ncols();
    let mut out = Matrix::zeros(r, r * k);
    let mut block = b.clone();
    for i in 0..r {
        out.view_mut((0, i * k), (r, k)).copy_from(&block);
        block = a * block;
    }
    out
}

/// Rank of `[R^{1/2}, A R^{1/2}, ..., A^{r-1} R^{1/2}]`.
pub fn controllability_rank(sys: &SystemTriple) -> usize {
    numerical_rank(&krylov_block(sys.a(), sys.sqrt_r()))
}

/// Rank of the stacked observability matrix of `(A, S^{1/2})`, computed as
/// the controllability rank of the dual triple.
pub fn observability_rank(sys: &SystemTriple) -> usize {
    controllability_rank(&sys.dual())
}

/// Popov-Belevitch-Hautus test: `(E, S^{1/2})` is observable iff
/// `[E - lambda I; S^{1/2}]` has full column rank for every eigenvalue
/// `lambda` of `E`.
pub fn pbh_observability(e: &Matrix, sqrt_s: &Matrix) -> bool {
    let r = e.nrows();
    if r == 0 || sqrt_s.ncols() != r {
        return false;
    }
    let p = sqrt_s.nrows();
    for lambda in kernel::eigenvalues(e) {
        let mut stacked = DMatrix::<Complex<f64>>::zeros(r + p, r);
        for i in 0..r {
            for j in 0..r {
                let diag = if i == j { lambda } else { Complex::new(0.0, 0.0) };
                stacked[(i, j)] = Complex::new(e[(i, j)], 0.0) - diag;
            }
        }
        for i in 0..p {
            for j in 0..r {
                stacked[(r + i, j)] = Complex::new(sqrt_s[(i, j)], 0.0);
            }
        }
        let sv = stacked.singular_values();
        let top = sv.max();
        let rank = if top > 0.0 {
            sv.iter().filter(|&&s| s > kernel::tol::RANK * top).count()
        } else {
            0
        };
        if rank < r {
            return false;
        }
    }
    true
}

/// `lambda_min(A A' + R)`; strictly positive whenever `(A, R^{1/2})` is
/// controllable.
pub fn check_reach_pd(sys: &SystemTriple) -> f64 {
    let m = sys.a() * sys.a().transpose() + sys.r().as_matrix();
    SymMatrix::symmetrize(m)
        .map(|s| s.min_eigenvalue())
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::from_rows;

    fn mat(rows: &[&[f64]]) -> Matrix {
        from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sys(a: Matrix, r: Matrix, s: Matrix) -> SystemTriple {
        SystemTriple::from_matrices(a, r, s).unwrap()
    }

    fn shear() -> Matrix {
        mat(&[&[1.0, 1.0], &[0.0, 1.0]])
    }

    #[test]
    fn controllability_examples() {
        let i2 = Matrix::identity(2, 2);
        assert_eq!(controllability_rank(&sys(i2.clone(), i2.clone(), i2.clone())), 2);

        let s = sys(shear(), mat(&[&[1.0, 0.0], &[0.0, 0.0]]), i2.clone());
        // [R^{1/2}, A R^{1/2}] = [[1,0,1,0],[0,0,0,0]]
        let block = krylov_block(s.a(), s.sqrt_r());
        assert_eq!(block, mat(&[&[1.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 0.0]]));
        assert_eq!(controllability_rank(&s), 1);

        // columns (0,1)' and (1,1)'
        let s = sys(shear(), mat(&[&[0.0, 0.0], &[0.0, 1.0]]), i2);
        assert_eq!(controllability_rank(&s), 2);
    }

    #[test]
    fn observability_examples() {
        let i2 = Matrix::identity(2, 2);
        assert_eq!(observability_rank(&sys(i2.clone(), i2.clone(), i2.clone())), 2);
        // rows (0,1) and (0,1)
        let s = sys(shear(), i2.clone(), mat(&[&[0.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(observability_rank(&s), 1);
        // rows (1,0) and (1,1)
        let s = sys(shear(), i2, mat(&[&[1.0, 0.0], &[0.0, 0.0]]));
        assert_eq!(observability_rank(&s), 2);
    }

    #[test]
    fn pbh_examples() {
        assert!(pbh_observability(&Matrix::zeros(2, 2), &Matrix::identity(2, 2)));
        // lambda = 1 with kernel vector e2 annihilated by S^{1/2}
        assert!(!pbh_observability(
            &Matrix::identity(2, 2),
            &mat(&[&[1.0, 0.0], &[0.0, 0.0]])
        ));
        assert!(pbh_observability(&mat(&[&[0.3819660113]]), &mat(&[&[1.0]])));
    }

    #[test]
    fn pbh_complex_spectrum() {
        // rotation with a full-rank output row passes; zero output fails
        let rot = mat(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(pbh_observability(&rot, &mat(&[&[1.0, 0.0]])));
        assert!(!pbh_observability(&rot, &mat(&[&[0.0, 0.0]])));
    }

    #[test]
    fn reach_pd_examples() {
        let z = Matrix::zeros(2, 2);
        let i2 = Matrix::identity(2, 2);
        assert_eq!(check_reach_pd(&sys(i2.clone(), z.clone(), i2.clone())), 1.0);
        assert_eq!(check_reach_pd(&sys(z, i2.clone(), i2.clone())), 1.0);
        let s = sys(
            mat(&[&[0.0, 1.0], &[0.0, 0.0]]),
            mat(&[&[0.0, 0.0], &[0.0, 1.0]]),
            i2,
        );
        assert!((check_reach_pd(&s) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dual_examples() {
        let i2 = Matrix::identity(2, 2);
        let r = mat(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let s = mat(&[&[1.0, 0.5], &[0.5, 1.0]]);
        let t = sys(i2.clone(), r.clone(), s.clone());
        let d = t.dual();
        assert_eq!(d.a(), &i2);
        assert_eq!(d.r().as_matrix(), &s);
        assert_eq!(d.s().as_matrix(), &r);
        assert_eq!(d.dual(), t);

        let g = SystemTriple::golden();
        assert_eq!(g.dual(), g);

        let t = sys(shear(), r, s);
        assert_eq!(t.dual().a(), &mat(&[&[1.0, 0.0], &[1.0, 1.0]]));
    }

    #[test]
    fn certificate_flags() {
        let c = SystemTriple::golden().certify();
        assert!(c.is_certified());
        assert_eq!((c.ctrl_rank, c.obs_rank), (1, 1));

        let t = sys(Matrix::identity(2, 2), Matrix::zeros(2, 2), Matrix::identity(2, 2));
        let c = t.certify();
        assert!(!c.controllable && c.observable);
        assert_eq!(c.ctrl_rank, 0);
        assert!(matches!(t.require_certified(), Err(Error::NotCertified { .. })));
    }

    #[test]
    fn mismatched_dims_rejected() {
        let err = SystemTriple::from_matrices(
            Matrix::identity(2, 2),
            Matrix::identity(3, 3),
            Matrix::identity(2, 2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }
}
