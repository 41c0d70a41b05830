//! Dense symmetric-matrix algebra.
//!
//! Everything downstream works on small dense `r x r` real matrices. This
//! module provides the certified matrix classes (symmetric, positive
//! semi-definite, positive definite), the Loewner order, principal square
//! roots, LU-based solves, the Sherman-Morrison-Woodbury inverse, and
//! spectral quantities (spectral norm, spectral radius, Gelfand estimates).
//!
//! All norms are spectral norms `||M|| = sqrt(lambda_max(M M'))`. Tolerances
//! are relative to `max(1, ||M||)`.

use std::ops::Deref;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Default tolerance constants.
pub mod tol {
    /// Relative asymmetry accepted on input to a symmetric constructor.
    pub const SYM: f64 = 1e-12;
    /// Relative negative eigenvalue accepted for PSD certification.
    pub const PSD: f64 = 1e-10;
    /// Relative positive margin required for PD certification.
    pub const PD: f64 = 1e-12;
    /// Singular values below `RANK * sigma_max` count as zero.
    pub const RANK: f64 = 1e-10;
    /// LU pivots below `PIVOT * max(1, ||M||)` are treated as singular.
    pub const PIVOT: f64 = 1e-14;
}

/// Tolerances used by the certified constructors and the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub sym: f64,
    pub psd: f64,
    pub pd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sym: tol::SYM,
            psd: tol::PSD,
            pd: tol::PD,
        }
    }
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// `max(1, ||m_1||, ..., ||m_k||)`.
pub fn scale_of(ms: &[&Matrix]) -> f64 {
    ms.iter().map(|m| spectral_norm(m)).fold(1.0, f64::max)
}

pub(crate) fn ensure_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() == m.ncols() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub(crate) fn ensure_same_dim(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what}: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )))
    }
}

/// Builds a matrix from row-major nested rows.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged rows".into()));
    }
    let m = Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    ensure_finite(&m)?;
    Ok(m)
}

/// Row-major nested rows of `m`.
pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// `(m + m') / 2`; exactly symmetric in floating point.
pub fn symmetrized(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Spectral norm of `m - m'`.
pub fn asymmetry(m: &Matrix) -> f64 {
    spectral_norm(&(m - m.transpose()))
}

/// A symmetric matrix. Constructors re-symmetrize their input.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Checks `||m - m'|| <= symTol * max(1, ||m||)` and symmetrizes.
    pub fn new(m: Matrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: Matrix, tols: &Tolerances) -> Result<Self> {
        ensure_square(&m, "symmetric matrix")?;
        ensure_finite(&m)?;
        let asym = asymmetry(&m);
        let bound = tols.sym * spectral_norm(&m).max(1.0);
        if asym > bound {
            return Err(Error::NotSymmetric {
                asymmetry: asym,
                bound,
            });
        }
        Ok(Self(symmetrized(&m)))
    }

    /// Symmetrizes without an asymmetry check. For results that are
    /// symmetric in exact arithmetic.
    pub fn symmetrize(m: Matrix) -> Result<Self> {
        ensure_square(&m, "symmetric matrix")?;
        ensure_finite(&m)?;
        Ok(Self(symmetrized(&m)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Matrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            diag,
        )))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigen(&self) -> (Vec<f64>, Matrix) {
        let eig = SymmetricEigen::new(self.0.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = Matrix::from_fn(self.dim(), self.dim(), |i, j| {
            eig.eigenvectors[(i, order[j])]
        });
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_max_eig(&self.0).0
    }

    pub fn max_eigenvalue(&self) -> f64 {
        min_max_eig(&self.0).1
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl Deref for SymMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

fn min_max_eig(m: &Matrix) -> (f64, f64) {
    let vals = SymmetricEigen::new(m.clone()).eigenvalues;
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// A certified positive semi-definite matrix with cached `lambda_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMatrix {
    sym: SymMatrix,
    min_eig: f64,
}

impl PsdMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        Self::from_sym(SymMatrix::new(m)?)
    }

    /// Certifies `lambda_min >= -psdTol * max(1, ||M||)`. Eigenvalues in
    /// `[-psdTol * scale, 0)` are clamped to zero.
    pub fn from_sym(sym: SymMatrix) -> Result<Self> {
        Self::from_sym_with(sym, &Tolerances::default())
    }

    pub fn from_sym_with(sym: SymMatrix, tols: &Tolerances) -> Result<Self> {
        let (values, vectors) = sym.eigen();
        let lo = values[0];
        let hi = values[values.len() - 1];
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let bound = tols.psd * scale;
        if lo < -bound {
            return Err(Error::NotPsd { min_eig: lo, bound });
        }
        if lo >= 0.0 {
            return Ok(Self { sym, min_eig: lo });
        }
        let clamped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
        let d = Matrix::from_diagonal(&nalgebra::DVector::from_vec(clamped));
        let rebuilt = &vectors * d * vectors.transpose();
        Ok(Self {
            sym: SymMatrix(symmetrized(&rebuilt)),
            min_eig: 0.0,
        })
    }

    /// Symmetrizes a result that is PSD in exact arithmetic, then certifies.
    pub fn from_result(m: Matrix) -> Result<Self> {
        Self::from_sym(SymMatrix::symmetrize(m)?)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            sym: SymMatrix::zeros(dim),
            min_eig: 0.0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            sym: SymMatrix::identity(dim),
            min_eig: 1.0,
        }
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Result<Self> {
        Self::new(Matrix::identity(dim, dim) * c)
    }

    pub fn dim(&self) -> usize {
        self.sym.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.sym.max_eigenvalue()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.sym
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.sym.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.sym.0
    }
}

impl Deref for PsdMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.sym.0
    }
}

impl From<PdMatrix> for PsdMatrix {
    fn from(p: PdMatrix) -> Self {
        p.0
    }
}

/// A certified positive definite matrix:
/// `lambda_min > pdTol * max(1, ||M||)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdMatrix(PsdMatrix);

impl PdMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        Self::from_psd(PsdMatrix::new(m)?)
    }

    pub fn from_psd(p: PsdMatrix) -> Result<Self> {
        Self::from_psd_with(p, &Tolerances::default())
    }

    pub fn from_psd_with(p: PsdMatrix, tols: &Tolerances) -> Result<Self> {
        let bound = tols.pd * p.max_eigenvalue().max(1.0);
        if p.min_eig > bound {
            Ok(Self(p))
        } else {
            Err(Error::NotPd {
                min_eig: p.min_eig,
                bound,
            })
        }
    }

    pub fn from_result(m: Matrix) -> Result<Self> {
        Self::from_psd(PsdMatrix::from_result(m)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self(PsdMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.min_eig
    }

    pub fn as_psd(&self) -> &PsdMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &Matrix {
        self.0.as_matrix()
    }

    /// Inverse via Cholesky, returned as a certified PD matrix.
    pub fn inverse(&self) -> Result<PdMatrix> {
        let chol = self
            .as_matrix()
            .clone()
            .cholesky()
            .ok_or(Error::SingularFactor {
                context: "Cholesky inverse",
                pivot: self.min_eigenvalue(),
            })?;
        PdMatrix::from_result(chol.inverse())
    }
}

impl Deref for PdMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        self.0.as_matrix()
    }
}

fn checked_lu(a: &Matrix, context: &'static str) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    ensure_square(a, context)?;
    ensure_finite(a)?;
    let lu = a.clone().lu();
    let pivot = lu
        .u()
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |acc, x| acc.min(x.abs()));
    if pivot <= tol::PIVOT * spectral_norm(a).max(1.0) {
        return Err(Error::SingularFactor { context, pivot });
    }
    Ok(lu)
}

/// Smallest absolute pivot of the partial-pivoting LU factorization.
pub fn min_lu_pivot(a: &Matrix) -> f64 {
    a.clone()
        .lu()
        .u()
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |acc, x| acc.min(x.abs()))
}

/// Solves `a x = b` with LU and partial pivoting.
pub fn lu_solve(a: &Matrix, b: &Matrix, context: &'static str) -> Result<Matrix> {
    let lu = checked_lu(a, context)?;
    lu.solve(b).ok_or(Error::SingularFactor { context, pivot: 0.0 })
}

/// Inverse via LU with partial pivoting.
pub fn lu_inverse(a: &Matrix, context: &'static str) -> Result<Matrix> {
    let lu = checked_lu(a, context)?;
    lu.try_inverse()
        .ok_or(Error::SingularFactor { context, pivot: 0.0 })
}

/// `(M + U N V)^{-1}` through the Sherman-Morrison-Woodbury identity
/// `M^{-1} - M^{-1} U (N^{-1} + V M^{-1} U)^{-1} V M^{-1}`.
///
/// `M` is `r x r`, `N` is `k x k`, `U` is `r x k` and `V` is `k x r`.
pub fn smw_inverse(m: &Matrix, n: &Matrix, u: &Matrix, v: &Matrix) -> Result<Matrix> {
    let r = m.nrows();
    let k = n.nrows();
    if u.shape() != (r, k) || v.shape() != (k, r) {
        return Err(Error::DimensionMismatch(format!(
            "SMW: M {}x{}, N {}x{}, U {}x{}, V {}x{}",
            m.nrows(),
            m.ncols(),
            n.nrows(),
            n.ncols(),
            u.nrows(),
            u.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    let m_inv = lu_inverse(m, "SMW: M")?;
    let n_inv = lu_inverse(n, "SMW: N")?;
    let m_inv_u = &m_inv * u;
    let v_m_inv = v * &m_inv;
    let capacitance = n_inv + v * &m_inv_u;
    let inner = lu_solve(&capacitance, &v_m_inv, "SMW: capacitance")?;
    Ok(&m_inv - m_inv_u * inner)
}

/// Principal symmetric PSD square root via eigendecomposition, with
/// negative eigenvalues clamped to zero. Used for every PSD input so the
/// root is canonical.
pub fn principal_sqrt(p: &PsdMatrix) -> SymMatrix {
    let (values, vectors) = p.as_sym().eigen();
    let roots: Vec<f64> = values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let d = Matrix::from_diagonal(&nalgebra::DVector::from_vec(roots));
    SymMatrix(symmetrized(&(&vectors * d * vectors.transpose())))
}

/// Complex eigenvalues of a general real square matrix (Hessenberg
/// reduction followed by shifted QR).
pub fn eigenvalues(m: &Matrix) -> Vec<Complex<f64>> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// `max |lambda|` over the spectrum of `m`.
pub fn spectral_radius(m: &Matrix) -> f64 {
    eigenvalues(m).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `m^k` by repeated multiplication.
pub fn matrix_power(m: &Matrix, k: usize) -> Matrix {
    let mut out = Matrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Loewner class of a pair `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoewnerOrder {
    /// `X > Y`
    Greater,
    /// `X >= Y` (includes equality)
    GreaterEq,
    /// `X < Y`
    Less,
    /// `X <= Y`
    LessEq,
    Incomparable,
}

/// Extreme eigenvalues of `X - Y` and the scale used for thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoewnerComparison {
    pub min_gap: f64,
    pub max_gap: f64,
    pub scale: f64,
    pub tols: Tolerances,
}

impl LoewnerComparison {
    pub fn ge(&self) -> bool {
        self.min_gap >= -self.tols.psd * self.scale
    }

    pub fn gt(&self) -> bool {
        self.min_gap > self.tols.pd * self.scale
    }

    pub fn le(&self) -> bool {
        self.max_gap <= self.tols.psd * self.scale
    }

    pub fn lt(&self) -> bool {
        self.max_gap < -self.tols.pd * self.scale
    }

    pub fn order(&self) -> LoewnerOrder {
        if self.gt() {
            LoewnerOrder::Greater
        } else if self.lt() {
            LoewnerOrder::Less
        } else if self.ge() {
            LoewnerOrder::GreaterEq
        } else if self.le() {
            LoewnerOrder::LessEq
        } else {
            LoewnerOrder::Incomparable
        }
    }
}

/// Compares `X` and `Y` through `lambda_min(X - Y)` and `lambda_max(X - Y)`,
/// scaled by `max(1, ||X||, ||Y||)`.
pub fn loewner_compare(x: &Matrix, y: &Matrix) -> LoewnerComparison {
    loewner_compare_with(x, y, &Tolerances::default())
}

pub fn loewner_compare_with(x: &Matrix, y: &Matrix, tols: &Tolerances) -> LoewnerComparison {
    let diff = symmetrized(&(x - y));
    let (min_gap, max_gap) = min_max_eig(&diff);
    LoewnerComparison {
        min_gap,
        max_gap,
        scale: scale_of(&[x, y]),
        tols: *tols,
    }
}

/// `||M^k||^{1/k}` for `k = 1..=k_max`.
pub fn gelfand_estimate(m: &Matrix, k_max: usize) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    ensure_square(m, "Gelfand estimate")?;
    let mut power = Matrix::identity(m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        power = &power * m;
        if !power.iter().all(|x| x.is_finite()) {
            return Err(Error::Overflow { power: k });
        }
        let norm = spectral_norm(&power);
        if !norm.is_finite() {
            return Err(Error::Overflow { power: k });
        }
        out.push(norm.powf(1.0 / k as f64));
    }
    Ok(out)
}

/// A residual norm together with the scale it is judged against.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(value: f64, scale: f64) -> Self {
        Self { value, scale }
    }

    /// `||lhs - rhs||` scaled by `max(1, ||lhs||, ||rhs||)`.
    pub fn between(lhs: &Matrix, rhs: &Matrix) -> Self {
        Self {
            value: spectral_norm(&(lhs - rhs)),
            scale: scale_of(&[lhs, rhs]),
        }
    }

    pub fn relative(&self) -> f64 {
        self.value / self.scale
    }

    /// `value <= tol * scale`
    pub fn within(&self, tol: f64) -> bool {
        self.value <= tol * self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> Matrix {
        from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn smw_scalar_examples() {
        let one = m(&[&[1.0]]);
        let r = smw_inverse(&one, &one, &one, &one).unwrap();
        assert_abs_diff_eq!(r[(0, 0)], 0.5, epsilon = 1e-15);

        // direct inversion of 1 + 1*1*2
        let r = smw_inverse(&one, &one, &one, &m(&[&[2.0]])).unwrap();
        assert_abs_diff_eq!(r[(0, 0)], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn smw_zero_update_is_plain_inverse() {
        let i2 = Matrix::identity(2, 2);
        let z = Matrix::zeros(2, 2);
        let r = smw_inverse(&i2, &i2, &z, &z).unwrap();
        assert_abs_diff_eq!(r, i2, epsilon = 1e-15);
    }

    #[test]
    fn smw_rejects_singular_pieces() {
        let z = Matrix::zeros(1, 1);
        let one = m(&[&[1.0]]);
        assert!(matches!(
            smw_inverse(&z, &one, &one, &one),
            Err(Error::SingularFactor { .. })
        ));
        // N^{-1} + V M^{-1} U = 1 - 1 = 0
        assert!(matches!(
            smw_inverse(&one, &one, &one, &m(&[&[-1.0]])),
            Err(Error::SingularFactor { .. })
        ));
    }

    #[test]
    fn smw_rectangular_update() {
        let mm = m(&[&[2.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 4.0]]);
        let n = m(&[&[1.0]]);
        let u = m(&[&[1.0], &[2.0], &[0.5]]);
        let v = m(&[&[0.5, -1.0, 1.0]]);
        let smw = smw_inverse(&mm, &n, &u, &v).unwrap();
        let direct = (&mm + &u * &n * &v).try_inverse().unwrap();
        assert_abs_diff_eq!(smw, direct, epsilon = 1e-13);
    }

    #[test]
    fn sqrt_examples() {
        let i = PsdMatrix::identity(3);
        assert_abs_diff_eq!(*principal_sqrt(&i), Matrix::identity(3, 3), epsilon = 1e-15);
        let z = PsdMatrix::zeros(2);
        assert_abs_diff_eq!(*principal_sqrt(&z), Matrix::zeros(2, 2), epsilon = 0.0);
        let d = PsdMatrix::new(m(&[&[4.0, 0.0], &[0.0, 9.0]])).unwrap();
        assert_abs_diff_eq!(*principal_sqrt(&d), m(&[&[2.0, 0.0], &[0.0, 3.0]]), epsilon = 1e-14);
    }

    #[test]
    fn sqrt_of_rank_one_squares_back() {
        let p = PsdMatrix::new(m(&[&[1.0, 2.0], &[2.0, 4.0]])).unwrap();
        let s = principal_sqrt(&p);
        assert!(asymmetry(&s) == 0.0);
        assert_abs_diff_eq!(&*s * &*s, p.as_matrix().clone(), epsilon = 1e-12);
        assert!(s.min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn psd_certification_rejects_indefinite() {
        let err = PsdMatrix::new(m(&[&[1.0, 0.0], &[0.0, -1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
        let err = PdMatrix::new(m(&[&[1.0, 0.0], &[0.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::NotPd { .. }));
        let err = SymMatrix::new(m(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
    }

    #[test]
    fn psd_clamps_roundoff_negatives() {
        let p = PsdMatrix::new(m(&[&[1.0, 0.0], &[0.0, -1e-13]])).unwrap();
        assert_eq!(p.min_eigenvalue(), 0.0);
        assert!(p[(1, 1)].abs() < 1e-15);
    }

    #[test]
    fn non_finite_rejected() {
        assert_eq!(
            SymMatrix::new(m(&[&[1.0]]).map(|_| f64::NAN)).unwrap_err(),
            Error::NonFinite
        );
    }

    #[test]
    fn spectral_radius_examples() {
        assert_abs_diff_eq!(spectral_radius(&Matrix::identity(2, 2)), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spectral_radius(&m(&[&[0.0, 1.0], &[0.0, 0.0]])), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            spectral_radius(&m(&[&[0.3819660113]])),
            0.3819660113,
            epsilon = 1e-15
        );
        // rotation by 90 degrees scaled by 0.7: eigenvalues +-0.7i
        let rot = m(&[&[0.0, -0.7], &[0.7, 0.0]]);
        assert_abs_diff_eq!(spectral_radius(&rot), 0.7, epsilon = 1e-12);
    }

    #[test]
    fn loewner_examples() {
        let i = Matrix::identity(2, 2);
        let z = Matrix::zeros(2, 2);
        assert_eq!(loewner_compare(&i, &z).order(), LoewnerOrder::Greater);
        assert_eq!(loewner_compare(&z, &i).order(), LoewnerOrder::Less);

        let p = m(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let c = loewner_compare(&p, &p);
        assert_eq!(c.order(), LoewnerOrder::GreaterEq);
        assert!(c.ge() && c.le());
        assert_eq!(c.min_gap, 0.0);

        // eigenvalues of the difference are (1, -1)
        let c = loewner_compare(&m(&[&[2.0, 0.0], &[0.0, 0.0]]), &i);
        assert_abs_diff_eq!(c.min_gap, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.max_gap, 1.0, epsilon = 1e-14);
        assert_eq!(c.order(), LoewnerOrder::Incomparable);
    }

    #[test]
    fn gelfand_examples() {
        let z = gelfand_estimate(&Matrix::zeros(2, 2), 4).unwrap();
        assert!(z.iter().all(|&x| x == 0.0));

        let s = gelfand_estimate(&m(&[&[0.5]]), 3).unwrap();
        for x in s {
            assert_abs_diff_eq!(x, 0.5, epsilon = 1e-15);
        }

        let jordan = m(&[&[0.5, 1.0], &[0.0, 0.5]]);
        let seq = gelfand_estimate(&jordan, 20).unwrap();
        assert!(seq.windows(2).all(|w| w[1] < w[0]));
        let last = *seq.last().unwrap();
        assert!(last > 0.5 && last < 0.62, "last = {last}");

        // oracle: M^k = [[a^k, k a^{k-1}], [0, a^k]], norm by SVD of the explicit power
        let a: f64 = 0.5;
        let k = 20;
        let explicit = m(&[&[a.powi(k), k as f64 * a.powi(k - 1)], &[0.0, a.powi(k)]]);
        assert_abs_diff_eq!(
            last,
            spectral_norm(&explicit).powf(1.0 / k as f64),
            epsilon = 1e-12
        );

        assert!(gelfand_estimate(&jordan, 0).is_err());
    }

    #[test]
    fn gelfand_overflow_detected() {
        let big = m(&[&[1e200]]);
        assert!(matches!(
            gelfand_estimate(&big, 3),
            Err(Error::Overflow { power: 2 })
        ));
    }

    #[test]
    fn pd_inverse() {
        let p = PdMatrix::new(m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let inv = p.inverse().unwrap();
        assert_abs_diff_eq!(&*p * &*inv, Matrix::identity(2, 2), epsilon = 1e-14);
    }
}
