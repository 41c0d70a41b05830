//! Double-double forward sweep for `P_k`, `E_k(P_0)` and `G_k(P_0)`.
//!
//! The directed product can be many orders of magnitude smaller than the
//! product of its factor norms (large `P_0`, singular `S`). Rounding every
//! factor to `f64` then costs up to `eps * prod ||E(P_k)|| / ||E_n(P_0)||`
//! of relative accuracy, which is far too much at `||P_0|| ~ 1e6`. Carrying
//! the sweep in double-double and rounding once at the end avoids that.

use nalgebra::DMatrix;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::kernel::Matrix;

type Dd = TwoFloat;
type DdMatrix = DMatrix<Dd>;

fn lift(m: &Matrix) -> DdMatrix {
    m.map(Dd::from)
}

fn lower(m: &DdMatrix) -> Matrix {
    m.map(f64::from)
}

fn sym(m: DdMatrix) -> DdMatrix {
    let t = m.transpose();
    (m + t).map(|x| x * Dd::from(0.5))
}

/// Double-double quotient by long division. `TwoFloat`'s own `dd / dd`
/// forms `1 - b * (1 / b)` without a fused multiply-add and loses the low
/// word, so it is no better than `f64`.
fn div(x: Dd, y: Dd) -> Dd {
    let q1 = x.hi() / y.hi();
    let r = x - y * q1;
    let q2 = r.hi() / y.hi();
    let r = r - y * q2;
    let q3 = r.hi() / y.hi();
    Dd::new_add(q1, q2) + q3
}

/// Solves `M X = B` by Gaussian elimination with partial pivoting.
fn solve(mut m: DdMatrix, mut b: DdMatrix, context: &'static str) -> Result<DdMatrix> {
    let n = m.nrows();
    let scale = m.iter().map(|x| f64::from(x.abs())).fold(0.0, f64::max).max(1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| f64::from(m[(i, col)].abs()).total_cmp(&f64::from(m[(j, col)].abs())))
            .unwrap_or(col);
        let pivot = m[(pivot_row, col)];
        if f64::from(pivot.abs()) <= crate::kernel::tol::PIVOT * scale {
            return Err(Error::SingularFactor {
                context,
                pivot: f64::from(pivot.abs()),
            });
        }
        m.swap_rows(col, pivot_row);
        b.swap_rows(col, pivot_row);
        for row in col + 1..n {
            let factor = div(m[(row, col)], pivot);
            if f64::from(factor) == 0.0 {
                continue;
            }
            for k in col..n {
                let v = m[(col, k)];
                m[(row, k)] -= factor * v;
            }
            for k in 0..b.ncols() {
                let v = b[(col, k)];
                b[(row, k)] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let pivot = m[(col, col)];
        for k in 0..b.ncols() {
            let mut acc = b[(col, k)];
            for j in col + 1..n {
                acc -= m[(col, j)] * b[(j, k)];
            }
            b[(col, k)] = div(acc, pivot);
        }
    }
    Ok(b)
}

/// One step's `(P_{k+1}, E(P_k), F(P_k))` rounded to `f64`, plus the
/// updated running product and Gramian.
pub(crate) struct Sweep {
    a: DdMatrix,
    at: DdMatrix,
    r: DdMatrix,
    s: DdMatrix,
    rhs: DdMatrix,
    state: DdMatrix,
    product: DdMatrix,
    gramian: DdMatrix,
}

impl Sweep {
    pub(crate) fn new(a: &Matrix, r: &Matrix, s: &Matrix, p0: &Matrix) -> Self {
        let dim = a.nrows();
        let a = lift(a);
        let at = a.transpose();
        let s = lift(s);
        let mut rhs = DdMatrix::zeros(dim, 2 * dim);
        rhs.columns_mut(0, dim).copy_from(&at);
        rhs.columns_mut(dim, dim).copy_from(&s);
        Self {
            a,
            at,
            r: lift(r),
            s,
            rhs,
            state: lift(p0),
            product: DdMatrix::identity(dim, dim),
            gramian: DdMatrix::zeros(dim, dim),
        }
    }

    /// Advances one step.
    pub(crate) fn step(&mut self) -> Result<()> {
        let dim = self.a.nrows();
        // (I + S P) [X1 X2] = [A' S]: E(P) = X1', F(P) = X2'
        let m = DdMatrix::identity(dim, dim) + &self.s * &self.state;
        let x = solve(m, self.rhs.clone(), "I + S P")?;
        let e = x.columns(0, dim).transpose();
        let f = sym(x.columns(dim, dim).transpose());
        self.gramian = sym(&self.gramian + self.product.transpose() * f * &self.product);
        self.state = sym(&e * &self.state * &self.at + &self.r);
        self.product = e * &self.product;
        Ok(())
    }

    pub(crate) fn state(&self) -> Matrix {
        lower(&self.state)
    }

    pub(crate) fn product(&self) -> Matrix {
        lower(&self.product)
    }

    pub(crate) fn gramian(&self) -> Matrix {
        lower(&self.gramian)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{from_rows, lu_solve};

    #[test]
    fn solve_matches_f64_solver() {
        let m = from_rows(&[vec![4.0, 1.0, 2.0], vec![0.5, 3.0, -1.0], vec![2.0, -1.0, 5.0]]).unwrap();
        let b = from_rows(&[vec![1.0, 0.0], vec![2.0, 1.0], vec![-1.0, 3.0]]).unwrap();
        let dd = lower(&solve(lift(&m), lift(&b), "test").unwrap());
        let plain = lu_solve(&m, &b, "test").unwrap();
        assert!((dd - plain).abs().max() < 1e-14);
    }

    #[test]
    fn division_keeps_low_word() {
        let third = div(Dd::from(1.0), Dd::from(3.0));
        let back = third * Dd::from(3.0) - Dd::from(1.0);
        assert!(f64::from(back).abs() < 1e-30);
        let x = Dd::new_add(0.7294215592852021, 1e-18);
        let y = Dd::new_add(1.700099741915897, -3e-17);
        assert!(f64::from(div(x, y) * y - x).abs() < 1e-30);
    }

    #[test]
    fn solve_rejects_singular() {
        let m = from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(solve(lift(&m), lift(&Matrix::identity(2, 2)), "test").is_err());
    }

    #[test]
    fn golden_steps() {
        let one = Matrix::identity(1, 1);
        let mut sw = Sweep::new(&one, &one, &one, &Matrix::zeros(1, 1));
        sw.step().unwrap();
        sw.step().unwrap();
        // Phi_2(0) = 1.5, E_2(0) = E(1) E(0) = 0.5, G_2(0) = F(0) + E(0)^2 F(1) = 1.5
        assert_eq!(sw.state()[(0, 0)], 1.5);
        assert_eq!(sw.product()[(0, 0)], 0.5);
        assert_eq!(sw.gramian()[(0, 0)], 1.5);
    }
}
