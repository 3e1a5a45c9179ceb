use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::{Error, Result};

/// Scalar field for dense linear algebra: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(x: f64) -> Self;
    fn conj(self) -> Self;
    /// Modulus.
    fn abs(self) -> f64;
    /// Squared modulus.
    fn abs_sq(self) -> f64;
    fn re(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn from_f64(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn abs_sq(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<S: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> fmt::Debug for DenseMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix({}x{})", self.rows, self.cols)
    }
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut y = vec![S::ZERO; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = S::ZERO;
            for (a, b) in row.iter().zip(x) {
                acc += *a * *b;
            }
            y[i] = acc;
        }
        y
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == S::ZERO {
                    continue;
                }
                let orow = other.row(k);
                let start = i * out.cols;
                for (j, &okj) in orow.iter().enumerate() {
                    out.data[start + j] += aik * okj;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.scale(s);
        }
        out
    }

    /// `self += other * s`.
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b.scale(s);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.abs_sq()).sum::<f64>().sqrt()
    }

    /// Max-norm of `A - Aᴴ` (plain transpose for real scalars).
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Infinity norm (max absolute row sum); cheap spectral-norm upper bound.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl DenseMatrix<f64> {
    pub fn to_complex(&self) -> DenseMatrix<Complex64> {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| {
            Complex64::new(self.get(i, j), 0.0)
        })
    }

    /// Quadratic form `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        x.iter().zip(&ax).map(|(a, b)| a * b).sum()
    }
}

/// LU factorization with partial pivoting, reusable across solves.
pub struct LuFactors<S: Scalar> {
    lu: DenseMatrix<S>,
    piv: Vec<usize>,
}

impl<S: Scalar> LuFactors<S> {
    /// Factor a square matrix. A pivot below `1e-14` times the matrix scale
    /// is reported as singular, with the offending pivot index.
    pub fn factor(a: &DenseMatrix<S>) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(1.0);
        for k in 0..n {
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..n {
                let v = lu.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-14 * scale {
                return Err(Error::Singular {
                    pivot: k,
                    value: best,
                });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu.get(k, j);
                    lu.set(k, j, lu.get(p, j));
                    lu.set(p, j, tmp);
                }
                piv.swap(k, p);
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let m = lu.get(i, k) / pivot;
                lu.set(i, k, m);
                if m == S::ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let v = lu.get(i, j) - m * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        Ok(Self { lu, piv })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n, "solve dimension mismatch");
        let mut x: Vec<S> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu.get(i, j) * x[j];
            }
            x[i] = acc / self.lu.get(i, i);
        }
        x
    }
}

/// Solve `A x = rhs` by partial-pivot elimination.
pub fn linear_solve<S: Scalar>(a: &DenseMatrix<S>, rhs: &[S]) -> Result<Vec<S>> {
    Ok(LuFactors::factor(a)?.solve(rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::vec_norm;
    use crate::rng::Xoshiro256pp;

    #[test]
    fn solve_identity_returns_rhs() {
        let a = DenseMatrix::<f64>::identity(4);
        let rhs = vec![1.0, -2.0, 3.0, 0.5];
        let x = linear_solve(&a, &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn solve_diagonal_is_entrywise_division() {
        let mut a = DenseMatrix::<f64>::zeros(3, 3);
        a.set(0, 0, 2.0);
        a.set(1, 1, -4.0);
        a.set(2, 2, 0.5);
        let x = linear_solve(&a, &[2.0, 8.0, 1.0]).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 2.0]);
    }

    #[test]
    fn solve_random_well_conditioned_100() {
        let mut rng = Xoshiro256pp::seed_from_u64(11);
        let n = 100;
        let mut a = DenseMatrix::<f64>::from_fn(n, n, |_, _| 0.2 * rng.next_symmetric());
        for i in 0..n {
            a.add_to(i, i, 5.0);
        }
        let rhs: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
        let x = linear_solve(&a, &rhs).unwrap();
        let ax = a.matvec(&x);
        let res: Vec<f64> = ax.iter().zip(&rhs).map(|(u, v)| u - v).collect();
        assert!(vec_norm(&res) <= 1e-10 * vec_norm(&rhs));
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let mut a = DenseMatrix::<f64>::zeros(3, 3);
        a.set(0, 0, 1.0);
        a.set(1, 1, 1.0);
        // row 2 is zero
        match linear_solve(&a, &[1.0, 1.0, 1.0]) {
            Err(Error::Singular { pivot, .. }) => assert_eq!(pivot, 2),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn complex_solve_round_trip() {
        use num_complex::Complex64;
        let mut rng = Xoshiro256pp::seed_from_u64(3);
        let n = 12;
        let mut a = DenseMatrix::<Complex64>::from_fn(n, n, |_, _| {
            Complex64::new(rng.next_symmetric(), rng.next_symmetric()) * 0.3
        });
        for i in 0..n {
            a.add_to(i, i, Complex64::new(4.0, 0.0));
        }
        let rhs: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.next_symmetric(), rng.next_symmetric()))
            .collect();
        let x = linear_solve(&a, &rhs).unwrap();
        let ax = a.matvec(&x);
        let res: Vec<Complex64> = ax.iter().zip(&rhs).map(|(u, v)| u - v).collect();
        assert!(vec_norm(&res) <= 1e-10 * vec_norm(&rhs));
    }
}
