//! Shared numerical kernels.
//!
//! Everything on the certification path lives here, implemented in-repo:
//! dense real/complex matrices, partial-pivot LU, a cyclic Jacobi
//! eigensolver for symmetric matrices, the implicit-midpoint and RK4
//! integrators, and ordinary least-squares rate fitting. No external linear
//! algebra is used, so acceptance runs are self-contained and auditable.

mod eigen;
mod fit;
mod matrix;
mod ode;

pub use eigen::{jacobi_eigen, symmetric_inverse_sqrt};
pub use fit::{fit_line, FitResult};
pub use matrix::{linear_solve, DenseMatrix, LuFactors, Scalar};
pub use ode::{rk4_step, MidpointStepper};

use num_complex::Complex64;

/// Real dense matrix.
pub type RMat = DenseMatrix<f64>;
/// Complex dense matrix.
pub type CMat = DenseMatrix<Complex64>;

/// Euclidean norm of a scalar slice.
pub fn vec_norm<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt()
}

/// Hermitian inner product `⟨u, v⟩ = Σ conj(u_i) v_i`.
pub fn vec_inner<S: Scalar>(u: &[S], v: &[S]) -> S {
    assert_eq!(u.len(), v.len(), "inner product length mismatch");
    let mut acc = S::ZERO;
    for (a, b) in u.iter().zip(v) {
        acc += a.conj() * *b;
    }
    acc
}
