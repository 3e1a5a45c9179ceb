use crate::numerics::RMat;
use crate::{Error, Result};

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
///
/// Sweeps the strict upper triangle in row order, annihilating one
/// off-diagonal entry per plane rotation, until the off-diagonal Frobenius
/// norm falls below `1e-13` times the matrix scale. Returns eigenvalues in
/// ascending order with the matching eigenvector columns. Input asymmetry
/// beyond `1e-10` relative is rejected.
pub fn jacobi_eigen(a: &RMat) -> Result<(Vec<f64>, RMat)> {
    if a.rows() != a.cols() {
        return Err(Error::Dimension(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let scale = a.max_abs().max(1e-300);
    let asym = a.asymmetry();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let mut m = a.clone();
    // symmetrize roundoff so the iteration sees an exactly symmetric matrix
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    let mut v = RMat::identity(n);
    let tol = 1e-13 * a.frobenius().max(1e-300);
    let max_sweeps = 100;
    for _ in 0..max_sweeps {
        let off = off_diagonal_norm(&m);
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                apply_rotation(&mut m, p, q, c, s);
                // accumulate eigenvectors: V <- V · G(p,q,θ)
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let eigenvectors = RMat::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok((eigenvalues, eigenvectors))
}

fn off_diagonal_norm(m: &RMat) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += 2.0 * m.get(i, j) * m.get(i, j);
        }
    }
    acc.sqrt()
}

/// Two-sided rotation A <- GᵀAG on the (p,q) plane, symmetric update.
fn apply_rotation(m: &mut RMat, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for i in 0..n {
        if i == p || i == q {
            continue;
        }
        let aip = m.get(i, p);
        let aiq = m.get(i, q);
        let nip = c * aip - s * aiq;
        let niq = s * aip + c * aiq;
        m.set(i, p, nip);
        m.set(p, i, nip);
        m.set(i, q, niq);
        m.set(q, i, niq);
    }
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    let apq = m.get(p, q);
    m.set(p, p, c * c * app - 2.0 * s * c * apq + s * s * aqq);
    m.set(q, q, s * s * app + 2.0 * s * c * apq + c * c * aqq);
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);
}

/// Inverse square root of a symmetric positive definite matrix via its
/// Jacobi eigendecomposition.
pub fn symmetric_inverse_sqrt(a: &RMat) -> Result<RMat> {
    let (vals, vecs) = jacobi_eigen(a)?;
    let floor = 1e-14 * vals.iter().cloned().fold(0.0, f64::max).max(1e-300);
    if vals.iter().any(|&l| l <= floor) {
        return Err(Error::Numeric(format!(
            "inverse sqrt needs positive definiteness, min eigenvalue {:.3e}",
            vals[0]
        )));
    }
    let n = a.rows();
    let mut out = RMat::zeros(n, n);
    for k in 0..n {
        let w = 1.0 / vals[k].sqrt();
        for i in 0..n {
            let vik = vecs.get(i, k);
            if vik == 0.0 {
                continue;
            }
            for j in 0..n {
                out.add_to(i, j, w * vik * vecs.get(j, k));
            }
        }
    }
    Ok(out)
}
