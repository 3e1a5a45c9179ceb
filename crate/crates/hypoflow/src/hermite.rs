//! Gaussian-weighted tensor Hermite basis with exact ladder actions.
//!
//! The velocity basis is `φ_α(ξ) = H̃_α(ξ) M^{1/2}(ξ)` where `M` is the
//! normalized unit-variance Maxwellian `(2π)^{-d/2} e^{-|ξ|²/2}` and `H̃_α`
//! are the orthonormal (probabilists') Hermite polynomials for `M dξ`. With
//! that convention `φ_0 = M^{1/2}` exactly, the annihilation operator
//! `Y_i = ½ξ_i + ∂_{ξ_i}` acts as `Y_i φ_α = √α_i φ_{α-e_i}`, its adjoint
//! `Y_i* = ½ξ_i - ∂_{ξ_i}` as `Y_i* φ_α = √(α_i+1) φ_{α+e_i}`, and
//! multiplication by `ξ_i` is the sum of the two. Collision-operator kernels
//! become coordinate subspaces.
//!
//! Truncation is by total degree `|α| ≤ N`. Creation out of the top degree
//! is dropped, never silently: the affected input mass is returned with the
//! result.

use std::collections::HashMap;
use std::sync::Arc;

use crate::numerics::{RMat, Scalar};
use crate::{Error, Result};

/// Velocity (or space) multi-index `α ∈ ℕ^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs dimension >= 1");
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> u32 {
        self.entries[i]
    }

    /// Total degree `|α| = Σ α_i`.
    pub fn total_degree(&self) -> u32 {
        self.entries.iter().sum()
    }
}

/// Complete graded-lexicographic enumeration of `{α : |α| ≤ N}`.
///
/// Indices are listed by ascending total degree; within a degree the
/// lexicographically larger tuple comes first (grlex). The table is a
/// bijection between multi-indices and flat indices, with `φ_0` at slot 0.
#[derive(Debug)]
pub struct BasisTruncation {
    dim: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
    lookup: HashMap<Vec<u32>, usize>,
}

fn compositions_desc(d: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if d == 1 {
        prefix.push(degree);
        out.push(MultiIndex::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first);
        compositions_desc(d - 1, degree - first, prefix, out);
        prefix.pop();
    }
}

impl BasisTruncation {
    /// Enumerate the basis. Rejects `d < 1` and `N < 2` (a degenerate
    /// spectral space cannot host the Boltzmann kernel projection).
    pub fn enumerate(d: usize, n: u32) -> Result<Arc<Self>> {
        if d < 1 {
            return Err(Error::InvalidArgument("basis dimension must be >= 1".into()));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(
                "basis max degree must be >= 2".into(),
            ));
        }
        let mut indices = Vec::new();
        for degree in 0..=n {
            let mut prefix = Vec::with_capacity(d);
            compositions_desc(d, degree, &mut prefix, &mut indices);
        }
        let lookup = indices
            .iter()
            .enumerate()
            .map(|(i, m)| (m.entries.clone(), i))
            .collect();
        Ok(Arc::new(Self {
            dim: d,
            max_degree: n,
            indices,
            lookup,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn multi(&self, flat: usize) -> &MultiIndex {
        &self.indices[flat]
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn index_of(&self, entries: &[u32]) -> Option<usize> {
        self.lookup.get(entries).copied()
    }

    /// Flat index of `α ± e_i` relative to slot `flat`, if inside the table.
    pub fn shifted(&self, flat: usize, axis: usize, up: bool) -> Option<usize> {
        let mut e = self.indices[flat].entries.clone();
        if up {
            e[axis] += 1;
        } else {
            if e[axis] == 0 {
                return None;
            }
            e[axis] -= 1;
        }
        self.index_of(&e)
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim {
            return Err(Error::InvalidArgument(format!(
                "axis {} out of range for dimension {}",
                axis, self.dim
            )));
        }
        Ok(())
    }

    fn same_as(&self, other: &Self) -> bool {
        self.dim == other.dim && self.max_degree == other.max_degree
    }
}

/// Coefficient sequence over a [`BasisTruncation`]; real or complex.
///
/// The Euclidean norm of the coefficients equals the `L²_ξ` norm of the
/// represented function (Parseval on an orthonormal basis).
#[derive(Clone, Debug)]
pub struct CoeffVector<S: Scalar> {
    basis: Arc<BasisTruncation>,
    values: Vec<S>,
}

impl<S: Scalar> CoeffVector<S> {
    pub fn zeros(basis: Arc<BasisTruncation>) -> Self {
        let n = basis.size();
        Self {
            basis,
            values: vec![S::ZERO; n],
        }
    }

    /// Basis vector `φ` at flat slot `flat`.
    pub fn unit(basis: Arc<BasisTruncation>, flat: usize) -> Self {
        let mut v = Self::zeros(basis);
        v.values[flat] = S::ONE;
        v
    }

    pub fn from_values(basis: Arc<BasisTruncation>, values: Vec<S>) -> Result<Self> {
        if values.len() != basis.size() {
            return Err(Error::Dimension(format!(
                "coefficient length {} does not match basis size {}",
                values.len(),
                basis.size()
            )));
        }
        Ok(Self { basis, values })
    }

    pub fn basis(&self) -> &Arc<BasisTruncation> {
        &self.basis
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn norm(&self) -> f64 {
        crate::numerics::vec_norm(&self.values)
    }

    /// Hermitian inner product `⟨self, other⟩` (conjugate on the left).
    pub fn inner(&self, other: &Self) -> S {
        assert!(self.basis.same_as(&other.basis), "basis mismatch");
        crate::numerics::vec_inner(&self.values, &other.values)
    }

    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        assert!(self.basis.same_as(&other.basis), "basis mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b.scale(s);
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = v.scale(s);
        }
        out
    }
}

/// `Y_i` action: `Y_i φ_α = √α_i φ_{α-e_i}`. Exact and loss-free.
pub fn apply_annihilation<S: Scalar>(axis: usize, c: &CoeffVector<S>) -> Result<CoeffVector<S>> {
    let basis = c.basis();
    basis.check_axis(axis)?;
    let mut out = CoeffVector::zeros(basis.clone());
    for (flat, &v) in c.values().iter().enumerate() {
        if v == S::ZERO {
            continue;
        }
        let ai = basis.multi(flat).entry(axis);
        if ai == 0 {
            continue;
        }
        let target = basis.shifted(flat, axis, false).expect("interior shift");
        out.values_mut()[target] += v.scale((ai as f64).sqrt());
    }
    Ok(out)
}

/// `Y_i*` action: `Y_i* φ_α = √(α_i+1) φ_{α+e_i}`.
///
/// Coefficients at `|α| = N` whose image would leave the truncation are
/// dropped; the second return value is the input mass `Σ|c_α|²` over the
/// dropped slots, so truncation loss is surfaced rather than silent.
pub fn apply_creation<S: Scalar>(
    axis: usize,
    c: &CoeffVector<S>,
) -> Result<(CoeffVector<S>, f64)> {
    let basis = c.basis();
    basis.check_axis(axis)?;
    let mut out = CoeffVector::zeros(basis.clone());
    let mut dropped = 0.0;
    for (flat, &v) in c.values().iter().enumerate() {
        if v == S::ZERO {
            continue;
        }
        match basis.shifted(flat, axis, true) {
            Some(target) => {
                let ai = basis.multi(flat).entry(axis);
                out.values_mut()[target] += v.scale(((ai + 1) as f64).sqrt());
            }
            None => dropped += v.abs_sq(),
        }
    }
    Ok((out, dropped))
}

/// Multiplication by `ξ_i`, the tridiagonal-in-degree action
/// `√α_i φ_{α-e_i} + √(α_i+1) φ_{α+e_i}`; inherits the creation drop report.
pub fn apply_xi_multiply<S: Scalar>(
    axis: usize,
    c: &CoeffVector<S>,
) -> Result<(CoeffVector<S>, f64)> {
    let (mut out, dropped) = apply_creation(axis, c)?;
    let down = apply_annihilation(axis, c)?;
    out.add_scaled(&down, 1.0);
    Ok((out, dropped))
}

/// Dense matrix of `Y_i` on the truncated basis.
pub fn annihilation_matrix(basis: &BasisTruncation, axis: usize) -> RMat {
    let n = basis.size();
    let mut m = RMat::zeros(n, n);
    for col in 0..n {
        let ai = basis.multi(col).entry(axis);
        if ai == 0 {
            continue;
        }
        let row = basis.shifted(col, axis, false).expect("interior shift");
        m.set(row, col, (ai as f64).sqrt());
    }
    m
}

/// Dense matrix of `Y_i*` on the truncated basis (creation overflow dropped,
/// making it exactly the transpose of the annihilation matrix).
pub fn creation_matrix(basis: &BasisTruncation, axis: usize) -> RMat {
    let n = basis.size();
    let mut m = RMat::zeros(n, n);
    for col in 0..n {
        if let Some(row) = basis.shifted(col, axis, true) {
            let ai = basis.multi(col).entry(axis);
            m.set(row, col, ((ai + 1) as f64).sqrt());
        }
    }
    m
}

/// Dense matrix of multiplication by `ξ_i`.
pub fn xi_matrix(basis: &BasisTruncation, axis: usize) -> RMat {
    let mut m = creation_matrix(basis, axis);
    let a = annihilation_matrix(basis, axis);
    m.add_scaled(&a, 1.0);
    m
}

/// Orthonormal Hermite values `H̃_0(x), ..., H̃_{n}(x)` by the stable
/// three-term recurrence; generic so tests can evaluate at complex points.
pub fn hermite_values<S: Scalar>(n: u32, x: S) -> Vec<S> {
    let mut vals = Vec::with_capacity(n as usize + 1);
    vals.push(S::ONE);
    if n >= 1 {
        vals.push(x);
    }
    for k in 1..n {
        let kf = k as f64;
        let next =
            (x * vals[k as usize] - vals[k as usize - 1].scale(kf.sqrt())).scale(1.0 / (kf + 1.0).sqrt());
        vals.push(next);
    }
    vals
}

/// Largest supported one-dimensional quadrature order.
pub const GAUSS_HERMITE_CAP: u32 = 512;

/// One-dimensional Gauss-Hermite rule for the weight `M(ξ) dξ`
/// (unit-variance Gaussian): `n` nodes, exact for polynomials of degree
/// `≤ 2n-1`, weights summing to one.
///
/// Nodes are found by Newton iteration on the orthonormal Hermite
/// recurrence, started from the classical asymptotic guesses (on the
/// physicists' scale, then rescaled by √2), to an absolute node tolerance
/// of `1e-14`. Weights are the Christoffel numbers
/// `w_i = 1 / Σ_{k<n} H̃_k(x_i)²`.
pub fn gauss_hermite_rule(n: u32) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 1 {
        return Err(Error::InvalidArgument("quadrature order must be >= 1".into()));
    }
    if n > GAUSS_HERMITE_CAP {
        return Err(Error::InvalidArgument(format!(
            "quadrature order {} exceeds cap {}",
            n, GAUSS_HERMITE_CAP
        )));
    }
    let nn = n as usize;
    let mut nodes = vec![0.0f64; nn];
    let half = nn / 2;
    let nf = n as f64;
    let sqrt2 = std::f64::consts::SQRT_2;
    // Positive roots in descending order, each guess extrapolated from the
    // previously refined roots (classical gauher scheme, rescaled from the
    // physicists' to the probabilists' abscissa by √2).
    let mut refined: Vec<f64> = Vec::with_capacity(half);
    for i in 0..half {
        let mut x = match i {
            0 => {
                ((2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0)) * sqrt2
            }
            1 => refined[0] - 2.0 * 1.14 * nf.powf(0.426) / refined[0],
            2 => 1.86 * refined[1] - 0.86 * refined[0],
            3 => 1.91 * refined[2] - 0.91 * refined[1],
            _ => 2.0 * refined[i - 1] - refined[i - 2],
        };
        let mut converged = false;
        for _ in 0..200 {
            let vals = hermite_values(n, x);
            let f = vals[nn];
            let df = nf.sqrt() * vals[nn - 1];
            let dx = f / df;
            x -= dx;
            if dx.abs() < 1e-14 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Quadrature(format!(
                "Hermite node {} did not converge for order {}",
                i, n
            )));
        }
        refined.push(x);
        nodes[i] = x;
        nodes[nn - 1 - i] = -x;
    }
    if nn % 2 == 1 {
        nodes[half] = 0.0;
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in nodes.windows(2) {
        if w[1] - w[0] < 1e-12 {
            return Err(Error::Quadrature(format!(
                "duplicate Hermite nodes at order {n}"
            )));
        }
    }
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let vals = hermite_values(n - 1, x);
            let s: f64 = vals.iter().map(|v| v * v).sum();
            1.0 / s
        })
        .collect();
    Ok((nodes, weights))
}

/// Tensor quadrature data on a truncated basis: per-point weights, point
/// coordinates, and the matrix `Φ[flat][point] = H̃_α(ξ_point)`.
pub struct TensorQuadrature {
    pub weights: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub basis_values: RMat,
}

/// Build the tensor Gauss-Hermite grid with `n` nodes per axis and evaluate
/// every basis polynomial on it.
pub fn tensor_quadrature(basis: &BasisTruncation, n: u32) -> Result<TensorQuadrature> {
    let (nodes, w1) = gauss_hermite_rule(n)?;
    let d = basis.dim();
    let npts = (n as usize).pow(d as u32);
    let mut weights = Vec::with_capacity(npts);
    let mut points = Vec::with_capacity(npts);
    let mut stack = vec![0usize; d];
    loop {
        let mut w = 1.0;
        let mut pt = Vec::with_capacity(d);
        for (axis, &k) in stack.iter().enumerate() {
            let _ = axis;
            w *= w1[k];
            pt.push(nodes[k]);
        }
        weights.push(w);
        points.push(pt);
        // odometer increment
        let mut carry = true;
        for slot in stack.iter_mut().rev() {
            if carry {
                *slot += 1;
                if *slot == n as usize {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    // per-axis 1-D values, then product per multi-index
    let mut axis_vals: Vec<Vec<Vec<f64>>> = Vec::with_capacity(npts);
    for pt in &points {
        let per_axis: Vec<Vec<f64>> = pt
            .iter()
            .map(|&x| hermite_values(basis.max_degree(), x))
            .collect();
        axis_vals.push(per_axis);
    }
    let mut basis_values = RMat::zeros(basis.size(), npts);
    for (flat, alpha) in basis.indices().iter().enumerate() {
        for (p, per_axis) in axis_vals.iter().enumerate() {
            let mut v = 1.0;
            for (axis, &deg) in alpha.entries().iter().enumerate() {
                v *= per_axis[axis][deg as usize];
            }
            basis_values.set(flat, p, v);
        }
    }
    Ok(TensorQuadrature {
        weights,
        points,
        basis_values,
    })
}
