//! The three degenerately dissipative collision operators and their
//! macroscopic machinery.
//!
//! Model 1 is the relaxation operator `L = -(I - P₀)`, Model 2 the
//! Fokker-Planck operator (exactly diagonal `-|α|` on the Hermite basis),
//! and Model 3 a structure-exact surrogate of the linearized hard-sphere
//! Boltzmann operator, `L₃ = -(I-P) ν̂ (I-P)`, where `ν̂` is the Galerkin
//! matrix of multiplication by the true collision frequency `ν(ξ)` and `P`
//! projects onto the `d+2` dimensional kernel spanned by mass, momentum and
//! temperature directions. The surrogate reproduces every property the
//! decay proofs use (self-adjointness, kernel, ν-weighted coercivity with
//! constant one) while avoiding the full bilinear kernel assembly.

use std::sync::Arc;

use rayon::prelude::*;

use crate::hermite::{tensor_quadrature, BasisTruncation, CoeffVector};
use crate::numerics::{jacobi_eigen, symmetric_inverse_sqrt, RMat, Scalar};
use crate::{Error, Result};

/// Which collision operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ModelKind {
    Relaxation,
    FokkerPlanck,
    BoltzmannSurrogate,
}

impl ModelKind {
    /// Dimension of `ker L` (as an operator; the Fokker-Planck coercivity
    /// refinement uses a larger `d+1` dimensional projection).
    pub fn kernel_dim(&self, d: usize) -> usize {
        match self {
            ModelKind::Relaxation | ModelKind::FokkerPlanck => 1,
            ModelKind::BoltzmannSurrogate => d + 2,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relaxation" | "model1" | "1" => Ok(ModelKind::Relaxation),
            "fokker-planck" | "fokkerplanck" | "model2" | "2" => Ok(ModelKind::FokkerPlanck),
            "boltzmann" | "boltzmann-surrogate" | "model3" | "3" => {
                Ok(ModelKind::BoltzmannSurrogate)
            }
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Relaxation => "relaxation",
            ModelKind::FokkerPlanck => "fokker-planck",
            ModelKind::BoltzmannSurrogate => "boltzmann-surrogate",
        }
    }
}

/// The per-model weight `w(ξ)` of the decay theorems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WeightSpec {
    One,
    OnePlusXiSquared,
    OnePlusXiAbs,
}

impl WeightSpec {
    pub fn for_model(model: ModelKind) -> Self {
        match model {
            ModelKind::Relaxation => WeightSpec::One,
            ModelKind::FokkerPlanck => WeightSpec::OnePlusXiSquared,
            ModelKind::BoltzmannSurrogate => WeightSpec::OnePlusXiAbs,
        }
    }

    fn eval(&self, point: &[f64]) -> f64 {
        let r2: f64 = point.iter().map(|x| x * x).sum();
        match self {
            WeightSpec::One => 1.0,
            WeightSpec::OnePlusXiSquared => 1.0 + r2,
            WeightSpec::OnePlusXiAbs => 1.0 + r2.sqrt(),
        }
    }

    /// Galerkin matrix of multiplication by `w` on the truncated basis,
    /// assembled with an `N+6`-node tensor rule (exact for the polynomial
    /// weights). Symmetric positive definite; `w = 1` gives the identity.
    pub fn matrix(&self, basis: &BasisTruncation) -> Result<RMat> {
        if matches!(self, WeightSpec::One) {
            return Ok(RMat::identity(basis.size()));
        }
        galerkin_multiplication(basis, |pt| self.eval(pt))
    }
}

/// Galerkin matrix of pointwise multiplication by `f(ξ)`; the parallel row
/// fill is deterministic, so results are bit-identical to a serial fill.
fn galerkin_multiplication(
    basis: &BasisTruncation,
    f: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<RMat> {
    let quad = tensor_quadrature(basis, basis.max_degree() + 6)?;
    let npts = quad.weights.len();
    let fw: Vec<f64> = (0..npts)
        .into_par_iter()
        .map(|p| quad.weights[p] * f(&quad.points[p]))
        .collect();
    let n = basis.size();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            for j in i..n {
                let mut acc = 0.0;
                for p in 0..npts {
                    acc += fw[p] * quad.basis_values.get(i, p) * quad.basis_values.get(j, p);
                }
                row[j] = acc;
            }
            row
        })
        .collect();
    let mut m = RMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, rows[i][j]);
            m.set(j, i, rows[i][j]);
        }
    }
    Ok(m)
}

/// Reading of the moment tensor `Γ_ij(g) = ⟨(ξ_iξ_j - ?)M^{1/2}, g⟩`.
///
/// The default subtracts `δ_ij`; `LiteralOne` keeps the verbatim `-1` for
/// every pair. The two agree on microscopic (mass-free) inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GammaConvention {
    #[default]
    KroneckerDelta,
    LiteralOne,
}

/// Macroscopic tuple `(a, b, c)` plus the moment tensors `Γ` and `Λ`.
#[derive(Clone, Debug)]
pub struct FluidMoments<S: Scalar> {
    pub a: S,
    pub b: Vec<S>,
    /// Temperature component; meaningful for the Boltzmann surrogate.
    pub c: S,
    pub gamma: crate::numerics::DenseMatrix<S>,
    pub lambda: Vec<S>,
}

/// Precomputed moment functionals on a basis: every entry is the
/// coefficient vector of the pairing function, so a moment is a plain dot
/// product with the state.
pub struct MomentVectors {
    basis: Arc<BasisTruncation>,
    /// `(|ξ|² - d) M^{1/2}`, unnormalized.
    pub temperature: CoeffVector<f64>,
    /// `Γ_ij` pairing vectors, `d×d`.
    pub gamma: Vec<Vec<CoeffVector<f64>>>,
    /// `Λ_i` pairing vectors.
    pub lambda: Vec<CoeffVector<f64>>,
}

impl MomentVectors {
    pub fn build(basis: &Arc<BasisTruncation>, convention: GammaConvention) -> Self {
        let d = basis.dim();
        let mut temperature = CoeffVector::zeros(basis.clone());
        for i in 0..d {
            if let Some(idx) = index_of_axis_pow(basis, i, 2) {
                temperature.values_mut()[idx] = 2.0f64.sqrt();
            }
        }
        let mut gamma = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = Vec::with_capacity(d);
            for j in 0..d {
                let mut v = CoeffVector::zeros(basis.clone());
                if i == j {
                    if let Some(idx) = index_of_axis_pow(basis, i, 2) {
                        v.values_mut()[idx] = 2.0f64.sqrt();
                    }
                } else {
                    let mut e = vec![0u32; d];
                    e[i] = 1;
                    e[j] = 1;
                    if let Some(idx) = basis.index_of(&e) {
                        v.values_mut()[idx] = 1.0;
                    }
                }
                if matches!(convention, GammaConvention::LiteralOne) && i != j {
                    v.values_mut()[0] -= 1.0;
                }
                row.push(v);
            }
            gamma.push(row);
        }
        let mut lambda = Vec::with_capacity(d);
        for i in 0..d {
            let mut v = CoeffVector::zeros(basis.clone());
            if let Some(idx) = index_of_axis_pow(basis, i, 3) {
                v.values_mut()[idx] = 6.0f64.sqrt();
            }
            for j in 0..d {
                if j == i {
                    continue;
                }
                let mut e = vec![0u32; d];
                e[i] = 1;
                e[j] = 2;
                if let Some(idx) = basis.index_of(&e) {
                    v.values_mut()[idx] = 2.0f64.sqrt();
                }
            }
            lambda.push(v);
        }
        Self {
            basis: basis.clone(),
            temperature,
            gamma,
            lambda,
        }
    }

    pub fn basis(&self) -> &Arc<BasisTruncation> {
        &self.basis
    }
}

fn index_of_axis_pow(basis: &BasisTruncation, axis: usize, pow: u32) -> Option<usize> {
    let mut e = vec![0u32; basis.dim()];
    e[axis] = pow;
    basis.index_of(&e)
}

/// Dot product of a real pairing vector with a (possibly complex) state.
pub fn pair<S: Scalar>(vector: &CoeffVector<f64>, state: &CoeffVector<S>) -> S {
    let mut acc = S::ZERO;
    for (v, s) in vector.values().iter().zip(state.values()) {
        if *v != 0.0 {
            acc += s.scale(*v);
        }
    }
    acc
}

/// Orthogonal projection onto `span{M^{1/2}}`: returns `a·φ_0`.
pub fn project_p0<S: Scalar>(c: &CoeffVector<S>) -> CoeffVector<S> {
    let mut out = CoeffVector::zeros(c.basis().clone());
    out.values_mut()[0] = c.values()[0];
    out
}

/// Orthogonal projection onto the model's macroscopic subspace:
/// `span{φ_0, φ_{e_i}}` for Fokker-Planck, plus the temperature direction
/// `(|ξ|²-d)M^{1/2}` for the Boltzmann surrogate. The relaxation model is
/// rejected (its projection is [`project_p0`]).
pub fn project_p<S: Scalar>(c: &CoeffVector<S>, model: ModelKind) -> Result<CoeffVector<S>> {
    if matches!(model, ModelKind::Relaxation) {
        return Err(Error::InvalidArgument(
            "the relaxation model's macroscopic projection is P0".into(),
        ));
    }
    let basis = c.basis();
    let d = basis.dim();
    let mut out = project_p0(c);
    for i in 0..d {
        if let Some(idx) = index_of_axis_pow(basis, i, 1) {
            out.values_mut()[idx] = c.values()[idx];
        }
    }
    if matches!(model, ModelKind::BoltzmannSurrogate) {
        let mut temp = CoeffVector::<f64>::zeros(basis.clone());
        for i in 0..d {
            if let Some(idx) = index_of_axis_pow(basis, i, 2) {
                temp.values_mut()[idx] = 1.0 / (d as f64).sqrt();
            }
        }
        let coeff = pair(&temp, c);
        for (flat, t) in temp.values().iter().enumerate() {
            if *t != 0.0 {
                out.values_mut()[flat] += coeff.scale(*t);
            }
        }
    }
    Ok(out)
}

/// Microscopic part `(I - P)c` (`(I - P₀)c` for the relaxation model).
pub fn micro_part<S: Scalar>(c: &CoeffVector<S>, model: ModelKind) -> CoeffVector<S> {
    let macro_part = match model {
        ModelKind::Relaxation => project_p0(c),
        _ => project_p(c, model).expect("projection defined"),
    };
    let mut out = c.clone();
    out.add_scaled(&macro_part, -1.0);
    out
}

/// All five macroscopic pieces of a state, with the default `δ_ij` reading
/// of `Γ`.
pub fn moments<S: Scalar>(c: &CoeffVector<S>, model: ModelKind) -> FluidMoments<S> {
    moments_with(c, model, GammaConvention::default())
}

pub fn moments_with<S: Scalar>(
    c: &CoeffVector<S>,
    _model: ModelKind,
    convention: GammaConvention,
) -> FluidMoments<S> {
    let basis = c.basis();
    let d = basis.dim();
    let vectors = MomentVectors::build(basis, convention);
    let a = c.values()[0];
    let b: Vec<S> = (0..d)
        .map(|i| match index_of_axis_pow(basis, i, 1) {
            Some(idx) => c.values()[idx],
            None => S::ZERO,
        })
        .collect();
    let cc = pair(&vectors.temperature, c).scale(1.0 / (2.0 * d as f64));
    let gamma =
        crate::numerics::DenseMatrix::from_fn(d, d, |i, j| pair(&vectors.gamma[i][j], c));
    let lambda: Vec<S> = (0..d).map(|i| pair(&vectors.lambda[i], c)).collect();
    FluidMoments {
        a,
        b,
        c: cc,
        gamma,
        lambda,
    }
}

// ---------------------------------------------------------------------------
// collision frequency
// ---------------------------------------------------------------------------

/// Γ(k/2) for integer k ≥ 1.
fn gamma_half(k: u32) -> f64 {
    match k {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        _ => (k as f64 / 2.0 - 1.0) * gamma_half(k - 2),
    }
}

/// Surface area of the unit sphere `S^{k-1} ⊂ R^k`.
fn sphere_surface(k: u32) -> f64 {
    2.0 * std::f64::consts::PI.powf(k as f64 / 2.0) / gamma_half(k)
}

/// Composite Simpson with panel doubling until the value is stable to
/// `1e-12` relative; failure to reach `1e-10` at the panel cap is reported.
pub(crate) fn refine_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let simpson = |n: usize| {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + k as f64 * h);
        }
        acc * h / 3.0
    };
    let mut n = 64;
    let mut prev = simpson(n);
    loop {
        n *= 2;
        let cur = simpson(n);
        let change = (cur - prev).abs() / cur.abs().max(1.0);
        if change <= 1e-12 {
            return Ok(cur);
        }
        if n >= 1 << 17 {
            if change <= 1e-10 {
                return Ok(cur);
            }
            return Err(Error::Quadrature(format!(
                "radial integral not converged: relative change {change:.3e} at {n} panels"
            )));
        }
        prev = cur;
    }
}

/// Complete elliptic integral `E(m) = ∫₀^{π/2} √(1 - m sin²φ) dφ` by the
/// arithmetic-geometric mean.
fn elliptic_e(m: f64) -> f64 {
    if m >= 1.0 {
        return 1.0;
    }
    if m <= 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut pow2 = 0.5;
    let mut sum = pow2 * c * c;
    for _ in 0..64 {
        if c.abs() <= 1e-17 {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    let k = std::f64::consts::FRAC_PI_2 / a;
    k * (1.0 - sum)
}

/// Angle average of `|r e₁ - ρ ω|` over `ω ∈ S^{d-1}`.
fn angle_averaged_distance(d: usize, r: f64, rho: f64) -> Result<f64> {
    if d == 3 {
        // closed reduction: ((r+ρ)³ - |r-ρ|³) / (6 r ρ)
        let (hi, lo) = if r >= rho { (r, rho) } else { (rho, r) };
        if hi == 0.0 {
            return Ok(0.0);
        }
        return Ok(hi + lo * lo / (3.0 * hi));
    }
    if r == 0.0 || rho == 0.0 {
        return Ok(r.max(rho));
    }
    if d == 2 {
        // (2/π)(r+ρ) E(4rρ/(r+ρ)²)
        let s = r + rho;
        let m = 4.0 * r * rho / (s * s);
        return Ok(2.0 / std::f64::consts::PI * s * elliptic_e(m));
    }
    // d >= 4: ∫₀^π √(r²+ρ²-2rρcosθ) sin^{d-2}θ dθ, normalized
    let p = (d as i32 - 2).max(0);
    let norm = refine_simpson(&|t: f64| t.sin().powi(p), 0.0, std::f64::consts::PI)?;
    let val = refine_simpson(
        &|t: f64| {
            (r * r + rho * rho - 2.0 * r * rho * t.cos()).max(0.0).sqrt() * t.sin().powi(p)
        },
        0.0,
        std::f64::consts::PI,
    )?;
    Ok(val / norm)
}

/// Hard-sphere collision frequency
/// `ν(ξ) = ∬ |(ξ-ξ*)·ω| M(ξ*) dω dξ*`.
///
/// The `ω`-integral is `A_d |ξ-ξ*|` with `A_d = ∫_{S^{d-1}} |e·ω| dω`
/// (`2π|v|` for `d = 3`); the `ξ*`-integral then reduces to a
/// one-dimensional radial quadrature against the Gaussian shell density.
/// For `d = 1` the "sphere" is `{±1}` and `ν(ξ) = 2 ∫ |ξ-ξ*| M(ξ*) dξ*`.
pub fn collision_frequency_nu(xi: &[f64]) -> Result<f64> {
    let d = xi.len();
    if d == 0 {
        return Err(Error::InvalidArgument("ν needs dimension >= 1".into()));
    }
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    collision_frequency_nu_radial(d, r)
}

/// Radial profile `ν(|ξ| = r)`.
pub fn collision_frequency_nu_radial(d: usize, r: f64) -> Result<f64> {
    if d == 1 {
        let density = |z: f64| (2.0 * std::f64::consts::PI).powf(-0.5) * (-z * z / 2.0).exp();
        // kink of |r - z| at z = r: split the domain there
        let f = |z: f64| (r - z).abs() * density(z);
        let left = refine_simpson(&f, -42.0, r)?;
        let right = refine_simpson(&f, r, r + 42.0)?;
        return Ok(2.0 * (left + right));
    }
    let a_d = 2.0 * sphere_surface(d as u32 - 1) / (d as f64 - 1.0);
    let shell = sphere_surface(d as u32);
    let gauss = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    let integrand = |rho: f64| -> f64 {
        let k = angle_averaged_distance(d, r, rho).unwrap_or(f64::NAN);
        k * shell * gauss * rho.powi(d as i32 - 1) * (-rho * rho / 2.0).exp()
    };
    let cut = r + 42.0;
    // derivative kink of the kernel at ρ = r: split there
    let split = r.min(cut);
    let lo = refine_simpson(&integrand, 0.0, split)?;
    let hi = refine_simpson(&integrand, split, cut)?;
    let val = a_d * (lo + hi);
    if !val.is_finite() {
        return Err(Error::Quadrature("ν integrand not finite".into()));
    }
    Ok(val)
}

// ---------------------------------------------------------------------------
// operator assembly
// ---------------------------------------------------------------------------

/// Assembled collision operator with its kernel, weight data, and the
/// matrix used on the dissipation side of the coercivity estimate.
pub struct OperatorMatrix {
    pub matrix: RMat,
    pub model: ModelKind,
    pub basis: Arc<BasisTruncation>,
    pub kernel: Vec<CoeffVector<f64>>,
    pub weight: WeightSpec,
    /// `ν̂` for the Boltzmann surrogate, the `1+|ξ|²` Galerkin matrix for
    /// Fokker-Planck, identity for relaxation.
    pub dissipation_weight: RMat,
}

/// Assemble the Galerkin matrix of the model's collision operator.
///
/// Model 1 is `-(I - P₀)`; Model 2 is exactly diagonal with entries `-|α|`
/// (the Ornstein-Uhlenbeck ladder identity `L = Δ_ξ + ¼(2d - |ξ|²)` equals
/// `-ΣY_i*Y_i`); Model 3 is the surrogate `-(I-P) ν̂ (I-P)`.
pub fn assemble_l(model: ModelKind, basis: &Arc<BasisTruncation>) -> Result<OperatorMatrix> {
    let n = basis.size();
    let d = basis.dim();
    if matches!(model, ModelKind::BoltzmannSurrogate) && basis.max_degree() < 3 {
        return Err(Error::InvalidArgument(
            "the Boltzmann surrogate needs max degree >= 3 so Λ moments are representable".into(),
        ));
    }
    let weight = WeightSpec::for_model(model);
    match model {
        ModelKind::Relaxation => {
            let mut m = RMat::identity(n).scaled(-1.0);
            m.set(0, 0, 0.0);
            Ok(OperatorMatrix {
                matrix: m,
                model,
                basis: basis.clone(),
                kernel: vec![CoeffVector::unit(basis.clone(), 0)],
                weight,
                dissipation_weight: RMat::identity(n),
            })
        }
        ModelKind::FokkerPlanck => {
            let mut m = RMat::zeros(n, n);
            for (flat, alpha) in basis.indices().iter().enumerate() {
                m.set(flat, flat, -(alpha.total_degree() as f64));
            }
            Ok(OperatorMatrix {
                matrix: m,
                model,
                basis: basis.clone(),
                kernel: vec![CoeffVector::unit(basis.clone(), 0)],
                weight,
                dissipation_weight: weight.matrix(basis)?,
            })
        }
        ModelKind::BoltzmannSurrogate => {
            let nu_hat = galerkin_multiplication(basis, |pt| {
                let r = pt.iter().map(|x| x * x).sum::<f64>().sqrt();
                collision_frequency_nu_radial(d, r).expect("ν quadrature")
            })?;
            let kernel = boltzmann_kernel_basis(basis);
            // I - P
            let mut q = RMat::identity(n);
            for k in &kernel {
                for (i, &ki) in k.values().iter().enumerate() {
                    if ki == 0.0 {
                        continue;
                    }
                    for (j, &kj) in k.values().iter().enumerate() {
                        q.add_to(i, j, -ki * kj);
                    }
                }
            }
            let prod = q.matmul(&nu_hat).matmul(&q);
            let mut m = RMat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = -0.5 * (prod.get(i, j) + prod.get(j, i));
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            Ok(OperatorMatrix {
                matrix: m,
                model,
                basis: basis.clone(),
                kernel,
                weight,
                dissipation_weight: nu_hat,
            })
        }
    }
}

/// Orthonormal basis of the Boltzmann kernel: `φ_0`, the momentum modes
/// `φ_{e_i}`, and the normalized temperature direction
/// `(|ξ|²-d)M^{1/2}/√(2d)`.
pub fn boltzmann_kernel_basis(basis: &Arc<BasisTruncation>) -> Vec<CoeffVector<f64>> {
    let d = basis.dim();
    let mut kernel = vec![CoeffVector::unit(basis.clone(), 0)];
    for i in 0..d {
        let idx = index_of_axis_pow(basis, i, 1).expect("degree-1 mode");
        kernel.push(CoeffVector::unit(basis.clone(), idx));
    }
    let mut temp = CoeffVector::zeros(basis.clone());
    for i in 0..d {
        let idx = index_of_axis_pow(basis, i, 2).expect("degree-2 mode");
        temp.values_mut()[idx] = 1.0 / (d as f64).sqrt();
    }
    kernel.push(temp);
    kernel
}

/// Smallest generalized eigenvalue of `(A, W)` on the orthogonal complement
/// of `deflate`, by explicit deflation, the `W^{-1/2}` transform, and the
/// Jacobi eigensolver.
pub fn restricted_generalized_min_eigenvalue(
    a: &RMat,
    w: &RMat,
    deflate: &[CoeffVector<f64>],
) -> Result<f64> {
    let n = a.rows();
    let mut comp: Vec<Vec<f64>> = Vec::with_capacity(n - deflate.len());
    let mut held: Vec<Vec<f64>> = deflate.iter().map(|v| v.values().to_vec()).collect();
    for e in 0..n {
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        for h in &held {
            let proj: f64 = h.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, hi) in v.iter_mut().zip(h) {
                *vi -= proj * hi;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            comp.push(v.clone());
            held.push(v);
        }
    }
    let m = comp.len();
    let q = RMat::from_fn(n, m, |i, j| comp[j][i]);
    let a_r = q.transpose().matmul(a).matmul(&q);
    let w_r = q.transpose().matmul(w).matmul(&q);
    let s = symmetric_inverse_sqrt(&w_r)?;
    let c = s.matmul(&a_r).matmul(&s);
    let sym = RMat::from_fn(m, m, |i, j| 0.5 * (c.get(i, j) + c.get(j, i)));
    let (vals, _) = jacobi_eigen(&sym)?;
    Ok(vals[0])
}

/// Coercivity constant: the smallest generalized eigenvalue of
/// `(-L, dissipation weight)` on the complement of `ker L`. A value at or
/// below `1e-10` signals a broken operator assembly.
pub fn coercivity_constant(op: &OperatorMatrix) -> Result<f64> {
    let neg_l = op.matrix.scaled(-1.0);
    let lambda =
        restricted_generalized_min_eigenvalue(&neg_l, &op.dissipation_weight, &op.kernel)?;
    if lambda <= 1e-10 {
        return Err(Error::Numeric(format!(
            "coercivity constant {lambda:.3e} <= 1e-10: operator assembly is broken"
        )));
    }
    Ok(lambda)
}
