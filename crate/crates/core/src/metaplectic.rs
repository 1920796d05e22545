//! The 4×4 symplectic matrix calculus around `e^{−t𝒜_α}`.
//!
//! Block matrices are written in 2×2 blocks, so "`C ⊗ I₂`" means the 4×4
//! matrix whose `(i, j)` block is `C_{ij} I₂`. The standard complex
//! structure is `𝒥₁ = (0, I₂; −I₂, 0)`.
//!
//! Note on signs: `I₄ + sin²(αt)/α · 𝒜_α𝒥_α + sin(αt)cos(αt)/α · 𝒜_α` is
//! `e^{+t𝒜_α}`; [`exp_neg_tA_closed`] flips the sign of the last term and
//! [`exp_tA_displayed`] keeps the `+` form.

#![allow(non_snake_case)]

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

pub type Sp4 = Matrix4<f64>;
pub type C2 = Matrix2<Complex64>;

/// Tolerance of the structural checks (block patterns, symplecticity).
pub const STRUCTURE_TOL: f64 = 1e-12;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// `A = (0, −1; 1, 0)`.
fn rot() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

fn blocks(ul: Matrix2<f64>, ur: Matrix2<f64>, ll: Matrix2<f64>, lr: Matrix2<f64>) -> Sp4 {
    let mut m = Sp4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&ul);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&ur);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&ll);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&lr);
    m
}

fn block(m: &Sp4, i: usize, j: usize) -> Matrix2<f64> {
    m.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
}

/// `C ⊗ I₂` in block layout.
pub fn kron_i2(c: &Matrix2<f64>) -> Sp4 {
    let i = Matrix2::identity();
    blocks(i * c[(0, 0)], i * c[(0, 1)], i * c[(1, 0)], i * c[(1, 1)])
}

/// The complex structure `𝒥₁`.
pub fn standard_j() -> Sp4 {
    let i = Matrix2::identity();
    blocks(Matrix2::zeros(), i, -i, Matrix2::zeros())
}

/// `(𝒜_α, 𝒥_α)` with `𝒜_α = (αA, I₂; −α²I₂, αA)` and
/// `𝒥_α = (0, I₂/α; −αI₂, 0)`.
pub fn build_generators(alpha: f64) -> Result<(Sp4, Sp4)> {
    check_alpha(alpha)?;
    let a = rot();
    let i = Matrix2::identity();
    let big_a = blocks(a * alpha, i, -i * (alpha * alpha), a * alpha);
    let big_j = blocks(Matrix2::zeros(), i / alpha, -i * alpha, Matrix2::zeros());
    Ok((big_a, big_j))
}

/// Largest relative error of `𝒜^{2j} = (−1)^{j−1}(2α)^{2j−1}𝒜𝒥` and
/// `𝒜^{2j−1} = (−1)^{j−1}(2α)^{2j−2}𝒜` over `j = 1..=max_j`.
pub fn power_identity_error(alpha: f64, max_j: u32) -> Result<f64> {
    let (a, j) = build_generators(alpha)?;
    let aj = a * j;
    let mut power = Sp4::identity();
    let mut worst: f64 = 0.0;
    for k in 1..=max_j {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        power *= a;
        let odd = a * (sign * (2.0 * alpha).powi(2 * k as i32 - 2));
        worst = worst.max((power - odd).norm() / odd.norm());
        power *= a;
        let even = aj * (sign * (2.0 * alpha).powi(2 * k as i32 - 1));
        worst = worst.max((power - even).norm() / even.norm());
    }
    Ok(worst)
}

/// `e^{−t𝒜_α} = I₄ + sin²(αt)/α · 𝒜_α𝒥_α − sin(αt)cos(αt)/α · 𝒜_α`.
pub fn exp_neg_tA_closed(alpha: f64, t: f64) -> Result<Sp4> {
    let (a, j) = build_generators(alpha)?;
    let (s, c) = (alpha * t).sin_cos();
    Ok(Sp4::identity() + a * j * (s * s / alpha) - a * (s * c / alpha))
}

/// The `+` form `I₄ + sin²(αt)/α · 𝒜_α𝒥_α + sin(αt)cos(αt)/α · 𝒜_α`,
/// which equals `e^{+t𝒜_α}`.
pub fn exp_tA_displayed(alpha: f64, t: f64) -> Result<Sp4> {
    exp_neg_tA_closed(alpha, -t)
}

/// Matrix exponential by scaling and squaring of a Taylor polynomial.
pub fn expm(m: &Sp4) -> Sp4 {
    let norm = m.norm();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings);
    let mut term = Sp4::identity();
    let mut sum = Sp4::identity();
    for k in 1..40 {
        term = term * scaled / k as f64;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// `e^{−t𝒜_α}` by [`expm`]; an oracle for [`exp_neg_tA_closed`].
pub fn exp_neg_tA_series(alpha: f64, t: f64) -> Result<Sp4> {
    let (a, _) = build_generators(alpha)?;
    Ok(expm(&(a * -t)))
}

/// `‖Sᵀ𝒥₁S − 𝒥₁‖`, zero for symplectic `S`.
pub fn symplectic_defect(s: &Sp4) -> f64 {
    let j = standard_j();
    (s.transpose() * j * s - j).norm()
}

/// `‖SSᵀ − I₄‖`.
pub fn orthogonality_defect(s: &Sp4) -> f64 {
    (s * s.transpose() - Sp4::identity()).norm()
}

/// The 2×2 core `C` of a matrix `C ⊗ I₂`, or a structure error.
pub fn kron_core(m: &Sp4, tol: f64) -> Result<Matrix2<f64>> {
    let core = Matrix2::new(m[(0, 0)], m[(0, 2)], m[(2, 0)], m[(2, 2)]);
    let defect = (m - kron_i2(&core)).norm();
    if defect > tol * m.norm().max(1.0) {
        return Err(Error::structure(format!(
            "matrix is not of the form C (x) I2 (defect {defect:e})"
        )));
    }
    Ok(core)
}

/// Both Gram products of `e^{−t𝒜_α}` with their 2×2 cores.
#[derive(Debug, Clone, PartialEq)]
pub struct GramProducts {
    /// `S Sᵀ`.
    pub left: Sp4,
    /// `Sᵀ S`.
    pub right: Sp4,
    pub left_core: Matrix2<f64>,
    pub right_core: Matrix2<f64>,
}

/// Expected core of `S Sᵀ` for `S = e^{−t𝒜_α}`:
/// `(c² + s²/α², −sc(1/α − α); −sc(1/α − α), c² + α²s²)`.
pub fn left_core_closed(alpha: f64, t: f64) -> Matrix2<f64> {
    let (s, c) = (alpha * t).sin_cos();
    let off = -s * c * (1.0 / alpha - alpha);
    Matrix2::new(c * c + s * s / (alpha * alpha), off, off, c * c + alpha * alpha * s * s)
}

/// `U = cos²(αt) I₂ − sin(αt)cos(αt) A` and `V = sin²(αt) A − sin(αt)cos(αt) I₂`,
/// the blocks of `e^{−t𝒜_α} = (U, V/α; −αV, U)`.
pub fn uv_blocks(alpha: f64, t: f64) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let s = exp_neg_tA_closed(alpha, t)?;
    Ok((block(&s, 0, 0), block(&s, 0, 1) * alpha))
}

/// Largest deviation from `UUᵀ = c² I₂`, `VVᵀ = s² I₂` and
/// `UVᵀ = UᵀV = −sc I₂`.
pub fn uv_relation_error(alpha: f64, t: f64) -> Result<f64> {
    let (u, v) = uv_blocks(alpha, t)?;
    let (s, c) = (alpha * t).sin_cos();
    let i = Matrix2::identity();
    let errs = [
        (u * u.transpose() - i * (c * c)).norm(),
        (v * v.transpose() - i * (s * s)).norm(),
        (u * v.transpose() + i * (s * c)).norm(),
        (u.transpose() * v + i * (s * c)).norm(),
    ];
    Ok(errs.into_iter().fold(0.0, f64::max))
}

pub fn gram_products(alpha: f64, t: f64) -> Result<GramProducts> {
    let s = exp_neg_tA_closed(alpha, t)?;
    let left = s * s.transpose();
    let right = s.transpose() * s;
    let left_core = kron_core(&left, STRUCTURE_TOL)?;
    let right_core = kron_core(&right, STRUCTURE_TOL)?;
    let uv = uv_relation_error(alpha, t)?;
    if uv > STRUCTURE_TOL {
        return Err(Error::structure(format!("U/V block relations fail by {uv:e}")));
    }
    Ok(GramProducts {
        left,
        right,
        left_core,
        right_core,
    })
}

/// `S = M · diag(λ₁I₂, λ₂I₂) · R` with `M`, `R` orthogonal and symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanFactors {
    pub m: Sp4,
    /// `λ₁ ≥ λ₂ > 0`, `λ₁λ₂ = 1`.
    pub lambdas: (f64, f64),
    pub r: Sp4,
}

impl CartanFactors {
    pub fn middle(&self) -> Sp4 {
        kron_i2(&Matrix2::new(self.lambdas.0, 0.0, 0.0, self.lambdas.1))
    }

    pub fn reassemble(&self) -> Sp4 {
        self.m * self.middle() * self.r
    }
}

/// Cartan decomposition of a symplectic `S` whose `SSᵀ` is `C ⊗ I₂`.
///
/// `SSᵀ = E diag(μ₁, μ₂) Eᵀ ⊗ I₂` with `E` a rotation (the identity on a
/// degenerate core), `M = E ⊗ I₂`, `λ_k = √μ_k` and `R = Mᵀ P⁻¹ S` with
/// `P = (SSᵀ)^{1/2}`.
pub fn cartan_decompose(s: &Sp4) -> Result<CartanFactors> {
    let scale = s.norm().max(1.0);
    let defect = symplectic_defect(s);
    if defect > STRUCTURE_TOL * scale * scale {
        return Err(Error::structure(format!("input is not symplectic (defect {defect:e})")));
    }
    let core = kron_core(&(s * s.transpose()), STRUCTURE_TOL)?;
    let (a, b, d) = (core[(0, 0)], 0.5 * (core[(0, 1)] + core[(1, 0)]), core[(1, 1)]);
    let det = a * d - b * b;
    let half_gap = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let mu1 = 0.5 * (a + d) + half_gap;
    let mu2 = det / mu1;
    let e = if half_gap <= STRUCTURE_TOL * mu1 {
        Matrix2::identity()
    } else {
        let theta = 0.5 * (2.0 * b).atan2(a - d);
        let (sn, cs) = theta.sin_cos();
        Matrix2::new(cs, -sn, sn, cs)
    };
    let (l1, l2) = (mu1.sqrt(), mu2.sqrt());
    let m = kron_i2(&e);
    let p_inv = m * kron_i2(&Matrix2::new(1.0 / l1, 0.0, 0.0, 1.0 / l2)) * m.transpose();
    let r = m.transpose() * p_inv * s;
    Ok(CartanFactors {
        m,
        lambdas: (l1, l2),
        r,
    })
}

/// `(G, F; −F, G) ↦ G + iF` for an orthogonal symplectic `Q`.
pub fn identify_u2(q: &Sp4) -> Result<C2> {
    let g = block(q, 0, 0);
    let f = block(q, 0, 1);
    let defect = (block(q, 1, 0) + f).norm() + (block(q, 1, 1) - g).norm();
    if defect > STRUCTURE_TOL {
        return Err(Error::structure(format!(
            "matrix is not of the form (G, F; -F, G) (defect {defect:e})"
        )));
    }
    Ok(C2::from_fn(|i, j| Complex64::new(g[(i, j)], f[(i, j)])))
}

pub fn det2(u: &C2) -> Complex64 {
    u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)]
}

/// `‖UU* − I₂‖`.
pub fn unitarity_defect(u: &C2) -> f64 {
    (u * u.adjoint() - C2::identity()).norm()
}

/// Scale a unitary by `det^{−1/2}` (principal root) so it lies in `SU(2)`.
pub fn normalize_phase(u: &C2) -> C2 {
    u / det2(u).sqrt()
}

/// The `SL(2,ℂ)` element `U_M diag(λ₁, 1/λ₁) U_R`, each `U(2)` image
/// normalised to determinant one by [`normalize_phase`].
pub fn assign_sl2c(factors: &CartanFactors) -> Result<C2> {
    let um = normalize_phase(&identify_u2(&factors.m)?);
    let ur = normalize_phase(&identify_u2(&factors.r)?);
    let l = factors.lambdas.0;
    let d = C2::new(
        Complex64::new(l, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0 / l, 0.0),
    );
    Ok(um * d * ur)
}

/// Singular values of a 2×2 complex matrix, largest first.
pub fn singular_values2(u: &C2) -> (f64, f64) {
    let h = u.adjoint() * u;
    let (a, d) = (h[(0, 0)].re, h[(1, 1)].re);
    let b = h[(0, 1)].norm();
    let tr = 0.5 * (a + d);
    let gap = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let s1 = (tr + gap).sqrt();
    let s2 = det2(u).norm() / s1;
    (s1, s2)
}

/// Everything the front end reports for one `(α, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub alpha: f64,
    pub t: f64,
    pub generator: Sp4,
    pub complex_structure: Sp4,
    pub exp_closed: Sp4,
    pub exp_series: Sp4,
    pub gram: GramProducts,
    pub cartan: CartanFactors,
    pub u2_m: C2,
    pub u2_r: C2,
    pub sl2c: C2,
    pub residuals: Residuals,
}

/// Invariant residuals of a [`Pipeline`]; each should be ≲ 1e-12.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub closed_vs_series: f64,
    pub j_squared: f64,
    pub symplectic: f64,
    pub core_det: f64,
    pub reassembly: f64,
    pub lambda_product: f64,
    pub orthogonality: f64,
    pub unitarity: f64,
    pub sl2c_det: f64,
    pub sl2c_singular_values: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        [
            self.closed_vs_series,
            self.j_squared,
            self.symplectic,
            self.core_det,
            self.reassembly,
            self.lambda_product,
            self.orthogonality,
            self.unitarity,
            self.sl2c_det,
            self.sl2c_singular_values,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn pipeline(alpha: f64, t: f64) -> Result<Pipeline> {
    let (generator, complex_structure) = build_generators(alpha)?;
    let exp_closed = exp_neg_tA_closed(alpha, t)?;
    let exp_series = exp_neg_tA_series(alpha, t)?;
    let gram = gram_products(alpha, t)?;
    let cartan = cartan_decompose(&exp_closed)?;
    let u2_m = identify_u2(&cartan.m)?;
    let u2_r = identify_u2(&cartan.r)?;
    let sl2c = assign_sl2c(&cartan)?;
    let (s1, s2) = singular_values2(&sl2c);
    let (l1, l2) = cartan.lambdas;
    let residuals = Residuals {
        closed_vs_series: (exp_closed - exp_series).amax(),
        j_squared: (complex_structure * complex_structure + Sp4::identity()).amax(),
        symplectic: symplectic_defect(&exp_closed),
        core_det: (gram.left_core.determinant() - 1.0).abs(),
        reassembly: (cartan.reassemble() - exp_closed).amax(),
        lambda_product: (l1 * l2 - 1.0).abs(),
        orthogonality: orthogonality_defect(&cartan.m).max(orthogonality_defect(&cartan.r)),
        unitarity: unitarity_defect(&u2_m).max(unitarity_defect(&u2_r)),
        sl2c_det: (det2(&sl2c) - 1.0).norm(),
        sl2c_singular_values: (s1 - l1).abs().max((s2 - 1.0 / l1).abs()),
    };
    Ok(Pipeline {
        alpha,
        t,
        generator,
        complex_structure,
        exp_closed,
        exp_series,
        gram,
        cartan,
        u2_m,
        u2_r,
        sl2c,
        residuals,
    })
}
