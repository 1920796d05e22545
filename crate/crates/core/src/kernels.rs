//! Densities of `q_t` and of the spherical kernels `P_t(ω, dξ)`.
//!
//! Every density is a real or imaginary part of a [`DoubleSeries`]:
//!
//! | quantity | series | part |
//! |---|---|---|
//! | `q_t(ξ)` | plain, rate offset `t` | `e^t/π · Re` |
//! | `∂_ξ q_t(ξ)` | differentiated, offset `t` | `−e^t/π · Im` |
//! | `I_t^∓(ω, ξ)` | plain, offset `t ∓ ω` | `Im` |
//! | `J_t(ω, ξ)` | plain, offset `t − ω`, no `m = 0` term | `Im` |
//!
//! All engines refuse to run outside the stability envelope `t ∈ (0, 4]`,
//! `|ξ| ≤ 40`, where the alternating outer sum starts losing digits.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{DensityGrid, GridSpec};
use crate::quadrature::{try_integrate_breaks, uniform_breaks};
use crate::series::{DoubleSeries, SeriesReport, TruncationPolicy};
use crate::special::{levy_exponent_psi, spherical_phi, SpectralPoint, REMOVABLE_EPS};
use crate::sum::NeumaierSum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MAX_T: f64 = 4.0;
pub const MAX_XI: f64 = 40.0;

/// Half-width of the integration window used for masses and
/// reconstructions. Every density is below `1e-15` beyond `|ξ| = 20` inside
/// the envelope, so the discarded tails are negligible.
pub const INTEGRATION_RADIUS: f64 = 30.0;

/// Absolute tolerance of the adaptive quadrature used for masses and
/// reconstructions.
pub const INTEGRATION_TOL: f64 = 1e-12;

fn check_envelope(t: f64, xi: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    if t > MAX_T || !(xi.abs() <= MAX_XI) {
        return Err(Error::domain(format!(
            "(t, xi) = ({t}, {xi}) outside the stability envelope t <= {MAX_T}, |xi| <= {MAX_XI}"
        )));
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if !omega.is_finite() {
        return Err(Error::domain(format!("omega must be finite, got {omega}")));
    }
    Ok(())
}

/// `q_t(ξ)` with the truncation report.
pub fn qt_density_with_report(t: f64, xi: f64, policy: &TruncationPolicy) -> Result<(f64, SeriesReport)> {
    check_envelope(t, xi)?;
    let (s, report) = DoubleSeries::plain(t, t, xi).evaluate(policy)?;
    let c = t.exp() / PI;
    Ok((c * s.re, report.scaled(c)))
}

/// The Lévy density `q_t(ξ)`, the inverse Fourier transform of `ψ_t`.
pub fn qt_density(t: f64, xi: f64, policy: &TruncationPolicy) -> Result<f64> {
    qt_density_with_report(t, xi, policy).map(|(v, _)| v)
}

/// `∂_ξ q_t(ξ)` from the sine-transform series (no finite differences).
pub fn qt_density_derivative(t: f64, xi: f64, policy: &TruncationPolicy) -> Result<f64> {
    check_envelope(t, xi)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let (s, _) = DoubleSeries::differentiated(t, t, xi).evaluate(policy)?;
    Ok(-t.exp() / PI * s.im)
}

/// Density of the Lévy measure, `(π/4) / sinh²(πξ/2)`.
pub fn levy_density_closed(xi: f64) -> Result<f64> {
    if xi == 0.0 || !xi.is_finite() {
        return Err(Error::domain(format!("Levy density needs finite xi != 0, got {xi}")));
    }
    // π e^{−2a} / (1 − e^{−2a})² with a = π|ξ|/2 avoids overflow.
    let a = 0.5 * PI * xi.abs();
    let e = (-2.0 * a).exp();
    let d = -(-2.0 * a).exp_m1();
    Ok(PI * e / (d * d))
}

fn levy_check(xi: f64) -> Result<f64> {
    if xi == 0.0 || !xi.is_finite() {
        return Err(Error::domain(format!("Levy density needs finite xi != 0, got {xi}")));
    }
    Ok(0.5 * xi)
}

/// `Σ_{j=1}^{J} (j² − a²)/(j² + a²)²` with `a = ξ/2`.
fn levy_partial(a: f64, terms: u64) -> f64 {
    (1..=terms)
        .map(|j| {
            let j = j as f64;
            let d = j * j + a * a;
            (j * j - a * a) / (d * d)
        })
        .collect::<NeumaierSum>()
        .value()
}

/// Partial sum `1/(πξ²) − (1/2π) Σ_{j=1}^{J} (j² − (ξ/2)²)/(j² + (ξ/2)²)²`.
pub fn levy_density_series(xi: f64, terms: u64) -> Result<f64> {
    let a = levy_check(xi)?;
    Ok(1.0 / (PI * xi * xi) - levy_partial(a, terms) / (2.0 * PI))
}

/// [`levy_density_series`] with the remainder `Σ_{j>J}` added by the
/// Euler–Maclaurin formula for `f(s) = Re (s + ia)^{−2}`.
pub fn levy_density_series_accelerated(xi: f64, terms: u64) -> Result<f64> {
    const B: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let a = levy_check(xi)?;
    let s = Complex64::new((terms + 1) as f64, a);
    let inv = s.inv();
    let inv2 = inv * inv;
    // ∫_s^∞ f + f(s)/2 + Σ_k B_{2k} Re s^{−(2k+1)}
    let mut tail = NeumaierSum::new();
    tail.add(inv.re);
    tail.add(0.5 * inv2.re);
    let mut pow = inv2 * inv;
    for b in B {
        tail.add(b * pow.re);
        pow *= inv2;
    }
    let total = levy_partial(a, terms) + tail.value();
    Ok(1.0 / (PI * xi * xi) - total / (2.0 * PI))
}

/// Density of the principal-series kernel `P_t(iω, dξ)`:
/// `ξ (q_t(ξ − ω) − q_t(ξ + ω)) / (2ω)`, and `−ξ ∂_ξ q_t(ξ)` at `ω = 0`.
pub fn principal_density(t: f64, omega: f64, xi: f64, policy: &TruncationPolicy) -> Result<f64> {
    check_omega(omega)?;
    check_envelope(t, xi.abs() + omega.abs())?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    if omega.abs() < REMOVABLE_EPS {
        return Ok(-xi * qt_density_derivative(t, xi, policy)?);
    }
    let lo = qt_density(t, xi - omega, policy)?;
    let hi = qt_density(t, xi + omega, policy)?;
    Ok(xi * (lo - hi) / (2.0 * omega))
}

/// Which of the two exponential shifts `e^{∓ωx}` an [`i_series`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    /// Rate offset `t − ω`.
    Minus,
    /// Rate offset `t + ω`.
    Plus,
}

/// `I_t^∓(ω, ξ) = ∫_0^∞ sin(ξx) e^{±ωx} e^{−tx coth x} dx` as a double series.
pub fn i_series(t: f64, omega: f64, xi: f64, sign: Sign, policy: &TruncationPolicy) -> Result<f64> {
    check_omega(omega)?;
    check_envelope(t, xi)?;
    let base = match sign {
        Sign::Minus => t - omega,
        Sign::Plus => t + omega,
    };
    if base < 0.0 {
        return Err(Error::domain(format!(
            "leading rate {base} of I_t is negative (t = {t}, omega = {omega})"
        )));
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    let (s, _) = DoubleSeries::plain(t, base, xi).evaluate(policy)?;
    Ok(s.im)
}

/// `J_t(ω, ξ)`: the part of `I_t^−` coming from `j ≥ 1` in the generating
/// expansion, i.e. `∫_0^∞ sin(ξx) e^{ωx} (e^{−tx coth x} − e^{−tx}) dx`.
pub fn j_series(t: f64, omega: f64, xi: f64, policy: &TruncationPolicy) -> Result<f64> {
    check_omega(omega)?;
    check_envelope(t, xi)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let series = DoubleSeries {
        skip_leading: true,
        ..DoubleSeries::plain(t, t - omega, xi)
    };
    let (s, _) = series.evaluate(policy)?;
    Ok(s.im)
}

/// Density of the complementary-series kernel `P_t(ω, dξ)` for `t ≥ |ω|`:
/// `ξ e^t (I_t^− − I_t^+) / (2πω)`.
pub fn complementary_density(t: f64, omega: f64, xi: f64, policy: &TruncationPolicy) -> Result<f64> {
    check_omega(omega)?;
    check_envelope(t, xi)?;
    if omega.abs() > 1.0 {
        return Err(Error::domain(format!(
            "complementary parameter {omega} outside [-1, 1]"
        )));
    }
    // The density is even in ω.
    let w = omega.abs();
    if t < w {
        return Err(Error::regime(format!(
            "t = {t} < |omega| = {w}: the kernel has an atom, use the subcritical decomposition"
        )));
    }
    if w < REMOVABLE_EPS {
        return principal_density(t, 0.0, xi, policy);
    }
    if xi == 0.0 {
        // ξ I_t^− tends to 1 when its leading rate t − ω vanishes.
        return Ok(if t == w { t.exp() / (2.0 * PI * w) } else { 0.0 });
    }
    let minus = i_series(t, w, xi, Sign::Minus, policy)?;
    let plus = i_series(t, w, xi, Sign::Plus, policy)?;
    Ok(xi * t.exp() * (minus - plus) / (2.0 * PI * w))
}

/// Density of `G_t(ω, dξ)`, the absolutely continuous part of the kernel
/// in the subcritical regime `0 < t < |ω|`.
pub fn subcritical_density(t: f64, omega: f64, xi: f64, policy: &TruncationPolicy) -> Result<f64> {
    let w = check_subcritical(t, omega)?;
    check_envelope(t, xi)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let j = j_series(t, w, xi, policy)?;
    let plus = i_series(t, w, xi, Sign::Plus, policy)?;
    let d = w - t;
    let elementary = xi / (xi * xi + d * d);
    Ok(xi * t.exp() * (j - plus + elementary) / (2.0 * PI * w))
}

fn check_subcritical(t: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let w = omega.abs();
    if w > 1.0 {
        return Err(Error::domain(format!(
            "complementary parameter {omega} outside [-1, 1]"
        )));
    }
    if !(t > 0.0) || t >= w {
        return Err(Error::regime(format!(
            "subcritical regime needs 0 < t < |omega|, got t = {t}, omega = {omega}"
        )));
    }
    Ok(w)
}

/// Point mass of a kernel: `mass · δ_{location}` on the spectral axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// The three spectral regimes of `P_t(ω, ·)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `ω ∈ iℝ`.
    Principal,
    /// Real `ω` with `t ≥ |ω|`.
    Complementary,
    /// Real `ω ≠ 0` with `0 < t < |ω|`: an atom splits off.
    Subcritical,
}

/// Lebesgue decomposition of `P_t(ω, ·)`: an optional atom plus a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDecomposition {
    pub regime: Regime,
    pub t: f64,
    pub point: SpectralPoint,
    pub policy: TruncationPolicy,
    pub atom: Option<Atom>,
}

/// Decompose `P_t(ω, ·)` for any point of the spectrum.
pub fn kernel_decomposition(t: f64, point: SpectralPoint, policy: &TruncationPolicy) -> Result<KernelDecomposition> {
    policy.validate()?;
    check_envelope(t, 0.0)?;
    let (regime, atom) = match point {
        SpectralPoint::Principal(w) => {
            check_omega(w)?;
            (Regime::Principal, None)
        }
        SpectralPoint::Complementary(w) => {
            check_omega(w)?;
            if w.abs() > 1.0 {
                return Err(Error::domain(format!("complementary parameter {w} outside [-1, 1]")));
            }
            if t >= w.abs() || w == 0.0 {
                (Regime::Complementary, None)
            } else {
                return subcritical_decomposition(t, w, policy);
            }
        }
    };
    Ok(KernelDecomposition {
        regime,
        t,
        point,
        policy: *policy,
        atom,
    })
}

/// Atom at `|ω| − t` with mass `e^t (|ω| − t)/|ω|`, plus the density of
/// `G_t(ω, ·)`.
pub fn subcritical_decomposition(t: f64, omega: f64, policy: &TruncationPolicy) -> Result<KernelDecomposition> {
    policy.validate()?;
    let w = check_subcritical(t, omega)?;
    let location = w - t;
    Ok(KernelDecomposition {
        regime: Regime::Subcritical,
        t,
        point: SpectralPoint::Complementary(omega),
        policy: *policy,
        atom: Some(Atom {
            location,
            mass: t.exp() * location / w,
        }),
    })
}

impl KernelDecomposition {
    fn omega(&self) -> f64 {
        match self.point {
            SpectralPoint::Principal(w) | SpectralPoint::Complementary(w) => w,
        }
    }

    /// The absolutely continuous density at `ξ`.
    pub fn density(&self, xi: f64) -> Result<f64> {
        let (t, w, p) = (self.t, self.omega(), &self.policy);
        match self.regime {
            Regime::Principal => principal_density(t, w, xi, p),
            Regime::Complementary => complementary_density(t, w, xi, p),
            Regime::Subcritical => subcritical_density(t, w, xi, p),
        }
    }

    pub fn density_grid(&self, spec: &GridSpec, exec: Exec) -> Result<DensityGrid> {
        DensityGrid::tabulate(spec, exec, |xi| self.density(xi))
    }

    /// `∫ f(ξ) density(ξ) dξ` over the integration window.
    pub fn integrate_against<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let r = INTEGRATION_RADIUS;
        let breaks = uniform_breaks(-r, r, 1.0);
        let q = try_integrate_breaks(|xi| Ok(f(xi) * self.density(xi)?), &breaks, INTEGRATION_TOL, 4000)?;
        Ok(q.value)
    }

    /// Atom mass plus the integral of the density; 1 for a probability
    /// kernel.
    pub fn total_mass(&self) -> Result<f64> {
        let atom = self.atom.map_or(0.0, |a| a.mass);
        Ok(atom + self.integrate_against(|_| 1.0)?)
    }

    /// `Σ atom · φ_{location}(x) + ∫ φ_{iξ}(x) density(ξ) dξ`, which should
    /// reproduce [`KernelDecomposition::target`].
    pub fn reconstruct(&self, x: f64) -> Result<f64> {
        let atom = self.atom.map_or(0.0, |a| {
            a.mass * spherical_phi(SpectralPoint::Complementary(a.location), x)
        });
        let continuous = self.integrate_against(|xi| spherical_phi(SpectralPoint::Principal(xi), x))?;
        Ok(atom + continuous)
    }

    /// `φ_ω(x) ψ_t(x)`.
    pub fn target(&self, x: f64) -> f64 {
        spherical_phi(self.point, x) * levy_exponent_psi(self.t, x)
    }
}

/// `∫ q_t(ω − ξ) ξ dξ`, equal to `ω` because the identity is harmonic.
pub fn harmonicity_integral(t: f64, omega: f64, policy: &TruncationPolicy) -> Result<f64> {
    check_omega(omega)?;
    let r = INTEGRATION_RADIUS;
    let breaks = uniform_breaks(omega - r, omega + r, 1.0);
    let q = try_integrate_breaks(
        |xi| Ok(qt_density(t, omega - xi, policy)? * xi),
        &breaks,
        INTEGRATION_TOL,
        4000,
    )?;
    Ok(q.value)
}

/// `∫ q_t(ξ) dξ` over the integration window.
pub fn qt_mass(t: f64, policy: &TruncationPolicy) -> Result<f64> {
    let r = INTEGRATION_RADIUS;
    let breaks = uniform_breaks(-r, r, 1.0);
    let q = try_integrate_breaks(|xi| qt_density(t, xi, policy), &breaks, INTEGRATION_TOL, 4000)?;
    Ok(q.value)
}

/// Kernel of the intertwining operator,
/// `(π/ω) sinh(πω) / (cosh(πω) + cosh(πx))`, with its `ω → 0` limit.
pub fn intertwining_kernel(omega: f64, x: f64) -> f64 {
    let w = omega.abs();
    let x = x.abs();
    // (π/ω) sinh(πω) = π² sinhc(πω)
    let num = PI * PI * crate::special::sinhc(PI * w);
    if PI * x > 30.0 {
        // Divide through by cosh(πx) to keep everything finite.
        let e = (-PI * x).exp();
        let ch = (PI * w).cosh();
        return num * 2.0 * e / (1.0 + e * e + 2.0 * ch * e);
    }
    num / ((PI * w).cosh() + (PI * x).cosh())
}

/// `|∫ p_t(ω, ξ) p_s(ξ, γ) dξ − p_{t+s}(ω, γ)|`, where `p` is the principal
/// density and `p_s(ξ, γ) = γ (q_s(γ − ξ) − q_s(γ + ξ)) / (2ξ)`.
///
/// The integral is a trapezoid sum over the points of `grid`, which is
/// spectrally accurate for these analytic, exponentially decaying
/// integrands.
pub fn chapman_kolmogorov_residual(
    t: f64,
    s: f64,
    omega: f64,
    gamma: f64,
    grid: &GridSpec,
    policy: &TruncationPolicy,
    exec: Exec,
) -> Result<f64> {
    check_envelope(t + s, 0.0)?;
    let points = grid.points();
    let values = exec.try_map(&points, |&xi| -> Result<f64> {
        if xi == 0.0 {
            return Ok(0.0);
        }
        Ok(principal_density(t, omega, xi, policy)? * principal_density(s, xi, gamma, policy)?)
    })?;
    let h = grid.step();
    let n = values.len();
    let mut acc = NeumaierSum::new();
    for (k, v) in values.iter().enumerate() {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        acc.add(w * v);
    }
    let lhs = h * acc.value();
    let rhs = principal_density(t + s, omega, gamma, policy)?;
    Ok((lhs - rhs).abs())
}
