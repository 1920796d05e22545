//! Independent ground truth: oscillatory Fourier quadrature and numeric
//! convolution.
//!
//! None of these routines touch the double series, so agreement between
//! them and [`crate::kernels`] is a genuine cross-check.

use crate::error::{Error, Result};
use crate::grid::DensityGrid;
use crate::quadrature::{try_integrate, try_integrate_breaks, uniform_breaks};
use crate::special::{levy_exponent_psi, spherical_phi, x_coth_x, SpectralPoint};
use crate::sum::NeumaierSum;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Controls for the oscillatory quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    /// The integral is cut at `X = 1 + stretch · cutoff_log / rate`, where
    /// the integrand has decayed by `e^{−cutoff_log}`.
    pub cutoff_log: f64,
    pub cutoff_stretch: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            cutoff_log: 37.0,
            cutoff_stretch: 1.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.cutoff_log > 0.0) || !(self.cutoff_stretch >= 1.0) {
            return Err(Error::domain(format!("invalid quadrature spec {self:?}")));
        }
        Ok(())
    }

    fn cutoff(&self, rate: f64) -> f64 {
        1.0 + self.cutoff_stretch * self.cutoff_log / rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    Cos,
    Sin,
}

/// Above this frequency the half-period integrals are summed with
/// alternating-series acceleration and early stopping.
const ACCELERATE_ABOVE: f64 = 5.0;

/// `∫_0^X kernel(ξx) f(x) dx` for a smooth, decaying `f`.
///
/// The range is split at the zeros of the kernel, and each half period is
/// integrated adaptively with a share of the tolerance proportional to its
/// length.
fn oscillatory<F>(f: F, kernel: Kernel, xi: f64, cutoff: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let w = xi.abs();
    let sign = if kernel == Kernel::Sin && xi < 0.0 { -1.0 } else { 1.0 };
    let g = |x: f64| match kernel {
        Kernel::Cos => (w * x).cos() * f(x),
        Kernel::Sin => (w * x).sin() * f(x),
    };
    if w == 0.0 {
        if kernel == Kernel::Sin {
            return Ok(0.0);
        }
        let q = try_integrate_breaks(|x| Ok(g(x)), &uniform_breaks(0.0, cutoff, 1.0), abs_tol, 20_000)?;
        return Ok(q.value);
    }

    let offset = if kernel == Kernel::Cos { 0.5 } else { 0.0 };
    let half_period = PI / w;
    let mut segments = vec![0.0];
    let mut k = if offset == 0.0 { 1.0 } else { offset };
    while k * half_period < cutoff {
        segments.push(k * half_period);
        k += 1.0;
    }
    segments.push(cutoff);

    let accelerate = w > ACCELERATE_ABOVE;
    let mut total = NeumaierSum::new();
    let mut partial = Vec::new();
    let mut small_run = 0;
    for s in segments.windows(2) {
        let (a, b) = (s[0], s[1]);
        let tol = abs_tol * (b - a) / cutoff;
        let q = try_integrate_breaks(|x| Ok(g(x)), &uniform_breaks(a, b, 1.0), tol, 2_000)?;
        total.add(q.value);
        partial.push(total.value());
        if accelerate {
            small_run = if q.value.abs() < 0.01 * abs_tol {
                small_run + 1
            } else {
                0
            };
            if small_run >= 2 && partial.len() >= 8 {
                return Ok(sign * iterated_average(&partial[partial.len() - 8..]));
            }
        }
    }
    Ok(sign * total.value())
}

/// Repeated pairwise averaging of consecutive partial sums; cancels the
/// leading oscillation of an alternating series.
fn iterated_average(partial: &[f64]) -> f64 {
    let mut s = partial.to_vec();
    while s.len() > 1 {
        s = s.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    s[0]
}

/// `q_t(ξ) = (e^t/π) ∫_0^X cos(ξx) e^{−tx coth x} dx` by quadrature.
pub fn fourier_invert_psi(t: f64, xi: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !(t > 0.0 && t.is_finite()) || !xi.is_finite() {
        return Err(Error::domain(format!("need t > 0 and finite xi, got ({t}, {xi})")));
    }
    // e^t e^{−tx coth x} = ψ_t(x) ≤ e^t e^{−tx}.
    let cutoff = spec.cutoff(t);
    let v = oscillatory(|x| levy_exponent_psi(t, x), Kernel::Cos, xi, cutoff, spec.abs_tol * PI)?;
    Ok(v / PI)
}

/// Weights `g(x)` for the sine transforms `∫_0^∞ sin(ξx) g(x) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FourierWeight {
    /// `e^{ax} e^{−tx coth x}`; gives `I_t^−(a, ξ)` (and `I_t^+` for `−a`).
    Exp,
    /// `e^{ax} (e^{−tx coth x} − e^{−tx})`; gives `J_t(a, ξ)`.
    ExpRemainder,
    /// `(e^{ax} − e^{−ax}) e^{−tx coth x}`; gives `I_t^− − I_t^+`.
    SinhShift,
    /// `e^{ax}(e^{−tx coth x} − e^{−tx}) − (e^{−ax} e^{−tx coth x} − e^{(t−a)x})`;
    /// gives `J_t − K_t` in the subcritical regime `0 < t < a`.
    DiffShift,
}

impl FourierWeight {
    /// Exponential decay rate of the weight.
    fn rate(self, t: f64, a: f64) -> f64 {
        match self {
            FourierWeight::Exp => t - a,
            FourierWeight::ExpRemainder => 2.0 + t - a,
            FourierWeight::SinhShift => t - a.abs(),
            FourierWeight::DiffShift => (a - t).min(2.0 + t - a),
        }
    }

    fn eval(self, t: f64, a: f64, x: f64) -> f64 {
        // e^{−tx coth x} = e^{−tx} e^{−t x (coth x − 1)}
        let excess = x_coth_x(x) - x;
        let remainder = |b: f64| ((b - t) * x).exp() * (-t * excess).exp_m1();
        let full = |b: f64| (b * x - t * x_coth_x(x)).exp();
        match self {
            FourierWeight::Exp => full(a),
            FourierWeight::ExpRemainder => remainder(a),
            FourierWeight::SinhShift => full(a) - full(-a),
            FourierWeight::DiffShift => remainder(a) - (full(-a) - ((t - a) * x).exp()),
        }
    }
}

/// `∫_0^X sin(ξx) g(x) dx` for the chosen weight.
pub fn fourier_invert_weighted(t: f64, a: f64, xi: f64, weight: FourierWeight, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !(t > 0.0) || !a.is_finite() || !xi.is_finite() {
        return Err(Error::domain(format!(
            "need t > 0 and finite a, xi; got ({t}, {a}, {xi})"
        )));
    }
    if weight == FourierWeight::DiffShift && !(t < a) {
        return Err(Error::domain(format!(
            "diff_shift needs 0 < t < a, got t = {t}, a = {a}"
        )));
    }
    let rate = weight.rate(t, a);
    if !(rate > 0.0) {
        return Err(Error::domain(format!(
            "{weight:?} weight does not decay for t = {t}, a = {a}"
        )));
    }
    // The slack absorbs the prefactor of the exponential envelope.
    let cutoff = 1.0 + spec.cutoff_stretch * (spec.cutoff_log + 4.0) / rate;
    oscillatory(|x| weight.eval(t, a, x), Kernel::Sin, xi, cutoff, spec.abs_tol)
}

/// `∫ φ_{iω}(u) e^{iux} du = 2 ∫_0^∞ φ_{iω}(u) cos(ux) du` by quadrature.
pub fn intertwining_quadrature(omega: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    // φ_{iω}(u) ≤ 2u e^{−u} (1 + |ω|u)…; e^{−u} at u = 45 is below 1e−19.
    let cutoff = 45.0 * spec.cutoff_stretch;
    let v = oscillatory(
        |u| spherical_phi(SpectralPoint::Principal(omega), u),
        Kernel::Cos,
        x,
        cutoff,
        0.5 * spec.abs_tol,
    )?;
    Ok(2.0 * v)
}

/// `∫_0^∞ φ_0(x) ψ_s(x) e^{−s} ds` by quadrature in `s`; equals `sech x`.
pub fn gaussian_average_sech(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !x.is_finite() {
        return Err(Error::domain(format!("x must be finite, got {x}")));
    }
    // ψ_s(x) e^{−s} = e^{−s x coth x}
    let c = x_coth_x(x);
    let cutoff = spec.cutoff(c);
    let phi0 = spherical_phi(SpectralPoint::Complementary(0.0), x);
    let q = try_integrate(|s| Ok((-s * c).exp()), 0.0, cutoff, spec.abs_tol, 2_000)?;
    Ok(phi0 * q.value)
}

/// Trapezoid-rule convolution `(f ⋆ g)(z) = ∫ f(y) g(z − y) dy` of two grids
/// with a common uniform step `h`.
///
/// The result lives on `f.x_0 + g.x_0 + kh`; at each output point the
/// trapezoid rule is applied over the overlap of the two supports, so the
/// error is `O(h²)` (spectrally small for smooth functions that vanish at
/// the ends).
pub fn convolve(f: &DensityGrid, g: &DensityGrid) -> Result<DensityGrid> {
    let hf = f
        .uniform_step()
        .ok_or_else(|| Error::GridMismatch("first grid is not uniform".into()))?;
    let hg = g
        .uniform_step()
        .ok_or_else(|| Error::GridMismatch("second grid is not uniform".into()))?;
    if (hf - hg).abs() > 1e-9 * hf {
        return Err(Error::GridMismatch(format!("steps differ: {hf} vs {hg}")));
    }
    let h = hf;
    let (fv, gv) = (f.values(), g.values());
    let (nf, ng) = (fv.len(), gv.len());
    let origin = f.points()[0] + g.points()[0];
    let n = nf + ng - 1;
    let mut points = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let lo = k.saturating_sub(ng - 1);
        let hi = k.min(nf - 1);
        let mut acc = NeumaierSum::new();
        for i in lo..=hi {
            let w = if hi > lo && (i == lo || i == hi) { 0.5 } else { 1.0 };
            acc.add(w * fv[i] * gv[k - i]);
        }
        points.push(origin + k as f64 * h);
        values.push(h * acc.value());
    }
    DensityGrid::new(points, values)
}
