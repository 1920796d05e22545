//! Exact-formula building blocks.
//!
//! All functions here are pure. Removable singularities (`x = 0`, `ω = 0`,
//! `ξ = 0`) are handled by explicit Taylor branches, never by dividing two
//! small numbers.

use crate::sum::NeumaierSum;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this size the small parameter of a removable singularity is
/// replaced by a truncated Taylor expansion.
pub const REMOVABLE_EPS: f64 = 1e-6;

/// A point of the Gelfand spectrum `iℝ ∪ [−1, 1]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum SpectralPoint {
    /// `ω = iξ`, the principal series.
    Principal(f64),
    /// Real `ω ∈ [−1, 1]`, the complementary series.
    Complementary(f64),
}

impl SpectralPoint {
    pub fn principal(xi: f64) -> Self {
        SpectralPoint::Principal(xi)
    }

    pub fn complementary(omega: f64) -> crate::Result<Self> {
        if !(-1.0..=1.0).contains(&omega) {
            return Err(crate::Error::domain(format!(
                "complementary parameter {omega} outside [-1, 1]"
            )));
        }
        Ok(SpectralPoint::Complementary(omega))
    }

    /// Representative with a non-negative parameter; `φ_ω` is even in it.
    pub fn canonical(self) -> Self {
        match self {
            SpectralPoint::Principal(xi) => SpectralPoint::Principal(xi.abs()),
            SpectralPoint::Complementary(w) => SpectralPoint::Complementary(w.abs()),
        }
    }
}

impl PartialEq for SpectralPoint {
    fn eq(&self, other: &Self) -> bool {
        match (self.canonical(), other.canonical()) {
            (SpectralPoint::Principal(a), SpectralPoint::Principal(b)) => a == b,
            (SpectralPoint::Complementary(a), SpectralPoint::Complementary(b)) => a == b,
            // iξ = 0 = ω is the only shared point.
            (SpectralPoint::Principal(a), SpectralPoint::Complementary(b))
            | (SpectralPoint::Complementary(b), SpectralPoint::Principal(a)) => a == 0.0 && b == 0.0,
        }
    }
}

/// Rising factorial `a (a+1) ⋯ (a+j−1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: f64, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, k| acc * (a + k as f64))
}

/// `L_j^{(−1)}(x)` by the forward three-term recurrence
/// `n L_n = (2n − 2 − x) L_{n−1} − (n − 2) L_{n−2}`.
pub fn laguerre_neg1(j: u32, x: f64) -> f64 {
    LaguerreNeg1::new(x).nth(j as usize).unwrap_or(1.0)
}

/// `L_j^{(−1)}(x)` from the explicit finite sum
/// `(1/j!) Σ_m (−1)^m C(j,m) (m)_{j−m} x^m`.
///
/// Suffers cancellation for large `j` and positive `x`; kept as a reference
/// path for small degrees.
pub fn laguerre_neg1_explicit(j: u32, x: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    let mut binom = 1.0;
    for m in 0..=j {
        if m > 0 {
            binom *= (j - m + 1) as f64 / m as f64;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binom * pochhammer(m as f64, j - m) * x.powi(m as i32));
    }
    acc.value() / pochhammer(1.0, j)
}

/// Iterator over `L_0^{(−1)}(x), L_1^{(−1)}(x), …`.
#[derive(Debug, Clone)]
pub struct LaguerreNeg1 {
    x: f64,
    n: u32,
    prev: f64,
    curr: f64,
}

impl LaguerreNeg1 {
    pub fn new(x: f64) -> Self {
        Self {
            x,
            n: 0,
            prev: 0.0,
            curr: 1.0,
        }
    }
}

impl Iterator for LaguerreNeg1 {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.curr;
        let n = self.n + 1;
        let next = if n == 1 {
            -self.x
        } else {
            let nf = n as f64;
            ((2.0 * nf - 2.0 - self.x) * self.curr - (nf - 2.0) * self.prev) / nf
        };
        self.prev = self.curr;
        self.curr = next;
        self.n = n;
        Some(out)
    }
}

/// Chebyshev polynomial of the first kind, by recurrence.
pub fn chebyshev_t(n: u32, u: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => u,
        _ => {
            let (mut prev, mut curr) = (1.0, u);
            for _ in 1..n {
                let next = 2.0 * u * curr - prev;
                prev = curr;
                curr = next;
            }
            curr
        }
    }
}

/// `sinh(a)/a` for any real `a`.
pub(crate) fn sinhc(a: f64) -> f64 {
    if a.abs() < 1e-3 {
        let a2 = a * a;
        1.0 + a2 / 6.0 * (1.0 + a2 / 20.0 * (1.0 + a2 / 42.0))
    } else {
        a.sinh() / a
    }
}

/// `sin(a)/a` for any real `a`.
pub(crate) fn sinc(a: f64) -> f64 {
    if a.abs() < 1e-3 {
        let a2 = a * a;
        1.0 - a2 / 6.0 * (1.0 - a2 / 20.0 * (1.0 - a2 / 42.0))
    } else {
        a.sin() / a
    }
}

/// `1/sinh(x)` for `x > 0` without overflow.
fn csch_pos(x: f64) -> f64 {
    if x > 20.0 {
        let e = (-x).exp();
        2.0 * e / (1.0 - e * e)
    } else {
        1.0 / x.sinh()
    }
}

/// The spherical function `φ_ω(x)`.
///
/// `Complementary(ω)`: `sinh(ωx)/(ω sinh x)`; `Principal(ξ)`:
/// `sin(ξx)/(ξ sinh x)`. Both equal 1 at `x = 0`.
pub fn spherical_phi(w: SpectralPoint, x: f64) -> f64 {
    let x = x.abs();
    match w.canonical() {
        SpectralPoint::Complementary(omega) => {
            if x < REMOVABLE_EPS {
                let w2 = omega * omega;
                let x2 = x * x;
                1.0 + (w2 - 1.0) * x2 / 6.0 + (3.0 * w2 * w2 - 10.0 * w2 + 7.0) * x2 * x2 / 360.0
            } else if x > 20.0 {
                // e^{(ω−1)x} (1 − e^{−2ωx}) / (ω (1 − e^{−2x}))
                let num = if omega * x < 1e-3 {
                    2.0 * x * sinhc(omega * x) * (-omega * x).exp()
                } else {
                    -(-2.0 * omega * x).exp_m1() / omega
                };
                ((omega - 1.0) * x).exp() * num / (1.0 - (-2.0 * x).exp())
            } else {
                x * sinhc(omega * x) * csch_pos(x)
            }
        }
        SpectralPoint::Principal(xi) => {
            if x < REMOVABLE_EPS {
                let w2 = -xi * xi;
                let x2 = x * x;
                1.0 + (w2 - 1.0) * x2 / 6.0 + (3.0 * w2 * w2 - 10.0 * w2 + 7.0) * x2 * x2 / 360.0
            } else {
                x * sinc(xi * x) * csch_pos(x)
            }
        }
    }
}

/// `x coth x`, even, equal to 1 at the origin.
pub fn x_coth_x(x: f64) -> f64 {
    let x = x.abs();
    if x < REMOVABLE_EPS {
        let x2 = x * x;
        1.0 + x2 / 3.0 - x2 * x2 / 45.0
    } else {
        x * (1.0 + coth_minus_one(x))
    }
}

/// `coth x − 1 = 2/(e^{2x} − 1)` for `x > 0`.
pub(crate) fn coth_minus_one(x: f64) -> f64 {
    2.0 / (2.0 * x).exp_m1()
}

/// `ψ_t(x) = exp(t (1 − x coth x))`.
pub fn levy_exponent_psi(t: f64, x: f64) -> f64 {
    (t * (1.0 - x_coth_x(x))).exp()
}

/// `e^{−tx} Σ_{j=0}^{J} L_j^{(−1)}(2tx) e^{−2jx}`, a partial sum of the
/// generating-function expansion of `e^{−tx coth x}`.
pub fn generating_partial_sum(t: f64, x: f64, terms: u32) -> f64 {
    let ratio = (-2.0 * x).exp();
    let mut weight = 1.0;
    let mut acc = NeumaierSum::new();
    for l in LaguerreNeg1::new(2.0 * t * x).take(terms as usize + 1) {
        acc.add(l * weight);
        weight *= ratio;
    }
    (-t * x).exp() * acc.value()
}

/// Gamma function at a positive half-integer `k/2`.
fn gamma_half(k: u32) -> f64 {
    assert!(k > 0);
    let (mut g, mut a) = if k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while a + 0.5 < k as f64 / 2.0 {
        g *= a;
        a += 1.0;
    }
    g
}

/// Radial profile of the `d`-dimensional Cauchy semigroup density at time
/// `s`: `Γ((d+1)/2) π^{−(d+1)/2} s (s² + r²)^{−(d+1)/2}`.
pub fn cauchy_density(s: f64, d: u32, r: f64) -> f64 {
    let k = d + 1;
    let half = k as f64 / 2.0;
    gamma_half(k) * PI.powf(-half) * s * (s * s + r * r).powf(-half)
}
