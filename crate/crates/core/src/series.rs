//! The double-series engine behind every kernel.
//!
//! Every density in [`crate::kernels`] is a real or imaginary part of
//!
//! ```text
//!   S = Σ_{m≥0} w_m (−2t)^m Σ_{j≥0} (m)_j / j! · (2(j+m) + b − iξ)^{−(m+1+e)}
//! ```
//!
//! for a rate offset `b`, an extra power `e ∈ {0, 1}` and a weight `w_m`
//! that is either 1 or `m + 1`. The sum is taken with `m` outermost, where
//! the inner coefficients `(m)_j / j!` are non-negative.
//!
//! For `m ≥ 1` the inner sum is summed directly over `j + m < N` and the
//! remainder `Σ_{j ≥ N−m}` is obtained from the Euler–Maclaurin formula. The
//! summand is a polynomial of degree `m − 1` in `j` times a complex power,
//! so the Euler–Maclaurin integral has an exact finite antiderivative and
//! the Bernoulli corrections decay like `(m / N)^{2k}`.
//!
//! The outer sum is truncated at `M` once the majorant
//!
//! ```text
//!   Σ_{m≥M} w_m t^m / (2^{1+e} (m−1)!) · (u_m^{−s} + u_m^{1−s}/(s−1)),
//!   s = 2 + e,  u_m = m − max(0, −b)/2,
//! ```
//!
//! obtained from `C(n−1, m−1) ≤ u_n^{m−1}/(m−1)!` and `|2n + b − iξ| ≥ 2u_n`,
//! falls below half the target.

use crate::error::{Error, Result};
use crate::sum::{ComplexSum, NeumaierSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `B_2, B_4, …, B_14`.
const BERNOULLI: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Number of Bernoulli corrections applied; the next one is the error
/// estimate.
const EM_ORDER: usize = 6;

/// Truncation controls for the double series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Target error relative to the magnitude of the leading term.
    pub rel_tol: f64,
    /// Largest number of outer (`m`) terms.
    pub max_m: usize,
    /// Largest direct-summation cutoff `N` for the inner sums.
    pub max_j: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_m: 80,
            max_j: 400,
        }
    }
}

impl TruncationPolicy {
    pub fn new(rel_tol: f64, max_m: usize, max_j: usize) -> Result<Self> {
        let policy = Self { rel_tol, max_m, max_j };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::domain(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_m < 1 || self.max_j < 1 {
            return Err(Error::domain("max_m and max_j must be at least 1"));
        }
        Ok(())
    }
}

/// What was summed and how much is left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    /// Outer terms summed (`m = 0 … outer_terms − 1`).
    pub outer_terms: usize,
    /// Direct inner summation covers `j + m < inner_cutoff`.
    pub inner_cutoff: usize,
    /// Certified bound on the discarded outer terms.
    pub outer_tail_bound: f64,
    /// Size of the first omitted Euler–Maclaurin correction, summed over `m`.
    pub inner_tail_error: f64,
    /// Magnitude that `rel_tol` was applied to.
    pub scale: f64,
}

impl SeriesReport {
    pub fn error_bound(&self) -> f64 {
        self.outer_tail_bound + self.inner_tail_error
    }

    /// Report for `factor · S`.
    pub(crate) fn scaled(&self, factor: f64) -> SeriesReport {
        let f = factor.abs();
        SeriesReport {
            outer_tail_bound: f * self.outer_tail_bound,
            inner_tail_error: f * self.inner_tail_error,
            scale: f * self.scale,
            ..*self
        }
    }
}

/// One instance of the double series (see the module docs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DoubleSeries {
    pub t: f64,
    /// The rate of term `(j, m)` is `2(j + m) + base`.
    pub base: f64,
    pub xi: f64,
    /// Power is `m + 1 + extra_power`.
    pub extra_power: u32,
    /// Multiply outer term `m` by `m + 1`.
    pub linear_weight: bool,
    /// Drop the `m = 0` term.
    pub skip_leading: bool,
}

impl DoubleSeries {
    /// Series with unit weights and power `m + 1`.
    pub fn plain(t: f64, base: f64, xi: f64) -> Self {
        Self {
            t,
            base,
            xi,
            extra_power: 0,
            linear_weight: false,
            skip_leading: false,
        }
    }

    /// Series with weights `m + 1` and power `m + 2`.
    pub fn differentiated(t: f64, base: f64, xi: f64) -> Self {
        Self {
            extra_power: 1,
            linear_weight: true,
            ..Self::plain(t, base, xi)
        }
    }

    fn weight(&self, m: usize) -> f64 {
        if self.linear_weight {
            (m + 1) as f64
        } else {
            1.0
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::domain(format!("t must be positive, got {}", self.t)));
        }
        if !self.xi.is_finite() || !self.base.is_finite() {
            return Err(Error::domain("non-finite series parameter"));
        }
        if self.skip_leading {
            if 2.0 + self.base <= 0.0 {
                return Err(Error::domain(format!(
                    "rate 2 + {} of the first retained term is not positive",
                    self.base
                )));
            }
        } else if self.base < 0.0 || (self.base == 0.0 && self.xi == 0.0) {
            return Err(Error::domain(format!(
                "rate {} of the leading term must be positive (or zero with xi != 0)",
                self.base
            )));
        }
        Ok(())
    }

    /// Certified bound on `Σ_{m ≥ first} |outer term m|`, for `first ≥ 2`.
    pub fn outer_tail_bound(&self, first: usize) -> f64 {
        debug_assert!(first >= 2);
        let t = self.t;
        let s = 2.0 + self.extra_power as f64;
        let shift = 0.5 * (-self.base).max(0.0);
        // c_m = t^m / (2^{1+e} (m−1)!)
        let mut c = t / 2f64.powi(1 + self.extra_power as i32);
        for m in 1..first {
            c *= t / m as f64;
        }
        let mut total = NeumaierSum::new();
        let mut m = first;
        loop {
            let u = m as f64 - shift;
            let b = self.weight(m) * c * (u.powf(-s) + u.powf(1.0 - s) / (s - 1.0));
            total.add(b);
            let sum = total.value();
            if (b <= sum * 1e-17 && m as f64 > 2.0 * t + 2.0) || b == 0.0 || m > first + 2000 {
                break;
            }
            c *= t / m as f64;
            m += 1;
        }
        total.value()
    }

    /// Evaluate the complex sum `S` under `policy`.
    pub fn evaluate(&self, policy: &TruncationPolicy) -> Result<(Complex64, SeriesReport)> {
        policy.validate()?;
        self.validate()?;

        let lead = if self.skip_leading {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(self.base, -self.xi)
                .inv()
                .powi(1 + self.extra_power as i32)
        };
        let scale = if self.skip_leading {
            let w = Complex64::new(2.0 + self.base, -self.xi);
            2.0 * self.t * self.weight(1) * w.norm().powi(-(2 + self.extra_power as i32))
        } else {
            lead.norm()
        };
        let target = policy.rel_tol * scale;

        let max_m = policy.max_m.max(2);
        let (outer_terms, outer_tail_bound) = (2..=max_m)
            .map(|m| (m, self.outer_tail_bound(m)))
            .find(|&(_, bound)| bound <= 0.5 * target)
            .ok_or_else(|| Error::NonConvergence {
                what: "outer series (m)",
                achieved: self.outer_tail_bound(max_m),
                target: 0.5 * target,
            })?;

        let mut cutoff = (2 * outer_terms + 40).max(64).min(policy.max_j);
        if cutoff < outer_terms + 16 {
            return Err(Error::NonConvergence {
                what: "inner cutoff (max_j) too small for the outer terms",
                achieved: f64::INFINITY,
                target: 0.5 * target,
            });
        }
        loop {
            let (value, inner_err) = self.sum_with_cutoff(outer_terms, cutoff, lead);
            if inner_err.is_finite() && inner_err <= 0.5 * target {
                let report = SeriesReport {
                    outer_terms,
                    inner_cutoff: cutoff,
                    outer_tail_bound,
                    inner_tail_error: inner_err,
                    scale,
                };
                return Ok((value, report));
            }
            if cutoff >= policy.max_j {
                return Err(Error::NonConvergence {
                    what: "inner Euler-Maclaurin tail",
                    achieved: inner_err,
                    target: 0.5 * target,
                });
            }
            cutoff = (cutoff * 2).min(policy.max_j);
        }
    }

    /// Outer terms `m < outer_terms`, inner cutoff `j + m < cutoff` plus the
    /// Euler–Maclaurin tail. Returns the sum and the tail error estimate.
    fn sum_with_cutoff(&self, outer_terms: usize, cutoff: usize, lead: Complex64) -> (Complex64, f64) {
        let t = self.t;
        let e = self.extra_power as i32;
        let minus_two_t = -2.0 * t;

        // Direct part, organised by n = j + m so each rate is inverted once.
        let mut direct = vec![ComplexSum::default(); outer_terms];
        for n in 1..cutoff {
            let z = Complex64::new(2.0 * n as f64 + self.base, -self.xi).inv();
            let mut term = z.powi(2 + e) * minus_two_t;
            let top = n.min(outer_terms - 1);
            for (m, slot) in direct.iter_mut().enumerate().take(top + 1).skip(1) {
                slot.add(term);
                if m < top {
                    term *= z * (minus_two_t * (n - m) as f64 / m as f64);
                }
            }
        }

        // Euler–Maclaurin tails. All inner tails start at the same rate
        // 2N + base, so the scaled variable is shared across m.
        let w_cut = Complex64::new(2.0 * cutoff as f64 + self.base, -self.xi);
        let rho = w_cut.norm();
        let w_hat = w_cut / rho;
        let w_hat_inv = w_hat.inv();
        let taylor_len = 2 * EM_ORDER + 2;
        let rho_pref = rho.powi(-(1 + e));
        let rho_inv2 = rho.powi(-2);

        // (−2t)^m P̂_m(y), with P̂_m(y) = Π_{k=N−m+1}^{N−1} (k/ρ + y) / (m−1)!.
        let mut poly: Vec<f64> = vec![minus_two_t];
        let mut total = ComplexSum::default();
        total.add(lead);
        let mut err = 0.0;
        let mut a = vec![Complex64::new(0.0, 0.0); taylor_len];
        let mut g = vec![Complex64::new(0.0, 0.0); taylor_len];

        for (m, direct_m) in direct.iter().enumerate().skip(1) {
            let p = m as i32 + 1 + e;

            // Exact ∫_J^∞ by repeated integration by parts.
            let mut integral = Complex64::new(0.0, 0.0);
            let mut coef = 1.0 / (2.0 * (p - 1) as f64);
            let mut power = w_hat_inv.powi(p - 1);
            for (k, &pk) in poly.iter().enumerate() {
                integral += power * (coef * pk);
                coef *= (k + 1) as f64 / (2.0 * (p - k as i32 - 2) as f64);
                power *= w_hat;
            }

            // Taylor coefficients of (ŵ + 2y)^{−p}, then of G = P̂ (ŵ + 2y)^{−p}.
            a[0] = w_hat_inv.powi(p);
            for l in 0..taylor_len - 1 {
                a[l + 1] = a[l] * w_hat_inv * (-2.0 * (p + l as i32) as f64 / (l + 1) as f64);
            }
            for (n, gn) in g.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..=n.min(poly.len() - 1) {
                    acc += a[n - k] * poly[k];
                }
                *gn = acc;
            }

            let mut tail = integral + g[0] / (2.0 * rho);
            let mut rho_pow = 1.0;
            for k in 1..=EM_ORDER {
                rho_pow *= rho_inv2;
                tail -= g[2 * k - 1] * (BERNOULLI[k - 1] / (2 * k) as f64 * rho_pow);
            }
            let next = g[2 * EM_ORDER + 1].norm()
                * (BERNOULLI[EM_ORDER] / (2 * EM_ORDER + 2) as f64).abs()
                * rho_pow
                * rho_inv2;

            let weight = self.weight(m);
            total.add((direct_m.value() + tail * rho_pref) * weight);
            err += weight * next * rho_pref;

            // P̂_{m+1} = P̂_m · ((N − m)/ρ + y) · (−2t) / m
            let shift = (cutoff - m) as f64 / rho;
            let factor = minus_two_t / m as f64;
            let mut next_poly = vec![0.0; poly.len() + 1];
            for (k, &pk) in poly.iter().enumerate() {
                next_poly[k] += pk * shift * factor;
                next_poly[k + 1] += pk * factor;
            }
            poly = next_poly;
        }
        (total.value(), err)
    }
}
