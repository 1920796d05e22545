//! Monte Carlo estimate of the conditional characteristic function of the
//! Lévy stochastic area.
//!
//! For planar Brownian motion `B` with area `A = ½ ∫ (B¹ dB² − B² dB¹)`,
//!
//! ```text
//!   E[cos(2x A_1) | |B_1| = √(2t)] = φ_0(x) ψ_t(x).
//! ```
//!
//! Conditioning on the circle is replaced by an annulus of relative
//! half-width `b`; the `O(b²)` bias is removed by Richardson extrapolation
//! over `b` and `b/2`.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::special::{levy_exponent_psi, spherical_phi, SpectralPoint};
use crate::sum::NeumaierSum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaSimSpec {
    pub n_paths: usize,
    pub n_steps: usize,
    /// Relative half-width of the conditioning annulus.
    pub bandwidth: f64,
    pub seed: u64,
}

impl Default for AreaSimSpec {
    fn default() -> Self {
        Self {
            n_paths: 1_000_000,
            n_steps: 4096,
            bandwidth: 0.1,
            seed: 2024,
        }
    }
}

impl AreaSimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 || self.n_steps < 1 {
            return Err(Error::domain("need at least 2 paths and 1 step"));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth <= 0.2) {
            return Err(Error::domain(format!("bandwidth {} outside (0, 0.2]", self.bandwidth)));
        }
        Ok(())
    }
}

/// Endpoint radius `|B_1|` and area `A_1` of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub radius: f64,
    pub area: f64,
}

/// Simulate every path of `spec`.
///
/// Path `k` draws from its own ChaCha stream `k` under the common seed, and
/// the samples are returned in path order, so the result does not depend on
/// how the work was split between threads.
pub fn simulate_paths(spec: &AreaSimSpec, exec: Exec) -> Result<Vec<PathSample>> {
    spec.validate()?;
    let n = spec.n_steps;
    let sd = (1.0 / n as f64).sqrt();
    Ok(exec.map_range(spec.n_paths, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(k as u64);
        let (mut x, mut y) = (0.0_f64, 0.0_f64);
        let mut area = 0.0;
        for _ in 0..n {
            let dx = sd * Distribution::<f64>::sample(&StandardNormal, &mut rng);
            let dy = sd * Distribution::<f64>::sample(&StandardNormal, &mut rng);
            // Left-point and midpoint sums coincide: the dx·dy terms cancel.
            area += x * dy - y * dx;
            x += dx;
            y += dy;
        }
        PathSample {
            radius: x.hypot(y),
            area: 0.5 * area,
        }
    }))
}

/// Result of [`monte_carlo_levy_area`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaEstimate {
    /// Richardson-extrapolated estimate.
    pub estimate: f64,
    /// Standard error from batch means.
    pub stderr: f64,
    /// Plain annulus averages at `b` and `b/2`.
    pub raw_wide: f64,
    pub raw_narrow: f64,
    pub accepted_wide: usize,
    pub accepted_narrow: usize,
    pub acceptance_rate: f64,
    /// `φ_0(x) ψ_t(x)`.
    pub target: f64,
}

const MIN_ACCEPTANCE: f64 = 1e-4;
const BATCHES: usize = 100;

#[derive(Default)]
struct Annulus {
    sum: NeumaierSum,
    count: usize,
}

impl Annulus {
    fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum.value() / self.count as f64)
    }
}

/// Estimate `E[cos(2x A_1) | |B_1| ≈ √(2t)]` from pre-simulated paths.
pub fn estimate_from_samples(samples: &[PathSample], t: f64, x: f64, bandwidth: f64) -> Result<AreaEstimate> {
    if !(t > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("need t > 0 and finite x, got ({t}, {x})")));
    }
    let r0 = (2.0 * t).sqrt();
    let batch_len = samples.len().div_ceil(BATCHES);
    let mut wide = Annulus::default();
    let mut narrow = Annulus::default();
    let mut batch_estimates = Vec::with_capacity(BATCHES);
    for batch in samples.chunks(batch_len.max(1)) {
        let mut bw = Annulus::default();
        let mut bn = Annulus::default();
        for s in batch {
            let dev = (s.radius - r0).abs() / r0;
            if dev <= bandwidth {
                let c = (2.0 * x * s.area).cos();
                bw.sum.add(c);
                bw.count += 1;
                wide.sum.add(c);
                wide.count += 1;
                if dev <= 0.5 * bandwidth {
                    bn.sum.add(c);
                    bn.count += 1;
                    narrow.sum.add(c);
                    narrow.count += 1;
                }
            }
        }
        if let (Some(w), Some(n)) = (bw.mean(), bn.mean()) {
            batch_estimates.push((4.0 * n - w) / 3.0);
        }
    }
    let rate = narrow.count as f64 / samples.len().max(1) as f64;
    if rate < MIN_ACCEPTANCE || batch_estimates.len() < 2 {
        return Err(Error::InsufficientAcceptance { rate });
    }
    let raw_wide = wide.mean().unwrap_or(f64::NAN);
    let raw_narrow = narrow.mean().unwrap_or(f64::NAN);
    let m = batch_estimates.len() as f64;
    let mean = batch_estimates.iter().copied().collect::<NeumaierSum>().value() / m;
    let var = batch_estimates
        .iter()
        .map(|e| (e - mean) * (e - mean))
        .collect::<NeumaierSum>()
        .value()
        / (m - 1.0);
    Ok(AreaEstimate {
        estimate: (4.0 * raw_narrow - raw_wide) / 3.0,
        stderr: (var / m).sqrt(),
        raw_wide,
        raw_narrow,
        accepted_wide: wide.count,
        accepted_narrow: narrow.count,
        acceptance_rate: rate,
        target: spherical_phi(SpectralPoint::Complementary(0.0), x) * levy_exponent_psi(t, x),
    })
}

/// Simulate and estimate in one go.
pub fn monte_carlo_levy_area(t: f64, x: f64, spec: &AreaSimSpec, exec: Exec) -> Result<AreaEstimate> {
    let samples = simulate_paths(spec, exec)?;
    estimate_from_samples(&samples, t, x, spec.bandwidth)
}

impl AreaEstimate {
    /// `|estimate − target| ≤ max(3·stderr, 5% of |target|)`.
    pub fn agrees(&self) -> bool {
        (self.estimate - self.target).abs() <= (3.0 * self.stderr).max(0.05 * self.target.abs())
    }
}
