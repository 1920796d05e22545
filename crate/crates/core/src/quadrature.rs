//! Globally adaptive Gauss–Kronrod (7, 15)… (10, 21) quadrature.

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Rounding-error level of the rule; bisection cannot go below it.
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod rule on `[a, b]` with the QUADPACK error heuristic.
fn kronrod21<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        floor,
    })
}

/// Adaptive integration of a fallible integrand over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the sum
/// of estimates drops below `abs_tol` (or below twice the accumulated
/// rounding-error level, which bisection cannot reduce) or `max_panels` is
/// reached, in which case [`Error::ToleranceNotMet`] is returned.
pub fn try_integrate<F>(f: F, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<f64>,
{
    try_integrate_breaks(f, &[a, b], abs_tol, max_panels)
}

/// Like [`try_integrate`], starting from the panels delimited by `breaks`
/// (sorted, at least two points).
pub fn try_integrate_breaks<F>(f: F, breaks: &[f64], abs_tol: f64, max_panels: usize) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<f64>,
{
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod21(&f, w[0], w[1])?);
            evaluations += 21;
        }
    }
    loop {
        let total_err: f64 = heap.iter().map(|p| p.error).sum();
        let floor: f64 = heap.iter().map(|p| p.floor).sum();
        let goal = abs_tol.max(2.0 * floor);
        if total_err <= goal || heap.len() >= max_panels {
            let mut values: Vec<&Panel> = heap.iter().collect();
            values.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = values.iter().map(|p| p.value).collect::<NeumaierSum>().value();
            if total_err > goal {
                return Err(Error::ToleranceNotMet {
                    achieved: total_err,
                    target: abs_tol,
                });
            }
            return Ok(Quadrature {
                value,
                error: total_err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval exhausted at machine resolution.
            return Err(Error::ToleranceNotMet {
                achieved: total_err,
                target: abs_tol,
            });
        }
        heap.push(kronrod21(&f, worst.a, mid)?);
        heap.push(kronrod21(&f, mid, worst.b)?);
        evaluations += 42;
    }
}

/// Infallible convenience wrapper around [`try_integrate`].
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, abs_tol, max_panels)
}

/// Uniform break points `a, a + h, …, b` with `h ≤ max_width`.
pub fn uniform_breaks(a: f64, b: f64, max_width: f64) -> Vec<f64> {
    let n = ((b - a) / max_width).ceil().max(1.0) as usize;
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(20) - 3.0 * x.powi(7), -1.0, 2.0, 1e-8, 50).unwrap();
        let exact = (2.0_f64.powi(21) + 1.0) / 21.0 - 3.0 * (2.0_f64.powi(8) - 1.0) / 8.0;
        assert!((q.value - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn handles_peaked_integrand() {
        let eps = 1e-3;
        let q = integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0, 1e-12, 500).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((q.value - exact).abs() < 1e-11);
    }

    #[test]
    fn reports_unmet_tolerance() {
        let r = integrate(|x| (1.0 / x).sin(), 1e-8, 1.0, 1e-14, 4);
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn propagates_integrand_errors() {
        let r = try_integrate(
            |x| if x > 0.5 { Err(Error::domain("x")) } else { Ok(x) },
            0.0,
            1.0,
            1e-10,
            10,
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
