use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use sl2c_semigroup::special::{
    chebyshev_t, generating_partial_sum, laguerre_neg1, laguerre_neg1_explicit, levy_exponent_psi, x_coth_x,
};

/// `L_j^{(−1)}(x)` in exact rational arithmetic from the explicit finite sum.
fn laguerre_exact(j: u32, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut binom = BigInt::one();
    let mut xm = BigRational::one();
    for m in 0..=j {
        if m > 0 {
            binom = binom * BigInt::from(j - m + 1) / BigInt::from(m);
            xm = &xm * x;
        }
        let mut poch = BigInt::one();
        for k in 0..(j - m) {
            poch *= BigInt::from(m + k);
        }
        let term = BigRational::from_integer(&binom * poch) * &xm;
        if m % 2 == 0 {
            acc += term
        } else {
            acc -= term
        }
    }
    let mut fact = BigInt::one();
    for k in 2..=j {
        fact *= BigInt::from(k);
    }
    acc / BigRational::from_integer(fact)
}

/// `|x| e^{x/2}` bounds `|L_j^{(−1)}(x)|` for `x ≥ 0`; errors near the zeros
/// are measured against it rather than against the (tiny) value itself.
fn envelope(x: f64) -> f64 {
    if x > 0.0 {
        x * (x / 2.0).exp()
    } else {
        0.0
    }
}

#[test]
fn laguerre_recurrence_matches_exact_rational_sum() {
    let mut worst: f64 = 0.0;
    for j in 0..=60u32 {
        for k in -20..=20 {
            let x = k as f64 * 2.5;
            let exact = laguerre_exact(j, &BigRational::from_float(x).unwrap())
                .to_f64()
                .unwrap();
            let scale = exact.abs().max(envelope(x)).max(f64::MIN_POSITIVE);
            worst = worst.max((laguerre_neg1(j, x) - exact).abs() / scale);
        }
    }
    assert!(worst <= 1e-12, "worst scaled error {worst:e}");
}

#[test]
fn laguerre_bounded_by_envelope() {
    for j in 1..=60u32 {
        for k in 0..=40 {
            let x = k as f64 * 1.25;
            let exact = laguerre_exact(j, &BigRational::from_float(x).unwrap())
                .to_f64()
                .unwrap();
            assert!(exact.abs() <= envelope(x) * (1.0 + 1e-12) + 1e-300, "j={j} x={x}");
        }
    }
}

#[test]
fn laguerre_low_degrees() {
    // L_0 = 1, L_1 = −x, L_2 = x²/2 − x.
    for &x in &[-3.0, -0.5, 0.0, 0.7, 4.0] {
        assert_eq!(laguerre_neg1(0, x), 1.0);
        assert_eq!(laguerre_neg1(1, x), -x);
        assert!((laguerre_neg1(2, x) - (x * x / 2.0 - x)).abs() < 1e-14);
    }
}

#[test]
fn explicit_sum_agrees_for_small_degrees() {
    for j in 0..=12u32 {
        for &x in &[-2.0, -0.3, 0.4, 1.5, 3.0] {
            let a = laguerre_neg1(j, x);
            let b = laguerre_neg1_explicit(j, x);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "j={j} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn chebyshev_matches_cosine() {
    for n in 0..=40u32 {
        for k in 0..=50 {
            let a = std::f64::consts::PI * k as f64 / 50.0;
            let err = (chebyshev_t(n, a.cos()) - (n as f64 * a).cos()).abs();
            assert!(err <= 1e-13, "n={n} a={a}: {err:e}");
        }
    }
}

#[test]
fn generating_sum_error_decays() {
    for &t in &[0.25, 1.0, 2.0] {
        for &x in &[0.5, 1.0, 3.0] {
            let exact = (-t * x_coth_x(x)).exp();
            let errs: Vec<f64> = [5u32, 10, 20, 40, 80]
                .iter()
                .map(|&n| (generating_partial_sum(t, x, n) - exact).abs())
                .collect();
            for w in errs.windows(2) {
                assert!(w[1] <= w[0] || w[1] <= 1e-15, "t={t} x={x}: {errs:?}");
            }
            assert!(*errs.last().unwrap() <= 1e-13, "t={t} x={x}: {errs:?}");
        }
    }
}

proptest! {
    #[test]
    fn psi_is_even_and_bounded(t in 0.01f64..4.0, x in -30.0f64..30.0) {
        let a = levy_exponent_psi(t, x);
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert_eq!(a, levy_exponent_psi(t, -x));
    }

    #[test]
    fn psi_multiplicative_in_time(t in 0.01f64..2.0, s in 0.01f64..2.0, x in -10.0f64..10.0) {
        let lhs = levy_exponent_psi(t + s, x);
        let rhs = levy_exponent_psi(t, x) * levy_exponent_psi(s, x);
        prop_assert!((lhs - rhs).abs() <= 1e-14);
    }

    #[test]
    fn chebyshev_bounded_on_interval(n in 0u32..60, u in -1.0f64..1.0) {
        prop_assert!(chebyshev_t(n, u).abs() <= 1.0 + 1e-12);
    }
}
