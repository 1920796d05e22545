//! Named check suites with pinned tolerances.

use crate::error::Result;
use crate::exec::Exec;
use crate::grid::{DensityGrid, GridSpec};
use crate::kernels::{
    self, chapman_kolmogorov_residual, complementary_density, harmonicity_integral, i_series, intertwining_kernel,
    j_series, kernel_decomposition, levy_density_closed, levy_density_series_accelerated, qt_density,
    qt_density_derivative, subcritical_decomposition, subcritical_density, Sign,
};
use crate::metaplectic;
use crate::montecarlo::{estimate_from_samples, simulate_paths, AreaSimSpec};
use crate::oracle::{
    convolve, fourier_invert_psi, fourier_invert_weighted, gaussian_average_sech, intertwining_quadrature,
    FourierWeight, QuadratureSpec,
};
use crate::quadrature::{try_integrate_breaks, uniform_breaks};
use crate::series::TruncationPolicy;
use crate::special::{levy_exponent_psi, SpectralPoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Pinned tolerances.
pub mod tol {
    pub const QT_ORACLE: f64 = 1e-8;
    pub const MASS: f64 = 1e-8;
    pub const POSITIVITY: f64 = 1e-10;
    pub const SEMIGROUP: f64 = 1e-6;
    pub const VAGUE_LIMIT_REL: f64 = 0.02;
    pub const LEVY_SERIES: f64 = 1e-8;
    pub const DERIVATIVE_IDENTITY: f64 = 1e-8;
    pub const RECONSTRUCTION: f64 = 1e-8;
    pub const HARMONICITY: f64 = 1e-8;
    pub const CHAPMAN_KOLMOGOROV: f64 = 1e-6;
    pub const INTERTWINING: f64 = 1e-10;
    pub const REFLECTION: f64 = 1e-12;
    pub const WEIGHTED_ORACLE: f64 = 1e-9;
    pub const SUBCRITICAL_MASS: f64 = 1e-7;
    pub const SUBCRITICAL_RECONSTRUCTION: f64 = 1e-7;
    pub const ATOM_MASS: f64 = 1e-15;
    pub const CONTINUITY: f64 = 1e-6;
    pub const MATRIX: f64 = 1e-12;
    pub const POWER_IDENTITY_REL: f64 = 1e-10;
    pub const GAUSSIAN_AVERAGE: f64 = 1e-8;
    pub const MC_REL: f64 = 0.05;
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub target: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes iff `|measured − target| ≤ tolerance`.
    pub fn new(name: impl Into<String>, target: f64, measured: f64, tolerance: f64) -> Self {
        let passed = (measured - target).abs() <= tolerance;
        Self {
            name: name.into(),
            target,
            measured,
            tolerance,
            passed,
        }
    }

    /// A check whose outcome is an error: recorded as failed with a NaN
    /// measurement.
    fn errored(name: impl Into<String>, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            target,
            measured: f64::NAN,
            tolerance,
            passed: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Qt,
    Principal,
    Complementary,
    Subcritical,
    Metaplectic,
    Montecarlo,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Qt,
        Suite::Principal,
        Suite::Complementary,
        Suite::Subcritical,
        Suite::Metaplectic,
        Suite::Montecarlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Qt => "qt",
            Suite::Principal => "principal",
            Suite::Complementary => "complementary",
            Suite::Subcritical => "subcritical",
            Suite::Metaplectic => "metaplectic",
            Suite::Montecarlo => "montecarlo",
        }
    }

    pub fn is_slow(self) -> bool {
        self == Suite::Montecarlo
    }
}

/// Deliberate perturbations used to show that a suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Fault {
    /// Evaluate `q_t` at `t + shift` inside the `qt` suite.
    QtTimeShift(f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub policy: TruncationPolicy,
    pub quadrature: QuadratureSpec,
    pub exec: Exec,
    pub fault: Option<Fault>,
    /// Extra metaplectic point reported alongside the lattice.
    pub metaplectic_point: Option<(f64, f64)>,
    pub area: AreaSimSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Record `f`'s value as a check; an error fails the check.
fn check(
    checks: &mut Vec<Check>,
    name: impl Into<String>,
    target: f64,
    tolerance: f64,
    f: impl FnOnce() -> Result<f64>,
) {
    let name = name.into();
    checks.push(match f() {
        Ok(v) => Check::new(name, target, v, tolerance),
        Err(_) => Check::errored(name, target, tolerance),
    });
}

pub fn run(suite: Suite, config: &VerifyConfig) -> Report {
    let checks = match suite {
        Suite::Qt => qt_suite(config),
        Suite::Principal => principal_suite(config),
        Suite::Complementary => complementary_suite(config),
        Suite::Subcritical => subcritical_suite(config),
        Suite::Metaplectic => metaplectic_suite(config),
        Suite::Montecarlo => montecarlo_suite(config),
    };
    Report {
        suite: suite.name().to_string(),
        checks,
    }
}

pub const QT_TIMES: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

/// `ξ = −10, −9.8, …, 10`.
pub fn oracle_grid() -> GridSpec {
    GridSpec {
        min: -10.0,
        max: 10.0,
        n: 101,
    }
}

/// Sup-norm of `q_{t+δ} ⋆ q_{s+δ} − q_{t+s}` on `[−8, 8]`, with the
/// convolution taken on `[−24, 24]` at `h = 1/64` (the density is below
/// `1e−30` outside, so no tail correction is needed at this accuracy).
pub fn semigroup_defect(t: f64, s: f64, shift: f64, policy: &TruncationPolicy, exec: Exec) -> Result<f64> {
    let spec = GridSpec::new(-24.0, 24.0, 48 * 64 + 1)?;
    let f = DensityGrid::tabulate(&spec, exec, |xi| qt_density(t + shift, xi, policy))?;
    let g = DensityGrid::tabulate(&spec, exec, |xi| qt_density(s + shift, xi, policy))?;
    let c = convolve(&f, &g)?;
    let inside: Vec<(f64, f64)> = c.iter().filter(|(x, _)| x.abs() <= 8.0 + 1e-9).collect();
    let errs = exec.try_map(&inside, |&(x, v)| qt_density(t + s, x, policy).map(|q| (v - q).abs()))?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// `∫ sin(ξx) ∂_ξ q_t(ξ) dξ`, which equals `−x ψ_t(x)`.
pub fn derivative_sine_transform(t: f64, x: f64, policy: &TruncationPolicy) -> Result<f64> {
    let r = kernels::INTEGRATION_RADIUS;
    let q = try_integrate_breaks(
        |xi| Ok((xi * x).sin() * qt_density_derivative(t, xi, policy)?),
        &uniform_breaks(-r, r, 1.0),
        kernels::INTEGRATION_TOL,
        4000,
    )?;
    Ok(q.value)
}

fn qt_suite(config: &VerifyConfig) -> Vec<Check> {
    let p = &config.policy;
    let shift = match config.fault {
        Some(Fault::QtTimeShift(d)) => d,
        None => 0.0,
    };
    let q = |t: f64, xi: f64| qt_density(t + shift, xi, p);
    let mut out = Vec::new();
    let points = oracle_grid().points();
    for &t in &QT_TIMES {
        check(
            &mut out,
            format!("qt.oracle_agreement[t={t}]"),
            0.0,
            tol::QT_ORACLE,
            || {
                let errs = config.exec.try_map(&points, |&xi| {
                    Ok::<_, crate::Error>((q(t, xi)? - fourier_invert_psi(t, xi, &config.quadrature)?).abs())
                })?;
                Ok(errs.into_iter().fold(0.0, f64::max))
            },
        );
        check(&mut out, format!("qt.mass[t={t}]"), 1.0, tol::MASS, || {
            let r = kernels::INTEGRATION_RADIUS;
            let v = try_integrate_breaks(
                |xi| q(t, xi),
                &uniform_breaks(-r, r, 1.0),
                kernels::INTEGRATION_TOL,
                4000,
            )?;
            Ok(v.value)
        });
        check(&mut out, format!("qt.negativity[t={t}]"), 0.0, tol::POSITIVITY, || {
            let g = DensityGrid::tabulate(&oracle_grid(), config.exec, |xi| q(t, xi))?;
            Ok((-g.min_value()).max(0.0))
        });
    }
    for &(t, s) in &[(0.5, 0.5), (1.0, 0.5)] {
        check(
            &mut out,
            format!("qt.semigroup[t={t},s={s}]"),
            0.0,
            tol::SEMIGROUP,
            || semigroup_defect(t, s, shift, p, config.exec),
        );
    }
    for &xi in &[0.5, 1.0, 3.0] {
        check(
            &mut out,
            format!("qt.vague_limit_rel[xi={xi}]"),
            0.0,
            tol::VAGUE_LIMIT_REL,
            || {
                let t = 1e-3;
                let target = levy_density_closed(xi)?;
                Ok((q(t, xi)? / t - target).abs() / target)
            },
        );
        let target = levy_density_closed(xi).unwrap_or(f64::NAN);
        check(
            &mut out,
            format!("qt.levy_series[xi={xi}]"),
            target,
            tol::LEVY_SERIES,
            || levy_density_series_accelerated(xi, 1_000_000),
        );
    }
    check(
        &mut out,
        "qt.derivative_sine_identity[t=1,x=1]",
        -levy_exponent_psi(1.0, 1.0),
        tol::DERIVATIVE_IDENTITY,
        || derivative_sine_transform(1.0 + shift, 1.0, p),
    );
    out
}

fn principal_suite(config: &VerifyConfig) -> Vec<Check> {
    let p = &config.policy;
    let mut out = Vec::new();
    for &t in &[0.5, 1.0] {
        for &w in &[0.0, 0.5, 2.0] {
            for &x in &[0.3, 1.3] {
                let Ok(d) = kernel_decomposition(t, SpectralPoint::Principal(w), p) else {
                    out.push(Check::errored(
                        format!("principal.reconstruction[t={t},omega={w},x={x}]"),
                        0.0,
                        0.0,
                    ));
                    continue;
                };
                check(
                    &mut out,
                    format!("principal.reconstruction[t={t},omega={w},x={x}]"),
                    d.target(x),
                    tol::RECONSTRUCTION,
                    || d.reconstruct(x),
                );
            }
        }
        for &w in &[0.0, 0.5, 1.0, 2.0] {
            check(
                &mut out,
                format!("principal.harmonicity[t={t},omega={w}]"),
                w,
                tol::HARMONICITY,
                || harmonicity_integral(t, w, p),
            );
        }
    }
    check(&mut out, "principal.mass[t=1,omega=0.7]", 1.0, tol::MASS, || {
        kernel_decomposition(1.0, SpectralPoint::Principal(0.7), p)?.total_mass()
    });
    check(
        &mut out,
        "principal.chapman_kolmogorov[t=1,s=1,omega=0.5,gamma=0.7]",
        0.0,
        tol::CHAPMAN_KOLMOGOROV,
        || {
            let grid = GridSpec::new(-30.0, 30.0, 1201)?;
            chapman_kolmogorov_residual(1.0, 1.0, 0.5, 0.7, &grid, p, config.exec)
        },
    );
    for &w in &[0.0, 0.5, 1.0] {
        for &x in &[0.0, 1.0, 2.0] {
            check(
                &mut out,
                format!("principal.intertwining[omega={w},x={x}]"),
                intertwining_kernel(w, x),
                tol::INTERTWINING,
                || intertwining_quadrature(w, x, &config.quadrature),
            );
        }
    }
    out
}

fn complementary_suite(config: &VerifyConfig) -> Vec<Check> {
    let p = &config.policy;
    let mut out = Vec::new();
    for &(t, w) in &[(0.3, 0.3), (0.8, 0.3), (0.8, 0.8), (1.0, 0.8)] {
        for &x in &[0.3, 0.9, 1.3] {
            let name = format!("complementary.reconstruction[t={t},omega={w},x={x}]");
            match kernel_decomposition(t, SpectralPoint::Complementary(w), p) {
                Ok(d) => check(&mut out, name, d.target(x), tol::RECONSTRUCTION, || d.reconstruct(x)),
                Err(_) => out.push(Check::errored(name, 0.0, 0.0)),
            }
        }
    }
    check(&mut out, "complementary.mass[t=1,omega=0.8]", 1.0, tol::MASS, || {
        kernel_decomposition(1.0, SpectralPoint::Complementary(0.8), p)?.total_mass()
    });
    for &(t, w, xi) in &[(1.0, 0.5, 2.0), (0.8, 0.3, 0.7)] {
        check(
            &mut out,
            format!("complementary.reflection[t={t},omega={w},xi={xi}]"),
            0.0,
            tol::REFLECTION,
            || Ok(i_series(t, w, xi, Sign::Minus, p)? - i_series(t, -w, xi, Sign::Plus, p)?),
        );
    }
    check(
        &mut out,
        "complementary.i_minus_oracle[t=1,omega=0.5,xi=2]",
        0.0,
        tol::WEIGHTED_ORACLE,
        || {
            Ok(i_series(1.0, 0.5, 2.0, Sign::Minus, p)?
                - fourier_invert_weighted(1.0, 0.5, 2.0, FourierWeight::Exp, &config.quadrature)?)
        },
    );
    check(
        &mut out,
        "complementary.sinh_shift_oracle[t=1,omega=0.5,xi=2]",
        0.0,
        tol::WEIGHTED_ORACLE,
        || {
            let (t, w, xi) = (1.0_f64, 0.5, 2.0);
            let scaled = 2.0 * PI * w / (t.exp() * xi) * complementary_density(t, w, xi, p)?;
            Ok(scaled - fourier_invert_weighted(t, w, xi, FourierWeight::SinhShift, &config.quadrature)?)
        },
    );
    out
}

fn subcritical_suite(config: &VerifyConfig) -> Vec<Check> {
    let p = &config.policy;
    let mut out = Vec::new();
    for &(t, w) in &[(0.3_f64, 0.8_f64), (0.5, 0.9)] {
        let d = match subcritical_decomposition(t, w, p) {
            Ok(d) => d,
            Err(_) => {
                out.push(Check::errored(
                    format!("subcritical.decomposition[t={t},omega={w}]"),
                    0.0,
                    0.0,
                ));
                continue;
            }
        };
        let mass = d.atom.map_or(f64::NAN, |a| a.mass);
        out.push(Check::new(
            format!("subcritical.atom_mass[t={t},omega={w}]"),
            t.exp() * (w - t) / w,
            mass,
            tol::ATOM_MASS,
        ));
        check(
            &mut out,
            format!("subcritical.total_mass[t={t},omega={w}]"),
            1.0,
            tol::SUBCRITICAL_MASS,
            || d.total_mass(),
        );
        for &x in &[0.3, 1.1] {
            check(
                &mut out,
                format!("subcritical.reconstruction[t={t},omega={w},x={x}]"),
                d.target(x),
                tol::SUBCRITICAL_RECONSTRUCTION,
                || d.reconstruct(x),
            );
        }
    }
    check(
        &mut out,
        "subcritical.j_oracle[t=0.3,omega=0.7,xi=1.5]",
        0.0,
        tol::WEIGHTED_ORACLE,
        || {
            Ok(j_series(0.3, 0.7, 1.5, p)?
                - fourier_invert_weighted(0.3, 0.7, 1.5, FourierWeight::ExpRemainder, &config.quadrature)?)
        },
    );
    check(
        &mut out,
        "subcritical.diff_shift_oracle[t=0.3,omega=0.7,xi=1.5]",
        0.0,
        tol::WEIGHTED_ORACLE,
        || {
            let (t, w, xi) = (0.3_f64, 0.7, 1.5);
            let scaled = 2.0 * PI * w / (t.exp() * xi) * subcritical_density(t, w, xi, p)?;
            Ok(scaled - fourier_invert_weighted(t, w, xi, FourierWeight::DiffShift, &config.quadrature)?)
        },
    );
    check(
        &mut out,
        "subcritical.continuity[omega=0.8]",
        0.0,
        tol::CONTINUITY,
        || {
            let w = 0.8;
            let below = w - 1e-9;
            let grid = GridSpec::new(0.05, 10.0, 200)?.points();
            let errs = config.exec.try_map(&grid, |&xi| {
                Ok::<_, crate::Error>(
                    (complementary_density(w, w, xi, p)? - subcritical_density(below, w, xi, p)?).abs(),
                )
            })?;
            let atom = subcritical_decomposition(below, w, p)?.atom.map_or(0.0, |a| a.mass);
            Ok(errs.into_iter().fold(atom, f64::max))
        },
    );
    out
}

/// `α ∈ [0.2, 3]`, `t ∈ [0, 5]`, ten points each.
pub fn metaplectic_lattice() -> Vec<(f64, f64)> {
    let mut v = Vec::with_capacity(100);
    for i in 0..10 {
        for k in 0..10 {
            v.push((0.2 + 2.8 * i as f64 / 9.0, 5.0 * k as f64 / 9.0));
        }
    }
    v
}

fn metaplectic_suite(config: &VerifyConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let lattice = metaplectic_lattice();
    let results: Vec<_> = lattice.iter().map(|&(a, t)| metaplectic::pipeline(a, t)).collect();
    let worst = |f: &dyn Fn(&metaplectic::Residuals) -> f64| -> Result<f64> {
        let mut w: f64 = 0.0;
        for r in &results {
            let r = r.as_ref().map_err(Clone::clone)?;
            w = w.max(f(&r.residuals));
        }
        Ok(w)
    };
    check(&mut out, "metaplectic.closed_vs_series", 0.0, tol::MATRIX, || {
        worst(&|r| r.closed_vs_series)
    });
    check(
        &mut out,
        "metaplectic.power_identities_rel",
        0.0,
        tol::POWER_IDENTITY_REL,
        || {
            let mut w: f64 = 0.0;
            for i in 0..10 {
                w = w.max(metaplectic::power_identity_error(0.2 + 2.8 * i as f64 / 9.0, 6)?);
            }
            Ok(w)
        },
    );
    check(&mut out, "metaplectic.j_squared", 0.0, tol::MATRIX, || {
        worst(&|r| r.j_squared)
    });
    check(&mut out, "metaplectic.gram_core_det", 0.0, tol::MATRIX, || {
        worst(&|r| r.core_det)
    });
    check(&mut out, "metaplectic.gram_core_closed_form", 0.0, tol::MATRIX, || {
        let mut w: f64 = 0.0;
        for &(a, t) in &lattice {
            let g = metaplectic::gram_products(a, t)?;
            w = w.max((g.left_core - metaplectic::left_core_closed(a, t)).amax());
        }
        Ok(w)
    });
    check(&mut out, "metaplectic.cartan_reassembly", 0.0, tol::MATRIX, || {
        worst(&|r| r.reassembly)
    });
    check(&mut out, "metaplectic.lambda_product", 0.0, tol::MATRIX, || {
        worst(&|r| r.lambda_product)
    });
    check(&mut out, "metaplectic.factor_orthogonality", 0.0, tol::MATRIX, || {
        worst(&|r| r.orthogonality)
    });
    check(&mut out, "metaplectic.u2_unitarity", 0.0, tol::MATRIX, || {
        worst(&|r| r.unitarity)
    });
    check(&mut out, "metaplectic.sl2c_det", 0.0, tol::MATRIX, || {
        worst(&|r| r.sl2c_det)
    });
    if let Some((a, t)) = config.metaplectic_point {
        match metaplectic::pipeline(a, t) {
            Ok(pipe) => {
                let eig = metaplectic::left_core_closed(a, t).symmetric_eigenvalues();
                let l1 = eig[0].max(eig[1]).sqrt();
                let (m1, m2) = pipe.cartan.lambdas;
                out.push(Check::new(
                    format!("metaplectic.lambda1[alpha={a},t={t}]"),
                    l1,
                    m1,
                    tol::MATRIX,
                ));
                out.push(Check::new(
                    format!("metaplectic.lambda2[alpha={a},t={t}]"),
                    1.0 / l1,
                    m2,
                    tol::MATRIX,
                ));
                out.push(Check::new(
                    format!("metaplectic.residuals[alpha={a},t={t}]"),
                    0.0,
                    pipe.residuals.max(),
                    tol::MATRIX,
                ));
            }
            Err(_) => out.push(Check::errored(
                format!("metaplectic.pipeline[alpha={a},t={t}]"),
                0.0,
                tol::MATRIX,
            )),
        }
    }
    for &x in &[0.0, 0.5, 1.0, 2.0] {
        check(
            &mut out,
            format!("metaplectic.gaussian_average_sech[x={x}]"),
            1.0 / f64::cosh(x),
            tol::GAUSSIAN_AVERAGE,
            || gaussian_average_sech(x, &config.quadrature),
        );
    }
    out
}

fn montecarlo_suite(config: &VerifyConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let samples = match simulate_paths(&config.area, config.exec) {
        Ok(s) => s,
        Err(_) => {
            out.push(Check::errored("montecarlo.simulation", 0.0, 0.0));
            return out;
        }
    };
    for &(t, x) in &[(0.5, 1.0), (1.0, 0.5)] {
        let name = format!("montecarlo.levy_area[t={t},x={x}]");
        match estimate_from_samples(&samples, t, x, config.area.bandwidth) {
            Ok(e) => {
                let tolerance = (3.0 * e.stderr).max(tol::MC_REL * e.target.abs());
                out.push(Check::new(name, e.target, e.estimate, tolerance));
            }
            Err(_) => out.push(Check::errored(name, 0.0, 0.0)),
        }
    }
    out
}
