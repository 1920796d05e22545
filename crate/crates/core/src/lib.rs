//! Densities of the Markov semigroups generated by the positive definite
//! function `ψ_t(x) = exp(t(1 − x coth x))` on `SL(2,ℂ)`.
//!
//! The crate is organised in layers:
//!
//! * [`special`]: Pochhammer symbols, Laguerre polynomials of index −1,
//!   Chebyshev polynomials, spherical functions and the exponent `ψ_t`.
//! * [`series`]: the double-series engine shared by every kernel, with an
//!   exact Euler–Maclaurin tail for the inner sum and a certified bound for
//!   the outer one.
//! * [`kernels`]: the Lévy density `q_t`, the spherical kernels `P_t(ω, ·)`
//!   in the principal, complementary and subcritical regimes, and related
//!   closed forms.
//! * [`oracle`] and [`montecarlo`]: independent ground truth (oscillatory
//!   quadrature, numeric convolution, Lévy stochastic area simulation).
//! * [`metaplectic`]: the 4×4 symplectic matrix calculus.
//! * [`verify`]: named check suites used by the command line front end.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod grid;
pub mod kernels;
pub mod metaplectic;
pub mod montecarlo;
pub mod oracle;
pub mod quadrature;
pub mod series;
pub mod special;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use grid::{DensityGrid, GridSpec};
pub use kernels::{Atom, KernelDecomposition, Regime};
pub use series::TruncationPolicy;
pub use special::SpectralPoint;
