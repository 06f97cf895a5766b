//! Construction and verification of exactly solvable time-dependent SU(2)
//! (generalized Rabi) problems and of the scalar Riccati equations they
//! generate.
//!
//! A two-level system driven by a longitudinal field `Ω(t)` and a complex
//! transverse field `ω(t) = |ω|(t)·e^{iφ_ω(t)}` has a propagator with entries
//! `(a, b)` obeying
//!
//! ```text
//! ȧ = −iΩa + iωb*,    ḃ = −iωa* − iΩb,    a(0) = 1, b(0) = 0.
//! ```
//!
//! The ratio `u = b/a*` then obeys the Riccati equation
//! `u̇ = iω*u² − 2iΩu − iω`, whose coefficients have the class shape
//! `ẏ = f*y² + gy + f`. This crate provides
//!
//! - [`expr`] — a small expression language over `t` with symbolic
//!   differentiation, used to state closed forms with exact derivatives;
//! - [`quad`] — adaptive Simpson quadrature and cumulative antiderivatives;
//! - [`su2`] — the Hamiltonian, propagator entries, and residual checks;
//! - [`generator`] — the two recipes (free complex generator `X(t)`, free
//!   real angle `Θ(t)`) that produce solvable Hamiltonians together with
//!   their closed-form entries;
//! - [`riccati`] — the associated Riccati equation, particular solutions,
//!   and the general integral built from an integrating factor;
//! - [`oracle`] — an independent adaptive Runge–Kutta integrator used to
//!   verify every closed form against the raw ODEs;
//! - [`catalog`] — six named, parameterized solvable cases ready to run.

pub mod catalog;
pub mod expr;
pub mod generator;
pub mod oracle;
pub mod quad;
pub mod riccati;
pub mod su2;
pub mod timefn;

pub use num_complex::Complex64;
