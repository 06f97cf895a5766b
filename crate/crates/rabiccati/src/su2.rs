//! The physical layer: Hamiltonian, propagator entries, and the entry ODE
//! system of a generalized Rabi problem.
//!
//! The Hamiltonian is `H = [[Ω, ω], [ω*, −Ω]]` with a real longitudinal
//! field `Ω(t)` and a complex transverse field stored as magnitude and
//! phase, `ω(t) = |ω|(t)·e^{iφ_ω(t)}`. The propagator
//! `U = [[a, b], [−b*, a*]]` with `|a|² + |b|² = 1` obeys
//!
//! ```text
//! ȧ = −iΩa + iωb*,    ḃ = −iωa* − iΩb,    a(0) = 1, b(0) = 0.
//! ```

use num_complex::Complex64;

use crate::timefn::{ComplexForm, RealFn};

/// Generalized Rabi Hamiltonian. The transverse field is kept in polar
/// form; every closed form downstream is written in `|ω|` and `φ_ω`, and
/// reconstructing the phase from Cartesian parts would reintroduce branch
/// ambiguity.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub longitudinal: RealFn,
    pub transverse_mag: RealFn,
    pub transverse_phase: RealFn,
}

impl Hamiltonian {
    pub fn new(longitudinal: RealFn, transverse_mag: RealFn, transverse_phase: RealFn) -> Self {
        Hamiltonian {
            longitudinal,
            transverse_mag,
            transverse_phase,
        }
    }

    /// `ω(t) = |ω|(t)·e^{iφ_ω(t)}`.
    pub fn transverse(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.transverse_phase.value(t)) * self.transverse_mag.value(t)
    }

    /// Right-hand side of the entry system: `(ȧ, ḃ)` for the given state.
    pub fn schrodinger_rhs(&self, state: &PropagatorEntries, t: f64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        let omega_z = self.longitudinal.value(t);
        let omega = self.transverse(t);
        let da = -i * omega_z * state.a + i * omega * state.b.conj();
        let db = -i * omega * state.a.conj() - i * omega_z * state.b;
        (da, db)
    }
}

/// The two defining entries of the propagator at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorEntries {
    pub a: Complex64,
    pub b: Complex64,
}

impl PropagatorEntries {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        PropagatorEntries { a, b }
    }

    /// The initial condition `U(0) = I`.
    pub fn identity() -> Self {
        PropagatorEntries {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// `| |a|² + |b|² − 1 |`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() - 1.0).abs()
    }
}

/// Propagator entries sampled along a grid.
#[derive(Clone, Debug)]
pub struct EntryTrace {
    pub times: Vec<f64>,
    pub entries: Vec<PropagatorEntries>,
    /// Largest unitarity defect seen while producing the trace.
    pub unitarity_drift: f64,
}

/// ∞-norm of the defect of closed-form entries in the entry system,
/// using the forms' exact derivatives.
pub fn schrodinger_residual(h: &Hamiltonian, a: &ComplexForm, b: &ComplexForm, t: f64) -> f64 {
    let state = PropagatorEntries::new(a.value(t), b.value(t));
    let (da, db) = h.schrodinger_rhs(&state, t);
    let ra = (a.derivative(t) - da).norm();
    let rb = (b.derivative(t) - db).norm();
    ra.max(rb)
}
