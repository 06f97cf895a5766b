//! The two recipes that produce exactly solvable Rabi problems together
//! with their closed-form propagator entries.
//!
//! **X recipe.** A free complex generator `X(t) = A(t)e^{iφ(t)}` with
//! `X(0) = 0` fixes
//!
//! ```text
//! a = (1+|X|²)^{-1/2}·exp(−i∫₀ᵗΩ − i∫₀ᵗκ),   b = −i·a·X,
//! ω = a²Ẋ = Ẋ/(1+|X|²)·exp(−2i∫₀ᵗΩ − 2i∫₀ᵗκ),
//! ```
//!
//! where `κ = Im[ẊX*]/(1+|X|²) = A²φ̇/(1+A²)` is the phase kernel. The
//! longitudinal field `Ω(t)` stays free; the transverse field is the price
//! of solvability.
//!
//! **Θ recipe.** Given the transverse field `(|ω|, φ_ω)` and a free real
//! angle `Θ(t)` with `Θ(0) = 0`, the compatible longitudinal field is
//!
//! ```text
//! Ω = ½(Θ̇ − φ̇_ω) + |ω|sinΘ·cot(2P),    P(t) = ∫₀ᵗ|ω|cosΘ,
//! ```
//!
//! and the entries are `|a| = cos P`, `|b| = sin P`,
//! `φ_a = φ_ω/2 − Θ/2 − R`, `φ_b = φ_ω/2 − Θ/2 + R − π/2` with
//! `Ṙ = |ω|sinΘ/sin(2P)`. Both the cot term and the R integrand have a
//! removable singularity at the origin with limit `Θ̇(0)/2`; below the
//! series cutoff they are evaluated by that limit. The recipe is regular
//! while `2P ∈ (0, π)`, which is enforced, not assumed.

use num_complex::Complex64;

use crate::quad::{CumulativeIntegral, Grid, QuadError};
use crate::su2::{Hamiltonian, PropagatorEntries};
use crate::timefn::{ComplexForm, RealFn};

/// Fraction of the working interval under which removable singularities
/// are evaluated by their analytic limit.
const SERIES_CUTOFF_FRACTION: f64 = 1e-4;
/// |Ẋ| below this has no usable phase; the polar decomposition is then
/// continued from the left and flagged.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("{what}(0) must vanish, got {value}")]
    OriginNotZero { what: &'static str, value: f64 },
    #[error("phase singularity crossed at t = {t}: 2∫|ω|cosΘ leaves (0, π)")]
    PhaseSingularity { t: f64 },
    #[error("|ω| must be nonnegative, got {value} at t = {t}")]
    NegativeMagnitude { t: f64, value: f64 },
    #[error("working grid must start at 0, got {0}")]
    GridStart(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Free complex generator `X(t) = A(t)e^{iφ(t)}`, `A(0) = 0`.
#[derive(Clone, Debug)]
pub struct GeneratorX {
    pub mag: RealFn,
    pub phase: RealFn,
}

impl GeneratorX {
    pub fn new(mag: RealFn, phase: RealFn) -> Self {
        GeneratorX { mag, phase }
    }

    pub fn value(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.phase.value(t)) * self.mag.value(t)
    }

    /// `Ẋ = (Ȧ + iAφ̇)e^{iφ}`.
    pub fn derivative(&self, t: f64) -> Complex64 {
        let a = self.mag.value(t);
        let da = self.mag.derivative(t);
        let dphi = self.phase.derivative(t);
        Complex64::new(da, a * dphi) * Complex64::from_polar(1.0, self.phase.value(t))
    }

    /// `κ = Im[ẊX*]/(1+|X|²) = A²φ̇/(1+A²)`.
    pub fn phase_kernel(&self, t: f64) -> f64 {
        let a = self.mag.value(t);
        let dphi = self.phase.derivative(t);
        a * a * dphi / (1.0 + a * a)
    }
}

/// Free real angle `Θ(t)`, `Θ(0) = 0`.
#[derive(Clone, Debug)]
pub struct GeneratorTheta {
    pub theta: RealFn,
}

impl GeneratorTheta {
    pub fn new(theta: RealFn) -> Self {
        GeneratorTheta { theta }
    }
}

/// Polar decomposition of the constructed `ω(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarSample {
    pub mag: f64,
    /// Continuous phase with `φ_ω(0) = arg Ẋ(0)`.
    pub phase: f64,
    /// Set where `Ẋ = 0` and the phase was continued from the left.
    pub extrapolated: bool,
}

/// The X recipe with its cumulative-integral caches built once over a
/// working grid; all queries afterwards are pure.
#[derive(Clone)]
pub struct XRecipe {
    x: GeneratorX,
    longitudinal: RealFn,
    omega_z_integral: CumulativeIntegral,
    kernel_integral: CumulativeIntegral,
    /// Unwrapped `arg Ẋ` at the grid nodes.
    arg_xdot_nodes: Vec<f64>,
    grid: Grid,
}

impl XRecipe {
    pub fn build(
        x: GeneratorX,
        longitudinal: RealFn,
        grid: Grid,
        tol: f64,
    ) -> Result<Self, GeneratorError> {
        if grid.start() != 0.0 {
            return Err(GeneratorError::GridStart(grid.start()));
        }
        let x0 = x.mag.value(0.0).abs();
        if x0 > 1e-9 {
            return Err(GeneratorError::OriginNotZero {
                what: "X",
                value: x0,
            });
        }
        let omega_z_integral = CumulativeIntegral::build(longitudinal.clone(), grid, tol)?;
        let kernel = {
            let x = x.clone();
            RealFn::value_only(move |t| x.phase_kernel(t))
        };
        let kernel_integral = CumulativeIntegral::build(kernel, grid, tol)?;

        // Unwrap arg Ẋ along the grid so the polar decomposition of ω is
        // continuous; nodes with vanishing Ẋ inherit the previous phase.
        let mut arg_nodes = Vec::with_capacity(grid.len());
        let mut offset = 0.0;
        let mut prev = 0.0f64;
        for (k, t) in grid.points().enumerate() {
            let xdot = x.derivative(t);
            if xdot.norm() < DEGENERATE_TOL {
                arg_nodes.push(if k == 0 { 0.0 } else { prev });
                continue;
            }
            let principal = xdot.im.atan2(xdot.re);
            if k > 0 {
                // Keep the running value within π of the previous node.
                let jump = principal + offset - prev;
                offset -= (jump / std::f64::consts::TAU).round() * std::f64::consts::TAU;
            }
            prev = principal + offset;
            arg_nodes.push(prev);
        }
        Ok(XRecipe {
            x,
            longitudinal,
            omega_z_integral,
            kernel_integral,
            arg_xdot_nodes: arg_nodes,
            grid,
        })
    }

    pub fn generator(&self) -> &GeneratorX {
        &self.x
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Exponent of the common phase: `∫₀ᵗΩ + ∫₀ᵗκ`.
    fn phase_integral(&self, t: f64) -> f64 {
        self.omega_z_integral.query_or_nan(t) + self.kernel_integral.query_or_nan(t)
    }

    /// Propagator entries at `t`; unitary by construction.
    pub fn entries(&self, t: f64) -> PropagatorEntries {
        let (a_form, b_form) = self.entry_forms();
        PropagatorEntries::new(a_form.value(t), b_form.value(t))
    }

    /// The entries as magnitude/phase forms with exact derivatives.
    pub fn entry_forms(&self) -> (ComplexForm, ComplexForm) {
        let mag_a = {
            let x = self.x.clone();
            RealFn::new(
                {
                    let x = x.clone();
                    move |t| {
                        let a = x.mag.value(t);
                        1.0 / (1.0 + a * a).sqrt()
                    }
                },
                move |t| {
                    let a = x.mag.value(t);
                    let da = x.mag.derivative(t);
                    -a * da * (1.0 + a * a).powf(-1.5)
                },
            )
        };
        let phase_a = self.phase_fn(-1.0, 0.0);
        let mag_b = {
            let x = self.x.clone();
            RealFn::new(
                {
                    let x = x.clone();
                    move |t| {
                        let a = x.mag.value(t);
                        a / (1.0 + a * a).sqrt()
                    }
                },
                move |t| {
                    let a = x.mag.value(t);
                    let da = x.mag.derivative(t);
                    da * (1.0 + a * a).powf(-1.5)
                },
            )
        };
        // b = −i·a·X: phase is φ_a + φ − π/2, magnitude A·|a|.
        let phase_b = {
            let base = self.phase_fn(-1.0, 0.0);
            let phi = self.x.phase.clone();
            base.add(&phi).offset(-std::f64::consts::FRAC_PI_2)
        };
        (
            ComplexForm::new(mag_a, phase_a),
            ComplexForm::new(mag_b, phase_b),
        )
    }

    // scale·(∫Ω + ∫κ) + shift as a RealFn with exact slope.
    fn phase_fn(&self, scale: f64, shift: f64) -> RealFn {
        let omega_z_integral = self.omega_z_integral.clone();
        let kernel_integral = self.kernel_integral.clone();
        let omega_z = self.longitudinal.clone();
        let x = self.x.clone();
        RealFn::new(
            move |t| {
                scale * (omega_z_integral.query_or_nan(t) + kernel_integral.query_or_nan(t)) + shift
            },
            move |t| scale * (omega_z.value(t) + x.phase_kernel(t)),
        )
    }

    /// The transverse field `ω(t) = Ẋ/(1+|X|²)·e^{−2i(∫Ω+∫κ)}` this
    /// generator prescribes.
    pub fn transverse(&self, t: f64) -> Complex64 {
        let x = self.x.value(t);
        let xdot = self.x.derivative(t);
        let phase = -2.0 * self.phase_integral(t);
        xdot / (1.0 + x.norm_sqr()) * Complex64::from_polar(1.0, phase)
    }

    /// Polar decomposition of [`Self::transverse`] with a branch-tracked
    /// continuous phase.
    pub fn transverse_polar(&self, t: f64) -> PolarSample {
        let x = self.x.value(t);
        let xdot = self.x.derivative(t);
        let mag = xdot.norm() / (1.0 + x.norm_sqr());
        let k = self.grid.nearest(t);
        let (arg_xdot, extrapolated) = if xdot.norm() < DEGENERATE_TOL {
            (self.arg_xdot_nodes[k], true)
        } else {
            let principal = xdot.im.atan2(xdot.re);
            let turns = ((self.arg_xdot_nodes[k] - principal) / std::f64::consts::TAU).round();
            (principal + turns * std::f64::consts::TAU, false)
        };
        PolarSample {
            mag,
            phase: arg_xdot - 2.0 * self.phase_integral(t),
            extrapolated,
        }
    }

    /// The Hamiltonian this recipe solves. Values are exact; the slopes of
    /// the derived `|ω|`, `φ_ω` would need second derivatives of the
    /// generator, so they are supplied by central differences.
    pub fn hamiltonian(&self) -> Hamiltonian {
        let mag = {
            let this = self.clone();
            let val = move |t: f64| this.transverse_polar(t).mag;
            fd_backed(val)
        };
        let phase = {
            let this = self.clone();
            let val = move |t: f64| this.transverse_polar(t).phase;
            fd_backed(val)
        };
        Hamiltonian::new(self.longitudinal.clone(), mag, phase)
    }

    /// Particular solution `ū = −iX·e^{−2i(∫Ω+∫κ)}` of the associated
    /// Riccati equation, with `ū(0) = 0` and `|ū| = |X|`.
    pub fn particular_solution(&self) -> ComplexForm {
        let mag = self.x.mag.clone();
        let phase = self
            .phase_fn(-2.0, -std::f64::consts::FRAC_PI_2)
            .add(&self.x.phase);
        ComplexForm::new(mag, phase)
    }
}

fn fd_backed(val: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static) -> RealFn {
    let v = val.clone();
    RealFn::new(val, move |t| {
        let h = 1e-6 * t.abs().max(1.0);
        (v(t + h) - v(t - h)) / (2.0 * h)
    })
}

/// The Θ recipe over a working grid, with the `P` and `R` integrals cached.
#[derive(Clone)]
pub struct ThetaRecipe {
    omega_mag: RealFn,
    omega_phase: RealFn,
    theta: RealFn,
    p: CumulativeIntegral,
    r: CumulativeIntegral,
    theta_dot0: f64,
    cutoff: f64,
    grid: Grid,
}

impl ThetaRecipe {
    pub fn build(
        omega_mag: RealFn,
        omega_phase: RealFn,
        theta: GeneratorTheta,
        grid: Grid,
        tol: f64,
    ) -> Result<Self, GeneratorError> {
        if grid.start() != 0.0 {
            return Err(GeneratorError::GridStart(grid.start()));
        }
        let theta = theta.theta;
        let theta0 = theta.value(0.0).abs();
        if theta0 > 1e-9 {
            return Err(GeneratorError::OriginNotZero {
                what: "Θ",
                value: theta0,
            });
        }
        let cutoff = SERIES_CUTOFF_FRACTION * grid.end();
        let theta_dot0 = theta.derivative(0.0);

        let p_integrand = {
            let mag = omega_mag.clone();
            let theta = theta.clone();
            RealFn::value_only(move |t| mag.value(t) * theta.value(t).cos())
        };
        let p = CumulativeIntegral::build(p_integrand, grid, tol)?;

        // Regularity: 2P must stay inside (0, π) past the origin.
        for k in 1..grid.len() {
            let t = grid.point(k);
            let mv = omega_mag.value(t);
            if mv < -1e-12 {
                return Err(GeneratorError::NegativeMagnitude { t, value: mv });
            }
            let two_p = 2.0 * p.at_node(k);
            if !(0.0..std::f64::consts::PI).contains(&two_p) {
                let t_cross = bisect_crossing(&p, grid.point(k - 1), t);
                return Err(GeneratorError::PhaseSingularity { t: t_cross });
            }
        }

        let r_integrand = {
            let mag = omega_mag.clone();
            let theta = theta.clone();
            let p = p.clone();
            let limit = theta_dot0 / 2.0;
            RealFn::value_only(move |t| {
                if t < cutoff {
                    limit
                } else {
                    mag.value(t) * theta.value(t).sin() / (2.0 * p.query_or_nan(t)).sin()
                }
            })
        };
        let r = CumulativeIntegral::build(r_integrand, grid, tol)?;

        Ok(ThetaRecipe {
            omega_mag,
            omega_phase,
            theta,
            p,
            r,
            theta_dot0,
            cutoff,
            grid,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `P(t) = ∫₀ᵗ|ω|cosΘ`.
    pub fn pulse_area(&self, t: f64) -> f64 {
        self.p.query_or_nan(t)
    }

    /// The compatible longitudinal field
    /// `Ω = ½(Θ̇ − φ̇_ω) + |ω|sinΘ·cot(2P)`, with the removable `t → 0`
    /// singularity evaluated by its limit `Θ̇(0)/2` below the cutoff.
    pub fn omega_z(&self, t: f64) -> f64 {
        let base = 0.5 * (self.theta.derivative(t) - self.omega_phase.derivative(t));
        base + self.cot_term(t)
    }

    fn cot_term(&self, t: f64) -> f64 {
        if t < self.cutoff {
            return self.theta_dot0 / 2.0;
        }
        let two_p = 2.0 * self.p.query_or_nan(t);
        self.omega_mag.value(t) * self.theta.value(t).sin() * two_p.cos() / two_p.sin()
    }

    /// `Ω` as a function; the slope is diagnostic only (central
    /// differences), values are exact.
    pub fn omega_z_fn(&self) -> RealFn {
        let this = self.clone();
        fd_backed(move |t| this.omega_z(t))
    }

    pub fn hamiltonian(&self) -> Hamiltonian {
        Hamiltonian::new(
            self.omega_z_fn(),
            self.omega_mag.clone(),
            self.omega_phase.clone(),
        )
    }

    /// Propagator entries at `t`.
    pub fn entries(&self, t: f64) -> PropagatorEntries {
        let (a, b) = self.entry_forms();
        PropagatorEntries::new(a.value(t), b.value(t))
    }

    /// `|a| = cos P`, `|b| = sin P` with the phases
    /// `φ_ω/2 − Θ/2 ∓ R (− π/2)`, as magnitude/phase forms with exact
    /// derivatives.
    pub fn entry_forms(&self) -> (ComplexForm, ComplexForm) {
        let mag_a = {
            let p = self.p.clone();
            let mag = self.omega_mag.clone();
            let theta = self.theta.clone();
            RealFn::new(
                {
                    let p = p.clone();
                    move |t| p.query_or_nan(t).cos()
                },
                move |t| -p.query_or_nan(t).sin() * mag.value(t) * theta.value(t).cos(),
            )
        };
        let mag_b = {
            let p = self.p.clone();
            let mag = self.omega_mag.clone();
            let theta = self.theta.clone();
            RealFn::new(
                {
                    let p = p.clone();
                    move |t| p.query_or_nan(t).sin()
                },
                move |t| p.query_or_nan(t).cos() * mag.value(t) * theta.value(t).cos(),
            )
        };
        let phase_a = self.half_phase().sub(&self.r_fn());
        let phase_b = self
            .half_phase()
            .add(&self.r_fn())
            .offset(-std::f64::consts::FRAC_PI_2);
        (
            ComplexForm::new(mag_a, phase_a),
            ComplexForm::new(mag_b, phase_b),
        )
    }

    // (φ_ω − Θ)/2 with exact slope.
    fn half_phase(&self) -> RealFn {
        let phase = self.omega_phase.clone();
        let theta = self.theta.clone();
        let (p2, t2) = (phase.clone(), theta.clone());
        RealFn::new(
            move |t| 0.5 * (phase.value(t) - theta.value(t)),
            move |t| 0.5 * (p2.derivative(t) - t2.derivative(t)),
        )
    }

    // R(t) with its exact slope (the regularized integrand).
    fn r_fn(&self) -> RealFn {
        let r = self.r.clone();
        let mag = self.omega_mag.clone();
        let theta = self.theta.clone();
        let p = self.p.clone();
        let cutoff = self.cutoff;
        let limit = self.theta_dot0 / 2.0;
        RealFn::new(
            move |t| r.query_or_nan(t),
            move |t| {
                if t < cutoff {
                    limit
                } else {
                    mag.value(t) * theta.value(t).sin() / (2.0 * p.query_or_nan(t)).sin()
                }
            },
        )
    }

    /// Particular solution `ū = tan(P)·e^{i(φ_ω − Θ − π/2)}` of the
    /// associated Riccati equation (the R contributions to `φ_a + φ_b`
    /// cancel).
    pub fn particular_solution(&self) -> ComplexForm {
        let mag = {
            let p = self.p.clone();
            let omega_mag = self.omega_mag.clone();
            let theta = self.theta.clone();
            RealFn::new(
                {
                    let p = p.clone();
                    move |t| p.query_or_nan(t).tan()
                },
                move |t| {
                    let cos_p = p.query_or_nan(t).cos();
                    omega_mag.value(t) * theta.value(t).cos() / (cos_p * cos_p)
                },
            )
        };
        let phase = {
            let omega_phase = self.omega_phase.clone();
            let theta = self.theta.clone();
            let (p2, t2) = (omega_phase.clone(), theta.clone());
            RealFn::new(
                move |t| omega_phase.value(t) - theta.value(t) - std::f64::consts::FRAC_PI_2,
                move |t| p2.derivative(t) - t2.derivative(t),
            )
        };
        ComplexForm::new(mag, phase)
    }
}

// Locates where 2P exits (0, π) between two times where it was inside and
// outside respectively.
fn bisect_crossing(p: &CumulativeIntegral, mut lo: f64, mut hi: f64) -> f64 {
    let inside = |t: f64| {
        let v = 2.0 * p.query_or_nan(t);
        v > 0.0 && v < std::f64::consts::PI
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

impl std::fmt::Debug for XRecipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("XRecipe").field("grid", &self.grid).finish()
    }
}

impl std::fmt::Debug for ThetaRecipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThetaRecipe")
            .field("grid", &self.grid)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

#[cfg(test)]
mod tests;
