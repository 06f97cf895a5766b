//! Independent adaptive Runge–Kutta verification oracle.
//!
//! Integrates the raw entry system and the raw Riccati equation with an
//! embedded Dormand–Prince 5(4) pair under PI step-size control, touching
//! none of the recipe code. The complex 2-state system is integrated as 4
//! real components and the Riccati scalar as 2, keeping the stepper real
//! and generic. Output points are reached by clamping accepted steps, so
//! grid samples carry full integration accuracy.
//!
//! Riccati solutions have movable poles. By default the integrator stops
//! at a blow-up and brackets the pole with the last two step endpoints;
//! when configured to resume it switches to the inverted variable
//! `w = 1/u` (which satisfies `ẇ = −Cw² − Bw − A` and passes through zero
//! at the pole) and switches back once the solution is tame again.

use num_complex::Complex64;

use crate::quad::Grid;
use crate::riccati::RiccatiDre;
use crate::su2::{EntryTrace, Hamiltonian, PropagatorEntries};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("step count exhausted after {steps} steps at t = {t}")]
    StepsExhausted { t: f64, steps: u64 },
    #[error("right-hand side is not finite at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("grid must start at 0, got {0}")]
    GridStart(f64),
}

/// Tolerances and guards for one integration run.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// |y| beyond which a Riccati trajectory counts as blown up.
    pub blowup_guard: f64,
    pub max_steps: u64,
    /// Continue a Riccati trace past movable poles via variable inversion.
    pub resume_past_poles: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            blowup_guard: 1e6,
            max_steps: 10_000_000,
            resume_past_poles: false,
        }
    }
}

// Dormand–Prince 5(4) tableau (FSAL).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-minus-fourth-order error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Right-hand side of a first-order system in `N` real components.
type Rhs<'f, const N: usize> = dyn Fn(f64, &[f64; N], &mut [f64; N]) + 'f;

struct Stepper<'a, const N: usize> {
    rhs: &'a Rhs<'a, N>,
    cfg: IntegratorConfig,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    fac_old: f64,
    steps: u64,
}

impl<'a, const N: usize> Stepper<'a, N> {
    fn new(
        rhs: &'a Rhs<'a, N>,
        t0: f64,
        y0: [f64; N],
        span: f64,
        cfg: IntegratorConfig,
    ) -> Result<Self, OracleError> {
        let mut k1 = [0.0; N];
        rhs(t0, &y0, &mut k1);
        check_finite(t0, &k1)?;
        let h = initial_step(rhs, t0, &y0, &k1, span, &cfg)?;
        Ok(Stepper {
            rhs,
            cfg,
            t: t0,
            y: y0,
            k1,
            h,
            fac_old: 1e-4,
            steps: 0,
        })
    }

    /// Advances to exactly `target`, clamping steps. `on_accept` sees every
    /// accepted step and may return `false` to interrupt; the return value
    /// is `true` when the target was reached.
    fn advance_to(
        &mut self,
        target: f64,
        mut on_accept: impl FnMut(f64, &[f64; N]) -> bool,
    ) -> Result<bool, OracleError> {
        while self.t < target {
            if self.steps >= self.cfg.max_steps {
                return Err(OracleError::StepsExhausted {
                    t: self.t,
                    steps: self.steps,
                });
            }
            let mut h = self.h.min(self.cfg.max_step);
            let clamped = self.t + h >= target;
            if clamped {
                h = target - self.t;
            }
            if h <= f64::EPSILON * self.t.abs().max(1.0) {
                // Within round-off of the target; snap rather than underflow.
                if clamped {
                    self.t = target;
                    break;
                }
                return Err(OracleError::StepUnderflow { t: self.t });
            }
            self.steps += 1;
            let (y_new, k7, err) = self.try_step(h)?;
            if err <= 1.0 {
                let fac11 = err.powf(EXPO1).max(1e-10);
                let fac =
                    (fac11 / self.fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.fac_old = err.max(1e-4);
                self.t = if clamped { target } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                self.h = h / fac;
                if !on_accept(self.t, &self.y) {
                    return Ok(false);
                }
            } else {
                let fac11 = err.powf(EXPO1);
                self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            }
        }
        Ok(true)
    }

    fn try_step(&self, h: f64) -> Result<([f64; N], [f64; N], f64), OracleError> {
        let rhs = self.rhs;
        let t = self.t;
        let y = &self.y;
        let k1 = &self.k1;
        let mut stage = [0.0; N];
        let mut k2 = [0.0; N];
        let mut k3 = [0.0; N];
        let mut k4 = [0.0; N];
        let mut k5 = [0.0; N];
        let mut k6 = [0.0; N];
        let mut k7 = [0.0; N];

        for i in 0..N {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &stage, &mut k2);
        for i in 0..N {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &stage, &mut k3);
        for i in 0..N {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &stage, &mut k4);
        for i in 0..N {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &stage, &mut k5);
        for i in 0..N {
            stage[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + h, &stage, &mut k6);
        let mut y_new = [0.0; N];
        for i in 0..N {
            y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs(t + h, &y_new, &mut k7);
        check_finite(t + h, &y_new)?;
        check_finite(t + h, &k7)?;

        let mut err_sq = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale) * (e / scale);
        }
        Ok((y_new, k7, (err_sq / N as f64).sqrt()))
    }
}

fn check_finite<const N: usize>(t: f64, v: &[f64; N]) -> Result<(), OracleError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(OracleError::NonFiniteRhs { t })
    }
}

// Starting-step heuristic (Hairer II.4) for a method whose local error is
// of order h^5.
fn initial_step<const N: usize>(
    rhs: &Rhs<'_, N>,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    cfg: &IntegratorConfig,
) -> Result<f64, OracleError> {
    let sci = |y: f64| cfg.abs_tol + cfg.rel_tol * y.abs();
    let norm = |v: &[f64; N], w: &[f64; N]| {
        (v.iter()
            .zip(w)
            .map(|(x, y)| (x / sci(*y)).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt()
    };
    let d0 = norm(y0, y0);
    let d1 = norm(f0, y0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(span);
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let mut f1 = [0.0; N];
    rhs(t0 + h0, &y1, &mut f1);
    check_finite(t0 + h0, &f1)?;
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff, y0) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok(h1.min(100.0 * h0).min(span).min(cfg.max_step))
}

/// Integrates the entry system over `grid` (which must start at 0) from
/// `(a, b) = (1, 0)`, reporting the largest unitarity defect seen at grid
/// points.
pub fn integrate_su2(
    h: &Hamiltonian,
    grid: &Grid,
    cfg: &IntegratorConfig,
) -> Result<EntryTrace, OracleError> {
    if grid.start() != 0.0 {
        return Err(OracleError::GridStart(grid.start()));
    }
    let rhs = move |t: f64, y: &[f64; 4], dy: &mut [f64; 4]| {
        let state = PropagatorEntries::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]));
        let (da, db) = h.schrodinger_rhs(&state, t);
        dy[0] = da.re;
        dy[1] = da.im;
        dy[2] = db.re;
        dy[3] = db.im;
    };
    let mut stepper = Stepper::new(&rhs, 0.0, [1.0, 0.0, 0.0, 0.0], grid.end(), *cfg)?;
    let mut entries = Vec::with_capacity(grid.len());
    let mut drift: f64 = 0.0;
    for t in grid.points() {
        stepper.advance_to(t, |_, _| true)?;
        let state = PropagatorEntries::new(
            Complex64::new(stepper.y[0], stepper.y[1]),
            Complex64::new(stepper.y[2], stepper.y[3]),
        );
        drift = drift.max(state.unitarity_defect());
        entries.push(state);
    }
    Ok(EntryTrace {
        times: grid.points().collect(),
        entries,
        unitarity_drift: drift,
    })
}

/// A movable singularity located between two accepted steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleBracket {
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Riccati trajectory sampled on a grid. Samples with no finite value
/// (inside a blow-up region, or beyond the first pole when not resuming)
/// are `None`.
#[derive(Debug, Clone)]
pub struct RiccatiTrace {
    pub times: Vec<f64>,
    pub values: Vec<Option<Complex64>>,
    pub poles: Vec<PoleBracket>,
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Rep {
    Direct,
    Inverted,
}

/// Integrates `ẏ = A y² + B y + C` from `y(0) = y0` over the grid.
pub fn integrate_riccati(
    dre: &RiccatiDre,
    y0: Complex64,
    grid: &Grid,
    cfg: &IntegratorConfig,
) -> Result<RiccatiTrace, OracleError> {
    // Leave the direct variable well before the guard so its error control
    // never sees huge magnitudes; re-enter with hysteresis.
    let switch_out = cfg.blowup_guard.sqrt().max(10.0);
    let switch_back = switch_out / 4.0;
    let guard = cfg.blowup_guard;

    let direct_rhs = move |t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
        let u = Complex64::new(y[0], y[1]);
        let du = dre.rhs(u, t);
        dy[0] = du.re;
        dy[1] = du.im;
    };
    let inverted_rhs = move |t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
        let w = Complex64::new(y[0], y[1]);
        let dw = -dre.constant(t) * w * w - dre.linear(t) * w - dre.quadratic(t);
        dy[0] = dw.re;
        dy[1] = dw.im;
    };

    let mut rep = Rep::Direct;
    let mut state = [y0.re, y0.im];
    let mut t_cur = grid.start();
    let mut values: Vec<Option<Complex64>> = Vec::with_capacity(grid.len());
    let mut poles: Vec<PoleBracket> = Vec::new();
    let mut in_pole_zone = false;
    let mut zone_start = grid.start();
    let mut stopped = false;

    for t_target in grid.points() {
        while !stopped && t_cur < t_target {
            let rhs: &Rhs<'_, 2> = match rep {
                Rep::Direct => &direct_rhs,
                Rep::Inverted => &inverted_rhs,
            };
            let mut stepper = Stepper::new(rhs, t_cur, state, t_target - t_cur, *cfg)?;
            let mut prev_t = t_cur;
            let mut event_prev_t = t_cur;
            let finished = {
                let in_zone = &mut in_pole_zone;
                let zone_start = &mut zone_start;
                let poles = &mut poles;
                stepper.advance_to(t_target, |t, y| {
                    let n = (y[0] * y[0] + y[1] * y[1]).sqrt();
                    let trigger = match rep {
                        Rep::Direct => {
                            if cfg.resume_past_poles {
                                n >= switch_out
                            } else {
                                n >= guard
                            }
                        }
                        Rep::Inverted => {
                            if n <= 1.0 / guard {
                                if !*in_zone {
                                    *in_zone = true;
                                    *zone_start = prev_t;
                                }
                                false
                            } else {
                                if *in_zone {
                                    *in_zone = false;
                                    poles.push(PoleBracket {
                                        t_lo: *zone_start,
                                        t_hi: t,
                                    });
                                }
                                n >= 1.0 / switch_back
                            }
                        }
                    };
                    if trigger {
                        event_prev_t = prev_t;
                        false
                    } else {
                        prev_t = t;
                        true
                    }
                })?
            };
            t_cur = stepper.t;
            state = stepper.y;
            if finished {
                break;
            }
            // A representation event fired at t_cur.
            match rep {
                Rep::Direct => {
                    if cfg.resume_past_poles {
                        let u = Complex64::new(state[0], state[1]);
                        let w = 1.0 / u;
                        state = [w.re, w.im];
                        rep = Rep::Inverted;
                    } else {
                        poles.push(PoleBracket {
                            t_lo: event_prev_t,
                            t_hi: t_cur,
                        });
                        stopped = true;
                    }
                }
                Rep::Inverted => {
                    let w = Complex64::new(state[0], state[1]);
                    let u = 1.0 / w;
                    state = [u.re, u.im];
                    rep = Rep::Direct;
                }
            }
        }
        if stopped {
            values.push(None);
        } else {
            values.push(match rep {
                Rep::Direct => Some(Complex64::new(state[0], state[1])),
                Rep::Inverted => {
                    let w = Complex64::new(state[0], state[1]);
                    if w.norm() <= 1.0 / guard {
                        None
                    } else {
                        Some(1.0 / w)
                    }
                }
            });
        }
    }
    // A pole zone still open at the end of the span.
    if in_pole_zone {
        poles.push(PoleBracket {
            t_lo: zone_start,
            t_hi: grid.end(),
        });
    }
    merge_brackets(&mut poles, grid.step());
    Ok(RiccatiTrace {
        times: grid.points().collect(),
        values,
        poles,
    })
}

fn merge_brackets(poles: &mut Vec<PoleBracket>, gap: f64) {
    if poles.is_empty() {
        return;
    }
    poles.sort_by(|a, b| a.t_lo.total_cmp(&b.t_lo));
    let mut merged = vec![poles[0]];
    for p in poles.iter().skip(1) {
        let last = merged.last_mut().expect("nonempty");
        if p.t_lo <= last.t_hi + gap {
            last.t_hi = last.t_hi.max(p.t_hi);
        } else {
            merged.push(*p);
        }
    }
    *poles = merged;
}
