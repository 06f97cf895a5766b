//! Adaptive Simpson quadrature and cumulative antiderivatives.
//!
//! The base rule is adaptive Simpson with a Richardson error estimate.
//! Cumulative integrals are accumulated panel by panel over a uniform grid
//! so that building a full trace stays linear in the number of nodes;
//! off-grid queries are served by one extra adaptive panel from the nearest
//! node. Integrands must be finite on the requested interval — callers
//! regularize removable singularities before handing functions here.

use crate::timefn::RealFn;

/// Maximum bisection depth; 2^20 leaf panels per top-level interval.
const MAX_DEPTH: u32 = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("quadrature did not converge on [{t_lo}, {t_hi}] (estimate {estimate}, requested {requested})")]
    NonConvergence {
        t_lo: f64,
        t_hi: f64,
        estimate: f64,
        requested: f64,
    },
    #[error("integrand is not finite at t = {at}")]
    NonFinite { at: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("grid needs t0 < t1, got [{t0}, {t1}]")]
    EmptySpan { t0: String, t1: String },
    #[error("grid needs at least 2 points, got {0}")]
    TooFewPoints(usize),
}

/// Uniform grid of `n` sample points including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    t0: f64,
    t1: f64,
    n: usize,
}

impl Grid {
    pub fn new(t0: f64, t1: f64, n: usize) -> Result<Grid, GridError> {
        if t0.is_nan() || t1.is_nan() || t0 >= t1 {
            return Err(GridError::EmptySpan {
                t0: t0.to_string(),
                t1: t1.to_string(),
            });
        }
        if n < 2 {
            return Err(GridError::TooFewPoints(n));
        }
        Ok(Grid { t0, t1, n })
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t1
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.n - 1) as f64
    }

    /// The k-th node; `point(n-1)` is exactly `t1`.
    pub fn point(&self, k: usize) -> f64 {
        debug_assert!(k < self.n);
        if k == self.n - 1 {
            self.t1
        } else {
            self.t0 + self.step() * k as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.point(k))
    }

    /// Index of the node nearest to `t` (clamped to the grid).
    pub fn nearest(&self, t: f64) -> usize {
        let raw = ((t - self.t0) / self.step()).round();
        (raw.max(0.0) as usize).min(self.n - 1)
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn sample(f: &dyn Fn(f64) -> f64, t: f64) -> Result<f64, QuadError> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadError::NonFinite { at: t })
    }
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadError> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = sample(f, lm)?;
    let frm = sample(f, rm)?;
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(QuadError::NonConvergence {
            t_lo: a,
            t_hi: b,
            estimate: delta.abs() / 15.0,
            requested: tol,
        });
    }
    let half = 0.5 * tol;
    Ok(adapt(f, a, fa, lm, flm, m, fm, left, half, depth + 1)?
        + adapt(f, m, fm, rm, frm, b, fb, right, half, depth + 1)?)
}

/// Adaptive integral of `f` over `[a, b]` with estimated absolute error
/// at most `tol`. `a > b` is handled by orientation.
pub fn integrate(f: &RealFn, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    integrate_fn(&|t| f.value(t), a, b, tol)
}

/// As [`integrate`] but over a plain closure.
pub fn integrate_fn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    assert!(tol > 0.0, "tolerance must be positive");
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Ok(-integrate_fn(f, b, a, tol)?);
    }
    let m = 0.5 * (a + b);
    let fa = sample(f, a)?;
    let fm = sample(f, m)?;
    let fb = sample(f, b)?;
    let whole = simpson(fa, fm, fb, b - a);
    adapt(f, a, fa, m, fm, b, fb, whole, tol, 0)
}

/// Prefix integrals of a function over a [`Grid`]:
/// `prefix[k] = ∫_{t0}^{t_k} f`, built panel by panel in one pass.
#[derive(Clone)]
pub struct CumulativeIntegral {
    source: RealFn,
    grid: Grid,
    prefix: Vec<f64>,
    panel_tol: f64,
}

impl CumulativeIntegral {
    /// Builds the prefix table. The total error budget `tol` is split evenly
    /// across panels.
    pub fn build(source: RealFn, grid: Grid, tol: f64) -> Result<Self, QuadError> {
        assert!(tol > 0.0, "tolerance must be positive");
        let panel_tol = tol / (grid.len() - 1) as f64;
        let mut prefix = Vec::with_capacity(grid.len());
        prefix.push(0.0);
        let mut acc = 0.0;
        for k in 1..grid.len() {
            acc += integrate(&source, grid.point(k - 1), grid.point(k), panel_tol)?;
            prefix.push(acc);
        }
        Ok(CumulativeIntegral {
            source,
            grid,
            prefix,
            panel_tol,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    /// Value at the k-th grid node.
    pub fn at_node(&self, k: usize) -> f64 {
        self.prefix[k]
    }

    /// `∫_{t0}^{t} f` for arbitrary `t`: the nearest node's prefix plus one
    /// adaptive panel.
    pub fn query(&self, t: f64) -> Result<f64, QuadError> {
        let k = self.grid.nearest(t);
        let node = self.grid.point(k);
        if t == node {
            return Ok(self.prefix[k]);
        }
        Ok(self.prefix[k] + integrate(&self.source, node, t, self.panel_tol)?)
    }

    /// As [`Self::query`] but mapping failures to NaN, for use inside plain
    /// `f64`-valued closures. Downstream quadrature aborts on NaN samples.
    pub fn query_or_nan(&self, t: f64) -> f64 {
        self.query(t).unwrap_or(f64::NAN)
    }
}
