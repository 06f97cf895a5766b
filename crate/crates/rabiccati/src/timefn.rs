//! Time-dependent scalar functions with exact derivatives.
//!
//! A [`RealFn`] packages a value closure together with the closure of its
//! exact derivative, so residual checks downstream never fall back to
//! finite differences. Complex quantities are always assembled from a real
//! magnitude/phase pair ([`ComplexForm`]); the magnitude is allowed to be
//! signed so that entries like `b(t)` stay smooth through zeros instead of
//! acquiring phase jumps.

use std::sync::Arc;

use num_complex::Complex64;

use crate::expr::{Expr, ExprError, Params};

type Shared = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real-valued function of time with its exact derivative.
///
/// Evaluation never returns `Result`: functions backed by expressions map
/// domain violations to NaN, which the quadrature and integrator layers
/// detect and report with the offending abscissa.
#[derive(Clone)]
pub struct RealFn {
    value: Shared,
    slope: Shared,
}

impl RealFn {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        slope: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RealFn {
            value: Arc::new(value),
            slope: Arc::new(slope),
        }
    }

    pub fn constant(v: f64) -> Self {
        RealFn::new(move |_| v, |_| 0.0)
    }

    /// A function whose derivative is never consulted; the slope is
    /// poisoned with NaN so accidental use is visible.
    pub fn value_only(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RealFn::new(value, |_| f64::NAN)
    }

    pub fn zero() -> Self {
        RealFn::constant(0.0)
    }

    /// Binds an expression (and its symbolic derivative) to parameter
    /// values. Fails if the expression mentions parameters that are not
    /// bound; runtime domain violations evaluate to NaN.
    pub fn from_expr(expr: &Expr, params: &Params) -> Result<Self, ExprError> {
        let free: Vec<String> = expr
            .free_params()
            .into_iter()
            .filter(|name| !params.contains_key(name))
            .collect();
        if let Some(name) = free.into_iter().next() {
            return Err(ExprError::Unbound(name));
        }
        let derivative = expr.differentiate();
        let (e, d) = (expr.clone(), derivative);
        let (pv, pd) = (params.clone(), params.clone());
        Ok(RealFn {
            value: Arc::new(move |t| e.eval(t, &pv).unwrap_or(f64::NAN)),
            slope: Arc::new(move |t| d.eval(t, &pd).unwrap_or(f64::NAN)),
        })
    }

    /// Parses `text` and binds it as [`Self::from_expr`].
    pub fn parse(text: &str, params: &Params) -> Result<Self, ExprError> {
        let expr = crate::expr::parse(text)?;
        Self::from_expr(&expr, params)
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        (self.slope)(t)
    }

    pub fn add(&self, other: &RealFn) -> RealFn {
        let (av, bv) = (self.clone(), other.clone());
        let (ad, bd) = (self.clone(), other.clone());
        RealFn {
            value: Arc::new(move |t| av.value(t) + bv.value(t)),
            slope: Arc::new(move |t| ad.derivative(t) + bd.derivative(t)),
        }
    }

    pub fn sub(&self, other: &RealFn) -> RealFn {
        let (av, bv) = (self.clone(), other.clone());
        let (ad, bd) = (self.clone(), other.clone());
        RealFn {
            value: Arc::new(move |t| av.value(t) - bv.value(t)),
            slope: Arc::new(move |t| ad.derivative(t) - bd.derivative(t)),
        }
    }

    pub fn scale(&self, k: f64) -> RealFn {
        let (fv, fd) = (self.clone(), self.clone());
        RealFn {
            value: Arc::new(move |t| k * fv.value(t)),
            slope: Arc::new(move |t| k * fd.derivative(t)),
        }
    }

    pub fn offset(&self, k: f64) -> RealFn {
        let (fv, fd) = (self.clone(), self.clone());
        RealFn {
            value: Arc::new(move |t| k + fv.value(t)),
            slope: Arc::new(move |t| fd.derivative(t)),
        }
    }
}

impl std::fmt::Debug for RealFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RealFn")
    }
}

/// A complex function of time in signed magnitude/phase form:
/// `z(t) = m(t)·e^{iφ(t)}` with `m` allowed to change sign.
#[derive(Clone, Debug)]
pub struct ComplexForm {
    pub mag: RealFn,
    pub phase: RealFn,
}

impl ComplexForm {
    pub fn new(mag: RealFn, phase: RealFn) -> Self {
        ComplexForm { mag, phase }
    }

    pub fn value(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.phase.value(t)) * self.mag.value(t)
    }

    /// Exact time derivative `(ṁ + i·m·φ̇)·e^{iφ}`.
    pub fn derivative(&self, t: f64) -> Complex64 {
        let m = self.mag.value(t);
        let dm = self.mag.derivative(t);
        let dphi = self.phase.derivative(t);
        Complex64::new(dm, m * dphi) * Complex64::from_polar(1.0, self.phase.value(t))
    }

    /// Unsigned modulus `|z(t)|`.
    pub fn modulus(&self, t: f64) -> f64 {
        self.mag.value(t).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{params, Params};

    #[test]
    fn expr_backed_fn_evaluates_value_and_slope() {
        let f = RealFn::parse("sin(w*t)", &params(&[("w", 2.0)])).unwrap();
        assert!((f.value(0.5) - 1.0f64.sin()).abs() < 1e-15);
        assert!((f.derivative(0.5) - 2.0 * 1.0f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn unbound_parameter_fails_at_construction() {
        assert!(RealFn::parse("w*t", &Params::new()).is_err());
    }

    #[test]
    fn domain_violation_becomes_nan() {
        let f = RealFn::parse("log(t)", &Params::new()).unwrap();
        assert!(f.value(-1.0).is_nan());
    }

    #[test]
    fn shared_types_are_send_and_sync() {
        fn check<T: Send + Sync>() {}
        check::<RealFn>();
        check::<ComplexForm>();
        check::<crate::expr::Expr>();
        check::<crate::su2::Hamiltonian>();
        check::<crate::riccati::RiccatiDre>();
        check::<crate::quad::CumulativeIntegral>();
    }

    #[test]
    fn complex_form_derivative_matches_fd() {
        let z = ComplexForm::new(
            RealFn::new(|t: f64| t.tanh(), |t: f64| 1.0 / t.cosh().powi(2)),
            RealFn::new(|t: f64| 0.3 * t * t, |t: f64| 0.6 * t),
        );
        let t = 0.8;
        let h = 1e-6;
        let fd = (z.value(t + h) - z.value(t - h)) / (2.0 * h);
        assert!((z.derivative(t) - fd).norm() < 1e-8);
    }
}
