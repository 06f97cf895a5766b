//! The associated Riccati equation, its particular solutions, and the
//! general integral.
//!
//! With `u = b/a*`, the entry system turns into the scalar Riccati
//! equation `u̇ = iω*u² − 2iΩu − iω`, whose coefficients have the class
//! shape `ẏ = f*y² + gy + f` with `f = −iω`, `g = −2iΩ`. The module
//! canonically stores the class in that form; the mirrored convention
//! `ẏ = fy² + gy + f*` is accepted on input and normalized on
//! construction.
//!
//! Given a particular solution `ū` with `ū(0) = 0`, the general integral is
//!
//! ```text
//! u = ū + Φ·(C₀ − i∫₀ᵗ ω*Φ dt′)⁻¹,   Φ = exp{2i∫₀ᵗ [ω*ū − Ω] dt′},
//! ```
//!
//! a one-parameter family with movable poles where the denominator
//! vanishes. The nested quadrature is computed on a shared grid with
//! cumulative caching; off-grid requests interpolate Φ's exponent (which
//! is smooth) cubically, never Φ itself.

use std::sync::Arc;

use num_complex::Complex64;

use crate::quad::{CumulativeIntegral, Grid, QuadError};
use crate::su2::{Hamiltonian, PropagatorEntries};
use crate::timefn::{ComplexForm, RealFn};

pub type CoefficientFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RiccatiError {
    #[error("|a| = {abs_a} below 1e-12 at t = {t}: u = b/a* has a movable singularity here")]
    PoleSignal { t: f64, abs_a: f64 },
    #[error("general integral requires the associated class shape (f*, g, f) with g purely imaginary; found Re-part {found} at t = {t}")]
    NotAssociated { t: f64, found: f64 },
    #[error("movable pole: |denominator| < 1e-12 inside [{t_lo}, {t_hi}]")]
    MovablePole { t_lo: f64, t_hi: f64 },
    #[error("parameter out of family domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Scalar Riccati equation `ẏ = A(t)y² + B(t)y + C(t)`.
///
/// `class_shape` marks coefficients satisfying `A = conj(C)` (the shape
/// every Hamiltonian-associated equation has).
#[derive(Clone)]
pub struct RiccatiDre {
    quadratic: CoefficientFn,
    linear: CoefficientFn,
    constant: CoefficientFn,
    class_shape: bool,
}

impl RiccatiDre {
    /// General coefficients, no class structure assumed.
    pub fn new(quadratic: CoefficientFn, linear: CoefficientFn, constant: CoefficientFn) -> Self {
        RiccatiDre {
            quadratic,
            linear,
            constant,
            class_shape: false,
        }
    }

    /// The canonical class form `ẏ = f*y² + gy + f`.
    pub fn class_form(f: CoefficientFn, g: CoefficientFn) -> Self {
        let f2 = f.clone();
        RiccatiDre {
            quadratic: Arc::new(move |t| f2(t).conj()),
            linear: g,
            constant: f,
            class_shape: true,
        }
    }

    /// The mirrored convention `ẏ = fy² + gy + f*`; normalized by
    /// relabeling `f ↔ f*`.
    pub fn class_form_mirrored(f: CoefficientFn, g: CoefficientFn) -> Self {
        let f2 = f.clone();
        Self::class_form(Arc::new(move |t| f2(t).conj()), g)
    }

    pub fn is_class_shape(&self) -> bool {
        self.class_shape
    }

    pub fn quadratic(&self, t: f64) -> Complex64 {
        (self.quadratic)(t)
    }

    pub fn linear(&self, t: f64) -> Complex64 {
        (self.linear)(t)
    }

    pub fn constant(&self, t: f64) -> Complex64 {
        (self.constant)(t)
    }

    /// `A(t)y² + B(t)y + C(t)`.
    pub fn rhs(&self, y: Complex64, t: f64) -> Complex64 {
        (self.quadratic)(t) * y * y + (self.linear)(t) * y + (self.constant)(t)
    }
}

impl std::fmt::Debug for RiccatiDre {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RiccatiDre")
            .field("class_shape", &self.class_shape)
            .finish()
    }
}

/// The Riccati equation associated to a Rabi problem:
/// `u̇ = iω*u² − 2iΩu − iω`, i.e. class form with `f = −iω`, `g = −2iΩ`.
pub fn associate(h: &Hamiltonian) -> RiccatiDre {
    let i = Complex64::i();
    let hf = h.clone();
    let hg = h.clone();
    RiccatiDre::class_form(
        Arc::new(move |t| -i * hf.transverse(t)),
        Arc::new(move |t| -2.0 * i * hg.longitudinal.value(t)),
    )
}

/// `u = b/a*`. Fails with a pole signal when `|a|` is below 1e-12.
pub fn u_from_entries(e: &PropagatorEntries) -> Result<Complex64, RiccatiError> {
    u_from_entries_at(e, f64::NAN)
}

/// As [`u_from_entries`], recording the time in the pole signal.
pub fn u_from_entries_at(e: &PropagatorEntries, t: f64) -> Result<Complex64, RiccatiError> {
    let abs_a = e.a.norm();
    if abs_a < 1e-12 {
        return Err(RiccatiError::PoleSignal { t, abs_a });
    }
    Ok(e.b / e.a.conj())
}

/// ∞-norm of the defect of a closed-form solution in the equation, using
/// the form's exact derivative.
pub fn riccati_residual(dre: &RiccatiDre, u: &ComplexForm, t: f64) -> f64 {
    (u.derivative(t) - dre.rhs(u.value(t), t)).norm()
}

/// How far the coefficients are from the class shape `A = conj(C)` at `t`.
pub fn class_shape_defect(dre: &RiccatiDre, t: f64) -> f64 {
    (dre.quadratic(t) - dre.constant(t).conj()).norm()
}

// ---------------------------------------------------------------------------
// General integral
// ---------------------------------------------------------------------------

/// Denominator magnitude below which a sample is flagged as inside a
/// movable-pole band.
const POLE_BAND: f64 = 1e-3;
/// Denominator magnitude treated as an exact pole hit.
const POLE_EXACT: f64 = 1e-12;

/// The general integral `u = ū + Φ(C₀ − i∫₀ᵗω*Φ)⁻¹` of an associated-class
/// equation, built once over a grid and queryable anywhere on it.
pub struct GeneralIntegral {
    ubar: ComplexForm,
    c0: Complex64,
    grid: Grid,
    // Φ's exponent at the nodes and its exact derivative there, for cubic
    // Hermite interpolation off-grid.
    exp_re: Vec<f64>,
    exp_im: Vec<f64>,
    dexp_re: Vec<f64>,
    dexp_im: Vec<f64>,
    denom_re: CumulativeIntegral,
    denom_im: CumulativeIntegral,
    omega: CoefficientFn,
    poles: Vec<(f64, f64)>,
}

impl GeneralIntegral {
    /// Builds the integrating factor and denominator caches.
    ///
    /// `dre` must be an associated-class equation (`A = conj(C)`, `B`
    /// purely imaginary); `ubar` must be a particular solution of it with
    /// `ū(0) = 0`.
    pub fn build(
        dre: &RiccatiDre,
        ubar: &ComplexForm,
        c0: Complex64,
        grid: Grid,
        tol: f64,
    ) -> Result<Self, RiccatiError> {
        // Recover ω = iC and Ω = iB/2 from the class coefficients.
        let omega: CoefficientFn = {
            let c = dre.constant.clone();
            Arc::new(move |t| Complex64::i() * c(t))
        };
        let omega_z = {
            let b = dre.linear.clone();
            move |t: f64| Complex64::i() * b(t) / 2.0
        };
        for t in grid.points() {
            let defect = class_shape_defect(dre, t).max(omega_z(t).im.abs());
            if defect > 1e-9 {
                return Err(RiccatiError::NotAssociated { t, found: defect });
            }
        }

        // Exponent integrand 2i(ω*ū − Ω), split into real and imaginary parts.
        let integrand = {
            let omega = omega.clone();
            let ubar = ubar.clone();
            move |t: f64| {
                let v = omega(t).conj() * ubar.value(t) - omega_z(t).re;
                2.0 * Complex64::i() * v
            }
        };
        let exp_re_src = {
            let g = integrand.clone();
            RealFn::value_only(move |t| g(t).re)
        };
        let exp_im_src = {
            let g = integrand.clone();
            RealFn::value_only(move |t| g(t).im)
        };
        let cum_re = CumulativeIntegral::build(exp_re_src, grid, tol)?;
        let cum_im = CumulativeIntegral::build(exp_im_src, grid, tol)?;
        let exp_re: Vec<f64> = cum_re.prefix().to_vec();
        let exp_im: Vec<f64> = cum_im.prefix().to_vec();
        let mut dexp_re = Vec::with_capacity(grid.len());
        let mut dexp_im = Vec::with_capacity(grid.len());
        for t in grid.points() {
            let v = integrand(t);
            dexp_re.push(v.re);
            dexp_im.push(v.im);
        }

        // Denominator integrand ω*(t)·Φ(t) through the interpolated exponent.
        let phi_at = {
            let exp_re = exp_re.clone();
            let exp_im = exp_im.clone();
            let dexp_re = dexp_re.clone();
            let dexp_im = dexp_im.clone();
            move |t: f64| {
                let e_re = hermite(&grid, &exp_re, &dexp_re, t);
                let e_im = hermite(&grid, &exp_im, &dexp_im, t);
                Complex64::from_polar(e_re.exp(), e_im)
            }
        };
        let denom_re = {
            let omega = omega.clone();
            let phi = phi_at.clone();
            CumulativeIntegral::build(
                RealFn::value_only(move |t| (omega(t).conj() * phi(t)).re),
                grid,
                tol,
            )?
        };
        let denom_im = {
            let omega = omega.clone();
            let phi = phi_at;
            CumulativeIntegral::build(
                RealFn::value_only(move |t| (omega(t).conj() * phi(t)).im),
                grid,
                tol,
            )?
        };

        let mut built = GeneralIntegral {
            ubar: ubar.clone(),
            c0,
            grid,
            exp_re,
            exp_im,
            dexp_re,
            dexp_im,
            denom_re,
            denom_im,
            omega,
            poles: Vec::new(),
        };
        built.poles = built.scan_poles();
        Ok(built)
    }

    fn scan_poles(&self) -> Vec<(f64, f64)> {
        let mut bands = Vec::new();
        let mut open: Option<f64> = None;
        for k in 0..self.grid.len() {
            let t = self.grid.point(k);
            let inside = self.denominator(t).norm() < POLE_BAND;
            match (inside, open) {
                (true, None) => open = Some(if k == 0 { t } else { self.grid.point(k - 1) }),
                (false, Some(start)) => {
                    bands.push((start, t));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            bands.push((start, self.grid.end()));
        }
        bands
    }

    /// Integrating factor `Φ(t)`; `Φ(0) = 1`.
    pub fn phi(&self, t: f64) -> Complex64 {
        let e_re = hermite(&self.grid, &self.exp_re, &self.dexp_re, t);
        let e_im = hermite(&self.grid, &self.exp_im, &self.dexp_im, t);
        Complex64::from_polar(e_re.exp(), e_im)
    }

    /// `C₀ − i∫₀ᵗ ω*Φ`.
    pub fn denominator(&self, t: f64) -> Complex64 {
        let d = Complex64::new(self.denom_re.query_or_nan(t), self.denom_im.query_or_nan(t));
        self.c0 - Complex64::i() * d
    }

    /// Intervals (in grid resolution) where `|denominator| < 1e-3`.
    pub fn pole_bands(&self) -> &[(f64, f64)] {
        &self.poles
    }

    /// `u(t)`; reports a movable pole when the denominator is below 1e-12.
    pub fn value(&self, t: f64) -> Result<Complex64, RiccatiError> {
        let denom = self.denominator(t);
        if denom.norm() < POLE_EXACT {
            return Err(self.pole_error(t));
        }
        Ok(self.ubar.value(t) + self.phi(t) / denom)
    }

    // The enclosing node interval as the pole bracket.
    fn pole_error(&self, t: f64) -> RiccatiError {
        let k = self.grid.nearest(t);
        let lo = if k == 0 { 0 } else { k - 1 };
        let hi = (k + 1).min(self.grid.len() - 1);
        RiccatiError::MovablePole {
            t_lo: self.grid.point(lo),
            t_hi: self.grid.point(hi),
        }
    }

    /// Exact `u̇(t)` of the constructed family (up to cache accuracy):
    /// `u̇ = ū̇ + Φ̇/D + iω*Φ²/D²` with `Φ̇ = Φ·2i(ω*ū − Ω)`.
    pub fn derivative(&self, t: f64) -> Result<Complex64, RiccatiError> {
        let denom = self.denominator(t);
        if denom.norm() < POLE_EXACT {
            return Err(self.pole_error(t));
        }
        let phi = self.phi(t);
        let omega = (self.omega)(t);
        let exponent_slope = {
            let e_re = hermite_slope(&self.grid, &self.exp_re, &self.dexp_re, t);
            let e_im = hermite_slope(&self.grid, &self.exp_im, &self.dexp_im, t);
            Complex64::new(e_re, e_im)
        };
        let dphi = phi * exponent_slope;
        Ok(self.ubar.derivative(t)
            + dphi / denom
            + Complex64::i() * omega.conj() * phi * phi / (denom * denom))
    }
}

fn hermite_cell(grid: &Grid, t: f64) -> (usize, f64, f64) {
    let h = grid.step();
    let raw = ((t - grid.start()) / h).floor();
    let k = (raw.max(0.0) as usize).min(grid.len() - 2);
    let s = (t - grid.point(k)) / h;
    (k, s, h)
}

// Cubic Hermite interpolation with exact node derivatives.
fn hermite(grid: &Grid, y: &[f64], dy: &[f64], t: f64) -> f64 {
    let (k, s, h) = hermite_cell(grid, t);
    if s == 0.0 {
        return y[k];
    }
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y[k] + h10 * h * dy[k] + h01 * y[k + 1] + h11 * h * dy[k + 1]
}

// ---------------------------------------------------------------------------
// Particular solutions
// ---------------------------------------------------------------------------

/// Particular solution `ū = −iX·exp{−2i(∫₀ᵗΩ + ∫₀ᵗκ)}` of the Riccati
/// equation associated to the recipe's Hamiltonian; `ū(0) = 0` and
/// `|ū| = |X|` pointwise.
pub fn particular_from_x(recipe: &crate::generator::XRecipe) -> ComplexForm {
    recipe.particular_solution()
}

/// The f/g variant of [`particular_from_x`]: the class-form linear
/// coefficient `g` replaces `−2iΩ`, so `g` must be purely imaginary
/// (`g = −2iΩ` with real `Ω`).
pub fn particular_from_class(
    x: crate::generator::GeneratorX,
    g: CoefficientFn,
    grid: Grid,
    tol: f64,
) -> Result<ComplexForm, RiccatiError> {
    for t in grid.points() {
        let re = g(t).re;
        if re.abs() > 1e-9 {
            return Err(RiccatiError::NotAssociated { t, found: re });
        }
    }
    let omega_z = RealFn::value_only(move |t| (Complex64::i() * g(t) / 2.0).re);
    let recipe = crate::generator::XRecipe::build(x, omega_z, grid, tol)
        .map_err(|e| RiccatiError::Domain(e.to_string()))?;
    Ok(recipe.particular_solution())
}

/// The solvable class parameterized by `c ≠ 0` and `f = |f|·e^{iφ_f}` with
/// `φ_f(0) = 0`: the coefficient link `|f|/c = ig/2 + φ̇_f/2` determines
/// `g = −i(2|f|/c − φ̇_f)` (purely imaginary), and the equation
/// `ẏ = f*y² + gy + f` has the closed-form particular solution
///
/// ```text
/// y = c·sinΦ₁/√(1+c²cos²Φ₁)·e^{i(φ_f − β)},
/// Φ₁ = (√(1+c²)/c)∫₀ᵗ|f|,   β = tan⁻¹(tanΦ₁/√(1+c²)) branch-continued.
/// ```
pub fn example1_family(
    c: f64,
    f_mag: RealFn,
    f_phase: RealFn,
    grid: Grid,
    tol: f64,
) -> Result<(RiccatiDre, ComplexForm), RiccatiError> {
    if c == 0.0 {
        return Err(RiccatiError::Domain("c must be nonzero".to_string()));
    }
    let phase0 = f_phase.value(0.0);
    if phase0.abs() > 1e-9 {
        return Err(RiccatiError::Domain(format!(
            "φ_f(0) must vanish, got {phase0}"
        )));
    }
    let s = (1.0 + c * c).sqrt();

    let dre = {
        let (fm, fp) = (f_mag.clone(), f_phase.clone());
        let f: CoefficientFn =
            Arc::new(move |t| Complex64::from_polar(1.0, fp.value(t)) * fm.value(t));
        let (gm, gp) = (f_mag.clone(), f_phase.clone());
        let g: CoefficientFn =
            Arc::new(move |t| Complex64::new(0.0, -(2.0 * gm.value(t) / c - gp.derivative(t))));
        RiccatiDre::class_form(f, g)
    };

    let integral = CumulativeIntegral::build(f_mag.clone(), grid, tol)?;
    let phi1 = {
        let f_mag = f_mag.clone();
        RealFn::new(
            move |t| s / c * integral.query_or_nan(t),
            move |t| s / c * f_mag.value(t),
        )
    };
    let mag = {
        let (p1, p2) = (phi1.clone(), phi1.clone());
        RealFn::new(
            move |t| {
                let p = p1.value(t);
                c * p.sin() / (1.0 + c * c * p.cos() * p.cos()).sqrt()
            },
            move |t| {
                let p = p2.value(t);
                c * p2.derivative(t) * p.cos() * (1.0 + c * c)
                    / (1.0 + c * c * p.cos() * p.cos()).powf(1.5)
            },
        )
    };
    let beta = branch_continued_arctan(c, &phi1);
    let phase = f_phase.sub(&beta);
    Ok((dre, ComplexForm::new(mag, phase)))
}

/// `β = tan⁻¹(tanΦ₁/√(1+c²))` continued across the principal-branch
/// boundaries (β passes kπ exactly when Φ₁ does). Computed jump-free as
/// `β = Φ₁ + tan⁻¹[(1−s)sinΦ₁cosΦ₁/(s·cos²Φ₁+sin²Φ₁)]` with `s = √(1+c²)`;
/// the correction stays within (−π/2, π/2) and the denominator is
/// positive, so no branch tracking is needed. Exact slope
/// `β̇ = s·Φ̇₁/(1+c²cos²Φ₁)`.
pub fn branch_continued_arctan(c: f64, phi1: &RealFn) -> RealFn {
    let s = (1.0 + c * c).sqrt();
    let (p1, p2) = (phi1.clone(), phi1.clone());
    RealFn::new(
        move |t| {
            let p = p1.value(t);
            let (sin, cos) = p.sin_cos();
            p + ((1.0 - s) * sin * cos / (s * cos * cos + sin * sin)).atan()
        },
        move |t| {
            let p = p2.value(t);
            s * p2.derivative(t) / (1.0 + c * c * p.cos() * p.cos())
        },
    )
}

fn hermite_slope(grid: &Grid, y: &[f64], dy: &[f64], t: f64) -> f64 {
    let (k, s, h) = hermite_cell(grid, t);
    if s == 0.0 {
        return dy[k];
    }
    let s2 = s * s;
    let d00 = (6.0 * s2 - 6.0 * s) / h;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = (-6.0 * s2 + 6.0 * s) / h;
    let d11 = 3.0 * s2 - 2.0 * s;
    d00 * y[k] + d10 * dy[k] + d01 * y[k + 1] + d11 * dy[k + 1]
}

#[cfg(test)]
mod tests;
