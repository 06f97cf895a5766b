//! Named, parameterized construction of the worked solvable cases.
//!
//! Every case takes a constant transverse magnitude `w = |ω| > 0`
//! (default 1) and a transverse phase expression `φ_ω(t)` with
//! `φ_ω(0) = 0` (default `"0"`); `example1` additionally takes the real
//! constant `c ≠ 0` (default 1). Closed forms are stated through the expression
//! language so residual checks run with exact derivatives; the only
//! quadrature-backed ingredients are the `R` phase integrals of the
//! Θ-family cases, whose exact derivative is the integrand itself.
//!
//! Entry magnitudes are kept *signed* (`sinh`, `sin Φ₁`, ...) with smooth
//! phases, rather than absolute values with phase jumps, so the entries
//! stay differentiable through zeros of `b`.

use crate::expr::{parse, Expr, ExprError, Params};
use crate::generator::GeneratorError;
use crate::quad::{CumulativeIntegral, Grid, GridError, QuadError};
use crate::riccati::{self, RiccatiDre};
use crate::su2::{Hamiltonian, PropagatorEntries};
use crate::timefn::{ComplexForm, RealFn};

/// Number of cache nodes for the quadrature-backed phases.
const CACHE_NODES: usize = 2001;

pub const CASE_NAMES: [&str; 6] = [
    "scenario_tanh",
    "scenario_sinh",
    "example1",
    "theta_sine",
    "theta_arctan_a",
    "theta_arctan_b",
];

/// Names of the available cases, stable across runs.
pub fn list_cases() -> Vec<&'static str> {
    CASE_NAMES.to_vec()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown case `{0}`")]
    UnknownCase(String),
    #[error("parameter out of family domain: {0}")]
    BadParameter(String),
    #[error("in φ_ω expression: {0}")]
    Phase(#[from] ExprError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// Parameters shared by the catalog families.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseParams {
    /// Constant transverse magnitude `|ω|`.
    pub omega_mag: f64,
    /// Transverse phase `φ_ω(t)` as an expression in `t` (may mention the
    /// parameters `w` and `c`); must vanish at `t = 0`.
    pub phi_omega: String,
    /// Family constant of `example1`.
    pub c: f64,
}

impl Default for CaseParams {
    fn default() -> Self {
        CaseParams {
            omega_mag: 1.0,
            phi_omega: "0".to_string(),
            c: 1.0,
        }
    }
}

/// A fully built solvable case: Hamiltonian, closed-form entries, the
/// associated Riccati equation, and its particular solution `ū = b/a*`.
pub struct CaseBundle {
    pub name: &'static str,
    pub params: CaseParams,
    pub t_max: f64,
    pub hamiltonian: Hamiltonian,
    pub entry_a: ComplexForm,
    pub entry_b: ComplexForm,
    pub dre: RiccatiDre,
    pub particular: ComplexForm,
}

impl CaseBundle {
    pub fn entries(&self, t: f64) -> PropagatorEntries {
        PropagatorEntries::new(self.entry_a.value(t), self.entry_b.value(t))
    }

    /// Default verification grid for this bundle.
    pub fn default_grid(&self, n: usize) -> Grid {
        Grid::new(0.0, self.t_max, n).expect("t_max > 0")
    }

    pub fn max_unitarity_defect(&self, grid: &Grid) -> f64 {
        grid.points()
            .map(|t| self.entries(t).unitarity_defect())
            .fold(0.0, f64::max)
    }

    pub fn max_schrodinger_residual(&self, grid: &Grid) -> f64 {
        grid.points()
            .map(|t| {
                crate::su2::schrodinger_residual(&self.hamiltonian, &self.entry_a, &self.entry_b, t)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_riccati_residual(&self, grid: &Grid) -> f64 {
        grid.points()
            .map(|t| riccati::riccati_residual(&self.dre, &self.particular, t))
            .fold(0.0, f64::max)
    }

    /// Largest pointwise defect of `ū = b/a*` over the grid.
    pub fn max_particular_consistency_defect(&self, grid: &Grid) -> f64 {
        grid.points()
            .map(|t| {
                let e = self.entries(t);
                match riccati::u_from_entries(&e) {
                    Ok(u) => (u - self.particular.value(t)).norm(),
                    Err(_) => f64::INFINITY,
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Builds a named case. `t_max` defaults to `3/w`; `tol` is the cache
/// quadrature tolerance (1e-10 is the library default).
pub fn build_case(
    name: &str,
    params: &CaseParams,
    t_max: Option<f64>,
    tol: f64,
) -> Result<CaseBundle, CatalogError> {
    let w = params.omega_mag;
    if !w.is_finite() || w <= 0.0 {
        return Err(CatalogError::BadParameter(format!(
            "|ω| must be positive and finite, got {w}"
        )));
    }
    let t_max = t_max.unwrap_or(3.0 / w);
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(CatalogError::BadParameter(format!(
            "t_max must be positive, got {t_max}"
        )));
    }

    let phi = parse(&params.phi_omega).map_err(ExprError::from)?;
    let binds = crate::expr::params(&[("w", w), ("c", params.c)]);
    let phi_at0 = phi
        .eval(0.0, &binds)
        .map_err(|e| CatalogError::BadParameter(format!("φ_ω(0) not evaluable: {e}")))?;
    if phi_at0.abs() > 1e-9 {
        return Err(CatalogError::BadParameter(format!(
            "φ_ω(0) must vanish, got {phi_at0}"
        )));
    }

    let ctx = Ctx {
        params: params.clone(),
        t_max,
        tol,
        binds,
        phi_text: format!("({phi})"),
        dphi_text: format!("({})", phi.differentiate()),
        phi,
    };
    match name {
        "scenario_tanh" => scenario_tanh(&ctx),
        "scenario_sinh" => scenario_sinh(&ctx),
        "example1" => example1(&ctx),
        "theta_sine" => theta_sine(&ctx),
        "theta_arctan_a" => theta_arctan_a(&ctx),
        "theta_arctan_b" => theta_arctan_b(&ctx),
        other => Err(CatalogError::UnknownCase(other.to_string())),
    }
}

struct Ctx {
    params: CaseParams,
    t_max: f64,
    tol: f64,
    binds: Params,
    phi: Expr,
    /// `φ_ω` and `dφ_ω/dt` pretty-printed for splicing into templates.
    phi_text: String,
    dphi_text: String,
}

impl Ctx {
    fn dsl(&self, template: &str) -> RealFn {
        // DPHI first: it contains PHI as a substring.
        let text = template
            .replace("DPHI", &self.dphi_text)
            .replace("PHI", &self.phi_text);
        let expr = parse(&text).unwrap_or_else(|e| panic!("bad catalog template `{text}`: {e}"));
        RealFn::from_expr(&expr, &self.binds).expect("catalog templates bind w and c only")
    }

    fn cache_grid(&self) -> Grid {
        Grid::new(0.0, self.t_max, CACHE_NODES).expect("t_max > 0")
    }

    fn hamiltonian(&self, omega_z: RealFn) -> Hamiltonian {
        Hamiltonian::new(omega_z, self.dsl("w"), self.dsl("PHI"))
    }

    fn bundle(
        &self,
        name: &'static str,
        omega_z: RealFn,
        entry_a: ComplexForm,
        entry_b: ComplexForm,
        particular: ComplexForm,
    ) -> CaseBundle {
        let hamiltonian = self.hamiltonian(omega_z);
        let dre = riccati::associate(&hamiltonian);
        CaseBundle {
            name,
            params: self.params.clone(),
            t_max: self.t_max,
            hamiltonian,
            entry_a,
            entry_b,
            dre,
            particular,
        }
    }
}

// base ± ∫integrand, with the exact slope base' ± integrand.
fn with_integral(
    base: &RealFn,
    integral: &CumulativeIntegral,
    integrand: &RealFn,
    sign: f64,
) -> RealFn {
    let (b1, b2) = (base.clone(), base.clone());
    let integral = integral.clone();
    let integrand = integrand.clone();
    RealFn::new(
        move |t| b1.value(t) + sign * integral.query_or_nan(t),
        move |t| b2.derivative(t) + sign * integrand.value(t),
    )
}

/// `Ω = 2w/cosh(2wt) − φ̇_ω/2`, entries built from `cosh/sinh` over
/// `√cosh(2wt)` with `tan⁻¹ tanh` phases.
fn scenario_tanh(ctx: &Ctx) -> Result<CaseBundle, CatalogError> {
    let omega_z = ctx.dsl("2*w/cosh(2*w*t) - DPHI/2");
    let entry_a = ComplexForm::new(
        ctx.dsl("cosh(w*t)/sqrt(cosh(2*w*t))"),
        ctx.dsl("PHI/2 - atan(tanh(w*t)) - w*t"),
    );
    let entry_b = ComplexForm::new(
        ctx.dsl("sinh(w*t)/sqrt(cosh(2*w*t))"),
        ctx.dsl("PHI/2 - atan(tanh(w*t)) + w*t - pi/2"),
    );
    let particular = ComplexForm::new(
        ctx.dsl("tanh(w*t)"),
        ctx.dsl("PHI - 2*atan(tanh(w*t)) - pi/2"),
    );
    Ok(ctx.bundle("scenario_tanh", omega_z, entry_a, entry_b, particular))
}

/// `Ω = (w/2)(3/cosh(wt) − cosh(wt)) − φ̇_ω/2`, entries `1/cosh` and `tanh`
/// with `sinh`-drifting phases.
fn scenario_sinh(ctx: &Ctx) -> Result<CaseBundle, CatalogError> {
    let omega_z = ctx.dsl("(w/2)*(3/cosh(w*t) - cosh(w*t)) - DPHI/2");
    let entry_a = ComplexForm::new(
        ctx.dsl("1/cosh(w*t)"),
        ctx.dsl("PHI/2 - atan(tanh(w*t/2)) - sinh(w*t)/2"),
    );
    let entry_b = ComplexForm::new(
        ctx.dsl("tanh(w*t)"),
        ctx.dsl("PHI/2 - atan(tanh(w*t/2)) + sinh(w*t)/2 - pi/2"),
    );
    let particular = ComplexForm::new(
        ctx.dsl("sinh(w*t)"),
        ctx.dsl("PHI - 2*atan(tanh(w*t/2)) - pi/2"),
    );
    Ok(ctx.bundle("scenario_sinh", omega_z, entry_a, entry_b, particular))
}

/// The family `X = c·sin(φ)e^{iφ}` driven by constant `|ω|`:
/// `Φ₁ = (√(1+c²)/c)·wt`, `Ω = w/c − φ̇_ω/2`, with the branch-continued
/// arctan in the phase of `a` and `ū`.
fn example1(ctx: &Ctx) -> Result<CaseBundle, CatalogError> {
    let c = ctx.params.c;
    if c == 0.0 || !c.is_finite() {
        return Err(CatalogError::BadParameter(format!(
            "c must be nonzero and finite, got {c}"
        )));
    }
    let omega_z = ctx.dsl("w/c - DPHI/2");
    let phi1 = ctx.dsl("sqrt(1+c^2)/c*w*t");
    let beta = riccati::branch_continued_arctan(c, &phi1);
    let entry_a = ComplexForm::new(
        ctx.dsl("sqrt((1+c^2*cos(sqrt(1+c^2)/c*w*t)^2)/(1+c^2))"),
        ctx.dsl("PHI/2").sub(&beta),
    );
    let entry_b = ComplexForm::new(
        ctx.dsl("c*sin(sqrt(1+c^2)/c*w*t)/sqrt(1+c^2)"),
        ctx.dsl("PHI/2 - pi/2"),
    );
    let particular = ComplexForm::new(
        ctx.dsl("c*sin(sqrt(1+c^2)/c*w*t)/sqrt(1+c^2*cos(sqrt(1+c^2)/c*w*t)^2)"),
        ctx.dsl("PHI - pi/2").sub(&beta),
    );
    Ok(ctx.bundle("example1", omega_z, entry_a, entry_b, particular))
}

/// `Θ = ∫|ω| = wt`: the pulse area collapses to `P = sin(wt)`, and the
/// longitudinal field carries the removable `sin·cot(2 sin)` term.
fn theta_sine(ctx: &Ctx) -> Result<CaseBundle, CatalogError> {
    let w = ctx.params.omega_mag;
    let cutoff = 1e-4 * ctx.t_max;
    if ctx.t_max * w >= std::f64::consts::PI {
        return Err(CatalogError::BadParameter(format!(
            "theta_sine needs w·t_max < π to stay inside the regular window, got {}",
            ctx.t_max * w
        )));
    }

    // Ω = (w − φ̇_ω)/2 + w·sin(wt)·cot(2 sin(wt)), limit w − φ̇_ω/2 at 0.
    let base = ctx.dsl("(w - DPHI)/2");
    let ddphi_text = format!("({})", ctx.phi.differentiate().differentiate());
    let ddphi = ctx.dsl(&format!("{ddphi_text} / 2"));
    let omega_z = {
        let base = base.clone();
        let ddphi = ddphi.clone();
        RealFn::new(
            move |t| {
                let s = w * t;
                base.value(t)
                    + if t < cutoff {
                        w / 2.0
                    } else {
                        w * s.sin() * (2.0 * s.sin()).cos() / (2.0 * s.sin()).sin()
                    }
            },
            move |t| {
                let s = w * t;
                -ddphi.value(t)
                    + if t < cutoff {
                        -(4.0 / 3.0) * w * w * s
                    } else {
                        let cot = (2.0 * s.sin()).cos() / (2.0 * s.sin()).sin();
                        w * w * s.cos() * (cot - 2.0 * s.sin() * (1.0 + cot * cot))
                    }
            },
        )
    };

    // R = ∫ w·sin(wt′)/sin(2 sin(wt′)) dt′, integrand limit w/2 at 0.
    let r_integrand = RealFn::new(
        move |t| {
            if t < cutoff {
                w / 2.0
            } else {
                let s = w * t;
                w * s.sin() / (2.0 * s.sin()).sin()
            }
        },
        |_| f64::NAN,
    );
    let r = CumulativeIntegral::build(r_integrand.clone(), ctx.cache_grid(), ctx.tol)?;

    let entry_a = ComplexForm::new(
        ctx.dsl("cos(sin(w*t))"),
        with_integral(&ctx.dsl("PHI/2 - w*t/2"), &r, &r_integrand, -1.0),
    );
    let entry_b = ComplexForm::new(
        ctx.dsl("sin(sin(w*t))"),
        with_integral(&ctx.dsl("PHI/2 - w*t/2 - pi/2"), &r, &r_integrand, 1.0),
    );
    let particular = ComplexForm::new(ctx.dsl("tan(sin(w*t))"), ctx.dsl("PHI - w*t - pi/2"));
    Ok(ctx.bundle("theta_sine", omega_z, entry_a, entry_b, particular))
}

/// `Θ = 2·tan⁻¹(2wt/√(2+4(wt)²))`: pulse area `P = ½tan⁻¹(2wt)` and an
/// elliptic-type `R` with the closed integrand `w√(2+4τ²)/√(1+4τ²)`.
fn theta_arctan_a(ctx: &Ctx) -> Result<CaseBundle, CatalogError> {
    let omega_z = ctx.dsl("4*w*(1+(w*t)^2)/((1+4*(w*t)^2)*sqrt(2+4*(w*t)^2)) - DPHI/2");
    let r_integrand = ctx.dsl("w*sqrt(2+4*(w*t)^2)/sqrt(1+4*(w*t)^2)");
    let r = CumulativeIntegral::build(r_integrand.clone(), ctx.cache_grid(), ctx.tol)?;
    let half = ctx.dsl("PHI/2 - atan(2*w*t/sqrt(2+4*(w*t)^2))");
    let entry_a = ComplexForm::new(
        ctx.dsl("cos(atan(2*w*t)/2)"),
        with_integral(&half, &r, &r_integrand, -1.0),
    );
    let entry_b = ComplexForm::new(
        ctx.dsl("sin(atan(2*w*t)/2)"),
        with_integral(
            &half.offset(-std::f64::consts::FRAC_PI_2),
            &r,
            &r_integrand,
            1.0,
        ),
    );
    let particular = ComplexForm::new(
        ctx.dsl("tan(atan(2*w*t)/2)"),
        ctx.dsl("PHI - 2*atan(2*w*t/sqrt(2+4*(w*t)^2)) - pi/2"),
    );
    Ok(ctx.bundle("theta_arctan_a", omega_z, entry_a, entry_b, particular))
}

/// `Θ = 2·tan⁻¹(wt/√(2+(wt)²))`: pulse area `P = tan⁻¹(wt)`, entries
/// `1/√(1+τ²)` and `τ/√(1+τ²)`, and `Ṙ = w√(2+τ²)/2`.
fn theta_arctan_b(ctx: &Ctx) -> Result<CaseBundle, CatalogError> {
    let omega_z = ctx.dsl("w*(2+(1-(w*t)^2)*(2+(w*t)^2))/(2*(1+(w*t)^2)*sqrt(2+(w*t)^2)) - DPHI/2");
    let r_integrand = ctx.dsl("w*sqrt(2+(w*t)^2)/2");
    let r = CumulativeIntegral::build(r_integrand.clone(), ctx.cache_grid(), ctx.tol)?;
    let half = ctx.dsl("PHI/2 - atan(w*t/sqrt(2+(w*t)^2))");
    let entry_a = ComplexForm::new(
        ctx.dsl("1/sqrt(1+(w*t)^2)"),
        with_integral(&half, &r, &r_integrand, -1.0),
    );
    let entry_b = ComplexForm::new(
        ctx.dsl("w*t/sqrt(1+(w*t)^2)"),
        with_integral(
            &half.offset(-std::f64::consts::FRAC_PI_2),
            &r,
            &r_integrand,
            1.0,
        ),
    );
    let particular = ComplexForm::new(
        ctx.dsl("w*t"),
        ctx.dsl("PHI - 2*atan(w*t/sqrt(2+(w*t)^2)) - pi/2"),
    );
    Ok(ctx.bundle("theta_arctan_b", omega_z, entry_a, entry_b, particular))
}
