use super::*;
use crate::expr::{params, Params};
use crate::oracle::{integrate_su2, IntegratorConfig};
use crate::su2::schrodinger_residual;

const TOL: f64 = 1e-10;

fn grid(t1: f64, n: usize) -> Grid {
    Grid::new(0.0, t1, n).unwrap()
}

fn realfn(text: &str, binds: &[(&str, f64)]) -> RealFn {
    RealFn::parse(text, &params(binds)).unwrap()
}

#[test]
fn phase_kernel_vanishes_for_zero_generator() {
    let x = GeneratorX::new(RealFn::zero(), RealFn::zero());
    for t in [0.0, 0.5, 2.0] {
        assert_eq!(x.phase_kernel(t), 0.0);
    }
}

#[test]
fn phase_kernel_vanishes_for_real_generator() {
    let x = GeneratorX::new(realfn("tanh(t)", &[]), RealFn::zero());
    for t in [0.0, 0.7, 2.5] {
        assert_eq!(x.phase_kernel(t), 0.0);
    }
}

#[test]
fn phase_kernel_of_example1_generator() {
    // X = c·sin(φ)e^{iφ} with φ = 0.4t: κ must equal c²φ̇sin²φ/(1+c²sin²φ),
    // with the symbolic derivative of φ as the oracle.
    let c = 1.3;
    let phi = realfn("0.4*t", &[]);
    let mag = realfn("c*sin(0.4*t)", &[("c", c)]);
    let x = GeneratorX::new(mag, phi.clone());
    let expected = realfn("c^2*0.4*sin(0.4*t)^2/(1+c^2*sin(0.4*t)^2)", &[("c", c)]);
    for t in [0.1, 0.9, 2.2, 3.1] {
        assert!(
            (x.phase_kernel(t) - expected.value(t)).abs() < 1e-12,
            "t={t}"
        );
    }
}

fn build_real_x() -> XRecipe {
    // Real X = tanh(t), Ω = 0.
    let x = GeneratorX::new(realfn("tanh(t)", &[]), RealFn::zero());
    XRecipe::build(x, RealFn::zero(), grid(3.0, 601), TOL).unwrap()
}

#[test]
fn entries_start_at_identity() {
    let recipe = build_real_x();
    let e = recipe.entries(0.0);
    assert!((e.a - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(e.b.norm() < 1e-12);
}

#[test]
fn real_generator_with_zero_longitudinal_gives_real_a_imaginary_b() {
    let recipe = build_real_x();
    for t in [0.3, 1.1, 2.7] {
        let e = recipe.entries(t);
        assert!(e.a.im.abs() < 1e-12 && e.a.re > 0.0);
        assert!(e.b.re.abs() < 1e-12);
        // ω = Ẋ/(1+X²) real for real X and Ω = 0.
        let w = recipe.transverse(t);
        let expect = (1.0 / t.cosh().powi(2)) / (1.0 + t.tanh().powi(2));
        assert!((w - Complex64::new(expect, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn entries_are_unitary_by_construction() {
    let recipe = build_real_x();
    for k in 0..=300 {
        let t = 3.0 * k as f64 / 300.0;
        assert!(recipe.entries(t).unitarity_defect() <= 1e-12);
    }
}

fn build_complex_x() -> XRecipe {
    // A = t·e^{-t}, φ = 0.5t + 0.2t², Ω = 0.3·cos(t): a generic smooth case.
    let x = GeneratorX::new(realfn("t*exp(-t)", &[]), realfn("0.5*t+0.2*t^2", &[]));
    XRecipe::build(x, realfn("0.3*cos(t)", &[]), grid(3.0, 601), TOL).unwrap()
}

#[test]
fn x_recipe_entries_satisfy_schrodinger_equation() {
    let recipe = build_complex_x();
    let h = recipe.hamiltonian();
    let (a, b) = recipe.entry_forms();
    let mut worst: f64 = 0.0;
    for k in 1..=300 {
        let t = 3.0 * k as f64 / 300.0;
        worst = worst.max(schrodinger_residual(&h, &a, &b, t));
    }
    assert!(worst <= 1e-8, "residual {worst}");
}

#[test]
fn x_recipe_entries_match_oracle() {
    let recipe = build_complex_x();
    let h = recipe.hamiltonian();
    let g = grid(3.0, 301);
    let trace = integrate_su2(&h, &g, &IntegratorConfig::default()).unwrap();
    let mut worst: f64 = 0.0;
    for (t, oracle) in trace.times.iter().zip(&trace.entries) {
        let closed = recipe.entries(*t);
        worst = worst
            .max((closed.a - oracle.a).norm())
            .max((closed.b - oracle.b).norm());
    }
    assert!(worst <= 1e-7, "oracle disagreement {worst}");
}

#[test]
fn transverse_polar_phase_is_continuous() {
    let recipe = build_complex_x();
    let mut prev = recipe.transverse_polar(0.0);
    assert!(!prev.extrapolated);
    for k in 1..=600 {
        let t = 3.0 * k as f64 / 600.0;
        let cur = recipe.transverse_polar(t);
        assert!(
            (cur.phase - prev.phase).abs() < 0.5,
            "phase jump at t={t}: {} -> {}",
            prev.phase,
            cur.phase
        );
        prev = cur;
    }
}

#[test]
fn x_must_vanish_at_origin() {
    let x = GeneratorX::new(RealFn::constant(1.0), RealFn::zero());
    assert!(matches!(
        XRecipe::build(x, RealFn::zero(), grid(1.0, 11), TOL),
        Err(GeneratorError::OriginNotZero { .. })
    ));
}

// --------------------------------------------------------------- Θ recipe

#[test]
fn theta_must_vanish_at_origin() {
    let theta = GeneratorTheta::new(RealFn::constant(0.3));
    assert!(matches!(
        ThetaRecipe::build(
            RealFn::constant(1.0),
            RealFn::zero(),
            theta,
            grid(1.0, 11),
            TOL
        ),
        Err(GeneratorError::OriginNotZero { .. })
    ));
}

#[test]
fn theta_entries_start_at_identity() {
    let recipe = ThetaRecipe::build(
        RealFn::constant(1.0),
        RealFn::zero(),
        GeneratorTheta::new(realfn("t", &[])),
        grid(3.0, 601),
        TOL,
    )
    .unwrap();
    let e = recipe.entries(0.0);
    assert!((e.a - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(e.b.norm() < 1e-12);
}

#[test]
fn theta_sine_choice_reproduces_printed_omega_z() {
    // Θ = ∫|ω| with |ω| = 1 gives Ω = ½ + sin(t)·cot(2 sin t).
    let recipe = ThetaRecipe::build(
        RealFn::constant(1.0),
        RealFn::zero(),
        GeneratorTheta::new(realfn("t", &[])),
        grid(3.0, 601),
        TOL,
    )
    .unwrap();
    for t in [0.05f64, 0.4, 1.3, 2.9] {
        let expect = 0.5 + t.sin() * (2.0 * t.sin()).cos() / (2.0 * t.sin()).sin();
        assert!((recipe.omega_z(t) - expect).abs() < 1e-9, "t={t}");
    }
}

#[test]
fn theta_arctan_choice_reproduces_printed_omega_z() {
    // Θ = 2·atan(2t/√(2+4t²)), |ω| = 1:
    // Ω = 4(1+t²)/((1+4t²)√(2+4t²)).
    let theta = GeneratorTheta::new(realfn("2*atan(2*t/sqrt(2+4*t^2))", &[]));
    let recipe = ThetaRecipe::build(
        RealFn::constant(1.0),
        RealFn::zero(),
        theta,
        grid(3.0, 601),
        TOL,
    )
    .unwrap();
    for t in [0.02f64, 0.5, 1.0, 2.5] {
        let expect = 4.0 * (1.0 + t * t) / ((1.0 + 4.0 * t * t) * (2.0 + 4.0 * t * t).sqrt());
        assert!((recipe.omega_z(t) - expect).abs() < 1e-9, "t={t}");
    }
}

#[test]
fn theta_omega_z_limit_at_origin() {
    // Ω(0) = Θ̇(0) − φ̇_ω(0)/2 for any admissible Θ and φ_ω.
    let recipe = ThetaRecipe::build(
        RealFn::constant(1.0),
        realfn("t/2", &[]),
        GeneratorTheta::new(realfn("2*atan(t/sqrt(2+t^2))", &[])),
        grid(0.01, 101),
        TOL,
    )
    .unwrap();
    let theta_dot0 = 2.0 / 2f64.sqrt();
    let expect = theta_dot0 - 0.25;
    // Richardson extrapolation through t = 1e-4, 1e-5, 1e-6.
    let f = |t: f64| recipe.omega_z(t);
    let r1 = (10.0 * f(1e-5) - f(1e-4)) / 9.0;
    let r2 = (10.0 * f(1e-6) - f(1e-5)) / 9.0;
    let extrapolated = (10.0 * r2 - r1) / 9.0;
    assert!(
        (extrapolated - expect).abs() <= 1e-6,
        "extrapolated {extrapolated}, expected {expect}"
    );
    assert!((recipe.omega_z(0.0) - expect).abs() <= 1e-9);
}

#[test]
fn theta_recipe_detects_phase_singularity() {
    // With |ω| = 1 and Θ ≡ atan-free small angle, 2P ≈ 2t crosses π before
    // t = 2, so the build must fail with the crossing time.
    let recipe = ThetaRecipe::build(
        RealFn::constant(1.0),
        RealFn::zero(),
        GeneratorTheta::new(realfn("t/10", &[])),
        grid(2.0, 201),
        TOL,
    );
    match recipe {
        Err(GeneratorError::PhaseSingularity { t }) => {
            assert!((1.5..1.7).contains(&t), "crossing at {t}");
        }
        other => panic!("expected phase singularity, got {other:?}"),
    }
}

#[test]
fn theta_entries_satisfy_schrodinger_equation() {
    let recipe = ThetaRecipe::build(
        RealFn::constant(1.0),
        realfn("0.3*sin(t)", &[]),
        GeneratorTheta::new(realfn("2*atan(t/sqrt(2+t^2))", &[])),
        grid(3.0, 601),
        TOL,
    )
    .unwrap();
    let h = recipe.hamiltonian();
    let (a, b) = recipe.entry_forms();
    let mut worst: f64 = 0.0;
    for k in 1..=300 {
        let t = 3.0 * k as f64 / 300.0;
        worst = worst.max(schrodinger_residual(&h, &a, &b, t));
    }
    assert!(worst <= 1e-8, "residual {worst}");
}

#[test]
#[allow(clippy::approx_constant)] // 0.70710678 is the frozen spot decimal
fn theta_arctan_b_closed_form_magnitudes() {
    // Θ = 2·atan(t/√(2+t²)), |ω| = 1: |a| = 1/√(1+t²), |b| = t/√(1+t²).
    let recipe = ThetaRecipe::build(
        RealFn::constant(1.0),
        RealFn::zero(),
        GeneratorTheta::new(realfn("2*atan(t/sqrt(2+t^2))", &[])),
        grid(3.0, 601),
        TOL,
    )
    .unwrap();
    for t in [0.0f64, 0.5, 1.0, 2.0, 3.0] {
        let e = recipe.entries(t);
        let denom = (1.0 + t * t).sqrt();
        assert!((e.a.norm() - 1.0 / denom).abs() < 1e-9, "t={t}");
        assert!((e.b.norm() - t / denom).abs() < 1e-9, "t={t}");
    }
    let e1 = recipe.entries(1.0);
    assert!((e1.a.norm() - 0.707_106_78).abs() < 1e-7);
    assert!((e1.b.norm() - 0.707_106_78).abs() < 1e-7);
}

// ------------------------------------------------- recipe consistency

/// A shared case where both recipes are available in closed form:
/// X = t·e^{0.3it}, Ω = 0.1, for which tanΘ = (A/Ȧ)φ̇ = 0.3t,
/// |ω| = √(1+0.09t²)/(1+t²) and
/// φ_ω = atan(0.3t) + 0.6·atan(t) − 0.5t.
fn consistency_pair() -> (XRecipe, ThetaRecipe) {
    let none: Params = Params::new();
    let x = GeneratorX::new(
        RealFn::parse("t", &none).unwrap(),
        RealFn::parse("0.3*t", &none).unwrap(),
    );
    let xr = XRecipe::build(x, RealFn::constant(0.1), grid(2.0, 801), TOL).unwrap();
    let tr = ThetaRecipe::build(
        RealFn::parse("sqrt(1+0.09*t^2)/(1+t^2)", &none).unwrap(),
        RealFn::parse("atan(0.3*t)+0.6*atan(t)-0.5*t", &none).unwrap(),
        GeneratorTheta::new(RealFn::parse("atan(0.3*t)", &none).unwrap()),
        grid(2.0, 801),
        TOL,
    )
    .unwrap();
    (xr, tr)
}

#[test]
fn recipes_agree_on_shared_case() {
    let (xr, tr) = consistency_pair();
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let t = 2.0 * k as f64 / 200.0;
        let ex = xr.entries(t);
        let et = tr.entries(t);
        worst = worst.max((ex.a - et.a).norm()).max((ex.b - et.b).norm());
    }
    assert!(worst <= 1e-8, "recipes disagree by {worst}");
}

#[test]
fn theta_recipe_recovers_the_free_longitudinal_field() {
    let (xr, tr) = consistency_pair();
    for k in 1..=100 {
        let t = 2.0 * k as f64 / 100.0;
        assert!((tr.omega_z(t) - 0.1).abs() < 1e-9, "t={t}");
    }
    // And the X recipe's ω matches the Θ recipe's input fields.
    for t in [0.3f64, 0.9, 1.7] {
        let polar = xr.transverse_polar(t);
        let expect_mag = (1.0 + 0.09 * t * t).sqrt() / (1.0 + t * t);
        let expect_phase = (0.3 * t).atan() + 0.6 * t.atan() - 0.5 * t;
        assert!((polar.mag - expect_mag).abs() < 1e-12);
        assert!((polar.phase - expect_phase).abs() < 1e-9);
        assert!(!polar.extrapolated);
    }
}
