//! The per-case verification suite: residuals, invariants, and oracle
//! cross-checks, printed one line per check.

use num_complex::Complex64;
use rabiccati::oracle::{integrate_riccati, integrate_su2, IntegratorConfig};
use rabiccati::quad::Grid;
use rabiccati::riccati::u_from_entries;

use crate::error::AppError;
use crate::model::Model;

pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

/// Runs every check over `steps` points on `[0, t_max]`. Deterministic:
/// identical inputs produce identical reports.
pub fn run_suite(
    model: &Model,
    steps: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Vec<Check>, AppError> {
    let grid = Grid::new(0.0, model.t_max, steps).map_err(|e| AppError::usage(&e))?;
    let cfg = IntegratorConfig {
        rel_tol,
        abs_tol,
        ..IntegratorConfig::default()
    };

    let mut checks = Vec::new();
    let initial = model.entries(0.0);
    checks.push(Check {
        name: "initial condition (a,b)(0) = (1,0)",
        worst: (initial.a - Complex64::new(1.0, 0.0))
            .norm()
            .max(initial.b.norm()),
        tolerance: 1e-12,
    });
    checks.push(Check {
        name: "particular solution u(0) = 0",
        worst: model.particular.value(0.0).norm(),
        tolerance: 1e-12,
    });

    let fold = |f: &dyn Fn(f64) -> f64| grid.points().map(f).fold(0.0f64, f64::max);
    checks.push(Check {
        name: "unitarity defect",
        worst: fold(&|t| model.entries(t).unitarity_defect()),
        tolerance: 1e-12,
    });
    checks.push(Check {
        name: "schrodinger residual",
        worst: fold(&|t| {
            rabiccati::su2::schrodinger_residual(
                &model.hamiltonian,
                &model.entry_a,
                &model.entry_b,
                t,
            )
        }),
        tolerance: 1e-8,
    });
    checks.push(Check {
        name: "riccati residual of u",
        worst: fold(&|t| rabiccati::riccati::riccati_residual(&model.dre, &model.particular, t)),
        tolerance: 1e-8,
    });
    checks.push(Check {
        name: "u = b/a* consistency",
        worst: fold(&|t| match u_from_entries(&model.entries(t)) {
            Ok(u) => (u - model.particular.value(t)).norm(),
            Err(_) => f64::INFINITY,
        }),
        tolerance: 1e-10,
    });

    let su2_trace = integrate_su2(&model.hamiltonian, &grid, &cfg)?;
    let mut worst_entries: f64 = 0.0;
    for (t, oracle) in su2_trace.times.iter().zip(&su2_trace.entries) {
        let closed = model.entries(*t);
        worst_entries = worst_entries
            .max((closed.a - oracle.a).norm())
            .max((closed.b - oracle.b).norm());
    }
    checks.push(Check {
        name: "oracle agreement (entries)",
        worst: worst_entries,
        tolerance: 1e-7,
    });

    let dre_trace = integrate_riccati(&model.dre, Complex64::new(0.0, 0.0), &grid, &cfg)?;
    let mut worst_u: f64 = 0.0;
    for (e, v) in su2_trace.entries.iter().zip(&dre_trace.values) {
        match (u_from_entries(e), v) {
            (Ok(u1), Some(u2)) => worst_u = worst_u.max((u1 - *u2).norm()),
            _ => worst_u = f64::INFINITY,
        }
    }
    checks.push(Check {
        name: "u(oracle entries) vs riccati oracle",
        worst: worst_u,
        tolerance: 1e-6,
    });

    Ok(checks)
}

/// Prints the report; returns whether everything passed.
pub fn print_report(case: &str, checks: &[Check]) -> bool {
    let mut ok = true;
    for check in checks {
        let verdict = if check.passed() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {name}: max {worst:.3e} (tolerance {tol:.1e})",
            name = check.name,
            worst = check.worst,
            tol = check.tolerance
        );
        ok &= check.passed();
    }
    let passed = checks.iter().filter(|c| c.passed()).count();
    println!(
        "{case}: {passed}/{total} checks passed",
        total = checks.len()
    );
    ok
}
