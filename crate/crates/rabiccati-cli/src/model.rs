//! A uniform view over catalog bundles and custom-built recipes: enough to
//! export traces and run the verification suite.

use num_complex::Complex64;
use rabiccati::catalog::CaseBundle;
use rabiccati::generator::{GeneratorTheta, GeneratorX, ThetaRecipe, XRecipe};
use rabiccati::quad::Grid;
use rabiccati::riccati::{self, RiccatiDre};
use rabiccati::su2::{Hamiltonian, PropagatorEntries};
use rabiccati::timefn::{ComplexForm, RealFn};

use crate::error::AppError;

/// Cache resolution for custom recipes (matches the catalog's).
const CACHE_NODES: usize = 2001;

pub struct Model {
    pub name: String,
    pub t_max: f64,
    pub hamiltonian: Hamiltonian,
    pub entry_a: ComplexForm,
    pub entry_b: ComplexForm,
    pub dre: RiccatiDre,
    pub particular: ComplexForm,
}

impl Model {
    pub fn from_bundle(bundle: CaseBundle) -> Model {
        Model {
            name: bundle.name.to_string(),
            t_max: bundle.t_max,
            hamiltonian: bundle.hamiltonian,
            entry_a: bundle.entry_a,
            entry_b: bundle.entry_b,
            dre: bundle.dre,
            particular: bundle.particular,
        }
    }

    pub fn from_x_recipe(
        name: &str,
        mag: RealFn,
        phase: RealFn,
        longitudinal: RealFn,
        t_max: f64,
        quad_tol: f64,
    ) -> Result<Model, AppError> {
        let grid = Grid::new(0.0, t_max, CACHE_NODES).map_err(|e| AppError::usage(&e))?;
        let recipe = XRecipe::build(GeneratorX::new(mag, phase), longitudinal, grid, quad_tol)?;
        let (entry_a, entry_b) = recipe.entry_forms();
        let hamiltonian = recipe.hamiltonian();
        let dre = riccati::associate(&hamiltonian);
        Ok(Model {
            name: name.to_string(),
            t_max,
            hamiltonian,
            entry_a,
            entry_b,
            dre,
            particular: recipe.particular_solution(),
        })
    }

    pub fn from_theta_recipe(
        name: &str,
        omega_mag: RealFn,
        omega_phase: RealFn,
        theta: RealFn,
        t_max: f64,
        quad_tol: f64,
    ) -> Result<Model, AppError> {
        let grid = Grid::new(0.0, t_max, CACHE_NODES).map_err(|e| AppError::usage(&e))?;
        let recipe = ThetaRecipe::build(
            omega_mag,
            omega_phase,
            GeneratorTheta::new(theta),
            grid,
            quad_tol,
        )?;
        let (entry_a, entry_b) = recipe.entry_forms();
        let hamiltonian = recipe.hamiltonian();
        let dre = riccati::associate(&hamiltonian);
        Ok(Model {
            name: name.to_string(),
            t_max,
            hamiltonian,
            entry_a,
            entry_b,
            dre,
            particular: recipe.particular_solution(),
        })
    }

    pub fn entries(&self, t: f64) -> PropagatorEntries {
        PropagatorEntries::new(self.entry_a.value(t), self.entry_b.value(t))
    }

    /// One exported sample row.
    pub fn sample(&self, t: f64) -> Sample {
        let entries = self.entries(t);
        let u = self.particular.value(t);
        Sample {
            t,
            a: entries.a,
            b: entries.b,
            omega_mag: self.hamiltonian.transverse_mag.value(t),
            omega_phase: self.hamiltonian.transverse_phase.value(t),
            omega_z: self.hamiltonian.longitudinal.value(t),
            u,
            unitarity_defect: entries.unitarity_defect(),
            schrodinger_residual: rabiccati::su2::schrodinger_residual(
                &self.hamiltonian,
                &self.entry_a,
                &self.entry_b,
                t,
            ),
            riccati_residual: riccati::riccati_residual(&self.dre, &self.particular, t),
        }
    }
}

pub struct Sample {
    pub t: f64,
    pub a: Complex64,
    pub b: Complex64,
    pub omega_mag: f64,
    pub omega_phase: f64,
    pub omega_z: f64,
    pub u: Complex64,
    pub unitarity_defect: f64,
    pub schrodinger_residual: f64,
    pub riccati_residual: f64,
}
