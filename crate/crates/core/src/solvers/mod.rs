//! Critical-point solvers: mountain pass, Nehari minimization and deflation.

mod deflation;
mod mountain_pass;
mod nehari;
mod newton;
mod space;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{AssembledSystem, DiscreteFunction};
use crate::dtn::HarmonicExtensionSolver;
use crate::error::SolverError;
use crate::functional::{evaluate, smooth_random_profile, EnergyReport};

pub use crate::sparse::solve_linear_spd;
pub use deflation::{deflated_continue, multiplicity, ContinuationOutcome};
pub use mountain_pass::{mountain_pass, mountain_pass_on, MountainPassRun};
pub use nehari::{nehari_minimize, nehari_minimize_on};

use space::{BoundarySpace, FullSpace, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Backend {
    FullSpace,
    BoundaryDtn,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::FullSpace => "FULL_SPACE",
            Backend::BoundaryDtn => "BOUNDARY_DTN",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub u: DiscreteFunction,
    pub report: EnergyReport,
    pub iterations: usize,
    pub backend: Backend,
}

impl CriticalPoint {
    fn new(sys: &AssembledSystem, u: DiscreteFunction, iterations: usize, backend: Backend) -> Self {
        let report = evaluate(sys, &u);
        CriticalPoint { u, report, iterations, backend }
    }

    pub fn energy(&self) -> f64 {
        self.report.energy_I
    }
}

/// Starting data for a solver run.
#[derive(Debug, Clone)]
pub enum Seed {
    /// Smooth random profile drawn from `rng_seed` (shifted on restarts).
    Random,
    Function(DiscreteFunction),
}

pub(crate) fn random_start(sys: &AssembledSystem, seed: u64) -> DiscreteFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    smooth_random_profile(sys, &mut rng)
}

/// Runs `f` in the coordinates of `backend`.
pub(crate) fn with_space<R>(
    sys: &AssembledSystem,
    backend: Backend,
    f: impl FnOnce(&dyn Space) -> Result<R, SolverError>,
) -> Result<R, SolverError> {
    match backend {
        Backend::FullSpace => f(&FullSpace { sys }),
        Backend::BoundaryDtn => {
            let ext = HarmonicExtensionSolver::new(sys)?;
            f(&BoundarySpace { sys, ext: &ext })
        }
    }
}

pub(crate) fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(x, y)| x + a * y).collect()
}

pub(crate) fn scale(x: &[f64], a: f64) -> Vec<f64> {
    x.iter().map(|v| a * v).collect()
}
