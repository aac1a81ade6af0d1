use thiserror::Error;

use crate::assembly::{AssemblyError, DiscreteFunction};
use crate::mesh::MeshError;
use crate::sparse::LinearSolveError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Linear(#[from] LinearSolveError),
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { method: &'static str, iterations: usize, residual: f64, last_iterate: Option<Box<DiscreteFunction>> },
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
