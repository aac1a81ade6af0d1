#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Finite-element solver for the Laplace equation on a planar domain with a
//! homogeneous Dirichlet condition on `Gamma0` and the nonlinear
//! Goldstein-Wentzell condition `-u'' + du/dn = |u|^{p-2} u` on `Gamma1`.

pub mod assembly;
pub mod config;
pub mod dtn;
pub mod error;
pub mod export;
pub mod functional;
pub mod mesh;
pub mod oracle;
pub mod parallel;
pub mod solvers;
pub mod sparse;

pub use assembly::{AssembledSystem, DiscreteFunction};
pub use config::SolverConfig;
pub use error::{Error, Result, SolverError};
pub use mesh::{build_dof_map, generate_annulus_mesh, load_mesh, save_mesh, DofMap, Mesh};
