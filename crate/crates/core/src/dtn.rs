//! Harmonic extension, the Dirichlet-to-Neumann form, the boundary-only energy
//! `J = I o D`, and the splitting of `H1` into harmonic and interior parts.

use crate::assembly::{AssembledSystem, DiscreteFunction};
use crate::error::SolverError;
use crate::functional::{energy, energy_dual};
use crate::mesh::DofMap;
use crate::sparse::CholeskyFactor;

/// Nodal values on the boundary vertices of a mesh (sorted vertex order),
/// zero on `Gamma0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    pub values: Vec<f64>,
}

impl BoundaryFunction {
    pub fn new(values: Vec<f64>) -> Self {
        BoundaryFunction { values }
    }

    pub fn combine(&self, a: f64, other: &BoundaryFunction, b: f64) -> Self {
        BoundaryFunction { values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect() }
    }
}

/// Factorization of the interior Dirichlet block, computed once per mesh.
#[derive(Debug)]
pub struct HarmonicExtensionSolver {
    boundary: Vec<usize>,
    interior: Vec<usize>,
    /// Position of a vertex in `boundary`, or `usize::MAX`.
    boundary_slot: Vec<usize>,
    factor: CholeskyFactor,
    n: usize,
}

impl HarmonicExtensionSolver {
    pub fn new(sys: &AssembledSystem) -> Result<Self, SolverError> {
        let n = sys.num_vertices();
        let boundary = sys.mesh.boundary_vertices();
        let mut boundary_slot = vec![usize::MAX; n];
        for (k, &b) in boundary.iter().enumerate() {
            boundary_slot[b] = k;
        }
        let interior: Vec<usize> = (0..n).filter(|&v| boundary_slot[v] == usize::MAX).collect();
        let factor = CholeskyFactor::for_subset(&sys.interior_stiffness, &interior)?;
        Ok(HarmonicExtensionSolver { boundary, interior, boundary_slot, factor, n })
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior
    }

    pub fn slot(&self, vertex: usize) -> Option<usize> {
        let s = self.boundary_slot[vertex];
        (s != usize::MAX).then_some(s)
    }

    /// Nodal trace of `u` on the boundary vertices.
    pub fn trace(&self, u: &DiscreteFunction) -> BoundaryFunction {
        BoundaryFunction::new(self.boundary.iter().map(|&b| u.values[b]).collect())
    }

    pub fn zero_boundary(&self) -> BoundaryFunction {
        BoundaryFunction::new(vec![0.0; self.boundary.len()])
    }

    fn check(&self, v: &BoundaryFunction, dofs: &DofMap) -> Result<(), SolverError> {
        if v.values.len() != self.boundary.len() {
            return Err(SolverError::Domain(format!(
                "boundary function has {} values, mesh has {} boundary vertices",
                v.values.len(),
                self.boundary.len()
            )));
        }
        for (k, &b) in self.boundary.iter().enumerate() {
            if dofs.is_constrained(b) && v.values[k] != 0.0 {
                return Err(SolverError::Domain(format!("boundary function is nonzero on Gamma0 vertex {b}")));
            }
        }
        Ok(())
    }

    /// Discrete harmonic function with boundary values `v`.
    pub fn extend(&self, sys: &AssembledSystem, v: &BoundaryFunction) -> Result<DiscreteFunction, SolverError> {
        self.check(v, &sys.dofs)?;
        Ok(self.extend_unchecked(sys, &v.values))
    }

    /// Extension from values at the boundary vertices, without the `Gamma0` check.
    pub(crate) fn extend_unchecked(&self, sys: &AssembledSystem, boundary_values: &[f64]) -> DiscreteFunction {
        let mut u = vec![0.0; self.n];
        for (k, &b) in self.boundary.iter().enumerate() {
            u[b] = boundary_values[k];
        }
        let mut rhs = sys.interior_stiffness.mul_vec(&u);
        rhs.iter_mut().for_each(|x| *x = -*x);
        let interior = self.factor.solve(&rhs);
        for &i in &self.interior {
            u[i] = interior[i];
        }
        DiscreteFunction::new(u)
    }
}

pub fn harmonic_extension(
    solver: &HarmonicExtensionSolver,
    sys: &AssembledSystem,
    v: &BoundaryFunction,
) -> Result<DiscreteFunction, SolverError> {
    solver.extend(sys, v)
}

/// `<A v, w> = int grad(Dv) . grad(Dw)`.
pub fn dtn_form(
    solver: &HarmonicExtensionSolver,
    sys: &AssembledSystem,
    v: &BoundaryFunction,
    w: &BoundaryFunction,
) -> Result<f64, SolverError> {
    let dv = solver.extend(sys, v)?;
    let dw = solver.extend(sys, w)?;
    Ok(sys.interior_stiffness.bilinear(&dv.values, &dw.values))
}

/// `J(v) = I(Dv)`.
pub fn boundary_energy(
    solver: &HarmonicExtensionSolver,
    sys: &AssembledSystem,
    v: &BoundaryFunction,
) -> Result<f64, SolverError> {
    Ok(energy(sys, &solver.extend(sys, v)?))
}

/// Dual vector of `J'(v)` on the boundary vertices (zero on `Gamma0`).
pub fn boundary_gradient(
    solver: &HarmonicExtensionSolver,
    sys: &AssembledSystem,
    v: &BoundaryFunction,
) -> Result<Vec<f64>, SolverError> {
    let u = solver.extend(sys, v)?;
    let dual = energy_dual(sys, &u);
    Ok(solver.boundary.iter().map(|&b| dual[b]).collect())
}

/// Splits `u` into its harmonic part `D(u|Gamma)` and a part vanishing on the boundary.
pub fn harmonic_projection(
    solver: &HarmonicExtensionSolver,
    sys: &AssembledSystem,
    u: &DiscreteFunction,
) -> Result<(DiscreteFunction, DiscreteFunction), SolverError> {
    let harmonic = solver.extend(sys, &solver.trace(u))?;
    let interior = u.sub(&harmonic);
    Ok((harmonic, interior))
}
