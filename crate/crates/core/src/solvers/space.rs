//! The two coordinate spaces the critical-point solvers run in.
//!
//! `FullSpace` works with nodal values on every vertex and the energy `I`.
//! `BoundarySpace` works with nodal values on the free `Gamma1` vertices only and
//! the reduced energy `J(v) = I(Dv)`, evaluating interior terms through the
//! harmonic extension `D`.

use nalgebra::{DMatrix, DVector};

use crate::assembly::{AssembledSystem, DiscreteFunction};
use crate::dtn::HarmonicExtensionSolver;
use crate::error::SolverError;
use crate::functional::energy_dual;
use crate::sparse::LinearSolveError;

pub(crate) trait Space: Sync {
    fn sys(&self) -> &AssembledSystem;
    fn lift(&self, x: &[f64]) -> DiscreteFunction;
    fn restrict(&self, u: &DiscreteFunction) -> Vec<f64>;
    fn energy(&self, x: &[f64]) -> f64;
    /// Gradient as a dual vector in the space's coordinates.
    fn dual(&self, x: &[f64]) -> Vec<f64>;
    fn riesz(&self, dual: &[f64]) -> Vec<f64>;
    fn inner(&self, x: &[f64], y: &[f64]) -> f64;
    fn trace_p(&self, x: &[f64]) -> f64;
    /// Solves `I''(x) delta = -dual`.
    fn newton_direction(&self, x: &[f64], dual: &[f64]) -> Result<Vec<f64>, SolverError>;

    /// Values at the `Gamma1` quadrature points.
    fn gamma1_samples(&self, x: &[f64]) -> Vec<f64>;

    fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }
}

/// Solves `(I - (p-1) G W) y = rhs` on the free boundary vertices, where `G` is the
/// capacitance matrix and `W` the weighted boundary mass at `u`.
fn boundary_hessian_solve(sys: &AssembledSystem, u: &[f64], rhs: DVector<f64>) -> Result<DVector<f64>, SolverError> {
    let g = sys.capacitance();
    let w = sys.weighted_mass_dense(u);
    let nb = rhs.len();
    let m = DMatrix::identity(nb, nb) - g * w * (sys.p - 1.0);
    m.lu().solve(&rhs).ok_or(SolverError::Linear(LinearSolveError::Singular))
}

pub(crate) struct FullSpace<'a> {
    pub sys: &'a AssembledSystem,
}

impl Space for FullSpace<'_> {
    fn sys(&self) -> &AssembledSystem {
        self.sys
    }

    fn lift(&self, x: &[f64]) -> DiscreteFunction {
        DiscreteFunction::new(x.to_vec())
    }

    fn restrict(&self, u: &DiscreteFunction) -> Vec<f64> {
        u.clone().constrained(&self.sys.dofs).values
    }

    fn energy(&self, x: &[f64]) -> f64 {
        0.5 * self.sys.h1_inner(x, x) - self.sys.p_integral_of(x) / self.sys.p
    }

    fn dual(&self, x: &[f64]) -> Vec<f64> {
        let mut d = self.sys.h1_operator.mul_vec(x);
        for (d, f) in d.iter_mut().zip(self.sys.p_form_of(x)) {
            *d -= f;
        }
        for &c in &self.sys.dofs.constrained_dofs {
            d[c] = 0.0;
        }
        d
    }

    fn riesz(&self, dual: &[f64]) -> Vec<f64> {
        self.sys.riesz(dual)
    }

    fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.sys.h1_inner(x, y)
    }

    fn trace_p(&self, x: &[f64]) -> f64 {
        self.sys.p_integral_of(x)
    }

    fn gamma1_samples(&self, x: &[f64]) -> Vec<f64> {
        self.sys.gamma1_samples(x)
    }

    fn newton_direction(&self, x: &[f64], dual: &[f64]) -> Result<Vec<f64>, SolverError> {
        // H = A - (p-1) P^T W P. Eliminate the interior with A^{-1}, solve the dense
        // boundary system, then correct.
        let sys = self.sys;
        let neg: Vec<f64> = dual.iter().map(|d| -d).collect();
        let a = sys.riesz(&neg);
        let fb = sys.free_boundary();
        let rhs = DVector::from_iterator(fb.len(), fb.iter().map(|&b| a[b]));
        let y = boundary_hessian_solve(sys, x, rhs)?;
        let wy = sys.weighted_mass_dense(x) * y;
        let mut corr = vec![0.0; x.len()];
        for (k, &b) in fb.iter().enumerate() {
            corr[b] = (sys.p - 1.0) * wy[k];
        }
        let c = sys.riesz(&corr);
        Ok(a.iter().zip(&c).map(|(a, c)| a + c).collect())
    }
}

pub(crate) struct BoundarySpace<'a> {
    pub sys: &'a AssembledSystem,
    pub ext: &'a HarmonicExtensionSolver,
}

impl BoundarySpace<'_> {
    fn full_from(&self, x: &[f64]) -> Vec<f64> {
        let mut bv = vec![0.0; self.ext.boundary_vertices().len()];
        for (k, &b) in self.sys.free_boundary().iter().enumerate() {
            bv[self.ext.slot(b).expect("free boundary vertex is a boundary vertex")] = x[k];
        }
        self.ext.extend_unchecked(self.sys, &bv).values
    }

    /// Boundary values placed in a full vector with zero interior; enough for
    /// every quantity that only sees `Gamma1`.
    fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.sys.num_vertices()];
        for (k, &b) in self.sys.free_boundary().iter().enumerate() {
            u[b] = x[k];
        }
        u
    }

    fn on_boundary(&self, full: &[f64]) -> Vec<f64> {
        self.sys.free_boundary().iter().map(|&b| full[b]).collect()
    }
}

impl Space for BoundarySpace<'_> {
    fn sys(&self) -> &AssembledSystem {
        self.sys
    }

    fn lift(&self, x: &[f64]) -> DiscreteFunction {
        DiscreteFunction::new(self.full_from(x))
    }

    fn restrict(&self, u: &DiscreteFunction) -> Vec<f64> {
        self.on_boundary(&u.values)
    }

    fn energy(&self, x: &[f64]) -> f64 {
        let u = self.full_from(x);
        0.5 * self.sys.h1_inner(&u, &u) - self.sys.p_integral_of(&u) / self.sys.p
    }

    fn dual(&self, x: &[f64]) -> Vec<f64> {
        let u = DiscreteFunction::new(self.full_from(x));
        self.on_boundary(&energy_dual(self.sys, &u))
    }

    fn riesz(&self, dual: &[f64]) -> Vec<f64> {
        let g = self.sys.capacitance();
        (g * DVector::from_column_slice(dual)).as_slice().to_vec()
    }

    fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        // Interior rows of H (Dx) vanish, so the pairing reduces to the boundary.
        let hx = self.sys.h1_operator.mul_vec(&self.full_from(x));
        self.sys.free_boundary().iter().zip(y).map(|(&b, yk)| hx[b] * yk).sum()
    }

    fn trace_p(&self, x: &[f64]) -> f64 {
        self.sys.p_integral_of(&self.scatter(x))
    }

    fn gamma1_samples(&self, x: &[f64]) -> Vec<f64> {
        self.sys.gamma1_samples(&self.scatter(x))
    }

    fn newton_direction(&self, x: &[f64], dual: &[f64]) -> Result<Vec<f64>, SolverError> {
        // (G^{-1} - (p-1) W) delta = -g  <=>  (I - (p-1) G W) delta = -G g.
        let u = self.full_from(x);
        let g = self.sys.capacitance();
        let rhs = -(g * DVector::from_column_slice(dual));
        Ok(boundary_hessian_solve(self.sys, &u, rhs)?.as_slice().to_vec())
    }
}
