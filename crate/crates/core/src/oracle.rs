//! Closed-form radial solutions on the annulus `r0 < |x| < R` with the inner
//! circle clamped and the nonlinear condition on the outer circle.
//!
//! The ansatz `u(r) = c ln(r / r0)` is harmonic and vanishes at `r0`. Its trace
//! on the outer circle is the constant `c L` with `L = ln(R / r0)`, so the
//! Laplace-Beltrami term drops out and the boundary condition reduces to
//! `u'(R) = u(R)^{p-1}`, i.e. `c / R = (c L)^{p-1}`, giving
//! `c = (R L^{p-1})^{-1/(p-2)}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::DiscreteFunction;
use crate::error::SolverError;
use crate::mesh::{BoundaryTag, DofMap, Mesh};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub c: f64,
    pub r0: f64,
    #[serde(rename = "R")]
    pub r_outer: f64,
    pub p: f64,
    #[serde(rename = "energy_I")]
    pub energy: f64,
    pub h1_norm_sq: f64,
    pub trace_p_norm_p: f64,
}

impl RadialSolution {
    pub fn value(&self, r: f64) -> f64 {
        self.c * (r / self.r0).ln()
    }

    /// `u'(R) - u(R)^{p-1}` for an arbitrary amplitude; zero only at `c`.
    pub fn boundary_residual(&self, amplitude: f64) -> f64 {
        let l = (self.r_outer / self.r0).ln();
        amplitude / self.r_outer - (amplitude * l).powf(self.p - 1.0)
    }
}

pub fn radial_solution(r0: f64, r_outer: f64, p: f64) -> Result<RadialSolution, SolverError> {
    if !(r0 > 0.0 && r_outer > r0 && r_outer.is_finite()) {
        return Err(SolverError::Domain(format!("radii must satisfy 0 < r0 < R, got r0 = {r0}, R = {r_outer}")));
    }
    if !(p > 2.0 && p.is_finite()) {
        return Err(SolverError::Domain(format!("exponent p = {p} must satisfy p > 2")));
    }
    let l = (r_outer / r0).ln();
    let c = (r_outer * l.powf(p - 1.0)).powf(-1.0 / (p - 2.0));
    let h1_norm_sq = 2.0 * PI * c * c * l;
    let trace_p_norm_p = 2.0 * PI * r_outer * (c * l).powf(p);
    Ok(RadialSolution { c, r0, r_outer, p, energy: (0.5 - 1.0 / p) * h1_norm_sq, h1_norm_sq, trace_p_norm_p })
}

/// Nodal interpolant of the radial solution on an annulus mesh with matching radii.
pub fn radial_interpolant(mesh: &Mesh, dofs: &DofMap, sol: &RadialSolution) -> Result<DiscreteFunction, SolverError> {
    const TOL: f64 = 1e-9;
    let radius = |v: usize| mesh.vertices[v][0].hypot(mesh.vertices[v][1]);
    for e in &mesh.boundary_edges {
        let target = match e.tag {
            BoundaryTag::Gamma0 => sol.r0,
            BoundaryTag::Gamma1 => sol.r_outer,
        };
        for &v in &e.vertices {
            if (radius(v) - target).abs() > TOL * target {
                return Err(SolverError::Domain(format!(
                    "vertex {v} at radius {} does not match the annulus radius {target}",
                    radius(v)
                )));
            }
        }
    }
    if let Some(v) = (0..mesh.num_vertices()).find(|&v| {
        let r = radius(v);
        r < sol.r0 * (1.0 - TOL) || r > sol.r_outer * (1.0 + TOL)
    }) {
        return Err(SolverError::Domain(format!("vertex {v} lies outside the annulus")));
    }
    let values =
        (0..mesh.num_vertices()).map(|v| if dofs.is_constrained(v) { 0.0 } else { sol.value(radius(v)) }).collect();
    Ok(DiscreteFunction::new(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_dof_map, generate_annulus_mesh};
    use std::f64::consts::E;

    #[test]
    fn reference_values() {
        let s = radial_solution(1.0, E, 4.0).unwrap();
        assert!((s.c - (-0.5f64).exp()).abs() < 1e-15);
        assert!((s.c - 0.60653).abs() < 1e-5);
        assert!((s.energy - PI / (2.0 * E)).abs() < 1e-14);
        assert!((s.h1_norm_sq - 2.0 * PI / E).abs() < 1e-14);
        assert!((s.trace_p_norm_p - s.h1_norm_sq).abs() < 1e-14);
    }

    #[test]
    fn amplitude_is_the_only_positive_root() {
        let s = radial_solution(1.0, E, 4.0).unwrap();
        assert!(s.boundary_residual(s.c).abs() < 1e-15);
        assert!(s.boundary_residual(2.0 * s.c).abs() > 0.1);
    }

    #[test]
    fn invalid_parameters() {
        assert!(radial_solution(1.0, 1.0, 4.0).is_err());
        assert!(radial_solution(0.0, 2.0, 4.0).is_err());
        assert!(radial_solution(1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn interpolant_vanishes_on_inner_ring() {
        let m = generate_annulus_mesh(1.0, E, 4, 16).unwrap();
        let dofs = build_dof_map(&m);
        let s = radial_solution(1.0, E, 4.0).unwrap();
        let u = radial_interpolant(&m, &dofs, &s).unwrap();
        assert!(u.values[..16].iter().all(|&x| x == 0.0));
        assert!((u.values[4 * 16] - s.c).abs() < 1e-12);
    }

    #[test]
    fn interpolant_rejects_wrong_radii() {
        let m = generate_annulus_mesh(1.0, 2.0, 4, 16).unwrap();
        let dofs = build_dof_map(&m);
        let s = radial_solution(1.0, E, 4.0).unwrap();
        assert!(matches!(radial_interpolant(&m, &dofs, &s), Err(SolverError::Domain(_))));
    }
}
