//! P1 finite-element forms on triangles (interior) and on `Gamma1` edges (boundary).

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{build_dof_map, BoundaryTag, DofMap, Mesh};
use crate::sparse::{CholeskyFactor, CsrMatrix, LinearSolveError};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("triangle {triangle} is degenerate (signed area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("boundary edge {edge} has zero length")]
    ZeroLengthEdge { edge: usize },
    #[error("exponent p = {0} must satisfy p > 2")]
    Exponent(f64),
    #[error("H1 operator factorization failed: {0}")]
    Factorization(#[from] LinearSolveError),
}

/// Nodal values on every mesh vertex; zero on `Gamma0` vertices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFunction {
    pub values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(values: Vec<f64>) -> Self {
        DiscreteFunction { values }
    }

    pub fn zeros(n: usize) -> Self {
        DiscreteFunction { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        DiscreteFunction { values: self.values.iter().map(|v| s * v).collect() }
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &DiscreteFunction) -> Self {
        DiscreteFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect() }
    }

    pub fn sub(&self, other: &DiscreteFunction) -> Self {
        self.axpy(-1.0, other)
    }

    /// Zeroes the values at constrained vertices.
    pub fn constrained(mut self, dofs: &DofMap) -> Self {
        for &c in &dofs.constrained_dofs {
            self.values[c] = 0.0;
        }
        self
    }
}

/// Four-point Gauss-Legendre rule on `[0, 1]`; exact for polynomials of degree 7.
pub const GAUSS_POINTS: [f64; 4] =
    [0.069_431_844_202_973_71, 0.330_009_478_207_571_9, 0.669_990_521_792_428_1, 0.930_568_155_797_026_3];
pub const GAUSS_WEIGHTS: [f64; 4] =
    [0.173_927_422_568_726_9, 0.326_072_577_431_273_1, 0.326_072_577_431_273_1, 0.173_927_422_568_726_9];

/// Interior Dirichlet form `int grad u . grad v`, with constrained rows and
/// columns replaced by the identity.
pub fn assemble_interior_stiffness(mesh: &Mesh, dofs: &DofMap) -> Result<CsrMatrix, AssemblyError> {
    let raw = raw_interior_stiffness(mesh)?;
    Ok(raw.constrain(|v| dofs.is_constrained(v), 1.0))
}

fn raw_interior_stiffness(mesh: &Mesh) -> Result<CsrMatrix, AssemblyError> {
    let mut triplets = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        if !(area > 0.0) {
            return Err(AssemblyError::DegenerateTriangle { triangle: t, area });
        }
        let p = tri.map(|v| mesh.vertices[v]);
        // Edge opposite local vertex k.
        let e: [[f64; 2]; 3] = std::array::from_fn(|k| {
            let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
            [b[0] - a[0], b[1] - a[1]]
        });
        for i in 0..3 {
            for j in 0..3 {
                let k = (e[i][0] * e[j][0] + e[i][1] * e[j][1]) / (4.0 * area);
                triplets.push((tri[i], tri[j], k));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.num_vertices(), &triplets))
}

fn gamma1_edges(mesh: &Mesh) -> Result<Vec<([usize; 2], f64)>, AssemblyError> {
    mesh.boundary_edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.tag == BoundaryTag::Gamma1)
        .map(
            |(i, e)| {
                if e.length > 0.0 {
                    Ok((e.vertices, e.length))
                } else {
                    Err(AssemblyError::ZeroLengthEdge { edge: i })
                }
            },
        )
        .collect()
}

/// Laplace-Beltrami form along the `Gamma1` polyline: `(1/h) [[1, -1], [-1, 1]]` per edge.
///
/// Constrained vertices keep their entries so the all-ones vector is annihilated
/// along the whole of `Gamma1`; every discrete function vanishes there anyway.
pub fn assemble_boundary_stiffness(mesh: &Mesh, _dofs: &DofMap) -> Result<CsrMatrix, AssemblyError> {
    let mut triplets = Vec::new();
    for ([a, b], h) in gamma1_edges(mesh)? {
        let k = 1.0 / h;
        triplets.extend([(a, a, k), (a, b, -k), (b, a, -k), (b, b, k)]);
    }
    Ok(CsrMatrix::from_triplets(mesh.num_vertices(), &triplets))
}

/// Consistent `Gamma1` mass matrix: `(h/6) [[2, 1], [1, 2]]` per edge.
pub fn assemble_boundary_mass(mesh: &Mesh) -> CsrMatrix {
    let mut triplets = Vec::new();
    for e in mesh.edges_with_tag(BoundaryTag::Gamma1) {
        let [a, b] = e.vertices;
        let (d, o) = (e.length / 3.0, e.length / 6.0);
        triplets.extend([(a, a, d), (a, b, o), (b, a, o), (b, b, d)]);
    }
    CsrMatrix::from_triplets(mesh.num_vertices(), &triplets)
}

/// Gauss values of `u` along an edge.
fn edge_values(u: &[f64], [a, b]: [usize; 2]) -> [f64; 4] {
    GAUSS_POINTS.map(|t| (1.0 - t) * u[a] + t * u[b])
}

/// `int_{Gamma1} |u|^p`.
pub fn boundary_p_integral(mesh: &Mesh, u: &DiscreteFunction, p: f64) -> f64 {
    p_integral_values(mesh, &u.values, p)
}

pub(crate) fn p_integral_values(mesh: &Mesh, u: &[f64], p: f64) -> f64 {
    mesh.edges_with_tag(BoundaryTag::Gamma1)
        .map(|e| {
            let q = edge_values(u, e.vertices);
            e.length * (0..4).map(|k| GAUSS_WEIGHTS[k] * q[k].abs().powf(p)).sum::<f64>()
        })
        .sum()
}

/// Dual vector `i -> int_{Gamma1} |u|^{p-2} u phi_i`; zero at constrained vertices.
pub fn boundary_p_form(mesh: &Mesh, dofs: &DofMap, u: &DiscreteFunction, p: f64) -> Vec<f64> {
    p_form_values(mesh, dofs, &u.values, p)
}

pub(crate) fn p_form_values(mesh: &Mesh, dofs: &DofMap, u: &[f64], p: f64) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for e in mesh.edges_with_tag(BoundaryTag::Gamma1) {
        let [a, b] = e.vertices;
        let q = edge_values(u, e.vertices);
        for k in 0..4 {
            let t = GAUSS_POINTS[k];
            let f = e.length * GAUSS_WEIGHTS[k] * q[k].abs().powf(p - 2.0) * q[k];
            out[a] += f * (1.0 - t);
            out[b] += f * t;
        }
    }
    for &c in &dofs.constrained_dofs {
        out[c] = 0.0;
    }
    out
}

/// Weighted boundary mass `int_{Gamma1} |u|^{p-2} phi_i phi_j` as triplets over free
/// vertices. `(p - 1)` times this is the second derivative of `(1/p) int |u|^p`.
pub fn boundary_weighted_mass(mesh: &Mesh, dofs: &DofMap, u: &[f64], p: f64) -> Vec<(usize, usize, f64)> {
    let mut triplets = Vec::new();
    for e in mesh.edges_with_tag(BoundaryTag::Gamma1) {
        let [a, b] = e.vertices;
        let q = edge_values(u, e.vertices);
        let mut local = [[0.0; 2]; 2];
        for k in 0..4 {
            let t = GAUSS_POINTS[k];
            let phi = [1.0 - t, t];
            let w = e.length * GAUSS_WEIGHTS[k] * q[k].abs().powf(p - 2.0);
            for i in 0..2 {
                for j in 0..2 {
                    local[i][j] += w * phi[i] * phi[j];
                }
            }
        }
        let idx = [a, b];
        for i in 0..2 {
            for j in 0..2 {
                if !dofs.is_constrained(idx[i]) && !dofs.is_constrained(idx[j]) {
                    triplets.push((idx[i], idx[j], local[i][j]));
                }
            }
        }
    }
    triplets
}

/// Everything that depends on the mesh and on `p` but not on the state `u`.
#[derive(Debug)]
pub struct AssembledSystem {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub p: f64,
    pub interior_stiffness: CsrMatrix,
    pub boundary_stiffness: CsrMatrix,
    pub boundary_mass: CsrMatrix,
    /// Interior plus boundary stiffness, constrained rows replaced by the identity:
    /// the Gram matrix of the `H1` inner product.
    pub h1_operator: CsrMatrix,
    h1_factor: CholeskyFactor,
    free_boundary: Vec<usize>,
    capacitance: OnceLock<DMatrix<f64>>,
}

impl AssembledSystem {
    pub fn new(mesh: Mesh, p: f64) -> Result<Self, AssemblyError> {
        if !(p > 2.0) || !p.is_finite() {
            return Err(AssemblyError::Exponent(p));
        }
        let dofs = build_dof_map(&mesh);
        let raw = raw_interior_stiffness(&mesh)?;
        let interior_stiffness = raw.constrain(|v| dofs.is_constrained(v), 1.0);
        let boundary_stiffness = assemble_boundary_stiffness(&mesh, &dofs)?;
        let boundary_mass = assemble_boundary_mass(&mesh);
        let h1_operator = raw.add(&boundary_stiffness).constrain(|v| dofs.is_constrained(v), 1.0);
        let h1_factor = CholeskyFactor::for_subset(&h1_operator, &dofs.free_dofs)?;
        let free_boundary = dofs.free_boundary_dofs();
        Ok(AssembledSystem {
            mesh,
            dofs,
            p,
            interior_stiffness,
            boundary_stiffness,
            boundary_mass,
            h1_operator,
            h1_factor,
            free_boundary,
            capacitance: OnceLock::new(),
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.mesh.num_vertices()
    }

    /// `(u, v)_{H1}`.
    pub fn h1_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.h1_operator.bilinear(u, v)
    }

    pub fn h1_norm(&self, u: &[f64]) -> f64 {
        self.h1_inner(u, u).max(0.0).sqrt()
    }

    /// Riesz representative of a dual vector in the `H1` inner product.
    pub fn riesz(&self, dual: &[f64]) -> Vec<f64> {
        self.h1_factor.solve(dual)
    }

    pub fn p_integral(&self, u: &DiscreteFunction) -> f64 {
        p_integral_values(&self.mesh, &u.values, self.p)
    }

    pub fn p_form(&self, u: &DiscreteFunction) -> Vec<f64> {
        p_form_values(&self.mesh, &self.dofs, &u.values, self.p)
    }

    pub(crate) fn p_integral_of(&self, u: &[f64]) -> f64 {
        p_integral_values(&self.mesh, u, self.p)
    }

    pub(crate) fn p_form_of(&self, u: &[f64]) -> Vec<f64> {
        p_form_values(&self.mesh, &self.dofs, u, self.p)
    }

    /// Values of `u` at the `Gamma1` quadrature points, in the order of [`Self::gamma1_weights`].
    pub(crate) fn gamma1_samples(&self, u: &[f64]) -> Vec<f64> {
        self.mesh.edges_with_tag(BoundaryTag::Gamma1).flat_map(|e| edge_values(u, e.vertices)).collect()
    }

    /// Quadrature weights (edge length included) for `int_{Gamma1}`.
    pub(crate) fn gamma1_weights(&self) -> Vec<f64> {
        self.mesh.edges_with_tag(BoundaryTag::Gamma1).flat_map(|e| GAUSS_WEIGHTS.map(|w| w * e.length)).collect()
    }

    /// Free vertices on the closure of `Gamma1`, the support of every nonlinear term.
    pub fn free_boundary(&self) -> &[usize] {
        &self.free_boundary
    }

    /// Dense `P H^{-1} P^T` where `H` is the `H1` Gram matrix and `P` restricts to
    /// [`Self::free_boundary`]. Equivalently the inverse of the boundary Schur
    /// complement (Dirichlet-to-Neumann plus Laplace-Beltrami). Built on first use.
    pub fn capacitance(&self) -> &DMatrix<f64> {
        self.capacitance.get_or_init(|| {
            let nb = self.free_boundary.len();
            let n = self.num_vertices();
            let mut g = DMatrix::zeros(nb, nb);
            let mut rhs = vec![0.0; n];
            for (c, &vc) in self.free_boundary.iter().enumerate() {
                rhs[vc] = 1.0;
                let col = self.riesz(&rhs);
                rhs[vc] = 0.0;
                for (r, &vr) in self.free_boundary.iter().enumerate() {
                    g[(r, c)] = col[vr];
                }
            }
            // Symmetrize away round-off.
            let gt = g.transpose();
            (g + gt) * 0.5
        })
    }

    /// Weighted boundary mass restricted to [`Self::free_boundary`], as a dense matrix.
    pub fn weighted_mass_dense(&self, u: &[f64]) -> DMatrix<f64> {
        let nb = self.free_boundary.len();
        let mut local = vec![usize::MAX; self.num_vertices()];
        for (k, &v) in self.free_boundary.iter().enumerate() {
            local[v] = k;
        }
        let mut w = DMatrix::zeros(nb, nb);
        for (i, j, v) in boundary_weighted_mass(&self.mesh, &self.dofs, u, self.p) {
            w[(local[i], local[j])] += v;
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_annulus_mesh;

    fn two_edge_path() -> Mesh {
        // Triangle fan with a bottom Dirichlet edge and two unit Gamma1 edges
        // 1 -> 2 -> 3 on the top.
        Mesh::from_parts(
            vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [2.0, 0.0]],
            vec![[0, 2, 1], [0, 4, 2], [4, 3, 2]],
            vec![
                ([0, 4], BoundaryTag::Gamma0),
                ([4, 3], BoundaryTag::Gamma0),
                ([3, 2], BoundaryTag::Gamma1),
                ([2, 1], BoundaryTag::Gamma1),
                ([1, 0], BoundaryTag::Gamma0),
            ],
        )
    }

    #[test]
    fn quadrature_rule_is_exact_to_degree_seven() {
        for deg in 0..=7 {
            let q: f64 = (0..4).map(|k| GAUSS_WEIGHTS[k] * GAUSS_POINTS[k].powi(deg)).sum();
            assert!((q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-15, "degree {deg}");
        }
    }

    #[test]
    fn boundary_stiffness_two_edges() {
        let m = two_edge_path();
        assert!(m.validate().is_empty(), "{:?}", m.validate());
        let dofs = build_dof_map(&m);
        let kb = assemble_boundary_stiffness(&m, &dofs).unwrap();
        let mut u = vec![0.0; 5];
        u[2] = 1.0;
        assert!((kb.quadratic_form(&u) - 2.0).abs() < 1e-14);
        assert!(kb.is_symmetric());
    }

    #[test]
    fn boundary_stiffness_annihilates_constants() {
        let m = generate_annulus_mesh(1.0, 2.0, 3, 16).unwrap();
        let dofs = build_dof_map(&m);
        let kb = assemble_boundary_stiffness(&m, &dofs).unwrap();
        let ones = vec![1.0; m.num_vertices()];
        assert!(kb.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        let c = vec![3.7; m.num_vertices()];
        assert!(kb.quadratic_form(&c).abs() < 1e-10);
    }

    #[test]
    fn boundary_mass_measures_length() {
        let m = generate_annulus_mesh(1.0, 2.0, 2, 8).unwrap();
        let mb = assemble_boundary_mass(&m);
        let ones = vec![1.0; m.num_vertices()];
        assert!((mb.quadratic_form(&ones) - 12.245_93).abs() < 1e-4);
        let mut inner_only = vec![0.0; m.num_vertices()];
        inner_only[..8].fill(1.0);
        assert_eq!(mb.quadratic_form(&inner_only), 0.0);
    }

    #[test]
    fn p_integral_single_edge() {
        // Edge 1 -> 2 of unit length with values (0, 1): int_0^1 t^4 dt = 1/5.
        let m = two_edge_path();
        let mut u = DiscreteFunction::zeros(5);
        u.values[2] = 1.0;
        // Both Gamma1 edges carry a linear ramp 0 -> 1, hence 2/5.
        assert!((boundary_p_integral(&m, &u, 4.0) - 0.4).abs() < 1e-15);
        let c = DiscreteFunction::new(vec![1.5; 5]);
        assert!((boundary_p_integral(&m, &c, 3.3) - 2.0 * 1.5f64.powf(3.3)).abs() < 1e-13);
        assert_eq!(boundary_p_integral(&m, &DiscreteFunction::zeros(5), 4.0), 0.0);
    }

    #[test]
    fn p_form_signs_and_zero() {
        let m = generate_annulus_mesh(1.0, 2.0, 2, 16).unwrap();
        let dofs = build_dof_map(&m);
        let z = boundary_p_form(&m, &dofs, &DiscreteFunction::zeros(m.num_vertices()), 3.5);
        assert!(z.iter().all(|&v| v == 0.0));
        let pos =
            DiscreteFunction::new((0..m.num_vertices()).map(|i| (i % 5) as f64 * 0.3).collect()).constrained(&dofs);
        let f = boundary_p_form(&m, &dofs, &pos, 3.5);
        assert!(f.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn degenerate_triangle_is_reported() {
        let mut m = generate_annulus_mesh(1.0, 2.0, 2, 8).unwrap();
        m.triangles[3].swap(0, 1);
        let dofs = build_dof_map(&m);
        assert!(matches!(
            assemble_interior_stiffness(&m, &dofs),
            Err(AssemblyError::DegenerateTriangle { triangle: 3, .. })
        ));
    }

    #[test]
    fn system_rejects_small_exponent() {
        let m = generate_annulus_mesh(1.0, 2.0, 2, 8).unwrap();
        assert!(matches!(AssembledSystem::new(m, 2.0), Err(AssemblyError::Exponent(_))));
    }

    #[test]
    fn capacitance_is_inverse_boundary_schur_complement() {
        let m = generate_annulus_mesh(1.0, 2.0, 3, 16).unwrap();
        let sys = AssembledSystem::new(m, 4.0).unwrap();
        let g = sys.capacitance();
        let nb = sys.free_boundary().len();
        // Apply the Schur complement through a solve on interior rows, then G.
        let mut v = vec![0.0; sys.num_vertices()];
        for (k, &b) in sys.free_boundary().iter().enumerate() {
            v[b] = (k as f64 * 0.7).sin();
        }
        let dual = sys.riesz(&v);
        let y = nalgebra::DVector::from_iterator(nb, sys.free_boundary().iter().map(|&b| v[b]));
        let gy = g * y;
        for (k, &b) in sys.free_boundary().iter().enumerate() {
            assert!((gy[k] - dual[b]).abs() < 1e-12);
        }
    }
}
