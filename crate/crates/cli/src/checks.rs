//! Numerical invariant checks run by `wentzell check` and by the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use wentzell_core::dtn::{
    boundary_energy, boundary_gradient, harmonic_projection, BoundaryFunction, HarmonicExtensionSolver,
};
use wentzell_core::functional::{energy, energy_gradient, smooth_random_profile};
use wentzell_core::sparse::dot;
use wentzell_core::{AssembledSystem, DiscreteFunction, SolverError};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check { name, value, tolerance, passed: value <= tolerance }
    }
}

/// Random nodal function with zero values at constrained vertices.
pub fn random_function(sys: &AssembledSystem, rng: &mut impl Rng) -> DiscreteFunction {
    DiscreteFunction::new((0..sys.num_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect()).constrained(&sys.dofs)
}

/// Random boundary function vanishing on `Gamma0`.
pub fn random_boundary_function(
    sys: &AssembledSystem,
    ext: &HarmonicExtensionSolver,
    rng: &mut impl Rng,
) -> BoundaryFunction {
    BoundaryFunction::new(
        ext.boundary_vertices()
            .iter()
            .map(|&b| if sys.dofs.is_constrained(b) { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect(),
    )
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest relative error between `<I'(u), phi>` and a central difference with step `eps`.
pub fn energy_gradient_error(sys: &AssembledSystem, pairs: usize, eps: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|_| {
            let u = smooth_random_profile(sys, &mut rng).axpy(0.3, &random_function(sys, &mut rng));
            let phi = random_function(sys, &mut rng);
            let (dual, _) = energy_gradient(sys, &u);
            let fd = (energy(sys, &u.axpy(eps, &phi)) - energy(sys, &u.axpy(-eps, &phi))) / (2.0 * eps);
            relative_gap(dot(&dual, &phi.values), fd)
        })
        .fold(0.0, f64::max)
}

/// Same check for the boundary functional `J = I o D`.
pub fn boundary_gradient_error(
    sys: &AssembledSystem,
    ext: &HarmonicExtensionSolver,
    pairs: usize,
    eps: f64,
    seed: u64,
) -> Result<f64, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let v = random_boundary_function(sys, ext, &mut rng);
        let w = random_boundary_function(sys, ext, &mut rng);
        let grad = boundary_gradient(ext, sys, &v)?;
        let fd = (boundary_energy(ext, sys, &v.combine(1.0, &w, eps))?
            - boundary_energy(ext, sys, &v.combine(1.0, &w, -eps))?)
            / (2.0 * eps);
        worst = worst.max(relative_gap(dot(&grad, &w.values), fd));
    }
    Ok(worst)
}

/// `J(v)` from the capacitance matrix, `1/2 v^T G^{-1} v - 1/p int |v|^p`,
/// which never forms the harmonic extension.
pub fn capacitance_energy(sys: &AssembledSystem, ext: &HarmonicExtensionSolver, v: &BoundaryFunction) -> f64 {
    let free = sys.free_boundary();
    let values: Vec<f64> = free.iter().map(|&b| v.values[ext.slot(b).expect("boundary vertex")]).collect();
    let x = nalgebra_solve(sys, &values);
    let mut full = vec![0.0; sys.num_vertices()];
    for (k, &b) in free.iter().enumerate() {
        full[b] = values[k];
    }
    0.5 * dot(&values, &x)
        - wentzell_core::assembly::boundary_p_integral(&sys.mesh, &DiscreteFunction::new(full), sys.p) / sys.p
}

fn nalgebra_solve(sys: &AssembledSystem, values: &[f64]) -> Vec<f64> {
    let g = sys.capacitance().clone();
    let rhs = nalgebra::DVector::from_column_slice(values);
    g.cholesky().expect("capacitance matrix is positive definite").solve(&rhs).as_slice().to_vec()
}

/// Largest `|J(v) - I(Dv)| / (1 + |I(Dv)|)` over random `v`.
pub fn dtn_consistency_error(
    sys: &AssembledSystem,
    ext: &HarmonicExtensionSolver,
    samples: usize,
    seed: u64,
) -> Result<f64, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v = random_boundary_function(sys, ext, &mut rng);
        let via_extension = energy(sys, &ext.extend(sys, &v)?);
        let direct = capacitance_energy(sys, ext, &v);
        worst = worst.max((direct - via_extension).abs() / (1.0 + via_extension.abs()));
    }
    Ok(worst)
}

/// Largest `|(Du, u - Du)_{H1}| / |u|^2` over random `u`.
pub fn splitting_error(
    sys: &AssembledSystem,
    ext: &HarmonicExtensionSolver,
    samples: usize,
    seed: u64,
) -> Result<f64, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = random_function(sys, &mut rng);
        let (harmonic, interior) = harmonic_projection(ext, sys, &u)?;
        let cross = sys.h1_inner(&harmonic.values, &interior.values);
        worst = worst.max(cross.abs() / sys.h1_inner(&u.values, &u.values));
    }
    Ok(worst)
}
