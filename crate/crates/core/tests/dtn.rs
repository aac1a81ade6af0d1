//! Harmonic extension, the Dirichlet-to-Neumann form and the H1 splitting.

mod common;

use common::{annulus, random_function, rel, rng};
use rand::Rng;
use wentzell_core::assembly::DiscreteFunction;
use wentzell_core::dtn::{
    boundary_energy, boundary_gradient, dtn_form, harmonic_extension, harmonic_projection, BoundaryFunction,
    HarmonicExtensionSolver,
};
use wentzell_core::functional::{energy, energy_dual};
use wentzell_core::sparse::norm2;
use wentzell_core::AssembledSystem;

fn random_trace(sys: &AssembledSystem, ext: &HarmonicExtensionSolver, r: &mut impl Rng) -> BoundaryFunction {
    ext.trace(&random_function(sys, r))
}

#[test]
fn extension_keeps_boundary_values_and_is_harmonic() {
    let sys = annulus(12, 48, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(21);
    let v = random_trace(&sys, &ext, &mut r);
    let u = harmonic_extension(&ext, &sys, &v).unwrap();
    assert_eq!(ext.trace(&u).values, v.values);
    let residual = sys.interior_stiffness.mul_vec(&u.values);
    let interior: Vec<f64> = ext.interior_vertices().iter().map(|&i| residual[i]).collect();
    assert!(norm2(&interior) <= 1e-10 * norm2(&residual).max(1.0));
}

#[test]
fn extension_is_linear() {
    let sys = annulus(8, 32, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(22);
    let (v, w) = (random_trace(&sys, &ext, &mut r), random_trace(&sys, &ext, &mut r));
    let (a, b) = (1.7, -0.3);
    let lhs = ext.extend(&sys, &v.combine(a, &w, b)).unwrap();
    let rhs = ext.extend(&sys, &v).unwrap().scaled(a).axpy(b, &ext.extend(&sys, &w).unwrap());
    for (x, y) in lhs.values.iter().zip(&rhs.values) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn form_is_symmetric_and_nonnegative() {
    let sys = annulus(8, 32, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(23);
    for _ in 0..5 {
        let (v, w) = (random_trace(&sys, &ext, &mut r), random_trace(&sys, &ext, &mut r));
        let vw = dtn_form(&ext, &sys, &v, &w).unwrap();
        let wv = dtn_form(&ext, &sys, &w, &v).unwrap();
        assert!((vw - wv).abs() <= 1e-12 * vw.abs().max(1.0));
        assert!(dtn_form(&ext, &sys, &v, &v).unwrap() > 0.0);
    }
    let zero = ext.zero_boundary();
    assert_eq!(dtn_form(&ext, &sys, &zero, &zero).unwrap(), 0.0);
}

#[test]
fn form_is_independent_of_the_lift() {
    // Pairing D v with any function of trace w gives the same value.
    let sys = annulus(8, 32, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(24);
    let v = random_trace(&sys, &ext, &mut r);
    let lift = random_function(&sys, &mut r);
    let w = ext.trace(&lift);
    let dv = ext.extend(&sys, &v).unwrap();
    let pairing = sys.interior_stiffness.bilinear(&dv.values, &lift.values);
    let form = dtn_form(&ext, &sys, &v, &w).unwrap();
    assert!((pairing - form).abs() <= 1e-10 * form.abs().max(1.0), "{pairing} vs {form}");
}

#[test]
fn extension_minimizes_dirichlet_energy() {
    let sys = annulus(8, 32, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(25);
    for _ in 0..5 {
        let u = random_function(&sys, &mut r);
        let dv = ext.extend(&sys, &ext.trace(&u)).unwrap();
        assert!(sys.interior_stiffness.quadratic_form(&dv.values) <= sys.interior_stiffness.quadratic_form(&u.values));
        assert!(energy(&sys, &dv) <= energy(&sys, &u) + 1e-12);
    }
}

#[test]
fn boundary_energy_factors_through_extension() {
    let sys = annulus(10, 40, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(26);
    assert_eq!(boundary_energy(&ext, &sys, &ext.zero_boundary()).unwrap(), 0.0);
    for _ in 0..10 {
        let v = random_trace(&sys, &ext, &mut r);
        let via = energy(&sys, &ext.extend(&sys, &v).unwrap());
        let j = boundary_energy(&ext, &sys, &v).unwrap();
        assert!((j - via).abs() <= 1e-10 * (1.0 + via.abs()));
        // Even functional.
        let minus = boundary_energy(&ext, &sys, &v.combine(-1.0, &v, 0.0)).unwrap();
        assert!((j - minus).abs() <= 1e-12 * (1.0 + j.abs()));
    }
}

#[test]
fn boundary_gradient_is_the_restricted_full_gradient() {
    let sys = annulus(8, 32, 3.5);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(27);
    let v = random_trace(&sys, &ext, &mut r);
    let dv = ext.extend(&sys, &v).unwrap();
    let full = energy_dual(&sys, &dv);
    // The interior gradient of a harmonic function vanishes.
    for &i in ext.interior_vertices() {
        assert!(full[i].abs() <= 1e-10);
    }
    let grad = boundary_gradient(&ext, &sys, &v).unwrap();
    for (k, &b) in ext.boundary_vertices().iter().enumerate() {
        assert!((grad[k] - full[b]).abs() <= 1e-14);
    }
}

#[test]
fn projection_splits_orthogonally() {
    let sys = annulus(10, 40, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(28);
    for _ in 0..10 {
        let u = random_function(&sys, &mut r);
        let (harmonic, interior) = harmonic_projection(&ext, &sys, &u).unwrap();
        assert!(ext.trace(&interior).values.iter().all(|&x| x == 0.0));
        let cross = sys.h1_inner(&harmonic.values, &interior.values);
        assert!(cross.abs() <= 1e-10 * sys.h1_inner(&u.values, &u.values));
        let sum = harmonic.axpy(1.0, &interior);
        assert!(sum.values.iter().zip(&u.values).all(|(a, b)| (a - b).abs() <= 1e-14));
    }
}

#[test]
fn projection_edge_cases() {
    let sys = annulus(8, 32, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(29);
    let dv = ext.extend(&sys, &random_trace(&sys, &ext, &mut r)).unwrap();
    let (_, interior) = harmonic_projection(&ext, &sys, &dv).unwrap();
    assert!(sys.h1_norm(&interior.values) <= 1e-10);

    // Interior bump: zero trace.
    let mut bump = DiscreteFunction::zeros(sys.num_vertices());
    for &i in ext.interior_vertices() {
        bump.values[i] = r.gen_range(-1.0..1.0);
    }
    let (harmonic, interior) = harmonic_projection(&ext, &sys, &bump).unwrap();
    assert!(harmonic.values.iter().all(|&x| x == 0.0));
    assert!(rel(sys.h1_norm(&interior.values), sys.h1_norm(&bump.values)) <= 1e-14);
}
