//! Central-difference checks of the analytic derivatives.

mod common;

use common::{annulus, random_function, rel, rng};
use rand::Rng;
use wentzell_core::assembly::{boundary_p_form, boundary_p_integral};
use wentzell_core::dtn::{boundary_energy, boundary_gradient, BoundaryFunction, HarmonicExtensionSolver};
use wentzell_core::functional::{energy, energy_gradient, nehari_value, smooth_random_profile};
use wentzell_core::sparse::dot;

const EPS: f64 = 1e-6;

#[test]
fn p_form_matches_difference_quotient() {
    let sys = annulus(8, 32, 4.5);
    let mut r = rng(11);
    for _ in 0..20 {
        let u = random_function(&sys, &mut r);
        let phi = random_function(&sys, &mut r);
        let f = |v: &_| boundary_p_integral(&sys.mesh, v, sys.p) / sys.p;
        let fd = (f(&u.axpy(EPS, &phi)) - f(&u.axpy(-EPS, &phi))) / (2.0 * EPS);
        let analytic = dot(&boundary_p_form(&sys.mesh, &sys.dofs, &u, sys.p), &phi.values);
        assert!(rel(analytic, fd) <= 1e-5, "{analytic} vs {fd}");
    }
}

#[test]
fn energy_gradient_matches_difference_quotient() {
    for p in [3.0, 4.0, 6.0] {
        let sys = annulus(8, 32, p);
        let mut r = rng(12);
        for _ in 0..20 {
            let u = smooth_random_profile(&sys, &mut r).axpy(0.3, &random_function(&sys, &mut r));
            let phi = random_function(&sys, &mut r);
            let (dual, riesz) = energy_gradient(&sys, &u);
            let fd = (energy(&sys, &u.axpy(EPS, &phi)) - energy(&sys, &u.axpy(-EPS, &phi))) / (2.0 * EPS);
            assert!(rel(dot(&dual, &phi.values), fd) <= 1e-5);
            // The Riesz representative pairs through the H1 inner product.
            assert!(rel(sys.h1_inner(&riesz.values, &phi.values), dot(&dual, &phi.values)) <= 1e-9);
        }
    }
}

#[test]
fn nehari_value_is_the_radial_derivative() {
    let sys = annulus(8, 32, 4.0);
    let mut r = rng(13);
    for _ in 0..10 {
        let u = random_function(&sys, &mut r).scaled(r.gen_range(0.1..2.0));
        let (dual, _) = energy_gradient(&sys, &u);
        let k = nehari_value(&sys, &u);
        assert!((k - dot(&dual, &u.values)).abs() <= 1e-11 * (1.0 + k.abs()));
    }
}

#[test]
fn boundary_gradient_matches_difference_quotient() {
    let sys = annulus(8, 32, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let mut r = rng(14);
    let random_trace = |r: &mut _| {
        let u = random_function(&sys, r);
        ext.trace(&u)
    };
    for _ in 0..20 {
        let v: BoundaryFunction = random_trace(&mut r);
        let w = random_trace(&mut r);
        let grad = boundary_gradient(&ext, &sys, &v).unwrap();
        let fd = (boundary_energy(&ext, &sys, &v.combine(1.0, &w, EPS)).unwrap()
            - boundary_energy(&ext, &sys, &v.combine(1.0, &w, -EPS)).unwrap())
            / (2.0 * EPS);
        assert!(rel(dot(&grad, &w.values), fd) <= 1e-5);
    }
}
