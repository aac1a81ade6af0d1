//! The radial solution on the annulus against the discrete operators.

mod common;

use std::f64::consts::PI;

use common::{annulus, rel, E};
use wentzell_core::assembly::DiscreteFunction;
use wentzell_core::dtn::{dtn_form, harmonic_extension, HarmonicExtensionSolver};
use wentzell_core::functional::{energy, evaluate, nehari_value, ray_scaling};
use wentzell_core::oracle::{radial_interpolant, radial_solution};

/// Composite Simpson rule, refined until two levels agree.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let simpson = |n: usize| {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    };
    let mut n = 16;
    let mut prev = simpson(n);
    loop {
        n *= 2;
        let next = simpson(n);
        if (next - prev).abs() <= 1e-13 * next.abs().max(1.0) || n > 1 << 22 {
            return next;
        }
        prev = next;
    }
}

#[test]
fn closed_form_matches_quadrature() {
    for (r0, r_outer, p) in [(1.0, E, 4.0), (0.5, 2.0, 3.0), (1.0, 3.0, 6.0)] {
        let sol = radial_solution(r0, r_outer, p).unwrap();
        // |u'|^2 integrated over the annulus in polar coordinates.
        let dirichlet = 2.0 * PI * integrate(|r| (sol.c / r).powi(2) * r, r0, r_outer);
        assert!(rel(dirichlet, sol.h1_norm_sq) < 1e-10, "{dirichlet} vs {}", sol.h1_norm_sq);
        // A critical point lies on the Nehari set.
        assert!(rel(sol.h1_norm_sq, sol.trace_p_norm_p) < 1e-12);
        assert!(sol.boundary_residual(sol.c).abs() < 1e-12);
        assert!(sol.boundary_residual(2.0 * sol.c).abs() > 1e-2);
    }
}

#[test]
fn reference_constants() {
    let sol = radial_solution(1.0, E, 4.0).unwrap();
    assert!((sol.c - (-0.5f64).exp()).abs() < 1e-14);
    assert!((sol.energy - PI / (2.0 * E)).abs() < 1e-14);
    assert!((sol.h1_norm_sq - 2.0 * PI / E).abs() < 1e-14);
    assert!((sol.trace_p_norm_p - 2.0 * PI / E).abs() < 1e-14);
}

#[test]
fn oracle_energy_rises_with_exponent_on_unit_gap() {
    // With ln(R/r0) = 1 the energy is (1/2 - 1/p) 2 pi / R^{2/(p-2)}.
    let e: Vec<f64> = [3.0, 4.0, 6.0].iter().map(|&p| radial_solution(1.0, E, p).unwrap().energy).collect();
    for (k, &p) in [3.0f64, 4.0, 6.0].iter().enumerate() {
        let expected = (0.5 - 1.0 / p) * 2.0 * PI * E.powf(-2.0 / (p - 2.0));
        assert!(rel(e[k], expected) < 1e-13);
    }
    assert!(e[0] < e[1] && e[1] < e[2]);
}

#[test]
fn invalid_parameters() {
    assert!(radial_solution(1.0, 1.0, 4.0).is_err());
    assert!(radial_solution(0.0, 2.0, 4.0).is_err());
    assert!(radial_solution(1.0, 2.0, 2.0).is_err());
}

#[test]
fn log_radius_dirichlet_energy() {
    let sys = annulus(32, 128, 4.0);
    let ln_r =
        DiscreteFunction::new(sys.mesh.vertices.iter().map(|v| v[0].hypot(v[1]).ln()).collect()).constrained(&sys.dofs);
    let form = sys.interior_stiffness.quadratic_form(&ln_r.values);
    assert!(rel(form, 2.0 * PI) < 0.01, "{form}");
    // Radial trace is constant on the outer circle.
    assert!(sys.boundary_stiffness.quadratic_form(&ln_r.values).abs() < 1e-12);
}

#[test]
fn interpolant_is_a_near_solution() {
    let sol = radial_solution(1.0, E, 4.0).unwrap();
    let mut residuals = Vec::new();
    for (n_r, n_theta) in [(16, 64), (32, 128)] {
        let sys = annulus(n_r, n_theta, 4.0);
        let u = radial_interpolant(&sys.mesh, &sys.dofs, &sol).unwrap();
        for &c in &sys.dofs.constrained_dofs {
            assert_eq!(u.values[c], 0.0);
        }
        let report = evaluate(&sys, &u);
        residuals.push(report.weak_residual);
        if n_r == 32 {
            assert!(report.weak_residual <= 5e-2, "{}", report.weak_residual);
            assert!(rel(energy(&sys, &u), PI / (2.0 * E)) < 0.02);
            let h1_sq = sys.h1_inner(&u.values, &u.values);
            let trace = sys.p_integral(&u);
            assert!(rel(h1_sq, 2.0 * PI / E) < 0.01, "{h1_sq}");
            assert!(rel(trace, 2.0 * PI / E) < 0.01, "{trace}");
            assert!(nehari_value(&sys, &u).abs() < 0.01 * h1_sq);
            let (lambda, _) = ray_scaling(&sys, &u).unwrap();
            assert!((lambda - 1.0).abs() < 0.01, "{lambda}");
        }
    }
    assert!(residuals[1] < residuals[0], "{residuals:?}");
}

#[test]
fn log_radius_is_its_own_harmonic_extension() {
    let sys = annulus(32, 128, 4.0);
    let ext = HarmonicExtensionSolver::new(&sys).unwrap();
    let ln_r =
        DiscreteFunction::new(sys.mesh.vertices.iter().map(|v| v[0].hypot(v[1]).ln()).collect()).constrained(&sys.dofs);
    let trace = ext.trace(&ln_r);
    let extended = harmonic_extension(&ext, &sys, &trace).unwrap();
    let worst = extended.values.iter().zip(&ln_r.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // ln r ranges over [0, 1], so absolute and relative errors coincide.
    assert!(worst <= 0.01, "{worst}");
    let form = dtn_form(&ext, &sys, &trace, &trace).unwrap();
    assert!(rel(form, 2.0 * PI) < 0.01, "{form}");
}
