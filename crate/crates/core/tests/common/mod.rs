#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wentzell_core::{generate_annulus_mesh, AssembledSystem, DiscreteFunction};

pub const E: f64 = std::f64::consts::E;

pub fn annulus(n_r: usize, n_theta: usize, p: f64) -> AssembledSystem {
    AssembledSystem::new(generate_annulus_mesh(1.0, E, n_r, n_theta).unwrap(), p).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform nodal noise, zero on `Gamma0`.
pub fn random_function(sys: &AssembledSystem, rng: &mut impl Rng) -> DiscreteFunction {
    DiscreteFunction::new((0..sys.num_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect()).constrained(&sys.dofs)
}

pub fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
