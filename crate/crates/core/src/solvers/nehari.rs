//! Ground state as the minimizer of the ray maximum `u -> max_t I(t u)`.

use crate::assembly::AssembledSystem;
use crate::config::SolverConfig;
use crate::error::SolverError;
use crate::functional::ray_from_norms;
use crate::sparse::norm2;

use super::newton::newton;
use super::space::Space;
use super::{axpy, random_start, scale, with_space, Backend, CriticalPoint};

pub fn nehari_minimize(sys: &AssembledSystem, config: &SolverConfig) -> Result<CriticalPoint, SolverError> {
    nehari_minimize_on(sys, config, Backend::FullSpace)
}

/// Monotone Armijo descent of the ray maximum over `H1`-normalized directions,
/// followed by Newton on `I' = 0` from the Nehari-scaled direction.
pub fn nehari_minimize_on(
    sys: &AssembledSystem,
    config: &SolverConfig,
    backend: Backend,
) -> Result<CriticalPoint, SolverError> {
    config.validate()?;
    with_space(sys, backend, |space| {
        let start = space.restrict(&random_start(sys, config.rng_seed));
        let (x, iterations) = descend(space, config, start)?;
        Ok(CriticalPoint::new(sys, space.lift(&x), iterations, backend))
    })
}

fn descend(space: &dyn Space, config: &SolverConfig, start: Vec<f64>) -> Result<(Vec<f64>, usize), SolverError> {
    let p = space.sys().p;
    let ray = |x: &[f64]| ray_from_norms(space.inner(x, x), space.trace_p(x), p);
    let normalize = |x: Vec<f64>| {
        let n = space.norm(&x);
        scale(&x, 1.0 / n)
    };

    let mut x = normalize(start);
    let mut alpha = config.descent.initial_step;
    let mut residual = f64::INFINITY;
    for it in 0..config.max_iters {
        let (lambda, value) = ray(&x)?;
        let on_nehari = scale(&x, lambda);
        let g = space.dual(&on_nehari);
        residual = norm2(&g);
        if residual <= config.newton_switch {
            if let Ok((u, steps)) = newton(space, on_nehari, config, None, config.newton_max_iters) {
                if space.energy(&u) > 0.0 {
                    return Ok((u, it + steps));
                }
            }
        }

        // At |x| = 1 the Riesz gradient of the ray maximum is a positive multiple
        // of x - H^{-1} f(x) / N(x), where f is the p-form and N the trace integral.
        // The Riesz image of dual(x) = Hx - f(x) is x - H^{-1} f.
        let r = space.riesz(&space.dual(&x));
        let trace = space.trace_p(&x);
        let d: Vec<f64> = x.iter().zip(&r).map(|(xi, ri)| xi - (xi - ri) / trace).collect();
        let slope = space.inner(&d, &d);
        let mut accepted = None;
        while alpha >= 1e-14 {
            let cand = normalize(axpy(&x, -alpha, &d));
            if let Ok((_, v)) = ray(&cand) {
                if v <= value - config.descent.armijo * alpha * slope * value {
                    accepted = Some(cand);
                    break;
                }
            }
            alpha *= config.descent.backtrack;
        }
        match accepted {
            Some(cand) => x = cand,
            // No decrease is possible; hand the current point to Newton.
            None => {
                let (lambda, _) = ray(&x)?;
                return newton(space, scale(&x, lambda), config, None, config.newton_max_iters)
                    .map(|(u, steps)| (u, it + steps));
            }
        }
        alpha = (alpha / config.descent.backtrack).min(4.0 * config.descent.initial_step);
    }
    Err(SolverError::Convergence {
        method: "Nehari descent",
        iterations: config.max_iters,
        residual,
        last_iterate: Some(Box::new(space.lift(&x))),
    })
}
