//! Damped Newton iteration on `I' = 0`, optionally deflated.

use crate::config::SolverConfig;
use crate::error::SolverError;
use crate::sparse::norm2;

use super::deflation::Deflation;
use super::space::Space;

/// Residual-norm backtracking Newton. With `deflation`, the step is the Newton
/// step of `M(x) I'(x)`, obtained from the plain step by a scalar factor.
pub(crate) fn newton(
    space: &dyn Space,
    x0: Vec<f64>,
    config: &SolverConfig,
    deflation: Option<&Deflation>,
    max_iters: usize,
) -> Result<(Vec<f64>, usize), SolverError> {
    let merit = |x: &[f64], g: &[f64]| -> f64 {
        let m = deflation.map_or(1.0, |d| d.value(space, x));
        m * norm2(g)
    };
    let mut x = x0;
    let mut g = space.dual(&x);
    let mut res = norm2(&g);
    for it in 0..max_iters {
        if !res.is_finite() {
            break;
        }
        if res <= config.grad_tol {
            return Ok((x, it));
        }
        let mut step = space.newton_direction(&x, &g)?;
        if let Some(d) = deflation {
            let tau = d.step_factor(space, &x, &step);
            if tau.is_finite() {
                step.iter_mut().for_each(|s| *s *= tau);
            }
        }
        // Keep individual steps within a fraction of the current scale.
        let scale = space.norm(&x).max(1.0);
        let len = space.norm(&step);
        if len > 0.5 * scale {
            let s = 0.5 * scale / len;
            step.iter_mut().for_each(|v| *v *= s);
        }

        let m0 = merit(&x, &g);
        let mut alpha = 1.0;
        let (xn, gn) = loop {
            let xn: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            let gn = space.dual(&xn);
            if merit(&xn, &gn) < (1.0 - 1e-4 * alpha) * m0 || alpha < 1.0 / 1024.0 {
                break (xn, gn);
            }
            alpha *= 0.5;
        };
        x = xn;
        g = gn;
        res = norm2(&g);
    }
    Err(SolverError::Convergence {
        method: "Newton",
        iterations: max_iters,
        residual: res,
        last_iterate: Some(Box::new(space.lift(&x))),
    })
}
