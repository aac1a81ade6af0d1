//! Shifted deflation of known critical points and the multiplicity driver.

use crate::assembly::AssembledSystem;
use crate::config::SolverConfig;
use crate::error::SolverError;
use crate::functional::ray_from_norms;

use super::mountain_pass::mountain_pass;
use super::newton::newton;
use super::space::{FullSpace, Space};
use super::{axpy, random_start, scale, Backend, CriticalPoint, Seed};

/// `M(x) = (|x|^-q + s) prod_k (|x - x_k|^-q + s)(|x + x_k|^-q + s)`; the
/// first factor keeps Newton away from the trivial solution.
pub(crate) struct Deflation {
    centers: Vec<Vec<f64>>,
    power: f64,
    shift: f64,
}

impl Deflation {
    pub(crate) fn new(known: &[Vec<f64>], power: f64, shift: f64) -> Self {
        let mut centers = vec![vec![0.0; known.first().map_or(0, Vec::len)]];
        for x in known {
            centers.push(x.clone());
            centers.push(scale(x, -1.0));
        }
        Deflation { centers, power, shift }
    }

    fn offsets<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = Vec<f64>> + 'a {
        self.centers.iter().map(move |c| if c.is_empty() { x.to_vec() } else { axpy(x, -1.0, c) })
    }

    pub(crate) fn value(&self, space: &dyn Space, x: &[f64]) -> f64 {
        self.offsets(x).map(|r| space.inner(&r, &r).powf(-0.5 * self.power) + self.shift).product()
    }

    /// Factor turning the Newton step of `I'` into that of `M I'`.
    pub(crate) fn step_factor(&self, space: &dyn Space, x: &[f64], delta: &[f64]) -> f64 {
        let q = self.power;
        let log_derivative: f64 = self
            .offsets(x)
            .map(|r| {
                let n2 = space.inner(&r, &r);
                let m = n2.powf(-0.5 * q) + self.shift;
                -q * n2.powf(-0.5 * q - 1.0) * space.inner(&r, delta) / m
            })
            .sum();
        1.0 / (1.0 - log_derivative)
    }
}

#[derive(Debug, Clone)]
pub enum ContinuationOutcome {
    Found(CriticalPoint),
    /// Every start diverged or returned to a known point.
    Exhausted {
        attempts: usize,
    },
}

/// Looks for a critical point distinct from `known` and their antipodes by
/// deflated Newton from `4 * multistart_count` starts.
pub fn deflated_continue(
    sys: &AssembledSystem,
    config: &SolverConfig,
    known: &[CriticalPoint],
) -> Result<ContinuationOutcome, SolverError> {
    config.validate()?;
    let space = FullSpace { sys };
    let known_x: Vec<Vec<f64>> = known.iter().map(|k| space.restrict(&k.u)).collect();
    let deflation = Deflation::new(&known_x, config.deflation.power, config.deflation.shift);
    let separation = 10.0 * config.grad_tol;
    let attempts = 4 * config.multistart_count;

    for attempt in 0..attempts {
        let salt = config.rng_seed.wrapping_add(0xdef1_0000 + 1000 * known.len() as u64 + attempt as u64);
        let mut start = space.restrict(&random_start(sys, salt));
        if attempt == 0 {
            if let Some(lowest) = known_x.first() {
                let size = space.norm(lowest);
                start = axpy(lowest, 0.5 * size / space.norm(&start), &start);
            }
        }
        let Ok((lambda, _)) = ray_from_norms(space.inner(&start, &start), space.trace_p(&start), sys.p) else {
            continue;
        };
        let start = scale(&start, lambda);
        let Ok((x, iterations)) = newton(&space, start, config, Some(&deflation), 4 * config.newton_max_iters) else {
            continue;
        };
        let trivial = space.norm(&x) <= separation;
        let repeated = known_x
            .iter()
            .any(|k| space.norm(&axpy(&x, -1.0, k)) <= separation || space.norm(&axpy(&x, 1.0, k)) <= separation);
        if !trivial && !repeated {
            return Ok(ContinuationOutcome::Found(CriticalPoint::new(
                sys,
                space.lift(&x),
                iterations,
                Backend::FullSpace,
            )));
        }
    }
    Ok(ContinuationOutcome::Exhausted { attempts })
}

/// Ground state followed by deflated continuation until `count` distinct energy
/// levels are known. Points on an already known level (for instance rotated
/// copies on a symmetric mesh) are deflated but not counted. Returns one point
/// per level in increasing energy; fewer than `count` if continuation runs dry.
pub fn multiplicity(
    sys: &AssembledSystem,
    config: &SolverConfig,
    count: usize,
) -> Result<Vec<CriticalPoint>, SolverError> {
    let ground = mountain_pass(sys, config, Seed::Random)?;
    let mut known = vec![ground.clone()];
    let mut levels = vec![ground];
    let same_level = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs());
    while levels.len() < count && known.len() < 8 * count {
        match deflated_continue(sys, config, &known)? {
            ContinuationOutcome::Found(cp) => {
                if !levels.iter().any(|l| same_level(l.energy(), cp.energy())) {
                    levels.push(cp.clone());
                }
                known.push(cp);
            }
            ContinuationOutcome::Exhausted { .. } => break,
        }
    }
    levels.sort_by(|a, b| a.energy().total_cmp(&b.energy()));
    Ok(levels)
}
