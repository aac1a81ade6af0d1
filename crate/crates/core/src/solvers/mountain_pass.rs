//! Path-deformation mountain pass: a polygonal path from 0 to a point of
//! negative energy is pushed down at its highest point until that point is
//! critical.
//!
//! The path maximum is taken over the whole polygon, not only its nodes. Along
//! a segment the energy is a quadratic plus a sum over `Gamma1` quadrature
//! points, so segment maxima are cheap to evaluate.

use crate::assembly::AssembledSystem;
use crate::config::SolverConfig;
use crate::error::SolverError;
use crate::functional::ray_from_norms;
use crate::sparse::{dot, norm2};

use super::newton::newton;
use super::space::Space;
use super::{axpy, random_start, scale, with_space, Backend, CriticalPoint, Seed};

#[derive(Debug, Clone)]
pub struct MountainPassRun {
    pub point: CriticalPoint,
    /// Maximum of the energy over the path before each descent step (non-increasing).
    pub path_max_history: Vec<f64>,
    pub restarts: usize,
}

/// Mountain-pass critical point in the full vertex space.
pub fn mountain_pass(sys: &AssembledSystem, config: &SolverConfig, seed: Seed) -> Result<CriticalPoint, SolverError> {
    mountain_pass_on(sys, config, seed, Backend::FullSpace).map(|run| run.point)
}

pub fn mountain_pass_on(
    sys: &AssembledSystem,
    config: &SolverConfig,
    seed: Seed,
    backend: Backend,
) -> Result<MountainPassRun, SolverError> {
    config.validate()?;
    with_space(sys, backend, |space| {
        for attempt in 0..config.multistart_count {
            let start = match (&seed, attempt) {
                (Seed::Function(u), 0) => {
                    if u.len() != sys.num_vertices() {
                        return Err(SolverError::Domain(format!(
                            "seed has {} values, mesh has {} vertices",
                            u.len(),
                            sys.num_vertices()
                        )));
                    }
                    u.clone().constrained(&sys.dofs)
                }
                _ => random_start(sys, config.rng_seed.wrapping_add(attempt as u64)),
            };
            if let Some((x, iterations, path_max_history)) = deform_path(space, config, &space.restrict(&start))? {
                return Ok(MountainPassRun {
                    point: CriticalPoint::new(sys, space.lift(&x), iterations, backend),
                    path_max_history,
                    restarts: attempt,
                });
            }
        }
        Err(SolverError::Convergence {
            method: "mountain pass",
            iterations: config.multistart_count,
            residual: f64::NAN,
            last_iterate: None,
        })
    })
}

struct Node {
    x: Vec<f64>,
    samples: Vec<f64>,
    energy: f64,
}

impl Node {
    fn new(space: &dyn Space, x: Vec<f64>) -> Self {
        Node { samples: space.gamma1_samples(&x), energy: space.energy(&x), x }
    }
}

/// `t -> I(a + t (b - a))` on `[0, 1]`.
struct Segment<'a> {
    aa: f64,
    ad: f64,
    dd: f64,
    a: &'a [f64],
    d: Vec<f64>,
    weights: &'a [f64],
    p: f64,
}

impl<'a> Segment<'a> {
    fn new(space: &dyn Space, weights: &'a [f64], a: &'a Node, b: &Node) -> Self {
        let diff = axpy(&b.x, -1.0, &a.x);
        Segment {
            aa: space.inner(&a.x, &a.x),
            ad: space.inner(&a.x, &diff),
            dd: space.inner(&diff, &diff),
            a: &a.samples,
            d: b.samples.iter().zip(&a.samples).map(|(b, a)| b - a).collect(),
            weights,
            p: space.sys().p,
        }
    }

    fn energy(&self, t: f64) -> f64 {
        let quadratic = 0.5 * (self.aa + 2.0 * t * self.ad + t * t * self.dd);
        let trace: f64 = self
            .weights
            .iter()
            .zip(self.a.iter().zip(&self.d))
            .map(|(w, (a, d))| w * (a + t * d).abs().powf(self.p))
            .sum();
        quadratic - trace / self.p
    }

    /// Grid search followed by golden-section refinement.
    fn maximum(&self) -> (f64, f64) {
        const GRID: usize = 16;
        let values: Vec<f64> = (0..=GRID).map(|i| self.energy(i as f64 / GRID as f64)).collect();
        let k = (0..=GRID).fold(0, |best, i| if values[i] > values[best] { i } else { best });
        if k == 0 || k == GRID {
            return (k as f64 / GRID as f64, values[k]);
        }
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = ((k - 1) as f64 / GRID as f64, (k + 1) as f64 / GRID as f64);
        let mut c = hi - ratio * (hi - lo);
        let mut d = lo + ratio * (hi - lo);
        let (mut fc, mut fd) = (self.energy(c), self.energy(d));
        while hi - lo > 1e-10 {
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - ratio * (hi - lo);
                fc = self.energy(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + ratio * (hi - lo);
                fd = self.energy(d);
            }
        }
        let (t, f) = if fc > fd { (c, fc) } else { (d, fd) };
        if f >= values[k] {
            (t, f)
        } else {
            (k as f64 / GRID as f64, values[k])
        }
    }
}

/// Interior maximum `(t, value)` of the segment from `a` to `b`.
fn segment_max(space: &dyn Space, weights: &[f64], a: &Node, b: &Node) -> (f64, f64) {
    Segment::new(space, weights, a, b).maximum()
}

/// Critical point, iteration count and path-maximum history.
type Deformed = (Vec<f64>, usize, Vec<f64>);

/// Returns `None` when the path collapses onto the origin.
fn deform_path(space: &dyn Space, config: &SolverConfig, x0: &[f64]) -> Result<Option<Deformed>, SolverError> {
    let p = space.sys().p;
    let weights = space.sys().gamma1_weights();
    let (lambda, _) = ray_from_norms(space.inner(x0, x0), space.trace_p(x0), p)?;
    let mut reach = 2.0 * lambda;
    while space.energy(&scale(x0, reach)) >= 0.0 {
        reach *= 2.0;
    }
    let reference = reach * space.norm(x0);

    let n = config.path_points;
    let mut path: Vec<Node> = (0..n).map(|i| Node::new(space, scale(x0, reach * i as f64 / (n - 1) as f64))).collect();
    // Maximum over each segment `[k, k + 1]`.
    let mut crests: Vec<(f64, f64)> = path.windows(2).map(|w| segment_max(space, &weights, &w[0], &w[1])).collect();

    let mut history: Vec<f64> = Vec::new();
    let mut switch = config.newton_switch;
    let mut alpha = config.descent.initial_step;
    let mut residual = f64::INFINITY;
    for it in 0..config.max_iters {
        // Make the highest point of the polygon a node.
        let j = (0..crests.len()).fold(0, |best, k| if crests[k].1 > crests[best].1 { k } else { best });
        let (t, top) = crests[j];
        let m = if t <= 0.0 {
            j
        } else if t >= 1.0 {
            j + 1
        } else {
            let x: Vec<f64> = path[j].x.iter().zip(&path[j + 1].x).map(|(a, b)| a + t * (b - a)).collect();
            path.insert(j + 1, Node::new(space, x));
            crests[j] = segment_max(space, &weights, &path[j], &path[j + 1]);
            crests.insert(j + 1, segment_max(space, &weights, &path[j + 1], &path[j + 2]));
            j + 1
        };
        if m == 0 || m + 1 == path.len() {
            return Ok(None);
        }
        if let Some(&previous) = history.last() {
            assert!(top <= previous + 1e-12 * previous.abs(), "path maximum increased from {previous} to {top}");
        }
        history.push(top);
        if top <= 0.0 || space.norm(&path[m].x) < 1e-6 * reference {
            return Ok(None);
        }

        let g = space.dual(&path[m].x);
        residual = norm2(&g);
        if residual <= switch {
            match newton(space, path[m].x.clone(), config, None, config.newton_max_iters) {
                Ok((x, steps)) if space.energy(&x) > 0.0 => return Ok(Some((x, it + steps, history))),
                _ => switch *= 0.1,
            }
        }

        let d = space.riesz(&g);
        let slope = dot(&g, &d);
        let mut accepted = None;
        while alpha >= 1e-14 {
            let node = Node::new(space, axpy(&path[m].x, -alpha, &d));
            let bound = top - config.descent.armijo * alpha * slope;
            if node.energy <= bound {
                let left = segment_max(space, &weights, &path[m - 1], &node);
                let right = segment_max(space, &weights, &node, &path[m + 1]);
                if left.1 <= bound && right.1 <= bound {
                    accepted = Some((node, left, right));
                    break;
                }
            }
            alpha *= config.descent.backtrack;
        }
        let Some((node, left, right)) = accepted else {
            break;
        };
        path[m] = node;
        crests[m - 1] = left;
        crests[m] = right;
        alpha = (alpha / config.descent.backtrack).min(4.0 * config.descent.initial_step);
        trim(space, &weights, &mut path, &mut crests, 2 * n);
    }
    let m = (1..path.len() - 1).fold(1, |best, k| if path[k].energy > path[best].energy { k } else { best });
    Err(SolverError::Convergence {
        method: "mountain pass",
        iterations: config.max_iters,
        residual,
        last_iterate: Some(Box::new(space.lift(&path[m].x))),
    })
}

/// Removes nodes whose neighbours can be joined without raising the path
/// maximum, preferring the most crowded ones, until at most `limit` remain.
fn trim(space: &dyn Space, weights: &[f64], path: &mut Vec<Node>, crests: &mut Vec<(f64, f64)>, limit: usize) {
    if path.len() <= limit {
        return;
    }
    let top = crests.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let gap = |a: &Node, b: &Node| space.norm(&axpy(&a.x, -1.0, &b.x));
    let mut order: Vec<(usize, f64)> = (1..path.len() - 1).map(|k| (k, gap(&path[k - 1], &path[k + 1]))).collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (k, _) in order {
        let joined = segment_max(space, weights, &path[k - 1], &path[k + 1]);
        if joined.1 <= top {
            path.remove(k);
            crests.remove(k);
            crests[k - 1] = joined;
            return;
        }
    }
}
