//! The energy `I(u) = 1/2 |u|_{H1}^2 - 1/p int_{Gamma1} |u|^p`, its derivative,
//! the Nehari functional, ray maximization, and the best trace constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{AssembledSystem, DiscreteFunction};
use crate::config::SolverConfig;
use crate::error::SolverError;
use crate::sparse::norm2;

/// Diagnostics for a candidate solution.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy_I: f64,
    pub nehari_K: f64,
    pub h1_norm: f64,
    pub trace_p_norm: f64,
    /// Euclidean norm of the weak-form residual tested against free hat functions.
    pub weak_residual: f64,
    pub lambda1_residual: f64,
    pub lambda2_residual: f64,
}

/// Best trace constant of the discrete space and the quantities it determines.
/// All values belong to the mesh they were computed on.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepthEstimate {
    pub B: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub depth_d: f64,
    pub iterations: usize,
    /// Quotient maximizer rescaled onto the Nehari set.
    #[serde(skip)]
    pub maximizer: DiscreteFunction,
}

impl DepthEstimate {
    /// Derives `lambda1`, `lambda2` and `d` from the trace constant `B`.
    pub fn from_trace_constant(b: f64, p: f64, maximizer: DiscreteFunction, iterations: usize) -> Self {
        let lambda1 = b.powf(-p / (p - 2.0));
        let lambda2 = b.powf(-2.0 / (p - 2.0));
        DepthEstimate { B: b, lambda1, lambda2, depth_d: (0.5 - 1.0 / p) * lambda1 * lambda1, iterations, maximizer }
    }
}

pub fn energy(sys: &AssembledSystem, u: &DiscreteFunction) -> f64 {
    0.5 * sys.h1_inner(&u.values, &u.values) - sys.p_integral(u) / sys.p
}

/// Returns the dual vector `<I'(u), phi_i>` (zero at constrained vertices) and
/// its Riesz representative in the `H1` inner product.
pub fn energy_gradient(sys: &AssembledSystem, u: &DiscreteFunction) -> (Vec<f64>, DiscreteFunction) {
    let dual = energy_dual(sys, u);
    let riesz = DiscreteFunction::new(sys.riesz(&dual));
    (dual, riesz)
}

pub fn energy_dual(sys: &AssembledSystem, u: &DiscreteFunction) -> Vec<f64> {
    let mut dual = sys.h1_operator.mul_vec(&u.values);
    for (d, f) in dual.iter_mut().zip(sys.p_form(u)) {
        *d -= f;
    }
    for &c in &sys.dofs.constrained_dofs {
        dual[c] = 0.0;
    }
    dual
}

/// `K(u) = |u|_{H1}^2 - |u|_{p,Gamma1}^p`.
pub fn nehari_value(sys: &AssembledSystem, u: &DiscreteFunction) -> f64 {
    sys.h1_inner(&u.values, &u.values) - sys.p_integral(u)
}

/// Maximizer `lambda_u` of `lambda -> I(lambda u)` and the maximum value.
pub fn ray_scaling(sys: &AssembledSystem, u: &DiscreteFunction) -> Result<(f64, f64), SolverError> {
    ray_from_norms(sys.h1_inner(&u.values, &u.values), sys.p_integral(u), sys.p)
}

/// Ray maximization from `|u|_{H1}^2` and `int |u|^p`.
pub fn ray_from_norms(h1_sq: f64, trace_p: f64, p: f64) -> Result<(f64, f64), SolverError> {
    if !(trace_p > 0.0) || !(h1_sq > 0.0) {
        return Err(SolverError::Domain(
            "function has zero trace on Gamma1; the energy is unbounded along its ray".into(),
        ));
    }
    let lambda = (h1_sq / trace_p).powf(1.0 / (p - 2.0));
    let ray_max = (0.5 - 1.0 / p) * h1_sq.powf(p / (p - 2.0)) * trace_p.powf(-2.0 / (p - 2.0));
    Ok((lambda, ray_max))
}

/// Nehari-scaled copy `lambda_u u`.
pub fn project_to_nehari(sys: &AssembledSystem, u: &DiscreteFunction) -> Result<DiscreteFunction, SolverError> {
    let (lambda, _) = ray_scaling(sys, u)?;
    Ok(u.scaled(lambda))
}

/// Random `Gamma1` profile lifted into the interior and smoothed by two steps of
/// `v <- H^{-1} M_b v`, which leaves a discrete-harmonic function dominated by
/// the low boundary modes.
pub fn smooth_random_profile(sys: &AssembledSystem, rng: &mut impl Rng) -> DiscreteFunction {
    let mut v = vec![0.0; sys.num_vertices()];
    for &b in sys.free_boundary() {
        v[b] = rng.gen_range(-1.0..1.0);
    }
    for _ in 0..2 {
        let mv = sys.boundary_mass.mul_vec(&v);
        v = sys.riesz(&mv);
        let n = sys.h1_norm(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
    }
    DiscreteFunction::new(v).constrained(&sys.dofs)
}

struct AscentRun {
    quotient: f64,
    u: DiscreteFunction,
    iterations: usize,
}

/// Normalized Barzilai-Borwein ascent of `Q(u) = |u|_{p,Gamma1} / |u|_{H1}`.
fn ascend_quotient(
    sys: &AssembledSystem,
    start: DiscreteFunction,
    config: &SolverConfig,
) -> Result<AscentRun, SolverError> {
    let p = sys.p;
    let normalize = |u: DiscreteFunction| -> Result<DiscreteFunction, SolverError> {
        let n = sys.h1_norm(&u.values);
        if !(n > 0.0) {
            return Err(SolverError::Domain("ascent iterate collapsed to zero".into()));
        }
        Ok(u.scaled(1.0 / n))
    };
    // Riesz gradient of log Q at a normalized u; orthogonal to u.
    let log_gradient = |u: &DiscreteFunction, trace_p: f64| -> DiscreteFunction {
        let r = sys.riesz(&sys.p_form(u));
        DiscreteFunction::new(r.iter().zip(&u.values).map(|(r, u)| r / trace_p - u).collect())
    };

    let mut u = normalize(start)?;
    let mut trace_p = sys.p_integral(&u);
    if !(trace_p > 0.0) {
        return Err(SolverError::Domain("ascent start has zero trace".into()));
    }
    let mut grad = log_gradient(&u, trace_p);
    let mut history: Vec<f64> = vec![trace_p.powf(1.0 / p)];
    let mut step = config.descent.initial_step;
    let window = config.depth.stall_window;

    for it in 0..config.max_iters {
        let q = trace_p.powf(1.0 / p);
        let gnorm = sys.h1_norm(&grad.values);
        let stalled = history.len() > window && {
            let old = history[history.len() - 1 - window];
            (q - old).abs() <= config.depth.quotient_rel_change * q
        };
        if stalled && gnorm <= config.depth.gradient_rel {
            return Ok(AscentRun { quotient: q, u, iterations: it });
        }

        // Non-monotone acceptance against the worst of the recent window.
        let reference = history.iter().rev().take(window).fold(f64::INFINITY, |a, &b| a.min(b));
        let mut alpha = step;
        let (next, next_trace) = loop {
            let cand = normalize(u.axpy(alpha, &grad))?;
            let t = sys.p_integral(&cand);
            if t.powf(1.0 / p) >= reference || alpha < 1e-12 {
                break (cand, t);
            }
            alpha *= config.descent.backtrack;
        };
        let next_grad = log_gradient(&next, next_trace);

        // Barzilai-Borwein length for the ascent direction.
        let s = next.sub(&u);
        let y = next_grad.sub(&grad);
        let sy = -sys.h1_inner(&s.values, &y.values);
        let ss = sys.h1_inner(&s.values, &s.values);
        step = if sy > 0.0 && ss > 0.0 { (ss / sy).clamp(1e-3, 1e3) } else { config.descent.initial_step };

        u = next;
        trace_p = next_trace;
        grad = next_grad;
        history.push(trace_p.powf(1.0 / p));
    }
    Err(SolverError::Convergence {
        method: "trace-quotient ascent",
        iterations: config.max_iters,
        residual: sys.h1_norm(&grad.values),
        last_iterate: Some(Box::new(u)),
    })
}

/// Maximizes the trace quotient from `multistart_count` random starts and
/// derives `B`, `lambda1`, `lambda2` and the depth `d` from the best run.
pub fn compute_depth(sys: &AssembledSystem, config: &SolverConfig) -> Result<DepthEstimate, SolverError> {
    config.validate()?;
    let starts: Vec<DiscreteFunction> = (0..config.multistart_count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed.wrapping_add(0x5eed_0000 + k as u64));
            smooth_random_profile(sys, &mut rng)
        })
        .collect();
    depth_from_starts(sys, config, starts)
}

pub fn depth_from_starts(
    sys: &AssembledSystem,
    config: &SolverConfig,
    starts: Vec<DiscreteFunction>,
) -> Result<DepthEstimate, SolverError> {
    let runs: Vec<Result<AscentRun, SolverError>> =
        crate::parallel::map_in_pool(starts, |start| ascend_quotient(sys, start, config));
    let mut best: Option<AscentRun> = None;
    let mut first_error = None;
    for run in runs {
        match run {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.quotient > b.quotient) {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let best = match best {
        Some(b) => b,
        None => return Err(first_error.expect("at least one start")),
    };
    let maximizer = project_to_nehari(sys, &best.u)?;
    Ok(DepthEstimate::from_trace_constant(best.quotient, sys.p, maximizer, best.iterations))
}

pub fn solution_report(sys: &AssembledSystem, u: &DiscreteFunction, depth: &DepthEstimate) -> EnergyReport {
    evaluate(sys, u).with_depth(depth)
}

/// Report without reference to the depth; the two lambda residuals are NaN.
pub fn evaluate(sys: &AssembledSystem, u: &DiscreteFunction) -> EnergyReport {
    let h1_sq = sys.h1_inner(&u.values, &u.values);
    let trace_p = sys.p_integral(u);
    let h1_norm = h1_sq.max(0.0).sqrt();
    let trace_p_norm = trace_p.powf(1.0 / sys.p);
    let dual = energy_dual(sys, u);
    EnergyReport {
        energy_I: 0.5 * h1_sq - trace_p / sys.p,
        nehari_K: h1_sq - trace_p,
        h1_norm,
        trace_p_norm,
        weak_residual: norm2(&dual),
        lambda1_residual: f64::NAN,
        lambda2_residual: f64::NAN,
    }
}

impl EnergyReport {
    pub fn with_depth(mut self, depth: &DepthEstimate) -> Self {
        self.lambda1_residual = (self.h1_norm - depth.lambda1).abs();
        self.lambda2_residual = (self.trace_p_norm - depth.lambda2).abs();
        self
    }
}
