use serde::{Deserialize, Serialize};

use crate::error::SolverError;

/// Step control for Riesz-gradient descent with Armijo backtracking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    pub initial_step: f64,
    pub backtrack: f64,
    pub armijo: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig { initial_step: 1.0, backtrack: 0.5, armijo: 1e-4 }
    }
}

/// Shifted deflation `(|u - u_k|^{-power} + shift)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationConfig {
    pub shift: f64,
    pub power: f64,
}

impl Default for DeflationConfig {
    fn default() -> Self {
        DeflationConfig { shift: 1.0, power: 2.0 }
    }
}

/// Stopping rule of the trace-quotient ascent: the quotient must stall over a
/// window of iterations and the relative Riesz gradient must be small.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthConfig {
    pub quotient_rel_change: f64,
    pub stall_window: usize,
    pub gradient_rel: f64,
}

impl Default for DepthConfig {
    fn default() -> Self {
        DepthConfig { quotient_rel_change: 1e-10, stall_window: 10, gradient_rel: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: f64,
    /// Euclidean norm of the weak-form residual over free vertices.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub path_points: usize,
    /// Residual at which mountain-pass and Nehari descent hand over to Newton.
    pub newton_switch: f64,
    pub newton_max_iters: usize,
    pub descent: DescentConfig,
    pub deflation: DeflationConfig,
    pub depth: DepthConfig,
    pub multistart_count: usize,
    pub rng_seed: u64,
}

impl SolverConfig {
    pub fn new(p: f64) -> Self {
        SolverConfig {
            p,
            grad_tol: 1e-9,
            max_iters: 5000,
            path_points: 24,
            newton_switch: 1e-3,
            newton_max_iters: 60,
            descent: DescentConfig::default(),
            deflation: DeflationConfig::default(),
            depth: DepthConfig::default(),
            multistart_count: 4,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |m: String| Err(SolverError::Config(m));
        if !(self.p > 2.0) || !self.p.is_finite() {
            return fail(format!("exponent p = {} must satisfy p > 2", self.p));
        }
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("newton_switch", self.newton_switch),
            ("initial_step", self.descent.initial_step),
            ("armijo", self.descent.armijo),
            ("quotient_rel_change", self.depth.quotient_rel_change),
            ("gradient_rel", self.depth.gradient_rel),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.descent.backtrack > 0.0 && self.descent.backtrack < 1.0) {
            return fail(format!("backtrack factor must lie in (0, 1), got {}", self.descent.backtrack));
        }
        if self.path_points < 16 {
            return fail(format!("path_points must be at least 16, got {}", self.path_points));
        }
        if !(self.deflation.shift >= 0.0) || !(self.deflation.power >= 1.0) {
            return fail("deflation needs shift >= 0 and power >= 1".into());
        }
        if self.max_iters == 0 || self.newton_max_iters == 0 || self.multistart_count == 0 {
            return fail("iteration and restart budgets must be positive".into());
        }
        if self.depth.stall_window == 0 {
            return fail("stall_window must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverConfig::new(4.0).validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SolverConfig::new(2.0).validate().is_err());
        assert!(SolverConfig::new(f64::NAN).validate().is_err());
        let mut c = SolverConfig::new(3.0);
        c.grad_tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::new(3.0);
        c.path_points = 8;
        assert!(c.validate().is_err());
    }
}
