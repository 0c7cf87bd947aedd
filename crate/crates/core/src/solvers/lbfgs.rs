use std::collections::VecDeque;

use super::{dot, norm, DirectionRule, LineSearchDriver, SolverConfig, SolverError, SolverOutput};
use crate::objectives::Objective;

/// Curvature pairs with `sᵀy` at or below this are discarded.
const MIN_CURVATURE: f64 = 1e-10;

struct TwoLoop {
    memory: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl DirectionRule for TwoLoop {
    fn direction(&mut self, gradient: &[f64], _iteration: usize) -> (Vec<f64>, f64) {
        let mut q = gradient.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = match self.pairs.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / norm(gradient).max(1.0),
        };
        for qi in &mut q {
            *qi *= gamma;
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        (q.into_iter().map(|v| -v).collect(), 1.0)
    }

    fn observe(&mut self, step: &[f64], grad_change: &[f64], _new_gradient: &[f64]) {
        let sy = dot(step, grad_change);
        if sy <= MIN_CURVATURE {
            return;
        }
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back((step.to_vec(), grad_change.to_vec(), 1.0 / sy));
    }

    fn reset(&mut self) {
        self.pairs.clear();
    }
}

/// Limited-memory BFGS with a strong-Wolfe line search.
pub fn lbfgs<O: Objective + ?Sized>(
    objective: &O,
    start: &[f64],
    config: &SolverConfig,
) -> Result<SolverOutput, SolverError> {
    let mut rule = TwoLoop { memory: config.memory, pairs: VecDeque::with_capacity(config.memory) };
    LineSearchDriver { objective, config }.run(start, &mut rule)
}

#[cfg(test)]
mod tests {
    use super::super::test_problems::{Flat, Quadratic};
    use super::super::{SolverKind, StopReason};
    use super::*;

    #[test]
    fn identity_quadratic_in_two_iterations() {
        let f = Quadratic::identity(vec![3.0, -1.0, 2.0]);
        let cfg = SolverConfig::new(SolverKind::Qn).with_tolerance(1e-10);
        let out = lbfgs(&f, &[0.0; 3], &cfg).unwrap();
        assert!(out.iterations <= 2, "{} iterations", out.iterations);
        assert_eq!(out.stop, StopReason::GradientTolerance);
    }

    #[test]
    fn skips_flat_pairs() {
        let mut rule = TwoLoop { memory: 3, pairs: VecDeque::new() };
        rule.observe(&[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]);
        assert!(rule.pairs.is_empty());
        rule.observe(&[1.0, 0.0], &[2.0, 0.0], &[0.0, 0.0]);
        assert_eq!(rule.pairs.len(), 1);
        let (d, _) = rule.direction(&[1.0, 1.0], 1);
        assert!(dot(&d, &[1.0, 1.0]) < 0.0);
    }

    #[test]
    fn flat_objective_is_already_stationary() {
        let out = lbfgs(&Flat(3), &[1.0, 2.0, 3.0], &SolverConfig::new(SolverKind::Qn)).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.params, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn ill_conditioned_monotone() {
        let f = Quadratic { target: vec![1.0; 6], diag: vec![1.0, 10.0, 100.0, 0.1, 5.0, 3.0] };
        let cfg = SolverConfig::new(SolverKind::Qn).with_tolerance(1e-10);
        let out = lbfgs(&f, &[0.0; 6], &cfg).unwrap();
        assert_eq!(out.stop, StopReason::GradientTolerance);
        assert!(out.trace.is_monotone());
    }
}
