use super::{dot, DirectionRule, LineSearchDriver, SolverConfig, SolverError, SolverOutput};
use crate::objectives::Objective;

/// Steepest descent. The first trial step is `1/‖g‖`, later ones rescale the
/// previous accepted step by the ratio of directional derivatives.
struct Steepest {
    last_step: Option<f64>,
    last_slope: f64,
}

impl DirectionRule for Steepest {
    fn direction(&mut self, gradient: &[f64], _iteration: usize) -> (Vec<f64>, f64) {
        let slope = dot(gradient, gradient);
        let init = match self.last_step {
            Some(step) if slope > 0.0 => (step * self.last_slope / slope).min(1e10),
            _ => 1.0 / slope.sqrt().max(1.0),
        };
        self.last_slope = slope;
        (gradient.iter().map(|g| -g).collect(), init)
    }

    fn observe(&mut self, step: &[f64], _grad_change: &[f64], _new_gradient: &[f64]) {
        // step = η·(−g), so ‖step‖² / slope recovers η
        let s2 = dot(step, step);
        self.last_step = Some(if self.last_slope > 0.0 { (s2 / self.last_slope).sqrt() } else { 1.0 });
    }

    fn reset(&mut self) {
        self.last_step = None;
    }
}

pub fn gradient_descent<O: Objective + ?Sized>(
    objective: &O,
    start: &[f64],
    config: &SolverConfig,
) -> Result<SolverOutput, SolverError> {
    LineSearchDriver { objective, config }.run(start, &mut Steepest { last_step: None, last_slope: 0.0 })
}
