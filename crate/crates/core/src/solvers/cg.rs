use super::{dot, DirectionRule, LineSearchDriver, SolverConfig, SolverError, SolverOutput};
use crate::objectives::Objective;

/// Polak–Ribière+ conjugate directions, restarted to steepest descent when
/// the PR coefficient is negative and every `dim` iterations.
struct PolakRibiere {
    dim: usize,
    prev_dir: Option<Vec<f64>>,
    prev_grad: Vec<f64>,
    prev_slope: f64,
    prev_step: f64,
    since_restart: usize,
}

impl DirectionRule for PolakRibiere {
    fn direction(&mut self, gradient: &[f64], _iteration: usize) -> (Vec<f64>, f64) {
        let gg = dot(gradient, gradient);
        let beta = match &self.prev_dir {
            Some(_) if self.since_restart < self.dim => {
                let prev_gg = dot(&self.prev_grad, &self.prev_grad);
                let num: f64 = gradient.iter().zip(&self.prev_grad).map(|(g, p)| g * (g - p)).sum();
                if prev_gg > 0.0 { (num / prev_gg).max(0.0) } else { 0.0 }
            }
            _ => 0.0,
        };
        let dir: Vec<f64> = match (&self.prev_dir, beta > 0.0) {
            (Some(prev), true) => {
                self.since_restart += 1;
                gradient.iter().zip(prev).map(|(g, d)| -g + beta * d).collect()
            }
            _ => {
                self.since_restart = 1;
                gradient.iter().map(|g| -g).collect()
            }
        };
        let slope = dot(&dir, gradient);
        let init = if self.prev_step > 0.0 && slope < 0.0 {
            (self.prev_step * self.prev_slope / slope).clamp(1e-10, 1e10)
        } else {
            1.0 / gg.sqrt().max(1.0)
        };
        self.prev_slope = slope;
        self.prev_grad = gradient.to_vec();
        self.prev_dir = Some(dir.clone());
        (dir, init)
    }

    fn observe(&mut self, step: &[f64], _grad_change: &[f64], _new_gradient: &[f64]) {
        if let Some(d) = &self.prev_dir {
            let dd = dot(d, d);
            self.prev_step = if dd > 0.0 { (dot(step, step) / dd).sqrt() } else { 0.0 };
        }
    }

    fn reset(&mut self) {
        self.prev_dir = None;
        self.prev_step = 0.0;
    }
}

pub fn nonlinear_cg<O: Objective + ?Sized>(
    objective: &O,
    start: &[f64],
    config: &SolverConfig,
) -> Result<SolverOutput, SolverError> {
    let mut rule = PolakRibiere {
        dim: objective.dim().max(1),
        prev_dir: None,
        prev_grad: Vec::new(),
        prev_slope: 0.0,
        prev_step: 0.0,
        since_restart: 0,
    };
    LineSearchDriver { objective, config }.run(start, &mut rule)
}
