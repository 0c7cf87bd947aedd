//! Iterative minimizers: steepest descent, nonlinear conjugate gradient,
//! limited-memory BFGS, trust-region Newton (TRON) and stochastic gradient
//! descent. Every solver records one [`TraceEntry`] per outer iteration.

mod cg;
mod gd;
mod lbfgs;
mod line_search;
mod sgd;
mod tron;

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objectives::{Objective, StochasticObjective};

pub use cg::nonlinear_cg;
pub use gd::gradient_descent;
pub use lbfgs::lbfgs;
pub use line_search::{line_search, LineSearchError, LineSearchResult};
pub use sgd::sgd;
pub use tron::{cg_steihaug, tron, SteihaugResult};

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown solver `{0}` (expected one of GD, QN, CG, Tron, SGD)")]
    UnknownSolver(String),
    #[error("starting point has {got} entries, objective expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "GD")]
    Gd,
    #[serde(rename = "CG")]
    Cg,
    #[serde(rename = "QN")]
    Qn,
    #[serde(rename = "Tron")]
    Tron,
    #[serde(rename = "SGD")]
    Sgd,
}

impl SolverKind {
    pub const NAMES: [&'static str; 5] = ["GD", "QN", "CG", "Tron", "SGD"];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gd => "GD",
            SolverKind::Cg => "CG",
            SolverKind::Qn => "QN",
            SolverKind::Tron => "Tron",
            SolverKind::Sgd => "SGD",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, SolverError> {
        match s {
            "GD" => Ok(SolverKind::Gd),
            "CG" => Ok(SolverKind::Cg),
            "QN" => Ok(SolverKind::Qn),
            "Tron" => Ok(SolverKind::Tron),
            "SGD" => Ok(SolverKind::Sgd),
            other => Err(SolverError::UnknownSolver(other.to_string())),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Outer iterations for batch solvers, epochs for SGD.
    pub max_iterations: usize,
    /// Stop once `‖∇f‖ <= tolerance * max(1, ‖∇f(β⁰)‖)`.
    pub tolerance: f64,
    pub c1: f64,
    pub c2: f64,
    pub memory: usize,
    pub eta0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub sgd_step: f64,
    pub sgd_decay: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(kind: SolverKind) -> Self {
        SolverConfig {
            kind,
            max_iterations: if kind == SolverKind::Sgd { 100 } else { 10_000 },
            tolerance: 1e-4,
            c1: 1e-4,
            c2: 0.9,
            memory: 10,
            eta0: 1e-4,
            sigma1: 0.25,
            sigma2: 0.5,
            sigma3: 4.0,
            sgd_step: 0.1,
            sgd_decay: 1e-3,
            batch_size: 1,
            seed: 0,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, max: usize) -> Self {
        self.max_iterations = max;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.to_string()));
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return bad("line search needs 0 < c1 < c2 < 1");
        }
        if !(0.0 < self.sigma1 && self.sigma1 < self.sigma2 && self.sigma2 < 1.0 && 1.0 < self.sigma3) {
            return bad("trust region needs 0 < sigma1 < sigma2 < 1 < sigma3");
        }
        if !(self.tolerance > 0.0 && self.eta0 > 0.0 && self.eta0 < 0.25) {
            return bad("tolerance and eta0 must be positive (eta0 < 0.25)");
        }
        if !(self.sgd_step > 0.0 && self.sgd_decay >= 0.0) {
            return bad("SGD step must be positive and decay non-negative");
        }
        if self.memory == 0 || self.batch_size == 0 {
            return bad("memory and batch size must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    /// No acceptable step could be found (line search failure or collapsed
    /// trust region).
    Stalled,
    NonFinite,
    /// SGD ran all its epochs.
    EpochsCompleted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
    /// Step size for line-search and stochastic solvers, trust radius for TRON.
    pub step: f64,
    pub accepted: bool,
    pub cumulative_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub entries: Vec<TraceEntry>,
}

impl SolverTrace {
    pub const CSV_HEADER: &'static str = "iteration,objective,grad_norm,step,cumulative_seconds";

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Objective values of the accepted iterates.
    pub fn accepted_objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().filter(|e| e.accepted).map(|e| e.objective)
    }

    pub fn is_monotone(&self) -> bool {
        let v: Vec<f64> = self.accepted_objectives().collect();
        v.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?},{:?}",
                e.iteration, e.objective, e.grad_norm, e.step, e.cumulative_seconds
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    pub params: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: SolverTrace,
}

/// Runs the solver named in `config`.
pub fn minimize<O: StochasticObjective>(
    objective: &O,
    start: &[f64],
    config: &SolverConfig,
) -> Result<SolverOutput, SolverError> {
    match config.kind {
        SolverKind::Gd => gradient_descent(objective, start, config),
        SolverKind::Cg => nonlinear_cg(objective, start, config),
        SolverKind::Qn => lbfgs(objective, start, config),
        SolverKind::Tron => tron(objective, start, config),
        SolverKind::Sgd => sgd(objective, start, config),
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn check_start<O: Objective + ?Sized>(objective: &O, start: &[f64], config: &SolverConfig) -> Result<(), SolverError> {
    config.validate()?;
    if start.len() != objective.dim() {
        return Err(SolverError::DimensionMismatch { got: start.len(), expected: objective.dim() });
    }
    Ok(())
}

/// Shared outer loop of the line-search solvers. `direction` returns the
/// search direction and the initial trial step; `observe` sees every accepted
/// step `(s, y)` with the new gradient.
pub(crate) struct LineSearchDriver<'a, O: ?Sized> {
    pub objective: &'a O,
    pub config: &'a SolverConfig,
}

pub(crate) trait DirectionRule {
    fn direction(&mut self, gradient: &[f64], iteration: usize) -> (Vec<f64>, f64);
    fn observe(&mut self, step: &[f64], grad_change: &[f64], new_gradient: &[f64]);
    fn reset(&mut self) {}
}

impl<O: Objective + ?Sized> LineSearchDriver<'_, O> {
    pub fn run(&self, start: &[f64], rule: &mut dyn DirectionRule) -> Result<SolverOutput, SolverError> {
        check_start(self.objective, start, self.config)?;
        let clock = Instant::now();
        let mut x = start.to_vec();
        let mut eval = self.objective.evaluate(&x);
        let mut gnorm = norm(&eval.gradient);
        let threshold = self.config.tolerance * gnorm.max(1.0);
        let mut trace = SolverTrace::default();
        trace.entries.push(TraceEntry {
            iteration: 0,
            objective: eval.value,
            grad_norm: gnorm,
            step: 0.0,
            accepted: true,
            cumulative_seconds: clock.elapsed().as_secs_f64(),
        });
        let finish = |x: Vec<f64>, value, gnorm, iterations, stop, trace| SolverOutput {
            params: x,
            value,
            grad_norm: gnorm,
            iterations,
            stop,
            trace,
        };
        if !eval.value.is_finite() || !gnorm.is_finite() {
            return Ok(finish(x, eval.value, gnorm, 0, StopReason::NonFinite, trace));
        }
        let mut restarted = false;
        let mut k = 0;
        while k < self.config.max_iterations {
            if gnorm <= threshold {
                return Ok(finish(x, eval.value, gnorm, k, StopReason::GradientTolerance, trace));
            }
            let (mut dir, mut init) = rule.direction(&eval.gradient, k);
            if dot(&dir, &eval.gradient) >= 0.0 {
                rule.reset();
                dir = eval.gradient.iter().map(|g| -g).collect();
                init = (1.0 / gnorm).min(1.0);
            }
            let result = match line_search(self.objective, &x, &eval, &dir, init, self.config.c1, self.config.c2) {
                Ok(r) => r,
                Err(LineSearchError::NonFinite) => {
                    return Ok(finish(x, eval.value, gnorm, k, StopReason::NonFinite, trace))
                }
                Err(_) if !restarted => {
                    // retry once from steepest descent with fresh memory
                    rule.reset();
                    restarted = true;
                    continue;
                }
                Err(_) => return Ok(finish(x, eval.value, gnorm, k, StopReason::Stalled, trace)),
            };
            restarted = false;
            k += 1;
            let step: Vec<f64> = dir.iter().map(|d| result.step * d).collect();
            let grad_change: Vec<f64> =
                result.eval.gradient.iter().zip(&eval.gradient).map(|(a, b)| a - b).collect();
            for (xi, si) in x.iter_mut().zip(&step) {
                *xi += si;
            }
            let decreased = result.eval.value < eval.value;
            rule.observe(&step, &grad_change, &result.eval.gradient);
            eval = result.eval;
            gnorm = norm(&eval.gradient);
            trace.entries.push(TraceEntry {
                iteration: k,
                objective: eval.value,
                grad_norm: gnorm,
                step: result.step,
                accepted: true,
                cumulative_seconds: clock.elapsed().as_secs_f64(),
            });
            if !eval.value.is_finite() {
                return Ok(finish(x, eval.value, gnorm, k, StopReason::NonFinite, trace));
            }
            if !decreased && gnorm > threshold {
                return Ok(finish(x, eval.value, gnorm, k, StopReason::Stalled, trace));
            }
        }
        let stop = if gnorm <= threshold { StopReason::GradientTolerance } else { StopReason::MaxIterations };
        Ok(finish(x, eval.value, gnorm, k, stop, trace))
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in SolverKind::NAMES {
            let kind: SolverKind = name.parse().unwrap();
            assert_eq!(kind.name(), name);
        }
        assert_eq!("Newton".parse::<SolverKind>(), Err(SolverError::UnknownSolver("Newton".into())));
    }

    #[test]
    fn config_invariants() {
        assert!(SolverConfig::new(SolverKind::Tron).validate().is_ok());
        let mut c = SolverConfig::new(SolverKind::Gd);
        c.c2 = 1e-5;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::new(SolverKind::Tron);
        c.sigma3 = 0.9;
        assert!(c.validate().is_err());
        assert_eq!(SolverConfig::new(SolverKind::Sgd).max_iterations, 100);
    }

    #[test]
    fn empty_trace_csv_is_header_only() {
        assert_eq!(SolverTrace::default().to_csv(), "iteration,objective,grad_norm,step,cumulative_seconds\n");
    }
}
