use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_start, norm, SolverConfig, SolverError, SolverOutput, SolverTrace, StopReason, TraceEntry};
use crate::objectives::StochasticObjective;

/// Mini-batch stochastic gradient descent on `f / N` with step
/// `η_t = η₀ / (1 + t·decay)`, `t` counting updates. Instances are reshuffled
/// every epoch from a seeded generator; the full objective is traced once per
/// epoch.
pub fn sgd<O: StochasticObjective + ?Sized>(
    objective: &O,
    start: &[f64],
    config: &SolverConfig,
) -> Result<SolverOutput, SolverError> {
    check_start(objective, start, config)?;
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x = start.to_vec();
    let eval = objective.evaluate(&x);
    let mut trace = SolverTrace::default();
    let mut gnorm = norm(&eval.gradient);
    let threshold = config.tolerance * gnorm.max(1.0);
    let mut value = eval.value;
    trace.entries.push(TraceEntry {
        iteration: 0,
        objective: value,
        grad_norm: gnorm,
        step: config.sgd_step,
        accepted: true,
        cumulative_seconds: clock.elapsed().as_secs_f64(),
    });
    let mut order: Vec<usize> = (0..objective.num_instances()).collect();
    let mut t = 0usize;
    let mut stop = StopReason::EpochsCompleted;
    let mut epochs = 0;
    for epoch in 1..=config.max_iterations {
        if gnorm <= threshold {
            stop = StopReason::GradientTolerance;
            break;
        }
        order.shuffle(&mut rng);
        let mut eta = config.sgd_step;
        for batch in order.chunks(config.batch_size) {
            eta = config.sgd_step / (1.0 + t as f64 * config.sgd_decay);
            let g = objective.batch_gradient(&x, batch);
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= eta * gi;
            }
            t += 1;
        }
        epochs = epoch;
        let eval = objective.evaluate(&x);
        value = eval.value;
        gnorm = norm(&eval.gradient);
        trace.entries.push(TraceEntry {
            iteration: epoch,
            objective: value,
            grad_norm: gnorm,
            step: eta,
            accepted: true,
            cumulative_seconds: clock.elapsed().as_secs_f64(),
        });
        if !value.is_finite() {
            stop = StopReason::NonFinite;
            break;
        }
    }
    Ok(SolverOutput { params: x, value, grad_norm: gnorm, iterations: epochs, stop, trace })
}
