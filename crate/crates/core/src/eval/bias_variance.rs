use serde::{Deserialize, Serialize};

use super::{cross_validate_with, EvalError, ExperimentSpec, Learner, Result};
use crate::dataset::Dataset;

/// Kohavi–Wolpert decomposition of the 0-1 loss, averaged over instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvResult {
    pub bias: f64,
    pub variance: f64,
    pub trials: usize,
    /// `tallies[i][c]`: how often instance `i` was predicted as class `c`.
    /// Not serialized; it has one row per instance.
    #[serde(skip)]
    pub tallies: Vec<Vec<u32>>,
}

/// Decomposition from per-instance prediction counts. The target
/// distribution is taken as degenerate at the observed label, so there is no
/// noise term.
pub fn bias_variance_from_tallies(tallies: Vec<Vec<u32>>, labels: &[usize]) -> BvResult {
    assert_eq!(tallies.len(), labels.len());
    let mut bias = 0.0;
    let mut variance = 0.0;
    let mut trials = 0;
    for (counts, &y) in tallies.iter().zip(labels) {
        let total: u32 = counts.iter().sum();
        if total == 0 {
            continue;
        }
        trials = trials.max(total as usize);
        let total = f64::from(total);
        let mut b = 0.0;
        let mut sq = 0.0;
        for (c, &k) in counts.iter().enumerate() {
            let p = f64::from(k) / total;
            let target = if c == y { 1.0 } else { 0.0 };
            b += (target - p).powi(2);
            sq += p * p;
        }
        bias += 0.5 * b;
        variance += 0.5 * (1.0 - sq);
    }
    let n = labels.len().max(1) as f64;
    BvResult { bias: bias / n, variance: variance / n, trials, tallies }
}

/// Repeats 2-fold cross-validation `trials` times with distinct fold
/// assignments and decomposes the spread of each instance's predictions.
pub fn bias_variance_with<L: Learner + ?Sized>(learner: &L, data: &Dataset, trials: usize, seed: u64) -> Result<BvResult> {
    if trials < 2 {
        return Err(EvalError::InvalidSpec("bias-variance estimation needs at least 2 trials".into()));
    }
    let run = cross_validate_with(learner, data, trials, 2, seed)?;
    let classes = data.num_classes();
    let mut tallies = vec![vec![0u32; classes]; data.len()];
    for round in &run.predictions {
        for (counts, &p) in tallies.iter_mut().zip(round) {
            counts[p] += 1;
        }
    }
    Ok(bias_variance_from_tallies(tallies, data.labels()))
}

pub fn bias_variance(spec: &ExperimentSpec, data: &Dataset, trials: usize) -> Result<BvResult> {
    spec.validate()?;
    bias_variance_with(spec, data, trials, spec.seed)
}
