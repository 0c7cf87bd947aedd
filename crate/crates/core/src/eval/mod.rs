//! Repeated stratified cross-validation and the measurements taken on it.

mod bias_variance;
mod metrics;
mod pipeline;
mod stats;
mod synth;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DataError, Dataset};
use crate::discretizer::{DiscretizeError, Method};
use crate::objectives::{ObjectiveError, ObjectiveKind};
use crate::solvers::{SolverConfig, SolverError, SolverKind, SolverTrace, StopReason};

pub use bias_variance::{bias_variance, bias_variance_from_tallies, bias_variance_with, BvResult};
pub use metrics::{rmse, zero_one_loss};
pub use pipeline::{train_linear, FittedPipeline, Predictions, TrainedLinear};
pub use stats::{compare_reports, sign_test, wdl_compare, WdlRecord, WdlTable};
pub use synth::{synth_band2d, synth_xor2d};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("{classifier:?} needs a binary dataset but it has {classes} classes; binarize it or use SVC-OVA")]
    NotBinary { classifier: ClassifierKind, classes: usize },
    #[error("round {round}, fold {fold}: the training part holds fewer than two classes")]
    DegenerateFold { round: usize, fold: usize },
    #[error("round {round}, fold {fold}: objective became non-finite during training")]
    NumericFailure { round: usize, fold: usize },
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    /// Softmax logistic regression (negative log-likelihood).
    #[serde(rename = "LR")]
    Lr,
    /// Binary L2-loss support vector classifier.
    #[serde(rename = "SVC")]
    Svc,
    /// One L2-loss SVC per class, argmax of the margins.
    #[serde(rename = "SVC-OVA")]
    SvcOva,
    /// Softmax output trained on mean-square error (no hidden layer).
    #[serde(rename = "ANN0")]
    Ann0,
}

impl ClassifierKind {
    pub const NAMES: [&'static str; 4] = ["LR", "SVC", "SVC-OVA", "ANN0"];

    pub fn objective(self) -> ObjectiveKind {
        match self {
            ClassifierKind::Lr => ObjectiveKind::Nll,
            ClassifierKind::Svc | ClassifierKind::SvcOva => ObjectiveKind::Hinge,
            ClassifierKind::Ann0 => ObjectiveKind::Mse,
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "LR" => Ok(ClassifierKind::Lr),
            "SVC" => Ok(ClassifierKind::Svc),
            "SVC-OVA" => Ok(ClassifierKind::SvcOva),
            "ANN0" => Ok(ClassifierKind::Ann0),
            other => Err(format!("unknown classifier `{other}` (expected one of {})", Self::NAMES.join(", "))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub classifier: ClassifierKind,
    pub discretize: bool,
    pub method: Method,
    pub bins: usize,
    /// `None` selects the objective's default weight.
    pub lambda: Option<f64>,
    pub solver: SolverConfig,
    pub rounds: usize,
    pub folds: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(classifier: ClassifierKind) -> Self {
        ExperimentSpec {
            classifier,
            discretize: false,
            method: Method::Mdlp,
            bins: 3,
            lambda: None,
            solver: SolverConfig::new(SolverKind::Tron),
            rounds: 2,
            folds: 2,
            seed: 1,
        }
    }

    pub fn discretized(mut self, method: Method, bins: usize) -> Self {
        self.discretize = true;
        self.method = method;
        self.bins = bins;
        self
    }

    pub fn lambda_or_default(&self) -> f64 {
        self.lambda.unwrap_or_else(|| self.classifier.objective().default_lambda())
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(EvalError::InvalidSpec("rounds must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(EvalError::InvalidSpec("folds must be at least 2".into()));
        }
        if self.discretize && self.method != Method::Mdlp && self.bins == 0 {
            return Err(EvalError::InvalidSpec("bin count must be at least 1".into()));
        }
        if let Some(l) = self.lambda {
            if !(l.is_finite() && l >= 0.0) {
                return Err(EvalError::InvalidSpec(format!("lambda must be non-negative, got {l}")));
            }
        }
        self.solver.validate()?;
        Ok(())
    }
}

/// Where a fold sits in the experiment, and what it may know about the full
/// dataset without looking at held-out values or labels.
#[derive(Debug, Clone)]
pub struct FoldContext {
    pub round: usize,
    pub fold: usize,
    pub seed: u64,
    /// Qualitative attributes with missing cells anywhere in the dataset.
    pub reserved_missing: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct FoldOutcome {
    pub predictions: Predictions,
    pub train_seconds: f64,
    pub test_seconds: f64,
    pub traces: Vec<SolverTrace>,
    pub stops: Vec<StopReason>,
    pub objectives: Vec<f64>,
}

/// Anything that can be trained on one partition and predict another.
pub trait Learner {
    fn fit_predict(&self, train: &Dataset, test: &Dataset, ctx: &FoldContext) -> Result<FoldOutcome>;
}

impl Learner for ExperimentSpec {
    fn fit_predict(&self, train: &Dataset, test: &Dataset, ctx: &FoldContext) -> Result<FoldOutcome> {
        let clock = Instant::now();
        let fitted = FittedPipeline::fit(self, train, &ctx.reserved_missing, ctx.seed)?;
        let train_seconds = clock.elapsed().as_secs_f64();
        if fitted.outputs.iter().any(|o| o.stop == StopReason::NonFinite) {
            return Err(EvalError::NumericFailure { round: ctx.round, fold: ctx.fold });
        }
        let clock = Instant::now();
        let predictions = fitted.predict(test)?;
        let test_seconds = clock.elapsed().as_secs_f64();
        Ok(FoldOutcome {
            predictions,
            train_seconds,
            test_seconds,
            traces: fitted.outputs.iter().map(|o| o.trace.clone()).collect(),
            stops: fitted.outputs.iter().map(|o| o.stop).collect(),
            objectives: fitted.outputs.iter().map(|o| o.value).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub round: usize,
    pub fold: usize,
    pub zero_one: f64,
    pub rmse: f64,
    pub train_seconds: f64,
    pub test_seconds: f64,
    pub stops: Vec<StopReason>,
    pub final_objectives: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Trace CSV files, filled in when traces are written to disk.
    #[serde(default)]
    pub trace_files: Vec<String>,
    #[serde(skip)]
    pub traces: Vec<SolverTrace>,
}

/// Outcome of a whole repeated cross-validation.
#[derive(Debug, Clone)]
pub struct CvRun {
    pub folds: Vec<FoldResult>,
    /// Predicted label of every instance, one vector per round.
    pub predictions: Vec<Vec<usize>>,
}

/// Stratified assignment of instances to `folds` folds: each class's
/// instances are shuffled and dealt round-robin, continuing the rotation
/// across classes so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[usize], folds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(rng);
        for &i in members.iter() {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

fn round_rng(seed: u64, round: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round as u64);
    rng
}

/// Independent seed for the learner of `(round, fold)`.
fn fold_seed(seed: u64, round: usize, fold: usize) -> u64 {
    let mut z = seed ^ ((round as u64) << 32 | fold as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `rounds` × `folds` cross-validation of any [`Learner`].
pub fn cross_validate_with<L: Learner + ?Sized>(
    learner: &L,
    data: &Dataset,
    rounds: usize,
    folds: usize,
    seed: u64,
) -> Result<CvRun> {
    if rounds < 1 || folds < 2 {
        return Err(EvalError::InvalidSpec("need at least 1 round and 2 folds".into()));
    }
    if data.len() < folds {
        return Err(EvalError::InvalidSpec(format!("{} instances cannot fill {folds} folds", data.len())));
    }
    let reserved_missing = data.qualitative_with_missing();
    let mut results = Vec::with_capacity(rounds * folds);
    let mut predictions = Vec::with_capacity(rounds);
    for round in 0..rounds {
        let assignment = stratified_folds(data.labels(), folds, &mut round_rng(seed, round));
        let mut round_pred = vec![usize::MAX; data.len()];
        for fold in 0..folds {
            let (test_idx, train_idx): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&i| assignment[i] == fold);
            let train = data.subset(&train_idx);
            let test = data.subset(&test_idx);
            if train.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
                return Err(EvalError::DegenerateFold { round, fold });
            }
            let ctx = FoldContext {
                round,
                fold,
                seed: fold_seed(seed, round, fold),
                reserved_missing: reserved_missing.clone(),
            };
            let outcome = learner.fit_predict(&train, &test, &ctx)?;
            for (&i, &p) in test_idx.iter().zip(&outcome.predictions.labels) {
                round_pred[i] = p;
            }
            results.push(FoldResult {
                round,
                fold,
                zero_one: zero_one_loss(&outcome.predictions.labels, test.labels()),
                rmse: rmse(&outcome.predictions.probabilities, test.labels()),
                train_seconds: outcome.train_seconds,
                test_seconds: outcome.test_seconds,
                stops: outcome.stops,
                final_objectives: outcome.objectives,
                iterations: outcome.traces.iter().map(|t| t.len().saturating_sub(1)).collect(),
                trace_files: Vec::new(),
                traces: outcome.traces,
            });
        }
        predictions.push(round_pred);
    }
    Ok(CvRun { folds: results, predictions })
}

/// Cross-validates the classifier described by `spec`.
pub fn cross_validate(spec: &ExperimentSpec, data: &Dataset) -> Result<Vec<FoldResult>> {
    spec.validate()?;
    Ok(cross_validate_with(spec, data, spec.rounds, spec.folds, spec.seed)?.folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub relation: String,
    pub instances: usize,
    pub qualitative: usize,
    pub quantitative: usize,
    pub classes: usize,
    /// "Big" above the threshold, "Little" otherwise.
    pub size_category: String,
}

impl DatasetSummary {
    pub const DEFAULT_BIG_THRESHOLD: usize = 100_000;

    pub fn new(data: &Dataset, big_threshold: usize) -> Self {
        let schema = data.schema();
        DatasetSummary {
            relation: schema.relation.clone(),
            instances: data.len(),
            qualitative: schema.num_qualitative(),
            quantitative: schema.num_quantitative(),
            classes: schema.num_classes(),
            size_category: if data.len() > big_threshold { "Big" } else { "Little" }.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub zero_one: f64,
    pub rmse: f64,
    pub train_seconds: f64,
    pub test_seconds: f64,
}

impl Aggregate {
    pub fn of(folds: &[FoldResult]) -> Self {
        let n = folds.len().max(1) as f64;
        let mean = |f: fn(&FoldResult) -> f64| folds.iter().map(f).sum::<f64>() / n;
        Aggregate {
            zero_one: mean(|r| r.zero_one),
            rmse: mean(|r| r.rmse),
            train_seconds: mean(|r| r.train_seconds),
            test_seconds: mean(|r| r.test_seconds),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub spec: ExperimentSpec,
    pub dataset: DatasetSummary,
    pub folds: Vec<FoldResult>,
    pub mean: Aggregate,
    #[serde(default)]
    pub bias_variance: Option<BvResult>,
    #[serde(default)]
    pub comparisons: Vec<WdlTable>,
}

impl EvaluationReport {
    pub fn new(spec: ExperimentSpec, data: &Dataset, folds: Vec<FoldResult>) -> Self {
        let mean = Aggregate::of(&folds);
        EvaluationReport {
            spec,
            dataset: DatasetSummary::new(data, DatasetSummary::DEFAULT_BIG_THRESHOLD),
            folds,
            mean,
            bias_variance: None,
            comparisons: Vec::new(),
        }
    }

    /// Copy with every wall-clock field zeroed, for byte comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for f in &mut r.folds {
            f.train_seconds = 0.0;
            f.test_seconds = 0.0;
        }
        r.mean.train_seconds = 0.0;
        r.mean.test_seconds = 0.0;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratified_folds_balance_classes() {
        let labels: Vec<usize> = (0..30).map(|i| usize::from(i % 3 == 0)).collect();
        let a = stratified_folds(&labels, 2, &mut round_rng(5, 0));
        for fold in 0..2 {
            let members: Vec<usize> = (0..30).filter(|&i| a[i] == fold).collect();
            assert!((members.len() as i64 - 15).abs() <= 1);
            let pos = members.iter().filter(|&&i| labels[i] == 1).count();
            assert_eq!(pos, 5);
        }
        assert_eq!(a, stratified_folds(&labels, 2, &mut round_rng(5, 0)));
        assert_ne!(a, stratified_folds(&labels, 2, &mut round_rng(5, 1)));
    }

    #[test]
    fn fold_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for r in 0..10 {
            for f in 0..5 {
                assert!(seen.insert(fold_seed(3, r, f)));
            }
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = ExperimentSpec::new(ClassifierKind::Lr);
        assert!(s.validate().is_ok());
        s.folds = 1;
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::new(ClassifierKind::Lr);
        s.lambda = Some(-1.0);
        assert!(s.validate().is_err());
        assert_eq!(ExperimentSpec::new(ClassifierKind::Svc).lambda_or_default(), 1.0);
        assert_eq!("SVC-OVA".parse::<ClassifierKind>(), Ok(ClassifierKind::SvcOva));
        assert!("MLP".parse::<ClassifierKind>().is_err());
    }
}
