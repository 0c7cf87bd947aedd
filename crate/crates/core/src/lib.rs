//! Linear classifiers (logistic regression, L2-loss SVM, single-layer
//! softmax network) over mixed qualitative/quantitative data, with
//! discretization of quantitative attributes, five iterative solvers and a
//! cross-validation harness.

pub mod dataset;
pub mod discretizer;
pub mod eval;
pub mod objectives;
pub mod solvers;

pub use dataset::{Attribute, AttributeKind, Dataset, Schema, Value};
pub use discretizer::{DiscretizationModel, Method};
pub use eval::{ClassifierKind, EvaluationReport, ExperimentSpec};
pub use objectives::{LinearModel, ObjectiveKind};
pub use solvers::{minimize, SolverConfig, SolverKind};
