use crate::dataset::{Dataset, Imputer, NormalizationModel};
use crate::discretizer::{DiscretizationModel, Method};
use crate::objectives::{
    Features, HingeObjective, LinearModel, ObjectiveConfig, ParameterLayout, Scheme, SoftmaxObjective,
};
use crate::solvers::{minimize, SolverConfig, SolverOutput};

use super::{ClassifierKind, EvalError, ExperimentSpec, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Predictions {
    pub labels: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
}

/// A model together with the solver runs that produced it (one per class for
/// one-vs-all, one otherwise).
#[derive(Debug, Clone)]
pub struct TrainedLinear {
    pub model: LinearModel,
    pub outputs: Vec<SolverOutput>,
}

impl TrainedLinear {
    pub fn predict(&self, data: &Dataset) -> Result<Predictions> {
        let features = Features::new(&self.model.layout, data)?;
        let n = features.num_rows();
        Ok(Predictions {
            labels: (0..n).map(|i| self.model.predict_label(&features, i)).collect(),
            probabilities: (0..n).map(|i| self.model.predict_proba(&features, i)).collect(),
        })
    }
}

/// Trains `classifier` on an already preprocessed dataset (no missing
/// values), starting every solver from the zero vector.
pub fn train_linear(
    classifier: ClassifierKind,
    lambda: f64,
    data: &Dataset,
    solver: &SolverConfig,
) -> Result<TrainedLinear> {
    let num_classes = data.num_classes();
    let config = ObjectiveConfig::new(classifier.objective()).with_lambda(lambda);
    config.validate()?;
    let (scheme, blocks) = match classifier {
        ClassifierKind::Lr | ClassifierKind::Ann0 => (Scheme::Softmax, num_classes),
        ClassifierKind::Svc => {
            if num_classes != 2 {
                return Err(EvalError::NotBinary { classifier, classes: num_classes });
            }
            (Scheme::BinaryHinge, 1)
        }
        ClassifierKind::SvcOva => (Scheme::OneVsAll, num_classes),
    };
    let layout = ParameterLayout::new(data.schema(), blocks);
    let mut outputs = Vec::new();
    let params = match scheme {
        Scheme::Softmax => {
            let features = Features::new(&layout, data)?;
            let objective = SoftmaxObjective::new(&features, data.labels(), num_classes, config);
            let out = minimize(&objective, &vec![0.0; layout.len()], solver)?;
            let params = out.params.clone();
            outputs.push(out);
            params
        }
        Scheme::BinaryHinge | Scheme::OneVsAll => {
            let single = ParameterLayout::new(data.schema(), 1);
            let features = Features::new(&single, data)?;
            let mut params = Vec::with_capacity(layout.len());
            let positives: Vec<usize> = if scheme == Scheme::BinaryHinge { vec![1] } else { (0..num_classes).collect() };
            for positive in positives {
                let objective = HingeObjective::new(&features, data.labels(), positive, config);
                let out = minimize(&objective, &vec![0.0; single.len()], solver)?;
                params.extend_from_slice(&out.params);
                outputs.push(out);
            }
            params
        }
    };
    let model = LinearModel {
        objective: config.kind,
        scheme,
        lambda,
        num_classes,
        layout,
        params,
    };
    Ok(TrainedLinear { model, outputs })
}

/// Preprocessing fitted on a training partition plus the trained model.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    pub imputer: Imputer,
    pub normalizer: Option<NormalizationModel>,
    pub discretizer: Option<DiscretizationModel>,
    pub model: LinearModel,
    pub outputs: Vec<SolverOutput>,
}

impl FittedPipeline {
    /// Imputes, then either discretizes or min/max normalizes the
    /// quantitative attributes, then trains. Every statistic is taken from
    /// `train` only; `reserved_missing` lists qualitative attributes that get
    /// a missing category regardless of whether `train` has missing cells.
    pub fn fit(spec: &ExperimentSpec, train: &Dataset, reserved_missing: &[usize], seed: u64) -> Result<Self> {
        let mut imputer = Imputer::fit(train)?;
        for &a in reserved_missing {
            imputer.reserve_missing_category(a);
        }
        let imputed = imputer.apply(train)?;
        let (normalizer, discretizer, prepared) = if spec.discretize {
            let bins = (spec.method != Method::Mdlp).then_some(spec.bins);
            let model = DiscretizationModel::fit(&imputed, spec.method, bins)?;
            let prepared = model.apply(&imputed)?;
            (None, Some(model), prepared)
        } else {
            let model = NormalizationModel::fit(&imputed);
            let prepared = model.apply(&imputed)?;
            (Some(model), None, prepared)
        };
        let solver = spec.solver.clone().with_seed(seed);
        let trained = train_linear(spec.classifier, spec.lambda_or_default(), &prepared, &solver)?;
        Ok(FittedPipeline { imputer, normalizer, discretizer, model: trained.model, outputs: trained.outputs })
    }

    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        let imputed = self.imputer.apply(data)?;
        Ok(match (&self.normalizer, &self.discretizer) {
            (_, Some(d)) => d.apply(&imputed)?,
            (Some(n), None) => n.apply(&imputed)?,
            (None, None) => imputed,
        })
    }

    pub fn predict(&self, data: &Dataset) -> Result<Predictions> {
        let prepared = self.transform(data)?;
        let features = Features::new(&self.model.layout, &prepared)?;
        let n = features.num_rows();
        Ok(Predictions {
            labels: (0..n).map(|i| self.model.predict_label(&features, i)).collect(),
            probabilities: (0..n).map(|i| self.model.predict_proba(&features, i)).collect(),
        })
    }
}
