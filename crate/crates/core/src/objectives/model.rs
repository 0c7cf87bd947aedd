use serde::{Deserialize, Serialize};

use super::{softmax, Features, ObjectiveKind, ParameterLayout};

/// How parameter blocks map to class decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// One block per class, softmax over the class scores.
    Softmax,
    /// One block scoring class 1 against class 0.
    BinaryHinge,
    /// One block per class, each trained class-vs-rest.
    OneVsAll,
}

/// A trained linear classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub objective: ObjectiveKind,
    pub scheme: Scheme,
    pub lambda: f64,
    pub num_classes: usize,
    pub layout: ParameterLayout,
    pub params: Vec<f64>,
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (c, &v)| if v > values[best] { c } else { best })
}

fn squash(z: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * z).exp())
}

impl LinearModel {
    /// Per-class decision values: class scores for softmax, margins for hinge.
    pub fn decision_values(&self, features: &Features, i: usize) -> Vec<f64> {
        match self.scheme {
            Scheme::BinaryHinge => {
                let z = features.dot(i, &self.params, 0);
                vec![-z, z]
            }
            Scheme::Softmax | Scheme::OneVsAll => {
                (0..self.num_classes).map(|c| features.dot(i, &self.params, c)).collect()
            }
        }
    }

    pub fn predict_label(&self, features: &Features, i: usize) -> usize {
        let d = self.decision_values(features, i);
        match self.scheme {
            Scheme::Softmax => argmax(&softmax(&d)),
            _ => argmax(&d),
        }
    }

    /// Class distribution. Hinge margins are squashed with `1/(1+e^{-2z})` and
    /// renormalized.
    pub fn predict_proba(&self, features: &Features, i: usize) -> Vec<f64> {
        let d = self.decision_values(features, i);
        match self.scheme {
            Scheme::Softmax => softmax(&d),
            _ => {
                let s: Vec<f64> = d.into_iter().map(squash).collect();
                let total: f64 = s.iter().sum();
                if total > 0.0 {
                    s.into_iter().map(|p| p / total).collect()
                } else {
                    vec![1.0 / self.num_classes as f64; self.num_classes]
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::mixed_dataset;
    use super::*;

    fn model(scheme: Scheme, classes: usize) -> (LinearModel, Features) {
        let d = mixed_dataset(3, classes, 2);
        let blocks = if scheme == Scheme::BinaryHinge { 1 } else { classes };
        let layout = ParameterLayout::new(d.schema(), blocks);
        let f = Features::new(&layout, &d).unwrap();
        let objective = if scheme == Scheme::Softmax { ObjectiveKind::Nll } else { ObjectiveKind::Hinge };
        let m = LinearModel {
            objective,
            scheme,
            lambda: 0.0,
            num_classes: classes,
            params: vec![0.0; layout.len()],
            layout,
        };
        (m, f)
    }

    #[test]
    fn argmax_ties_and_values() {
        assert_eq!(argmax(&[0.25, 0.25, 0.25, 0.25]), 0);
        assert_eq!(argmax(&[0.2, 0.7, 0.1]), 1);
        assert_eq!(argmax(&[-0.3, 0.4]), 1);
    }

    #[test]
    fn zero_models_are_uniform() {
        let (m, f) = model(Scheme::Softmax, 3);
        assert_eq!(m.predict_proba(&f, 0), vec![1.0 / 3.0; 3]);
        assert_eq!(m.predict_label(&f, 0), 0);
        let (m, f) = model(Scheme::BinaryHinge, 2);
        assert_eq!(m.predict_proba(&f, 0), vec![0.5, 0.5]);
    }

    #[test]
    fn one_vs_all_picks_largest_margin() {
        let (mut m, f) = model(Scheme::OneVsAll, 2);
        m.params[m.layout.intercept(0)] = -0.3;
        m.params[m.layout.intercept(1)] = 0.4;
        assert_eq!(m.predict_label(&f, 0), 1);
        let p = m.predict_proba(&f, 0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[1] > p[0]);
    }

    #[test]
    fn binary_hinge_sign_selects_class() {
        let (mut m, f) = model(Scheme::BinaryHinge, 2);
        m.params[0] = -2.0;
        assert_eq!(m.predict_label(&f, 0), 0);
        m.params[0] = 2.0;
        assert_eq!(m.predict_label(&f, 0), 1);
        let p = m.predict_proba(&f, 0);
        assert!((p[1] - 1.0 / (1.0 + (-4f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let (m, _) = model(Scheme::OneVsAll, 3);
        let s = serde_json::to_string(&m).unwrap();
        let back: LinearModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
