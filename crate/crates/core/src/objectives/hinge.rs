use super::{add_penalty, add_penalty_hv, Features, Objective, ObjectiveConfig, ObjectiveEval, StochasticObjective};

/// L2-loss support vector objective
/// `½‖β‖² + λ Σ max(0, 1 − y βᵀφ(x))²` over a single parameter block.
///
/// The generalized Hessian `I + 2λ Σ_{active} φφᵀ` is used for the
/// Hessian-vector product, where the active set holds the instances with
/// margin `y βᵀφ(x) < 1`.
pub struct HingeObjective<'a> {
    features: &'a Features,
    signs: Vec<f64>,
    config: ObjectiveConfig,
}

impl<'a> HingeObjective<'a> {
    /// Instances whose label equals `positive` get `y = +1`, all others `y = −1`.
    pub fn new(features: &'a Features, labels: &[usize], positive: usize, config: ObjectiveConfig) -> Self {
        assert_eq!(features.num_rows(), labels.len());
        let signs = labels.iter().map(|&y| if y == positive { 1.0 } else { -1.0 }).collect();
        HingeObjective { features, signs, config }
    }

    pub fn from_signs(features: &'a Features, signs: Vec<f64>, config: ObjectiveConfig) -> Self {
        assert_eq!(features.num_rows(), signs.len());
        HingeObjective { features, signs, config }
    }

    pub fn margin(&self, params: &[f64], i: usize) -> f64 {
        self.signs[i] * self.features.dot(i, params, 0)
    }

    /// Instances with margin below 1.
    pub fn active_set(&self, params: &[f64]) -> Vec<usize> {
        (0..self.features.num_rows()).filter(|&i| self.margin(params, i) < 1.0).collect()
    }
}

impl Objective for HingeObjective<'_> {
    fn dim(&self) -> usize {
        self.features.block_size()
    }

    fn evaluate(&self, params: &[f64]) -> ObjectiveEval {
        let lambda = self.config.lambda;
        let mut value = 0.0;
        let mut gradient = vec![0.0; self.dim()];
        for i in 0..self.features.num_rows() {
            let m = self.margin(params, i);
            if m < 1.0 {
                value += lambda * (1.0 - m).powi(2);
                self.features.axpy(i, 2.0 * lambda * (m - 1.0) * self.signs[i], &mut gradient, 0);
            }
        }
        add_penalty(params, self.features.block_size(), &self.config, 1.0, &mut value, Some(&mut gradient));
        ObjectiveEval { value, gradient }
    }

    fn hessian_vec(&self, params: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for i in self.active_set(params) {
            let u = self.features.dot(i, v, 0);
            self.features.axpy(i, 2.0 * self.config.lambda * u, &mut out, 0);
        }
        add_penalty_hv(v, self.features.block_size(), &self.config, 1.0, &mut out);
        out
    }
}

impl StochasticObjective for HingeObjective<'_> {
    fn num_instances(&self) -> usize {
        self.features.num_rows()
    }

    fn batch_gradient(&self, params: &[f64], batch: &[usize]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        if batch.is_empty() {
            return g;
        }
        let scale = 2.0 * self.config.lambda / batch.len() as f64;
        for &i in batch {
            let m = self.margin(params, i);
            if m < 1.0 {
                self.features.axpy(i, scale * (m - 1.0) * self.signs[i], &mut g, 0);
            }
        }
        let mut unused = 0.0;
        let weight = 1.0 / self.num_instances() as f64;
        add_penalty(params, self.features.block_size(), &self.config, weight, &mut unused, Some(&mut g));
        g
    }
}
