use super::{add_penalty, add_penalty_hv, Features, Objective, ObjectiveConfig, ObjectiveEval, ObjectiveKind, StochasticObjective};

/// Numerically stable softmax: `exp(s_c - max s) / Σ`.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Negative log-likelihood or mean-square-error of the multi-class softmax
/// model, one parameter block per class.
pub struct SoftmaxObjective<'a> {
    features: &'a Features,
    labels: &'a [usize],
    num_classes: usize,
    config: ObjectiveConfig,
}

impl<'a> SoftmaxObjective<'a> {
    /// `config.kind` must be [`ObjectiveKind::Nll`] or [`ObjectiveKind::Mse`].
    pub fn new(features: &'a Features, labels: &'a [usize], num_classes: usize, config: ObjectiveConfig) -> Self {
        assert!(config.kind != ObjectiveKind::Hinge, "hinge loss has its own objective");
        assert_eq!(features.num_rows(), labels.len());
        SoftmaxObjective { features, labels, num_classes, config }
    }

    fn scores(&self, params: &[f64], i: usize) -> Vec<f64> {
        (0..self.num_classes).map(|c| self.features.dot(i, params, c)).collect()
    }

    /// Loss of instance `i` and `∂loss/∂s_c`.
    fn instance(&self, params: &[f64], i: usize) -> (f64, Vec<f64>) {
        let scores = self.scores(params, i);
        let y = self.labels[i];
        let probs = softmax(&scores);
        match self.config.kind {
            ObjectiveKind::Nll => {
                let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
                let mut d = probs;
                d[y] -= 1.0;
                (lse - scores[y], d)
            }
            _ => {
                // residual r_c = p_c - 1{c=y}; ∂/∂s_k = p_k (r_k - Σ_c r_c p_c)
                let resid: Vec<f64> =
                    probs.iter().enumerate().map(|(c, p)| p - f64::from(u8::from(c == y))).collect();
                let loss = 0.5 * resid.iter().map(|r| r * r).sum::<f64>();
                let mean: f64 = resid.iter().zip(&probs).map(|(r, p)| r * p).sum();
                let d = probs.iter().zip(&resid).map(|(p, r)| p * (r - mean)).collect();
                (loss, d)
            }
        }
    }

    fn penalty_weight(&self) -> f64 {
        self.config.lambda
    }
}

impl Objective for SoftmaxObjective<'_> {
    fn dim(&self) -> usize {
        self.num_classes * self.features.block_size()
    }

    fn evaluate(&self, params: &[f64]) -> ObjectiveEval {
        let mut value = 0.0;
        let mut gradient = vec![0.0; self.dim()];
        for i in 0..self.features.num_rows() {
            let (loss, d) = self.instance(params, i);
            value += loss;
            for (c, dc) in d.into_iter().enumerate() {
                self.features.axpy(i, dc, &mut gradient, c);
            }
        }
        add_penalty(params, self.features.block_size(), &self.config, self.penalty_weight(), &mut value, Some(&mut gradient));
        ObjectiveEval { value, gradient }
    }

    fn value(&self, params: &[f64]) -> f64 {
        let mut value: f64 = (0..self.features.num_rows()).map(|i| self.instance(params, i).0).sum();
        add_penalty(params, self.features.block_size(), &self.config, self.penalty_weight(), &mut value, None);
        value
    }

    fn hessian_vec(&self, params: &[f64], v: &[f64]) -> Vec<f64> {
        match self.config.kind {
            ObjectiveKind::Nll => self.nll_hessian_vec(params, v),
            _ => self.mse_hessian_vec(params, v),
        }
    }
}

impl SoftmaxObjective<'_> {
    /// Exact product with the NLL Hessian: per instance the score-space
    /// Hessian is `diag(p) - p pᵀ`.
    pub fn nll_hessian_vec(&self, params: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for i in 0..self.features.num_rows() {
            let probs = softmax(&self.scores(params, i));
            let u: Vec<f64> = (0..self.num_classes).map(|c| self.features.dot(i, v, c)).collect();
            let mean: f64 = probs.iter().zip(&u).map(|(p, uc)| p * uc).sum();
            for c in 0..self.num_classes {
                self.features.axpy(i, probs[c] * (u[c] - mean), &mut out, c);
            }
        }
        add_penalty_hv(v, self.features.block_size(), &self.config, self.penalty_weight(), &mut out);
        out
    }

    /// Central difference of the gradient along `v`.
    pub fn mse_hessian_vec(&self, params: &[f64], v: &[f64]) -> Vec<f64> {
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            return vec![0.0; self.dim()];
        }
        let pnorm = params.iter().map(|x| x * x).sum::<f64>().sqrt();
        let h = 1e-6 * (1.0 + pnorm) / (vnorm + f64::EPSILON);
        let plus: Vec<f64> = params.iter().zip(v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = params.iter().zip(v).map(|(a, b)| a - h * b).collect();
        let gp = self.evaluate(&plus).gradient;
        let gm = self.evaluate(&minus).gradient;
        gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    }
}

impl StochasticObjective for SoftmaxObjective<'_> {
    fn num_instances(&self) -> usize {
        self.features.num_rows()
    }

    fn batch_gradient(&self, params: &[f64], batch: &[usize]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        if batch.is_empty() {
            return g;
        }
        let scale = 1.0 / batch.len() as f64;
        for &i in batch {
            let (_, d) = self.instance(params, i);
            for (c, dc) in d.into_iter().enumerate() {
                self.features.axpy(i, scale * dc, &mut g, c);
            }
        }
        let mut unused = 0.0;
        let weight = self.penalty_weight() / self.num_instances() as f64;
        add_penalty(params, self.features.block_size(), &self.config, weight, &mut unused, Some(&mut g));
        g
    }
}
