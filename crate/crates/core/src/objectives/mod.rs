//! Linear scoring over mixed attribute kinds and the three training objectives.
//!
//! Every class (or hinge scorer) owns one parameter block laid out as
//! `[intercept | one slot per quantitative attribute | one slot per
//! (qualitative attribute, category)]`. A qualitative cell therefore selects
//! exactly one slot of its attribute instead of being expanded into indicator
//! columns beforehand.

mod hinge;
mod model;
mod softmax;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{AttributeKind, Dataset, Schema, Value};

pub use hinge::HingeObjective;
pub use model::{argmax, LinearModel, Scheme};
pub use softmax::{softmax, SoftmaxObjective};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("dataset does not fit the parameter layout: {0}")]
    LayoutMismatch(String),
    #[error("attribute `{0}` has a missing value; impute first")]
    MissingValue(String),
    #[error("regularization weight must be finite and non-negative, got {0}")]
    InvalidLambda(f64),
    #[error("hinge loss needs a binary problem, got {0} classes")]
    NotBinary(usize),
}

pub type Result<T> = std::result::Result<T, ObjectiveError>;

/// A twice-differentiable (or generalized-Hessian) function to minimize.
pub trait Objective {
    fn dim(&self) -> usize;

    fn evaluate(&self, params: &[f64]) -> ObjectiveEval;

    fn value(&self, params: &[f64]) -> f64 {
        self.evaluate(params).value
    }

    fn hessian_vec(&self, params: &[f64], v: &[f64]) -> Vec<f64>;
}

/// An objective written as a sum over instances plus a penalty, so a
/// mini-batch estimate of its per-instance average gradient is available.
pub trait StochasticObjective: Objective {
    fn num_instances(&self) -> usize;

    /// Unbiased estimate of `∇f / N` from the instances in `batch`.
    fn batch_gradient(&self, params: &[f64], batch: &[usize]) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEval {
    pub value: f64,
    pub gradient: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// Negative conditional log-likelihood of the softmax model.
    Nll,
    /// Squared (L2) hinge loss.
    Hinge,
    /// Half squared error between one-hot targets and softmax probabilities.
    Mse,
}

impl ObjectiveKind {
    pub fn default_lambda(self) -> f64 {
        match self {
            ObjectiveKind::Hinge => 1.0,
            ObjectiveKind::Nll | ObjectiveKind::Mse => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub kind: ObjectiveKind,
    pub lambda: f64,
    pub regularize_intercept: bool,
}

impl ObjectiveConfig {
    pub fn new(kind: ObjectiveKind) -> Self {
        ObjectiveConfig { kind, lambda: kind.default_lambda(), regularize_intercept: false }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(ObjectiveError::InvalidLambda(self.lambda));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SlotGroup {
    Quantitative { offset: usize },
    Qualitative { offset: usize, width: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutAttribute {
    pub name: String,
    pub slots: SlotGroup,
}

/// Index arithmetic for `num_blocks` parameter blocks over one schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterLayout {
    pub num_blocks: usize,
    pub block_size: usize,
    pub attributes: Vec<LayoutAttribute>,
}

impl ParameterLayout {
    pub fn new(schema: &Schema, num_blocks: usize) -> Self {
        let mut offset = 1;
        let attributes = schema
            .attributes
            .iter()
            .map(|attr| {
                let slots = match &attr.kind {
                    AttributeKind::Quantitative => {
                        offset += 1;
                        SlotGroup::Quantitative { offset: offset - 1 }
                    }
                    AttributeKind::Qualitative { values } => {
                        offset += values.len();
                        SlotGroup::Qualitative { offset: offset - values.len(), width: values.len() }
                    }
                };
                LayoutAttribute { name: attr.name.clone(), slots }
            })
            .collect();
        ParameterLayout { num_blocks, block_size: offset, attributes }
    }

    pub fn len(&self) -> usize {
        self.num_blocks * self.block_size
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intercept(&self, block: usize) -> usize {
        block * self.block_size
    }

    pub fn quantitative(&self, block: usize, attr: usize) -> Option<usize> {
        match self.attributes.get(attr)?.slots {
            SlotGroup::Quantitative { offset } => Some(block * self.block_size + offset),
            SlotGroup::Qualitative { .. } => None,
        }
    }

    pub fn qualitative(&self, block: usize, attr: usize, category: usize) -> Option<usize> {
        match self.attributes.get(attr)?.slots {
            SlotGroup::Qualitative { offset, width } if category < width => {
                Some(block * self.block_size + offset + category)
            }
            _ => None,
        }
    }

    /// Whether slot `index` is an intercept.
    pub fn is_intercept(&self, index: usize) -> bool {
        index.is_multiple_of(self.block_size)
    }
}

/// Sparse per-instance feature vectors `φ(x)` expressed as block-relative
/// slot offsets. Offset 0 (the intercept, value 1) is always present.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    block_size: usize,
    row_ptr: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl Features {
    pub fn new(layout: &ParameterLayout, data: &Dataset) -> Result<Self> {
        let schema = data.schema();
        if schema.num_attributes() != layout.attributes.len() {
            return Err(ObjectiveError::LayoutMismatch(format!(
                "{} attributes, layout has {}",
                schema.num_attributes(),
                layout.attributes.len()
            )));
        }
        let mut row_ptr = Vec::with_capacity(data.len() + 1);
        let mut offsets = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in data.rows() {
            offsets.push(0);
            values.push(1.0);
            for ((cell, slot), attr) in row.iter().zip(&layout.attributes).zip(&schema.attributes) {
                match (slot.slots, cell) {
                    (SlotGroup::Quantitative { offset }, Value::Real(v)) => {
                        offsets.push(offset);
                        values.push(*v);
                    }
                    (SlotGroup::Qualitative { offset, width }, Value::Category(c)) if *c < width => {
                        offsets.push(offset + c);
                        values.push(1.0);
                    }
                    (_, Value::Missing) => return Err(ObjectiveError::MissingValue(attr.name.clone())),
                    _ => {
                        return Err(ObjectiveError::LayoutMismatch(format!(
                            "value {cell:?} does not fit attribute `{}`",
                            attr.name
                        )))
                    }
                }
            }
            row_ptr.push(offsets.len());
        }
        Ok(Features { block_size: layout.block_size, row_ptr, offsets, values })
    }

    pub fn num_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// `(block offset, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.offsets[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// `β_block · φ(x_i)`.
    pub fn dot(&self, i: usize, params: &[f64], block: usize) -> f64 {
        let base = block * self.block_size;
        self.row(i).map(|(f, v)| params[base + f] * v).sum()
    }

    /// `out_block += scale · φ(x_i)`.
    pub fn axpy(&self, i: usize, scale: f64, out: &mut [f64], block: usize) {
        let base = block * self.block_size;
        for (f, v) in self.row(i) {
            out[base + f] += scale * v;
        }
    }
}

/// Score of class `block` for the instance in row `i`: intercept plus the
/// weighted quantitative values plus one selected slot per qualitative attribute.
pub fn linear_score(params: &[f64], features: &Features, i: usize, block: usize) -> f64 {
    features.dot(i, params, block)
}

/// Adds `λ/2 ‖β‖²` over the penalized slots to `value` and `λβ` to `gradient`.
fn add_penalty(
    params: &[f64],
    block_size: usize,
    config: &ObjectiveConfig,
    weight: f64,
    value: &mut f64,
    gradient: Option<&mut [f64]>,
) {
    if weight == 0.0 {
        return;
    }
    let penalized = |j: usize| config.regularize_intercept || !j.is_multiple_of(block_size);
    let sq: f64 = params.iter().enumerate().filter(|(j, _)| penalized(*j)).map(|(_, b)| b * b).sum();
    *value += 0.5 * weight * sq;
    if let Some(g) = gradient {
        for (j, (gj, b)) in g.iter_mut().zip(params).enumerate() {
            if penalized(j) {
                *gj += weight * b;
            }
        }
    }
}

fn add_penalty_hv(v: &[f64], block_size: usize, config: &ObjectiveConfig, weight: f64, out: &mut [f64]) {
    if weight == 0.0 {
        return;
    }
    for (j, (o, vj)) in out.iter_mut().zip(v).enumerate() {
        if config.regularize_intercept || !j.is_multiple_of(block_size) {
            *o += weight * vj;
        }
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::dataset::{Attribute, Dataset, Schema, Value};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random mixed-attribute dataset: two quantitative attributes and two
    /// qualitative ones with 3 and 2 categories.
    pub fn mixed_dataset(n: usize, classes: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = Schema::new(
            "mixed",
            vec![
                Attribute::quantitative("x1"),
                Attribute::qualitative("c1", ["a", "b", "c"]),
                Attribute::quantitative("x2"),
                Attribute::qualitative("c2", ["u", "v"]),
            ],
            "y",
            (0..classes).map(|c| format!("k{c}")).collect(),
        )
        .unwrap();
        let rows: Vec<Vec<Value>> = (0..n)
            .map(|_| {
                vec![
                    Value::Real(rng.gen_range(-1.0..1.0)),
                    Value::Category(rng.gen_range(0..3)),
                    Value::Real(rng.gen_range(0.0..2.0)),
                    Value::Category(rng.gen_range(0..2)),
                ]
            })
            .collect();
        let labels = rows
            .iter()
            .map(|r| {
                let s = r[0].as_real().unwrap() + 0.5 * r[1].as_category().unwrap() as f64
                    - 0.3 * r[2].as_real().unwrap()
                    + rng.gen_range(-0.5..0.5);
                ((s + 1.5).max(0.0) as usize * classes / 4).min(classes - 1)
            })
            .collect();
        Dataset::new(schema, rows, labels).unwrap()
    }

    pub fn random_params(len: usize, scale: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.gen_range(-scale..scale)).collect()
    }

    /// Central finite-difference gradient.
    pub fn fd_gradient<O: Objective>(obj: &O, x: &[f64], h: f64) -> Vec<f64> {
        let mut p = x.to_vec();
        (0..x.len())
            .map(|j| {
                p[j] = x[j] + h;
                let up = obj.value(&p);
                p[j] = x[j] - h;
                let down = obj.value(&p);
                p[j] = x[j];
                (up - down) / (2.0 * h)
            })
            .collect()
    }

    /// `(∇f(x + h v) − ∇f(x − h v)) / 2h`.
    pub fn fd_hessian_vec<O: Objective>(obj: &O, x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
        let plus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
        let gp = obj.evaluate(&plus).gradient;
        let gm = obj.evaluate(&minus).gradient;
        gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    }

    pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        diff / scale.max(1e-8)
    }
}
