#![allow(dead_code)]

use linclass::dataset::{Attribute, Dataset, Schema, Value};
use linclass::objectives::Objective;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mixed-attribute fixture: two quantitative attributes, two qualitative ones
/// (3 and 4 categories), labels drawn from a noisy linear rule over 3 classes.
pub fn mixed_fixture(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = Schema::new(
        "fixture",
        vec![
            Attribute::quantitative("a"),
            Attribute::qualitative("colour", ["red", "green", "blue"]),
            Attribute::quantitative("b"),
            Attribute::qualitative("shape", ["circle", "square", "star", "hex"]),
        ],
        "class",
        vec!["x".into(), "y".into(), "z".into()],
    )
    .unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(0.0..1.0);
        let colour = rng.gen_range(0..3);
        let shape = rng.gen_range(0..4);
        let scores = [
            1.5 * a + [0.5, -0.5, 0.0][colour],
            -a + 2.0 * b + [0.0, 0.7, -0.3, 0.2][shape],
            0.5 - b + [-0.4, 0.3, 0.6][colour],
        ];
        let noisy: Vec<f64> = scores.iter().map(|s| s + rng.gen_range(-1.0..1.0)).collect();
        let y = (0..3).fold(0, |best, c| if noisy[c] > noisy[best] { c } else { best });
        rows.push(vec![Value::Real(a), Value::Category(colour), Value::Real(b), Value::Category(shape)]);
        labels.push(y);
    }
    Dataset::new(schema, rows, labels).unwrap()
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Central differences of the objective value.
pub fn central_gradient(obj: &dyn Objective, x: &[f64], h: f64) -> Vec<f64> {
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

/// Central differences of the analytic gradient along `v`.
pub fn central_hessian_vec(obj: &dyn Objective, x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    let shifted = |sign: f64| -> Vec<f64> {
        let p: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + sign * h * b).collect();
        obj.evaluate(&p).gradient
    };
    let (up, down) = (shifted(1.0), shifted(-1.0));
    up.iter().zip(&down).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}
