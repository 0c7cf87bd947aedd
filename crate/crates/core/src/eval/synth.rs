use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Attribute, Dataset, Schema, Value};

fn two_uniform(relation: &str, n: usize, seed: u64, positive: impl Fn(f64, f64) -> bool) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = Schema::new(
        relation,
        vec![Attribute::quantitative("x1"), Attribute::quantitative("x2")],
        "class",
        vec!["neg".to_string(), "pos".to_string()],
    )
    .expect("static schema is valid");
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        rows.push(vec![Value::Real(a), Value::Real(b)]);
        labels.push(usize::from(positive(a, b)));
    }
    Dataset::new(schema, rows, labels).expect("generated rows match the schema")
}

/// Two uniform attributes on `[0, 1)`; positive iff both fall in the middle
/// third. Not linearly separable, but separable once each attribute is cut
/// into three intervals.
pub fn synth_band2d(n: usize, seed: u64) -> Dataset {
    let middle = |v: f64| (1.0 / 3.0..2.0 / 3.0).contains(&v);
    two_uniform("band2d", n, seed, |a, b| middle(a) && middle(b))
}

/// Two uniform attributes; positive iff exactly one exceeds 0.5.
pub fn synth_xor2d(n: usize, seed: u64) -> Dataset {
    two_uniform("xor2d", n, seed, |a, b| (a > 0.5) != (b > 0.5))
}
