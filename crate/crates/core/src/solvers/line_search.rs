use std::cell::Cell;

use thiserror::Error;

use super::dot;
use crate::objectives::{Objective, ObjectiveEval};

const MAX_TRIALS: usize = 50;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum LineSearchError {
    #[error("direction is not a descent direction (slope {0})")]
    NotDescent(f64),
    #[error("no step satisfying the Wolfe conditions after {MAX_TRIALS} trials")]
    Stalled,
    #[error("objective became non-finite along the search direction")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub step: f64,
    pub eval: ObjectiveEval,
    pub evaluations: usize,
}

struct Sample {
    step: f64,
    value: f64,
    slope: f64,
    eval: ObjectiveEval,
}

/// Minimizer of the cubic matching `(a, fa, ga)` and `(b, fb, gb)`, clamped
/// into `[lo, hi]`; falls back to bisection.
#[allow(clippy::too_many_arguments)]
fn cubic_min(a: f64, fa: f64, ga: f64, b: f64, fb: f64, gb: f64, lo: f64, hi: f64) -> f64 {
    let d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - ga * gb;
    let t = if disc >= 0.0 {
        let d2 = disc.sqrt().copysign(b - a);
        b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2)
    } else {
        f64::NAN
    };
    if t.is_finite() {
        t.clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    }
}

/// Strong-Wolfe line search along `direction` from `x`, starting at
/// `initial_step`.
///
/// When the first trial already satisfies the Wolfe conditions but the
/// slope there is still clearly negative, one interpolated step further along
/// is tried and kept if it also satisfies both conditions with a lower value.
/// This makes the search exact on quadratics.
pub fn line_search<O: Objective + ?Sized>(
    objective: &O,
    x: &[f64],
    at_x: &ObjectiveEval,
    direction: &[f64],
    initial_step: f64,
    c1: f64,
    c2: f64,
) -> Result<LineSearchResult, LineSearchError> {
    let f0 = at_x.value;
    let g0 = dot(&at_x.gradient, direction);
    if g0.is_nan() || g0 >= 0.0 {
        return Err(LineSearchError::NotDescent(g0));
    }
    let evaluations = Cell::new(0);
    let sample = |step: f64| -> Sample {
        evaluations.set(evaluations.get() + 1);
        let trial: Vec<f64> = x.iter().zip(direction).map(|(a, d)| a + step * d).collect();
        let eval = objective.evaluate(&trial);
        Sample { step, value: eval.value, slope: dot(&eval.gradient, direction), eval }
    };
    let armijo = |s: &Sample| s.value <= f0 + c1 * s.step * g0;
    let curvature = |s: &Sample| s.slope.abs() <= -c2 * g0;
    let finish = |s: Sample| Ok(LineSearchResult { step: s.step, eval: s.eval, evaluations: evaluations.get() });

    let mut prev = Sample { step: 0.0, value: f0, slope: g0, eval: at_x.clone() };
    let mut step = initial_step.max(f64::MIN_POSITIVE);
    let mut first = true;
    let (mut lo, mut hi);
    loop {
        if evaluations.get() >= MAX_TRIALS {
            return Err(LineSearchError::Stalled);
        }
        let cur = sample(step);
        if !cur.value.is_finite() {
            // shrink toward the last finite point
            step = prev.step + 0.1 * (step - prev.step);
            if step - prev.step <= f64::EPSILON * step.max(1.0) {
                return Err(LineSearchError::NonFinite);
            }
            continue;
        }
        if !armijo(&cur) || (!first && cur.value >= prev.value) {
            lo = prev;
            hi = cur;
            break;
        }
        if curvature(&cur) {
            if first && cur.slope < -0.1 * g0.abs() {
                let t = cubic_min(0.0, f0, g0, cur.step, cur.value, cur.slope, cur.step, 10.0 * cur.step);
                if t > cur.step {
                    let better = sample(t);
                    if better.value.is_finite() && better.value < cur.value && armijo(&better) && curvature(&better) {
                        return finish(better);
                    }
                }
            }
            return finish(cur);
        }
        if cur.slope >= 0.0 {
            lo = cur;
            hi = prev;
            break;
        }
        let next = cubic_min(prev.step, prev.value, prev.slope, cur.step, cur.value, cur.slope, cur.step * 1.1, cur.step * 10.0);
        prev = cur;
        step = next;
        first = false;
    }

    // zoom: `lo` satisfies Armijo and has the lowest value seen so far
    loop {
        if evaluations.get() >= MAX_TRIALS {
            return Err(LineSearchError::Stalled);
        }
        let (a, b) = (lo.step.min(hi.step), lo.step.max(hi.step));
        let width = b - a;
        if width <= f64::EPSILON * b.max(1.0) {
            return Err(LineSearchError::Stalled);
        }
        let t = cubic_min(lo.step, lo.value, lo.slope, hi.step, hi.value, hi.slope, a + 0.1 * width, b - 0.1 * width);
        let cur = sample(t);
        if !cur.value.is_finite() || !armijo(&cur) || cur.value >= lo.value {
            hi = cur;
            continue;
        }
        if curvature(&cur) {
            return finish(cur);
        }
        if cur.slope * (hi.step - lo.step) >= 0.0 {
            hi = lo;
        }
        lo = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_problems::Quadratic;
    use super::*;

    #[test]
    fn exact_on_one_dimensional_quadratic() {
        // f(β) = (β − 3)² = ½·2·(β − 3)²
        let f = Quadratic { target: vec![3.0], diag: vec![2.0] };
        let x = [0.0];
        let r = line_search(&f, &x, &f.evaluate(&x), &[1.0], 1.0, 1e-4, 0.9).unwrap();
        assert!((r.step - 3.0).abs() < 1e-12, "step {}", r.step);
        assert!(r.eval.value.abs() < 1e-20);
    }

    #[test]
    fn rejects_ascent_direction() {
        let f = Quadratic { target: vec![3.0], diag: vec![2.0] };
        let x = [0.0];
        assert!(matches!(
            line_search(&f, &x, &f.evaluate(&x), &[-1.0], 1.0, 1e-4, 0.9),
            Err(LineSearchError::NotDescent(_))
        ));
    }

    #[test]
    fn armijo_and_curvature_hold() {
        let f = Quadratic { target: vec![1.0, -2.0, 0.5], diag: vec![1.0, 30.0, 0.2] };
        for (x, init) in [([5.0, 5.0, 5.0], 1.0), ([0.0, 0.0, 0.0], 100.0), ([-3.0, 1.0, 2.0], 1e-6)] {
            let e = f.evaluate(&x);
            let d: Vec<f64> = e.gradient.iter().map(|g| -g).collect();
            let r = line_search(&f, &x, &e, &d, init, 1e-4, 0.9).unwrap();
            let g0 = dot(&e.gradient, &d);
            assert!(r.eval.value <= e.value + 1e-4 * r.step * g0);
            assert!(dot(&r.eval.gradient, &d).abs() <= 0.9 * -g0 + 1e-12);
        }
    }
}
