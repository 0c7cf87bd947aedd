use std::time::Instant;

use super::{axpy, check_start, dot, norm, SolverConfig, SolverError, SolverOutput, SolverTrace, StopReason, TraceEntry};
use crate::objectives::Objective;

#[derive(Debug, Clone, PartialEq)]
pub struct SteihaugResult {
    pub step: Vec<f64>,
    /// Whether the step was stopped by the trust-region boundary.
    pub on_boundary: bool,
    pub inner_iterations: usize,
}

/// Smallest `τ >= 0` with `‖s + τ d‖ = radius`.
fn to_boundary(s: &[f64], d: &[f64], radius: f64) -> f64 {
    let dd = dot(d, d);
    let sd = dot(s, d);
    let ss = dot(s, s);
    let disc = (sd * sd + dd * (radius * radius - ss)).max(0.0);
    if sd >= 0.0 {
        (radius * radius - ss).max(0.0) / (sd + disc.sqrt())
    } else {
        (disc.sqrt() - sd) / dd
    }
}

/// Truncated conjugate gradient for `min gᵀs + ½ sᵀHs` subject to
/// `‖s‖ <= radius`. Stops on the residual test
/// `‖r‖ <= 0.1 · min(1, ‖g‖^½) · ‖g‖`, on reaching the boundary, or on
/// non-positive curvature (which is followed to the boundary).
pub fn cg_steihaug(hv: impl Fn(&[f64]) -> Vec<f64>, gradient: &[f64], radius: f64) -> SteihaugResult {
    let n = gradient.len();
    let gnorm = norm(gradient);
    let tol = 0.1 * gnorm.sqrt().min(1.0) * gnorm;
    let mut s = vec![0.0; n];
    let mut r: Vec<f64> = gradient.iter().map(|g| -g).collect();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    if gnorm == 0.0 {
        return SteihaugResult { step: s, on_boundary: false, inner_iterations: 0 };
    }
    while iterations < 2 * n.max(1) + 10 {
        if rr.sqrt() <= tol {
            break;
        }
        iterations += 1;
        let hd = hv(&d);
        let curvature = dot(&d, &hd);
        if curvature <= 0.0 {
            let tau = to_boundary(&s, &d, radius);
            axpy(tau, &d, &mut s);
            return SteihaugResult { step: s, on_boundary: true, inner_iterations: iterations };
        }
        let alpha = rr / curvature;
        let mut next = s.clone();
        axpy(alpha, &d, &mut next);
        if norm(&next) >= radius {
            let tau = to_boundary(&s, &d, radius);
            axpy(tau, &d, &mut s);
            return SteihaugResult { step: s, on_boundary: true, inner_iterations: iterations };
        }
        s = next;
        axpy(-alpha, &hd, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = ri + beta * *di;
        }
    }
    SteihaugResult { step: s, on_boundary: false, inner_iterations: iterations }
}

/// Trust-region Newton method. Each outer iteration solves the Newton system
/// approximately with [`cg_steihaug`] inside radius `Δ` and accepts the step
/// when the actual-to-predicted reduction ratio exceeds `eta0`.
pub fn tron<O: Objective + ?Sized>(
    objective: &O,
    start: &[f64],
    config: &SolverConfig,
) -> Result<SolverOutput, SolverError> {
    check_start(objective, start, config)?;
    let clock = Instant::now();
    let mut x = start.to_vec();
    let mut eval = objective.evaluate(&x);
    let mut gnorm = norm(&eval.gradient);
    let threshold = config.tolerance * gnorm.max(1.0);
    let mut radius = gnorm;
    let mut trace = SolverTrace::default();
    trace.entries.push(TraceEntry {
        iteration: 0,
        objective: eval.value,
        grad_norm: gnorm,
        step: radius,
        accepted: true,
        cumulative_seconds: clock.elapsed().as_secs_f64(),
    });
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;
    if !eval.value.is_finite() || !gnorm.is_finite() {
        stop = StopReason::NonFinite;
    } else {
        while iterations < config.max_iterations {
            if gnorm <= threshold {
                stop = StopReason::GradientTolerance;
                break;
            }
            let inner = cg_steihaug(|v| objective.hessian_vec(&x, v), &eval.gradient, radius);
            let s = inner.step;
            let snorm = norm(&s);
            let hs = objective.hessian_vec(&x, &s);
            let predicted = -(dot(&eval.gradient, &s) + 0.5 * dot(&s, &hs));
            let trial: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
            let trial_eval = objective.evaluate(&trial);
            iterations += 1;
            if !trial_eval.value.is_finite() {
                stop = StopReason::NonFinite;
                break;
            }
            let actual = eval.value - trial_eval.value;
            let rho = if predicted > 0.0 { actual / predicted } else { f64::NEG_INFINITY };
            let accepted = rho > config.eta0;

            if rho < 0.25 {
                radius = config.sigma1 * snorm;
            } else if rho > 0.75 && inner.on_boundary {
                radius *= config.sigma3;
            }
            if accepted {
                x = trial;
                eval = trial_eval;
                gnorm = norm(&eval.gradient);
            }
            trace.entries.push(TraceEntry {
                iteration: iterations,
                objective: eval.value,
                grad_norm: gnorm,
                step: radius,
                accepted,
                cumulative_seconds: clock.elapsed().as_secs_f64(),
            });
            if !accepted && (radius <= 1e-14 * norm(&x).max(1.0) || predicted <= 1e-20 * eval.value.abs().max(1e-300)) {
                stop = if gnorm <= threshold { StopReason::GradientTolerance } else { StopReason::Stalled };
                break;
            }
        }
        if stop == StopReason::MaxIterations && gnorm <= threshold {
            stop = StopReason::GradientTolerance;
        }
    }
    Ok(SolverOutput { params: x, value: eval.value, grad_norm: gnorm, iterations, stop, trace })
}

#[cfg(test)]
mod tests {
    use super::super::test_problems::Quadratic;
    use super::super::SolverKind;
    use super::*;
    use crate::objectives::ObjectiveEval;

    #[test]
    fn steihaug_identity_interior_and_boundary() {
        let g = [3.0, -4.0];
        let r = cg_steihaug(|v| v.to_vec(), &g, 10.0);
        assert_eq!(r.step, vec![-3.0, 4.0]);
        assert!(!r.on_boundary);
        let r = cg_steihaug(|v| v.to_vec(), &g, 2.0);
        assert!(r.on_boundary);
        assert!((r.step[0] + 1.2).abs() < 1e-12 && (r.step[1] - 1.6).abs() < 1e-12);
    }

    #[test]
    fn steihaug_contract_on_indefinite_operators() {
        let diag = [2.0, -1.0, 0.5, 3.0];
        let g = [1.0, 0.3, -2.0, 0.7];
        for radius in [0.1, 1.0, 5.0, 100.0] {
            let hv = |v: &[f64]| v.iter().zip(&diag).map(|(a, d)| a * d).collect::<Vec<_>>();
            let r = cg_steihaug(hv, &g, radius);
            assert!(norm(&r.step) <= radius + 1e-12);
            let hs = hv(&r.step);
            let model = dot(&g, &r.step) + 0.5 * dot(&r.step, &hs);
            assert!(model <= 0.0);
        }
    }

    #[test]
    fn quadratic_in_one_step() {
        let f = Quadratic::identity(vec![2.0, -1.0, 0.5]);
        let out = tron(&f, &[0.0; 3], &SolverConfig::new(SolverKind::Tron).with_tolerance(1e-10)).unwrap();
        assert_eq!(out.stop, StopReason::GradientTolerance);
        assert_eq!(out.iterations, 1);
        assert!(out.trace.entries[1].accepted);
    }

    /// `x²` paired with a Hessian that underestimates curvature a hundredfold,
    /// so the quadratic model promises far more decrease than is realized.
    struct Underestimated;

    impl Objective for Underestimated {
        fn dim(&self) -> usize {
            1
        }

        fn evaluate(&self, x: &[f64]) -> ObjectiveEval {
            ObjectiveEval { value: x[0] * x[0], gradient: vec![2.0 * x[0]] }
        }

        fn hessian_vec(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
            vec![0.02 * v[0]]
        }
    }

    #[test]
    fn rejected_step_keeps_iterate_and_shrinks_radius() {
        let out = tron(&Underestimated, &[1.0], &SolverConfig::new(SolverKind::Tron)).unwrap();
        let entries = &out.trace.entries;
        assert!(!entries[1].accepted);
        assert_eq!(entries[1].objective, entries[0].objective);
        assert!(entries[1].step < entries[0].step);
        for w in entries.windows(2) {
            if !w[1].accepted {
                assert_eq!(w[1].objective, w[0].objective);
                assert!(w[1].step < w[0].step);
            }
        }
        assert!(out.trace.is_monotone());
        assert_eq!(out.stop, StopReason::GradientTolerance);
    }
}
