use serde::{Deserialize, Serialize};

use super::EvaluationReport;

fn ln_choose(n: u64, k: u64) -> f64 {
    // Σ ln(i) differences; n stays in the hundreds for W-D-L tables
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Two-tailed binomial sign test on `wins` against `losses` (draws excluded).
pub fn sign_test(wins: u64, losses: u64) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let k = wins.min(losses);
    if 2 * k + 1 >= n {
        // the tail holds at least half the mass
        return 1.0;
    }
    let half_n = n as f64 * std::f64::consts::LN_2;
    let tail: f64 = (0..=k).map(|j| (ln_choose(n, j) - half_n).exp()).sum();
    (2.0 * tail).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WdlRecord {
    pub wins: u64,
    pub draws: u64,
    pub losses: u64,
    pub p_value: f64,
}

/// Win/draw/loss of `a` against `b` where lower is better; differences
/// within `tie_tol` are draws.
pub fn wdl_compare(a: &[f64], b: &[f64], tie_tol: f64) -> WdlRecord {
    assert_eq!(a.len(), b.len());
    let (mut wins, mut draws, mut losses) = (0, 0, 0);
    for (&x, &y) in a.iter().zip(b) {
        if (x - y).abs() <= tie_tol {
            draws += 1;
        } else if x < y {
            wins += 1;
        } else {
            losses += 1;
        }
    }
    WdlRecord { wins, draws, losses, p_value: sign_test(wins, losses) }
}

type Metric = fn(&EvaluationReport) -> Option<f64>;

/// One W-D-L row per metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WdlTable {
    pub a: String,
    pub b: String,
    pub tie_tol: f64,
    pub rows: Vec<(String, WdlRecord)>,
}

/// Compares two classifiers over the same list of datasets (one report per
/// dataset on each side) on 0-1 loss, RMSE and, when every report carries
/// it, bias and variance.
pub fn compare_reports(a: &[EvaluationReport], b: &[EvaluationReport], tie_tol: f64) -> WdlTable {
    assert_eq!(a.len(), b.len());
    let metric = |reports: &[EvaluationReport], f: Metric| reports.iter().map(f).collect::<Option<Vec<f64>>>();
    let extractors: [(&str, Metric); 4] = [
        ("0-1 loss", |r| Some(r.mean.zero_one)),
        ("rmse", |r| Some(r.mean.rmse)),
        ("bias", |r| r.bias_variance.as_ref().map(|bv| bv.bias)),
        ("variance", |r| r.bias_variance.as_ref().map(|bv| bv.variance)),
    ];
    let mut rows = Vec::new();
    for (name, f) in extractors {
        if let (Some(xa), Some(xb)) = (metric(a, f), metric(b, f)) {
            rows.push((name.to_string(), wdl_compare(&xa, &xb, tie_tol)));
        }
    }
    let label = |r: &[EvaluationReport]| r.first().map(|r| describe(&r.spec)).unwrap_or_default();
    WdlTable { a: label(a), b: label(b), tie_tol, rows }
}

fn describe(spec: &super::ExperimentSpec) -> String {
    let name = serde_json::to_value(spec.classifier).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    if spec.discretize {
        format!("{name}(d)")
    } else {
        name
    }
}
