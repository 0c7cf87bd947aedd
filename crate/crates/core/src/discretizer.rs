//! Cut-point learning for quantitative attributes.
//!
//! Three methods are provided: equal-width and equal-frequency binning
//! (unsupervised, user-chosen bin count) and recursive entropy minimization
//! with the minimum-description-length stopping rule (supervised).
//!
//! A value `v` falls into interval `#{t : t <= v}`, so `m` thresholds give
//! `m + 1` intervals and a value equal to a threshold goes right.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Attribute, AttributeKind, DataError, Dataset, Schema, Value};

#[derive(Debug, Error)]
pub enum DiscretizeError {
    #[error("bin count must be at least 1")]
    ZeroBins,
    #[error("{method:?} needs a bin count")]
    MissingBins { method: Method },
    #[error("column has {values} values but {labels} labels")]
    LengthMismatch { values: usize, labels: usize },
    #[error("column is empty")]
    EmptyColumn,
    #[error("attribute `{0}` has missing values; impute first")]
    MissingValue(String),
    #[error("dataset schema does not match the schema the model was fit on: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

pub type Result<T> = std::result::Result<T, DiscretizeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ewd,
    Efd,
    Mdlp,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ewd" => Ok(Method::Ewd),
            "efd" => Ok(Method::Efd),
            "mdlp" | "emd" => Ok(Method::Mdlp),
            other => Err(format!("unknown discretization method `{other}` (expected ewd, efd or mdlp)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPoints {
    pub attribute: usize,
    pub name: String,
    pub method: Method,
    /// Strictly increasing.
    pub thresholds: Vec<f64>,
}

impl CutPoints {
    pub fn num_intervals(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn interval_of(&self, value: f64) -> usize {
        interval_index(&self.thresholds, value)
    }

    fn interval_labels(&self) -> Vec<String> {
        let t = &self.thresholds;
        if t.is_empty() {
            return vec!["all".to_string()];
        }
        let mut labels = Vec::with_capacity(t.len() + 1);
        labels.push(format!("(-inf,{:?})", t[0]));
        for w in t.windows(2) {
            labels.push(format!("[{:?},{:?})", w[0], w[1]));
        }
        labels.push(format!("[{:?},inf)", t[t.len() - 1]));
        labels
    }
}

/// Number of thresholds `<= value`.
pub fn interval_index(thresholds: &[f64], value: f64) -> usize {
    thresholds.partition_point(|&t| t <= value)
}

fn column_range(column: &[f64]) -> Result<(f64, f64)> {
    let first = *column.first().ok_or(DiscretizeError::EmptyColumn)?;
    Ok(column.iter().fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))))
}

fn dedup_increasing(mut t: Vec<f64>) -> Vec<f64> {
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Equal-width thresholds `min + j * (max - min) / k` for `j = 1..k`.
pub fn equal_width(column: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(DiscretizeError::ZeroBins);
    }
    let (lo, hi) = column_range(column)?;
    let width = (hi - lo) / k as f64;
    if width <= 0.0 {
        return Ok(Vec::new());
    }
    let cuts = (1..k).map(|j| lo + j as f64 * width).filter(|&t| t > lo && t <= hi).collect();
    Ok(dedup_increasing(cuts))
}

/// Equal-frequency thresholds. Cut targets sit at `round(j * N / k)` in the
/// sorted column; a target inside a run of identical values moves forward to
/// the end of that run, and the threshold is the midpoint of the two values
/// on either side of the cut.
pub fn equal_frequency(column: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(DiscretizeError::ZeroBins);
    }
    if column.is_empty() {
        return Err(DiscretizeError::EmptyColumn);
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut cuts = Vec::new();
    let mut last = 0;
    for j in 1..k {
        let target = (j * n + k / 2) / k;
        let mut p = target.max(last + 1);
        while p < n && sorted[p - 1] == sorted[p] {
            p += 1;
        }
        if p >= n {
            break;
        }
        cuts.push(0.5 * (sorted[p - 1] + sorted[p]));
        last = p;
    }
    Ok(dedup_increasing(cuts))
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn distinct_classes(counts: &[usize]) -> usize {
    counts.iter().filter(|&&c| c > 0).count()
}

/// Outcome of evaluating the best binary split of one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDecision {
    /// Position in the sorted segment: the left part is `[0, position)`.
    pub position: usize,
    pub threshold: f64,
    pub gain: f64,
    /// Minimum gain the split must exceed to be accepted.
    pub mdl_bound: f64,
    pub accepted: bool,
}

/// Finds the information-gain maximizing cut of a sorted `(value, label)`
/// segment among class-boundary midpoints and evaluates the MDL acceptance
/// test. `None` when no candidate cut exists.
pub fn best_split(segment: &[(f64, usize)], num_classes: usize) -> Option<SplitDecision> {
    let n = segment.len();
    if n < 2 {
        return None;
    }
    let mut total = vec![0usize; num_classes];
    for &(_, y) in segment {
        total[y] += 1;
    }
    let ent = entropy(&total, n);

    // Runs of identical values with their class counts.
    let mut runs: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start;
        let mut counts = vec![0usize; num_classes];
        while end < n && segment[end].0 == segment[start].0 {
            counts[segment[end].1] += 1;
            end += 1;
        }
        runs.push((start, end, counts));
        start = end;
    }
    if runs.len() < 2 {
        return None;
    }

    let mut left = vec![0usize; num_classes];
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    for w in runs.windows(2) {
        let (_, end, counts) = &w[0];
        for (l, c) in left.iter_mut().zip(counts) {
            *l += c;
        }
        // Skip cuts between two runs that share a single common class.
        let (_, _, next) = &w[1];
        let pure_same = distinct_classes(counts) == 1
            && distinct_classes(next) == 1
            && counts.iter().zip(next).all(|(a, b)| (*a > 0) == (*b > 0));
        if pure_same {
            continue;
        }
        let nl = *end;
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let weighted = (nl as f64 * entropy(&left, nl) + (n - nl) as f64 * entropy(&right, n - nl)) / n as f64;
        if best.as_ref().is_none_or(|(_, e, _)| weighted < *e) {
            best = Some((nl, weighted, left.clone()));
        }
    }
    let (position, weighted, left) = best?;
    let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
    let gain = ent - weighted;
    let (k, k1, k2) = (
        distinct_classes(&total) as f64,
        distinct_classes(&left) as f64,
        distinct_classes(&right) as f64,
    );
    let delta = (3f64.powf(k) - 2.0).log2()
        - (k * ent - k1 * entropy(&left, position) - k2 * entropy(&right, n - position));
    let mdl_bound = (((n - 1) as f64).log2() + delta) / n as f64;
    Some(SplitDecision {
        position,
        threshold: 0.5 * (segment[position - 1].0 + segment[position].0),
        gain,
        mdl_bound,
        accepted: gain > mdl_bound,
    })
}

/// Recursive entropy-minimizing binary splitting with the MDL stopping rule.
pub fn mdlp(column: &[f64], labels: &[usize]) -> Result<Vec<f64>> {
    if column.len() != labels.len() {
        return Err(DiscretizeError::LengthMismatch { values: column.len(), labels: labels.len() });
    }
    if column.is_empty() {
        return Err(DiscretizeError::EmptyColumn);
    }
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut pairs: Vec<(f64, usize)> = column.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut cuts = Vec::new();
    let mut stack = vec![(0, pairs.len())];
    while let Some((lo, hi)) = stack.pop() {
        let segment = &pairs[lo..hi];
        if let Some(split) = best_split(segment, num_classes) {
            if split.accepted {
                cuts.push(split.threshold);
                stack.push((lo, lo + split.position));
                stack.push((lo + split.position, hi));
            }
        }
    }
    Ok(dedup_increasing(cuts))
}

/// Cut points for every quantitative attribute of the schema a model was fit on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationModel {
    pub method: Method,
    pub bins: Option<usize>,
    pub cuts: Vec<CutPoints>,
    fit_attributes: Vec<Attribute>,
}

impl DiscretizationModel {
    /// Fits cut points on every quantitative attribute of `train`. Labels
    /// are read only by [`Method::Mdlp`].
    pub fn fit(train: &Dataset, method: Method, bins: Option<usize>) -> Result<Self> {
        let schema = train.schema();
        let k = match method {
            Method::Mdlp => None,
            _ => Some(bins.ok_or(DiscretizeError::MissingBins { method })?),
        };
        let mut cuts = Vec::new();
        for (a, attr) in schema.attributes.iter().enumerate() {
            if attr.kind.is_qualitative() {
                continue;
            }
            let column: Vec<f64> = train
                .column(a)
                .map(|v| v.as_real().ok_or_else(|| DiscretizeError::MissingValue(attr.name.clone())))
                .collect::<Result<_>>()?;
            let thresholds = match (method, k) {
                (Method::Ewd, Some(k)) => equal_width(&column, k)?,
                (Method::Efd, Some(k)) => equal_frequency(&column, k)?,
                _ => mdlp(&column, train.labels())?,
            };
            cuts.push(CutPoints { attribute: a, name: attr.name.clone(), method, thresholds });
        }
        Ok(DiscretizationModel { method, bins: k, cuts, fit_attributes: schema.attributes.clone() })
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Interval count per transformed attribute, in attribute order.
    pub fn cardinalities(&self) -> Vec<usize> {
        self.cuts.iter().map(CutPoints::num_intervals).collect()
    }

    /// Turns every fitted quantitative attribute into a qualitative one whose
    /// categories are the intervals; qualitative attributes pass through.
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        let schema = data.schema();
        if schema.attributes.len() != self.fit_attributes.len() {
            return Err(DiscretizeError::SchemaMismatch(format!(
                "{} attributes, model expects {}",
                schema.attributes.len(),
                self.fit_attributes.len()
            )));
        }
        for (got, want) in schema.attributes.iter().zip(&self.fit_attributes) {
            let kinds_match = got.kind.is_qualitative() == want.kind.is_qualitative();
            if got.name != want.name || !kinds_match {
                return Err(DiscretizeError::SchemaMismatch(format!(
                    "attribute `{}` does not match `{}`",
                    got.name, want.name
                )));
            }
        }
        let mut by_attr: Vec<Option<&CutPoints>> = vec![None; schema.attributes.len()];
        for c in &self.cuts {
            by_attr[c.attribute] = Some(c);
        }
        let attributes = schema
            .attributes
            .iter()
            .zip(&by_attr)
            .map(|(attr, cut)| match cut {
                Some(c) => Attribute {
                    name: attr.name.clone(),
                    kind: AttributeKind::Qualitative { values: c.interval_labels() },
                },
                None => attr.clone(),
            })
            .collect();
        let rows = data
            .rows()
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&by_attr)
                    .map(|(cell, cut)| match (cell, cut) {
                        (Value::Real(v), Some(c)) => Value::Category(c.interval_of(*v)),
                        (other, _) => *other,
                    })
                    .collect()
            })
            .collect();
        let schema = Schema::new(
            schema.relation.clone(),
            attributes,
            schema.class_name.clone(),
            schema.class_labels.clone(),
        )?;
        Ok(Dataset::new(schema, rows, data.labels().to_vec())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ewd_examples() {
        let col: Vec<f64> = (0..=10).map(f64::from).collect();
        assert_eq!(equal_width(&col, 5).unwrap(), vec![2.0, 4.0, 6.0, 8.0]);
        assert!(equal_width(&col, 1).unwrap().is_empty());
        assert!(equal_width(&[3.0, 3.0, 3.0], 4).unwrap().is_empty());
        assert!(matches!(equal_width(&col, 0), Err(DiscretizeError::ZeroBins)));
    }

    #[test]
    fn efd_examples() {
        let col: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(equal_frequency(&col, 2).unwrap(), vec![5.5]);
        assert_eq!(equal_frequency(&[1.0, 1.0, 1.0, 1.0, 2.0, 2.0], 2).unwrap(), vec![1.5]);
        let cuts = equal_frequency(&[1.0, 2.0, 2.0, 3.0], 10).unwrap();
        assert!(cuts.len() <= 2);
        assert!(matches!(equal_frequency(&col, 0), Err(DiscretizeError::ZeroBins)));
    }

    #[test]
    fn mdlp_two_pure_groups() {
        let col = [1.0, 2.0, 3.0, 7.0, 8.0, 9.0];
        let labels = [0, 0, 0, 1, 1, 1];
        assert_eq!(mdlp(&col, &labels).unwrap(), vec![5.0]);
        let mut pairs: Vec<_> = col.iter().copied().zip(labels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let split = best_split(&pairs, 2).unwrap();
        assert!((split.gain - 1.0).abs() < 1e-12);
        // (log2 5 + log2 7 - 2) / 6
        assert!((split.mdl_bound - 0.521_547_169_490_827_7).abs() < 1e-12);
    }

    #[test]
    fn mdlp_degenerate() {
        assert!(mdlp(&[1.0, 5.0, 2.0, 9.0], &[1, 1, 1, 1]).unwrap().is_empty());
        assert!(mdlp(&[4.0, 4.0, 4.0, 4.0], &[0, 1, 0, 1]).unwrap().is_empty());
        assert!(matches!(mdlp(&[1.0], &[0, 1]), Err(DiscretizeError::LengthMismatch { .. })));
    }

    #[test]
    fn interval_mapping() {
        assert_eq!(interval_index(&[2.0, 4.0], 3.0), 1);
        assert_eq!(interval_index(&[2.0, 4.0], 2.0), 1);
        assert_eq!(interval_index(&[2.0, 4.0], 4.0), 2);
        assert_eq!(interval_index(&[2.0, 4.0], 1.9), 0);
        assert_eq!(interval_index(&[], 1e9), 0);
    }

    fn two_column() -> Dataset {
        let schema = Schema::new(
            "r",
            vec![
                Attribute::quantitative("a"),
                Attribute::qualitative("q", ["u", "v"]),
                Attribute::quantitative("b"),
            ],
            "y",
            vec!["n".into(), "p".into()],
        )
        .unwrap();
        let rows = (0..12)
            .map(|i| {
                vec![
                    Value::Real(i as f64),
                    Value::Category(i % 2),
                    Value::Real((i * 7 % 12) as f64),
                ]
            })
            .collect();
        Dataset::new(schema, rows, (0..12).map(|i| usize::from(i >= 6)).collect()).unwrap()
    }

    #[test]
    fn model_fit_and_apply() {
        let d = two_column();
        let m = DiscretizationModel::fit(&d, Method::Efd, Some(3)).unwrap();
        assert_eq!(m.cuts.len(), 2);
        assert_eq!(m.cardinalities(), vec![3, 3]);
        let t = m.apply(&d).unwrap();
        assert_eq!(t.schema().num_quantitative(), 0);
        assert_eq!(t.schema().attributes[1], d.schema().attributes[1]);
        assert_eq!(t.rows()[0][0], Value::Category(0));
        assert_eq!(t.rows()[11][0], Value::Category(2));

        // already qualitative: empty model, identity transform
        let again = DiscretizationModel::fit(&t, Method::Mdlp, None).unwrap();
        assert!(again.is_empty());
        assert_eq!(again.apply(&t).unwrap(), t);

        // schema mismatch
        assert!(matches!(m.apply(&t), Err(DiscretizeError::SchemaMismatch(_))));
        assert!(matches!(
            DiscretizationModel::fit(&d, Method::Ewd, None),
            Err(DiscretizeError::MissingBins { .. })
        ));
    }

    #[test]
    fn model_mdlp_uses_labels() {
        let d = two_column();
        let m = DiscretizationModel::fit(&d, Method::Mdlp, None).unwrap();
        assert_eq!(m.cuts[0].thresholds, vec![5.5]);
        let t = m.apply(&d).unwrap();
        assert_eq!(t.schema().attributes[0].kind.cardinality(), Some(2));
    }

    #[test]
    fn empty_cut_list_gives_single_category() {
        let cp = CutPoints { attribute: 0, name: "x".into(), method: Method::Ewd, thresholds: vec![] };
        assert_eq!(cp.num_intervals(), 1);
        assert_eq!(cp.interval_labels().len(), 1);
    }

    #[test]
    fn model_json_round_trip() {
        let m = DiscretizationModel::fit(&two_column(), Method::Ewd, Some(4)).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"method\":\"ewd\""));
        let back: DiscretizationModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    fn max_run(sorted: &[f64]) -> usize {
        sorted.chunk_by(|a, b| a == b).map(<[f64]>::len).max().unwrap_or(0)
    }

    proptest! {
        #[test]
        fn thresholds_strictly_increasing(col in prop::collection::vec(-50i32..50, 1..80), k in 1usize..8) {
            let col: Vec<f64> = col.into_iter().map(f64::from).collect();
            for cuts in [equal_width(&col, k).unwrap(), equal_frequency(&col, k).unwrap()] {
                prop_assert!(cuts.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(cuts.len() < k.max(1));
                let used: std::collections::BTreeSet<usize> =
                    col.iter().map(|&v| interval_index(&cuts, v)).collect();
                prop_assert!(used.iter().all(|&i| i <= cuts.len()));
            }
        }

        #[test]
        fn efd_bins_balanced_without_ties(n in 1usize..200, k in 1usize..12) {
            // distinct values in scrambled order (7919 and 10007 are prime)
            let col: Vec<f64> = (0..n).map(|i| (i * 7919 % 10_007) as f64).collect();
            let cuts = equal_frequency(&col, k).unwrap();
            let mut sizes = vec![0usize; cuts.len() + 1];
            for &v in &col { sizes[interval_index(&cuts, v)] += 1; }
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "sizes {:?}", sizes);
        }

        #[test]
        fn efd_bins_balanced_with_ties(col in prop::collection::vec(0i32..15, 2..120), k in 2usize..6) {
            let mut col: Vec<f64> = col.into_iter().map(f64::from).collect();
            let cuts = equal_frequency(&col, k).unwrap();
            col.sort_by(f64::total_cmp);
            let run = max_run(&col);
            let mut sizes = vec![0usize; cuts.len() + 1];
            for &v in &col { sizes[interval_index(&cuts, v)] += 1; }
            // no cut ever separates equal values
            for w in col.windows(2) {
                if w[0] == w[1] {
                    prop_assert_eq!(interval_index(&cuts, w[0]), interval_index(&cuts, w[1]));
                }
            }
            let target = col.len().div_ceil(k);
            prop_assert!(sizes.iter().all(|&s| s <= target + 2 * run), "sizes {:?} run {}", sizes, run);
        }

        #[test]
        fn mdlp_invariant_under_monotone_transform(
            col in prop::collection::vec(0i32..20, 2..60),
            labels_seed in prop::collection::vec(0usize..3, 60),
        ) {
            let col: Vec<f64> = col.into_iter().map(f64::from).collect();
            let labels: Vec<usize> = labels_seed[..col.len()].to_vec();
            let warped: Vec<f64> = col.iter().map(|v| (v / 4.0).exp() + 3.0 * v).collect();
            let a = mdlp(&col, &labels).unwrap();
            let b = mdlp(&warped, &labels).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, w) in col.iter().zip(&warped) {
                prop_assert_eq!(interval_index(&a, *x), interval_index(&b, *w));
            }
        }
    }
}
