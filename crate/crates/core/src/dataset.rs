//! Tabular datasets with mixed qualitative and quantitative attributes.
//!
//! Qualitative cells are stored as indices into the attribute's declared value
//! list, quantitative cells as reals. A dedicated [`Value::Missing`] marker
//! carries `?` (ARFF) or empty (CSV) cells until [`Imputer`] replaces it.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Category label appended to a qualitative attribute to stand for missing values.
pub const MISSING_CATEGORY: &str = "⟂";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("attribute `{0}` has no observed values; its mean is undefined")]
    AllMissing(String),
    #[error("dataset is empty")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DataError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttributeKind {
    Qualitative { values: Vec<String> },
    Quantitative,
}

impl AttributeKind {
    pub fn is_qualitative(&self) -> bool {
        matches!(self, AttributeKind::Qualitative { .. })
    }

    /// Number of categories, or `None` for quantitative attributes.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            AttributeKind::Qualitative { values } => Some(values.len()),
            AttributeKind::Quantitative => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn quantitative(name: impl Into<String>) -> Self {
        Attribute { name: name.into(), kind: AttributeKind::Quantitative }
    }

    pub fn qualitative<S: Into<String>>(
        name: impl Into<String>,
        values: impl IntoIterator<Item = S>,
    ) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Qualitative { values: values.into_iter().map(Into::into).collect() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub relation: String,
    pub attributes: Vec<Attribute>,
    pub class_name: String,
    pub class_labels: Vec<String>,
}

impl Schema {
    /// Builds a schema and checks its invariants: at least two duplicate-free
    /// class labels, non-empty duplicate-free category lists.
    pub fn new(
        relation: impl Into<String>,
        attributes: Vec<Attribute>,
        class_name: impl Into<String>,
        class_labels: Vec<String>,
    ) -> Result<Self> {
        let schema = Schema {
            relation: relation.into(),
            attributes,
            class_name: class_name.into(),
            class_labels,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_labels.len() < 2 {
            return Err(DataError::Schema(format!(
                "class `{}` needs at least two labels",
                self.class_name
            )));
        }
        check_distinct(&self.class_name, &self.class_labels)?;
        for attr in &self.attributes {
            if let AttributeKind::Qualitative { values } = &attr.kind {
                if values.is_empty() {
                    return Err(DataError::Schema(format!("attribute `{}` has no values", attr.name)));
                }
                check_distinct(&attr.name, values)?;
            }
        }
        Ok(())
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn num_qualitative(&self) -> usize {
        self.attributes.iter().filter(|a| a.kind.is_qualitative()).count()
    }

    pub fn num_quantitative(&self) -> usize {
        self.num_attributes() - self.num_qualitative()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }
}

fn check_distinct(owner: &str, values: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for v in values {
        if !seen.insert(v.as_str()) {
            return Err(DataError::Schema(format!("`{owner}` declares `{v}` twice")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Category(usize),
    Real(f64),
    Missing,
}

impl Value {
    pub fn is_missing(self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_real(self) -> Option<f64> {
        match self {
            Value::Real(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_category(self) -> Option<usize> {
        match self {
            Value::Category(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<Vec<Value>>,
    labels: Vec<usize>,
}

impl Dataset {
    /// Validates row arity, value kinds, and label range against `schema`.
    pub fn new(schema: Schema, rows: Vec<Vec<Value>>, labels: Vec<usize>) -> Result<Self> {
        schema.validate()?;
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        if rows.len() != labels.len() {
            return Err(DataError::Schema(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.num_attributes() {
                return Err(DataError::Schema(format!(
                    "row {r} has {} cells, expected {}",
                    row.len(),
                    schema.num_attributes()
                )));
            }
            for (value, attr) in row.iter().zip(&schema.attributes) {
                let ok = match (&attr.kind, value) {
                    (_, Value::Missing) => true,
                    (AttributeKind::Qualitative { values }, Value::Category(c)) => *c < values.len(),
                    (AttributeKind::Quantitative, Value::Real(v)) => v.is_finite(),
                    _ => false,
                };
                if !ok {
                    return Err(DataError::Schema(format!(
                        "row {r}: invalid value {value:?} for attribute `{}`",
                        attr.name
                    )));
                }
            }
            if labels[r] >= schema.num_classes() {
                return Err(DataError::Schema(format!("row {r}: label {} out of range", labels[r])));
            }
        }
        Ok(Dataset { schema, rows, labels })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.schema.num_classes()
    }

    pub fn column(&self, attr: usize) -> impl Iterator<Item = Value> + '_ {
        self.rows.iter().map(move |r| r[attr])
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().flatten().any(|v| v.is_missing())
    }

    /// Indices of qualitative attributes with at least one missing cell.
    pub fn qualitative_with_missing(&self) -> Vec<usize> {
        (0..self.schema.num_attributes())
            .filter(|&a| {
                self.schema.attributes[a].kind.is_qualitative()
                    && self.column(a).any(Value::is_missing)
            })
            .collect()
    }

    /// Rows at `indices`, in that order, sharing this dataset's schema.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Serializes to the ARFF subset accepted by [`parse_arff`].
    pub fn to_arff(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "@relation {}", quote_arff(&self.schema.relation));
        out.push('\n');
        for attr in &self.schema.attributes {
            match &attr.kind {
                AttributeKind::Quantitative => {
                    let _ = writeln!(out, "@attribute {} numeric", quote_arff(&attr.name));
                }
                AttributeKind::Qualitative { values } => {
                    let _ = writeln!(
                        out,
                        "@attribute {} {{{}}}",
                        quote_arff(&attr.name),
                        values.iter().map(|v| quote_arff(v)).collect::<Vec<_>>().join(",")
                    );
                }
            }
        }
        let _ = writeln!(
            out,
            "@attribute {} {{{}}}",
            quote_arff(&self.schema.class_name),
            self.schema.class_labels.iter().map(|v| quote_arff(v)).collect::<Vec<_>>().join(",")
        );
        out.push_str("\n@data\n");
        for (row, &y) in self.rows.iter().zip(&self.labels) {
            for (value, attr) in row.iter().zip(&self.schema.attributes) {
                match (value, &attr.kind) {
                    (Value::Missing, _) => out.push('?'),
                    (Value::Real(v), _) => {
                        let _ = write!(out, "{v:?}");
                    }
                    (Value::Category(c), AttributeKind::Qualitative { values }) => {
                        out.push_str(&quote_arff(&values[*c]))
                    }
                    (Value::Category(c), AttributeKind::Quantitative) => {
                        let _ = write!(out, "{c}");
                    }
                }
                out.push(',');
            }
            out.push_str(&quote_arff(&self.schema.class_labels[y]));
            out.push('\n');
        }
        out
    }
}

fn quote_arff(s: &str) -> String {
    let plain = !s.is_empty()
        && s != "?"
        && !s.chars().any(|c| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '\'' | '"' | '%' | '\\'));
    if plain {
        s.to_string()
    } else {
        let mut q = String::with_capacity(s.len() + 2);
        q.push('\'');
        for c in s.chars() {
            if c == '\'' || c == '\\' {
                q.push('\\');
            }
            q.push(c);
        }
        q.push('\'');
        q
    }
}

/// Splits an ARFF line into tokens on commas, honouring single and double quotes.
/// Returned tokens are trimmed and unquoted; the flag reports whether the
/// token was quoted (a quoted `?` is a literal, not a missing marker).
fn split_arff_list(line: &str, lineno: usize) -> Result<Vec<(String, bool)>> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    loop {
        while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
            chars.next();
        }
        match chars.peek().copied() {
            Some(q @ ('\'' | '"')) => {
                chars.next();
                quoted = true;
                let mut closed = false;
                while let Some(c) = chars.next() {
                    if c == '\\' {
                        if let Some(n) = chars.next() {
                            cur.push(n);
                        }
                    } else if c == q {
                        closed = true;
                        break;
                    } else {
                        cur.push(c);
                    }
                }
                if !closed {
                    return Err(DataError::Parse { line: lineno, msg: "unterminated quote".into() });
                }
                while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
                    chars.next();
                }
            }
            _ => {
                while let Some(&c) = chars.peek() {
                    if c == ',' {
                        break;
                    }
                    cur.push(c);
                    chars.next();
                }
                let trimmed = cur.trim_end().len();
                cur.truncate(trimmed);
            }
        }
        match chars.next() {
            None => {
                tokens.push((std::mem::take(&mut cur), quoted));
                return Ok(tokens);
            }
            Some(',') => {
                tokens.push((std::mem::take(&mut cur), quoted));
                quoted = false;
            }
            Some(c) => {
                return Err(DataError::Parse {
                    line: lineno,
                    msg: format!("unexpected `{c}` after quoted value"),
                })
            }
        }
    }
}

/// Reads one (possibly quoted) name token off the front of `s`.
fn take_name(s: &str, lineno: usize) -> Result<(String, &str)> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    match chars.next() {
        Some((_, q @ ('\'' | '"'))) => {
            let mut name = String::new();
            let mut escaped = false;
            for (i, c) in chars {
                if escaped {
                    name.push(c);
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    return Ok((name, &s[i + c.len_utf8()..]));
                } else {
                    name.push(c);
                }
            }
            Err(DataError::Parse { line: lineno, msg: "unterminated quoted name".into() })
        }
        Some(_) => {
            let end = s.find(|c: char| c.is_whitespace() || c == '{').unwrap_or(s.len());
            Ok((s[..end].to_string(), &s[end..]))
        }
        None => Err(DataError::Parse { line: lineno, msg: "missing name".into() }),
    }
}

enum DeclaredType {
    Numeric,
    Nominal(Vec<String>),
}

/// Parses the ARFF subset: `@relation`, `numeric`/`real`/`integer` and nominal
/// `{a,b,c}` attributes, `?` for missing cells, `%` comments. The last
/// attribute must be nominal and is taken as the class.
pub fn parse_arff(text: &str) -> Result<Dataset> {
    let mut relation = None;
    let mut declared: Vec<(String, DeclaredType, usize)> = Vec::new();
    let mut data_start = None;
    let lines: Vec<&str> = text.lines().collect();

    for (i, raw) in lines.iter().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            let (name, _) = take_name(&line["@relation".len()..], lineno)?;
            relation = Some(name);
        } else if lower.starts_with("@attribute") {
            let (name, rest) = take_name(&line["@attribute".len()..], lineno)?;
            let rest = rest.trim();
            let ty = if rest.starts_with('{') {
                let close = rest.rfind('}').ok_or_else(|| DataError::Parse {
                    line: lineno,
                    msg: "nominal specification missing `}`".into(),
                })?;
                let values: Vec<String> = split_arff_list(&rest[1..close], lineno)?
                    .into_iter()
                    .map(|(v, _)| v)
                    .collect();
                if values.iter().any(String::is_empty) {
                    return Err(DataError::Parse { line: lineno, msg: "empty nominal value".into() });
                }
                DeclaredType::Nominal(values)
            } else {
                match rest.to_ascii_lowercase().as_str() {
                    "numeric" | "real" | "integer" => DeclaredType::Numeric,
                    other => {
                        return Err(DataError::Parse {
                            line: lineno,
                            msg: format!("unsupported attribute type `{other}`"),
                        })
                    }
                }
            };
            declared.push((name, ty, lineno));
        } else if lower.starts_with("@data") {
            data_start = Some(i + 1);
            break;
        } else {
            return Err(DataError::Parse { line: lineno, msg: format!("unexpected header line `{line}`") });
        }
    }

    let relation =
        relation.ok_or_else(|| DataError::Parse { line: 1, msg: "missing @relation".into() })?;
    let data_start = data_start
        .ok_or_else(|| DataError::Parse { line: lines.len().max(1), msg: "missing @data".into() })?;
    let (class_name, class_ty, class_line) = declared
        .pop()
        .ok_or_else(|| DataError::Parse { line: data_start, msg: "no attributes declared".into() })?;
    let class_labels = match class_ty {
        DeclaredType::Nominal(v) => v,
        DeclaredType::Numeric => {
            return Err(DataError::Parse {
                line: class_line,
                msg: format!("class attribute `{class_name}` must be nominal"),
            })
        }
    };
    let attributes: Vec<Attribute> = declared
        .into_iter()
        .map(|(name, ty, _)| match ty {
            DeclaredType::Numeric => Attribute::quantitative(name),
            DeclaredType::Nominal(values) => Attribute::qualitative(name, values),
        })
        .collect();
    let schema = Schema::new(relation, attributes, class_name, class_labels)
        .map_err(|e| DataError::Parse { line: class_line, msg: e.to_string() })?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, raw) in lines.iter().enumerate().skip(data_start) {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if line.starts_with('{') {
            return Err(DataError::Parse { line: lineno, msg: "sparse ARFF rows are not supported".into() });
        }
        let cells = split_arff_list(line, lineno)?;
        let (row, label) = parse_cells(&schema, cells, lineno)?;
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(DataError::Parse { line: lines.len().max(1), msg: "no data rows".into() });
    }
    Dataset::new(schema, rows, labels)
}

fn parse_cells(
    schema: &Schema,
    cells: Vec<(String, bool)>,
    lineno: usize,
) -> Result<(Vec<Value>, usize)> {
    let expected = schema.num_attributes() + 1;
    if cells.len() != expected {
        return Err(DataError::Parse {
            line: lineno,
            msg: format!("expected {expected} values, found {}", cells.len()),
        });
    }
    let mut row = Vec::with_capacity(schema.num_attributes());
    for ((cell, quoted), attr) in cells.iter().zip(&schema.attributes) {
        row.push(parse_cell(cell, *quoted, attr, lineno)?);
    }
    let (class_cell, _) = &cells[expected - 1];
    let label = schema.class_labels.iter().position(|l| l == class_cell).ok_or_else(|| {
        DataError::Parse { line: lineno, msg: format!("unknown class label `{class_cell}`") }
    })?;
    Ok((row, label))
}

fn parse_cell(cell: &str, quoted: bool, attr: &Attribute, lineno: usize) -> Result<Value> {
    if !quoted && (cell == "?" || cell.is_empty()) {
        return Ok(Value::Missing);
    }
    match &attr.kind {
        AttributeKind::Quantitative => match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Value::Real(v)),
            _ => Err(DataError::Parse {
                line: lineno,
                msg: format!("`{cell}` is not a number (attribute `{}`)", attr.name),
            }),
        },
        AttributeKind::Qualitative { values } => {
            values.iter().position(|v| v == cell).map(Value::Category).ok_or_else(|| {
                DataError::Parse {
                    line: lineno,
                    msg: format!("`{cell}` is not a declared value of `{}`", attr.name),
                }
            })
        }
    }
}

/// Parses comma-separated text whose header names the schema's attributes
/// followed by the class column. Empty cells and `?` are missing.
pub fn parse_csv(text: &str, schema: &Schema) -> Result<Dataset> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let expected: Vec<&str> = schema
        .attributes
        .iter()
        .map(|a| a.name.as_str())
        .chain(std::iter::once(schema.class_name.as_str()))
        .collect();
    if header.iter().ne(expected.iter().copied()) {
        return Err(DataError::Parse {
            line: 1,
            msg: format!("header {:?} does not match schema {:?}", header.iter().collect::<Vec<_>>(), expected),
        });
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let lineno = record.position().map_or(0, |p| p.line() as usize);
        let cells = record.iter().map(|c| (c.to_string(), false)).collect();
        let (row, label) = parse_cells(schema, cells, lineno)?;
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    Dataset::new(schema.clone(), rows, labels)
}

/// Missing-value replacement learned from a training partition: quantitative
/// cells take the attribute mean, qualitative cells an appended
/// [`MISSING_CATEGORY`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    means: Vec<Option<f64>>,
    reserved: Vec<bool>,
}

impl Imputer {
    pub fn fit(train: &Dataset) -> Result<Self> {
        let schema = train.schema();
        let mut means = Vec::with_capacity(schema.num_attributes());
        let mut reserved = Vec::with_capacity(schema.num_attributes());
        for (a, attr) in schema.attributes.iter().enumerate() {
            match attr.kind {
                AttributeKind::Quantitative => {
                    let (sum, n) = train
                        .column(a)
                        .filter_map(Value::as_real)
                        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                    if n == 0 {
                        return Err(DataError::AllMissing(attr.name.clone()));
                    }
                    means.push(Some(sum / n as f64));
                    reserved.push(false);
                }
                AttributeKind::Qualitative { .. } => {
                    means.push(None);
                    reserved.push(train.column(a).any(Value::is_missing));
                }
            }
        }
        Ok(Imputer { means, reserved })
    }

    /// Also reserve the missing category for qualitative attribute `attr`, so
    /// that partitions which see missing cells the training part did not still
    /// share one schema.
    pub fn reserve_missing_category(&mut self, attr: usize) {
        if self.means.get(attr).is_some_and(Option::is_none) {
            self.reserved[attr] = true;
        }
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        let mut schema = data.schema().clone();
        if schema.num_attributes() != self.means.len() {
            return Err(DataError::Schema("imputer was fit on a different schema".into()));
        }
        let mut extra = vec![None; schema.num_attributes()];
        for (a, attr) in schema.attributes.iter_mut().enumerate() {
            if let AttributeKind::Qualitative { values } = &mut attr.kind {
                if self.reserved[a] {
                    extra[a] = Some(values.len());
                    values.push(MISSING_CATEGORY.to_string());
                }
            }
        }
        let mut rows = data.rows().to_vec();
        for row in &mut rows {
            for (a, cell) in row.iter_mut().enumerate() {
                if cell.is_missing() {
                    *cell = match (self.means[a], extra[a]) {
                        (Some(mean), _) => Value::Real(mean),
                        (None, Some(idx)) => Value::Category(idx),
                        (None, None) => {
                            return Err(DataError::Schema(format!(
                                "attribute `{}` has missing cells but no reserved category",
                                schema.attributes[a].name
                            )))
                        }
                    };
                }
            }
        }
        Dataset::new(schema, rows, data.labels().to_vec())
    }
}

/// Fits an [`Imputer`] on `data` and applies it to the same data.
pub fn impute_missing(data: &Dataset) -> Result<Dataset> {
    Imputer::fit(data)?.apply(data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationModel {
    /// `(min, max)` per attribute; `None` for qualitative attributes.
    pub bounds: Vec<Option<(f64, f64)>>,
}

impl NormalizationModel {
    pub fn fit(train: &Dataset) -> Self {
        let bounds = train
            .schema()
            .attributes
            .iter()
            .enumerate()
            .map(|(a, attr)| match attr.kind {
                AttributeKind::Qualitative { .. } => None,
                AttributeKind::Quantitative => {
                    let mut it = train.column(a).filter_map(Value::as_real);
                    let first = it.next()?;
                    Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
                }
            })
            .collect();
        NormalizationModel { bounds }
    }

    /// Maps each quantitative cell to `(v - min) / (max - min)` clamped into
    /// `[0, 1]`; degenerate attributes (`min == max`) map to 0.
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if self.bounds.len() != data.schema().num_attributes() {
            return Err(DataError::Schema("normalizer was fit on a different schema".into()));
        }
        let rows = data
            .rows()
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.bounds)
                    .map(|(cell, b)| match (cell, b) {
                        (Value::Real(v), Some((lo, hi))) => {
                            // halving is exact and keeps `hi - lo` finite for any finite bounds
                            let span = 0.5 * hi - 0.5 * lo;
                            if span > 0.0 {
                                Value::Real(((0.5 * v - 0.5 * lo) / span).clamp(0.0, 1.0))
                            } else {
                                Value::Real(0.0)
                            }
                        }
                        (other, _) => *other,
                    })
                    .collect()
            })
            .collect();
        Dataset::new(data.schema().clone(), rows, data.labels().to_vec())
    }
}

/// Fits min/max bounds on `train` and rescales both partitions with them.
pub fn fit_apply_normalization(
    train: &Dataset,
    test: &Dataset,
) -> Result<(Dataset, Dataset, NormalizationModel)> {
    let model = NormalizationModel::fit(train);
    Ok((model.apply(train)?, model.apply(test)?, model))
}

/// Collapses a dataset to two classes: the majority class (lowest index on
/// ties) becomes class 0, every other class becomes class 1.
pub fn binarize_majority(data: &Dataset) -> Result<Dataset> {
    let counts = data.class_counts();
    let majority = counts
        .iter()
        .enumerate()
        .fold(0, |best, (c, &n)| if n > counts[best] { c } else { best });
    let mut schema = data.schema().clone();
    let major_label = schema.class_labels[majority].clone();
    let rest_label = if counts.len() == 2 {
        schema.class_labels[1 - majority].clone()
    } else {
        let mut l = format!("not_{major_label}");
        while l == major_label {
            l.push('_');
        }
        l
    };
    schema.class_labels = vec![major_label, rest_label];
    let labels = data.labels().iter().map(|&y| usize::from(y != majority)).collect();
    Dataset::new(schema, data.rows().to_vec(), labels)
}

/// Replaces every qualitative attribute with `m` categories by `m` quantitative
/// 0/1 indicator attributes named `attr=value`. A missing qualitative cell
/// becomes missing in every indicator.
pub fn one_hot_encode(data: &Dataset) -> Result<Dataset> {
    let schema = data.schema();
    let mut attributes = Vec::new();
    for attr in &schema.attributes {
        match &attr.kind {
            AttributeKind::Quantitative => attributes.push(attr.clone()),
            AttributeKind::Qualitative { values } => {
                for v in values {
                    attributes.push(Attribute::quantitative(format!("{}={v}", attr.name)));
                }
            }
        }
    }
    let rows = data
        .rows()
        .iter()
        .map(|row| {
            let mut out = Vec::with_capacity(attributes.len());
            for (cell, attr) in row.iter().zip(&schema.attributes) {
                match (&attr.kind, cell) {
                    (AttributeKind::Qualitative { values }, Value::Category(c)) => {
                        out.extend((0..values.len()).map(|j| Value::Real(if j == *c { 1.0 } else { 0.0 })))
                    }
                    (AttributeKind::Qualitative { values }, _) => {
                        out.extend(std::iter::repeat_n(Value::Missing, values.len()))
                    }
                    (AttributeKind::Quantitative, v) => out.push(*v),
                }
            }
            out
        })
        .collect();
    let schema = Schema::new(
        schema.relation.clone(),
        attributes,
        schema.class_name.clone(),
        schema.class_labels.clone(),
    )?;
    Dataset::new(schema, rows, data.labels().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEATHER: &str = "% toy\n@relation weather\n\n@attribute temp numeric\n@attribute humidity real\n@attribute play {yes,no}\n\n@data\n85,85,no\n80,?,yes\n83,86,yes\n";

    fn mixed() -> Dataset {
        let schema = Schema::new(
            "m",
            vec![Attribute::quantitative("x"), Attribute::qualitative("c", ["a", "b"])],
            "y",
            vec!["p".into(), "q".into(), "r".into()],
        )
        .unwrap();
        Dataset::new(
            schema,
            vec![
                vec![Value::Real(1.0), Value::Category(0)],
                vec![Value::Real(2.0), Value::Missing],
                vec![Value::Missing, Value::Category(1)],
                vec![Value::Real(3.0), Value::Category(0)],
            ],
            vec![0, 1, 2, 0],
        )
        .unwrap()
    }

    #[test]
    fn arff_numeric_and_nominal() {
        let d = parse_arff(WEATHER).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.schema().num_quantitative(), 2);
        assert_eq!(d.schema().num_qualitative(), 0);
        assert_eq!(d.num_classes(), 2);
        assert_eq!(d.labels(), &[1, 0, 0]);
        assert_eq!(d.rows()[1][1], Value::Missing);
    }

    #[test]
    fn arff_unknown_nominal_names_line() {
        let text = "@relation r\n@attribute c {a,b}\n@attribute y {p,q}\n@data\na,p\nz,q\n";
        match parse_arff(text) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn arff_arity_mismatch() {
        let text = "@relation r\n@attribute x numeric\n@attribute y {p,q}\n@data\n1,p,3\n";
        assert!(matches!(parse_arff(text), Err(DataError::Parse { line: 5, .. })));
    }

    #[test]
    fn arff_rejects_unsupported_types() {
        let text = "@relation r\n@attribute s string\n@attribute y {p,q}\n@data\n'x',p\n";
        assert!(matches!(parse_arff(text), Err(DataError::Parse { line: 2, .. })));
        let text = "@relation r\n@attribute x numeric\n@attribute y numeric\n@data\n1,2\n";
        assert!(parse_arff(text).is_err());
    }

    #[test]
    fn arff_quoted_names_and_values() {
        let text = "@relation 'my rel'\n@attribute 'col one' {'a b',c}\n@attribute class {'x,y',z}\n@data\n'a b','x,y'\nc,z\n";
        let d = parse_arff(text).unwrap();
        assert_eq!(d.schema().relation, "my rel");
        assert_eq!(d.schema().attributes[0].name, "col one");
        assert_eq!(d.labels(), &[0, 1]);
        let back = parse_arff(&d.to_arff()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn csv_parsing() {
        let schema = Schema::new(
            "r",
            vec![Attribute::quantitative("a"), Attribute::quantitative("b")],
            "class",
            vec!["p".into(), "q".into()],
        )
        .unwrap();
        let d = parse_csv("a,b,class\n1,2,p\n,4,q\n", &schema).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.rows()[1][0].is_missing());
        assert!(parse_csv("a,b,class\n1,2,3,p\n", &schema).is_err());
        assert!(parse_csv("a,b,class\n1,x,p\n", &schema).is_err());
        assert!(parse_csv("b,a,class\n1,2,p\n", &schema).is_err());
    }

    #[test]
    fn imputation() {
        let d = impute_missing(&mixed()).unwrap();
        assert!(!d.has_missing());
        assert_eq!(d.rows()[2][0], Value::Real(2.0));
        let c = &d.schema().attributes[1].kind;
        assert_eq!(c.cardinality(), Some(3));
        assert_eq!(
            c,
            &AttributeKind::Qualitative { values: vec!["a".into(), "b".into(), MISSING_CATEGORY.into()] }
        );
        assert_eq!(d.rows()[1][1], Value::Category(2));
        // no missing cells: unchanged
        assert_eq!(impute_missing(&d).unwrap(), d);
    }

    #[test]
    fn imputation_all_missing_errors() {
        let schema = Schema::new("r", vec![Attribute::quantitative("x")], "y", vec!["a".into(), "b".into()])
            .unwrap();
        let d = Dataset::new(schema, vec![vec![Value::Missing], vec![Value::Missing]], vec![0, 1]).unwrap();
        assert!(matches!(impute_missing(&d), Err(DataError::AllMissing(_))));
    }

    #[test]
    fn normalization() {
        let schema = Schema::new("r", vec![Attribute::quantitative("x")], "y", vec!["a".into(), "b".into()])
            .unwrap();
        let mk = |v: &[f64]| {
            Dataset::new(
                schema.clone(),
                v.iter().map(|&x| vec![Value::Real(x)]).collect(),
                vec![0; v.len()],
            )
            .unwrap()
        };
        let (tr, te, model) = fit_apply_normalization(&mk(&[0.0, 5.0, 10.0]), &mk(&[12.0, -1.0])).unwrap();
        let col: Vec<f64> = tr.column(0).filter_map(Value::as_real).collect();
        assert_eq!(col, vec![0.0, 0.5, 1.0]);
        let col: Vec<f64> = te.column(0).filter_map(Value::as_real).collect();
        assert_eq!(col, vec![1.0, 0.0]);
        assert_eq!(model.bounds[0], Some((0.0, 10.0)));
        let (tr, _, _) = fit_apply_normalization(&mk(&[7.0, 7.0]), &mk(&[7.0])).unwrap();
        assert!(tr.column(0).all(|v| v == Value::Real(0.0)));
        // the range overflows f64 but the scaled values do not
        let (tr, _, _) = fit_apply_normalization(&mk(&[-1e308, 0.0, 1e308]), &mk(&[0.0])).unwrap();
        let col: Vec<f64> = tr.column(0).filter_map(Value::as_real).collect();
        assert_eq!(col, vec![0.0, 0.5, 1.0]);
    }

    fn labelled(labels: Vec<usize>, classes: usize) -> Dataset {
        let schema = Schema::new(
            "r",
            vec![Attribute::quantitative("x")],
            "y",
            (0..classes).map(|c| format!("c{c}")).collect(),
        )
        .unwrap();
        let rows = labels.iter().map(|_| vec![Value::Real(0.0)]).collect();
        Dataset::new(schema, rows, labels).unwrap()
    }

    #[test]
    fn binarize() {
        let d = labelled(vec![0, 0, 0, 0, 0, 1, 1, 1, 2, 2], 3);
        let b = binarize_majority(&d).unwrap();
        assert_eq!(b.class_counts(), vec![5, 5]);
        assert_eq!(b.schema().class_labels[0], "c0");

        // binary input: a relabelling only
        let d = labelled(vec![1, 1, 0], 2);
        let b = binarize_majority(&d).unwrap();
        assert_eq!(b.labels(), &[0, 0, 1]);
        assert_eq!(b.schema().class_labels, vec!["c1".to_string(), "c0".to_string()]);

        // tie between classes 1 and 2
        let d = labelled(vec![0, 1, 1, 2, 2], 3);
        let b = binarize_majority(&d).unwrap();
        assert_eq!(b.schema().class_labels[0], "c1");
        assert_eq!(b.labels(), &[1, 0, 0, 1, 1]);
    }

    #[test]
    fn one_hot() {
        let schema = Schema::new(
            "r",
            vec![Attribute::qualitative("c", ["a", "b", "c"]), Attribute::quantitative("x")],
            "y",
            vec!["p".into(), "q".into()],
        )
        .unwrap();
        let d = Dataset::new(
            schema,
            vec![vec![Value::Category(0), Value::Real(0.3)], vec![Value::Category(2), Value::Real(0.1)]],
            vec![0, 1],
        )
        .unwrap();
        let e = one_hot_encode(&d).unwrap();
        assert_eq!(e.schema().num_attributes(), 4);
        assert_eq!(e.schema().num_qualitative(), 0);
        assert_eq!(
            e.rows()[0],
            vec![Value::Real(1.0), Value::Real(0.0), Value::Real(0.0), Value::Real(0.3)]
        );
        assert_eq!(e.labels(), d.labels());
        // all-quantitative: unchanged
        assert_eq!(one_hot_encode(&e).unwrap(), e);
    }

    #[test]
    fn schema_invariants() {
        assert!(Schema::new("r", vec![], "y", vec!["a".into()]).is_err());
        assert!(Schema::new("r", vec![], "y", vec!["a".into(), "a".into()]).is_err());
        assert!(Schema::new("r", vec![Attribute::qualitative("c", Vec::<String>::new())], "y", vec!["a".into(), "b".into()]).is_err());
        let s = Schema::new("r", vec![], "y", vec!["a".into(), "b".into()]).unwrap();
        assert!(Dataset::new(s.clone(), vec![], vec![]).is_err());
        assert!(Dataset::new(s, vec![vec![]], vec![2]).is_err());
    }
}
