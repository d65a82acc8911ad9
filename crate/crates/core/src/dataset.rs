//! Tabular data: CSV ingestion, per-feature statistics, prototypes and splits.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::math;

/// The bundled four-feature iris data (150 rows, 3 classes).
pub const IRIS_CSV: &str = include_str!("../data/iris.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

/// Value domain of a feature. Categorical values are stored as indices
/// into the category list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureRange {
    Interval { min: f64, max: f64 },
    Categories(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    pub range: FeatureRange,
    /// `(Q1, Q2, Q3)`, continuous features only.
    pub quartiles: Option<[f64; 3]>,
    /// Mean value; for categorical features the mean category code.
    pub mean: f64,
    /// Population standard deviation (of codes, for categoricals).
    pub std_dev: f64,
    /// Median absolute deviation, continuous features only.
    pub mad: Option<f64>,
}

impl FeatureMeta {
    pub fn is_categorical(&self) -> bool {
        self.kind == FeatureKind::Categorical
    }

    pub fn categories(&self) -> Option<&[String]> {
        match &self.range {
            FeatureRange::Categories(c) => Some(c),
            FeatureRange::Interval { .. } => None,
        }
    }

    /// Lower bound of the value domain (0 for categoricals).
    pub fn min(&self) -> f64 {
        match &self.range {
            FeatureRange::Interval { min, .. } => *min,
            FeatureRange::Categories(_) => 0.0,
        }
    }

    /// Upper bound of the value domain (last category code for categoricals).
    pub fn max(&self) -> f64 {
        match &self.range {
            FeatureRange::Interval { max, .. } => *max,
            FeatureRange::Categories(c) => (c.len() - 1) as f64,
        }
    }

    pub fn span(&self) -> f64 {
        self.max() - self.min()
    }

    /// MAD with the given floor applied; categoricals report 1.
    pub fn mad_floored(&self, floor: f64) -> f64 {
        match self.mad {
            Some(m) => m.max(floor),
            None => 1.0,
        }
    }

    /// Checks `value` against the declared domain.
    pub fn check_value(&self, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidValue {
                feature: self.name.clone(),
                message: "value is not finite".into(),
            });
        }
        match &self.range {
            FeatureRange::Interval { min, max } => {
                if value < *min || value > *max {
                    return Err(Error::Range {
                        feature: self.name.clone(),
                        value,
                        min: *min,
                        max: *max,
                    });
                }
            }
            FeatureRange::Categories(c) => {
                if value.fract() != 0.0 || value < 0.0 || value as usize >= c.len() {
                    return Err(Error::Range {
                        feature: self.name.clone(),
                        value,
                        min: 0.0,
                        max: (c.len() - 1) as f64,
                    });
                }
            }
        }
        Ok(())
    }

    /// Category index for a category name.
    pub fn category_code(&self, name: &str) -> Option<usize> {
        self.categories()?.iter().position(|c| c == name)
    }

    /// Human-readable form of a value: category name or shortest decimal.
    pub fn display_value(&self, value: f64) -> String {
        match self.categories() {
            Some(c) => c
                .get(value as usize)
                .cloned()
                .unwrap_or_else(|| format!("{value}")),
            None => format_number(value),
        }
    }

    /// Distinct quartile bin edges `min, Q1, Q2, Q3, max` (continuous only).
    ///
    /// Consecutive edges bound the bins `[e0, e1], (e1, e2], ...`. A constant
    /// feature yields a single edge and therefore one degenerate bin.
    pub fn bin_edges(&self) -> Vec<f64> {
        let mut edges = vec![self.min()];
        if let Some(q) = self.quartiles {
            for e in [q[0], q[1], q[2], self.max()] {
                if e > *edges.last().unwrap() {
                    edges.push(e);
                }
            }
        }
        edges
    }

    /// Number of discretization bins (categories for categoricals).
    pub fn n_bins(&self) -> usize {
        match self.categories() {
            Some(c) => c.len(),
            None => self.bin_edges().len().saturating_sub(1).max(1),
        }
    }

    /// Bin index of a value. Values outside the range fall in the outer bins.
    pub fn bin_of(&self, value: f64) -> usize {
        if self.is_categorical() {
            return value as usize;
        }
        let edges = self.bin_edges();
        if edges.len() < 2 {
            return 0;
        }
        edges[1..edges.len() - 1]
            .iter()
            .filter(|&&e| value > e)
            .count()
    }

    /// Finite sampling interval `(lo, hi)` of a continuous bin.
    pub fn bin_interval(&self, bin: usize) -> (f64, f64) {
        let edges = self.bin_edges();
        if edges.len() < 2 {
            return (edges[0], edges[0]);
        }
        (edges[bin], edges[bin + 1])
    }
}

/// Formats a number with at most three decimals and no trailing zeros.
pub fn format_number(value: f64) -> String {
    let mut s = format!("{value:.3}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Feature values of one input row, categorical values as category codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instance(pub Vec<f64>);

impl Instance {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Validates length and per-feature domains.
    pub fn validate(&self, features: &[FeatureMeta]) -> Result<()> {
        if self.0.len() != features.len() {
            return Err(Error::Dimension {
                expected: features.len(),
                actual: self.0.len(),
            });
        }
        for (meta, &v) in features.iter().zip(&self.0) {
            if meta.is_categorical() {
                meta.check_value(v)?;
            } else if !v.is_finite() {
                return Err(Error::InvalidValue {
                    feature: meta.name.clone(),
                    message: "value is not finite".into(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<FeatureMeta>,
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from already-encoded rows, computing feature statistics.
    ///
    /// `kinds` gives the kind of every column; categorical columns need their
    /// category list in `categories` (same position, `None` for continuous).
    pub fn from_rows(
        names: Vec<String>,
        categories: Vec<Option<Vec<String>>>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let m = names.len();
        if categories.len() != m {
            return Err(Error::Dimension {
                expected: m,
                actual: categories.len(),
            });
        }
        if rows.is_empty() {
            return Err(Error::DegenerateDataset("dataset has no rows".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                actual: labels.len(),
            });
        }
        if class_names.len() < 2 {
            return Err(Error::DegenerateDataset(
                "at least two classes are required".into(),
            ));
        }
        for row in &rows {
            if row.len() != m {
                return Err(Error::Dimension {
                    expected: m,
                    actual: row.len(),
                });
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::DegenerateDataset(format!(
                "label {bad} has no class name"
            )));
        }
        let mut features = Vec::with_capacity(m);
        for (j, (name, cats)) in names.into_iter().zip(categories).enumerate() {
            let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            features.push(column_stats(name, cats, &column)?);
        }
        Ok(Self {
            features,
            rows,
            labels,
            class_names,
        })
    }

    pub fn features(&self) -> &[FeatureMeta] {
        &self.features
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// Content hash over schema, rows and labels.
    pub fn fingerprint(&self) -> Fingerprint {
        let mut bytes = Vec::new();
        for f in &self.features {
            bytes.extend_from_slice(f.name.as_bytes());
            bytes.push(0);
            if let Some(c) = f.categories() {
                for name in c {
                    bytes.extend_from_slice(name.as_bytes());
                    bytes.push(1);
                }
            }
            bytes.push(2);
        }
        for name in &self.class_names {
            bytes.extend_from_slice(name.as_bytes());
            bytes.push(3);
        }
        for (row, label) in self.rows.iter().zip(&self.labels) {
            for v in row {
                bytes.extend_from_slice(&v.to_bits().to_le_bytes());
            }
            bytes.extend_from_slice(&(*label as u64).to_le_bytes());
        }
        Fingerprint::of_bytes(&bytes)
    }

    /// Subset of rows sharing this dataset's feature metadata.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// Parses one raw instance given as strings (numbers or category names).
    pub fn parse_instance<S: AsRef<str>>(&self, raw: &[S]) -> Result<Instance> {
        if raw.len() != self.features.len() {
            return Err(Error::Dimension {
                expected: self.features.len(),
                actual: raw.len(),
            });
        }
        let mut values = Vec::with_capacity(raw.len());
        for (meta, field) in self.features.iter().zip(raw) {
            let field = field.as_ref().trim();
            let v = if meta.is_categorical() {
                match meta.category_code(field) {
                    Some(code) => code as f64,
                    None => {
                        return Err(Error::InvalidValue {
                            feature: meta.name.clone(),
                            message: format!("unknown category `{field}`"),
                        })
                    }
                }
            } else {
                field.parse::<f64>().map_err(|_| Error::InvalidValue {
                    feature: meta.name.clone(),
                    message: format!("`{field}` is not a number"),
                })?
            };
            values.push(v);
        }
        let instance = Instance(values);
        instance.validate(&self.features)?;
        Ok(instance)
    }
}

/// Parses CSV text: header row, comma separated, last column is the label.
///
/// Column kinds come from `hints` when given (by column name), otherwise a
/// column is continuous when its first value parses as a number.
pub fn load_dataset(csv_text: &str, hints: Option<&[(&str, FeatureKind)]>) -> Result<Dataset> {
    let mut lines = csv_text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header row".into(),
    })?;
    let header = split_csv_line(header);
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "need at least one feature column and a label column".into(),
        });
    }
    let m = header.len() - 1;

    let mut raw: Vec<(usize, Vec<String>)> = Vec::new();
    for (idx, line) in lines {
        let fields = split_csv_line(line);
        if fields.len() != header.len() {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        raw.push((idx + 1, fields));
    }
    if raw.is_empty() {
        return Err(Error::DegenerateDataset("no data rows".into()));
    }

    let kinds: Vec<FeatureKind> = (0..m)
        .map(|j| {
            let hinted = hints.and_then(|h| {
                h.iter()
                    .find(|(name, _)| *name == header[j])
                    .map(|(_, k)| *k)
            });
            hinted.unwrap_or_else(|| {
                if raw[0].1[j].parse::<f64>().is_ok() {
                    FeatureKind::Continuous
                } else {
                    FeatureKind::Categorical
                }
            })
        })
        .collect();

    let mut categories: Vec<Option<Vec<String>>> = kinds
        .iter()
        .map(|k| match k {
            FeatureKind::Categorical => Some(Vec::new()),
            FeatureKind::Continuous => None,
        })
        .collect();
    let mut class_names: Vec<String> = Vec::new();
    let mut rows = Vec::with_capacity(raw.len());
    let mut labels = Vec::with_capacity(raw.len());
    for (line, fields) in &raw {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            let field = &fields[j];
            match &mut categories[j] {
                Some(cats) => {
                    let code = match cats.iter().position(|c| c == field) {
                        Some(c) => c,
                        None => {
                            cats.push(field.clone());
                            cats.len() - 1
                        }
                    };
                    row.push(code as f64);
                }
                None => {
                    let v: f64 = field.parse().map_err(|_| Error::Parse {
                        line: *line,
                        message: format!(
                            "column `{}` is continuous but `{}` is not a number",
                            header[j], field
                        ),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Parse {
                            line: *line,
                            message: format!("non-finite value in column `{}`", header[j]),
                        });
                    }
                    row.push(v);
                }
            }
        }
        let label = &fields[m];
        let class = match class_names.iter().position(|c| c == label) {
            Some(c) => c,
            None => {
                class_names.push(label.clone());
                class_names.len() - 1
            }
        };
        rows.push(row);
        labels.push(class);
    }
    if class_names.len() < 2 {
        return Err(Error::DegenerateDataset(format!(
            "only one class label (`{}`) present",
            class_names[0]
        )));
    }
    let names = header[..m].to_vec();
    Dataset::from_rows(names, categories, rows, labels, class_names)
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    let mut chars = line.trim_end_matches('\r').chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                current.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(core::mem::take(&mut current).trim().to_string()),
            _ => current.push(c),
        }
    }
    fields.push(current.trim().to_string());
    fields
}

/// Recomputes the per-feature statistics of a dataset.
pub fn feature_stats(dataset: &Dataset) -> Vec<FeatureMeta> {
    (0..dataset.n_features())
        .map(|j| {
            let column: Vec<f64> = dataset.rows.iter().map(|r| r[j]).collect();
            let meta = &dataset.features[j];
            column_stats(
                meta.name.clone(),
                meta.categories().map(|c| c.to_vec()),
                &column,
            )
            .expect("dataset columns were validated on construction")
        })
        .collect()
}

/// Q1/Q2/Q3 by the median-of-halves rule; the middle value is excluded from
/// both halves when the count is odd.
pub fn quartiles(values: &[f64]) -> [f64; 3] {
    let mut sorted = values.to_vec();
    math::sort_floats(&mut sorted);
    let n = sorted.len();
    let q2 = math::sorted_median(&sorted);
    if n < 2 {
        return [q2, q2, q2];
    }
    let half = n / 2;
    let q1 = math::sorted_median(&sorted[..half]);
    let q3 = math::sorted_median(&sorted[n - half..]);
    [q1, q2, q3]
}

fn column_stats(name: String, categories: Option<Vec<String>>, column: &[f64]) -> Result<FeatureMeta> {
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std_dev = math::sqrt(var);
    match categories {
        Some(cats) => {
            if cats.is_empty() {
                return Err(Error::DegenerateDataset(format!(
                    "categorical feature `{name}` has no categories"
                )));
            }
            for (i, c) in cats.iter().enumerate() {
                if cats[..i].contains(c) {
                    return Err(Error::DegenerateDataset(format!(
                        "duplicate category `{c}` in feature `{name}`"
                    )));
                }
            }
            Ok(FeatureMeta {
                name,
                kind: FeatureKind::Categorical,
                range: FeatureRange::Categories(cats),
                quartiles: None,
                mean,
                std_dev,
                mad: None,
            })
        }
        None => {
            let mut sorted = column.to_vec();
            math::sort_floats(&mut sorted);
            let median = math::sorted_median(&sorted);
            let mut deviations: Vec<f64> = sorted.iter().map(|v| (v - median).abs()).collect();
            math::sort_floats(&mut deviations);
            Ok(FeatureMeta {
                name,
                kind: FeatureKind::Continuous,
                range: FeatureRange::Interval {
                    min: sorted[0],
                    max: sorted[sorted.len() - 1],
                },
                quartiles: Some(quartiles(&sorted)),
                mean,
                std_dev,
                mad: Some(math::sorted_median(&deviations)),
            })
        }
    }
}

/// Range-normalized Euclidean distance; categoricals contribute 0/1 mismatch.
pub fn range_normalized_distance(features: &[FeatureMeta], a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for ((meta, &x), &y) in features.iter().zip(a).zip(b) {
        let d = if meta.is_categorical() {
            if x == y {
                0.0
            } else {
                1.0
            }
        } else {
            let span = meta.span();
            if span > 0.0 {
                (x - y) / span
            } else {
                0.0
            }
        };
        sum += d * d;
    }
    math::sqrt(sum)
}

/// Medoid row of each class: the member minimizing the summed
/// range-normalized distance to the other members, lowest row index on ties.
pub fn class_prototypes(dataset: &Dataset) -> Result<Vec<Instance>> {
    let mut out = Vec::with_capacity(dataset.n_classes());
    for class in 0..dataset.n_classes() {
        let members: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.labels[i] == class)
            .collect();
        if members.is_empty() {
            return Err(Error::DegenerateDataset(format!(
                "class `{}` has no rows",
                dataset.class_names[class]
            )));
        }
        let mut best = (members[0], f64::INFINITY);
        for &i in &members {
            let total: f64 = members
                .iter()
                .map(|&k| range_normalized_distance(&dataset.features, &dataset.rows[i], &dataset.rows[k]))
                .sum();
            if total < best.1 {
                best = (i, total);
            }
        }
        out.push(Instance(dataset.rows[best.0].clone()));
    }
    Ok(out)
}

/// Deterministic 80/20 train/test split from a seeded shuffle.
pub fn train_test_split(dataset: &Dataset, seed: u64) -> (Dataset, Dataset) {
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let n_test = (dataset.len() as f64 * 0.2).round() as usize;
    let (test, train) = indices.split_at(n_test);
    (dataset.subset(train), dataset.subset(test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(body: &str) -> String {
        format!("a,b,label\n{body}")
    }

    #[test]
    fn iris_shape() {
        let ds = load_dataset(IRIS_CSV, None).unwrap();
        assert_eq!(ds.n_features(), 4);
        assert_eq!(ds.n_classes(), 3);
        assert_eq!(ds.len(), 150);
        assert_eq!(ds.class_names(), &["setosa", "versicolor", "virginica"]);
    }

    #[test]
    fn quartile_rule() {
        assert_eq!(quartiles(&[1.0, 2.0, 3.0, 4.0]), [1.5, 2.5, 3.5]);
        assert_eq!(quartiles(&[1.0, 2.0, 3.0, 4.0, 5.0]), [1.5, 3.0, 4.5]);
        assert_eq!(quartiles(&[7.0]), [7.0, 7.0, 7.0]);
    }

    #[test]
    fn constant_column() {
        let ds = load_dataset(&csv("5,1,x\n5,2,y\n5,3,x\n"), None).unwrap();
        let f = &ds.features()[0];
        assert_eq!(f.range, FeatureRange::Interval { min: 5.0, max: 5.0 });
        assert_eq!(f.mad, Some(0.0));
        assert_eq!(f.n_bins(), 1);
    }

    #[test]
    fn two_value_mean() {
        let ds = load_dataset(&csv("0,1,x\n10,2,y\n"), None).unwrap();
        assert_eq!(ds.features()[0].mean, 5.0);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = load_dataset(&csv("1,2,x\n1,y\n"), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn single_class_rejected() {
        let err = load_dataset(&csv("1,2,x\n3,4,x\n"), None).unwrap_err();
        assert!(matches!(err, Error::DegenerateDataset(_)));
    }

    #[test]
    fn non_numeric_in_continuous_column() {
        let err = load_dataset(&csv("1,2,x\nfoo,4,y\n"), None).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let hints = [("a", FeatureKind::Continuous)];
        let err = load_dataset(&csv("foo,2,x\n1,4,y\n"), Some(&hints)).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn categorical_columns() {
        let ds = load_dataset(&csv("red,2,x\nblue,4,y\nred,1,y\n"), None).unwrap();
        let f = &ds.features()[0];
        assert!(f.is_categorical());
        assert_eq!(f.categories().unwrap(), &["red", "blue"]);
        assert_eq!(ds.rows()[1][0], 1.0);
        let inst = ds.parse_instance(&["blue", "3"]).unwrap();
        assert_eq!(inst.values(), &[1.0, 3.0]);
        assert!(ds.parse_instance(&["green", "3"]).is_err());
    }

    #[test]
    fn bins_follow_quartiles() {
        let ds = load_dataset(&csv("1,0,x\n2,0,y\n3,0,x\n4,0,y\n"), None).unwrap();
        let f = &ds.features()[0];
        assert_eq!(f.bin_edges(), vec![1.0, 1.5, 2.5, 3.5, 4.0]);
        assert_eq!(f.bin_of(1.0), 0);
        assert_eq!(f.bin_of(1.5), 0);
        assert_eq!(f.bin_of(1.6), 1);
        assert_eq!(f.bin_of(4.0), 3);
        assert_eq!(f.bin_interval(2), (2.5, 3.5));
    }

    #[test]
    fn singleton_prototype() {
        let ds = load_dataset(&csv("1,1,x\n2,2,y\n3,3,y\n"), None).unwrap();
        let protos = class_prototypes(&ds).unwrap();
        assert_eq!(protos[0].values(), &[1.0, 1.0]);
    }

    #[test]
    fn medoid_of_three() {
        let ds = load_dataset(&csv("0,0,x\n1,1,x\n0.4,0.4,x\n5,5,y\n"), None).unwrap();
        let protos = class_prototypes(&ds).unwrap();
        assert_eq!(protos[0].values(), &[0.4, 0.4]);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = load_dataset(IRIS_CSV, None).unwrap();
        let (a_train, a_test) = train_test_split(&ds, 7);
        let (b_train, b_test) = train_test_split(&ds, 7);
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
        assert_eq!(a_train.len(), 120);
        assert_eq!(a_test.len(), 30);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(1.4), "1.4");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(0.123456), "0.123");
        assert_eq!(format_number(-0.0001), "0");
    }
}
