//! Datasets: synthetic generators, CSV ingestion and target encoding.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    Classification,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetEncoding {
    OneHot01,
    OneHotSoft { on: f64, off: f64 },
}

impl TargetEncoding {
    /// Values strictly inside the softplus08 inverse domain.
    pub const SOFT: TargetEncoding = TargetEncoding::OneHotSoft { on: 0.9, off: 0.1 };

    fn levels(&self) -> (f64, f64) {
        match *self {
            TargetEncoding::OneHot01 => (1.0, 0.0),
            TargetEncoding::OneHotSoft { on, off } => (on, off),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Raw inputs, no bias column.
    pub x: Matrix,
    pub y: Matrix,
    /// Class names in column order of `y`.
    pub class_labels: Option<Vec<String>>,
    pub kind: TaskKind,
}

impl Dataset {
    pub fn new(x: Matrix, y: Matrix, class_labels: Option<Vec<String>>, kind: TaskKind) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::invalid(format!("x has {} rows but y has {}", x.rows(), y.rows())));
        }
        if let Some(labels) = &class_labels {
            if labels.len() != y.cols() {
                return Err(Error::invalid(format!(
                    "{} class labels for {} target columns",
                    labels.len(),
                    y.cols()
                )));
            }
        }
        Ok(Dataset {
            x,
            y,
            class_labels,
            kind,
        })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    /// Class index of every row (argmax of the encoded target).
    pub fn class_indices(&self) -> Vec<usize> {
        (0..self.y.rows()).map(|i| argmax(&self.y.row(i))).collect()
    }

    pub fn num_classes(&self) -> usize {
        match self.kind {
            TaskKind::Classification => self.y.cols(),
            TaskKind::Regression => 0,
        }
    }

    pub fn subset(&self, idx: &[usize]) -> Result<Dataset> {
        Ok(Dataset {
            x: self.x.select_rows(idx)?,
            y: self.y.select_rows(idx)?,
            class_labels: self.class_labels.clone(),
            kind: self.kind,
        })
    }

    /// Re-encodes classification targets; regression targets are untouched.
    pub fn with_encoding(&self, encoding: TargetEncoding) -> Result<Dataset> {
        if self.kind == TaskKind::Regression {
            return Ok(self.clone());
        }
        let y = one_hot(&self.class_indices(), self.y.cols(), encoding)?;
        Dataset::new(self.x.clone(), y, self.class_labels.clone(), self.kind)
    }

    /// Headerless CSV: feature columns then target columns.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        for i in 0..self.len() {
            let row: Vec<String> = self
                .x
                .row(i)
                .into_iter()
                .chain(self.y.row(i))
                .map(|v| format!("{v:.16e}"))
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// CSV with a header: features then a single label column holding the
    /// class name (classification) or target value (regression). Loads
    /// back through [`load_csv`].
    pub fn to_labelled_csv_string(&self) -> String {
        let mut s: String = (0..self.x.cols()).map(|j| format!("x{j},")).collect();
        s.push_str("label\n");
        let classes = self.class_indices();
        for i in 0..self.len() {
            for v in self.x.row(i) {
                s.push_str(&format!("{v:.16e},"));
            }
            match (&self.class_labels, self.kind) {
                (Some(labels), TaskKind::Classification) => s.push_str(&labels[classes[i]]),
                _ => s.push_str(&format!("{:.16e}", self.y.get(i, 0))),
            }
            s.push('\n');
        }
        s
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn one_hot(classes: &[usize], q: usize, encoding: TargetEncoding) -> Result<Matrix> {
    let (on, off) = encoding.levels();
    if classes.is_empty() || q == 0 {
        return Err(Error::invalid("cannot encode an empty label list"));
    }
    Ok(Matrix::from_fn(classes.len(), q, |i, j| if classes[i] == j { on } else { off }))
}

/// Sorts labels numerically when every label is a number, else lexically.
fn sorted_classes(labels: &[String]) -> Vec<String> {
    let distinct: BTreeSet<&String> = labels.iter().collect();
    let mut classes: Vec<String> = distinct.into_iter().cloned().collect();
    if classes.iter().all(|c| c.parse::<f64>().is_ok()) {
        classes.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
    }
    classes
}

/// One-hot encoding over the sorted distinct labels. Returns the matrix and
/// the class names in column order.
pub fn encode_targets(labels: &[String], encoding: TargetEncoding) -> Result<(Matrix, Vec<String>)> {
    let classes = sorted_classes(labels);
    let index: BTreeMap<&String, usize> = classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let idx: Vec<usize> = labels.iter().map(|l| index[l]).collect();
    Ok((one_hot(&idx, classes.len(), encoding)?, classes))
}

/// Fraction of rows whose predicted argmax matches the true class.
pub fn accuracy(pred: &Matrix, truth: &Dataset) -> Result<f64> {
    if pred.shape() != truth.y.shape() {
        return Err(Error::invalid(format!(
            "prediction is {}x{} but targets are {}x{}",
            pred.rows(),
            pred.cols(),
            truth.y.rows(),
            truth.y.cols()
        )));
    }
    let classes = truth.class_indices();
    let hits = (0..pred.rows()).filter(|&i| argmax(&pred.row(i)) == classes[i]).count();
    Ok(hits as f64 / pred.rows() as f64)
}

pub fn regression_target(x: f64) -> f64 {
    (2.0 * x).sin() / (2.0 * x)
}

/// The clean set on `x = 1..8` followed by `noisy_sets` copies with uniform
/// noise of amplitude `noise_frac * (target range)`, and a clean test grid
/// on `0.90, 0.91, ..., 8.10`.
pub fn gen_regression(noisy_sets: usize, noise_frac: f64, seed: u64) -> Result<(Vec<Dataset>, Dataset)> {
    if !(noise_frac >= 0.0 && noise_frac.is_finite()) {
        return Err(Error::invalid(format!("noise_frac must be >= 0, got {noise_frac}")));
    }
    let xs: Vec<f64> = (1..=8).map(f64::from).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| regression_target(x)).collect();
    let range = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) - ys.iter().copied().fold(f64::INFINITY, f64::min);
    let amp = noise_frac * range;
    let x = Matrix::column_vector(&xs)?;
    let mut rng = seed::rng(seed);
    let mut train = vec![Dataset::new(x.clone(), Matrix::column_vector(&ys)?, None, TaskKind::Regression)?];
    for _ in 0..noisy_sets {
        let noisy: Vec<f64> = ys
            .iter()
            .map(|&y| if amp > 0.0 { y + rng.random_range(-amp..=amp) } else { y })
            .collect();
        train.push(Dataset::new(x.clone(), Matrix::column_vector(&noisy)?, None, TaskKind::Regression)?);
    }
    let grid: Vec<f64> = (90..=810).map(|i| i as f64 / 100.0).collect();
    let targets: Vec<f64> = grid.iter().map(|&x| regression_target(x)).collect();
    let test = Dataset::new(
        Matrix::column_vector(&grid)?,
        Matrix::column_vector(&targets)?,
        None,
        TaskKind::Regression,
    )?;
    Ok((train, test))
}

/// Angle and radius of noiseless spiral point `i` on arm `a`.
pub fn spiral_point(arm: usize, arms: usize, i: usize, per_arm: usize) -> (f64, f64) {
    let theta = 2.0 * PI * i as f64 / per_arm as f64 + 2.0 * PI * arm as f64 / arms as f64;
    let radius = (i + 1) as f64 / per_arm as f64;
    (theta, radius)
}

/// Interleaved spiral arms in the plane, one class per arm. Even samples of
/// each arm go to the training set, odd ones to the test set. Targets are
/// 0/1 one-hot; use [`Dataset::with_encoding`] for other levels.
pub fn gen_spiral(arms: usize, per_arm: usize, noise: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if arms == 0 || per_arm == 0 || !per_arm.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "spiral needs arms >= 1 and a positive even per_arm, got {arms} and {per_arm}"
        )));
    }
    if !noise.is_finite() {
        return Err(Error::invalid("spiral noise must be finite"));
    }
    let mut rng = seed::rng(seed);
    let mut parts: [(Vec<f64>, Vec<usize>); 2] = Default::default();
    for arm in 0..arms {
        for i in 0..per_arm {
            let (theta, r) = spiral_point(arm, arms, i, per_arm);
            let u: f64 = rng.random();
            let theta = theta + noise * u;
            let part = &mut parts[i % 2];
            part.0.extend([r * theta.cos(), r * theta.sin()]);
            part.1.push(arm);
        }
    }
    let labels: Vec<String> = (0..arms).map(|a| a.to_string()).collect();
    let [train, test] = parts.map(|(xs, classes)| {
        let m = classes.len();
        Dataset::new(
            Matrix::new(m, 2, xs)?,
            one_hot(&classes, arms, TargetEncoding::OneHot01)?,
            Some(labels.clone()),
            TaskKind::Classification,
        )
    });
    Ok((train?, test?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    Last,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    Drop,
    /// Numeric columns take the column mean, categorical ones the most
    /// frequent value.
    MeanImpute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: LabelColumn,
    pub header: bool,
    pub missing_policy: MissingPolicy,
    /// Forces the task kind instead of inferring it from the labels.
    pub task: Option<TaskKind>,
    pub encoding: TargetEncoding,
    /// Fixes the class order, e.g. to encode a test file like its training
    /// file. Labels outside the list are a configuration error.
    pub classes: Option<Vec<String>>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            label_column: LabelColumn::Last,
            header: true,
            missing_policy: MissingPolicy::Drop,
            task: None,
            encoding: TargetEncoding::OneHot01,
            classes: None,
        }
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "?" | "NA" | "N/A" | "na" | "nan" | "NaN" | "null")
}

/// Label columns of integers with at most this many distinct values are
/// treated as classes.
const MAX_INTEGER_CLASSES: usize = 10;

fn infer_task(labels: &[String]) -> TaskKind {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.parse::<f64>().ok()).collect();
    match numeric {
        None => TaskKind::Classification,
        Some(v) => {
            let integral = v.iter().all(|x| x.fract() == 0.0);
            let distinct: BTreeSet<&String> = labels.iter().collect();
            if integral && distinct.len() <= MAX_INTEGER_CLASSES {
                TaskKind::Classification
            } else {
                TaskKind::Regression
            }
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema)
}

pub fn parse_csv(text: &str, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Option<Vec<String>> = if schema.header {
        let h = reader.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| rows.first().map(|r| r.1.len()))
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "file has no data rows".into(),
        })?;
    if width < 2 {
        return Err(Error::config("need at least one feature column and a label column"));
    }
    for (line, row) in &rows {
        if row.len() != width {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {width} fields, found {}", row.len()),
            });
        }
    }

    let label = match &schema.label_column {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => {
            return Err(Error::config(format!("label column {i} out of range for {width} columns")))
        }
        LabelColumn::Name(name) => header
            .as_ref()
            .ok_or_else(|| Error::config("a named label column requires a header row"))?
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::config(format!("unknown column {name:?}")))?,
    };

    // rows without a label cannot be imputed
    rows.retain(|(_, r)| !is_missing(&r[label]));
    if schema.missing_policy == MissingPolicy::Drop {
        rows.retain(|(_, r)| !r.iter().any(|c| is_missing(c)));
    }
    if rows.is_empty() {
        return Err(Error::config("no complete rows left after handling missing values"));
    }

    let mut features: Vec<Vec<f64>> = vec![Vec::new(); rows.len()];
    for col in (0..width).filter(|&c| c != label) {
        let cells: Vec<&str> = rows.iter().map(|(_, r)| r[col].as_str()).collect();
        let present: Vec<&str> = cells.iter().copied().filter(|c| !is_missing(c)).collect();
        let numeric: Option<Vec<f64>> = present.iter().map(|c| c.parse::<f64>().ok()).collect();
        match numeric {
            Some(vals) => {
                if vals.is_empty() {
                    return Err(Error::config(format!("column {col} has no values to impute from")));
                }
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                for (i, c) in cells.iter().enumerate() {
                    features[i].push(if is_missing(c) { mean } else { c.parse().unwrap() });
                }
            }
            None => {
                let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                for c in &present {
                    *counts.entry(c).or_default() += 1;
                }
                let levels: Vec<&str> = counts.keys().copied().collect();
                // most frequent, earliest in sort order on ties
                let mode = counts.iter().rev().max_by_key(|(_, &n)| n).map(|(&k, _)| k).unwrap();
                for (i, c) in cells.iter().enumerate() {
                    let v = if is_missing(c) { mode } else { c };
                    features[i].extend(levels.iter().map(|l| if *l == v { 1.0 } else { 0.0 }));
                }
            }
        }
    }
    let m = rows.len();
    let d = features[0].len();
    let x = Matrix::new(m, d, features.into_iter().flatten().collect())?;

    let labels: Vec<String> = rows.iter().map(|(_, r)| r[label].clone()).collect();
    let kind = schema.task.unwrap_or_else(|| infer_task(&labels));
    match kind {
        TaskKind::Classification => match &schema.classes {
            None => {
                let (y, classes) = encode_targets(&labels, schema.encoding)?;
                Dataset::new(x, y, Some(classes), kind)
            }
            Some(classes) => {
                let index: BTreeMap<&String, usize> = classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
                let idx = labels
                    .iter()
                    .map(|l| {
                        index
                            .get(l)
                            .copied()
                            .ok_or_else(|| Error::config(format!("label {l:?} is not one of the known classes")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Dataset::new(x, one_hot(&idx, classes.len(), schema.encoding)?, Some(classes.clone()), kind)
            }
        },
        TaskKind::Regression => {
            let mut vals = Vec::with_capacity(m);
            for (line, r) in &rows {
                vals.push(r[label].parse::<f64>().map_err(|_| Error::Parse {
                    line: *line,
                    message: format!("regression target {:?} is not a number", r[label]),
                })?);
            }
            Dataset::new(x, Matrix::column_vector(&vals)?, None, kind)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn regression_sets() {
        let (train, test) = gen_regression(0, 0.0, 1).unwrap();
        assert_eq!(train.len(), 1);
        assert_eq!(train[0].len(), 8);
        assert_eq!(test.len(), 721);
        assert!((train[0].y.get(0, 0) - 0.454649).abs() < 1e-6);
        assert!((test.x.get(0, 0) - 0.90).abs() < 1e-15);
        assert!((test.x.get(720, 0) - 8.10).abs() < 1e-15);
        let (noisy, _) = gen_regression(10, 0.2, 1).unwrap();
        assert_eq!(noisy.len(), 11);
        assert_ne!(noisy[1].y, noisy[0].y);
    }

    #[test]
    fn spiral_sizes_and_balance() {
        let (train, test) = gen_spiral(6, 500, 0.3, 1).unwrap();
        assert_eq!((train.len(), test.len()), (1500, 1500));
        let (train, test) = gen_spiral(2, 4, 0.0, 1).unwrap();
        assert_eq!((train.len(), test.len()), (4, 4));
        assert_eq!(train.class_indices(), vec![0, 0, 1, 1]);
        assert!(gen_spiral(2, 3, 0.0, 1).is_err());
    }

    #[test]
    fn noiseless_spiral_follows_parametric_curve() {
        let (train, _) = gen_spiral(3, 10, 0.0, 4).unwrap();
        for (n, arm) in train.class_indices().into_iter().enumerate() {
            let i = 2 * (n % 5);
            let (theta, r) = spiral_point(arm, 3, i, 10);
            assert!((train.x.get(n, 0) - r * theta.cos()).abs() < 1e-12);
            assert!((train.x.get(n, 1) - r * theta.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn encoding_examples() {
        let (y, classes) = encode_targets(&strings(&["a", "b", "a"]), TargetEncoding::OneHot01).unwrap();
        assert_eq!(y.to_row_major(), vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(classes, strings(&["a", "b"]));
        let (y, _) = encode_targets(&strings(&["a", "b", "a"]), TargetEncoding::SOFT).unwrap();
        assert_eq!(y.to_row_major(), vec![0.9, 0.1, 0.1, 0.9, 0.9, 0.1]);
        let (y, _) = encode_targets(&strings(&["z", "z"]), TargetEncoding::SOFT).unwrap();
        assert_eq!(y.shape(), (2, 1));
        let (_, classes) = encode_targets(&strings(&["10", "2", "1"]), TargetEncoding::OneHot01).unwrap();
        assert_eq!(classes, strings(&["1", "2", "10"]));
    }

    #[test]
    fn accuracy_examples() {
        let (y, classes) = encode_targets(&strings(&["a", "b", "a", "b"]), TargetEncoding::OneHot01).unwrap();
        let ds = Dataset::new(Matrix::zeros(4, 1), y.clone(), Some(classes), TaskKind::Classification).unwrap();
        assert_eq!(accuracy(&y, &ds).unwrap(), 1.0);
        let flipped = Matrix::from_fn(4, 2, |i, j| 1.0 - y.get(i, j));
        assert_eq!(accuracy(&flipped, &ds).unwrap(), 0.0);
        let one_wrong = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(accuracy(&one_wrong, &ds).unwrap(), 0.75);
        // ties go to the first column
        assert_eq!(argmax(&[0.5, 0.5]), 0);
    }

    #[test]
    fn csv_numeric_classification() {
        let ds = parse_csv("a,b,y\n1,2,0\n3,4,1\n5,6,0\n", &CsvSchema::default()).unwrap();
        assert_eq!(ds.kind, TaskKind::Classification);
        assert_eq!(ds.x.shape(), (3, 2));
        assert_eq!(ds.y.shape(), (3, 2));
    }

    #[test]
    fn csv_missing_values() {
        let text = "a,b,y\n1,2,x\n,4,y\n5,6,x\n";
        let dropped = parse_csv(text, &CsvSchema::default()).unwrap();
        assert_eq!(dropped.len(), 2);
        let schema = CsvSchema {
            missing_policy: MissingPolicy::MeanImpute,
            ..Default::default()
        };
        let imputed = parse_csv(text, &schema).unwrap();
        assert_eq!(imputed.len(), 3);
        assert_eq!(imputed.x.get(1, 0), 3.0);
    }

    #[test]
    fn csv_categorical_features_expand() {
        let text = "color,size,y\nred,1,a\nblue,2,b\nred,3,a\n,4,b\n";
        let schema = CsvSchema {
            missing_policy: MissingPolicy::MeanImpute,
            ..Default::default()
        };
        let ds = parse_csv(text, &schema).unwrap();
        // blue, red one-hot then size
        assert_eq!(ds.x.shape(), (4, 3));
        assert_eq!(ds.x.row(0), vec![0.0, 1.0, 1.0]);
        assert_eq!(ds.x.row(3), vec![0.0, 1.0, 4.0]);
    }

    #[test]
    fn csv_errors() {
        match parse_csv("a,b,y\n1,2,0\n1,2\n", &CsvSchema::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let schema = CsvSchema {
            label_column: LabelColumn::Name("species".into()),
            ..Default::default()
        };
        assert!(matches!(
            parse_csv("a,b,y\n1,2,0\n", &schema),
            Err(Error::InvalidConfiguration(_))
        ));
    }

    #[test]
    fn csv_with_fixed_classes() {
        let schema = CsvSchema {
            classes: Some(strings(&["a", "b", "c"])),
            ..Default::default()
        };
        let ds = parse_csv("x,y\n1,c\n2,a\n", &schema).unwrap();
        assert_eq!(ds.y.to_row_major(), vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert!(parse_csv("x,y\n1,d\n", &schema).is_err());
    }

    #[test]
    fn csv_regression_detected() {
        let ds = parse_csv("x,y\n1,0.5\n2,0.25\n3,0.125\n", &CsvSchema::default()).unwrap();
        assert_eq!(ds.kind, TaskKind::Regression);
        assert_eq!(ds.y.column(0), vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn labelled_csv_round_trip() {
        let (train, _) = gen_spiral(3, 4, 0.1, 2).unwrap();
        let back = parse_csv(&train.to_labelled_csv_string(), &CsvSchema::default()).unwrap();
        assert_eq!(back, train);
    }
}
