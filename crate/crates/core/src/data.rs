//! Dataset ingestion, label encoding, stratified splitting and folding, and
//! the 2D synthetic geometries used for the diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Binary classification data: an `n x p` feature matrix and labels in `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Array2<f64>,
    labels: Vec<u8>,
    minority_class: u8,
    feature_names: Option<Vec<String>>,
    label_names: [String; 2],
}

impl Dataset {
    /// Builds a dataset from a feature matrix and `{0,1}` labels.
    pub fn new(name: impl Into<String>, features: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if labels.is_empty() || features.ncols() == 0 {
            return Err(Error::Empty);
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not 0 or 1")));
        }
        for ((row, column), v) in features.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, column });
            }
        }
        let counts = count_classes(&labels);
        if counts[0] == 0 || counts[1] == 0 {
            return Err(Error::SingleClass(1));
        }
        // Ties go to class 1.
        let minority_class = if counts[0] < counts[1] { 0 } else { 1 };
        // Keep rows contiguous so `row()` can hand out slices.
        let features = if features.is_standard_layout() {
            features
        } else {
            features.as_standard_layout().to_owned()
        };
        Ok(Dataset {
            name: name.into(),
            features,
            labels,
            minority_class,
            feature_names: None,
            label_names: ["0".to_string(), "1".to_string()],
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn with_label_names(mut self, names: [String; 2]) -> Self {
        self.label_names = names;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    /// Row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        self.features
            .row(i)
            .to_slice()
            .expect("dataset rows are stored contiguously")
    }

    pub fn row_view(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn minority_class(&self) -> u8 {
        self.minority_class
    }

    pub fn majority_class(&self) -> u8 {
        1 - self.minority_class
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn label_names(&self) -> &[String; 2] {
        &self.label_names
    }

    pub fn class_counts(&self) -> [usize; 2] {
        count_classes(&self.labels)
    }

    /// Fraction of rows in the minority class.
    pub fn minority_fraction(&self) -> f64 {
        self.class_counts()[self.minority_class as usize] as f64 / self.n_samples() as f64
    }

    /// Indices of the rows in each class, ascending.
    pub fn class_indices(&self) -> [Vec<usize>; 2] {
        let mut out = [Vec::new(), Vec::new()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    /// Copies the given rows into a new dataset. The minority class is
    /// inherited from the parent so that recall bookkeeping stays consistent
    /// across splits.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty);
        }
        let p = self.n_features();
        let mut data = Vec::with_capacity(indices.len() * p);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_samples() {
                return Err(Error::InvalidArgument(format!("row index {i} out of range")));
            }
            data.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        let features = Array2::from_shape_vec((indices.len(), p), data)
            .expect("shape matches collected rows");
        Ok(Dataset {
            name: self.name.clone(),
            features,
            labels,
            minority_class: self.minority_class,
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
        })
    }
}

fn count_classes(labels: &[u8]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for &l in labels {
        counts[(l & 1) as usize] += 1;
    }
    counts
}

/// Which CSV column holds the label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// The last column.
    #[default]
    Last,
    Name(String),
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Numeric strings are read as column indices; anything else as a name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Options for [`load_csv`].
#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    /// Raw label mapped to class 1; the other label becomes class 0. Without
    /// it the lexicographically smaller raw label is class 0.
    pub positive_label: Option<String>,
}

/// Loads a headed CSV file. The dataset is named after the file stem.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    read_csv(file, name, options)
}

/// Reads a headed CSV stream into a [`Dataset`].
pub fn read_csv<R: Read>(reader: R, name: impl Into<String>, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least one feature column and a label column".into(),
        ));
    }
    let label_idx = match &options.label_column {
        LabelColumn::Last => headers.len() - 1,
        LabelColumn::Name(n) => headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::MissingColumn(n.clone()))?,
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => return Err(Error::MissingColumn(i.to_string())),
    };

    let p = headers.len() - 1;
    let mut data = Vec::new();
    let mut raw_labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                column: headers[col].clone(),
                row,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    column: if col < label_idx { col } else { col - 1 },
                });
            }
            data.push(v);
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::Empty);
    }

    let distinct: BTreeMap<&str, usize> = raw_labels.iter().fold(BTreeMap::new(), |mut m, l| {
        *m.entry(l.as_str()).or_default() += 1;
        m
    });
    match distinct.len() {
        0 | 1 => return Err(Error::SingleClass(distinct.len())),
        2 => {}
        k => return Err(Error::NotBinary(k)),
    }
    let sorted: Vec<&str> = distinct.keys().copied().collect();
    let label_names: [String; 2] = match &options.positive_label {
        None => [sorted[0].to_string(), sorted[1].to_string()],
        Some(pos) => {
            let other = sorted
                .iter()
                .find(|l| *l != pos)
                .ok_or_else(|| Error::InvalidArgument(format!("positive label `{pos}` not found")))?;
            if !sorted.contains(&pos.as_str()) {
                return Err(Error::InvalidArgument(format!("positive label `{pos}` not found")));
            }
            [other.to_string(), pos.clone()]
        }
    };
    let labels: Vec<u8> = raw_labels
        .iter()
        .map(|l| u8::from(*l == label_names[1]))
        .collect();

    let n = labels.len();
    let features = Array2::from_shape_vec((n, p), data).map_err(|_| {
        Error::InvalidArgument("ragged CSV rows".into())
    })?;
    let feature_names = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    Ok(Dataset::new(name, features, labels)?
        .with_feature_names(feature_names)?
        .with_label_names(label_names))
}

/// Writes the dataset as CSV: feature columns, then a `class` column with the
/// raw label names.
pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(ds, file)
}

pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = match ds.feature_names() {
        Some(names) => names.to_vec(),
        None => (0..ds.n_features()).map(|j| format!("f{j}")).collect(),
    };
    header.push("class".to_string());
    wtr.write_record(&header)?;
    for i in 0..ds.n_samples() {
        let mut rec: Vec<String> = ds.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(ds.label_names()[ds.label(i) as usize].clone());
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Train/test row indices for one repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

/// Stratified train/test split.
///
/// The test set has `ceil(test_fraction * n)` rows. Each class first gets the
/// floor of its proportional share, the remainder goes to the larger classes
/// first, and every class keeps at least one row on each side.
pub fn stratified_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} not in (0, 1)"
        )));
    }
    let by_class = ds.class_indices();
    for (c, idx) in by_class.iter().enumerate() {
        if idx.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: c as u8,
                count: idx.len(),
                needed: 2,
            });
        }
    }
    let n = ds.n_samples();
    let n_test = ((test_fraction * n as f64).ceil() as usize).clamp(2, n - 2);
    let mut take = [0usize; 2];
    for c in 0..2 {
        take[c] = (test_fraction * by_class[c].len() as f64).floor() as usize;
    }
    let mut remainder = n_test.saturating_sub(take[0] + take[1]);
    // Larger class first; ties to class 0.
    let order = if by_class[1].len() > by_class[0].len() { [1, 0] } else { [0, 1] };
    while remainder > 0 {
        let before = remainder;
        for &c in &order {
            if remainder > 0 && take[c] < by_class[c].len() - 1 {
                take[c] += 1;
                remainder -= 1;
            }
        }
        if before == remainder {
            break;
        }
    }
    for c in 0..2 {
        take[c] = take[c].clamp(1, by_class[c].len() - 1);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(n);
    let mut test = Vec::with_capacity(n_test);
    for c in 0..2 {
        let mut idx = by_class[c].clone();
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..take[c]]);
        train.extend_from_slice(&idx[take[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan {
        train_indices: train,
        test_indices: test,
        seed,
    })
}

/// One fold of a k-fold partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
}

/// Stratified k-fold partition: each class is shuffled and dealt round-robin
/// across folds with a counter that runs on from one class to the next, so
/// fold sizes differ by at most one and the earlier folds are the larger ones.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k}, need k >= 2")));
    }
    let by_class = ds.class_indices();
    for (c, idx) in by_class.iter().enumerate() {
        if idx.len() < k {
            return Err(Error::ClassTooSmall {
                class: c as u8,
                count: idx.len(),
                needed: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; ds.n_samples()];
    let mut counter = 0usize;
    for idx in &by_class {
        let mut idx = idx.clone();
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = counter % k;
            counter += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) =
                (0..ds.n_samples()).partition(|&i| assignment[i] == f);
            Fold {
                train_indices: train,
                val_indices: val,
            }
        })
        .collect())
}

/// The 2D geometries used for the per-point and region diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticKind {
    /// Uniform square, labelled by the side of `x1 + x2 = 1`.
    Diagonal,
    /// Two interleaving half circles.
    Moons,
    /// Nested rings of radius 1.0 (class 0) and 0.5 (class 1).
    Circles,
    /// Two isotropic Gaussians whose means are two standard deviations apart.
    Overlap,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 4] = [
        SyntheticKind::Diagonal,
        SyntheticKind::Moons,
        SyntheticKind::Circles,
        SyntheticKind::Overlap,
    ];

    /// Default noise. For `Overlap` this is the per-class standard deviation.
    pub fn default_noise(self) -> f64 {
        match self {
            SyntheticKind::Diagonal => 0.1,
            SyntheticKind::Moons => 0.25,
            SyntheticKind::Circles => 0.1,
            SyntheticKind::Overlap => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SyntheticKind::Diagonal => "diagonal",
            SyntheticKind::Moons => "moons",
            SyntheticKind::Circles => "circles",
            SyntheticKind::Overlap => "overlap",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "diagonal" => Ok(SyntheticKind::Diagonal),
            "moons" => Ok(SyntheticKind::Moons),
            "circles" => Ok(SyntheticKind::Circles),
            "overlap" => Ok(SyntheticKind::Overlap),
            other => Err(Error::InvalidArgument(format!("unknown synthetic kind `{other}`"))),
        }
    }
}

/// Generates a balanced 2D dataset. Class 0 gets `ceil(n/2)` points, class 1
/// the rest; rows are shuffled.
pub fn gen_synthetic(kind: SyntheticKind, n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 20 {
        return Err(Error::InvalidArgument(format!("n = {n}, need n >= 20")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise {noise} must be >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = n / 2;
    let n0 = n - n1;
    let jitter = |rng: &mut ChaCha8Rng, sd: f64| -> f64 {
        if sd == 0.0 {
            0.0
        } else {
            Normal::new(0.0, sd).expect("finite sd").sample(rng)
        }
    };
    let mut points: Vec<([f64; 2], u8)> = Vec::with_capacity(n);
    match kind {
        SyntheticKind::Diagonal => {
            let mut counts = [0usize; 2];
            let want = [n0, n1];
            while counts[0] + counts[1] < n {
                let x1: f64 = rng.random();
                let x2: f64 = rng.random();
                let s = x1 + x2 - 1.0;
                if s == 0.0 {
                    continue;
                }
                let c = usize::from(s > 0.0);
                if counts[c] == want[c] {
                    continue;
                }
                counts[c] += 1;
                points.push(([x1 + jitter(&mut rng, noise), x2 + jitter(&mut rng, noise)], c as u8));
            }
        }
        SyntheticKind::Moons => {
            for i in 0..n0 {
                let t = std::f64::consts::PI * i as f64 / (n0 - 1) as f64;
                points.push((
                    [t.cos() + jitter(&mut rng, noise), t.sin() + jitter(&mut rng, noise)],
                    0,
                ));
            }
            for i in 0..n1 {
                let t = std::f64::consts::PI * i as f64 / (n1 - 1) as f64;
                points.push((
                    [
                        1.0 - t.cos() + jitter(&mut rng, noise),
                        0.5 - t.sin() + jitter(&mut rng, noise),
                    ],
                    1,
                ));
            }
        }
        SyntheticKind::Circles => {
            for (count, radius, class) in [(n0, 1.0, 0u8), (n1, 0.5, 1u8)] {
                for i in 0..count {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                    points.push((
                        [
                            radius * t.cos() + jitter(&mut rng, noise),
                            radius * t.sin() + jitter(&mut rng, noise),
                        ],
                        class,
                    ));
                }
            }
        }
        SyntheticKind::Overlap => {
            let sd = if noise > 0.0 { noise } else { 1.0 };
            for (count, mean, class) in [(n0, -sd, 0u8), (n1, sd, 1u8)] {
                for _ in 0..count {
                    points.push(([mean + jitter(&mut rng, sd), jitter(&mut rng, sd)], class));
                }
            }
        }
    }
    points.shuffle(&mut rng);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (x, c) in points {
        data.extend_from_slice(&x);
        labels.push(c);
    }
    let features = Array2::from_shape_vec((n, 2), data).expect("two columns per point");
    Dataset::new(kind.as_str(), features, labels)?.with_feature_names(vec!["x1".into(), "x2".into()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn labelled(labels: &[u8]) -> Dataset {
        let n = labels.len();
        let features = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
        Dataset::new("t", features, labels.to_vec()).unwrap()
    }

    #[test]
    fn minority_is_rarer_class_with_tie_to_one() {
        assert_eq!(labelled(&[0, 0, 0, 1]).minority_class(), 1);
        assert_eq!(labelled(&[1, 1, 1, 0]).minority_class(), 0);
        assert_eq!(labelled(&[0, 1, 0, 1]).minority_class(), 1);
    }

    #[test]
    fn rejects_non_finite_and_single_class() {
        let x = array![[1.0], [f64::NAN]];
        assert!(matches!(
            Dataset::new("t", x, vec![0, 1]),
            Err(Error::NonFinite { row: 1, column: 0 })
        ));
        let x = array![[1.0], [2.0]];
        assert!(matches!(Dataset::new("t", x, vec![1, 1]), Err(Error::SingleClass(_))));
    }

    #[test]
    fn csv_maps_labels_lexicographically() {
        let text = "a,b,label\n1,2,a\n3,4,a\n5,6,a\n7,8,b\n";
        let ds = read_csv(text.as_bytes(), "t", &CsvOptions::default()).unwrap();
        assert_eq!(ds.labels(), &[0, 0, 0, 1]);
        assert_eq!(ds.minority_class(), 1);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.row(3), &[7.0, 8.0]);
    }

    #[test]
    fn csv_positive_label_override_and_label_column_by_name() {
        let text = "y,a\nb,1\na,2\na,3\n";
        let opts = CsvOptions {
            label_column: "y".parse().unwrap(),
            positive_label: Some("a".into()),
        };
        let ds = read_csv(text.as_bytes(), "t", &opts).unwrap();
        assert_eq!(ds.labels(), &[0, 1, 1]);
        assert_eq!(ds.minority_class(), 0);
    }

    #[test]
    fn csv_errors() {
        let three = "a,label\n1,x\n2,y\n3,z\n";
        assert!(matches!(
            read_csv(three.as_bytes(), "t", &CsvOptions::default()),
            Err(Error::NotBinary(3))
        ));
        let one = "a,label\n1,x\n2,x\n";
        assert!(matches!(
            read_csv(one.as_bytes(), "t", &CsvOptions::default()),
            Err(Error::SingleClass(1))
        ));
        let text = "a,label\n1,x\nfoo,y\n";
        assert!(matches!(
            read_csv(text.as_bytes(), "t", &CsvOptions::default()),
            Err(Error::NonNumeric { .. })
        ));
        let missing = CsvOptions {
            label_column: LabelColumn::Name("nope".into()),
            positive_label: None,
        };
        assert!(matches!(
            read_csv("a,b\n1,x\n".as_bytes(), "t", &missing),
            Err(Error::MissingColumn(_))
        ));
    }

    #[test]
    fn split_counts_for_ten_rows() {
        let ds = labelled(&[0, 0, 0, 0, 0, 0, 1, 1, 1, 1]);
        let plan = stratified_split(&ds, 0.3, 7).unwrap();
        let test0 = plan.test_indices.iter().filter(|&&i| ds.label(i) == 0).count();
        let test1 = plan.test_indices.len() - test0;
        assert_eq!((test0, test1), (2, 1));
        assert_eq!(plan.train_indices.len() + plan.test_indices.len(), 10);
    }

    #[test]
    fn split_needs_two_per_class() {
        let ds = labelled(&[0, 0, 0, 1]);
        assert!(matches!(
            stratified_split(&ds, 0.3, 1),
            Err(Error::ClassTooSmall { class: 1, .. })
        ));
        assert!(stratified_split(&labelled(&[0, 0, 1, 1]), 1.0, 1).is_err());
    }

    #[test]
    fn kfold_balanced_ten() {
        let ds = labelled(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let folds = stratified_kfold(&ds, 5, 3).unwrap();
        assert_eq!(folds.len(), 5);
        for f in &folds {
            assert_eq!(f.val_indices.len(), 2);
            let ones = f.val_indices.iter().filter(|&&i| ds.label(i) == 1).count();
            assert_eq!(ones, 1);
        }
    }

    #[test]
    fn kfold_sizes_for_83_rows() {
        let labels: Vec<u8> = (0..83).map(|i| u8::from(i < 17)).collect();
        let ds = labelled(&labels);
        let folds = stratified_kfold(&ds, 5, 0).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.val_indices.len()).collect();
        assert_eq!(sizes, vec![17, 17, 17, 16, 16]);
        assert!(stratified_kfold(&labelled(&[0, 0, 0, 1, 1, 1]), 4, 0).is_err());
        assert!(stratified_kfold(&ds, 1, 0).is_err());
    }

    #[test]
    fn synthetic_diagonal_without_noise_is_separable() {
        let ds = gen_synthetic(SyntheticKind::Diagonal, 1000, 0.0, 5).unwrap();
        for i in 0..ds.n_samples() {
            let r = ds.row(i);
            let side = r[0] + r[1] - 1.0;
            assert_eq!(ds.label(i) == 1, side > 0.0);
            assert!(side != 0.0);
        }
        assert_eq!(ds.class_counts(), [500, 500]);
    }

    #[test]
    fn synthetic_circles_inner_ring_is_class_one() {
        let ds = gen_synthetic(SyntheticKind::Circles, 1000, 0.0, 5).unwrap();
        for i in 0..ds.n_samples() {
            let r = ds.row(i);
            let radius = (r[0] * r[0] + r[1] * r[1]).sqrt();
            assert_eq!(ds.label(i) == 1, radius < 0.75);
        }
    }

    #[test]
    fn synthetic_rejects_bad_arguments() {
        assert!(gen_synthetic(SyntheticKind::Moons, 10, 0.1, 0).is_err());
        assert!("spiral".parse::<SyntheticKind>().is_err());
        let odd = gen_synthetic(SyntheticKind::Moons, 21, 0.1, 0).unwrap();
        assert_eq!(odd.class_counts(), [11, 10]);
    }
}
