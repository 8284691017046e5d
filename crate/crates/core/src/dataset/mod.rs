//! Sparse binary classification datasets with globally named features.
//!
//! A row stores the indices of its present (value 1) features and a binary
//! target. Feature names, not indices, carry identity across datasets, so two
//! datasets drawn from the same vocabulary can be compared pattern by pattern.

mod bits;
mod format;
mod synth;

use std::collections::HashMap;
use std::fs;
use std::path::Path;

pub use bits::RowBits;
pub use format::{load_dataset, parse_dataset, render_dataset, save_dataset};
pub use synth::{
    generate_collection, generate_collection_with_truth, ConceptKind, PlantedTruth, SynthSpec,
};

use crate::error::{Error, Result};
use crate::infomeasure::{self, FeatureSet};

/// Reserved marker that stands for `target = 1` inside row patterns. It can
/// never be a feature name.
pub const TARGET_MARKER: &str = "<target>";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    /// Strictly increasing indices of present features.
    pub present: Vec<u32>,
    pub target: bool,
}

impl Row {
    pub fn new(present: Vec<u32>, target: bool) -> Self {
        Row { present, target }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    id: String,
    features: Vec<String>,
    rows: Vec<Row>,
    lookup: HashMap<String, usize>,
    columns: Vec<RowBits>,
    targets: RowBits,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.features == other.features && self.rows == other.rows
    }
}

impl Dataset {
    pub fn new(id: impl Into<String>, features: Vec<String>, rows: Vec<Row>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDataset("dataset has no rows".into()));
        }
        let mut lookup = HashMap::with_capacity(features.len());
        for (i, name) in features.iter().enumerate() {
            validate_name(name)?;
            if lookup.insert(name.clone(), i).is_some() {
                return Err(Error::InvalidDataset(format!(
                    "duplicate feature name `{name}`"
                )));
            }
        }
        let n = rows.len();
        let mut columns = vec![RowBits::zeros(n); features.len()];
        let mut targets = RowBits::zeros(n);
        for (r, row) in rows.iter().enumerate() {
            let mut prev: Option<u32> = None;
            for &i in &row.present {
                if i as usize >= features.len() {
                    return Err(Error::InvalidDataset(format!(
                        "row {r}: index {i} out of range for {} features",
                        features.len()
                    )));
                }
                if prev.is_some_and(|p| p >= i) {
                    return Err(Error::InvalidDataset(format!(
                        "row {r}: indices are not strictly increasing"
                    )));
                }
                prev = Some(i);
                columns[i as usize].set(r);
            }
            if row.target {
                targets.set(r);
            }
        }
        Ok(Dataset {
            id: id.into(),
            features,
            rows,
            lookup,
            columns,
            targets,
        })
    }

    /// Builds a dataset from dense 0/1 rows; the last column is the target.
    pub fn from_dense(id: impl Into<String>, features: &[&str], table: &[&[u8]]) -> Result<Self> {
        let rows = table
            .iter()
            .map(|cells| {
                let (target, values) = cells
                    .split_last()
                    .ok_or_else(|| Error::InvalidDataset("empty dense row".into()))?;
                if values.len() != features.len() {
                    return Err(Error::InvalidDataset("dense row width mismatch".into()));
                }
                let present = values
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(i, _)| i as u32)
                    .collect();
                Ok(Row::new(present, *target != 0))
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(id, features.iter().map(|s| s.to_string()).collect(), rows)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_positive(&self) -> usize {
        self.targets.count_ones()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn contains_feature(&self, name: &str) -> bool {
        self.lookup.contains_key(name)
    }

    /// Rows in which feature `idx` is present.
    pub fn column(&self, idx: usize) -> &RowBits {
        &self.columns[idx]
    }

    /// Rows whose target is 1.
    pub fn targets(&self) -> &RowBits {
        &self.targets
    }

    /// Resolves names to sorted feature indices.
    pub fn resolve(&self, set: &FeatureSet) -> Result<Vec<usize>> {
        let mut idx = set
            .iter()
            .map(|name| {
                self.feature_index(name)
                    .ok_or_else(|| Error::UnknownFeature(name.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        Ok(idx)
    }

    pub fn names_of(&self, indices: &[usize]) -> FeatureSet {
        indices.iter().map(|&i| self.features[i].clone()).collect()
    }

    /// Keeps only the features at `keep` (any order; output follows the
    /// original column order). Rows are re-indexed, row count is unchanged.
    pub fn project(&self, keep: &[usize]) -> Dataset {
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut remap = vec![u32::MAX; self.features.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new as u32;
        }
        let features = keep.iter().map(|&i| self.features[i].clone()).collect();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let present = row
                    .present
                    .iter()
                    .map(|&i| remap[i as usize])
                    .filter(|&i| i != u32::MAX)
                    .collect();
                Row::new(present, row.target)
            })
            .collect();
        Dataset::new(self.id.clone(), features, rows).expect("projection preserves invariants")
    }
}

fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(Error::InvalidDataset(format!("bad feature name {name:?}")));
    }
    if name == TARGET_MARKER {
        return Err(Error::InvalidDataset(format!(
            "`{TARGET_MARKER}` is reserved and cannot name a feature"
        )));
    }
    Ok(())
}

/// Keeps exactly the features whose single-feature mutual information with
/// the target is at least `mi_threshold` bits.
pub fn mi_prefilter(d: &Dataset, mi_threshold: f64) -> Dataset {
    let keep: Vec<usize> = (0..d.n_features())
        .filter(|&i| infomeasure::mutual_information_idx(d, &[i]) >= mi_threshold)
        .collect();
    if keep.len() == d.n_features() {
        return d.clone();
    }
    d.project(&keep)
}

/// An ordered sequence of problems; the order is the arrival order.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetCollection {
    datasets: Vec<Dataset>,
}

impl DatasetCollection {
    pub fn new(datasets: Vec<Dataset>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for d in &datasets {
            if !seen.insert(d.id()) {
                return Err(Error::DuplicateId(d.id().to_string()));
            }
        }
        Ok(DatasetCollection { datasets })
    }

    pub fn datasets(&self) -> &[Dataset] {
        &self.datasets
    }

    pub fn len(&self) -> usize {
        self.datasets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Dataset> {
        self.datasets.iter()
    }

    /// Loads every `*.ds` file of `dir` in lexicographic file-name order; each
    /// dataset's id is its file stem.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut paths = Vec::new();
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_file() && path.extension().is_some_and(|e| e == "ds") {
                paths.push(path);
            }
        }
        paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
        let datasets = paths
            .iter()
            .map(|p| {
                let stem = p
                    .file_stem()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned();
                Ok(load_dataset(p)?.with_id(stem))
            })
            .collect::<Result<Vec<_>>>()?;
        DatasetCollection::new(datasets)
    }

    /// Writes `<dir>/<stem>.ds` per dataset, where the stem is a zero-padded
    /// arrival index so that lexicographic order equals arrival order.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let width = self.datasets.len().to_string().len().max(3);
        self.datasets
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let path = dir.join(format!("ds_{i:0width$}.ds"));
                save_dataset(d, &path)?;
                Ok(path)
            })
            .collect()
    }
}

impl<'a> IntoIterator for &'a DatasetCollection {
    type Item = &'a Dataset;
    type IntoIter = std::slice::Iter<'a, Dataset>;

    fn into_iter(self) -> Self::IntoIter {
        self.datasets.iter()
    }
}
