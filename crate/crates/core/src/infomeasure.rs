//! Empirical information measures and the feature-set fitness.
//!
//! All logarithms are base 2, so the mutual information between a feature
//! set and a binary target lies in `[0, 1]` bits.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// A canonical (sorted, duplicate-free) set of feature names.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSet(BTreeSet<String>);

impl FeatureSet {
    pub fn new() -> Self {
        FeatureSet::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn insert(&mut self, name: impl Into<String>) -> bool {
        self.0.insert(name.into())
    }

    pub fn remove(&mut self, name: &str) -> bool {
        self.0.remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(String::as_str)
    }

    pub fn is_subset(&self, other: &FeatureSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &FeatureSet) -> FeatureSet {
        FeatureSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection_len(&self, other: &FeatureSet) -> usize {
        self.0.intersection(&other.0).count()
    }

    pub fn symmetric_difference_len(&self, other: &FeatureSet) -> usize {
        self.0.symmetric_difference(&other.0).count()
    }

    pub fn to_vec(&self) -> Vec<String> {
        self.0.iter().cloned().collect()
    }
}

impl<S: Into<String>> FromIterator<S> for FeatureSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        FeatureSet(iter.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, name) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(name)?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    /// Confidence weight: larger values penalize big feature sets harder.
    pub b: f64,
    /// Confidence exponent in `[0, 2]`.
    pub r: f64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        FitnessConfig { b: 5.0, r: 1.0 }
    }
}

impl FitnessConfig {
    pub fn with_b(b: f64) -> Self {
        FitnessConfig {
            b,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::Config(format!(
                "b must be finite and >= 0, got {}",
                self.b
            )));
        }
        if !(0.0..=2.0).contains(&self.r) {
            return Err(Error::Config(format!(
                "r must be in [0, 2], got {}",
                self.r
            )));
        }
        Ok(())
    }
}

/// Empirical `I(S; Y)` in bits.
pub fn mutual_information(d: &Dataset, s: &FeatureSet) -> Result<f64> {
    Ok(mutual_information_idx(d, &d.resolve(s)?))
}

/// [`mutual_information`] over already-resolved feature indices.
///
/// Rows are partitioned by their values on `features` (one refinement pass
/// per feature), then the plug-in estimate is summed over the observed
/// (pattern, label) cells.
pub fn mutual_information_idx(d: &Dataset, features: &[usize]) -> f64 {
    if features.is_empty() {
        return 0.0;
    }
    let n = d.n_rows();
    let mut group = vec![0u32; n];
    let mut n_groups = 1usize;
    let mut remap = vec![u32::MAX; 2 * n];
    for &f in features {
        let col = d.column(f);
        remap[..2 * n_groups].fill(u32::MAX);
        let mut next = 0u32;
        for (r, g) in group.iter_mut().enumerate() {
            let key = (*g as usize) * 2 + usize::from(col.get(r));
            if remap[key] == u32::MAX {
                remap[key] = next;
                next += 1;
            }
            *g = remap[key];
        }
        n_groups = next as usize;
    }

    let targets = d.targets();
    let mut total = vec![0u32; n_groups];
    let mut positive = vec![0u32; n_groups];
    for (r, &g) in group.iter().enumerate() {
        total[g as usize] += 1;
        if targets.get(r) {
            positive[g as usize] += 1;
        }
    }
    let nf = n as f64;
    let pos = targets.count_ones() as f64;
    let class = [nf - pos, pos];
    let mut mi = 0.0;
    for (&t, &p) in total.iter().zip(&positive) {
        let cells = [(t - p) as f64, p as f64];
        for (&c, &cy) in cells.iter().zip(&class) {
            if c > 0.0 {
                mi += c / nf * (c * nf / (t as f64 * cy)).log2();
            }
        }
    }
    mi.max(0.0)
}

/// `N / (N + b·|S|)`.
pub fn confidence(d: &Dataset, s: &FeatureSet, cfg: &FitnessConfig) -> f64 {
    confidence_n(d.n_rows(), s.len(), cfg)
}

pub fn confidence_n(n_rows: usize, set_size: usize, cfg: &FitnessConfig) -> f64 {
    let n = n_rows as f64;
    n / (n + cfg.b * set_size as f64)
}

/// `MI(S)^(2-r) · c(S)^r`.
pub fn fitness(d: &Dataset, s: &FeatureSet, cfg: &FitnessConfig) -> Result<f64> {
    Ok(fitness_idx(d, &d.resolve(s)?, cfg))
}

pub fn fitness_idx(d: &Dataset, features: &[usize], cfg: &FitnessConfig) -> f64 {
    let mi = mutual_information_idx(d, features);
    combine(mi, confidence_n(d.n_rows(), features.len(), cfg), cfg.r)
}

fn combine(mi: f64, conf: f64, r: f64) -> f64 {
    if r == 1.0 {
        return mi * conf;
    }
    // powf already gives 0^0 = 1 and 0^x = 0 for x > 0
    mi.powf(2.0 - r) * conf.powf(r)
}
