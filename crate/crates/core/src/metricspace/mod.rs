//! Datasets as distributions over row patterns, the square-root
//! Jensen-Shannon distance between them, and a k-NN index.

mod cover_tree;
mod distribution;

use std::collections::HashMap;

pub use distribution::{
    dataset_distance, dataset_distance_projected, distance, jsd, to_distribution,
    to_distribution_projected, Pattern, PatternDistribution,
};

use crate::error::{Error, Result};
use cover_tree::CoverTree;

pub const DEFAULT_BASE: f64 = 2.0;

/// Exact k-NN index over pattern distributions under √JSD.
///
/// Ties are broken by id so that results are fully deterministic and equal
/// to [`DistanceIndex::knn_brute_force`].
#[derive(Debug, Clone)]
pub struct DistanceIndex {
    points: Vec<(String, PatternDistribution)>,
    by_id: HashMap<String, usize>,
    tree: CoverTree,
}

impl Default for DistanceIndex {
    fn default() -> Self {
        DistanceIndex::new()
    }
}

impl DistanceIndex {
    pub fn new() -> Self {
        DistanceIndex::with_base(DEFAULT_BASE)
    }

    /// `base` is the cover tree's expansion constant; must exceed 1.
    pub fn with_base(base: f64) -> Self {
        DistanceIndex {
            points: Vec::new(),
            by_id: HashMap::new(),
            tree: CoverTree::new(base),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&PatternDistribution> {
        self.by_id.get(id).map(|&i| &self.points[i].1)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.points.iter().map(|(id, _)| id.as_str())
    }

    pub fn insert(&mut self, id: impl Into<String>, dist: PatternDistribution) -> Result<()> {
        let id = id.into();
        if self.by_id.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        let idx = self.points.len();
        let points = &self.points;
        self.tree.insert(idx, |a| distance(&points[a].1, &dist));
        self.by_id.insert(id.clone(), idx);
        self.points.push((id, dist));
        Ok(())
    }

    /// The `min(k, len)` nearest points, ascending by (distance, id).
    pub fn knn(&self, query: &PatternDistribution, k: usize) -> Result<Vec<(String, f64)>> {
        self.check_query(k)?;
        let hits = self.tree.knn(
            k,
            |a| distance(query, &self.points[a].1),
            |a, b| self.points[a].0.cmp(&self.points[b].0),
        );
        Ok(hits
            .into_iter()
            .map(|(i, d)| (self.points[i].0.clone(), d))
            .collect())
    }

    /// Linear-scan reference for [`DistanceIndex::knn`].
    pub fn knn_brute_force(
        &self,
        query: &PatternDistribution,
        k: usize,
    ) -> Result<Vec<(String, f64)>> {
        self.check_query(k)?;
        let mut all: Vec<(&str, f64)> = self
            .points
            .iter()
            .map(|(id, p)| (id.as_str(), distance(query, p)))
            .collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        all.truncate(k);
        Ok(all.into_iter().map(|(id, d)| (id.to_string(), d)).collect())
    }

    fn check_query(&self, k: usize) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }

    /// Structural audit of the underlying cover tree.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        self.tree.check_invariants(self.points.len(), |a, b| {
            distance(&self.points[a].1, &self.points[b].1)
        })
    }
}
