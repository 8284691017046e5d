//! Choosing which known features to carry over to a new problem.
//!
//! For every feature recorded in the best sets of the `k` nearest solved
//! problems, the probability that it also belongs to the new problem's best
//! set is estimated as a distance-weighted mean of its stored qualities,
//! with weights `1 / (c + d²)`. Features reaching the transfer threshold `t`
//! seed the search.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::infomeasure::FeatureSet;
use crate::metadb::{MetaDb, MetaDbEntry};
use crate::quality::QualitySource;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    pub k: usize,
    /// Transfer threshold on the estimated probability.
    pub t: f64,
    /// The positive constant `c` in the neighbour weight `1 / (c + d²)`.
    pub c_weight: f64,
    pub quality_source: QualitySource,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            k: 5,
            t: 0.1,
            c_weight: 0.001,
            quality_source: QualitySource::MiFitness,
        }
    }
}

impl TransferConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.c_weight > 0.0 && self.c_weight.is_finite()) {
            return Err(Error::Config("c_weight must be positive".into()));
        }
        if self.t.is_nan() {
            return Err(Error::Config("t must be a number".into()));
        }
        Ok(())
    }
}

pub fn transfer_weight(dist: f64, c_weight: f64) -> f64 {
    1.0 / (c_weight + dist * dist)
}

/// Weighted mean of `feature`'s stored quality over `nbrs`; neighbours that
/// do not record the feature contribute a quality of 0.
pub fn estimate_probability(
    feature: &str,
    nbrs: &[(&MetaDbEntry, f64)],
    cfg: &TransferConfig,
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (entry, dist) in nbrs {
        let w = transfer_weight(*dist, cfg.c_weight);
        num += w * entry.quality(feature, cfg.quality_source);
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Union of the neighbours' best feature sets.
pub fn candidate_features(nbrs: &[(&MetaDbEntry, f64)]) -> FeatureSet {
    nbrs.iter()
        .flat_map(|(e, _)| e.scored_features.iter().map(|f| f.name.clone()))
        .collect()
}

/// Candidates present in `query`'s vocabulary whose estimated probability
/// reaches `cfg.t`.
pub fn select_from_neighbors(
    query: &Dataset,
    nbrs: &[(&MetaDbEntry, f64)],
    cfg: &TransferConfig,
) -> FeatureSet {
    candidate_features(nbrs)
        .iter()
        .filter(|f| query.contains_feature(f))
        .filter(|f| estimate_probability(f, nbrs, cfg) >= cfg.t)
        .collect()
}

/// The seed set for `query`; empty when `db` is empty.
pub fn select_transfer_set(query: &Dataset, db: &MetaDb, cfg: &TransferConfig) -> FeatureSet {
    let nbrs = db.neighbors(query, cfg.k);
    select_from_neighbors(query, &nbrs, cfg)
}
