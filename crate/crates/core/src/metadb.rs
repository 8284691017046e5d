//! Repository of solved problems.
//!
//! Each entry records the best features found for a problem together with
//! their qualities, the score bounds of the learning problem, the learner's
//! candidate pool and the problem's pattern distribution, so that neighbour
//! queries never need the original dataset files.
//!
//! The on-disk form is one JSON document:
//!
//! ```text
//! { "entries": [ { "id", "min_score", "max_score",
//!                  "scored_features": [ { "name", "q", "Q"? } ],
//!                  "candidates": [ { "features": [..], "score", "model" } ],
//!                  "distribution": [ { "pattern": [..], "p" } ] } ] }
//! ```
//!
//! Patterns list feature names, plus `<target>` when the target is 1.
//! Floats are written in shortest round-trip form, so a save/load cycle is
//! bit-exact.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::infomeasure::FeatureSet;
use crate::learner::{CandidateRecord, RuleModel};
use crate::metricspace::{to_distribution, DistanceIndex, Pattern, PatternDistribution};
use crate::quality::QualitySource;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredFeature {
    pub name: String,
    /// Singleton fitness.
    pub q: f64,
    /// Formal pool quality, in `[0, 1]`.
    pub big_q: Option<f64>,
}

impl ScoredFeature {
    pub fn quality(&self, source: QualitySource) -> f64 {
        match source {
            QualitySource::MiFitness => self.q,
            QualitySource::FormalQ => self.big_q.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaDbEntry {
    pub id: String,
    pub scored_features: Vec<ScoredFeature>,
    pub min_score: f64,
    pub max_score: f64,
    pub candidates: Vec<CandidateRecord>,
    pub distribution: PatternDistribution,
}

impl MetaDbEntry {
    /// The best feature set recorded for this problem.
    pub fn feature_set(&self) -> FeatureSet {
        self.scored_features
            .iter()
            .map(|f| f.name.clone())
            .collect()
    }

    /// Stored quality of `name`, or 0 when the feature is not recorded.
    pub fn quality(&self, name: &str, source: QualitySource) -> f64 {
        self.scored_features
            .iter()
            .find(|f| f.name == name)
            .map_or(0.0, |f| f.quality(source))
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(path, message)| Error::Schema {
            path: format!("{}{path}", self.id),
            message,
        })
    }

    /// Returns (relative element path, message) of the first violation.
    fn check(&self) -> std::result::Result<(), (String, String)> {
        let fail = |path: String, msg: &str| Err((path, msg.to_string()));
        if !(self.min_score.is_finite() && self.max_score.is_finite()) {
            return fail(".min_score".into(), "score bounds must be finite");
        }
        if self.min_score > self.max_score {
            return fail(".max_score".into(), "max_score is below min_score");
        }
        let mut names = std::collections::HashSet::new();
        for (i, f) in self.scored_features.iter().enumerate() {
            if !names.insert(f.name.as_str()) {
                return fail(format!(".scored_features[{i}].name"), "duplicate feature");
            }
            if !(f.q.is_finite() && f.q >= 0.0) {
                return fail(
                    format!(".scored_features[{i}].q"),
                    "q must be finite and >= 0",
                );
            }
            if f.big_q.is_some_and(|q| !(0.0..=1.0).contains(&q)) {
                return fail(format!(".scored_features[{i}].Q"), "Q must be in [0, 1]");
            }
        }
        for (i, c) in self.candidates.iter().enumerate() {
            if c.score.is_nan() || c.score > 0.0 {
                return fail(
                    format!(".candidates[{i}].score"),
                    "scores are minus an error count",
                );
            }
            if c.score < self.min_score || c.score > self.max_score {
                return fail(
                    format!(".candidates[{i}].score"),
                    "score outside [min_score, max_score]",
                );
            }
            if c.features != c.model.features() {
                return fail(
                    format!(".candidates[{i}].features"),
                    "features differ from the model's",
                );
            }
        }
        Ok(())
    }
}

/// Problems keyed by id in insertion order, with a k-NN index over their
/// distributions that always holds exactly the stored ids.
#[derive(Debug, Clone, Default)]
pub struct MetaDb {
    entries: IndexMap<String, MetaDbEntry>,
    index: DistanceIndex,
}

impl PartialEq for MetaDb {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl MetaDb {
    pub fn new() -> Self {
        MetaDb::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&MetaDbEntry> {
        self.entries.get(id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &MetaDbEntry> {
        self.entries.values()
    }

    pub fn index(&self) -> &DistanceIndex {
        &self.index
    }

    /// Stores `entry`, replacing any entry with the same id.
    pub fn upsert(&mut self, entry: MetaDbEntry) -> Result<()> {
        entry.validate()?;
        let id = entry.id.clone();
        match self.entries.get_mut(&id) {
            Some(old) => {
                let moved = old.distribution != entry.distribution;
                *old = entry;
                if moved {
                    self.rebuild_index();
                }
            }
            None => {
                self.index.insert(id.clone(), entry.distribution.clone())?;
                self.entries.insert(id, entry);
            }
        }
        Ok(())
    }

    fn rebuild_index(&mut self) {
        let mut index = DistanceIndex::new();
        for (id, e) in &self.entries {
            index
                .insert(id.clone(), e.distribution.clone())
                .expect("entry ids are unique");
        }
        self.index = index;
    }

    /// The `min(k, len)` entries nearest to `query`, ascending by distance.
    pub fn neighbors(&self, query: &Dataset, k: usize) -> Vec<(&MetaDbEntry, f64)> {
        self.neighbors_of(&to_distribution(query), k)
    }

    pub fn neighbors_of(&self, query: &PatternDistribution, k: usize) -> Vec<(&MetaDbEntry, f64)> {
        if self.entries.is_empty() || k == 0 {
            return Vec::new();
        }
        self.index
            .knn(query, k)
            .expect("index is non-empty")
            .into_iter()
            .map(|(id, d)| (&self.entries[&id], d))
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let doc = Document {
            entries: self.entries.values().map(EntryDoc::from).collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("document is serializable");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MetaDb> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MetaDb::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<MetaDb> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        let mut db = MetaDb::new();
        for (i, e) in doc.entries.into_iter().enumerate() {
            let entry = e.into_entry(i)?;
            if db.entries.contains_key(&entry.id) {
                return Err(Error::Schema {
                    path: format!("entries[{i}].id"),
                    message: format!("duplicate id `{}`", entry.id),
                });
            }
            if let Err((rel, message)) = entry.check() {
                return Err(Error::Schema {
                    path: format!("entries[{i}]{rel}"),
                    message,
                });
            }
            db.upsert(entry)?;
        }
        Ok(db)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    id: String,
    min_score: f64,
    max_score: f64,
    scored_features: Vec<FeatureDoc>,
    candidates: Vec<CandidateDoc>,
    distribution: Vec<PatternDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureDoc {
    name: String,
    q: f64,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    big_q: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateDoc {
    features: Vec<String>,
    score: f64,
    model: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternDoc {
    pattern: Vec<String>,
    p: f64,
}

impl From<&MetaDbEntry> for EntryDoc {
    fn from(e: &MetaDbEntry) -> Self {
        EntryDoc {
            id: e.id.clone(),
            min_score: e.min_score,
            max_score: e.max_score,
            scored_features: e
                .scored_features
                .iter()
                .map(|f| FeatureDoc {
                    name: f.name.clone(),
                    q: f.q,
                    big_q: f.big_q,
                })
                .collect(),
            candidates: e
                .candidates
                .iter()
                .map(|c| CandidateDoc {
                    features: c.features.to_vec(),
                    score: c.score,
                    model: c.model_digest(),
                })
                .collect(),
            distribution: e
                .distribution
                .support()
                .iter()
                .map(|(pat, p)| PatternDoc {
                    pattern: pat.to_tokens(),
                    p: *p,
                })
                .collect(),
        }
    }
}

impl EntryDoc {
    fn into_entry(self, i: usize) -> Result<MetaDbEntry> {
        let schema = |path: String, message: String| Error::Schema { path, message };
        let candidates = self
            .candidates
            .into_iter()
            .enumerate()
            .map(|(j, c)| {
                let model = RuleModel::parse(&c.model).map_err(|e| {
                    schema(format!("entries[{i}].candidates[{j}].model"), e.to_string())
                })?;
                let features: FeatureSet = c.features.into_iter().collect();
                Ok(CandidateRecord {
                    features,
                    score: c.score,
                    model,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let support = self
            .distribution
            .into_iter()
            .map(|p| (Pattern::from_tokens(&p.pattern), p.p))
            .collect();
        let distribution = PatternDistribution::from_probabilities(support)
            .map_err(|e| schema(format!("entries[{i}].distribution"), e.to_string()))?;
        Ok(MetaDbEntry {
            id: self.id,
            scored_features: self
                .scored_features
                .into_iter()
                .map(|f| ScoredFeature {
                    name: f.name,
                    q: f.q,
                    big_q: f.big_q,
                })
                .collect(),
            min_score: self.min_score,
            max_score: self.max_score,
            candidates,
            distribution,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::to_distribution;

    fn dataset(id: &str, table: &[&[u8]]) -> Dataset {
        Dataset::from_dense(id, &["word1", "word2"], table).unwrap()
    }

    pub(crate) fn worked_datasets() -> [Dataset; 3] {
        [
            dataset("D1", &[&[0, 0, 1], &[0, 1, 1], &[0, 0, 1], &[1, 0, 0]]),
            dataset("D2", &[&[1, 1, 1], &[1, 1, 1], &[1, 0, 1], &[0, 0, 0]]),
            dataset("D3", &[&[1, 1, 1], &[0, 1, 1], &[1, 0, 1], &[0, 0, 0]]),
        ]
    }

    fn entry_for(d: &Dataset) -> MetaDbEntry {
        MetaDbEntry {
            id: d.id().to_string(),
            scored_features: vec![
                ScoredFeature {
                    name: "word1".into(),
                    q: 0.25,
                    big_q: Some(1.0),
                },
                ScoredFeature {
                    name: "word2".into(),
                    q: 0.1,
                    big_q: None,
                },
            ],
            min_score: -4.0,
            max_score: 0.0,
            candidates: vec![
                CandidateRecord::new(RuleModel::literal("word1", false), -1.0),
                CandidateRecord::new(RuleModel::constant(true), -1.0),
            ],
            distribution: to_distribution(d),
        }
    }

    #[test]
    fn upsert_then_lookup_and_replace() {
        let [d1, ..] = worked_datasets();
        let mut db = MetaDb::new();
        db.upsert(entry_for(&d1)).unwrap();
        assert_eq!(db.get("D1"), Some(&entry_for(&d1)));
        let mut newer = entry_for(&d1);
        newer.scored_features.pop();
        db.upsert(newer.clone()).unwrap();
        assert_eq!(db.len(), 1);
        assert_eq!(db.get("D1"), Some(&newer));
        assert_eq!(db.index().len(), 1);
    }

    #[test]
    fn replacing_distribution_rebuilds_index() {
        let [d1, d2, d3] = worked_datasets();
        let mut db = MetaDb::new();
        db.upsert(entry_for(&d1)).unwrap();
        db.upsert(entry_for(&d2)).unwrap();
        let mut moved = entry_for(&d3);
        moved.id = "D1".into();
        db.upsert(moved).unwrap();
        let hits = db.neighbors(&d3, 1);
        assert_eq!(hits[0].0.id, "D1");
        assert_eq!(hits[0].1, 0.0);
        assert_eq!(db.index().len(), 2);
    }

    #[test]
    fn neighbors_of_worked_example() {
        let [d1, d2, d3] = worked_datasets();
        let mut db = MetaDb::new();
        assert!(db.neighbors(&d2, 3).is_empty());
        for d in [&d1, &d2, &d3] {
            db.upsert(entry_for(d)).unwrap();
        }
        let hits = db.neighbors(&d2, 2);
        assert_eq!(hits.len(), 2);
        assert_eq!((hits[0].0.id.as_str(), hits[0].1), ("D2", 0.0));
        assert_eq!(hits[1].0.id, "D3");
        assert!((hits[1].1 - 0.3945).abs() < 1e-4);
    }

    #[test]
    fn rejects_invalid_entries() {
        let [d1, ..] = worked_datasets();
        let mut db = MetaDb::new();
        let mut e = entry_for(&d1);
        e.max_score = -2.0;
        assert!(matches!(db.upsert(e), Err(Error::Schema { .. })));
        let mut e = entry_for(&d1);
        e.scored_features[0].big_q = Some(1.5);
        assert!(db.upsert(e).is_err());
        assert!(db.is_empty());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meta.json");
        let [d1, d2, _] = worked_datasets();
        let mut db = MetaDb::new();
        db.upsert(entry_for(&d1)).unwrap();
        db.upsert(entry_for(&d2)).unwrap();
        db.save(&path).unwrap();
        let back = MetaDb::load(&path).unwrap();
        assert_eq!(back, db);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"Q\": 1.0"));
        assert!(text.contains("<target>"));
    }

    fn schema_path(text: &str) -> String {
        match MetaDb::from_json(text) {
            Err(Error::Schema { path, .. }) => path,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_element_path() {
        let [d1, ..] = worked_datasets();
        let mut db = MetaDb::new();
        db.upsert(entry_for(&d1)).unwrap();
        let doc = serde_json::to_value(Document {
            entries: db.entries().map(EntryDoc::from).collect(),
        })
        .unwrap();

        let mut v = doc.clone();
        v["entries"][0].as_object_mut().unwrap().remove("min_score");
        assert_eq!(schema_path(&v.to_string()), "entries[0]");

        let mut v = doc.clone();
        v["entries"][0]["candidates"][1]["score"] = serde_json::json!("high");
        assert_eq!(
            schema_path(&v.to_string()),
            "entries[0].candidates[1].score"
        );

        let mut v = doc.clone();
        v["entries"][0]["candidates"][0]["model"] = serde_json::json!("(xor a b)");
        assert_eq!(
            schema_path(&v.to_string()),
            "entries[0].candidates[0].model"
        );

        let mut v = doc.clone();
        v["entries"][0]["candidates"][0]["score"] = serde_json::json!(-9.0);
        assert_eq!(
            schema_path(&v.to_string()),
            "entries[0].candidates[0].score"
        );

        let mut v = doc;
        v["entries"][0]["distribution"][0]["p"] = serde_json::json!(0.9);
        assert_eq!(schema_path(&v.to_string()), "entries[0].distribution");
    }
}
