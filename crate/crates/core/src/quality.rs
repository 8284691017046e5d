//! Per-feature quality.
//!
//! Two measures are kept for every selected feature:
//!
//! * the practical quality `q(s)`, the search fitness of the singleton `{s}`;
//! * the formal quality `Q(s)`, the average over the learner's candidate pool
//!   of how much each model depends on `s`, weighted towards near-optimal
//!   models by the distortion `T(g) = ((score - min) / (max - min))^p`.
//!
//! A model's dependence on a binary feature is measured by flip influence:
//! the fraction of data rows on which toggling the feature changes the
//! model's output. Normalizing by the most influential feature of the same
//! model gives `q_of(g, s)` in `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::infomeasure::{self, FeatureSet, FitnessConfig};
use crate::learner::{CandidateRecord, RuleModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualitySource {
    /// Singleton fitness `q(s)`.
    #[default]
    MiFitness,
    /// Pool-weighted formal quality `Q(s)`.
    FormalQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityConfig {
    /// Distortion exponent.
    pub p: f64,
    pub source: QualitySource,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            p: 2.0,
            source: QualitySource::MiFitness,
        }
    }
}

/// Score bounds used to normalize learner scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBounds {
    pub min: f64,
    pub max: f64,
}

impl ScoreBounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::Config(format!(
                "invalid score bounds [{min}, {max}]"
            )));
        }
        Ok(ScoreBounds { min, max })
    }

    /// Analytic bounds of "minus the number of errors" on `d`.
    pub fn for_dataset(d: &Dataset) -> Self {
        ScoreBounds {
            min: -(d.n_rows() as f64),
            max: 0.0,
        }
    }
}

pub fn q_practical(d: &Dataset, feature: &str, cfg: &FitnessConfig) -> Result<f64> {
    infomeasure::fitness(d, &FeatureSet::from_iter([feature]), cfg)
}

/// Fraction of rows of `d` on which flipping `feature` changes `g`'s output.
pub fn influence(g: &RuleModel, feature: &str, d: &Dataset) -> Result<f64> {
    if !g.uses(feature) {
        return Ok(0.0);
    }
    let on = g.predict_forced(d, feature, true)?;
    let off = g.predict_forced(d, feature, false)?;
    Ok(on.hamming(&off) as f64 / d.n_rows() as f64)
}

/// `influence(g, f) / max_j influence(g, j)` over the features of `g`; zero
/// for constant models and for models no feature of which matters on `d`.
pub fn q_of(g: &RuleModel, feature: &str, d: &Dataset) -> Result<f64> {
    Ok(model_qualities(g, d)?
        .into_iter()
        .find(|(f, _)| f == feature)
        .map_or(0.0, |(_, q)| q))
}

fn model_qualities(g: &RuleModel, d: &Dataset) -> Result<Vec<(String, f64)>> {
    let feats = g.features();
    let infl = feats
        .iter()
        .map(|f| Ok((f.to_string(), influence(g, f, d)?)))
        .collect::<Result<Vec<_>>>()?;
    let max = infl.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    Ok(infl
        .into_iter()
        .map(|(f, v)| (f, if max > 0.0 { v / max } else { 0.0 }))
        .collect())
}

/// `((score - min) / (max - min))^p`, with a degenerate range giving 0.
pub fn distortion(score: f64, bounds: ScoreBounds, p: f64) -> f64 {
    let span = bounds.max - bounds.min;
    if span <= 0.0 {
        return 0.0;
    }
    ((score - bounds.min) / span).clamp(0.0, 1.0).powf(p)
}

/// Formal quality of `feature`: the distortion-weighted mean of `q_of` over
/// the pool, in `[0, 1]`.
pub fn q_feature(
    pool: &[CandidateRecord],
    feature: &str,
    d: &Dataset,
    bounds: ScoreBounds,
    cfg: &QualityConfig,
) -> Result<f64> {
    Ok(q_features(pool, &[feature], d, bounds, cfg)?[0])
}

/// [`q_feature`] for several features, sharing the per-model work.
pub fn q_features<S: AsRef<str>>(
    pool: &[CandidateRecord],
    features: &[S],
    d: &Dataset,
    bounds: ScoreBounds,
    cfg: &QualityConfig,
) -> Result<Vec<f64>> {
    let (weighted, total) = accumulate(pool, features, d, bounds, cfg)?;
    Ok(weighted
        .into_iter()
        .map(|w| {
            if total > 0.0 {
                (w / total).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect())
}

/// Pool average of `q_of · T` without dividing by the total weight; the
/// Monte-Carlo estimate of the unnormalized integral.
pub fn q_feature_unnormalized(
    pool: &[CandidateRecord],
    feature: &str,
    d: &Dataset,
    bounds: ScoreBounds,
    cfg: &QualityConfig,
) -> Result<f64> {
    let (weighted, _) = accumulate(pool, &[feature], d, bounds, cfg)?;
    Ok(weighted[0] / pool.len() as f64)
}

fn accumulate<S: AsRef<str>>(
    pool: &[CandidateRecord],
    features: &[S],
    d: &Dataset,
    bounds: ScoreBounds,
    cfg: &QualityConfig,
) -> Result<(Vec<f64>, f64)> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut weighted = vec![0.0; features.len()];
    let mut total = 0.0;
    for cand in pool {
        let t = distortion(cand.score, bounds, cfg.p);
        total += t;
        if t == 0.0 {
            continue;
        }
        let qs = model_qualities(&cand.model, d)?;
        for (w, f) in weighted.iter_mut().zip(features) {
            if let Some((_, q)) = qs.iter().find(|(name, _)| name == f.as_ref()) {
                *w += q * t;
            }
        }
    }
    Ok((weighted, total))
}
