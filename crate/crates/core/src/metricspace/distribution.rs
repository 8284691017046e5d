use std::cmp::Ordering;

use crate::dataset::{Dataset, TARGET_MARKER};
use crate::error::{Error, Result};
use crate::infomeasure::FeatureSet;

/// A row pattern: the names of the features present in a row, plus whether
/// the target is 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    /// Sorted, duplicate-free.
    pub features: Vec<String>,
    pub target: bool,
}

impl Pattern {
    pub fn new(mut features: Vec<String>, target: bool) -> Self {
        features.sort();
        features.dedup();
        Pattern { features, target }
    }

    /// Names with [`TARGET_MARKER`] appended when the target is 1.
    pub fn to_tokens(&self) -> Vec<String> {
        let mut t = self.features.clone();
        if self.target {
            t.push(TARGET_MARKER.to_string());
        }
        t
    }

    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Self {
        let mut target = false;
        let mut features = Vec::with_capacity(tokens.len());
        for t in tokens {
            if t.as_ref() == TARGET_MARKER {
                target = true;
            } else {
                features.push(t.as_ref().to_string());
            }
        }
        Pattern::new(features, target)
    }
}

/// Empirical distribution of row patterns; support sorted by pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternDistribution {
    support: Vec<(Pattern, f64)>,
}

impl PatternDistribution {
    /// Checks that every probability is positive, patterns are distinct and
    /// the total mass is 1 within 1e-12.
    pub fn from_probabilities(mut support: Vec<(Pattern, f64)>) -> Result<Self> {
        support.sort_by(|a, b| a.0.cmp(&b.0));
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("duplicate pattern in distribution".into()));
        }
        if support.iter().any(|(_, p)| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Config(
                "pattern probabilities must be positive".into(),
            ));
        }
        let mass: f64 = support.iter().map(|(_, p)| p).sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("probabilities sum to {mass}, not 1")));
        }
        Ok(PatternDistribution { support })
    }

    pub fn support(&self) -> &[(Pattern, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability(&self, pattern: &Pattern) -> f64 {
        self.support
            .binary_search_by(|(p, _)| p.cmp(pattern))
            .map_or(0.0, |i| self.support[i].1)
    }
}

/// Each row becomes the set of its present feature names (plus the target
/// marker when the target is 1) with probability multiplicity / n_rows.
pub fn to_distribution(d: &Dataset) -> PatternDistribution {
    to_distribution_projected(d, None)
}

/// Like [`to_distribution`], but patterns only keep features in `projection`
/// when one is given.
pub fn to_distribution_projected(
    d: &Dataset,
    projection: Option<&FeatureSet>,
) -> PatternDistribution {
    let names = d.features();
    let mut patterns: Vec<Pattern> = d
        .rows()
        .iter()
        .map(|row| {
            let features = row
                .present
                .iter()
                .map(|&i| &names[i as usize])
                .filter(|n| projection.is_none_or(|p| p.contains(n)))
                .cloned()
                .collect();
            Pattern::new(features, row.target)
        })
        .collect();
    patterns.sort();
    let n = d.n_rows() as f64;
    let mut support: Vec<(Pattern, f64)> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for p in patterns {
        match support.last() {
            Some((last, _)) if *last == p => *counts.last_mut().unwrap() += 1,
            _ => {
                support.push((p, 0.0));
                counts.push(1);
            }
        }
    }
    for ((_, prob), c) in support.iter_mut().zip(counts) {
        *prob = c as f64 / n;
    }
    PatternDistribution { support }
}

/// Jensen-Shannon divergence in bits, in `[0, 1]`.
///
/// Evaluated term by term over the merged supports; every term is symmetric
/// in its two arguments, so `jsd(p, q) == jsd(q, p)` exactly.
pub fn jsd(p: &PatternDistribution, q: &PatternDistribution) -> f64 {
    let (a, b) = (&p.support, &q.support);
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => Ordering::Less,
            (None, _) => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                sum += a[i].1;
                i += 1;
            }
            Ordering::Greater => {
                sum += b[j].1;
                j += 1;
            }
            Ordering::Equal => {
                let (x, y) = (a[i].1, b[j].1);
                let m = x + y;
                sum += x * (2.0 * x / m).log2() + y * (2.0 * y / m).log2();
                i += 1;
                j += 1;
            }
        }
    }
    (0.5 * sum).clamp(0.0, 1.0)
}

/// Square root of [`jsd`]; a metric bounded by 1.
pub fn distance(p: &PatternDistribution, q: &PatternDistribution) -> f64 {
    jsd(p, q).sqrt()
}

pub fn dataset_distance(a: &Dataset, b: &Dataset) -> f64 {
    distance(&to_distribution(a), &to_distribution(b))
}

/// [`dataset_distance`] restricted to a projection of the vocabulary.
pub fn dataset_distance_projected(a: &Dataset, b: &Dataset, projection: &FeatureSet) -> f64 {
    distance(
        &to_distribution_projected(a, Some(projection)),
        &to_distribution_projected(b, Some(projection)),
    )
}
