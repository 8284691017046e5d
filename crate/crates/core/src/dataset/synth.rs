//! Synthetic collections with planted boolean concepts.
//!
//! Every dataset draws its vocabulary from one global word pool. Datasets are
//! grouped in clusters; each cluster owns a planted set of informative words,
//! and a dataset's informative words come from its cluster's planted set with
//! probability `cluster_tightness` (otherwise from the pool at large). The
//! target is a noisy conjunction or 2-feature XOR of the informative words;
//! all other words are independent sparse noise.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetCollection, Row};
use crate::error::{Error, Result};
use crate::infomeasure::FeatureSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConceptKind {
    /// Conjunction or XOR, chosen per dataset from the seed.
    #[default]
    Mixed,
    Conjunction,
    Xor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n_datasets: usize,
    pub n_clusters: usize,
    /// Vocabulary size of each dataset.
    pub features_per_vocab: usize,
    pub rows_per_dataset: usize,
    /// Informative features per dataset, and size of each cluster's planted set.
    pub planted_set_size: usize,
    pub label_noise_rate: f64,
    pub cluster_tightness: f64,
    pub rng_seed: u64,
    #[serde(default)]
    pub concept: ConceptKind,
    /// Probability that a noise word is present in a row.
    #[serde(default = "default_noise_feature_rate")]
    pub noise_feature_rate: f64,
    /// Probability that an informative word is present in a row.
    #[serde(default = "default_informative_rate")]
    pub informative_rate: f64,
    /// Size of the global word pool; defaults to twice the vocabulary size
    /// plus room for every cluster's planted set.
    #[serde(default)]
    pub pool_size: Option<usize>,
}

fn default_noise_feature_rate() -> f64 {
    0.02
}

fn default_informative_rate() -> f64 {
    0.5
}

impl SynthSpec {
    pub fn new(
        n_datasets: usize,
        n_clusters: usize,
        features_per_vocab: usize,
        rows_per_dataset: usize,
        planted_set_size: usize,
    ) -> Self {
        SynthSpec {
            n_datasets,
            n_clusters,
            features_per_vocab,
            rows_per_dataset,
            planted_set_size,
            label_noise_rate: 0.0,
            cluster_tightness: 1.0,
            rng_seed: 0,
            concept: ConceptKind::Mixed,
            noise_feature_rate: default_noise_feature_rate(),
            informative_rate: default_informative_rate(),
            pool_size: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_datasets == 0
            || self.n_clusters == 0
            || self.features_per_vocab == 0
            || self.rows_per_dataset == 0
        {
            return bad("all counts must be positive");
        }
        if self.n_clusters > self.n_datasets {
            return bad("n_clusters must not exceed n_datasets");
        }
        if self.planted_set_size == 0 || self.planted_set_size > self.features_per_vocab {
            return bad("planted_set_size must be in 1..=features_per_vocab");
        }
        if !(0.0..1.0).contains(&self.label_noise_rate) {
            return bad("label_noise_rate must be in [0, 1)");
        }
        for (name, v) in [
            ("cluster_tightness", self.cluster_tightness),
            ("noise_feature_rate", self.noise_feature_rate),
            ("informative_rate", self.informative_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1]")));
            }
        }
        if self.pool() < self.n_clusters * self.planted_set_size + self.features_per_vocab {
            return bad("pool_size too small for planted sets plus one vocabulary");
        }
        Ok(())
    }

    fn pool(&self) -> usize {
        self.pool_size
            .unwrap_or(2 * self.features_per_vocab + self.n_clusters * self.planted_set_size)
    }
}

/// Ground truth for one generated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTruth {
    pub cluster: usize,
    pub informative: FeatureSet,
    pub concept: ConceptKind,
}

pub fn generate_collection(spec: &SynthSpec) -> Result<DatasetCollection> {
    generate_collection_with_truth(spec).map(|(c, _)| c)
}

pub fn generate_collection_with_truth(
    spec: &SynthSpec,
) -> Result<(DatasetCollection, Vec<PlantedTruth>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let pool = spec.pool();
    let width = (pool - 1).to_string().len().max(4);
    let word = |i: usize| format!("w{i:0width$}");

    // Planted sets are disjoint across clusters.
    let mut order: Vec<usize> = (0..pool).collect();
    order.shuffle(&mut rng);
    let planted: Vec<Vec<usize>> = order
        .chunks(spec.planted_set_size)
        .take(spec.n_clusters)
        .map(<[usize]>::to_vec)
        .collect();

    let mut clusters: Vec<usize> = (0..spec.n_datasets).map(|i| i % spec.n_clusters).collect();
    clusters.shuffle(&mut rng);

    let digits = spec.n_datasets.to_string().len().max(3);
    let mut datasets = Vec::with_capacity(spec.n_datasets);
    let mut truth = Vec::with_capacity(spec.n_datasets);
    for (di, &cluster) in clusters.iter().enumerate() {
        let mut taken = vec![false; pool];
        let mut informative = Vec::with_capacity(spec.planted_set_size);
        for &w in &planted[cluster] {
            let pick = if rng.gen_bool(spec.cluster_tightness) && !taken[w] {
                w
            } else {
                draw_free(&mut rng, &taken)
            };
            taken[pick] = true;
            informative.push(pick);
        }
        let mut vocab = informative.clone();
        while vocab.len() < spec.features_per_vocab {
            let w = draw_free(&mut rng, &taken);
            taken[w] = true;
            vocab.push(w);
        }
        vocab.sort_unstable();

        let concept = match spec.concept {
            ConceptKind::Mixed if spec.planted_set_size >= 2 => {
                if rng.gen_bool(0.5) {
                    ConceptKind::Conjunction
                } else {
                    ConceptKind::Xor
                }
            }
            ConceptKind::Xor if spec.planted_set_size >= 2 => ConceptKind::Xor,
            _ => ConceptKind::Conjunction,
        };

        let col_of: Vec<usize> = informative
            .iter()
            .map(|w| {
                vocab
                    .binary_search(w)
                    .expect("informative word is in vocab")
            })
            .collect();
        let mut rows = Vec::with_capacity(spec.rows_per_dataset);
        for _ in 0..spec.rows_per_dataset {
            let mut present = Vec::new();
            for (col, w) in vocab.iter().enumerate() {
                let rate = if informative.contains(w) {
                    spec.informative_rate
                } else {
                    spec.noise_feature_rate
                };
                if rng.gen_bool(rate) {
                    present.push(col as u32);
                }
            }
            let has = |c: usize| present.binary_search(&(c as u32)).is_ok();
            let clean = match concept {
                ConceptKind::Xor => has(col_of[0]) ^ has(col_of[1]),
                _ => col_of.iter().all(|&c| has(c)),
            };
            let target = clean ^ rng.gen_bool(spec.label_noise_rate);
            rows.push(Row::new(present, target));
        }
        let names = vocab.iter().map(|&w| word(w)).collect();
        datasets.push(Dataset::new(format!("ds_{di:0digits$}"), names, rows)?);
        truth.push(PlantedTruth {
            cluster,
            informative: informative.iter().map(|&w| word(w)).collect(),
            concept,
        });
    }
    Ok((DatasetCollection::new(datasets)?, truth))
}

fn draw_free(rng: &mut ChaCha8Rng, taken: &[bool]) -> usize {
    loop {
        let w = rng.gen_range(0..taken.len());
        if !taken[w] {
            return w;
        }
    }
}
