//! Stochastic hill climbing over feature sets.
//!
//! Starting from a seed set `S` (empty without transfer), each step toggles
//! `d` distinct features of the vocabulary to produce a batch of
//! `h = min(m / 10, |F|^d)` neighbours at edit distance exactly `d`, where `m`
//! is the remaining evaluation budget. If the best neighbour strictly beats
//! `S` the climb moves there and resets `d` to 1, otherwise `d` grows. The
//! search stops when `d` reaches the cap, the budget runs out, or an optional
//! fitness target is met.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::infomeasure::{fitness_idx, FeatureSet, FitnessConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Total fitness evaluations allowed, including the seed's.
    pub max_evals: usize,
    /// The climb stops once the edit distance reaches this value.
    pub max_edit_distance: usize,
    pub fitness: FitnessConfig,
    pub rng_seed: u64,
    /// Stop as soon as the best fitness reaches this value.
    pub target: Option<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_evals: 10_000,
            max_edit_distance: 5,
            fitness: FitnessConfig::default(),
            rng_seed: 0,
            target: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_evals == 0 {
            return Err(Error::Config("max_evals must be at least 1".into()));
        }
        if self.max_edit_distance == 0 {
            return Err(Error::Config("max_edit_distance must be at least 1".into()));
        }
        if self.target.is_some_and(f64::is_nan) {
            return Err(Error::Config("target must be a number".into()));
        }
        self.fitness.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_set: FeatureSet,
    pub best_fitness: f64,
    pub evals_used: usize,
    /// Evaluation count at which `best_fitness` was first reached.
    pub evals_to_best: usize,
    pub target_reached: bool,
    /// `(evaluation count, best fitness so far)` at the seed and at every
    /// improvement.
    pub trace: Vec<(usize, f64)>,
}

/// Up to `count` distinct sets at symmetric-difference distance exactly `d`
/// from `s`, each obtained by toggling `d` distinct features of `vocab`.
pub fn neighbor_sets(
    s: &FeatureSet,
    d: usize,
    count: usize,
    vocab: &[String],
    rng: &mut ChaCha8Rng,
) -> Vec<FeatureSet> {
    let pos: HashMap<&str, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut current: Vec<usize> = s.iter().filter_map(|n| pos.get(n).copied()).collect();
    current.sort_unstable();
    let fixed: Vec<&str> = s.iter().filter(|n| !pos.contains_key(n)).collect();
    neighbor_indices(&current, d, count, vocab.len(), rng)
        .into_iter()
        .map(|idx| {
            idx.iter()
                .map(|&i| vocab[i].as_str())
                .chain(fixed.iter().copied())
                .collect()
        })
        .collect()
}

fn neighbor_indices(
    current: &[usize],
    d: usize,
    count: usize,
    n_vocab: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    if d == 0 || count == 0 || d > n_vocab {
        return Vec::new();
    }
    let toggles: Vec<Vec<usize>> = if binomial(n_vocab, d) <= count as u128 {
        let mut all = combinations(n_vocab, d);
        all.shuffle(rng);
        all
    } else {
        let mut seen = HashSet::with_capacity(count);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < 10 * count {
            attempts += 1;
            let mut pick = index::sample(rng, n_vocab, d).into_vec();
            pick.sort_unstable();
            if seen.insert(pick.clone()) {
                out.push(pick);
            }
        }
        out
    };
    toggles.into_iter().map(|t| toggle(current, &t)).collect()
}

/// Symmetric difference of two sorted index lists.
fn toggle(current: &[usize], flips: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(current.len() + flips.len());
    let (mut i, mut j) = (0, 0);
    while i < current.len() || j < flips.len() {
        match (current.get(i), flips.get(j)) {
            (Some(a), Some(b)) if a == b => {
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a < b => {
                out.push(*a);
                i += 1;
            }
            (Some(a), None) => {
                out.push(*a);
                i += 1;
            }
            (_, Some(b)) => {
                out.push(*b);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        out.push(combo.clone());
        let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
            return out;
        };
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// `n^d`, saturating at `cap`.
fn capped_pow(n: usize, d: usize, cap: usize) -> usize {
    let mut acc: usize = 1;
    for _ in 0..d {
        acc = acc.saturating_mul(n);
        if acc >= cap {
            return cap;
        }
    }
    acc
}

/// Orders candidates best first: higher fitness, then fewer features, then
/// lexicographically smaller names.
fn better(d: &Dataset, a: (&[usize], f64), b: (&[usize], f64)) -> Ordering {
    b.1.total_cmp(&a.1)
        .then_with(|| a.0.len().cmp(&b.0.len()))
        .then_with(|| {
            let names = |s: &[usize]| {
                let mut v: Vec<&str> = s.iter().map(|&i| d.features()[i].as_str()).collect();
                v.sort_unstable();
                v
            };
            names(a.0).cmp(&names(b.0))
        })
}

pub fn hillclimb(d: &Dataset, seed: &FeatureSet, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let mut current = d.resolve(seed)?;
    let eval = |set: &[usize]| fitness_idx(d, set, &cfg.fitness);
    let reaches = |f: f64| cfg.target.is_some_and(|t| f >= t);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let mut current_fitness = eval(&current);
    let mut evals = 1;
    let mut remaining = cfg.max_evals - 1;
    let mut evals_to_best = 1;
    let mut trace = vec![(1, current_fitness)];
    let mut reached = reaches(current_fitness);
    let mut edit = 1;

    while !reached && remaining > 0 && edit < cfg.max_edit_distance {
        let h = (remaining / 10)
            .max(1)
            .min(capped_pow(d.n_features(), edit, cfg.max_evals))
            .min(remaining);
        let batch = neighbor_indices(&current, edit, h, d.n_features(), &mut rng);
        if batch.is_empty() {
            edit += 1;
            continue;
        }
        let scores: Vec<f64> = batch.par_iter().map(|s| eval(s)).collect();
        // A sequential evaluator would stop at the first candidate meeting the target.
        let used = cfg
            .target
            .and_then(|t| scores.iter().position(|&f| f >= t))
            .map_or(batch.len(), |j| j + 1);
        remaining -= used;

        let winner = (0..used)
            .min_by(|&a, &b| better(d, (&batch[a], scores[a]), (&batch[b], scores[b])))
            .expect("batch is non-empty");
        if scores[winner] > current_fitness {
            let first = (0..used)
                .find(|&j| scores[j] == scores[winner])
                .expect("winner is in range");
            current_fitness = scores[winner];
            current = batch[winner].clone();
            evals_to_best = evals + first + 1;
            trace.push((evals_to_best, current_fitness));
            reached = reaches(current_fitness);
            edit = 1;
        } else {
            edit += 1;
        }
        evals += used;
    }

    Ok(SearchResult {
        best_set: d.names_of(&current),
        best_fitness: current_fitness,
        evals_used: evals,
        evals_to_best,
        target_reached: reached,
        trace,
    })
}

/// [`hillclimb`] stopping at `target`.
pub fn run_with_target(
    d: &Dataset,
    seed: &FeatureSet,
    cfg: &SearchConfig,
    target: f64,
) -> Result<SearchResult> {
    hillclimb(
        d,
        seed,
        &SearchConfig {
            target: Some(target),
            ..*cfg
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn set(v: &[&str]) -> FeatureSet {
        v.iter().copied().collect()
    }

    #[test]
    fn exhausts_small_neighbourhoods() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut got = neighbor_sets(
            &FeatureSet::new(),
            1,
            10,
            &names(&["a", "b", "c"]),
            &mut rng,
        );
        got.sort();
        assert_eq!(got, vec![set(&["a"]), set(&["b"]), set(&["c"])]);

        let mut got = neighbor_sets(&set(&["a"]), 1, 10, &names(&["a", "b"]), &mut rng);
        got.sort();
        assert_eq!(got, vec![FeatureSet::new(), set(&["a", "b"])]);
    }

    #[test]
    fn neighbours_are_at_exact_distance_and_distinct() {
        let vocab: Vec<String> = (0..30).map(|i| format!("f{i:02}")).collect();
        let s = set(&["f01", "f05", "f09"]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=4 {
            let out = neighbor_sets(&s, d, 40, &vocab, &mut rng);
            assert_eq!(out.len() as u128, binomial(30, d).min(40));
            assert!(out.iter().all(|x| x.symmetric_difference_len(&s) == d));
            assert!(out.iter().all(|x| *x != s));
            let uniq: HashSet<&FeatureSet> = out.iter().collect();
            assert_eq!(uniq.len(), out.len());
        }
        assert!(neighbor_sets(&s, 31, 5, &vocab, &mut rng).is_empty());
    }

    #[test]
    fn combinatorics() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 3), 1);
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(capped_pow(50, 3, 10_000), 10_000);
        assert_eq!(capped_pow(50, 2, 10_000), 2500);
        assert_eq!(capped_pow(usize::MAX, 2, 7), 7);
        assert_eq!(toggle(&[1, 3, 5], &[0, 3, 6]), vec![0, 1, 5, 6]);
    }

    fn toy() -> Dataset {
        Dataset::from_dense(
            "t",
            &["a", "b", "c"],
            &[&[1, 0, 0, 1], &[1, 1, 0, 1], &[0, 1, 1, 0], &[0, 0, 1, 0]],
        )
        .unwrap()
    }

    #[test]
    fn seed_meeting_target_costs_one_eval() {
        let d = toy();
        let cfg = SearchConfig {
            max_evals: 100,
            ..Default::default()
        };
        // fitness({a}) = 1 * 4 / (4 + 5)
        let r = run_with_target(&d, &set(&["a"]), &cfg, 0.44).unwrap();
        assert_eq!(r.evals_used, 1);
        assert!(r.target_reached);
        let r = run_with_target(&d, &FeatureSet::new(), &cfg, 0.0).unwrap();
        assert_eq!(r.evals_used, 1);
    }

    #[test]
    fn single_eval_budget_returns_seed() {
        let d = toy();
        let cfg = SearchConfig {
            max_evals: 1,
            ..Default::default()
        };
        let r = hillclimb(&d, &set(&["b"]), &cfg).unwrap();
        assert_eq!(r.best_set, set(&["b"]));
        assert_eq!((r.evals_used, r.evals_to_best), (1, 1));
    }

    #[test]
    fn unreachable_target_runs_to_budget() {
        let d = toy();
        let cfg = SearchConfig {
            max_evals: 200,
            ..Default::default()
        };
        let r = run_with_target(&d, &FeatureSet::new(), &cfg, 2.0).unwrap();
        assert!(!r.target_reached);
        assert!(r.evals_used <= 200);
        assert_eq!(r.best_set, set(&["a"]));
    }

    #[test]
    fn unknown_seed_feature_is_an_error() {
        assert!(matches!(
            hillclimb(&toy(), &set(&["zz"]), &SearchConfig::default()),
            Err(Error::UnknownFeature(_))
        ));
    }

    #[test]
    fn ties_prefer_smaller_then_lexicographic_sets() {
        let d = toy();
        let a = d.resolve(&set(&["a"])).unwrap();
        let ab = d.resolve(&set(&["a", "b"])).unwrap();
        let c = d.resolve(&set(&["c"])).unwrap();
        assert_eq!(better(&d, (&a, 1.0), (&ab, 1.0)), Ordering::Less);
        assert_eq!(better(&d, (&a, 1.0), (&c, 1.0)), Ordering::Less);
        assert_eq!(better(&d, (&ab, 1.0), (&a, 0.5)), Ordering::Less);
    }
}
