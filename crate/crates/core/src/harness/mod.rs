//! Experiment driver.
//!
//! A baseline phase solves every problem of a collection from the empty
//! feature set and records each problem's best fitness as its accuracy
//! target. A meta phase then solves the same problems in the same order,
//! seeding each search from the MetaDB built so far and stopping when the
//! target is met. The ratio of the evaluation counts is the speedup.

mod report;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dataset::{mi_prefilter, Dataset, DatasetCollection};
use crate::error::{Error, Result};
use crate::featsearch::{hillclimb, SearchConfig};
use crate::infomeasure::{FeatureSet, FitnessConfig};
use crate::learner::{learn, learn_constant, LearnConfig};
use crate::metadb::{MetaDb, MetaDbEntry, ScoredFeature};
use crate::metricspace::to_distribution;
use crate::quality::{q_features, q_practical, QualityConfig, QualitySource, ScoreBounds};
use crate::transfer::{select_transfer_set, TransferConfig};

pub use report::{
    read_report_speedups, read_targets, render_report, write_report, write_targets, ReportSummary,
    REPORT_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Baseline,
    Meta,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Meta => "meta",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub collection_dir: Option<PathBuf>,
    /// Where the phase's MetaDB is saved after the run, if anywhere.
    pub metadb_path: Option<PathBuf>,
    pub mi_threshold: f64,
    /// Feature-selection evaluation budget.
    pub fe: usize,
    pub t: f64,
    pub k: usize,
    pub b: f64,
    pub learn_evals: usize,
    /// Distortion exponent of the formal quality.
    pub p: f64,
    pub quality_source: QualitySource,
    pub max_edit_distance: usize,
    pub rng_seed: u64,
    pub mode: Mode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            collection_dir: None,
            metadb_path: None,
            mi_threshold: 0.001,
            fe: 10_000,
            t: 0.1,
            k: 5,
            b: 5.0,
            learn_evals: 10_000,
            p: 2.0,
            quality_source: QualitySource::MiFitness,
            max_edit_distance: 5,
            rng_seed: 0,
            mode: Mode::Baseline,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mi_threshold >= 0.0 && self.mi_threshold.is_finite()) {
            return Err(Error::Config("mi_threshold must be finite and >= 0".into()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::Config("p must be positive".into()));
        }
        if self.learn_evals == 0 {
            return Err(Error::Config("learn_evals must be at least 1".into()));
        }
        self.search_config(0, None).validate()?;
        self.transfer_config().validate()
    }

    fn fitness(&self) -> FitnessConfig {
        FitnessConfig::with_b(self.b)
    }

    fn search_config(&self, problem: usize, target: Option<f64>) -> SearchConfig {
        SearchConfig {
            max_evals: self.fe,
            max_edit_distance: self.max_edit_distance,
            fitness: self.fitness(),
            rng_seed: problem_seed(self.rng_seed, problem, 0),
            target,
        }
    }

    fn learn_config(&self, problem: usize) -> LearnConfig {
        LearnConfig {
            eval_budget: self.learn_evals,
            rng_seed: problem_seed(self.rng_seed, problem, 1),
            ..LearnConfig::default()
        }
    }

    fn transfer_config(&self) -> TransferConfig {
        TransferConfig {
            k: self.k,
            t: self.t,
            quality_source: self.quality_source,
            ..TransferConfig::default()
        }
    }
}

/// Independent seeds per problem and per consumer, so the search sees the
/// same random stream in both phases whatever the learner does.
fn problem_seed(run_seed: u64, problem: usize, stream: u64) -> u64 {
    let mut z = run_seed
        ^ (problem as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemRecord {
    pub dataset_id: String,
    pub phase: Mode,
    /// Baseline: evaluations to first reach the best fitness. Meta:
    /// evaluations to reach the target, or the full budget if it was missed.
    pub evals: usize,
    pub target: f64,
    pub achieved_fitness: f64,
    pub learning_score: f64,
    pub n_selected: usize,
    pub n_transferred: usize,
    /// Transferred features still present in the final selection.
    pub n_overlap: usize,
    /// Distance to the nearest problem already in the MetaDB.
    pub nearest_distance: Option<f64>,
    pub speedup: Option<f64>,
    pub target_reached: bool,
    /// The prefilter removed every feature.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMeans {
    pub phase: Mode,
    pub mean_fitness: f64,
    pub mean_learning_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<ProblemRecord>,
    pub arithmetic_mean_speedup: Option<f64>,
    pub geometric_mean_speedup: Option<f64>,
    pub phase_means: Vec<PhaseMeans>,
}

impl ExperimentReport {
    pub fn new(records: Vec<ProblemRecord>) -> Self {
        let speedups: Vec<f64> = records.iter().filter_map(|r| r.speedup).collect();
        let (arithmetic, geometric) = speedup_means(&speedups);
        let phase_means = [Mode::Baseline, Mode::Meta]
            .into_iter()
            .filter_map(|phase| {
                let rs: Vec<&ProblemRecord> = records.iter().filter(|r| r.phase == phase).collect();
                (!rs.is_empty()).then(|| PhaseMeans {
                    phase,
                    mean_fitness: mean(rs.iter().map(|r| r.achieved_fitness)),
                    mean_learning_score: mean(rs.iter().map(|r| r.learning_score)),
                })
            })
            .collect();
        ExperimentReport {
            records,
            arithmetic_mean_speedup: arithmetic,
            geometric_mean_speedup: geometric,
            phase_means,
        }
    }

    pub fn mean_fitness(&self, phase: Mode) -> Option<f64> {
        self.phase_means
            .iter()
            .find(|m| m.phase == phase)
            .map(|m| m.mean_fitness)
    }

    pub fn targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.target).collect()
    }

    pub fn evals(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.evals).collect()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Arithmetic and geometric means; `None` for an empty slice.
pub fn speedup_means(speedups: &[f64]) -> (Option<f64>, Option<f64>) {
    if speedups.is_empty() {
        return (None, None);
    }
    let arithmetic = mean(speedups.iter().copied());
    let geometric = mean(speedups.iter().map(|s| s.ln())).exp();
    (Some(arithmetic), Some(geometric))
}

/// Solves one problem and records it in `db`.
///
/// `problem` is the arrival index and selects the random streams. In META
/// mode the search is seeded from `db` and stops at `target` when given.
pub fn solve_problem(
    d: &Dataset,
    problem: usize,
    db: &mut MetaDb,
    cfg: &RunConfig,
    target: Option<f64>,
) -> Result<(ProblemRecord, MetaDbEntry)> {
    let d = mi_prefilter(d, cfg.mi_threshold);
    let degenerate = d.n_features() == 0;
    let distribution = to_distribution(&d);

    let nearest_distance = db
        .neighbors_of(&distribution, 1)
        .first()
        .map(|(_, dist)| *dist);
    let seed = match cfg.mode {
        Mode::Baseline => FeatureSet::new(),
        Mode::Meta => select_transfer_set(&d, db, &cfg.transfer_config()),
    };

    let search_target = match cfg.mode {
        Mode::Baseline => None,
        Mode::Meta => target,
    };
    let found = hillclimb(&d, &seed, &cfg.search_config(problem, search_target))?;
    let selected = found.best_set;

    let outcome = if selected.is_empty() {
        learn_constant(&d)
    } else {
        learn(&d, &selected, &cfg.learn_config(problem))?
    };

    let names = selected.to_vec();
    let bounds = ScoreBounds::for_dataset(&d);
    let qcfg = QualityConfig {
        p: cfg.p,
        source: cfg.quality_source,
    };
    let big_q = q_features(&outcome.pool, &names, &d, bounds, &qcfg)?;
    let scored_features = names
        .into_iter()
        .zip(big_q)
        .map(|(name, big_q)| {
            let q = q_practical(&d, &name, &cfg.fitness())?;
            Ok(ScoredFeature {
                name,
                q,
                big_q: Some(big_q),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let entry = MetaDbEntry {
        id: d.id().to_string(),
        scored_features,
        min_score: bounds.min,
        max_score: bounds.max,
        candidates: outcome.pool,
        distribution,
    };
    db.upsert(entry.clone())?;

    let (evals, target) = match cfg.mode {
        Mode::Baseline => (found.evals_to_best, found.best_fitness),
        Mode::Meta if found.target_reached => {
            (found.evals_used, target.unwrap_or(found.best_fitness))
        }
        // Conservative: a missed target is charged the whole budget.
        Mode::Meta => (cfg.fe, target.unwrap_or(found.best_fitness)),
    };
    let record = ProblemRecord {
        dataset_id: d.id().to_string(),
        phase: cfg.mode,
        evals,
        target,
        achieved_fitness: found.best_fitness,
        learning_score: outcome.best.score,
        n_selected: selected.len(),
        n_transferred: seed.len(),
        n_overlap: seed.intersection_len(&selected),
        nearest_distance,
        speedup: None,
        target_reached: found.target_reached || search_target.is_none(),
        degenerate,
    };
    Ok((record, entry))
}

fn run_phase(
    collection: &DatasetCollection,
    cfg: &RunConfig,
    targets: Option<&[f64]>,
    baseline_evals: Option<&[usize]>,
) -> Result<(ExperimentReport, MetaDb)> {
    cfg.validate()?;
    if collection.is_empty() {
        return Err(Error::InvalidDataset("empty collection".into()));
    }
    for len in [
        targets.map(<[f64]>::len),
        baseline_evals.map(<[usize]>::len),
    ]
    .into_iter()
    .flatten()
    {
        if len != collection.len() {
            return Err(Error::TargetCount {
                expected: collection.len(),
                actual: len,
            });
        }
    }
    let mut db = MetaDb::new();
    let mut records = Vec::with_capacity(collection.len());
    for (i, d) in collection.iter().enumerate() {
        let (mut record, _) = solve_problem(d, i, &mut db, cfg, targets.map(|t| t[i]))?;
        if let Some(base) = baseline_evals {
            record.speedup = Some(base[i] as f64 / record.evals as f64);
        }
        records.push(record);
    }
    if let Some(path) = &cfg.metadb_path {
        db.save(path)?;
    }
    Ok((ExperimentReport::new(records), db))
}

/// Solves every problem from the empty set. Returns the report and the
/// per-problem accuracy targets.
pub fn run_baseline(
    collection: &DatasetCollection,
    cfg: &RunConfig,
) -> Result<(ExperimentReport, Vec<f64>)> {
    let cfg = RunConfig {
        mode: Mode::Baseline,
        ..cfg.clone()
    };
    let (report, _) = run_phase(collection, &cfg, None, None)?;
    let targets = report.targets();
    Ok((report, targets))
}

/// Solves every problem with transfer from a fresh MetaDB, stopping each
/// search at its target. Speedups are filled in when the baseline
/// evaluation counts are given.
pub fn run_meta(
    collection: &DatasetCollection,
    cfg: &RunConfig,
    targets: &[f64],
    baseline_evals: Option<&[usize]>,
) -> Result<ExperimentReport> {
    let cfg = RunConfig {
        mode: Mode::Meta,
        ..cfg.clone()
    };
    Ok(run_phase(collection, &cfg, Some(targets), baseline_evals)?.0)
}

/// [`run_baseline`] that also returns the MetaDB it built.
pub fn run_baseline_with_db(
    collection: &DatasetCollection,
    cfg: &RunConfig,
) -> Result<(ExperimentReport, MetaDb)> {
    let cfg = RunConfig {
        mode: Mode::Baseline,
        ..cfg.clone()
    };
    run_phase(collection, &cfg, None, None)
}
