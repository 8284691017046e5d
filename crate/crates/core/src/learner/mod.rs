//! Budgeted boolean-rule learner.
//!
//! Stands in for an evolutionary program learner: it searches small AND/OR
//! formulas over the selected features by stochastic hill climbing and scores
//! each candidate as minus its number of classification errors on the
//! training rows. The best distinct candidates form the pool that feature
//! quality estimation samples from.

mod model;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use model::{score_model, Expr, RuleModel};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::infomeasure::FeatureSet;

/// One learned candidate as stored in the MetaDB.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRecord {
    /// Features referenced by the model.
    pub features: FeatureSet,
    /// Minus the number of classification errors.
    pub score: f64,
    pub model: RuleModel,
}

impl CandidateRecord {
    pub fn new(model: RuleModel, score: f64) -> Self {
        CandidateRecord {
            features: model.features(),
            score,
            model,
        }
    }

    pub fn model_digest(&self) -> String {
        self.model.digest()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub eval_budget: usize,
    pub max_literals: usize,
    pub pool_size: usize,
    pub rng_seed: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            eval_budget: 10_000,
            max_literals: 4,
            pool_size: 50,
            rng_seed: 0,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eval_budget == 0 || self.max_literals == 0 || self.pool_size == 0 {
            return Err(Error::Config(
                "eval_budget, max_literals and pool_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutcome {
    pub best: CandidateRecord,
    /// Best distinct candidates, descending score (ties by digest).
    pub pool: Vec<CandidateRecord>,
    pub evals_used: usize,
}

/// Consecutive already-seen mutants tolerated before a restart, and restarts
/// without any new model before giving up early.
const STALE_BEFORE_RESTART: usize = 64;
const FRUITLESS_RESTARTS: usize = 32;

pub fn learn(d: &Dataset, s: &FeatureSet, cfg: &LearnConfig) -> Result<LearnOutcome> {
    cfg.validate()?;
    if s.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    d.resolve(s)?;
    let features: Vec<String> = s.to_vec();
    let mut run = Run {
        d,
        s,
        cfg,
        seen: HashMap::new(),
        order: Vec::new(),
    };

    // Constants, then every single literal.
    let mut initial = vec![RuleModel::constant(false), RuleModel::constant(true)];
    for f in &features {
        initial.push(RuleModel::literal(f.clone(), false));
        initial.push(RuleModel::literal(f.clone(), true));
    }
    let mut current: Option<(RuleModel, f64)> = None;
    for m in initial {
        if run.exhausted() {
            break;
        }
        let score = run.evaluate(&m)?.expect("initial models are distinct");
        if current.as_ref().is_none_or(|(_, s)| score > *s) {
            current = Some((m, score));
        }
    }
    let (mut current, mut current_score) = current.expect("budget is at least one");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut stale = 0;
    let mut fruitless = 0;
    while !run.exhausted() {
        let mut mutant = mutate(&current, &features, cfg.max_literals, &mut rng);
        if rng.gen_bool(0.3) {
            mutant = mutate(&mutant, &features, cfg.max_literals, &mut rng);
        }
        if mutant.literal_count() > cfg.max_literals {
            continue;
        }
        match run.evaluate(&mutant)? {
            Some(score) => {
                stale = 0;
                fruitless = 0;
                // Sideways moves let the climb drift across plateaus.
                if score >= current_score {
                    current = mutant;
                    current_score = score;
                }
            }
            None => {
                stale += 1;
                if stale >= STALE_BEFORE_RESTART {
                    stale = 0;
                    fruitless += 1;
                    if fruitless >= FRUITLESS_RESTARTS {
                        break;
                    }
                    let f = features.choose(&mut rng).expect("non-empty");
                    current = RuleModel::literal(f.clone(), rng.gen_bool(0.5));
                    current_score = run.seen[&current.digest()];
                }
            }
        }
    }

    let evals_used = run.order.len();
    let mut pool: Vec<CandidateRecord> = run
        .order
        .into_iter()
        .map(|m| {
            let score = run.seen[&m.digest()];
            CandidateRecord::new(m, score)
        })
        .collect();
    pool.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.model_digest().cmp(&b.model_digest()))
    });
    pool.truncate(cfg.pool_size);
    Ok(LearnOutcome {
        best: pool[0].clone(),
        pool,
        evals_used,
    })
}

/// Pool for a problem with no usable features: both constants.
pub fn learn_constant(d: &Dataset) -> LearnOutcome {
    let s = FeatureSet::new();
    let mut pool: Vec<CandidateRecord> = [false, true]
        .into_iter()
        .map(|c| {
            let m = RuleModel::constant(c);
            let score = score_model(&m, d, &s).expect("constants need no features");
            CandidateRecord::new(m, score)
        })
        .collect();
    pool.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.model_digest().cmp(&b.model_digest()))
    });
    LearnOutcome {
        best: pool[0].clone(),
        pool,
        evals_used: 2,
    }
}

struct Run<'a> {
    d: &'a Dataset,
    s: &'a FeatureSet,
    cfg: &'a LearnConfig,
    seen: HashMap<String, f64>,
    order: Vec<RuleModel>,
}

impl Run<'_> {
    fn exhausted(&self) -> bool {
        self.order.len() >= self.cfg.eval_budget
    }

    /// Scores `m` unless an identical model was already evaluated.
    fn evaluate(&mut self, m: &RuleModel) -> Result<Option<f64>> {
        let key = m.digest();
        if self.seen.contains_key(&key) {
            return Ok(None);
        }
        let score = score_model(m, self.d, self.s)?;
        self.seen.insert(key, score);
        self.order.push(m.clone());
        Ok(Some(score))
    }
}

#[derive(Clone, Copy)]
enum Mutation {
    FlipSign,
    AddLiteral,
    RemoveLiteral,
    SwapOperator,
    NegateOutput,
}

fn mutate(
    m: &RuleModel,
    features: &[String],
    max_literals: usize,
    rng: &mut ChaCha8Rng,
) -> RuleModel {
    let mut expr = m.expr().clone();
    let mut negate = m.negate_output();
    let mut leaves = Vec::new();
    let mut internal = Vec::new();
    paths(&expr, &mut Vec::new(), &mut leaves, &mut internal);
    let literal_leaves: Vec<&Vec<usize>> = leaves
        .iter()
        .filter(|p| matches!(at(&expr, p), Expr::Lit { .. }))
        .collect();

    let mut options = vec![Mutation::NegateOutput];
    if !literal_leaves.is_empty() {
        options.extend([Mutation::FlipSign, Mutation::RemoveLiteral]);
    }
    if m.literal_count() < max_literals {
        options.extend([Mutation::AddLiteral, Mutation::AddLiteral]);
    }
    if !internal.is_empty() {
        options.push(Mutation::SwapOperator);
    }

    match *options.choose(rng).unwrap() {
        Mutation::NegateOutput => negate = !negate,
        Mutation::FlipSign => {
            let path = literal_leaves.choose(rng).unwrap();
            if let Expr::Lit { negated, .. } = at_mut(&mut expr, path) {
                *negated = !*negated;
            }
        }
        Mutation::RemoveLiteral => {
            let path = (*literal_leaves.choose(rng).unwrap()).clone();
            match path.split_last() {
                None => expr = Expr::Const(rng.gen_bool(0.5)),
                Some((&last, parent)) => {
                    if let Expr::And(c) | Expr::Or(c) = at_mut(&mut expr, parent) {
                        c.remove(last);
                    }
                }
            }
        }
        Mutation::AddLiteral => {
            let f = features.choose(rng).unwrap().clone();
            let lit = Expr::Lit {
                feature: f,
                negated: rng.gen_bool(0.5),
            };
            let mut nodes: Vec<Vec<usize>> = leaves.clone();
            nodes.extend(internal.iter().cloned());
            let path = nodes.choose(rng).unwrap();
            let and = rng.gen_bool(0.5);
            let node = at_mut(&mut expr, path);
            match node {
                Expr::Const(_) => *node = lit,
                Expr::Lit { .. } => {
                    let old = std::mem::replace(node, Expr::Const(true));
                    *node = if and {
                        Expr::And(vec![old, lit])
                    } else {
                        Expr::Or(vec![old, lit])
                    };
                }
                Expr::And(c) | Expr::Or(c) => c.push(lit),
            }
        }
        Mutation::SwapOperator => {
            let path = internal.choose(rng).unwrap();
            let node = at_mut(&mut expr, path);
            *node = match std::mem::replace(node, Expr::Const(true)) {
                Expr::And(c) => Expr::Or(c),
                Expr::Or(c) => Expr::And(c),
                other => other,
            };
        }
    }
    RuleModel::new(expr, negate)
}

fn paths(
    e: &Expr,
    cur: &mut Vec<usize>,
    leaves: &mut Vec<Vec<usize>>,
    internal: &mut Vec<Vec<usize>>,
) {
    match e {
        Expr::And(c) | Expr::Or(c) => {
            internal.push(cur.clone());
            for (i, child) in c.iter().enumerate() {
                cur.push(i);
                paths(child, cur, leaves, internal);
                cur.pop();
            }
        }
        _ => leaves.push(cur.clone()),
    }
}

fn at<'e>(e: &'e Expr, path: &[usize]) -> &'e Expr {
    path.iter().fold(e, |node, &i| match node {
        Expr::And(c) | Expr::Or(c) => &c[i],
        _ => unreachable!("path leads through a leaf"),
    })
}

fn at_mut<'e>(e: &'e mut Expr, path: &[usize]) -> &'e mut Expr {
    path.iter().fold(e, |node, &i| match node {
        Expr::And(c) | Expr::Or(c) => &mut c[i],
        _ => unreachable!("path leads through a leaf"),
    })
}
