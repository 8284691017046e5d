//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any fails.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use featmeta::dataset::{
    generate_collection, generate_collection_with_truth, ConceptKind, Row, SynthSpec,
};
use featmeta::featsearch::hillclimb;
use featmeta::harness::{run_baseline, run_meta, Mode, RunConfig};
use featmeta::infomeasure::mutual_information_idx;
use featmeta::learner::Expr;
use featmeta::metricspace::{dataset_distance, distance, to_distribution};
use featmeta::quality::{q_feature, q_of, QualityConfig, ScoreBounds};
use featmeta::{
    CandidateRecord, Dataset, DistanceIndex, FeatureSet, FitnessConfig, RuleModel, SearchConfig,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// Random dataset over a random subset of `NAMES`.
fn random_dataset(rng: &mut ChaCha8Rng, id: &str, max_features: usize, max_rows: usize) -> Dataset {
    let nf = rng.gen_range(1..=max_features);
    let mut names: Vec<String> = NAMES
        .choose_multiple(rng, nf)
        .map(|s| s.to_string())
        .collect();
    names.sort();
    let rows = (0..rng.gen_range(1..=max_rows))
        .map(|_| {
            let present = (0..nf as u32).filter(|_| rng.gen_bool(0.4)).collect();
            Row::new(present, rng.gen_bool(0.5))
        })
        .collect();
    Dataset::new(id, names, rows).unwrap()
}

fn mi_oracle(d: &Dataset, cols: &[usize]) -> f64 {
    let n = d.n_rows() as f64;
    let mut joint: HashMap<(Vec<bool>, bool), f64> = HashMap::new();
    let mut px: HashMap<Vec<bool>, f64> = HashMap::new();
    let mut py: HashMap<bool, f64> = HashMap::new();
    for (r, row) in d.rows().iter().enumerate() {
        let x: Vec<bool> = cols.iter().map(|&c| d.column(c).get(r)).collect();
        *joint.entry((x.clone(), row.target)).or_default() += 1.0;
        *px.entry(x).or_default() += 1.0;
        *py.entry(row.target).or_default() += 1.0;
    }
    joint
        .iter()
        .map(|((x, y), c)| {
            let p = c / n;
            p * (p / ((px[x] / n) * (py[y] / n))).log2()
        })
        .sum::<f64>()
        .max(0.0)
}

fn jsd_worked_examples() -> Outcome {
    let d1 = Dataset::from_dense(
        "D1",
        &["word1", "word2"],
        &[&[0, 0, 1], &[0, 1, 1], &[0, 0, 1], &[1, 0, 0]],
    )
    .unwrap();
    let d2 = Dataset::from_dense(
        "D2",
        &["word1", "word2"],
        &[&[1, 1, 1], &[1, 1, 1], &[1, 0, 1], &[0, 0, 0]],
    )
    .unwrap();
    let d3 = Dataset::from_dense(
        "D3",
        &["word1", "word2"],
        &[&[1, 1, 1], &[0, 1, 1], &[1, 0, 1], &[0, 0, 0]],
    )
    .unwrap();
    let (a, b) = (dataset_distance(&d1, &d2), dataset_distance(&d2, &d3));
    check(
        a == 1.0 && (b - 0.3945).abs() <= 1e-4,
        format!("d(D1,D2)={a:.6} d(D2,D3)={b:.6}"),
    )
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let triples = 1500;
    for i in 0..triples {
        let a = random_dataset(&mut rng, "a", 8, 16);
        let b = random_dataset(&mut rng, "b", 8, 16);
        let c = random_dataset(&mut rng, "c", 8, 16);
        let (ab, ba) = (dataset_distance(&a, &b), dataset_distance(&b, &a));
        let (bc, ac) = (dataset_distance(&b, &c), dataset_distance(&a, &c));
        if ab != ba || dataset_distance(&a, &a) != 0.0 || ab + bc < ac - 1e-9 {
            return Err(format!(
                "triple {i}: d(a,b)={ab} d(b,a)={ba} d(b,c)={bc} d(a,c)={ac}"
            ));
        }
    }
    Ok(format!("{triples} triples"))
}

fn mi_oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let datasets = 600;
    let mut subsets = 0;
    for _ in 0..datasets {
        let d = random_dataset(&mut rng, "m", 4, 16);
        for mask in 0u32..(1 << d.n_features()) {
            let cols: Vec<usize> = (0..d.n_features()).filter(|i| mask >> i & 1 == 1).collect();
            worst = worst.max((mutual_information_idx(&d, &cols) - mi_oracle(&d, &cols)).abs());
            subsets += 1;
        }
    }
    check(
        worst <= 1e-12,
        format!("{datasets} datasets, {subsets} subsets, max error {worst:e}"),
    )
}

fn knn_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut index = DistanceIndex::new();
    let mut points = Vec::new();
    for i in 0..500 {
        let id = format!("p{i:03}");
        let p = to_distribution(&random_dataset(&mut rng, &id, 3, 6));
        index
            .insert(id.clone(), p.clone())
            .map_err(|e| e.to_string())?;
        points.push((id, p));
    }
    let queries = 100;
    for qi in 0..queries {
        let q = to_distribution(&random_dataset(&mut rng, "q", 3, 6));
        let mut scan: Vec<(String, f64)> = points
            .iter()
            .map(|(id, p)| (id.clone(), distance(&q, p)))
            .collect();
        scan.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        for k in [1, 3, 5] {
            let got = index.knn(&q, k).map_err(|e| e.to_string())?;
            if got != scan[..k] {
                return Err(format!("query {qi}, k={k}: {got:?} vs {:?}", &scan[..k]));
            }
        }
    }
    Ok(format!("500 points, {queries} queries, k in {{1,3,5}}"))
}

fn planted_recovery() -> Outcome {
    let mut found = 0;
    let mut oracle_agrees = 0;
    for seed in 0..10u64 {
        let mut spec = SynthSpec::new(1, 1, 50, 200, 2);
        spec.concept = ConceptKind::Conjunction;
        spec.rng_seed = seed;
        let (c, truth) = generate_collection_with_truth(&spec).map_err(|e| e.to_string())?;
        let d = &c.datasets()[0];
        let planted = &truth[0].informative;

        let mut best = (f64::NEG_INFINITY, 0, 0);
        for i in 0..d.n_features() {
            for j in i + 1..d.n_features() {
                let mi = mi_oracle(d, &[i, j]);
                if mi > best.0 {
                    best = (mi, i, j);
                }
            }
        }
        if d.names_of(&[best.1, best.2]) == *planted {
            oracle_agrees += 1;
        }

        let cfg = SearchConfig {
            max_evals: 10_000,
            fitness: FitnessConfig::with_b(5.0),
            rng_seed: seed,
            ..SearchConfig::default()
        };
        let r = hillclimb(d, &FeatureSet::new(), &cfg).map_err(|e| e.to_string())?;
        if planted.is_subset(&r.best_set) {
            found += 1;
        }
    }
    check(
        found >= 9 && oracle_agrees == 10,
        format!("{found}/10 searches contain the planted pair; exhaustive pair oracle agrees on {oracle_agrees}/10"),
    )
}

struct TransferRuns {
    tuned: f64,
    disabled: f64,
    low: f64,
    baseline_fitness: f64,
    meta_fitness: f64,
}

const TUNED_T: f64 = 0.1;
const LOW_T: f64 = 1e-4;

fn transfer_runs() -> Result<TransferRuns, String> {
    let mut spec = SynthSpec::new(80, 8, 50, 200, 2);
    spec.cluster_tightness = 0.9;
    spec.label_noise_rate = 0.05;
    spec.concept = ConceptKind::Conjunction;
    spec.rng_seed = 1;
    let c = generate_collection(&spec).map_err(|e| e.to_string())?;
    let cfg = RunConfig {
        fe: 10_000,
        learn_evals: 2000,
        rng_seed: 1,
        ..RunConfig::default()
    };
    let (base, targets) = run_baseline(&c, &cfg).map_err(|e| e.to_string())?;
    let evals = base.evals();
    let meta = |t: f64| {
        run_meta(&c, &RunConfig { t, ..cfg.clone() }, &targets, Some(&evals))
            .map_err(|e| e.to_string())
    };
    let tuned = meta(TUNED_T)?;
    Ok(TransferRuns {
        tuned: tuned.geometric_mean_speedup.unwrap(),
        disabled: meta(2.0)?.geometric_mean_speedup.unwrap(),
        low: meta(LOW_T)?.geometric_mean_speedup.unwrap(),
        baseline_fitness: base.mean_fitness(Mode::Baseline).unwrap(),
        meta_fitness: tuned.mean_fitness(Mode::Meta).unwrap(),
    })
}

fn speedup_trend(r: &TransferRuns) -> Outcome {
    check(
        r.tuned > 1.0 && r.tuned > r.disabled && (0.95..=1.05).contains(&r.disabled),
        format!(
            "geometric mean {:.3} at t={TUNED_T}, {:.3} with transfer disabled",
            r.tuned, r.disabled
        ),
    )
}

fn threshold_sensitivity(r: &TransferRuns) -> Outcome {
    check(
        r.low <= r.tuned,
        format!(
            "geometric mean {:.3} at t={LOW_T} vs {:.3} at t={TUNED_T}",
            r.low, r.tuned
        ),
    )
}

fn quality_preservation(r: &TransferRuns) -> Outcome {
    let rel = (r.meta_fitness - r.baseline_fitness).abs() / r.baseline_fitness;
    check(
        rel <= 0.05,
        format!(
            "mean fitness {:.4} meta vs {:.4} baseline ({:.2}%)",
            r.meta_fitness,
            r.baseline_fitness,
            100.0 * rel
        ),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_featmeta"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "featmeta {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    std::fs::write(
        p("spec.json"),
        r#"{"n_datasets": 12, "n_clusters": 3, "features_per_vocab": 20, "rows_per_dataset": 80,
            "planted_set_size": 2, "label_noise_rate": 0.05, "cluster_tightness": 0.9, "rng_seed": 8}"#,
    )
    .map_err(|e| e.to_string())?;
    cli(&["gen", "--spec", &p("spec.json"), "--out", &p("coll")])?;
    let run = |mode: &str, extra: [String; 2], report: &str| {
        let mut args = vec![
            "run".to_string(),
            "--mode".into(),
            mode.into(),
            "--collection".into(),
            p("coll"),
            "--targets".into(),
            p("t.txt"),
            "--report".into(),
            p(report),
            "--fe".into(),
            "1500".into(),
            "--learn-evals".into(),
            "500".into(),
            "--rng-seed".into(),
            "5".into(),
        ];
        args.extend(extra);
        cli(&args.iter().map(String::as_str).collect::<Vec<_>>())
    };
    run("baseline", ["--metadb".into(), p("base0.json")], "b1.csv")?;
    run("baseline", ["--metadb".into(), p("base1.json")], "b2.csv")?;
    run("meta", ["--baseline-report".into(), p("b1.csv")], "m1.csv")?;
    run("meta", ["--baseline-report".into(), p("b1.csv")], "m2.csv")?;
    let same = |a: &str, b: &str| -> Result<bool, String> {
        let read = |f: &str| std::fs::read(Path::new(&p(f))).map_err(|e| e.to_string());
        Ok(read(a)? == read(b)?)
    };
    let (b, m) = (same("b1.csv", "b2.csv")?, same("m1.csv", "m2.csv")?);
    let dbs = same("base0.json", "base1.json")?;
    check(
        b && m && dbs,
        format!("baseline reports equal: {b}, meta reports equal: {m}, MetaDBs equal: {dbs}"),
    )
}

fn random_expr(rng: &mut ChaCha8Rng, names: &[String], depth: usize) -> Expr {
    match rng.gen_range(0..if depth == 0 { 2 } else { 4 }) {
        0 => Expr::Const(rng.gen_bool(0.5)),
        1 => Expr::Lit {
            feature: names.choose(rng).unwrap().clone(),
            negated: rng.gen_bool(0.5),
        },
        k => {
            let kids = (0..rng.gen_range(1..=3))
                .map(|_| random_expr(rng, names, depth - 1))
                .collect();
            if k == 2 {
                Expr::And(kids)
            } else {
                Expr::Or(kids)
            }
        }
    }
}

fn quality_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = QualityConfig::default();
    let pools = 300;
    let mut worst: f64 = 0.0;
    for i in 0..pools {
        let d = random_dataset(&mut rng, "q", 6, 16);
        let pool: Vec<CandidateRecord> = (0..rng.gen_range(1..10))
            .map(|_| {
                let m = RuleModel::new(random_expr(&mut rng, d.features(), 3), rng.gen_bool(0.3));
                CandidateRecord::new(m, -(rng.gen_range(0..=d.n_rows()) as f64))
            })
            .collect();
        let bounds = ScoreBounds::for_dataset(&d);
        let (a, c) = (rng.gen_range(0.01..100.0), rng.gen_range(-100.0..100.0));
        let scaled: Vec<CandidateRecord> = pool
            .iter()
            .map(|r| CandidateRecord {
                score: a * r.score + c,
                ..r.clone()
            })
            .collect();
        let scaled_bounds = ScoreBounds::new(a * bounds.min + c, a * bounds.max + c).unwrap();
        for f in d.features() {
            let q = q_feature(&pool, f, &d, bounds, &cfg).map_err(|e| e.to_string())?;
            if !(0.0..=1.0).contains(&q) {
                return Err(format!("pool {i}: Q({f}) = {q}"));
            }
            let q2 = q_feature(&scaled, f, &d, scaled_bounds, &cfg).map_err(|e| e.to_string())?;
            worst = worst.max((q - q2).abs());
            for r in pool.iter().filter(|r| !r.model.uses(f)) {
                let v = q_of(&r.model, f, &d).map_err(|e| e.to_string())?;
                if v != 0.0 {
                    return Err(format!(
                        "pool {i}: q_of({}, {f}) = {v} for an unused feature",
                        r.model.digest()
                    ));
                }
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("{pools} pools, max rescaling difference {worst:e}"),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail}) [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({detail}) [{secs:.1}s]");
            }
        }
    };
    let t = Instant::now();
    report(1, "jsd worked examples", t, jsd_worked_examples());
    let t = Instant::now();
    report(2, "metric axioms", t, metric_axioms());
    let t = Instant::now();
    report(3, "mutual information oracle", t, mi_oracle_agreement());
    let t = Instant::now();
    report(4, "k-nn equivalence", t, knn_equivalence());
    let t = Instant::now();
    report(5, "planted recovery", t, planted_recovery());

    let t = Instant::now();
    match transfer_runs() {
        Ok(runs) => {
            report(6, "transfer speedup trend", t, speedup_trend(&runs));
            report(7, "threshold sensitivity", t, threshold_sensitivity(&runs));
            report(8, "quality preservation", t, quality_preservation(&runs));
        }
        Err(e) => {
            for (n, name) in [
                (6, "transfer speedup trend"),
                (7, "threshold sensitivity"),
                (8, "quality preservation"),
            ] {
                report(n, name, t, Err(e.clone()));
            }
        }
    }
    let t = Instant::now();
    report(9, "cli determinism", t, cli_determinism());
    let t = Instant::now();
    report(10, "quality measure properties", t, quality_properties());

    if failed == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
