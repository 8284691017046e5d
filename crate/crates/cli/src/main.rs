use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use featmeta::dataset::{
    generate_collection, load_dataset, mi_prefilter, DatasetCollection, SynthSpec,
};
use featmeta::featsearch::{hillclimb, SearchConfig};
use featmeta::harness::{
    read_report_speedups, read_targets, run_baseline, run_meta, write_report, write_targets, Mode,
    ReportSummary, RunConfig,
};
use featmeta::metricspace::dataset_distance;
use featmeta::{FeatureSet, FitnessConfig, QualitySource};

#[derive(Parser)]
#[command(name = "featmeta", version, about = "Feature metalearning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Baseline,
    Meta,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    MiFitness,
    FormalQ,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic collection from a JSON spec.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the square-root Jensen-Shannon distance between two datasets.
    Distance { a: PathBuf, b: PathBuf },
    /// Run feature selection on one dataset.
    Select {
        dataset: PathBuf,
        /// Comma-separated starting features.
        #[arg(long, value_delimiter = ',')]
        seed_features: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        fe: usize,
        #[arg(long, default_value_t = 5.0)]
        b: f64,
        #[arg(long, default_value_t = 0.001)]
        mi_threshold: f64,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Run the baseline or the meta phase over a collection.
    Run {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        collection: PathBuf,
        /// Where to save the MetaDB built by this phase.
        #[arg(long)]
        metadb: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        fe: usize,
        #[arg(long, default_value_t = 0.1)]
        t: f64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 5.0)]
        b: f64,
        #[arg(long, default_value_t = 0.001)]
        mi_threshold: f64,
        #[arg(long, default_value_t = 10_000)]
        learn_evals: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_enum, default_value_t = SourceArg::MiFitness)]
        quality_source: SourceArg,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Baseline writes the targets here; meta reads them.
        #[arg(long)]
        targets: PathBuf,
        /// Baseline report whose evaluation counts give the meta speedups.
        #[arg(long)]
        baseline_report: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
    },
    /// Print the arithmetic and geometric mean speedups of a report.
    ReportSummary { report: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { spec, out } => {
            let text = std::fs::read_to_string(&spec)
                .with_context(|| format!("reading {}", spec.display()))?;
            let spec: SynthSpec = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", spec.display()))?;
            let collection = generate_collection(&spec)?;
            let paths = collection.save_dir(&out)?;
            println!("wrote {} datasets to {}", paths.len(), out.display());
        }
        Command::Distance { a, b } => {
            let (a, b) = (load_dataset(&a)?, load_dataset(&b)?);
            println!("{:.6}", dataset_distance(&a, &b));
        }
        Command::Select {
            dataset,
            seed_features,
            fe,
            b,
            mi_threshold,
            rng_seed,
        } => {
            let d = mi_prefilter(&load_dataset(&dataset)?, mi_threshold);
            let seed: FeatureSet = seed_features
                .into_iter()
                .filter(|f| !f.is_empty())
                .collect();
            let cfg = SearchConfig {
                max_evals: fe,
                fitness: FitnessConfig::with_b(b),
                rng_seed,
                ..SearchConfig::default()
            };
            let r = hillclimb(&d, &seed, &cfg)?;
            println!("best: {}", r.best_set);
            println!("fitness: {}", r.best_fitness);
            println!("evals: {}", r.evals_used);
            println!("evals_to_best: {}", r.evals_to_best);
        }
        Command::Run {
            mode,
            collection,
            metadb,
            fe,
            t,
            k,
            b,
            mi_threshold,
            learn_evals,
            p,
            quality_source,
            rng_seed,
            targets,
            baseline_report,
            report,
        } => {
            let cfg = RunConfig {
                collection_dir: Some(collection.clone()),
                metadb_path: metadb,
                mi_threshold,
                fe,
                t,
                k,
                b,
                learn_evals,
                p,
                quality_source: match quality_source {
                    SourceArg::MiFitness => QualitySource::MiFitness,
                    SourceArg::FormalQ => QualitySource::FormalQ,
                },
                rng_seed,
                mode: match mode {
                    ModeArg::Baseline => Mode::Baseline,
                    ModeArg::Meta => Mode::Meta,
                },
                ..RunConfig::default()
            };
            let data = DatasetCollection::load_dir(&collection)?;
            let result = match cfg.mode {
                Mode::Baseline => {
                    if baseline_report.is_some() {
                        bail!("--baseline-report only applies to --mode meta");
                    }
                    let (r, ts) = run_baseline(&data, &cfg)?;
                    write_targets(&ts, &targets)?;
                    r
                }
                Mode::Meta => {
                    let ts = read_targets(&targets)?;
                    let evals = baseline_report
                        .map(read_report_speedups)
                        .transpose()?
                        .map(|(e, _)| e);
                    run_meta(&data, &cfg, &ts, evals.as_deref())?
                }
            };
            write_report(&result, &report)?;
            print_means(
                result.arithmetic_mean_speedup,
                result.geometric_mean_speedup,
            );
        }
        Command::ReportSummary { report } => {
            let s = ReportSummary::from_file(&report)?;
            println!("records: {}", s.n_records);
            print_means(s.arithmetic_mean_speedup, s.geometric_mean_speedup);
        }
    }
    Ok(())
}

fn print_means(arithmetic: Option<f64>, geometric: Option<f64>) {
    let show = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"));
    println!("arithmetic_mean_speedup: {}", show(arithmetic));
    println!("geometric_mean_speedup: {}", show(geometric));
}
