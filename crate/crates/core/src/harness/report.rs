//! Report and targets files.
//!
//! A report is a CSV with one row per problem followed, when there are
//! records, by `#`-prefixed `key,value` summary lines. Floats are written in
//! their shortest round-trip form so targets survive a save/load exactly.

use std::fs;
use std::path::Path;

use super::{speedup_means, ExperimentReport, ProblemRecord};
use crate::error::{Error, Result};

pub const REPORT_HEADER: [&str; 11] = [
    "dataset_id",
    "phase",
    "evals",
    "target",
    "achieved_fitness",
    "learning_score",
    "n_selected",
    "n_transferred",
    "n_overlap",
    "nearest_distance",
    "speedup",
];

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn fields(r: &ProblemRecord) -> [String; 11] {
    [
        r.dataset_id.clone(),
        r.phase.to_string(),
        r.evals.to_string(),
        r.target.to_string(),
        r.achieved_fitness.to_string(),
        r.learning_score.to_string(),
        r.n_selected.to_string(),
        r.n_transferred.to_string(),
        r.n_overlap.to_string(),
        opt(r.nearest_distance),
        opt(r.speedup),
    ]
}

pub fn render_report(r: &ExperimentReport) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(REPORT_HEADER)?;
    for rec in &r.records {
        w.write_record(fields(rec))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))?;
    let mut out = String::from_utf8(bytes).expect("csv output of strings is utf-8");
    if let Some(a) = r.arithmetic_mean_speedup {
        out.push_str(&format!("# arithmetic_mean_speedup,{a}\n"));
    }
    if let Some(g) = r.geometric_mean_speedup {
        out.push_str(&format!("# geometric_mean_speedup,{g}\n"));
    }
    for m in &r.phase_means {
        out.push_str(&format!("# {}_mean_fitness,{}\n", m.phase, m.mean_fitness));
        out.push_str(&format!(
            "# {}_mean_learning_score,{}\n",
            m.phase, m.mean_learning_score
        ));
    }
    Ok(out)
}

pub fn write_report(r: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_report(r)?).map_err(|e| Error::io(path, e))
}

/// The `evals` and `speedup` columns of a report file, in row order.
pub fn read_report_speedups(path: impl AsRef<Path>) -> Result<(Vec<usize>, Vec<Option<f64>>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: "unexpected report header".into(),
        });
    }
    let mut evals = Vec::new();
    let mut speedups = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::Parse {
            path: path.display().to_string(),
            line: i + 2,
            message: format!("bad {what}"),
        };
        evals.push(rec[2].parse().map_err(|_| bad("evals"))?);
        speedups.push(match &rec[10] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad("speedup"))?),
        });
    }
    Ok((evals, speedups))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub n_records: usize,
    pub arithmetic_mean_speedup: Option<f64>,
    pub geometric_mean_speedup: Option<f64>,
}

impl ReportSummary {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let (evals, speedups) = read_report_speedups(path)?;
        let present: Vec<f64> = speedups.into_iter().flatten().collect();
        let (a, g) = speedup_means(&present);
        Ok(ReportSummary {
            n_records: evals.len(),
            arithmetic_mean_speedup: a,
            geometric_mean_speedup: g,
        })
    }
}

pub fn write_targets(targets: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text: String = targets.iter().map(|t| format!("{t}\n")).collect();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_targets(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.trim()
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: format!("not a number: {line:?}"),
                })
        })
        .collect()
}
