#![allow(dead_code)]

use std::collections::HashMap;

use featmeta::dataset::Row;
use featmeta::metricspace::PatternDistribution;
use featmeta::Dataset;
use proptest::prelude::*;

/// Random dataset over a prefix of the shared names `f0..f7`.
pub fn dataset(max_features: usize, max_rows: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_features, 1..=max_rows)
        .prop_flat_map(|(nf, nr)| {
            (
                Just(nf),
                proptest::collection::vec(
                    (proptest::collection::vec(any::<bool>(), nf), any::<bool>()),
                    nr,
                ),
            )
        })
        .prop_map(|(nf, rows)| build("p", nf, &rows))
}

pub fn build(id: &str, nf: usize, rows: &[(Vec<bool>, bool)]) -> Dataset {
    let features = (0..nf).map(|i| format!("f{i}")).collect();
    let rows = rows
        .iter()
        .map(|(bits, y)| {
            let present = bits
                .iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(|(i, _)| i as u32)
                .collect();
            Row::new(present, *y)
        })
        .collect();
    Dataset::new(id, features, rows).unwrap()
}

/// Plug-in MI by explicit enumeration of the joint distribution of the
/// selected columns and the target.
pub fn mi_oracle(d: &Dataset, cols: &[usize]) -> f64 {
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

/// Square-root JSD computed from scratch over the union of supports.
pub fn distance_oracle(p: &PatternDistribution, q: &PatternDistribution) -> f64 {
    let mut keys: Vec<_> = p
        .support()
        .iter()
        .chain(q.support())
        .map(|(k, _)| k.clone())
        .collect();
    keys.sort();
    keys.dedup();
    let mut js = 0.0;
    for k in keys {
        let (a, b) = (p.probability(&k), q.probability(&k));
        let m = (a + b) / 2.0;
        if a > 0.0 {
            js += 0.5 * a * (a / m).log2();
        }
        if b > 0.0 {
            js += 0.5 * b * (b / m).log2();
        }
    }
    js.clamp(0.0, 1.0).sqrt()
}
