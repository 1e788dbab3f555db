//! Mean cumulative regret and its standard error across seeds.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::trace::Trace;
use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub algorithm: String,
    pub t: usize,
    pub n: usize,
    pub mean_cum_regret: f64,
    /// Standard error with an `n - 1` denominator; 0 when `n = 1`.
    pub se_cum_regret: f64,
    /// False when `n = 1` and the standard error is undefined.
    pub se_defined: bool,
}

/// Sample mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// Per-algorithm, per-step summary. Steps are aligned by index; traces of
/// unequal length contribute only to the steps they reach.
pub fn aggregate(traces: &[Trace]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<&str, Vec<&Trace>> = BTreeMap::new();
    for tr in traces {
        groups.entry(&tr.algorithm).or_default().push(tr);
    }
    let mut out = Vec::new();
    for (algorithm, group) in groups {
        let steps = group.iter().map(|t| t.rows.len()).max().unwrap_or(0);
        for i in 0..steps {
            let values: Vec<f64> = group
                .iter()
                .filter_map(|tr| tr.rows.get(i).map(|r| r.cum_regret))
                .collect();
            let (mean, se) = mean_se(&values);
            out.push(AggregateRow {
                algorithm: algorithm.to_string(),
                t: i + 1,
                n: values.len(),
                mean_cum_regret: mean,
                se_cum_regret: se.unwrap_or(0.0),
                se_defined: se.is_some(),
            });
        }
    }
    out
}

pub fn write_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "algorithm",
        "t",
        "n",
        "mean_cum_regret",
        "se_cum_regret",
        "se_defined",
    ])?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.t.to_string(),
            r.n.to_string(),
            r.mean_cum_regret.to_string(),
            r.se_cum_regret.to_string(),
            r.se_defined.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Loads every `*_seed*.csv` trace in a directory, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<Trace>, BenchError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "csv")
                && p.file_stem()
                    .and_then(|s| s.to_str())
                    .is_some_and(|s| s.contains("_seed"))
        })
        .collect();
    paths.sort();
    paths.iter().map(|p| Trace::load(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceRow;

    fn trace(algorithm: &str, seed: u64, cum: &[f64]) -> Trace {
        Trace {
            algorithm: algorithm.into(),
            seed,
            rows: cum
                .iter()
                .enumerate()
                .map(|(i, c)| TraceRow {
                    t: i + 1,
                    x: vec![0.0],
                    y_clean: 0.0,
                    y_observed: 0.0,
                    corrupted: false,
                    inst_regret: 0.0,
                    cum_regret: *c,
                    beta: 1.0,
                    tc_estimate: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn single_trace_flags_undefined_se() {
        let rows = aggregate(&[trace("a", 0, &[1.0, 2.0])]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].mean_cum_regret, 2.0);
        assert_eq!(rows[1].se_cum_regret, 0.0);
        assert!(!rows[1].se_defined);
    }

    #[test]
    fn identical_traces_have_zero_se() {
        let rows = aggregate(&[trace("a", 0, &[1.0, 3.0]), trace("a", 1, &[1.0, 3.0])]);
        assert!(rows.iter().all(|r| r.se_cum_regret == 0.0 && r.se_defined));
    }

    #[test]
    fn three_trace_toy() {
        // values 1, 2, 6: mean 3, sample var 7, se sqrt(7/3)
        let rows = aggregate(&[
            trace("b", 0, &[1.0]),
            trace("b", 1, &[2.0]),
            trace("b", 2, &[6.0]),
            trace("a", 0, &[0.5]),
        ]);
        let b = rows.iter().find(|r| r.algorithm == "b").unwrap();
        assert_eq!(b.mean_cum_regret, 3.0);
        assert!((b.se_cum_regret - (7.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(rows[0].algorithm, "a");
    }
}
