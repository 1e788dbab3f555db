//! Per-run regret traces and their CSV form.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub x: Vec<f64>,
    /// Noisy observation before the adversary acts.
    pub y_clean: f64,
    pub y_observed: f64,
    pub corrupted: bool,
    pub inst_regret: f64,
    pub cum_regret: f64,
    pub beta: f64,
    pub tc_estimate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub algorithm: String,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn file_name(algorithm: &str, seed: u64) -> String {
        format!("{algorithm}_seed{seed}.csv")
    }

    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn queries(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.x.clone()).collect()
    }

    pub fn corruption_count(&self) -> usize {
        self.rows.iter().filter(|r| r.corrupted).count()
    }

    fn dim(&self) -> usize {
        self.rows.first().map_or(1, |r| r.x.len())
    }

    fn header(dim: usize) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        if dim == 1 {
            h.push("x".into());
        } else {
            h.extend((0..dim).map(|d| format!("x{d}")));
        }
        for c in [
            "y_clean",
            "y_observed",
            "corrupted",
            "inst_regret",
            "cum_regret",
            "beta",
            "tc_estimate",
        ] {
            h.push(c.into());
        }
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::header(self.dim()))?;
        for r in &self.rows {
            let mut rec = vec![r.t.to_string()];
            rec.extend(r.x.iter().map(f64::to_string));
            rec.push(r.y_clean.to_string());
            rec.push(r.y_observed.to_string());
            rec.push(u8::from(r.corrupted).to_string());
            rec.push(r.inst_regret.to_string());
            rec.push(r.cum_regret.to_string());
            rec.push(r.beta.to_string());
            rec.push(r.tc_estimate.to_string());
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(algorithm: &str, seed: u64, input: R) -> Result<Self, BenchError> {
        let mut r = csv::Reader::from_reader(input);
        let dim = r.headers()?.len() - 8;
        let bad = |what: &str| BenchError::Trace(format!("{algorithm} seed {seed}: bad {what}"));
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let f = |i: usize| -> Result<f64, BenchError> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("number"))
            };
            let n = |i: usize| -> Result<usize, BenchError> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("integer"))
            };
            let x = (1..=dim).map(f).collect::<Result<Vec<_>, _>>()?;
            let base = dim + 1;
            rows.push(TraceRow {
                t: n(0)?,
                x,
                y_clean: f(base)?,
                y_observed: f(base + 1)?,
                corrupted: n(base + 2)? != 0,
                inst_regret: f(base + 3)?,
                cum_regret: f(base + 4)?,
                beta: f(base + 5)?,
                tc_estimate: n(base + 6)?,
            });
        }
        Ok(Self {
            algorithm: algorithm.to_string(),
            seed,
            rows,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<(), BenchError> {
        let file = File::create(dir.join(Self::file_name(&self.algorithm, self.seed)))?;
        self.write_csv(file)
    }

    /// Loads a trace from a file named `<algorithm>_seed<seed>.csv`.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| BenchError::Trace(format!("bad file name {}", path.display())))?;
        let (algorithm, seed) = stem
            .rsplit_once("_seed")
            .and_then(|(a, s)| s.parse().ok().map(|s| (a, s)))
            .ok_or_else(|| BenchError::Trace(format!("bad file name {}", path.display())))?;
        Self::read_csv(algorithm, seed, File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(dim: usize) -> Trace {
        Trace {
            algorithm: "fc_rcgp_ucb".into(),
            seed: 3,
            rows: (1..=3)
                .map(|t| TraceRow {
                    t,
                    x: vec![0.1 * t as f64; dim],
                    y_clean: 1.0 / 3.0,
                    y_observed: if t == 2 { 25.0 } else { 1.0 / 3.0 },
                    corrupted: t == 2,
                    inst_regret: 0.5,
                    cum_regret: 0.5 * t as f64,
                    beta: 12.25,
                    tc_estimate: t / 2,
                })
                .collect(),
        }
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        for dim in [1, 2] {
            let trace = toy(dim);
            let mut buf = Vec::new();
            trace.write_csv(&mut buf).unwrap();
            let back = Trace::read_csv("fc_rcgp_ucb", 3, buf.as_slice()).unwrap();
            assert_eq!(back, trace);
        }
    }

    #[test]
    fn header_names_columns() {
        let mut buf = Vec::new();
        toy(1).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "t,x,y_clean,y_observed,corrupted,inst_regret,cum_regret,beta,tc_estimate"
        );
    }

    #[test]
    fn file_names_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let trace = toy(1);
        trace.save(dir.path()).unwrap();
        let back = Trace::load(&dir.path().join("fc_rcgp_ucb_seed3.csv")).unwrap();
        assert_eq!(back, trace);
    }
}
