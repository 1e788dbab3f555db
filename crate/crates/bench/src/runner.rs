//! Sweeps over (algorithm, seed) cells.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use rcgp_ucb::adversary::{Adversary, CorruptionBudget};
use rcgp_ucb::algorithms::{AlgorithmKind, BoConfig, BoState, DomainSpec, ModelConfig};
use rcgp_ucb::design::shifted_halton;
use rcgp_ucb::kernels::Point;
use rcgp_ucb::objectives::Objective;
use rcgp_ucb::streams::{stream_rng, DESIGN, NOISE};
use rcgp_ucb::Error;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::trace::{Trace, TraceRow};
use crate::BenchError;

/// Environment variable that overrides the default output root.
pub const OUTPUT_ENV: &str = "RCGP_BENCH_OUT";

const STREAM_DOC: &str = "ChaCha8Rng::seed_from_u64(seed); set_stream(stream); \
set_word_pos(index << 32); streams: noise=1 (index = observation number, initial design first), \
design=2 (index 0, Cranley-Patterson shift of a Halton design)";

/// Brute-force maximizer used for regret: 10001 points in 1D, 256^2 in 2D.
pub fn optimum(obj: &Objective) -> rcgp_ucb::Result<(Point, f64)> {
    let resolution = if obj.dim() == 1 { 10_001 } else { 256 };
    obj.grid_argmax(resolution)
}

/// Initial design shared by every algorithm for a given seed.
pub fn initial_design(
    obj: &Objective,
    n: usize,
    seed: u64,
) -> rcgp_ucb::Result<(Vec<Point>, Vec<f64>)> {
    let xs = shifted_halton(n, &obj.bounds, &mut stream_rng(seed, DESIGN, 0))?;
    let ys = xs
        .iter()
        .enumerate()
        .map(|(i, x)| obj.observe(x, &mut stream_rng(seed, NOISE, i as u64)))
        .collect::<rcgp_ucb::Result<_>>()?;
    Ok((xs, ys))
}

pub fn bo_config(cfg: &ExperimentConfig, obj: &Objective, kind: AlgorithmKind) -> BoConfig {
    BoConfig {
        kind,
        model: ModelConfig {
            kernel: cfg.kernel.clone(),
            noise_var: cfg.model_noise_var(),
            shape: cfg.model.shape,
            standardize: cfg.model.standardize,
            plateau: cfg.model.plateau,
            hyperparameters: cfg.model.hyperparameters.clone(),
            sigma_proxy: cfg.model.sigma_proxy,
        },
        schedule: cfg.schedule.clone(),
        domain: DomainSpec {
            bounds: obj.bounds.clone(),
            grid_size: cfg.grid_size,
            starts: cfg.starts,
        },
        horizon: cfg.n_iterations,
    }
}

/// Runs one (algorithm, seed) cell.
pub fn run_cell(cfg: &ExperimentConfig, kind: AlgorithmKind, seed: u64) -> rcgp_ucb::Result<Trace> {
    let obj = Objective::new(cfg.objective.name, cfg.objective.noise_var)?;
    let (x_star, f_star) = optimum(&obj)?;
    let (xs, ys) = initial_design(&obj, cfg.n_initial, seed)?;
    let mut state = BoState::new(bo_config(cfg, &obj, kind), xs, ys)?;
    let budget = CorruptionBudget::new(cfg.adversary.budget(), cfg.n_iterations)?;
    let mut adversary = Adversary::new(cfg.adversary.policy(&x_star), budget)?;

    let mut rows = Vec::with_capacity(cfg.n_iterations);
    let mut cum = 0.0;
    for _ in 0..cfg.n_iterations {
        let mut clean = 0.0;
        let mut corrupted = false;
        let record = state.step(|x, t| {
            let index = (cfg.n_initial + t - 1) as u64;
            clean = obj.observe(x, &mut stream_rng(seed, NOISE, index))?;
            let (y, flag) = adversary.corrupt(x, clean);
            corrupted = flag;
            Ok(y)
        })?;
        let inst = f_star - obj.evaluate(&record.x)?;
        cum += inst;
        rows.push(TraceRow {
            t: record.t,
            x: record.x,
            y_clean: clean,
            y_observed: record.y,
            corrupted,
            inst_regret: inst,
            cum_regret: cum,
            beta: record.beta,
            tc_estimate: record.tc_estimate,
        });
    }
    Ok(Trace {
        algorithm: kind.name().to_string(),
        seed,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CellOutcome {
    pub algorithm: String,
    pub seed: u64,
    #[serde(skip)]
    pub trace: Option<Trace>,
    pub error: Option<String>,
    #[serde(skip)]
    pub numerical: bool,
}

/// Runs every cell; a failing cell is recorded and the sweep continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Vec<CellOutcome> {
    let cells: Vec<(AlgorithmKind, u64)> = cfg
        .algorithms
        .iter()
        .flat_map(|a| cfg.seeds.iter().map(move |s| (*a, *s)))
        .collect();
    let run = |&(kind, seed): &(AlgorithmKind, u64)| {
        let result = run_cell(cfg, kind, seed);
        let (trace, error, numerical) = match result {
            Ok(t) => (Some(t), None, false),
            Err(e) => (None, Some(e.to_string()), e.is_numerical()),
        };
        CellOutcome {
            algorithm: kind.name().to_string(),
            seed,
            trace,
            error,
            numerical,
        }
    };
    if cfg.parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    }
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    library: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    x_star: Point,
    f_star: f64,
    beta_prime_formula: &'static str,
    random_streams: &'static str,
    wall_time_seconds: f64,
    cells: &'a [CellOutcome],
}

/// Output directory: explicit argument, else the config's `output`, else
/// `$RCGP_BENCH_OUT/<name>`, else `results/<name>`.
pub fn output_dir(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output {
        return p.clone();
    }
    let name = cfg.name.clone().unwrap_or_else(|| "experiment".into());
    let root = std::env::var_os(OUTPUT_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from);
    root.join(name)
}

/// Runs the sweep and writes one CSV per successful cell plus `metadata.json`.
pub fn run_and_save(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<CellOutcome>, BenchError> {
    let obj = Objective::new(cfg.objective.name, cfg.objective.noise_var)
        .map_err(|e| BenchError::Config(e.to_string()))?;
    let (x_star, f_star) = optimum(&obj).map_err(BenchError::Run)?;
    let started = Instant::now();
    let outcomes = run_experiment(cfg);
    let wall = started.elapsed().as_secs_f64();
    std::fs::create_dir_all(dir)?;
    for trace in outcomes.iter().filter_map(|o| o.trace.as_ref()) {
        trace.save(dir)?;
    }
    let case = rcgp_ucb::algorithms::BoState::new(
        bo_config(cfg, &obj, AlgorithmKind::GpUcb),
        vec![],
        vec![],
    )
    .map_err(|e| BenchError::Config(e.to_string()))?
    .case();
    let meta = Metadata {
        library: "rcgp-ucb",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        x_star,
        f_star,
        beta_prime_formula: case.beta_prime_formula(),
        random_streams: STREAM_DOC,
        wall_time_seconds: wall,
        cells: &outcomes,
    };
    let file = std::fs::File::create(dir.join("metadata.json"))?;
    serde_json::to_writer_pretty(file, &meta).map_err(|e| BenchError::Trace(e.to_string()))?;
    Ok(outcomes)
}

/// First numerical failure among the outcomes, if any.
pub fn first_failure(outcomes: &[CellOutcome]) -> Option<(&CellOutcome, bool)> {
    outcomes
        .iter()
        .find(|o| o.error.is_some())
        .map(|o| (o, o.numerical))
}

impl From<Error> for BenchError {
    fn from(e: Error) -> Self {
        BenchError::Run(e)
    }
}
