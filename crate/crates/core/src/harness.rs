//! Experiment runner: seeding, (algorithm x function x run) cell execution,
//! convergence traces, and the report pipeline (JSON-lines run records plus
//! CSV comparison tables).
//!
//! Cells are embarrassingly parallel. Each cell derives its own RNG seed
//! from the master seed by hashing `(master_seed, algorithm, function,
//! run_index)`, so results are independent of the worker count and adding
//! algorithms does not reshuffle existing cells.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write as IoWrite};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchfn::{self, ObjectiveFunction};
use crate::de::{self, Budget, Evaluator};
use crate::eti::{self, EtiState, EventRecord, ImpulseKind};
use crate::stats::{self, ComparisonMark};
use crate::variants::{named_config, AlgorithmConfig};
use crate::{Error, Result};

/// Suite construction parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub dim: usize,
}

fn default_runs() -> usize {
    51
}

/// An experiment: which algorithms run on which suite, how often, and for
/// how many evaluations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: SuiteConfig,
    /// Named configurations, e.g. `de-rand-1/plain`, `jde/eti`.
    pub algorithms: Vec<String>,
    /// Optional subset of suite function ids; all functions when absent.
    #[serde(default)]
    pub functions: Option<Vec<String>>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Defaults to `dim * 10_000`.
    #[serde(default)]
    pub max_fes: Option<u64>,
    /// FES between convergence samples; defaults to `max_fes / 200`.
    #[serde(default)]
    pub record_stride: Option<u64>,
    #[serde(default)]
    pub master_seed: u64,
    /// Write per-impulse event logs next to the run records.
    #[serde(default)]
    pub log_events: bool,
}

impl ExperimentConfig {
    pub fn max_fes(&self) -> u64 {
        self.max_fes.unwrap_or(self.suite.dim as u64 * 10_000)
    }

    pub fn record_stride(&self) -> u64 {
        self.record_stride.unwrap_or_else(|| (self.max_fes() / 200).max(1))
    }

    /// Resolve algorithm names and check the cheap invariants. All
    /// configuration errors surface here, before any evaluation.
    pub fn resolve(&self) -> Result<Vec<AlgorithmConfig>> {
        if self.runs < 1 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms configured".into()));
        }
        let configs: Vec<AlgorithmConfig> = self
            .algorithms
            .iter()
            .map(|name| named_config(name))
            .collect::<Result<_>>()?;
        for cfg in &configs {
            if self.max_fes() < cfg.np as u64 {
                return Err(Error::InvalidConfig(format!(
                    "max_fes {} cannot cover one population of `{}` (NP = {})",
                    self.max_fes(),
                    cfg.name,
                    cfg.np
                )));
            }
        }
        Ok(configs)
    }
}

/// One point of a best-so-far convergence curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fes: u64,
    pub error: f64,
}

/// Everything one seeded run produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub function: String,
    pub seed: u64,
    pub run_index: usize,
    /// Best-so-far error sampled on the record stride; non-increasing.
    pub curve: Vec<CurvePoint>,
    /// Floored final error.
    pub final_error: f64,
    /// Best point seen across all evaluations (including impulses).
    #[serde(default)]
    pub best_position: Vec<f64>,
    pub fes_used: u64,
    pub init_evals: u64,
    pub trial_evals: u64,
    pub stabilizing_events: u64,
    pub stabilizing_accepted: u64,
    pub destabilizing_events: u64,
}

impl RunRecord {
    /// Evaluations attributed to impulses.
    pub fn impulse_evals(&self) -> u64 {
        self.stabilizing_events + self.destabilizing_events
    }
}

/// Deterministic per-cell seed from the master seed and cell coordinates.
pub fn cell_seed(master_seed: u64, algorithm: &str, function: &str, run_index: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update([0]);
    hasher.update(algorithm.as_bytes());
    hasher.update([0]);
    hasher.update(function.as_bytes());
    hasher.update([0]);
    hasher.update((run_index as u64).to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

/// Execute one (algorithm, function, seed) cell: initialize, then alternate
/// DE generations with the impulse hook until the budget is exhausted. The
/// best-so-far archive is updated on every evaluation, so destabilizing
/// impulses never lose the best solution in the report.
pub fn run_cell(
    cfg: &AlgorithmConfig,
    objective: &ObjectiveFunction,
    seed: u64,
    run_index: usize,
    max_fes: u64,
    record_stride: u64,
    mut event_sink: Option<&mut dyn FnMut(&EventRecord)>,
) -> Result<RunRecord> {
    let mut evaluator = Evaluator::new(objective, Budget::new(max_fes)).with_trace(record_stride);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut control = cfg.make_control();
    let mut pop = de::initialize(cfg.np, cfg.mutation, &mut evaluator, &mut rng)?;
    let mut state = EtiState::new(cfg.ln, cfg.un, cfg.pr_base, pop.best_fitness());

    let mut trial_evals = 0u64;
    let mut stabilizing_events = 0u64;
    let mut stabilizing_accepted = 0u64;
    let mut destabilizing_events = 0u64;

    while evaluator.budget().remaining() > 0 {
        let outcome = de::evolve_generation(&mut pop, control.as_mut(), &mut evaluator, &mut rng);
        trial_evals += u64::from(outcome.evaluated);
        if cfg.ablation.eti_mode.enabled() {
            let generation = pop.generation;
            eti::generation_hook(
                &mut pop,
                outcome.replacements,
                &mut state,
                &mut evaluator,
                &mut rng,
                &cfg.ablation,
                cfg.destab_all_dims,
                |event| {
                    match event.kind {
                        ImpulseKind::Stabilizing => {
                            stabilizing_events += 1;
                            if event.accepted {
                                stabilizing_accepted += 1;
                            }
                        }
                        ImpulseKind::Destabilizing => destabilizing_events += 1,
                    }
                    if let Some(sink) = event_sink.as_deref_mut() {
                        sink(&EventRecord::from_event(generation, event));
                    }
                },
            );
        }
    }

    let optimum = objective.optimum_value();
    let curve: Vec<CurvePoint> = evaluator
        .curve_with_terminal()
        .into_iter()
        .map(|(fes, value)| CurvePoint {
            fes,
            error: (value - optimum).max(0.0),
        })
        .collect();
    let final_error = stats::floor_error(curve.last().map(|p| p.error).unwrap_or(f64::INFINITY));

    Ok(RunRecord {
        algorithm: cfg.name.clone(),
        function: objective.id().to_string(),
        seed,
        run_index,
        curve,
        final_error,
        best_position: evaluator.best_point().to_vec(),
        fes_used: evaluator.budget().used(),
        init_evals: cfg.np as u64,
        trial_evals,
        stabilizing_events,
        stabilizing_accepted,
        destabilizing_events,
    })
}

/// Records plus any per-cell failures (which do not abort the experiment).
#[derive(Debug)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub failures: Vec<String>,
}

fn sanitize(name: &str) -> String {
    name.replace(['/', '\\'], "_")
}

/// Run every (algorithm x function x run) cell of the experiment with
/// `jobs` worker threads and write records, manifest, and comparison
/// tables into `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    jobs: usize,
    out_dir: &Path,
) -> Result<ExperimentOutput> {
    let algorithms = config.resolve()?;
    let suite = benchfn::make_suite(config.suite.seed, config.suite.dim)?;
    let functions: Vec<&ObjectiveFunction> = match &config.functions {
        None => suite.iter().collect(),
        Some(wanted) => {
            for id in wanted {
                if !suite.iter().any(|f| f.id() == id) {
                    return Err(Error::InvalidConfig(format!(
                        "function `{id}` is not part of the suite"
                    )));
                }
            }
            suite.iter().filter(|f| wanted.contains(&f.id().to_string())).collect()
        }
    };

    fs::create_dir_all(out_dir)?;
    let records_dir = out_dir.join("records");
    fs::create_dir_all(&records_dir)?;
    let events_dir = out_dir.join("events");
    if config.log_events {
        fs::create_dir_all(&events_dir)?;
    }

    let max_fes = config.max_fes();
    let stride = config.record_stride();

    let mut cells = Vec::new();
    for cfg in &algorithms {
        for fun in &functions {
            for run_index in 0..config.runs {
                cells.push((cfg, *fun, run_index));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let log_events = config.log_events;
    let master_seed = config.master_seed;
    let outcomes: Vec<std::result::Result<RunRecord, String>> = pool.install(|| {
        cells
            .par_iter()
            .map(|(cfg, fun, run_index)| {
                let seed = cell_seed(master_seed, &cfg.name, fun.id(), *run_index);
                let mut events: Vec<EventRecord> = Vec::new();
                let mut sink = |e: &EventRecord| events.push(e.clone());
                let result = run_cell(
                    cfg,
                    fun,
                    seed,
                    *run_index,
                    max_fes,
                    stride,
                    log_events.then_some(&mut sink as &mut dyn FnMut(&EventRecord)),
                );
                match result {
                    Ok(record) => {
                        if log_events {
                            let path = events_dir.join(format!(
                                "{}__{}__run{:03}.jsonl",
                                sanitize(&cfg.name),
                                sanitize(fun.id()),
                                run_index
                            ));
                            if let Err(e) = write_jsonl(&path, &events) {
                                return Err(format!(
                                    "{}/{} run {}: event log failed: {e}",
                                    cfg.name,
                                    fun.id(),
                                    run_index
                                ));
                            }
                        }
                        Ok(record)
                    }
                    Err(e) => Err(format!("{}/{} run {}: {e}", cfg.name, fun.id(), run_index)),
                }
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(e),
        }
    }

    // Per-(algorithm, function) record files, runs in order.
    let mut grouped: BTreeMap<(String, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in &records {
        grouped
            .entry((r.algorithm.clone(), r.function.clone()))
            .or_default()
            .push(r);
    }
    for ((alg, fun), mut rs) in grouped {
        rs.sort_by_key(|r| r.run_index);
        let path = records_dir.join(format!("{}__{}.jsonl", sanitize(&alg), sanitize(&fun)));
        write_jsonl(&path, &rs)?;
    }

    let manifest = serde_json::json!({
        "config": config,
        "algorithms": algorithms,
        "suite": benchfn::manifest(config.suite.seed, &suite),
    });
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;

    if !failures.is_empty() {
        fs::write(out_dir.join("failures.log"), failures.join("\n"))?;
    }

    write_reports(&records, out_dir)?;
    Ok(ExperimentOutput { records, failures })
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Load every `*.jsonl` run-record file under `dir` (sorted by file name).
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
        .collect();
    paths.sort();
    let mut records = Vec::new();
    for path in paths {
        let reader = BufReader::new(fs::File::open(&path)?);
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
    }
    Ok(records)
}

fn fmt_e(v: f64) -> String {
    format!("{v:.6e}")
}

/// Final floored errors per (algorithm, function), runs in stored order.
fn error_samples(records: &[RunRecord]) -> BTreeMap<(String, String), Vec<f64>> {
    let mut samples: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in records {
        samples
            .entry((r.algorithm.clone(), r.function.clone()))
            .or_default()
            .push(r.final_error);
    }
    samples
}

/// Write `summary.csv`, `marks.csv`, `wtl.csv` and (for three or more
/// algorithms) `holm.csv` from run records. Pure with respect to the
/// records, so recomputing from stored records reproduces the original
/// byte-for-byte.
pub fn write_reports(records: &[RunRecord], out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let samples = error_samples(records);

    let mut algorithms: Vec<String> = samples.keys().map(|(a, _)| a.clone()).collect();
    algorithms.sort();
    algorithms.dedup();
    let mut functions: Vec<String> = samples.keys().map(|(_, f)| f.clone()).collect();
    functions.sort();
    functions.dedup();

    // summary.csv
    {
        let mut w = csv::Writer::from_path(out_dir.join("summary.csv"))?;
        w.write_record(["algorithm", "function", "mean_error", "std_error", "n"])?;
        for ((alg, fun), errors) in &samples {
            let s = stats::summarize(errors);
            w.write_record([
                alg.as_str(),
                fun.as_str(),
                &fmt_e(s.mean),
                &fmt_e(s.stddev),
                &s.n.to_string(),
            ])?;
        }
        w.flush()?;
    }

    // marks.csv + wtl.csv: every non-plain configuration against its
    // family's plain baseline, when both are present.
    let mut pairs: Vec<(String, String)> = Vec::new();
    for alg in &algorithms {
        if let Some((family, mode)) = alg.split_once('/') {
            let base = format!("{family}/plain");
            if mode != "plain" && algorithms.contains(&base) {
                pairs.push((base, alg.clone()));
            }
        }
    }
    {
        let mut marks_writer = csv::Writer::from_path(out_dir.join("marks.csv"))?;
        marks_writer.write_record(["base", "variant", "function", "mark", "p_value"])?;
        let mut wtl_writer = csv::Writer::from_path(out_dir.join("wtl.csv"))?;
        wtl_writer.write_record(["base", "variant", "wins", "ties", "losses"])?;
        for (base, variant) in &pairs {
            let mut marks: Vec<ComparisonMark> = Vec::new();
            for fun in &functions {
                let (Some(base_errors), Some(variant_errors)) = (
                    samples.get(&(base.clone(), fun.clone())),
                    samples.get(&(variant.clone(), fun.clone())),
                ) else {
                    continue;
                };
                let mark = stats::wilcoxon_ranksum(variant_errors, base_errors, 0.05);
                marks.push(mark);
                marks_writer.write_record([
                    base.as_str(),
                    variant.as_str(),
                    fun.as_str(),
                    mark.mark.symbol(),
                    &fmt_e(mark.p_value),
                ])?;
            }
            let (w, t, l) = stats::win_tie_lose(&marks);
            wtl_writer.write_record([
                base.as_str(),
                variant.as_str(),
                &w.to_string(),
                &t.to_string(),
                &l.to_string(),
            ])?;
        }
        marks_writer.flush()?;
        wtl_writer.flush()?;
    }

    // holm.csv: rank-based multiple comparison against the best-ranked
    // algorithm, when at least three algorithms share the full table.
    if algorithms.len() >= 3 {
        let table: Option<Vec<Vec<f64>>> = algorithms
            .iter()
            .map(|alg| {
                functions
                    .iter()
                    .map(|fun| {
                        samples
                            .get(&(alg.clone(), fun.clone()))
                            .map(|errors| stats::summarize(errors).mean)
                    })
                    .collect::<Option<Vec<f64>>>()
            })
            .collect();
        if let Some(table) = table {
            let ranks = stats::average_ranks(&table);
            let reference = ranks
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
                .expect("at least one algorithm");
            let rows = stats::holm_table(&ranks, reference, functions.len(), 0.05);
            let mut w = csv::Writer::from_path(out_dir.join("holm.csv"))?;
            w.write_record([
                "reference",
                "algorithm",
                "rank",
                "z",
                "p",
                "threshold",
                "hypothesis",
            ])?;
            for row in rows {
                w.write_record([
                    algorithms[reference].as_str(),
                    algorithms[row.algorithm].as_str(),
                    &format!("{:.4}", row.rank),
                    &fmt_e(row.z),
                    &fmt_e(row.p),
                    &fmt_e(row.threshold),
                    if row.rejected { "rejected" } else { "accepted" },
                ])?;
            }
            w.flush()?;
        }
    }

    Ok(())
}
