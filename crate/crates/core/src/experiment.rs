//! The transfer protocol over pairs and seeds, result persistence, and the
//! aggregation pass that tables and figures share.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::maxcut::BRUTE_FORCE_LIMIT;
use crate::optimizer::OptimizerConfig;
use crate::qsim::{AnsatzSpec, CircuitKind, MAX_QUBITS};
use crate::sampler::{build_dataset, Dataset, DatasetSpec, GraphPair};
use crate::stats::{BoxStats, Curve, Summary};
use crate::vqe::{run_vqe, InitStrategy, RunRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    PretrainSource,
    PostTl,
    Standard,
    Random,
    AccelPostTl,
    AccelStandard,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::PretrainSource,
        Variant::PostTl,
        Variant::Standard,
        Variant::Random,
        Variant::AccelPostTl,
        Variant::AccelStandard,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::PretrainSource => "pretrain_source",
            Variant::PostTl => "post_tl",
            Variant::Standard => "standard",
            Variant::Random => "random",
            Variant::AccelPostTl => "accel_post_tl",
            Variant::AccelStandard => "accel_standard",
        }
    }

    pub fn is_accel(&self) -> bool {
        matches!(self, Variant::AccelPostTl | Variant::AccelStandard)
    }

    /// The variant a table row is compared against, if any.
    pub fn baseline(&self) -> Option<Variant> {
        match self {
            Variant::PostTl | Variant::Random => Some(Variant::Standard),
            Variant::AccelPostTl => Some(Variant::AccelStandard),
            _ => None,
        }
    }

    fn stream_tag(&self) -> u64 {
        match self {
            Variant::PretrainSource => 1,
            Variant::PostTl => 2,
            Variant::Standard => 3,
            Variant::Random => 4,
            Variant::AccelPostTl => 5,
            Variant::AccelStandard => 6,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown variant {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub node_count: usize,
    pub layers: usize,
    pub circuits: Vec<CircuitKind>,
    pub pairs_per_hd: usize,
    pub hd_min: u32,
    pub hd_max: u32,
    pub seeds: Vec<u64>,
    pub maxiter_full: usize,
    pub maxiter_accel: usize,
    pub include_random_baseline: bool,
    /// Run post_tl, standard and random at `maxiter_full`.
    pub run_full: bool,
    /// Run the accelerated variants at `maxiter_accel`.
    pub run_accel: bool,
    pub rhobeg: f64,
    pub rhoend: f64,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
    pub attempt_cap: usize,
    pub restart_cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        ExperimentConfig {
            node_count: 12,
            layers: 3,
            circuits: CircuitKind::ALL.to_vec(),
            pairs_per_hd: 10,
            hd_min: 0,
            hd_max: 6,
            seeds: (0..10).collect(),
            maxiter_full: 1000,
            maxiter_accel: 50,
            include_random_baseline: true,
            run_full: true,
            run_accel: true,
            rhobeg: opt.rhobeg,
            rhoend: opt.rhoend,
            jobs: None,
            attempt_cap: crate::sampler::DEFAULT_ATTEMPT_CAP,
            restart_cap: crate::sampler::DEFAULT_RESTART_CAP,
        }
    }
}

impl ExperimentConfig {
    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        let limit = BRUTE_FORCE_LIMIT.min(MAX_QUBITS);
        if self.node_count < 2 || self.node_count > limit {
            p.push(format!("node_count must be in 2..={limit}, got {}", self.node_count));
        }
        if self.layers == 0 {
            p.push("layers must be >= 1".into());
        }
        if self.circuits.is_empty() {
            p.push("circuits must name at least one of base, had".into());
        }
        if self.circuits.iter().collect::<BTreeSet<_>>().len() != self.circuits.len() {
            p.push("circuits contains duplicates".into());
        }
        if self.pairs_per_hd == 0 {
            p.push("pairs_per_hd must be >= 1".into());
        }
        if self.hd_min > self.hd_max {
            p.push(format!("hd_min {} exceeds hd_max {}", self.hd_min, self.hd_max));
        }
        // The complement of an optimum is optimal too, so the minimum HD
        // never exceeds n/2.
        if self.hd_max as usize > self.node_count / 2 {
            p.push(format!(
                "hd_max {} is unreachable for {}-node graphs (at most {})",
                self.hd_max,
                self.node_count,
                self.node_count / 2
            ));
        }
        if self.seeds.is_empty() {
            p.push("seeds must not be empty".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            p.push("seeds contains duplicates".into());
        }
        if self.maxiter_accel == 0 {
            p.push("maxiter_accel must be >= 1".into());
        }
        if self.maxiter_accel >= self.maxiter_full {
            p.push(format!(
                "maxiter_accel ({}) must be below maxiter_full ({})",
                self.maxiter_accel, self.maxiter_full
            ));
        }
        if !self.run_full && !self.run_accel {
            p.push("at least one of run_full, run_accel must be set".into());
        }
        if let Err(Error::Config(list)) = self.optimizer(self.maxiter_full).validate() {
            p.extend(list);
        }
        if self.jobs == Some(0) {
            p.push("jobs must be >= 1".into());
        }
        if self.attempt_cap == 0 {
            p.push("attempt_cap must be >= 1".into());
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }

    pub fn optimizer(&self, max_evals: usize) -> OptimizerConfig {
        OptimizerConfig {
            rhobeg: self.rhobeg,
            rhoend: self.rhoend,
            max_evals,
        }
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        DatasetSpec {
            size: self.node_count,
            pairs_per_hd: self.pairs_per_hd,
            hd_range: self.hd_min..=self.hd_max,
            attempt_cap: self.attempt_cap,
            restart_cap: self.restart_cap,
        }
    }

    /// Variants executed per circuit, in canonical order.
    pub fn variants(&self) -> Vec<Variant> {
        Variant::ALL
            .into_iter()
            .filter(|v| match v {
                Variant::PretrainSource => true,
                Variant::PostTl | Variant::Standard => self.run_full,
                Variant::Random => self.run_full && self.include_random_baseline,
                Variant::AccelPostTl | Variant::AccelStandard => self.run_accel,
            })
            .collect()
    }

    pub fn pairs_per_seed(&self) -> usize {
        self.pairs_per_hd * (self.hd_max.saturating_sub(self.hd_min) as usize + 1)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for one run, keyed so that scheduling order is
/// irrelevant.
pub fn run_rng(seed: u64, pair_index: usize, variant: Variant, circuit: CircuitKind) -> ChaCha8Rng {
    let circuit_tag = match circuit {
        CircuitKind::Base => 1,
        CircuitKind::Had => 2,
    };
    let key = splitmix64(splitmix64(splitmix64(seed) ^ pair_index as u64) ^ (variant.stream_tag() << 8 | circuit_tag));
    ChaCha8Rng::seed_from_u64(key)
}

/// Stream used to sample the dataset of one seed.
pub fn dataset_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x6461_7461_7365_74))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub seed: u64,
    pub pair_index: usize,
    pub hd: u32,
    pub source_opt_cut: u32,
    pub target_opt_cut: u32,
    pub runs: Vec<(CircuitKind, Variant, RunRecord)>,
    pub failures: Vec<(CircuitKind, Variant, String)>,
}

impl PairResult {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn get(&self, circuit: CircuitKind, variant: Variant) -> Option<&RunRecord> {
        self.runs
            .iter()
            .find(|(c, v, _)| *c == circuit && *v == variant)
            .map(|(_, _, r)| r)
    }
}

/// Pre-trains on the source and runs every configured variant on the target.
/// A failing run is recorded in `failures`; runs that depend on it are
/// recorded as failed too.
pub fn run_pair(pair: &GraphPair, seed: u64, pair_index: usize, cfg: &ExperimentConfig) -> Result<PairResult> {
    for g in [&pair.source, &pair.target] {
        if g.n() != cfg.node_count {
            return Err(Error::Dimension {
                expected: cfg.node_count,
                got: g.n(),
            });
        }
    }
    let mut out = PairResult {
        seed,
        pair_index,
        hd: pair.hd,
        source_opt_cut: pair.source_opt_cut,
        target_opt_cut: pair.target_opt_cut,
        runs: Vec::new(),
        failures: Vec::new(),
    };
    let variants = cfg.variants();
    for &circuit in &cfg.circuits {
        let spec = AnsatzSpec::new(circuit, cfg.node_count, cfg.layers);
        let run = |variant: Variant, init: &InitStrategy| -> Result<RunRecord> {
            let (graph, opt_cut, side) = match variant {
                Variant::PretrainSource => (&pair.source, pair.source_opt_cut, "source"),
                _ => (&pair.target, pair.target_opt_cut, "target"),
            };
            let budget = if variant.is_accel() {
                cfg.maxiter_accel
            } else {
                cfg.maxiter_full
            };
            let mut rng = run_rng(seed, pair_index, variant, circuit);
            let mut rec = run_vqe(graph, &spec, init, &cfg.optimizer(budget), opt_cut, &mut rng)?;
            rec.graph_id = format!("{seed}/{pair_index}/{side}");
            Ok(rec)
        };

        let pretrained = match run(Variant::PretrainSource, &InitStrategy::NearZero) {
            Ok(rec) => {
                let theta = rec.final_params.clone();
                out.runs.push((circuit, Variant::PretrainSource, rec));
                Some(theta)
            }
            Err(e) => {
                out.failures.push((circuit, Variant::PretrainSource, e.to_string()));
                None
            }
        };
        for &variant in variants.iter().skip(1) {
            let init = match variant {
                Variant::PostTl | Variant::AccelPostTl => match &pretrained {
                    Some(theta) => InitStrategy::Transfer(theta.clone()),
                    None => {
                        out.failures.push((circuit, variant, "pre-training failed".into()));
                        continue;
                    }
                },
                Variant::Random => InitStrategy::RandomUniform,
                _ => InitStrategy::NearZero,
            };
            match run(variant, &init) {
                Ok(rec) => out.runs.push((circuit, variant, rec)),
                Err(e) => out.failures.push((circuit, variant, e.to_string())),
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Default)]
pub struct ExperimentOutcome {
    /// Sorted by `(seed, pair_index)`.
    pub results: Vec<PairResult>,
    pub datasets: Vec<Dataset>,
    /// Seeds whose dataset could not be built, with the reason.
    pub dataset_errors: Vec<(u64, String)>,
}

/// Samples one dataset per seed and runs every pair. `sink` sees each
/// result as it completes, always on the calling thread.
pub fn run_experiment(
    net: &Network,
    cfg: &ExperimentConfig,
    sink: impl FnMut(&PairResult) -> Result<()>,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let spec = cfg.dataset_spec();
    let mut datasets = Vec::new();
    let mut dataset_errors = Vec::new();
    for &seed in &cfg.seeds {
        match build_dataset(net, &spec, seed, &mut dataset_rng(seed)) {
            Ok(ds) => datasets.push(ds),
            Err(e) => {
                log::warn!("seed {seed}: {e}");
                dataset_errors.push((seed, e.to_string()));
            }
        }
    }
    let mut outcome = run_on_datasets(&datasets, cfg, sink)?;
    outcome.datasets = datasets;
    outcome.dataset_errors = dataset_errors;
    Ok(outcome)
}

/// Runs every pair of the given datasets across the worker pool.
pub fn run_on_datasets(
    datasets: &[Dataset],
    cfg: &ExperimentConfig,
    mut sink: impl FnMut(&PairResult) -> Result<()>,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let work: Vec<(u64, usize, &GraphPair)> = datasets
        .iter()
        .flat_map(|ds| ds.pairs.iter().enumerate().map(move |(i, p)| (ds.seed, i, p)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    let cancel = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Result<PairResult>>();

    let mut results = Vec::with_capacity(work.len());
    let mut first_error = None;
    std::thread::scope(|scope| {
        let cancel = &cancel;
        let work = &work;
        scope.spawn(move || {
            pool.install(|| {
                work.par_iter().for_each_with(tx, |tx, &(seed, idx, pair)| {
                    if cancel.load(Ordering::Relaxed) {
                        return;
                    }
                    let _ = tx.send(run_pair(pair, seed, idx, cfg));
                });
            })
        });
        for msg in rx {
            if first_error.is_some() {
                continue;
            }
            match msg.and_then(|r| sink(&r).map(|()| r)) {
                Ok(r) => results.push(r),
                Err(e) => {
                    cancel.store(true, Ordering::Relaxed);
                    first_error = Some(e);
                }
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }
    results.sort_by_key(|r| (r.seed, r.pair_index));
    Ok(ExperimentOutcome {
        results,
        ..Default::default()
    })
}

/// One line of the results CSV. Failed runs keep their identifying columns,
/// leave the measurements empty and carry `failed` as termination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub pair_id: usize,
    pub hd: u32,
    pub circuit: CircuitKind,
    pub variant: Variant,
    pub evals_used: Option<usize>,
    pub best_energy: Option<f64>,
    pub argmax_cut: Option<u32>,
    pub opt_cut: u32,
    pub approx_ratio_argmax: Option<f64>,
    pub approx_ratio_expect: Option<f64>,
    pub termination: String,
}

pub const FAILED: &str = "failed";

impl ResultRow {
    pub fn is_failed(&self) -> bool {
        self.termination == FAILED
    }

    pub fn ratio(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Argmax => self.approx_ratio_argmax,
            Metric::Expect => self.approx_ratio_expect,
        }
    }

    fn sort_key(&self) -> (u64, usize, CircuitKind, Variant) {
        (self.seed, self.pair_id, self.circuit, self.variant)
    }
}

pub fn trace_key(seed: u64, pair_id: usize, circuit: CircuitKind, variant: Variant) -> String {
    format!("{seed}/{pair_id}/{circuit}/{variant}")
}

pub type Traces = BTreeMap<String, Vec<f64>>;

impl PairResult {
    pub fn rows(&self) -> Vec<ResultRow> {
        let opt_cut = |v: Variant| {
            if v == Variant::PretrainSource {
                self.source_opt_cut
            } else {
                self.target_opt_cut
            }
        };
        let mut rows: Vec<ResultRow> = self
            .runs
            .iter()
            .map(|(c, v, r)| ResultRow {
                seed: self.seed,
                pair_id: self.pair_index,
                hd: self.hd,
                circuit: *c,
                variant: *v,
                evals_used: Some(r.evals_used),
                best_energy: Some(r.best_energy),
                argmax_cut: Some(r.argmax_cut),
                opt_cut: opt_cut(*v),
                approx_ratio_argmax: Some(r.approx_ratio_argmax),
                approx_ratio_expect: Some(r.approx_ratio_expect),
                termination: r.termination.as_str().to_string(),
            })
            .chain(self.failures.iter().map(|(c, v, _)| ResultRow {
                seed: self.seed,
                pair_id: self.pair_index,
                hd: self.hd,
                circuit: *c,
                variant: *v,
                evals_used: None,
                best_energy: None,
                argmax_cut: None,
                opt_cut: opt_cut(*v),
                approx_ratio_argmax: None,
                approx_ratio_expect: None,
                termination: FAILED.to_string(),
            }))
            .collect();
        rows.sort_by_key(ResultRow::sort_key);
        rows
    }

    pub fn traces(&self) -> impl Iterator<Item = (String, &[f64])> + '_ {
        self.runs
            .iter()
            .map(|(c, v, r)| (trace_key(self.seed, self.pair_index, *c, *v), r.trace.as_slice()))
    }
}

/// Appends rows as results arrive, flushing after every pair so an
/// interrupted run keeps what it finished.
pub struct ResultsWriter {
    inner: csv::Writer<BufWriter<File>>,
}

impl ResultsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(ResultsWriter {
            inner: csv::Writer::from_writer(BufWriter::new(File::create(path)?)),
        })
    }

    pub fn write_pair(&mut self, result: &PairResult) -> Result<()> {
        for row in result.rows() {
            self.inner.serialize(row)?;
        }
        self.inner.flush()?;
        Ok(())
    }
}

/// Writes rows in canonical `(seed, pair, circuit, variant)` order.
pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.sort_key());
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for row in sorted {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_traces(path: &Path, traces: &Traces) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, traces)?;
    w.flush()?;
    Ok(())
}

pub fn read_traces(path: &Path) -> Result<Traces> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Which approximation ratio the statistics use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Cut of the most probable bitstring.
    Argmax,
    /// Expected cut of the final state.
    Expect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Selection {
    pub circuit: CircuitKind,
    pub variant: Variant,
}

impl Selection {
    pub fn new(circuit: CircuitKind, variant: Variant) -> Self {
        Selection { circuit, variant }
    }

    fn matches(&self, row: &ResultRow) -> bool {
        row.circuit == self.circuit && row.variant == self.variant
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.circuit, self.variant)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WinTieLoss {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl WinTieLoss {
    pub fn total(&self) -> usize {
        self.wins + self.ties + self.losses
    }

    pub fn win_rate(&self) -> f64 {
        self.wins as f64 / self.total() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionStats {
    pub selection: Selection,
    pub ratio: BoxStats,
    pub mean_evals: f64,
    pub curve: Curve,
    /// Ratio statistics per HD bucket, in ascending HD.
    pub per_hd: BTreeMap<u32, BoxStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateStats {
    pub metric: Metric,
    pub a: SelectionStats,
    pub b: SelectionStats,
    /// A against B on instances both completed; `None` when they share none.
    pub comparison: Option<WinTieLoss>,
    /// `1 − mean evals(A) / mean evals(B)`.
    pub eval_reduction: f64,
    /// Pairs left out because at least one of their runs failed.
    pub excluded_incomplete: usize,
}

impl AggregateStats {
    /// Mean ratio of A minus mean ratio of B.
    pub fn mean_gap(&self) -> f64 {
        self.a.ratio.summary.mean - self.b.ratio.summary.mean
    }
}

type Instance = (u64, usize);

fn incomplete_pairs(rows: &[ResultRow]) -> BTreeSet<Instance> {
    rows.iter()
        .filter(|r| r.is_failed())
        .map(|r| (r.seed, r.pair_id))
        .collect()
}

/// Completed rows of one selection, keyed by instance.
pub fn select<'a>(rows: &'a [ResultRow], sel: Selection) -> BTreeMap<Instance, &'a ResultRow> {
    let excluded = incomplete_pairs(rows);
    rows.iter()
        .filter(|r| sel.matches(r) && !excluded.contains(&(r.seed, r.pair_id)))
        .map(|r| ((r.seed, r.pair_id), r))
        .collect()
}

/// Ratio, evaluation and convergence statistics of one selection.
pub fn summarize(rows: &[ResultRow], traces: &Traces, sel: Selection, metric: Metric) -> Result<SelectionStats> {
    let chosen = select(rows, sel);
    let ratios: Vec<f64> = chosen.values().filter_map(|r| r.ratio(metric)).collect();
    let ratio = BoxStats::of(&ratios).ok_or_else(|| Error::domain(format!("selection {sel} is empty")))?;
    let evals: Vec<f64> = chosen.values().filter_map(|r| r.evals_used).map(|e| e as f64).collect();
    let mean_evals = Summary::of(&evals).map_or(0.0, |s| s.mean);
    let curve = Curve::of(
        chosen
            .keys()
            .filter_map(|&(seed, pair)| traces.get(&trace_key(seed, pair, sel.circuit, sel.variant)))
            .map(Vec::as_slice),
    );
    let mut by_hd: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in chosen.values() {
        if let Some(v) = r.ratio(metric) {
            by_hd.entry(r.hd).or_default().push(v);
        }
    }
    let per_hd = by_hd
        .into_iter()
        .map(|(hd, v)| (hd, BoxStats::of(&v).expect("bucket has values")))
        .collect();
    Ok(SelectionStats {
        selection: sel,
        ratio,
        mean_evals,
        curve,
        per_hd,
    })
}

/// Statistics of A and B and their instance-level comparison. Pairs with a
/// failed run are excluded throughout and counted.
pub fn aggregate(rows: &[ResultRow], traces: &Traces, a: Selection, b: Selection, metric: Metric) -> Result<AggregateStats> {
    let sa = summarize(rows, traces, a, metric)?;
    let sb = summarize(rows, traces, b, metric)?;
    let (ra, rb) = (select(rows, a), select(rows, b));
    let mut wtl = WinTieLoss::default();
    for (key, row_a) in &ra {
        let Some(row_b) = rb.get(key) else { continue };
        let (Some(x), Some(y)) = (row_a.ratio(metric), row_b.ratio(metric)) else {
            continue;
        };
        if x > y {
            wtl.wins += 1;
        } else if x < y {
            wtl.losses += 1;
        } else {
            wtl.ties += 1;
        }
    }
    Ok(AggregateStats {
        metric,
        eval_reduction: 1.0 - sa.mean_evals / sb.mean_evals,
        a: sa,
        b: sb,
        comparison: (wtl.total() > 0).then_some(wtl),
        excluded_incomplete: incomplete_pairs(rows).len(),
    })
}

/// First-evaluation energy of every completed run of `sel`, by instance.
pub fn first_energies(rows: &[ResultRow], traces: &Traces, sel: Selection) -> BTreeMap<Instance, (u32, f64)> {
    select(rows, sel)
        .into_iter()
        .filter_map(|((seed, pair), r)| {
            let t = traces.get(&trace_key(seed, pair, sel.circuit, sel.variant))?;
            Some(((seed, pair), (r.hd, *t.first()?)))
        })
        .collect()
}

/// Mean convergence curve of `sel` for each HD bucket.
pub fn curves_by_hd(rows: &[ResultRow], traces: &Traces, sel: Selection) -> BTreeMap<u32, Curve> {
    let mut groups: BTreeMap<u32, Vec<&[f64]>> = BTreeMap::new();
    for ((seed, pair), r) in select(rows, sel) {
        if let Some(t) = traces.get(&trace_key(seed, pair, sel.circuit, sel.variant)) {
            groups.entry(r.hd).or_default().push(t);
        }
    }
    groups.into_iter().map(|(hd, ts)| (hd, Curve::of(ts))).collect()
}

/// Flattens results into rows and traces.
pub fn collect_outputs(results: &[PairResult]) -> (Vec<ResultRow>, Traces) {
    let mut rows = Vec::new();
    let mut traces = Traces::new();
    for r in results {
        rows.extend(r.rows());
        traces.extend(r.traces().map(|(k, t)| (k, t.to_vec())));
    }
    (rows, traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::sampler::pair_from_graphs;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            node_count: 4,
            layers: 1,
            pairs_per_hd: 1,
            hd_max: 1,
            seeds: vec![0],
            maxiter_full: 60,
            maxiter_accel: 12,
            jobs: Some(1),
            ..Default::default()
        }
    }

    fn square_pair() -> GraphPair {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        pair_from_graphs(g.clone(), g).unwrap()
    }

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
        assert_eq!(ExperimentConfig::default().pairs_per_seed(), 70);
    }

    #[test]
    fn validation_lists_every_problem() {
        let cfg = ExperimentConfig {
            node_count: 1,
            maxiter_accel: 2000,
            seeds: vec![],
            run_full: false,
            run_accel: false,
            ..Default::default()
        };
        match cfg.validate() {
            Err(Error::Config(list)) => assert!(list.len() >= 5, "{list:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn variant_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("bogus".parse::<Variant>().is_err());
    }

    #[test]
    fn identical_pair_transfer_starts_at_pretrained_energy() {
        let cfg = small_cfg();
        let r = run_pair(&square_pair(), 0, 0, &cfg).unwrap();
        assert!(r.is_complete());
        for c in CircuitKind::ALL {
            let pre = r.get(c, Variant::PretrainSource).unwrap();
            let post = r.get(c, Variant::PostTl).unwrap();
            assert_eq!(post.initial_params, pre.final_params);
            let accel = r.get(c, Variant::AccelPostTl).unwrap();
            assert_eq!(accel.initial_params, pre.final_params);
            assert!((post.trace[0] - pre.best_energy).abs() < 1e-12);
            assert!(accel.evals_used <= cfg.maxiter_accel);
            assert!(pre.evals_used <= cfg.maxiter_full);
        }
        assert_eq!(r.runs.len(), 12);
    }

    #[test]
    fn run_streams_are_distinct() {
        use rand::RngCore;
        let mut seen = BTreeSet::new();
        for v in Variant::ALL {
            for c in CircuitKind::ALL {
                for pair in 0..3 {
                    assert!(seen.insert(run_rng(1, pair, v, c).next_u64()));
                }
            }
        }
    }

    #[test]
    fn wrong_size_pair_is_rejected() {
        let cfg = ExperimentConfig {
            node_count: 5,
            ..small_cfg()
        };
        assert!(run_pair(&square_pair(), 0, 0, &cfg).is_err());
    }

    fn row(pair_id: usize, variant: Variant, ratio: f64, evals: usize) -> ResultRow {
        ResultRow {
            seed: 0,
            pair_id,
            hd: pair_id as u32 % 2,
            circuit: CircuitKind::Base,
            variant,
            evals_used: Some(evals),
            best_energy: Some(-ratio),
            argmax_cut: Some(1),
            opt_cut: 1,
            approx_ratio_argmax: Some(ratio),
            approx_ratio_expect: Some(ratio),
            termination: "budget_exhausted".into(),
        }
    }

    #[test]
    fn self_comparison_is_all_ties() {
        let rows: Vec<_> = (0..4).map(|i| row(i, Variant::Standard, 0.25 * i as f64, 100)).collect();
        let s = Selection::new(CircuitKind::Base, Variant::Standard);
        let agg = aggregate(&rows, &Traces::new(), s, s, Metric::Argmax).unwrap();
        assert_eq!(agg.comparison, Some(WinTieLoss { wins: 0, ties: 4, losses: 0 }));
        assert_eq!(agg.eval_reduction, 0.0);
    }

    #[test]
    fn dominant_variant_wins_everywhere() {
        let mut rows = Vec::new();
        for i in 0..5 {
            rows.push(row(i, Variant::PostTl, 1.0, 50));
            rows.push(row(i, Variant::Standard, 0.5, 1000));
        }
        let a = Selection::new(CircuitKind::Base, Variant::PostTl);
        let b = Selection::new(CircuitKind::Base, Variant::Standard);
        let agg = aggregate(&rows, &Traces::new(), a, b, Metric::Argmax).unwrap();
        assert_eq!(agg.mean_gap(), 0.5);
        assert_eq!(agg.comparison.unwrap().wins, 5);
        assert!((agg.eval_reduction - 0.95).abs() < 1e-12);
        assert_eq!(agg.a.per_hd.len(), 2);
    }

    #[test]
    fn failed_pairs_are_excluded_and_counted() {
        let mut rows = vec![row(0, Variant::PostTl, 1.0, 10), row(0, Variant::Standard, 0.0, 10)];
        rows.push(row(1, Variant::PostTl, 0.0, 10));
        let mut failed = row(1, Variant::Standard, 0.0, 0);
        failed.termination = FAILED.into();
        failed.approx_ratio_argmax = None;
        rows.push(failed);
        let a = Selection::new(CircuitKind::Base, Variant::PostTl);
        let b = Selection::new(CircuitKind::Base, Variant::Standard);
        let agg = aggregate(&rows, &Traces::new(), a, b, Metric::Argmax).unwrap();
        assert_eq!(agg.excluded_incomplete, 1);
        assert_eq!(agg.a.ratio.summary.count, 1);
        assert_eq!(agg.comparison.unwrap().total(), 1);
    }

    #[test]
    fn empty_selection_is_an_error() {
        let rows = vec![row(0, Variant::Standard, 1.0, 10)];
        let a = Selection::new(CircuitKind::Had, Variant::Standard);
        assert!(aggregate(&rows, &Traces::new(), a, a, Metric::Argmax).is_err());
    }

    #[test]
    fn disjoint_instances_have_no_comparison() {
        let rows = vec![row(0, Variant::PostTl, 1.0, 10), row(1, Variant::Standard, 0.5, 10)];
        let a = Selection::new(CircuitKind::Base, Variant::PostTl);
        let b = Selection::new(CircuitKind::Base, Variant::Standard);
        assert_eq!(aggregate(&rows, &Traces::new(), a, b, Metric::Argmax).unwrap().comparison, None);
    }

    #[test]
    fn csv_round_trip_keeps_failed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        let mut failed = row(3, Variant::Random, 0.0, 0);
        failed.termination = FAILED.into();
        failed.evals_used = None;
        failed.best_energy = None;
        failed.approx_ratio_argmax = None;
        let rows = vec![row(2, Variant::Standard, 0.75, 12), failed, row(0, Variant::PostTl, 1.0, 3)];
        write_results_csv(&path, &rows).unwrap();
        let back = read_results_csv(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[0].pair_id, 0);
        assert_eq!(back[2], rows[1]);
        let header = std::fs::read_to_string(&path).unwrap();
        assert!(header.starts_with(
            "seed,pair_id,hd,circuit,variant,evals_used,best_energy,argmax_cut,opt_cut,approx_ratio_argmax,approx_ratio_expect,termination\n"
        ));
    }
}
