mod config;

use std::fs::{self, File};
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use vqe_recycle::experiment::{
    self, collect_outputs, dataset_rng, read_results_csv, read_traces, run_on_datasets, write_results_csv,
    write_traces, ExperimentConfig, ResultsWriter,
};
use vqe_recycle::graph::{parse_edge_list, Graph, Network};
use vqe_recycle::maxcut::brute_force_optima;
use vqe_recycle::qsim::CircuitKind;
use vqe_recycle::report::{self, missing_variants, standard_figures, summary_table, FIGURE_GROUPS};
use vqe_recycle::sampler::{build_dataset, Dataset};
use vqe_recycle::synth::{road_like_network, RoadLikeParams};

use config::{parse_seeds, resolve_out_dir, ConfigFile, OUT_ENV};

#[derive(Parser, Debug)]
#[command(name = "vqe-recycle", version, about = "Parameter recycling experiments for VQE on MaxCut")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample an HD-balanced dataset of graph pairs from a road network.
    Sample(SampleArgs),
    /// Run the experiment and write results.csv, traces.json and the datasets.
    Run(RunArgs),
    /// Render figures and the summary table from a results directory.
    Report(ReportArgs),
    /// Print the maximum cut and every optimal assignment of a graph JSON file.
    Solve(SolveArgs),
    /// Write a synthetic road-like network as an edge list.
    SynthNetwork(SynthArgs),
}

/// Dataset shape, shared by `sample` and `run`. Unset flags fall back to the
/// config file, then to the built-in defaults.
#[derive(Args, Debug, Default)]
struct DatasetFlags {
    /// JSON config file (experiment fields plus `network`, `output_dir`, `datasets`)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Road network edge list (SNAP format)
    #[arg(long)]
    network: Option<PathBuf>,
    /// Nodes per sampled graph [default: 12]
    #[arg(long = "nodes")]
    node_count: Option<usize>,
    /// Pairs per Hamming-distance bucket [default: 10]
    #[arg(long)]
    pairs_per_hd: Option<usize>,
    /// Smallest HD bucket [default: 0]
    #[arg(long)]
    hd_min: Option<u32>,
    /// Largest HD bucket [default: 6]
    #[arg(long)]
    hd_max: Option<u32>,
    /// Sampled pairs before giving up on a dataset [default: 100000]
    #[arg(long)]
    attempt_cap: Option<usize>,
    /// BFS restarts before giving up on one subgraph [default: 10000]
    #[arg(long)]
    restart_cap: Option<usize>,
}

impl DatasetFlags {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        set(&mut cfg.node_count, self.node_count);
        set(&mut cfg.pairs_per_hd, self.pairs_per_hd);
        set(&mut cfg.hd_min, self.hd_min);
        set(&mut cfg.hd_max, self.hd_max);
        set(&mut cfg.attempt_cap, self.attempt_cap);
        set(&mut cfg.restart_cap, self.restart_cap);
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    data: DatasetFlags,
    /// Dataset seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Output file [default: <out-dir>/datasets/seed_<seed>.json]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output directory [default: results]
    #[arg(long, env = OUT_ENV)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    data: DatasetFlags,
    /// Seeds: `3`, `1,4,9`, `0..10` or `0..=9` [default: 0..10]
    #[arg(long, value_parser = parse_seeds, conflicts_with = "dataset")]
    seeds: Option<config::Seeds>,
    /// Run over saved dataset files instead of sampling (repeatable); they fix
    /// the node count, pairs per HD and HD range
    #[arg(long)]
    dataset: Vec<PathBuf>,
    /// Ansatz layers [default: 3]
    #[arg(long)]
    layers: Option<usize>,
    /// Circuits, comma separated [default: base,had]
    #[arg(long, value_delimiter = ',')]
    circuits: Option<Vec<CircuitKind>>,
    /// Evaluation budget of pre-training and full runs [default: 1000]
    #[arg(long)]
    maxiter_full: Option<usize>,
    /// Evaluation budget of accelerated runs [default: 50]
    #[arg(long)]
    maxiter_accel: Option<usize>,
    /// Initial trust-region radius [default: 1.0]
    #[arg(long)]
    rhobeg: Option<f64>,
    /// Final trust-region radius [default: 1e-4]
    #[arg(long)]
    rhoend: Option<f64>,
    /// Skip the random-initialization baseline
    #[arg(long)]
    no_random: bool,
    /// Only the accelerated variants (pre-training still runs)
    #[arg(long, conflicts_with = "full_only")]
    accel_only: bool,
    /// Only the full-budget variants
    #[arg(long)]
    full_only: bool,
    /// Worker threads [default: available cores]
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory [default: results]
    #[arg(long, env = OUT_ENV)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory holding results.csv, traces.json and config.json [default: the output directory]
    #[arg(long)]
    input: Option<PathBuf>,
    /// Figure and summary directory [default: <input>/figures]
    #[arg(long)]
    figures: Option<PathBuf>,
    /// Only these figure groups (repeatable)
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(FIGURE_GROUPS))]
    only: Vec<String>,
    /// Ratio used by box plots: argmax or expect [default: argmax]
    #[arg(long, value_parser = parse_metric)]
    metric: Option<experiment::Metric>,
    /// Output directory [default: results]
    #[arg(long, env = OUT_ENV)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Graph JSON: {"n": 3, "edges": [[0,1],[1,2],[0,2]]}
    graph: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 120)]
    width: u64,
    #[arg(long, default_value_t = 120)]
    height: u64,
    /// Output edge list
    #[arg(long)]
    out: PathBuf,
}

fn parse_metric(s: &str) -> Result<experiment::Metric, String> {
    match s {
        "argmax" => Ok(experiment::Metric::Argmax),
        "expect" => Ok(experiment::Metric::Expect),
        _ => Err(format!("unknown metric {s:?} (argmax, expect)")),
    }
}

/// Exit 1 for usage and configuration problems, 2 for everything else.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<vqe_recycle::Error> for Failure {
    fn from(e: vqe_recycle::Error) -> Self {
        match e {
            vqe_recycle::Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn runtime(context: impl std::fmt::Display) -> impl FnOnce(std::io::Error) -> Failure {
    move |e| Failure::Runtime(format!("{context}: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Run(a) => cmd_run(a),
        Command::Report(a) => cmd_report(a),
        Command::Solve(a) => cmd_solve(a),
        Command::SynthNetwork(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    match path {
        Some(p) => ConfigFile::load(p).map_err(Failure::Usage),
        None => Ok(ConfigFile::default()),
    }
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    let file = File::open(path).map_err(runtime(format!("cannot open network {}", path.display())))?;
    let net = parse_edge_list(BufReader::new(file))
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    info!("network {}: {} nodes, {} edges", path.display(), net.node_count(), net.edge_count());
    Ok(net)
}

/// Writes through a sibling temp file so a failed write leaves nothing behind.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(runtime(format!("cannot create {}", dir.display())))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let res = fs::write(&tmp, contents).and_then(|()| fs::rename(&tmp, path));
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.map_err(runtime(format!("cannot write {}", path.display())))
}

fn print_fill(ds: &Dataset) {
    let fill: Vec<String> = ds.fill_counts().iter().map(|(hd, n)| format!("hd{hd}={n}")).collect();
    println!("seed {}: {} pairs ({})", ds.seed, ds.pairs.len(), fill.join(" "));
}

fn dataset_path(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join("datasets").join(format!("seed_{seed}.json"))
}

fn cmd_sample(a: SampleArgs) -> Result<(), Failure> {
    let file = load_config(a.data.config.as_deref())?;
    let mut cfg = file.experiment.clone();
    a.data.apply(&mut cfg);
    cfg.validate()?;
    let seed = a.seed.unwrap_or(0);
    let network = a.data.network.or(file.network).ok_or_else(|| Failure::Usage("--network is required".into()))?;
    let net = load_network(&network)?;
    let out = match a.out {
        Some(p) => p,
        None => dataset_path(&resolve_out_dir(a.out_dir, None, file.output_dir), seed),
    };
    let ds = build_dataset(&net, &cfg.dataset_spec(), seed, &mut dataset_rng(seed))?;
    write_atomic(&out, ds.to_json().as_bytes())?;
    print_fill(&ds);
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let file = load_config(a.data.config.as_deref())?;
    let mut cfg = file.experiment.clone();
    a.data.apply(&mut cfg);
    set(&mut cfg.seeds, a.seeds.map(|s| s.0));
    set(&mut cfg.layers, a.layers);
    set(&mut cfg.circuits, a.circuits);
    set(&mut cfg.maxiter_full, a.maxiter_full);
    set(&mut cfg.maxiter_accel, a.maxiter_accel);
    set(&mut cfg.rhobeg, a.rhobeg);
    set(&mut cfg.rhoend, a.rhoend);
    if a.jobs.is_some() {
        cfg.jobs = a.jobs;
    }
    if a.no_random {
        cfg.include_random_baseline = false;
    }
    if a.accel_only {
        cfg.run_full = false;
    }
    if a.full_only {
        cfg.run_accel = false;
    }
    let dataset_files = if a.dataset.is_empty() { file.datasets.clone() } else { a.dataset };
    let network = a.data.network.or(file.network.clone());

    let out_dir = resolve_out_dir(a.out_dir, None, file.output_dir.clone());
    fs::create_dir_all(&out_dir).map_err(runtime(format!("cannot create {}", out_dir.display())))?;

    let datasets = if !dataset_files.is_empty() {
        let mut ds = Vec::new();
        for p in &dataset_files {
            let text = fs::read_to_string(p).map_err(runtime(format!("cannot read {}", p.display())))?;
            ds.push(Dataset::from_json(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?);
        }
        // The files fix the dataset shape.
        let first = &ds[0];
        cfg.seeds = ds.iter().map(|d| d.seed).collect();
        cfg.node_count = first.pairs[0].source.n();
        cfg.pairs_per_hd = first.pairs_per_hd;
        cfg.hd_min = *first.hd_range.start();
        cfg.hd_max = *first.hd_range.end();
        if let Some(d) = ds.iter().find(|d| (d.pairs_per_hd, &d.hd_range) != (first.pairs_per_hd, &first.hd_range)) {
            return Err(Failure::Usage(format!("dataset for seed {} has a different layout than seed {}", d.seed, first.seed)));
        }
        cfg.validate()?;
        ds
    } else {
        cfg.validate()?;
        let network = network.ok_or_else(|| Failure::Usage("--network or --dataset is required".into()))?;
        let net = load_network(&network)?;
        let spec = cfg.dataset_spec();
        let mut ds = Vec::new();
        for &seed in &cfg.seeds {
            let d = build_dataset(&net, &spec, seed, &mut dataset_rng(seed))
                .map_err(|e| Failure::Runtime(format!("seed {seed}: {e}")))?;
            print_fill(&d);
            write_atomic(&dataset_path(&out_dir, seed), d.to_json().as_bytes())?;
            ds.push(d);
        }
        ds
    };
    let config_json = serde_json::to_string_pretty(&cfg).expect("config serializes");
    write_atomic(&out_dir.join("config.json"), config_json.as_bytes())?;

    let total: usize = datasets.iter().map(|d| d.pairs.len()).sum();
    let csv_path = out_dir.join("results.csv");
    let mut writer = ResultsWriter::create(&csv_path)?;
    let mut done = 0;
    let outcome = run_on_datasets(&datasets, &cfg, |r| {
        done += 1;
        if !r.failures.is_empty() {
            warn!("seed {} pair {}: {} failed runs", r.seed, r.pair_index, r.failures.len());
        }
        info!("[{done}/{total}] seed {} pair {} (hd {})", r.seed, r.pair_index, r.hd);
        writer.write_pair(r)
    })?;
    drop(writer);

    let (rows, traces) = collect_outputs(&outcome.results);
    write_results_csv(&csv_path, &rows)?;
    write_traces(&out_dir.join("traces.json"), &traces)?;
    let failed = rows.iter().filter(|r| r.is_failed()).count();
    println!("{} pairs, {} runs ({failed} failed) -> {}", outcome.results.len(), rows.len(), out_dir.display());
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<(), Failure> {
    let input = a.input.unwrap_or_else(|| resolve_out_dir(a.out_dir, None, None));
    let rows = read_results_csv(&input.join("results.csv"))
        .map_err(|e| Failure::Runtime(format!("{}: {e}", input.join("results.csv").display())))?;
    let traces = read_traces(&input.join("traces.json"))
        .map_err(|e| Failure::Runtime(format!("{}: {e}", input.join("traces.json").display())))?;
    let cfg: Option<ExperimentConfig> = fs::read_to_string(input.join("config.json"))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok());
    let figures = a.figures.unwrap_or_else(|| input.join("figures"));
    fs::create_dir_all(&figures).map_err(runtime(format!("cannot create {}", figures.display())))?;

    let circuits: Vec<CircuitKind> = CircuitKind::ALL
        .into_iter()
        .filter(|c| rows.iter().any(|r| r.circuit == *c))
        .collect();
    let mut written = 0;
    for (group, mut spec) in standard_figures(&figures, &circuits) {
        if !a.only.is_empty() && !a.only.iter().any(|g| g == group) {
            continue;
        }
        if let Some(m) = a.metric {
            spec.metric = m;
        }
        let missing = missing_variants(&rows, &spec);
        if !missing.is_empty() || circuits.is_empty() {
            let names: Vec<String> = missing.iter().map(ToString::to_string).collect();
            warn!("skipping {}: no completed runs for {}", spec.path.display(), names.join(", "));
            continue;
        }
        report::render(&rows, &traces, &spec)?;
        println!("wrote {}", spec.path.display());
        written += 1;
    }
    let budgets = cfg.map(|c| (c.maxiter_accel, c.maxiter_full));
    let table = summary_table(&rows, &traces, budgets)?;
    write_atomic(&figures.join("summary.txt"), table.text.as_bytes())?;
    write_atomic(&figures.join("summary.csv"), table.csv.as_bytes())?;
    print!("{}", table.text);
    println!("{written} figures and summary -> {}", figures.display());
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.graph).map_err(runtime(format!("cannot read {}", a.graph.display())))?;
    let g = Graph::from_json(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", a.graph.display())))?;
    let optima = brute_force_optima(&g)?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "opt={}", optima.opt_cut());
    for asg in optima.assignments() {
        let _ = writeln!(out, "{asg}");
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<(), Failure> {
    let params = RoadLikeParams {
        width: a.width,
        height: a.height,
        ..RoadLikeParams::default()
    };
    let net = road_like_network(&params, a.seed);
    write_atomic(&a.out, net.to_edge_list().as_bytes())?;
    println!("{} nodes, {} edges -> {}", net.node_count(), net.edge_count(), a.out.display());
    Ok(())
}
