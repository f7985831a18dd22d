//! Command line surface for the detection pipeline.
//!
//! The `moped` binary exposes five subcommands — `detect`,
//! `detect-multiscale`, `simulate`, `evaluate`, and `benchmark` — that tie
//! CSV ingestion, the core library, and JSON/CSV result writers together.
//! Exit codes: 0 on success, 2 on usage errors, 3 on data errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use moped::simulate::{generate_scenario, Margin, Scenario, ScenarioSpec};
use moped::{
    covering_metric, detector_trace, merge_over_bandwidths, moped_run, rank_transform_pareto2,
    v_measure, BandwidthLadder, ChangePointSet, DetectorConfig, DetectorTrace, MopedError,
    MultivariateSeries, PermutationConfig, RankSpec, RawSeries, Segmentation,
};

/// Errors surfaced by the command line layer.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Inconsistent or out-of-range flag values.
    #[error("{0}")]
    Usage(String),
    /// File system failure on a named path.
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A CSV row with a different number of fields than the first row.
    #[error("malformed CSV: row {row} has a different number of fields")]
    MalformedCsv { row: usize },
    /// A CSV cell that does not parse as a number.
    #[error("could not parse a number at row {row}, column {col}")]
    ParseError { row: usize, col: usize },
    /// An input with no data rows (after any header and striding).
    #[error("input contains no data rows")]
    EmptyData,
    /// A JSON document that does not contain change points in a known shape.
    #[error("invalid JSON in {path}: {message}")]
    BadJson { path: PathBuf, message: String },
    /// An error raised by the core library.
    #[error(transparent)]
    Core(#[from] MopedError),
}

impl CliError {
    /// Process exit code: 2 for usage errors, 3 for data and pipeline errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Change point detection in the extremal dependence of heavy-tailed series.
#[derive(Debug, Parser)]
#[command(name = "moped", version, about)]
pub struct Cli {
    /// Cap the number of worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect change points at one bandwidth with a permutation threshold.
    Detect(DetectArgs),
    /// Pool detections across several bandwidths and exceedance ranks.
    DetectMultiscale(MultiscaleArgs),
    /// Generate a synthetic series with known change points.
    Simulate(SimulateArgs),
    /// Score an estimated segmentation against the truth.
    Evaluate(EvaluateArgs),
    /// Time the detector at increasing series lengths.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Input CSV (rows = time points, columns = component series).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output stem: writes <stem>.json and <stem>_trace_G<G>_k<k>.csv.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Window bandwidth G.
    #[arg(short = 'G', long = "bandwidth", visible_alias = "bandwidths")]
    pub bandwidth: usize,
    /// Exceedance rank: an absolute count (150) or a fraction of G (0.05).
    #[arg(
        short = 'k',
        long = "rank",
        visible_alias = "ranks",
        default_value = "0.05"
    )]
    pub rank: String,
    /// Acceptance window fraction for local maxima.
    #[arg(long, default_value_t = 0.4)]
    pub eta: f64,
    /// Significance level of the permutation threshold.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Number of permutations M.
    #[arg(short = 'M', long, default_value_t = 200)]
    pub permutations: usize,
    /// Seed for the permutation null.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep every stride-th row of the input.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Input is already on the Pareto(2) scale: skip the rank transform.
    #[arg(long)]
    pub pareto: bool,
}

#[derive(Debug, Args)]
pub struct MultiscaleArgs {
    /// Input CSV (rows = time points, columns = component series).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output stem: writes <stem>.json and one trace CSV per (G, k).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Comma-separated window bandwidths, e.g. 500,1000,1500.
    #[arg(
        short = 'G',
        long = "bandwidths",
        visible_alias = "bandwidth",
        value_delimiter = ','
    )]
    pub bandwidths: Vec<usize>,
    /// Comma-separated ranks, each absolute or a fraction of the bandwidth.
    #[arg(
        short = 'k',
        long = "ranks",
        visible_alias = "rank",
        value_delimiter = ',',
        default_values = ["0.2", "0.1", "0.05"]
    )]
    pub ranks: Vec<String>,
    /// Acceptance window fraction for local maxima.
    #[arg(long, default_value_t = 0.4)]
    pub eta: f64,
    /// Significance level of the permutation threshold.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Number of permutations M.
    #[arg(short = 'M', long, default_value_t = 200)]
    pub permutations: usize,
    /// Seed for the permutation null.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep every stride-th row of the input.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Input is already on the Pareto(2) scale: skip the rank transform.
    #[arg(long)]
    pub pareto: bool,
}

/// Margin scale of simulated output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarginArg {
    Uniform,
    Pareto2,
    Gaussian,
}

impl From<MarginArg> for Margin {
    fn from(value: MarginArg) -> Self {
        match value {
            MarginArg::Uniform => Margin::Uniform,
            MarginArg::Pareto2 => Margin::Pareto2,
            MarginArg::Gaussian => Margin::Gaussian,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Output stem: writes <stem>.csv and <stem>_truth.json.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Scenario: 1 = correlation switch, 2 = copula family switch.
    #[arg(long, default_value_t = 1)]
    pub scenario: u8,
    /// Series length n.
    #[arg(short = 'n', long, default_value_t = 5000)]
    pub length: usize,
    /// Dimension d.
    #[arg(short = 'd', long, default_value_t = 2)]
    pub dimension: usize,
    /// Number of equally spaced change points (ignored with --changes).
    #[arg(short = 'q', long = "num-changes", default_value_t = 1)]
    pub num_changes: usize,
    /// Equicorrelation level for scenario 1.
    #[arg(long, default_value_t = 0.6)]
    pub rho: f64,
    /// Seed of the random correlation matrix for scenario 2.
    #[arg(long, default_value_t = 1)]
    pub omega_seed: u64,
    /// Output margin scale.
    #[arg(long, value_enum, default_value_t = MarginArg::Pareto2)]
    pub margin: MarginArg,
    /// Explicit change locations overriding equal spacing, e.g. 2000,5000.
    #[arg(long, value_delimiter = ',')]
    pub changes: Option<Vec<usize>>,
    /// Seed for the sampled series.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Truth JSON: a bare array of change points, or an object with a
    /// change_points field (ints or objects with tau) and optionally n.
    #[arg(long)]
    pub truth: PathBuf,
    /// Estimate JSON, same shapes; `detect` output files work directly.
    #[arg(long)]
    pub estimate: PathBuf,
    /// Series length n (required unless a JSON input records it).
    #[arg(short = 'n', long)]
    pub length: Option<usize>,
    /// Output JSON path (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Comma-separated series lengths to time.
    #[arg(long, value_delimiter = ',', default_values = ["10000", "20000"])]
    pub sizes: Vec<usize>,
    /// Dimension of the synthetic series.
    #[arg(short = 'd', long, default_value_t = 4)]
    pub dimension: usize,
    /// Window bandwidth G.
    #[arg(short = 'G', long = "bandwidth", default_value_t = 1000)]
    pub bandwidth: usize,
    /// Exceedance rank: absolute or a fraction of G.
    #[arg(short = 'k', long = "rank", default_value = "100")]
    pub rank: String,
    /// Timed repetitions per size (the median is reported).
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Seed for the synthetic series.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // ignore the error if a global pool already exists (e.g. in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Command::Detect(args) => run_detect(&args),
        Command::DetectMultiscale(args) => run_multiscale(&args),
        Command::Simulate(args) => run_simulate(&args),
        Command::Evaluate(args) => run_evaluate(&args),
        Command::Benchmark(args) => run_benchmark(&args),
    }
}

/// Reads a rectangular numeric CSV, skipping an optional header row and
/// keeping every `stride`-th data row (the first, then each `stride` later).
pub fn ingest_csv(path: &Path, stride: usize) -> CliResult<RawSeries> {
    if stride == 0 {
        return Err(CliError::Usage("--stride must be at least 1".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => io_err(path)(source),
            _ => CliError::MalformedCsv { row: 1 },
        })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (index, record) in reader.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|_| CliError::MalformedCsv { row })?;
        let mut parsed = Vec::with_capacity(record.len());
        let mut bad_cell = None;
        for (col, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) => parsed.push(v),
                Err(_) => {
                    bad_cell = Some(col + 1);
                    break;
                }
            }
        }
        match bad_cell {
            Some(col) => {
                if index == 0 {
                    // non-numeric first row: treat as a header
                    continue;
                }
                return Err(CliError::ParseError { row, col });
            }
            None => {
                if let Some(w) = width {
                    if parsed.len() != w {
                        return Err(CliError::MalformedCsv { row });
                    }
                } else {
                    width = Some(parsed.len());
                }
                rows.push(parsed);
            }
        }
    }

    let kept: Vec<Vec<f64>> = rows
        .into_iter()
        .step_by(stride)
        .collect();
    let (n, d) = (kept.len(), width.unwrap_or(0));
    if n == 0 || d == 0 {
        return Err(CliError::EmptyData);
    }
    let flat: Vec<f64> = kept.into_iter().flatten().collect();
    let values = Array2::from_shape_vec((n, d), flat)
        .expect("row-major reshape of rectangular data");
    Ok(RawSeries::new(values)?)
}

/// Parses a rank flag: an integer is an absolute count, a number in (0, 1]
/// is a fraction of the bandwidth.
pub fn parse_rank_spec(text: &str) -> CliResult<RankSpec> {
    let t = text.trim();
    if let Ok(k) = t.parse::<usize>() {
        return Ok(RankSpec::Absolute(k));
    }
    if let Ok(f) = t.parse::<f64>() {
        if f > 0.0 && f <= 1.0 {
            return Ok(RankSpec::FractionOfBandwidth(f));
        }
    }
    Err(CliError::Usage(format!(
        "rank '{text}' must be a positive integer or a fraction in (0, 1]"
    )))
}

fn load_series(input: &Path, stride: usize, pareto: bool) -> CliResult<MultivariateSeries> {
    let raw = ingest_csv(input, stride)?;
    if pareto {
        Ok(MultivariateSeries::from_pareto2(raw.values().to_owned())?)
    } else {
        Ok(rank_transform_pareto2(&raw))
    }
}

/// `<stem minus extension><suffix>` next to the stem path.
fn sibling(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem
        .file_stem()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    stem.with_file_name(name)
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Writes a detector trace as header-less `t,T` rows — exactly n - 2G + 1 of
/// them, with t the absolute time index of each trace position.
pub fn write_trace_csv(path: &Path, trace: &DetectorTrace) -> CliResult<()> {
    ensure_parent(path)?;
    let mut text = String::new();
    for (i, value) in trace.values().iter().enumerate() {
        writeln!(text, "{},{:?}", trace.time_of(i), value).expect("string write");
    }
    fs::write(path, text).map_err(io_err(path))
}

fn write_panel_csv(path: &Path, values: &Array2<f64>) -> CliResult<()> {
    ensure_parent(path)?;
    let d = values.ncols();
    let mut text = String::new();
    let header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    writeln!(text, "{}", header.join(",")).expect("string write");
    for row in values.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(text, "{}", cells.join(",")).expect("string write");
    }
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Serialize)]
struct DetectReport<'a> {
    command: &'static str,
    input: String,
    n: usize,
    d: usize,
    config: &'a DetectorConfig,
    calibration: &'a PermutationConfig,
    stride: usize,
    pareto: bool,
    threshold: f64,
    change_points: &'a ChangePointSet,
    wall_time_s: f64,
}

fn run_detect(args: &DetectArgs) -> CliResult<()> {
    let start = Instant::now();
    let series = load_series(&args.input, args.stride, args.pareto)?;
    let k = parse_rank_spec(&args.rank)?
        .resolve(args.bandwidth)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let config = DetectorConfig::new(args.bandwidth, k, args.eta)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let calibration = PermutationConfig::new(args.permutations, args.alpha, args.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let outcome = moped_run(&series, &config, &calibration)?;

    let report = DetectReport {
        command: "detect",
        input: args.input.display().to_string(),
        n: series.n(),
        d: series.d(),
        config: &config,
        calibration: &calibration,
        stride: args.stride,
        pareto: args.pareto,
        threshold: outcome.null.threshold(),
        change_points: &outcome.changes,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&sibling(&args.output, ".json"), &report)?;
    write_trace_csv(
        &sibling(&args.output, &format!("_trace_G{}_k{k}.csv", config.g())),
        &outcome.trace,
    )
}

#[derive(Serialize)]
struct LadderCell {
    #[serde(rename = "G")]
    g: usize,
    #[serde(rename = "k")]
    ranks: Vec<usize>,
}

#[derive(Serialize)]
struct MultiscaleReport<'a> {
    command: &'static str,
    input: String,
    n: usize,
    d: usize,
    ladder: Vec<LadderCell>,
    eta: f64,
    calibration: &'a PermutationConfig,
    stride: usize,
    pareto: bool,
    change_points: &'a ChangePointSet,
    wall_time_s: f64,
}

fn run_multiscale(args: &MultiscaleArgs) -> CliResult<()> {
    let start = Instant::now();
    let series = load_series(&args.input, args.stride, args.pareto)?;
    let specs: Vec<RankSpec> = args
        .ranks
        .iter()
        .map(|s| parse_rank_spec(s))
        .collect::<CliResult<_>>()?;
    let mut bandwidths = args.bandwidths.clone();
    bandwidths.sort_unstable();
    bandwidths.dedup();
    let ladder = BandwidthLadder::new(bandwidths, specs)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let calibration = PermutationConfig::new(args.permutations, args.alpha, args.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let changes = merge_over_bandwidths(&series, &ladder, args.eta, &calibration)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let mut cells = Vec::new();
    for &g in ladder.bandwidths() {
        let ranks = ladder.rank_ladder_for(g)?.ranks().to_vec();
        cells.push(LadderCell { g, ranks });
    }
    let report = MultiscaleReport {
        command: "detect-multiscale",
        input: args.input.display().to_string(),
        n: series.n(),
        d: series.d(),
        ladder: cells,
        eta: args.eta,
        calibration: &calibration,
        stride: args.stride,
        pareto: args.pareto,
        change_points: &changes,
        wall_time_s,
    };
    write_json(&sibling(&args.output, ".json"), &report)?;

    // one trace per (G, k) cell for inspection and plotting
    for &g in ladder.bandwidths() {
        for &k in ladder.rank_ladder_for(g)?.ranks() {
            let config = DetectorConfig::new(g, k, args.eta)?;
            let trace = detector_trace(&series, &config)?;
            write_trace_csv(&sibling(&args.output, &format!("_trace_G{g}_k{k}.csv")), &trace)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TruthReport {
    command: &'static str,
    scenario: u8,
    n: usize,
    d: usize,
    rho: f64,
    omega_seed: u64,
    margin: Margin,
    seed: u64,
    change_points: Vec<usize>,
}

fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let scenario = match args.scenario {
        1 => Scenario::CorrelationSwitch,
        2 => Scenario::FamilySwitch,
        other => {
            return Err(CliError::Usage(format!(
                "--scenario must be 1 or 2, got {other}"
            )))
        }
    };
    let spec = ScenarioSpec {
        scenario,
        n: args.length,
        d: args.dimension,
        q: args.num_changes,
        rho: args.rho,
        omega_seed: args.omega_seed,
        margin: args.margin.into(),
        change_points: args.changes.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (values, change_points) = generate_scenario(&spec, &mut rng).map_err(|e| match e {
        MopedError::InvalidSpec(_) => CliError::Usage(e.to_string()),
        other => CliError::Core(other),
    })?;

    write_panel_csv(&sibling(&args.output, ".csv"), &values)?;
    let report = TruthReport {
        command: "simulate",
        scenario: args.scenario,
        n: args.length,
        d: args.dimension,
        rho: args.rho,
        omega_seed: args.omega_seed,
        margin: spec.margin,
        seed: args.seed,
        change_points,
    };
    write_json(&sibling(&args.output, "_truth.json"), &report)
}

/// Extracts change points (and, when present, a series length) from a JSON
/// document: a bare integer array, or an object with a `change_points` field
/// whose entries are integers or objects carrying `tau`.
fn read_change_points(path: &Path) -> CliResult<(Vec<usize>, Option<usize>)> {
    let bad = |message: &str| CliError::BadJson {
        path: path.to_path_buf(),
        message: message.into(),
    };
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;

    let as_usize = |v: &serde_json::Value| v.as_u64().map(|x| x as usize);
    let parse_list = |list: &[serde_json::Value]| -> Option<Vec<usize>> {
        list.iter()
            .map(|entry| match entry {
                serde_json::Value::Object(map) => as_usize(map.get("tau")?),
                other => as_usize(other),
            })
            .collect()
    };

    let (mut taus, n) = match &value {
        serde_json::Value::Array(list) => (
            parse_list(list).ok_or_else(|| bad("expected an array of non-negative integers"))?,
            None,
        ),
        serde_json::Value::Object(map) => {
            let list = map
                .get("change_points")
                .and_then(|v| v.as_array())
                .ok_or_else(|| bad("expected a change_points array"))?;
            let taus = parse_list(list)
                .ok_or_else(|| bad("change_points entries must be integers or have a tau field"))?;
            (taus, map.get("n").and_then(as_usize))
        }
        _ => return Err(bad("expected an array or an object")),
    };
    taus.sort_unstable();
    taus.dedup();
    Ok((taus, n))
}

#[derive(Serialize)]
struct EvaluateReport {
    command: &'static str,
    n: usize,
    truth: Vec<usize>,
    estimate: Vec<usize>,
    covering_metric: f64,
    v_measure: f64,
    qhat_error: i64,
}

fn run_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let (truth_taus, truth_n) = read_change_points(&args.truth)?;
    let (estimate_taus, estimate_n) = read_change_points(&args.estimate)?;
    let n = args
        .length
        .or(truth_n)
        .or(estimate_n)
        .ok_or_else(|| CliError::Usage("--length is required (no n in the JSON inputs)".into()))?;

    let truth = Segmentation::new(n, truth_taus.clone())?;
    let estimate = Segmentation::new(n, estimate_taus.clone())?;
    let report = EvaluateReport {
        command: "evaluate",
        n,
        truth: truth_taus,
        estimate: estimate_taus,
        covering_metric: covering_metric(&truth, &estimate)?,
        v_measure: v_measure(&truth, &estimate)?,
        qhat_error: estimate.num_segments() as i64 - truth.num_segments() as i64,
    };
    match &args.output {
        Some(path) => write_json(&sibling(path, ".json"), &report),
        None => {
            let mut text = serde_json::to_string_pretty(&report).expect("serializable report");
            text.push('\n');
            print!("{text}");
            Ok(())
        }
    }
}

fn run_benchmark(args: &BenchmarkArgs) -> CliResult<()> {
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    let spec_rank = parse_rank_spec(&args.rank)?;
    let k = spec_rank
        .resolve(args.bandwidth)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let config = DetectorConfig::new(args.bandwidth, k, 0.4)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut table = String::from("n,G,seconds\n");
    for (index, &n) in args.sizes.iter().enumerate() {
        let spec = ScenarioSpec {
            scenario: Scenario::CorrelationSwitch,
            n,
            d: args.dimension,
            q: 0,
            rho: 0.3,
            omega_seed: 0,
            margin: Margin::Pareto2,
            change_points: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(index as u64));
        let (values, _) = generate_scenario(&spec, &mut rng)?;
        let series = MultivariateSeries::from_pareto2(values)?;

        let mut times: Vec<f64> = Vec::with_capacity(args.repeats);
        for _ in 0..args.repeats {
            let clock = Instant::now();
            let trace = detector_trace(&series, &config)?;
            std::hint::black_box(&trace);
            times.push(clock.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        let median = times[times.len() / 2];
        writeln!(table, "{n},{},{median:?}", config.g()).expect("string write");
    }
    match &args.output {
        Some(path) => {
            ensure_parent(path)?;
            fs::write(path, table).map_err(io_err(path))
        }
        None => {
            print!("{table}");
            Ok(())
        }
    }
}
