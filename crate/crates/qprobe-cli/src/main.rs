//! Command-line front end: dataset generation, training, evaluation, the
//! benchmark table and the intrusion experiment.
//!
//! Exit codes are a stable contract: 0 success, 1 runtime/data error,
//! 2 usage error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use qprobe::experiments::{
    self, assert_disjoint, build_dataset, parse_composition, read_dataset, read_model,
    reproduce_table1, run_bench_row, write_dataset, write_model, Dataset, IntrusionSpec,
    RowOutcome, Split, BENCH_ROWS,
};
use qprobe::graph::ObservableKind;
use qprobe::jsonfmt;
use qprobe::probe::ProbeConfig;
use qprobe::readout;

use config::{path_flag, resolve, ConfigEcho, FileConfig, Resolved};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config: exit code 2.
    Usage(String),
    /// Failed run or unreadable data: exit code 1.
    Runtime(String),
}

impl From<qprobe::Error> for CliError {
    fn from(e: qprobe::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "qprobe",
    version,
    about = "Infer global graph observables from local quantum-walk probes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SharedOpts {
    /// TOML config file with the same keys as the flags (flags win)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Number of monitored nodes (the set is {0..M-1})
    #[arg(long, value_name = "M")]
    probe_m: Option<usize>,
    /// Number of sampling times
    #[arg(long, value_name = "T")]
    probe_t: Option<usize>,
    /// Time step Δt in units of ħ/γ
    #[arg(long, value_name = "DT")]
    probe_dt: Option<f64>,
    /// Projective-measurement budget per feature (omit for exact probabilities)
    #[arg(long, value_name = "N")]
    shots: Option<u64>,
    /// Ridge parameter: a number or "cv" for 5-fold cross-validation
    #[arg(long, value_name = "L")]
    lambda: Option<String>,
    /// Master seed; all randomness derives from it
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Worker threads for dataset construction
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

impl SharedOpts {
    fn resolve(&self) -> Result<Resolved, CliError> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        resolve(
            &file,
            self.probe_m,
            self.probe_t,
            self.probe_dt,
            self.shots,
            self.lambda.clone(),
            self.seed,
            self.threads,
        )
    }

    fn file(&self) -> Result<FileConfig, CliError> {
        match &self.config {
            Some(path) => FileConfig::load(path),
            None => Ok(FileConfig::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from an ensemble composition
    Gen {
        /// Target observable (trA2, trA3, trA4, hub_density, network_size, spectral_ratio)
        #[arg(long)]
        task: Option<String>,
        /// Train composition, e.g. "150xG(50,0.6)" or "90xG(50,p=0.2|0.4|0.6|0.8)"
        #[arg(long, value_name = "COMPOSITION")]
        train: Option<String>,
        /// Optional test composition (drawn from a disjoint seed stream)
        #[arg(long, value_name = "COMPOSITION")]
        test: Option<String>,
        /// Output path for the train dataset (JSON lines)
        #[arg(short, long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Output path for the test dataset
        #[arg(long, value_name = "FILE")]
        test_out: Option<PathBuf>,
        #[command(flatten)]
        shared: SharedOpts,
    },
    /// Fit the linear readout on a dataset file
    Train {
        /// Dataset file (JSON lines)
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        /// Output path for the model file
        #[arg(short, long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        shared: SharedOpts,
    },
    /// Evaluate a trained model on a dataset file
    Eval {
        /// Model file
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Dataset file (JSON lines)
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        /// Optional path for the metrics JSON (also printed to stdout)
        #[arg(short, long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        shared: SharedOpts,
    },
    /// Run the bundled benchmark table and write CSV/text reports
    Table1 {
        /// Output directory for table1.csv, table1.txt and config.json
        #[arg(short, long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Comma-separated row ids to run (default: all)
        #[arg(long, value_name = "IDS")]
        rows: Option<String>,
        #[command(flatten)]
        shared: SharedOpts,
    },
    /// Run the Γ-inference intrusion experiment
    Intrude {
        /// Base graph size
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Base graph edge probability
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Leak node (must not be monitored)
        #[arg(long, default_value_t = 99)]
        alpha: usize,
        /// Upper end of the uniform Γ range, in units of γ
        #[arg(long, default_value_t = 2.0)]
        gamma_max: f64,
        /// Training patterns
        #[arg(long, default_value_t = 360)]
        train_size: usize,
        /// Test patterns
        #[arg(long, default_value_t = 40)]
        test_size: usize,
        /// Optional path for the report JSON (also printed to stdout)
        #[arg(short, long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        shared: SharedOpts,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn init_threads(resolved: &Resolved) {
    if let Some(k) = resolved.threads {
        // ignore failure: the global pool can only be set once (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
}

fn require_seed(resolved: &Resolved) -> Result<u64, CliError> {
    resolved
        .seed
        .ok_or_else(|| CliError::Usage("missing --seed (or \"seed\" in the config file)".into()))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen { task, train, test, out, test_out, shared } => {
            cmd_gen(task, train, test, out, test_out, &shared)
        }
        Command::Train { data, out, shared } => cmd_train(&data, out, &shared),
        Command::Eval { model, data, out, shared } => cmd_eval(&model, &data, out, &shared),
        Command::Table1 { out, rows, shared } => cmd_table1(out, rows, &shared),
        Command::Intrude { n, p, alpha, gamma_max, train_size, test_size, out, shared } => {
            cmd_intrude(n, p, alpha, gamma_max, train_size, test_size, out, &shared)
        }
    }
}

fn dataset_summary(ds: &Dataset) -> Value {
    let total_draws = ds.patterns.len() + ds.rejections;
    let mut obj = Map::new();
    obj.insert("patterns".into(), Value::from(ds.patterns.len()));
    obj.insert("rejections".into(), Value::from(ds.rejections));
    obj.insert(
        "rejection_rate".into(),
        jsonfmt::number(ds.rejections as f64 / total_draws as f64),
    );
    Value::Object(obj)
}

fn cmd_gen(
    task: Option<String>,
    train: Option<String>,
    test: Option<String>,
    out: Option<PathBuf>,
    test_out: Option<PathBuf>,
    shared: &SharedOpts,
) -> Result<(), CliError> {
    let file = shared.file()?;
    let resolved = shared.resolve()?;
    init_threads(&resolved);
    let seed = require_seed(&resolved)?;

    let task_text = task
        .or_else(|| file.task.clone())
        .ok_or_else(|| CliError::Usage("missing --task".into()))?;
    let observable =
        ObservableKind::parse(&task_text).map_err(|e| CliError::Usage(e.to_string()))?;
    let train_text = train
        .or_else(|| file.train.clone())
        .ok_or_else(|| CliError::Usage("missing --train composition".into()))?;
    let test_text = test.or_else(|| file.test.clone());
    let out = path_flag(out.or_else(|| file.out.clone().map(PathBuf::from)), "-o/--out")?;
    let test_out = test_out.or_else(|| file.test_out.clone().map(PathBuf::from));

    let train_spec =
        parse_composition(&train_text).map_err(|e| CliError::Usage(e.to_string()))?;

    let echo = ConfigEcho::new("gen", &resolved)
        .with_str("task", observable.tag())
        .with_str("train", &train_text)
        .with_opt_str("test", test_text.as_deref())
        .with_path("out", &out);
    let echo = match &test_out {
        Some(p) => echo.with_path("test_out", p),
        None => echo,
    };
    let config = echo.build();

    let train_ds = build_dataset(
        observable,
        &train_spec,
        &resolved.probe,
        seed,
        Split::Train,
        qprobe::graph::DEFAULT_MAX_ATTEMPTS,
    )?;
    write_dataset(&train_ds, Some(&config), &out)?;

    let mut summary = Map::new();
    summary.insert("train".into(), dataset_summary(&train_ds));

    if let Some(test_text) = &test_text {
        let test_out = path_flag(test_out, "--test-out")?;
        let test_spec =
            parse_composition(test_text).map_err(|e| CliError::Usage(e.to_string()))?;
        let test_ds = build_dataset(
            observable,
            &test_spec,
            &resolved.probe,
            seed,
            Split::Test,
            qprobe::graph::DEFAULT_MAX_ATTEMPTS,
        )?;
        assert_disjoint(&train_ds, &test_ds)?;
        write_dataset(&test_ds, Some(&config), &test_out)?;
        summary.insert("test".into(), dataset_summary(&test_ds));
    } else if test_out.is_some() {
        return Err(CliError::Usage("--test-out given without --test".into()));
    }

    println!("{}", Value::Object(summary));
    Ok(())
}

fn metrics_json(
    task: ObservableKind,
    split: &str,
    metrics: &qprobe::readout::Metrics,
    excluded: usize,
    lambda: f64,
) -> Value {
    let mut obj = match metrics.to_json() {
        Value::Object(o) => o,
        _ => unreachable!("metrics serialize to an object"),
    };
    obj.insert("task".into(), Value::String(task.tag().into()));
    obj.insert("split".into(), Value::String(split.into()));
    obj.insert("mape_excluded".into(), Value::from(excluded));
    obj.insert("lambda".into(), jsonfmt::number(lambda));
    Value::Object(obj)
}

/// Probe stamp for a dataset: the probe echoed into the file if present,
/// otherwise the resolved probe, checked against the feature dimension.
fn probe_for_dataset(
    ds: &Dataset,
    embedded: Option<&Value>,
    resolved: &Resolved,
) -> Result<ProbeConfig, CliError> {
    let probe = match embedded.and_then(|c| c.get("probe")) {
        Some(pv) => ProbeConfig::from_json(pv)?,
        None => resolved.probe.clone(),
    };
    if probe.feature_dim() != ds.feature_dim() {
        return Err(CliError::Runtime(format!(
            "probe dimension {} does not match dataset feature dimension {}",
            probe.feature_dim(),
            ds.feature_dim()
        )));
    }
    Ok(probe)
}

fn cmd_train(data: &Path, out: Option<PathBuf>, shared: &SharedOpts) -> Result<(), CliError> {
    let resolved = shared.resolve()?;
    let out = path_flag(out, "-o/--out")?;
    let (ds, embedded) = read_dataset(data)?;
    let probe = probe_for_dataset(&ds, embedded.as_ref(), &resolved)?;

    let x = ds.feature_matrix();
    let y = ds.targets();
    let lambda = match resolved.lambda {
        experiments::LambdaChoice::Fixed(l) => l,
        experiments::LambdaChoice::CrossValidated => readout::select_lambda_cv(&x, &y, 5)?,
    };
    let model = readout::fit_ridge(&x, &y, lambda)?
        .with_task(ds.task)
        .with_probe(probe);

    let preds: Vec<f64> = ds
        .patterns
        .iter()
        .map(|p| readout::predict(&model, &p.features))
        .collect::<qprobe::Result<_>>()?;
    let (metrics, excluded) = experiments::evaluate_predictions(ds.task, &y, &preds)?;

    let config = ConfigEcho::new("train", &resolved)
        .with_str("task", ds.task.tag())
        .with_path("data", data)
        .with_path("out", &out)
        .build();
    write_model(&model, Some(&config), &out)?;

    println!("{}", metrics_json(ds.task, "train", &metrics, excluded, lambda));
    Ok(())
}

fn cmd_eval(
    model_path: &Path,
    data: &Path,
    out: Option<PathBuf>,
    _shared: &SharedOpts,
) -> Result<(), CliError> {
    let model = read_model(model_path)?;
    let (ds, _) = read_dataset(data)?;
    let task = model.task().expect("model files always carry a task");
    if task != ds.task {
        return Err(CliError::Runtime(format!(
            "model was trained for {} but the dataset targets {}",
            task, ds.task
        )));
    }
    if model.feature_dim() != ds.feature_dim() {
        return Err(CliError::Runtime(format!(
            "model dimension {} does not match dataset feature dimension {}",
            model.feature_dim(),
            ds.feature_dim()
        )));
    }

    let y = ds.targets();
    let preds: Vec<f64> = ds
        .patterns
        .iter()
        .map(|p| readout::predict(&model, &p.features))
        .collect::<qprobe::Result<_>>()?;
    let (metrics, excluded) = experiments::evaluate_predictions(ds.task, &y, &preds)?;

    let json = metrics_json(ds.task, "eval", &metrics, excluded, model.lambda());
    if let Some(out) = out {
        std::fs::write(&out, format!("{json}\n")).map_err(qprobe::Error::from)?;
    }
    println!("{json}");
    Ok(())
}

fn parse_rows(text: &str) -> Result<Vec<usize>, CliError> {
    let mut ids = Vec::new();
    for part in text.split(',') {
        let id: usize = part
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad row id \"{part}\"")))?;
        if !(1..=BENCH_ROWS.len()).contains(&id) {
            return Err(CliError::Usage(format!(
                "row id {id} out of range 1..={}",
                BENCH_ROWS.len()
            )));
        }
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(CliError::Usage("--rows must name at least one row".into()));
    }
    Ok(ids)
}

fn cmd_table1(
    out: Option<PathBuf>,
    rows: Option<String>,
    shared: &SharedOpts,
) -> Result<(), CliError> {
    let resolved = shared.resolve()?;
    init_threads(&resolved);
    let seed = require_seed(&resolved)?;
    let out_dir = path_flag(out, "-o/--out")?;
    std::fs::create_dir_all(&out_dir).map_err(qprobe::Error::from)?;

    let outcomes: Vec<RowOutcome> = match &rows {
        None => reproduce_table1(seed, &resolved.probe, resolved.lambda)?,
        Some(text) => parse_rows(text)?
            .into_iter()
            .map(|id| {
                let row = &BENCH_ROWS[id - 1];
                run_bench_row(row, seed, &resolved.probe, resolved.lambda)
                    .map(|report| RowOutcome { row: *row, report })
            })
            .collect::<qprobe::Result<_>>()?,
    };

    let config = ConfigEcho::new("table1", &resolved)
        .with_opt_str("rows", rows.as_deref())
        .with_path("out", &out_dir)
        .build();

    let csv = experiments::render_csv(&outcomes);
    let text = experiments::render_text(&outcomes);
    std::fs::write(out_dir.join("table1.csv"), &csv).map_err(qprobe::Error::from)?;
    std::fs::write(out_dir.join("table1.txt"), &text).map_err(qprobe::Error::from)?;
    std::fs::write(
        out_dir.join("config.json"),
        format!("{:#}\n", config),
    )
    .map_err(qprobe::Error::from)?;
    print!("{text}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_intrude(
    n: usize,
    p: f64,
    alpha: usize,
    gamma_max: f64,
    train_size: usize,
    test_size: usize,
    out: Option<PathBuf>,
    shared: &SharedOpts,
) -> Result<(), CliError> {
    let resolved = shared.resolve()?;
    init_threads(&resolved);
    let seed = require_seed(&resolved)?;

    let spec = IntrusionSpec {
        n,
        p,
        alpha,
        gamma_max,
        n_train: train_size,
        n_test: test_size,
        probe: resolved.probe.clone(),
        lambda: resolved.lambda,
        master_seed: seed,
        max_attempts: qprobe::graph::DEFAULT_MAX_ATTEMPTS,
    };
    let report = experiments::run_intrusion_task(&spec)?;

    let config = ConfigEcho::new("intrude", &resolved)
        .with_value("n", Value::from(n))
        .with_value("p", jsonfmt::number(p))
        .with_value("alpha", Value::from(alpha))
        .with_value("gamma_max", jsonfmt::number(gamma_max))
        .with_value("train_size", Value::from(train_size))
        .with_value("test_size", Value::from(test_size))
        .build();

    let mut obj = Map::new();
    obj.insert("config".into(), config);
    obj.insert(
        "train".into(),
        metrics_json(report.task, "train", &report.train, report.train_mape_excluded, report.lambda),
    );
    obj.insert(
        "test".into(),
        metrics_json(report.task, "test", &report.test, report.test_mape_excluded, report.lambda),
    );
    if let Some(s) = report.test_spearman {
        obj.insert("test_spearman".into(), jsonfmt::number(s));
    }
    let json = Value::Object(obj);
    if let Some(out) = out {
        std::fs::write(&out, format!("{json:#}\n")).map_err(qprobe::Error::from)?;
    }
    println!("{json}");
    Ok(())
}
