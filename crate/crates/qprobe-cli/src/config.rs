//! Option merging: command-line flags override config-file values, and the
//! effective configuration is echoed into every output artifact.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use qprobe::dynamics::TimeGrid;
use qprobe::experiments::LambdaChoice;
use qprobe::jsonfmt;
use qprobe::probe::ProbeConfig;
use qprobe::readout::DEFAULT_LAMBDA;

use crate::CliError;

/// Flat config file (TOML) mirroring the command-line flags.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub task: Option<String>,
    pub train: Option<String>,
    pub test: Option<String>,
    pub probe_m: Option<usize>,
    pub probe_t: Option<usize>,
    pub probe_dt: Option<f64>,
    pub shots: Option<u64>,
    pub lambda: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<String>,
    pub test_out: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let mut cfg = FileConfig::default();
        for (key, value) in table {
            match key.as_str() {
                "task" => cfg.task = Some(as_string(&key, value)?),
                "train" => cfg.train = Some(as_string(&key, value)?),
                "test" => cfg.test = Some(as_string(&key, value)?),
                "probe_m" => cfg.probe_m = Some(as_usize(&key, value)?),
                "probe_t" => cfg.probe_t = Some(as_usize(&key, value)?),
                "probe_dt" => cfg.probe_dt = Some(as_f64(&key, value)?),
                "shots" => cfg.shots = Some(as_usize(&key, value)? as u64),
                "lambda" => cfg.lambda = Some(lambda_string(value)?),
                "seed" => cfg.seed = Some(as_usize(&key, value)? as u64),
                "threads" => cfg.threads = Some(as_usize(&key, value)?),
                "out" => cfg.out = Some(as_string(&key, value)?),
                "test_out" => cfg.test_out = Some(as_string(&key, value)?),
                other => {
                    return Err(CliError::Usage(format!(
                        "config {}: unknown key \"{other}\"",
                        path.display()
                    )));
                }
            }
        }
        Ok(cfg)
    }
}

fn as_string(key: &str, v: toml::Value) -> Result<String, CliError> {
    v.as_str()
        .map(str::to_owned)
        .ok_or_else(|| CliError::Usage(format!("config key \"{key}\" must be a string")))
}

fn as_usize(key: &str, v: toml::Value) -> Result<usize, CliError> {
    v.as_integer()
        .filter(|&i| i >= 0)
        .map(|i| i as usize)
        .ok_or_else(|| CliError::Usage(format!("config key \"{key}\" must be a nonnegative integer")))
}

fn as_f64(key: &str, v: toml::Value) -> Result<f64, CliError> {
    match v {
        toml::Value::Float(f) => Ok(f),
        toml::Value::Integer(i) => Ok(i as f64),
        _ => Err(CliError::Usage(format!("config key \"{key}\" must be a number"))),
    }
}

fn lambda_string(v: toml::Value) -> Result<String, CliError> {
    match v {
        toml::Value::String(s) => Ok(s),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        _ => Err(CliError::Usage("config key \"lambda\" must be a number or \"cv\"".into())),
    }
}

/// Shared probe/λ/seed options after flag-over-config resolution.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub probe: ProbeConfig,
    pub lambda: LambdaChoice,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

pub fn parse_lambda(text: &str) -> Result<LambdaChoice, CliError> {
    if text.eq_ignore_ascii_case("cv") {
        return Ok(LambdaChoice::CrossValidated);
    }
    let value: f64 = text
        .parse()
        .map_err(|_| CliError::Usage(format!("--lambda must be a number or \"cv\", got \"{text}\"")))?;
    if value < 0.0 || !value.is_finite() {
        return Err(CliError::Usage(format!("--lambda must be finite and >= 0, got {value}")));
    }
    Ok(LambdaChoice::Fixed(value))
}

/// Resolve shared options: explicit flags win, then config file, then defaults.
#[allow(clippy::too_many_arguments)]
pub fn resolve(
    file: &FileConfig,
    probe_m: Option<usize>,
    probe_t: Option<usize>,
    probe_dt: Option<f64>,
    shots: Option<u64>,
    lambda: Option<String>,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<Resolved, CliError> {
    let m = probe_m.or(file.probe_m).unwrap_or(5);
    let t = probe_t.or(file.probe_t).unwrap_or(10);
    let dt = probe_dt.or(file.probe_dt).unwrap_or(0.05);
    let shots = shots.or(file.shots).filter(|&s| s > 0);
    if m == 0 {
        return Err(CliError::Usage("--probe-m must be positive".into()));
    }
    let grid = TimeGrid::new(dt, t).map_err(|e| CliError::Usage(e.to_string()))?;
    let probe = ProbeConfig::new((0..m).collect(), grid, shots)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let lambda_text = lambda
        .or_else(|| file.lambda.clone())
        .unwrap_or_else(|| DEFAULT_LAMBDA.to_string());
    Ok(Resolved {
        probe,
        lambda: parse_lambda(&lambda_text)?,
        seed: seed.or(file.seed),
        threads: threads.or(file.threads),
    })
}

/// The provenance object embedded in artifacts.
pub struct ConfigEcho {
    obj: Map<String, Value>,
}

impl ConfigEcho {
    pub fn new(command: &str, resolved: &Resolved) -> Self {
        let mut obj = Map::new();
        obj.insert("command".into(), Value::String(command.into()));
        obj.insert("probe".into(), resolved.probe.to_json());
        let lambda_value = match resolved.lambda {
            LambdaChoice::Fixed(l) => jsonfmt::number(l),
            LambdaChoice::CrossValidated => Value::String("cv".into()),
        };
        obj.insert("lambda".into(), lambda_value);
        if let Some(seed) = resolved.seed {
            obj.insert("seed".into(), Value::from(seed));
        }
        if let Some(threads) = resolved.threads {
            obj.insert("threads".into(), Value::from(threads));
        }
        ConfigEcho { obj }
    }

    pub fn with_str(mut self, key: &str, value: &str) -> Self {
        self.obj.insert(key.into(), Value::String(value.into()));
        self
    }

    pub fn with_opt_str(self, key: &str, value: Option<&str>) -> Self {
        match value {
            Some(v) => self.with_str(key, v),
            None => self,
        }
    }

    pub fn with_path(self, key: &str, value: &Path) -> Self {
        self.with_str(key, &value.display().to_string())
    }

    pub fn with_value(mut self, key: &str, value: Value) -> Self {
        self.obj.insert(key.into(), value);
        self
    }

    pub fn build(self) -> Value {
        Value::Object(self.obj)
    }
}

pub fn path_flag(value: Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required output path {flag}")))
}
