//! Dataset and model persistence.
//!
//! Datasets are JSON-lines, one pattern per line:
//!
//! ```text
//! {"cell": {"n": 50, "p": 0.6}, "config": {...}, "features": [...],
//!  "gamma_leak": null, "graph": {"n": ..., "edges": [...]}, "index": 0,
//!  "target": 0.6, "task": "trA2"}
//! ```
//!
//! A line carries either a full `"graph"` or a `"graph_ref"` (the canonical
//! hash of a graph embedded on an earlier line); intrusion datasets embed
//! their shared base graph once and reference it afterwards. The optional
//! `"config"` key echoes the effective run configuration into the artifact.
//! Keys serialize in sorted order and floats use 17 significant digits, so
//! identical inputs produce byte-identical files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::graph::{Graph, ObservableKind};
use crate::jsonfmt;
use crate::probe::FeatureVector;
use crate::readout::ReadoutModel;

use super::{Dataset, EnsembleCell, Pattern};

fn pattern_to_json(p: &Pattern, embed_graph: bool, config: Option<&Value>) -> Value {
    let mut cell = Map::new();
    cell.insert("n".into(), Value::from(p.cell.n));
    cell.insert("p".into(), jsonfmt::number(p.cell.p));

    let mut obj = Map::new();
    obj.insert("cell".into(), Value::Object(cell));
    if let Some(cfg) = config {
        obj.insert("config".into(), cfg.clone());
    }
    obj.insert("features".into(), jsonfmt::number_array(p.features.values()));
    obj.insert(
        "gamma_leak".into(),
        p.gamma_leak.map_or(Value::Null, jsonfmt::number),
    );
    if embed_graph {
        obj.insert("graph".into(), p.graph.to_json());
    } else {
        obj.insert("graph_ref".into(), Value::String(p.graph_hash.clone()));
    }
    obj.insert("index".into(), Value::from(p.index));
    obj.insert("target".into(), jsonfmt::number(p.target));
    Value::Object(obj)
}

/// Serialize a dataset to JSON-lines (one pattern per line, no header).
pub fn dataset_to_jsonl(ds: &Dataset, config: Option<&Value>) -> String {
    let mut seen: HashMap<&str, ()> = HashMap::new();
    let mut out = String::new();
    for p in &ds.patterns {
        let embed = seen.insert(p.graph_hash.as_str(), ()).is_none();
        let mut line = pattern_to_json(p, embed, config);
        if let Value::Object(obj) = &mut line {
            obj.insert("task".into(), Value::String(ds.task.tag().into()));
        }
        out.push_str(&serde_json::to_string(&line).expect("valid JSON tree"));
        out.push('\n');
    }
    out
}

/// Write a dataset file; returns the number of lines written.
pub fn write_dataset(ds: &Dataset, config: Option<&Value>, path: &Path) -> Result<usize> {
    let mut w = BufWriter::new(File::create(path)?);
    let text = dataset_to_jsonl(ds, config);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(ds.patterns.len())
}

fn parse_pattern(
    line_no: usize,
    value: &Value,
    graphs: &mut HashMap<String, Arc<Graph>>,
) -> Result<(ObservableKind, Pattern, Option<Value>)> {
    let ctx = |what: &str| Error::Parse(format!("dataset line {line_no}: {what}"));
    let obj = value
        .as_object()
        .ok_or_else(|| ctx("expected a JSON object"))?;

    let task = ObservableKind::parse(
        obj.get("task")
            .and_then(Value::as_str)
            .ok_or_else(|| ctx("missing string field \"task\""))?,
    )?;

    let graph = if let Some(gv) = obj.get("graph") {
        let g = Arc::new(Graph::from_json(gv).map_err(|e| ctx(&e.to_string()))?);
        graphs.insert(g.canonical_hash(), Arc::clone(&g));
        g
    } else if let Some(rv) = obj.get("graph_ref") {
        let hash = rv
            .as_str()
            .ok_or_else(|| ctx("\"graph_ref\" must be a string"))?;
        Arc::clone(
            graphs
                .get(hash)
                .ok_or_else(|| ctx(&format!("unresolved graph_ref {hash}")))?,
        )
    } else {
        return Err(ctx("line carries neither \"graph\" nor \"graph_ref\""));
    };

    let cell_obj = obj
        .get("cell")
        .and_then(Value::as_object)
        .ok_or_else(|| ctx("missing object field \"cell\""))?;
    let cell = EnsembleCell {
        count: 0, // not stored per line
        n: cell_obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| ctx("cell.n must be an integer"))? as usize,
        p: jsonfmt::as_f64(
            cell_obj.get("p").ok_or_else(|| ctx("cell.p missing"))?,
            "cell.p",
        )
        .map_err(|e| ctx(&e.to_string()))?,
    };

    let features = jsonfmt::as_f64_array(
        obj.get("features").ok_or_else(|| ctx("missing \"features\""))?,
        "features",
    )
    .map_err(|e| ctx(&e.to_string()))?;
    let target = jsonfmt::as_f64(
        obj.get("target").ok_or_else(|| ctx("missing \"target\""))?,
        "target",
    )
    .map_err(|e| ctx(&e.to_string()))?;
    let gamma_leak = match obj.get("gamma_leak") {
        None | Some(Value::Null) => None,
        Some(v) => Some(jsonfmt::as_f64(v, "gamma_leak").map_err(|e| ctx(&e.to_string()))?),
    };
    let index = obj.get("index").and_then(Value::as_u64).unwrap_or(0) as usize;

    let graph_hash = graph.canonical_hash();
    let pattern = Pattern {
        features: FeatureVector::new(features),
        target,
        graph,
        graph_hash,
        cell,
        index,
        gamma_leak,
    };
    Ok((task, pattern, obj.get("config").cloned()))
}

/// Read a JSON-lines dataset. Returns the dataset and the embedded run
/// configuration, when present.
pub fn read_dataset(path: &Path) -> Result<(Dataset, Option<Value>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut graphs: HashMap<String, Arc<Graph>> = HashMap::new();
    let mut patterns = Vec::new();
    let mut task: Option<ObservableKind> = None;
    let mut config: Option<Value> = None;
    let mut dim: Option<usize> = None;

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let value: Value = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("dataset line {line_no}: {e}")))?;
        let (line_task, pattern, line_config) = parse_pattern(line_no, &value, &mut graphs)?;
        match task {
            None => task = Some(line_task),
            Some(t) if t != line_task => {
                return Err(Error::Parse(format!(
                    "dataset line {line_no}: task {line_task} conflicts with {t}"
                )));
            }
            _ => {}
        }
        match dim {
            None => dim = Some(pattern.features.len()),
            Some(d) if d != pattern.features.len() => {
                return Err(Error::Parse(format!(
                    "dataset line {line_no}: feature length {} conflicts with {d}",
                    pattern.features.len()
                )));
            }
            _ => {}
        }
        if config.is_none() {
            config = line_config;
        }
        patterns.push(pattern);
    }

    let task = task.ok_or_else(|| Error::Parse("dataset file has no patterns".into()))?;
    Ok((Dataset { task, patterns, rejections: 0 }, config))
}

/// Write a model file, optionally embedding the effective run configuration.
pub fn write_model(model: &ReadoutModel, config: Option<&Value>, path: &Path) -> Result<()> {
    let mut json = model.to_json()?;
    if let (Value::Object(obj), Some(cfg)) = (&mut json, config) {
        obj.insert("config".into(), cfg.clone());
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &json)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<ReadoutModel> {
    let value: Value = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    ReadoutModel::from_json(&value)
}
