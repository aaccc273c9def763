//! Experiment orchestration: datasets, task training/evaluation and the
//! bundled benchmark table.
//!
//! Datasets are deterministic functions of `(spec, master_seed)`: every graph
//! draw and every Γ draw comes from a stream derived from the master seed,
//! the split, the ensemble cell and the pattern index, so parallel
//! construction yields byte-identical artifacts.

mod compose;
mod io;
mod table;

pub use compose::parse_composition;
pub use io::{dataset_to_jsonl, read_dataset, read_model, write_dataset, write_model};
pub use table::{
    render_csv, render_text, reproduce_table1, run_bench_row, BenchRow, RowOutcome, BENCH_ROWS,
};

use std::collections::HashSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::{EffectiveHamiltonian, Leak};
use crate::error::{Error, Result};
use crate::graph::{self, Graph, ObservableKind, DEFAULT_MAX_ATTEMPTS};
use crate::probe::{extract_features, FeatureVector, ProbeConfig};
use crate::readout::{self, Metrics, ReadoutModel, DEFAULT_LAMBDA, MAPE_GUARD};
use crate::seed;

/// Γ targets below this (in units of γ) are excluded from MAPE; they stay in
/// the fit and in the correlation metrics.
pub const GAMMA_MAPE_FLOOR: f64 = 1e-3;

/// Which seed stream a dataset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn tag(self) -> u64 {
        match self {
            Split::Train => seed::domain::TRAIN,
            Split::Test => seed::domain::TEST,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// One Erdős–Rényi cell of a dataset composition: `count` draws of `G(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleCell {
    pub count: usize,
    pub n: usize,
    pub p: f64,
}

/// A dataset composition, e.g. `[90 G(50, p ∈ {0.2, 0.4, 0.6, 0.8})]_360`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub cells: Vec<EnsembleCell>,
}

impl EnsembleSpec {
    pub fn single(count: usize, n: usize, p: f64) -> Self {
        EnsembleSpec { cells: vec![EnsembleCell { count, n, p }] }
    }

    /// Total dataset size `Σ_k m_k`.
    pub fn total(&self) -> usize {
        self.cells.iter().map(|c| c.count).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::parameter("composition has no cells"));
        }
        for c in &self.cells {
            if c.count == 0 {
                return Err(Error::parameter("cell count must be positive"));
            }
            if c.n < 2 {
                return Err(Error::parameter(format!("cell needs n >= 2, got {}", c.n)));
            }
            if c.p <= 0.0 || c.p >= 1.0 || c.p.is_nan() {
                return Err(Error::parameter(format!(
                    "cell needs 0 < p < 1, got {}",
                    c.p
                )));
            }
        }
        Ok(())
    }
}

/// Ridge parameter policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    /// 5-fold cross-validated selection over [`readout::LAMBDA_GRID`].
    CrossValidated,
}

impl Default for LambdaChoice {
    fn default() -> Self {
        LambdaChoice::Fixed(DEFAULT_LAMBDA)
    }
}

/// A supervised inference task over graph ensembles.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub observable: ObservableKind,
    pub train: EnsembleSpec,
    pub test: EnsembleSpec,
    pub probe: ProbeConfig,
    pub lambda: LambdaChoice,
    pub master_seed: u64,
    pub max_attempts: usize,
}

impl TaskSpec {
    pub fn new(
        observable: ObservableKind,
        train: EnsembleSpec,
        test: EnsembleSpec,
        probe: ProbeConfig,
        lambda: LambdaChoice,
        master_seed: u64,
    ) -> Self {
        TaskSpec {
            observable,
            train,
            test,
            probe,
            lambda,
            master_seed,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

/// The Γ-inference experiment: one fixed base graph, patterns differ only in
/// the strength of the imaginary self-loop at `alpha`.
#[derive(Debug, Clone)]
pub struct IntrusionSpec {
    pub n: usize,
    pub p: f64,
    /// Leak node; must not be monitored.
    pub alpha: usize,
    /// Γ is drawn uniformly from `[0, gamma_max]`, in units of γ.
    pub gamma_max: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub probe: ProbeConfig,
    pub lambda: LambdaChoice,
    pub master_seed: u64,
    pub max_attempts: usize,
}

impl IntrusionSpec {
    /// The benchmark intrusion setup: `G_Γ(100, 0.5)`, leak on the last node,
    /// Γ uniform in `[0, 2γ]`, 360 train / 40 test patterns.
    pub fn standard(master_seed: u64) -> Self {
        IntrusionSpec {
            n: 100,
            p: 0.5,
            alpha: 99,
            gamma_max: 2.0,
            n_train: 360,
            n_test: 40,
            probe: ProbeConfig::standard(),
            lambda: LambdaChoice::default(),
            master_seed,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

/// One supervised pattern: features, normalized target, and provenance.
#[derive(Debug, Clone)]
pub struct Pattern {
    pub features: FeatureVector,
    pub target: f64,
    pub graph: Arc<Graph>,
    pub graph_hash: String,
    /// Ensemble cell the graph was drawn from.
    pub cell: EnsembleCell,
    /// Index within the cell.
    pub index: usize,
    /// Leak strength for intrusion patterns.
    pub gamma_leak: Option<f64>,
}

/// An ordered pattern collection for one task and split.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub task: ObservableKind,
    pub patterns: Vec<Pattern>,
    /// Rejected draws during construction (0 for datasets read from disk).
    pub rejections: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.patterns.first().map_or(0, |p| p.features.len())
    }

    pub fn feature_matrix(&self) -> DMatrix<f64> {
        let dim = self.feature_dim();
        DMatrix::from_fn(self.patterns.len(), dim, |i, j| {
            self.patterns[i].features.values()[j]
        })
    }

    pub fn targets(&self) -> Vec<f64> {
        self.patterns.iter().map(|p| p.target).collect()
    }
}

/// Draw one split of an ensemble task.
///
/// Cells are interleaved round-robin, graphs are rejection-sampled until
/// connected, and every pattern derives its own seed from
/// `(master_seed, split, cell, index)`.
pub fn build_dataset(
    observable: ObservableKind,
    ensemble: &EnsembleSpec,
    probe: &ProbeConfig,
    master_seed: u64,
    split: Split,
    max_attempts: usize,
) -> Result<Dataset> {
    if observable == ObservableKind::Gamma {
        return Err(Error::parameter(
            "gamma is inferred by the intrusion pipeline; use build_intrusion_dataset",
        ));
    }
    ensemble.validate()?;

    // round-robin over cells so mixed compositions interleave deterministically
    let mut jobs: Vec<(usize, usize)> = Vec::with_capacity(ensemble.total());
    let max_count = ensemble.cells.iter().map(|c| c.count).max().unwrap_or(0);
    for round in 0..max_count {
        for (c, cell) in ensemble.cells.iter().enumerate() {
            if round < cell.count {
                jobs.push((c, round));
            }
        }
    }

    let built: Result<Vec<(Pattern, usize)>> = jobs
        .par_iter()
        .map(|&(c, k)| {
            let cell = ensemble.cells[c];
            build_pattern(observable, cell, probe, master_seed, split, c, k, max_attempts)
                .map_err(|e| {
                    Error::Ensemble(format!(
                        "{} split, cell G({},{}), index {k}: {e}",
                        split.name(),
                        cell.n,
                        cell.p
                    ))
                })
        })
        .collect();
    let built = built?;
    let rejections = built.iter().map(|(_, r)| r).sum();
    Ok(Dataset {
        task: observable,
        patterns: built.into_iter().map(|(p, _)| p).collect(),
        rejections,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_pattern(
    observable: ObservableKind,
    cell: EnsembleCell,
    probe: &ProbeConfig,
    master_seed: u64,
    split: Split,
    cell_index: usize,
    index: usize,
    max_attempts: usize,
) -> Result<(Pattern, usize)> {
    let mut graph_rng = seed::rng(master_seed, &[split.tag(), cell_index as u64, index as u64]);
    let (g, rejected) = graph::sample_valid_counted(cell.n, cell.p, &mut graph_rng, max_attempts)?;
    let target = graph::observable(&g, observable)?;
    let h = EffectiveHamiltonian::hermitian(g, 1.0)?;
    let features = if probe.shots.is_some() {
        let mut shot_rng = seed::rng(
            master_seed,
            &[seed::domain::SHOTS, split.tag(), cell_index as u64, index as u64],
        );
        extract_features(&h, probe, Some(&mut shot_rng))?
    } else {
        extract_features(&h, probe, None)?
    };
    let g = h.into_graph();
    let graph_hash = g.canonical_hash();
    let pattern = Pattern {
        features,
        target,
        graph: Arc::new(g),
        graph_hash,
        cell,
        index,
        gamma_leak: None,
    };
    Ok((pattern, rejected))
}

/// Build the intrusion train/test datasets.
///
/// All patterns share one base graph; only the leak strength varies.
pub fn build_intrusion_dataset(spec: &IntrusionSpec) -> Result<(Dataset, Dataset)> {
    if spec.probe.monitored.contains(&spec.alpha) {
        return Err(Error::parameter(format!(
            "leak node {} must be distinct from the monitored set",
            spec.alpha
        )));
    }
    if spec.alpha >= spec.n {
        return Err(Error::parameter(format!(
            "leak node {} out of range for n = {}",
            spec.alpha, spec.n
        )));
    }
    if spec.gamma_max <= 0.0 || !spec.gamma_max.is_finite() {
        return Err(Error::parameter("gamma_max must be positive"));
    }
    if spec.n_train == 0 || spec.n_test == 0 {
        return Err(Error::parameter("intrusion splits must be nonempty"));
    }

    let mut base_rng = seed::rng(spec.master_seed, &[seed::domain::INTRUSION_BASE]);
    let (base, base_rejections) =
        graph::sample_valid_counted(spec.n, spec.p, &mut base_rng, spec.max_attempts)?;
    let base = Arc::new(base);
    let cell = EnsembleCell { count: spec.n_train, n: spec.n, p: spec.p };

    let build_split = |split: Split, count: usize| -> Result<Dataset> {
        let patterns: Result<Vec<Pattern>> = (0..count)
            .into_par_iter()
            .map(|k| {
                let mut rng = seed::rng(
                    spec.master_seed,
                    &[seed::domain::GAMMA_DRAW, split.tag(), k as u64],
                );
                let strength = rng.random::<f64>() * spec.gamma_max;
                let h = EffectiveHamiltonian::with_leak(
                    (*base).clone(),
                    1.0,
                    Leak { alpha: spec.alpha, strength },
                )?;
                let features = if spec.probe.shots.is_some() {
                    let mut shot_rng = seed::rng(
                        spec.master_seed,
                        &[seed::domain::SHOTS, split.tag(), k as u64],
                    );
                    extract_features(&h, &spec.probe, Some(&mut shot_rng))?
                } else {
                    extract_features(&h, &spec.probe, None)?
                };
                Ok(Pattern {
                    features,
                    target: strength, // Γ in units of γ = 1
                    graph: Arc::clone(&base),
                    graph_hash: base.canonical_hash(),
                    cell: EnsembleCell { count, ..cell },
                    index: k,
                    gamma_leak: Some(strength),
                })
            })
            .collect();
        Ok(Dataset {
            task: ObservableKind::Gamma,
            patterns: patterns?,
            rejections: base_rejections,
        })
    };

    Ok((
        build_split(Split::Train, spec.n_train)?,
        build_split(Split::Test, spec.n_test)?,
    ))
}

/// Trained model plus train/test metrics for one task.
#[derive(Debug, Clone)]
pub struct TaskReport {
    pub task: ObservableKind,
    pub train: Metrics,
    pub test: Metrics,
    pub model: ReadoutModel,
    /// Ridge parameter actually used (after optional cross-validation).
    pub lambda: f64,
    pub train_predictions: Vec<f64>,
    pub test_predictions: Vec<f64>,
    /// Patterns whose targets fell under the MAPE guard and were skipped there.
    pub train_mape_excluded: usize,
    pub test_mape_excluded: usize,
    /// Rank correlation on the test split.
    pub test_spearman: Option<f64>,
}

/// Task-aware evaluation: MAPE skips targets under the task's guard (1e-3 in
/// units of γ for the Γ task, the generic zero-target guard otherwise);
/// skipped patterns stay in the correlation metric. Returns the metrics and
/// the number of patterns excluded from MAPE.
pub fn evaluate_predictions(
    task: ObservableKind,
    truth: &[f64],
    pred: &[f64],
) -> Result<(Metrics, usize)> {
    let floor = match task {
        ObservableKind::Gamma => GAMMA_MAPE_FLOOR,
        _ => MAPE_GUARD,
    };
    let mut t = Vec::with_capacity(truth.len());
    let mut p = Vec::with_capacity(truth.len());
    for (&a, &b) in truth.iter().zip(pred) {
        if a.abs() > floor {
            t.push(a);
            p.push(b);
        }
    }
    if t.is_empty() {
        return Err(Error::Metric(format!(
            "all {} targets fall under the MAPE guard",
            truth.len()
        )));
    }
    let metrics = Metrics {
        mape: readout::mape(&t, &p)?,
        pearson_r: readout::pearson(truth, pred)?,
        n_samples: truth.len(),
    };
    Ok((metrics, truth.len() - t.len()))
}

/// Fit once on the training split and evaluate both splits.
pub fn fit_and_evaluate(
    train: &Dataset,
    test: &Dataset,
    lambda: LambdaChoice,
    probe: &ProbeConfig,
) -> Result<TaskReport> {
    if train.task != test.task {
        return Err(Error::parameter(format!(
            "train task {} does not match test task {}",
            train.task, test.task
        )));
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::parameter("both splits must be nonempty"));
    }
    if train.feature_dim() != test.feature_dim() {
        return Err(Error::parameter("train and test feature dimensions differ"));
    }

    let x_train = train.feature_matrix();
    let y_train = train.targets();
    let lambda_eff = match lambda {
        LambdaChoice::Fixed(l) => l,
        LambdaChoice::CrossValidated => readout::select_lambda_cv(&x_train, &y_train, 5)?,
    };
    let model = readout::fit_ridge(&x_train, &y_train, lambda_eff)?
        .with_task(train.task)
        .with_probe(probe.clone());

    let predict_all = |ds: &Dataset| -> Result<Vec<f64>> {
        ds.patterns
            .iter()
            .map(|p| readout::predict(&model, &p.features))
            .collect()
    };
    let train_pred = predict_all(train)?;
    let test_pred = predict_all(test)?;
    let y_test = test.targets();

    let (train_metrics, train_excl) = evaluate_predictions(train.task, &y_train, &train_pred)?;
    let (test_metrics, test_excl) = evaluate_predictions(train.task, &y_test, &test_pred)?;
    let report = TaskReport {
        task: train.task,
        train: train_metrics,
        test: test_metrics,
        model,
        lambda: lambda_eff,
        test_spearman: readout::spearman(&y_test, &test_pred).ok(),
        train_predictions: train_pred,
        test_predictions: test_pred,
        train_mape_excluded: train_excl,
        test_mape_excluded: test_excl,
    };
    Ok(report)
}

/// Assert that no graph appears in both splits (by canonical hash).
pub fn assert_disjoint(train: &Dataset, test: &Dataset) -> Result<()> {
    let train_hashes: HashSet<&str> =
        train.patterns.iter().map(|p| p.graph_hash.as_str()).collect();
    for p in &test.patterns {
        if train_hashes.contains(p.graph_hash.as_str()) {
            return Err(Error::Ensemble(format!(
                "graph {} appears in both train and test splits",
                p.graph_hash
            )));
        }
    }
    Ok(())
}

/// Build both splits of an ensemble task, check disjointness, train, evaluate.
pub fn run_task(spec: &TaskSpec) -> Result<TaskReport> {
    let train = build_dataset(
        spec.observable,
        &spec.train,
        &spec.probe,
        spec.master_seed,
        Split::Train,
        spec.max_attempts,
    )?;
    let test = build_dataset(
        spec.observable,
        &spec.test,
        &spec.probe,
        spec.master_seed,
        Split::Test,
        spec.max_attempts,
    )?;
    assert_disjoint(&train, &test)?;
    fit_and_evaluate(&train, &test, spec.lambda, &spec.probe)
}

/// Build the intrusion dataset, train, evaluate.
pub fn run_intrusion_task(spec: &IntrusionSpec) -> Result<TaskReport> {
    let (train, test) = build_intrusion_dataset(spec)?;
    fit_and_evaluate(&train, &test, spec.lambda, &spec.probe)
}
