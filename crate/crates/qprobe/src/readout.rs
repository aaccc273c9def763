//! Non-iterative linear readout: ridge regression plus evaluation metrics.
//!
//! Training solves the closed-form normal equations on z-scored features and
//! centered targets; the bias is recovered as the target mean and is never
//! penalized. Constant features are excluded from the solve and keep weight
//! zero so the dimension contract survives degenerate inputs.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::graph::ObservableKind;
use crate::jsonfmt;
use crate::probe::{FeatureVector, ProbeConfig};

/// Targets with magnitude at or below this bound make MAPE undefined.
pub const MAPE_GUARD: f64 = 1e-12;

/// Default ridge parameter when none is selected.
pub const DEFAULT_LAMBDA: f64 = 1e-6;

/// Grid scanned by cross-validated λ selection.
pub const LAMBDA_GRID: [f64; 5] = [1e-10, 1e-8, 1e-6, 1e-4, 1e-2];

/// A trained affine readout `ŷ = w · z(x) + b` over standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    weights: Vec<f64>,
    bias: f64,
    lambda: f64,
    feature_mean: Vec<f64>,
    feature_std: Vec<f64>,
    task: Option<ObservableKind>,
    probe: Option<ProbeConfig>,
}

impl ReadoutModel {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn task(&self) -> Option<ObservableKind> {
        self.task
    }

    pub fn probe(&self) -> Option<&ProbeConfig> {
        self.probe.as_ref()
    }

    /// Stamp the model with the observable it was trained for.
    pub fn with_task(mut self, task: ObservableKind) -> Self {
        self.task = Some(task);
        self
    }

    /// Stamp the model with the probe that produced its features.
    pub fn with_probe(mut self, probe: ProbeConfig) -> Self {
        self.probe = Some(probe);
        self
    }

    /// Model file form; requires task and probe stamps.
    pub fn to_json(&self) -> Result<Value> {
        let task = self
            .task
            .ok_or_else(|| Error::parameter("model has no task stamp"))?;
        let probe = self
            .probe
            .as_ref()
            .ok_or_else(|| Error::parameter("model has no probe stamp"))?;
        let mut obj = Map::new();
        obj.insert("task".into(), Value::String(task.tag().into()));
        obj.insert("weights".into(), jsonfmt::number_array(&self.weights));
        obj.insert("bias".into(), jsonfmt::number(self.bias));
        obj.insert("lambda".into(), jsonfmt::number(self.lambda));
        obj.insert("feature_mean".into(), jsonfmt::number_array(&self.feature_mean));
        obj.insert("feature_std".into(), jsonfmt::number_array(&self.feature_std));
        obj.insert("probe".into(), probe.to_json());
        Ok(Value::Object(obj))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("model: expected an object".into()))?;
        let field = |name: &str| {
            obj.get(name)
                .ok_or_else(|| Error::Parse(format!("model: missing field \"{name}\"")))
        };
        let task = ObservableKind::parse(
            field("task")?
                .as_str()
                .ok_or_else(|| Error::Parse("model: \"task\" must be a string".into()))?,
        )?;
        let weights = jsonfmt::as_f64_array(field("weights")?, "model.weights")?;
        let feature_mean = jsonfmt::as_f64_array(field("feature_mean")?, "model.feature_mean")?;
        let feature_std = jsonfmt::as_f64_array(field("feature_std")?, "model.feature_std")?;
        if weights.len() != feature_mean.len() || weights.len() != feature_std.len() {
            return Err(Error::Parse(
                "model: weights, feature_mean and feature_std must have equal length".into(),
            ));
        }
        Ok(ReadoutModel {
            weights,
            bias: jsonfmt::as_f64(field("bias")?, "model.bias")?,
            lambda: jsonfmt::as_f64(field("lambda")?, "model.lambda")?,
            feature_mean,
            feature_std,
            task: Some(task),
            probe: Some(ProbeConfig::from_json(field("probe")?)?),
        })
    }
}

fn column_stats(x: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let rows = x.nrows() as f64;
    let mut means = Vec::with_capacity(x.ncols());
    let mut stds = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let col = x.column(j);
        let mean = col.sum() / rows;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / rows;
        means.push(mean);
        stds.push(var.sqrt());
    }
    (means, stds)
}

fn is_constant(std: f64, mean: f64) -> bool {
    std <= 1e-12 * mean.abs().max(1.0)
}

/// Fit the readout by solving `(ZᵀZ + λI) w = Zᵀ(y − ȳ)` on z-scored
/// features; the bias equals the target mean and is not penalized.
pub fn fit_ridge(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<ReadoutModel> {
    let (rows, dim) = (x.nrows(), x.ncols());
    if rows == 0 || dim == 0 {
        return Err(Error::parameter("training set must be nonempty"));
    }
    if y.len() != rows {
        return Err(Error::parameter(format!(
            "feature rows ({rows}) and targets ({}) disagree",
            y.len()
        )));
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::parameter(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::parameter("training data contains non-finite entries"));
    }

    let (means, raw_stds) = column_stats(x);
    let active: Vec<usize> = (0..dim)
        .filter(|&j| !is_constant(raw_stds[j], means[j]))
        .collect();
    let stds: Vec<f64> = raw_stds
        .iter()
        .zip(&means)
        .map(|(&s, &m)| if is_constant(s, m) { 1.0 } else { s })
        .collect();

    let y_mean = y.iter().sum::<f64>() / rows as f64;
    let mut weights = vec![0.0; dim];
    if !active.is_empty() {
        let mut z = DMatrix::zeros(rows, active.len());
        for (col, &j) in active.iter().enumerate() {
            for i in 0..rows {
                z[(i, col)] = (x[(i, j)] - means[j]) / stds[j];
            }
        }
        let centered = DVector::from_iterator(rows, y.iter().map(|v| v - y_mean));
        let mut gram = z.tr_mul(&z);
        for d in 0..active.len() {
            gram[(d, d)] += lambda;
        }
        let rhs = z.tr_mul(&centered);
        let chol = Cholesky::new(gram).ok_or_else(|| {
            if lambda == 0.0 {
                Error::Numerical(
                    "normal equations are singular at lambda = 0; use lambda > 0".into(),
                )
            } else {
                Error::Numerical("normal equations could not be factorized".into())
            }
        })?;
        let solution = chol.solve(&rhs);
        for (col, &j) in active.iter().enumerate() {
            weights[j] = solution[col];
        }
    }

    Ok(ReadoutModel {
        weights,
        bias: y_mean,
        lambda,
        feature_mean: means,
        feature_std: stds,
        task: None,
        probe: None,
    })
}

/// Apply the readout to one feature vector.
pub fn predict(model: &ReadoutModel, features: &FeatureVector) -> Result<f64> {
    predict_slice(model, features.values())
}

pub fn predict_slice(model: &ReadoutModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.weights.len() {
        return Err(Error::parameter(format!(
            "feature length {} does not match model dimension {}",
            features.len(),
            model.weights.len()
        )));
    }
    let mut acc = model.bias;
    for (j, &v) in features.iter().enumerate() {
        acc += model.weights[j] * (v - model.feature_mean[j]) / model.feature_std[j];
    }
    Ok(acc)
}

/// Pick λ from [`LAMBDA_GRID`] by k-fold cross-validation (deterministic
/// round-robin folds; ties resolve to the smaller λ).
pub fn select_lambda_cv(x: &DMatrix<f64>, y: &[f64], folds: usize) -> Result<f64> {
    let rows = x.nrows();
    if folds < 2 || rows < folds {
        return Err(Error::parameter(format!(
            "cross-validation needs 2 <= folds <= rows, got folds={folds}, rows={rows}"
        )));
    }
    let mut best = (f64::INFINITY, LAMBDA_GRID[0]);
    for &lambda in &LAMBDA_GRID {
        let mut sq_err = 0.0;
        for fold in 0..folds {
            let train_idx: Vec<usize> = (0..rows).filter(|i| i % folds != fold).collect();
            let val_idx: Vec<usize> = (0..rows).filter(|i| i % folds == fold).collect();
            let x_train = x.select_rows(train_idx.iter());
            let y_train: Vec<f64> = train_idx.iter().map(|&i| y[i]).collect();
            let model = fit_ridge(&x_train, &y_train, lambda)?;
            for &i in &val_idx {
                let pred = predict_slice(&model, x.row(i).transpose().as_slice())?;
                sq_err += (pred - y[i]).powi(2);
            }
        }
        if sq_err < best.0 {
            best = (sq_err, lambda);
        }
    }
    Ok(best.1)
}

/// Mean absolute percentage error, `100/N · Σ |(pred − truth)/truth|`.
///
/// Undefined when any target magnitude falls at or below [`MAPE_GUARD`].
pub fn mape(truth: &[f64], pred: &[f64]) -> Result<f64> {
    if truth.len() != pred.len() {
        return Err(Error::parameter("mape needs equal-length vectors"));
    }
    if truth.is_empty() {
        return Err(Error::Metric("mape of an empty sample".into()));
    }
    let mut total = 0.0;
    for (&t, &p) in truth.iter().zip(pred) {
        if t.abs() <= MAPE_GUARD {
            return Err(Error::Metric(format!(
                "mape undefined: target {t} within guard {MAPE_GUARD}"
            )));
        }
        total += ((p - t) / t).abs();
    }
    Ok(100.0 * total / truth.len() as f64)
}

/// Pearson correlation: population covariance over the product of population
/// standard deviations.
pub fn pearson(truth: &[f64], pred: &[f64]) -> Result<f64> {
    if truth.len() != pred.len() {
        return Err(Error::parameter("pearson needs equal-length vectors"));
    }
    let n = truth.len();
    if n < 2 {
        return Err(Error::Metric("pearson needs at least two samples".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mt, mp) = (mean(truth), mean(pred));
    let mut cov = 0.0;
    let mut vt = 0.0;
    let mut vp = 0.0;
    for (&t, &p) in truth.iter().zip(pred) {
        cov += (t - mt) * (p - mp);
        vt += (t - mt).powi(2);
        vp += (p - mp).powi(2);
    }
    if vt == 0.0 || vp == 0.0 {
        return Err(Error::Metric("pearson undefined for a constant vector".into()));
    }
    // roundoff can push a perfect correlation past 1
    Ok((cov / (vt.sqrt() * vp.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman rank correlation (average ranks on ties).
pub fn spearman(truth: &[f64], pred: &[f64]) -> Result<f64> {
    let ranks = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("finite values"));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    };
    pearson(&ranks(truth), &ranks(pred))
}

/// Evaluation summary over one dataset split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mape: f64,
    pub pearson_r: f64,
    pub n_samples: usize,
}

impl Metrics {
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("mape".into(), jsonfmt::number(self.mape));
        obj.insert("pearson_r".into(), jsonfmt::number(self.pearson_r));
        obj.insert("n_samples".into(), Value::from(self.n_samples));
        Value::Object(obj)
    }
}
