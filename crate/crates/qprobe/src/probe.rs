//! Local probing: initial-state preparation and feature extraction.
//!
//! The agent controls a monitored set `S` of `M` nodes. It prepares the
//! excitation uniformly over `S`, lets it evolve, and records the occupation
//! probability of each monitored node at every grid time. The `M·T` numbers
//! form the feature vector, ordered time-major:
//! `(p_{i1}(t_1), …, p_{iM}(t_1), …, p_{i1}(t_T), …, p_{iM}(t_T))`.

use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Binomial, Distribution};
use serde_json::{Map, Value};

use crate::dynamics::{self, EffectiveHamiltonian, QuantumState, TimeGrid};
use crate::error::{Error, Result};
use crate::jsonfmt;

/// What the probing agent controls: where it can look, when, and how often.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    /// Ordered monitored set S (distinct node indices).
    pub monitored: Vec<usize>,
    /// Sampling times t_k = k·Δt.
    pub grid: TimeGrid,
    /// Projective-measurement budget per feature; `None` means exact
    /// probabilities (the infinite-shot limit).
    pub shots: Option<u64>,
}

impl ProbeConfig {
    pub fn new(monitored: Vec<usize>, grid: TimeGrid, shots: Option<u64>) -> Result<Self> {
        let cfg = ProbeConfig { monitored, grid, shots };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default probe: M = 5 contiguous nodes, T = 10 steps of Δt = 0.05
    /// (τ = 0.5), exact probabilities.
    pub fn standard() -> Self {
        ProbeConfig {
            monitored: (0..5).collect(),
            grid: TimeGrid::new(0.05, 10).expect("default grid is valid"),
            shots: None,
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.monitored.len() * self.grid.steps()
    }

    fn validate(&self) -> Result<()> {
        if self.monitored.is_empty() {
            return Err(Error::parameter("monitored set must be nonempty"));
        }
        let mut sorted = self.monitored.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::parameter("monitored set contains duplicate nodes"));
        }
        if self.shots == Some(0) {
            return Err(Error::parameter("shot budget must be positive"));
        }
        Ok(())
    }

    /// Check the monitored set against a concrete graph size.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.validate()?;
        if let Some(&bad) = self.monitored.iter().find(|&&i| i >= n) {
            return Err(Error::parameter(format!(
                "monitored node {bad} out of range for n = {n}"
            )));
        }
        Ok(())
    }

    /// JSON form `{"monitored": [...], "dt": f, "steps": int, "shots": int|null}`.
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert(
            "monitored".into(),
            Value::Array(self.monitored.iter().map(|&i| Value::from(i)).collect()),
        );
        obj.insert("dt".into(), jsonfmt::number(self.grid.dt()));
        obj.insert("steps".into(), Value::from(self.grid.steps()));
        obj.insert(
            "shots".into(),
            self.shots.map_or(Value::Null, Value::from),
        );
        Value::Object(obj)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("probe: expected an object".into()))?;
        let monitored = obj
            .get("monitored")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("probe: missing array field \"monitored\"".into()))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|i| i as usize)
                    .ok_or_else(|| Error::Parse("probe: monitored nodes must be integers".into()))
            })
            .collect::<Result<Vec<usize>>>()?;
        let dt = jsonfmt::as_f64(
            obj.get("dt")
                .ok_or_else(|| Error::Parse("probe: missing field \"dt\"".into()))?,
            "probe.dt",
        )?;
        let steps = obj
            .get("steps")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("probe: missing integer field \"steps\"".into()))?;
        let shots = match obj.get("shots") {
            None | Some(Value::Null) => None,
            Some(s) => Some(s.as_u64().ok_or_else(|| {
                Error::Parse("probe: \"shots\" must be a positive integer or null".into())
            })?),
        };
        ProbeConfig::new(monitored, TimeGrid::new(dt, steps as usize)?, shots)
    }
}

/// The M·T monitored occupations in time-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        FeatureVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Excitation uniformly distributed over the monitored set: amplitude
/// `1/√M` on each node of `s`, zero elsewhere.
pub fn initial_state(s: &[usize], n: usize) -> Result<QuantumState> {
    if s.is_empty() {
        return Err(Error::parameter("monitored set must be nonempty"));
    }
    let mut seen = vec![false; n];
    let amp = Complex64::new(1.0 / (s.len() as f64).sqrt(), 0.0);
    let mut values = vec![Complex64::ZERO; n];
    for &i in s {
        if i >= n {
            return Err(Error::parameter(format!("node {i} out of range for n = {n}")));
        }
        if seen[i] {
            return Err(Error::parameter(format!("duplicate monitored node {i}")));
        }
        seen[i] = true;
        values[i] = amp;
    }
    QuantumState::from_amplitudes(values)
}

/// Evolve the uniform initial state and collect monitored occupations.
///
/// The propagator is Hermitian exactly when the Hamiltonian carries no leak.
/// With a finite shot budget every probability is replaced by the success
/// fraction of independent Bernoulli draws, one binomial per feature.
pub fn extract_features(
    h: &EffectiveHamiltonian,
    cfg: &ProbeConfig,
    mut rng: Option<&mut dyn RngCore>,
) -> Result<FeatureVector> {
    let n = h.graph().node_count();
    cfg.validate_for(n)?;
    if cfg.shots.is_some() && rng.is_none() {
        return Err(Error::parameter(
            "finite-shot sampling requires a seeded generator",
        ));
    }
    let psi0 = initial_state(&cfg.monitored, n)?;
    let states = dynamics::evolve(h, &psi0, &cfg.grid)?;
    let mut values = Vec::with_capacity(cfg.feature_dim());
    for state in &states {
        for &i in &cfg.monitored {
            let p = state.occupation(i)?.clamp(0.0, 1.0);
            values.push(match (cfg.shots, rng.as_deref_mut()) {
                (Some(shots), Some(r)) => sample_shots(p, shots, r),
                _ => p,
            });
        }
    }
    Ok(FeatureVector::new(values))
}

fn sample_shots(p: f64, shots: u64, rng: &mut dyn RngCore) -> f64 {
    let bin = Binomial::new(shots, p).expect("probability clamped to [0, 1]");
    bin.sample(rng) as f64 / shots as f64
}
