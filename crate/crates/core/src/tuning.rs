//! Random-search hyperparameter tuning with stratified k-fold
//! cross-validation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sampled hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl ParamValue {
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Real(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
enum Dimension {
    Categorical(Vec<ParamValue>),
    LogUniform { lo: f64, hi: f64 },
}

/// Named search dimensions: finite sets or log-uniform real intervals.
#[derive(Debug, Clone, Default)]
pub struct SearchSpace {
    dims: Vec<(String, Dimension)>,
}

impl SearchSpace {
    pub fn new() -> SearchSpace {
        SearchSpace::default()
    }

    pub fn categorical(mut self, name: &str, values: Vec<ParamValue>) -> SearchSpace {
        self.dims
            .push((name.to_string(), Dimension::Categorical(values)));
        self
    }

    pub fn ints(self, name: &str, values: &[i64]) -> SearchSpace {
        self.categorical(name, values.iter().map(|&v| ParamValue::Int(v)).collect())
    }

    pub fn reals(self, name: &str, values: &[f64]) -> SearchSpace {
        self.categorical(name, values.iter().map(|&v| ParamValue::Real(v)).collect())
    }

    pub fn texts(self, name: &str, values: &[&str]) -> SearchSpace {
        self.categorical(
            name,
            values.iter().map(|s| ParamValue::Text(s.to_string())).collect(),
        )
    }

    pub fn log_uniform(mut self, name: &str, lo: f64, hi: f64) -> SearchSpace {
        self.dims
            .push((name.to_string(), Dimension::LogUniform { lo, hi }));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidConfig("empty search space".into()));
        }
        for (name, dim) in &self.dims {
            match dim {
                Dimension::Categorical(vals) if vals.is_empty() => {
                    return Err(Error::InvalidConfig(format!("dimension {name} is empty")));
                }
                Dimension::LogUniform { lo, hi } if !(*lo > 0.0 && lo < hi) => {
                    return Err(Error::InvalidConfig(format!(
                        "dimension {name} needs 0 < lo < hi, got [{lo}, {hi}]"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> TrialConfig {
        let mut config = BTreeMap::new();
        for (name, dim) in &self.dims {
            let value = match dim {
                Dimension::Categorical(vals) => vals[rng.random_range(0..vals.len())].clone(),
                Dimension::LogUniform { lo, hi } => {
                    let u: f64 = rng.random();
                    ParamValue::Real((lo.ln() + u * (hi.ln() - lo.ln())).exp())
                }
            };
            config.insert(name.clone(), value);
        }
        config
    }
}

/// A sampled configuration, keyed by dimension name.
pub type TrialConfig = BTreeMap<String, ParamValue>;

/// One evaluated trial. `mean_score` is `-inf` when evaluation failed.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub config: TrialConfig,
    pub fold_scores: Vec<f64>,
    pub mean_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Search result: the winning trial plus the full log.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: TrialRecord,
    pub trials: Vec<TrialRecord>,
}

/// Stratified k-fold split: folds partition all indices and per-class
/// counts across folds differ by at most one. Deterministic given `seed`.
pub fn stratified_folds(y: &[i64], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 || y.is_empty() {
        return Err(Error::InvalidConfig("k and sample count must be positive".into()));
    }
    let mut by_class: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &label) in y.iter().enumerate() {
        by_class.entry(label).or_default().push(i);
    }
    for (&label, members) in &by_class {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                label,
                count: members.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    for members in by_class.values() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        for (j, idx) in shuffled.into_iter().enumerate() {
            folds[j % k].push(idx);
        }
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Draws `budget` configurations up front (categoricals uniform, reals
/// log-uniform), evaluates them (possibly concurrently), and returns the
/// trial with the highest mean score; ties break toward the earliest draw.
/// Draws failing `constraint` are redrawn. A trial whose evaluation fails
/// scores `-inf` and stays in the log.
pub fn random_search<F>(
    space: &SearchSpace,
    budget: usize,
    seed: u64,
    constraint: Option<&(dyn Fn(&TrialConfig) -> bool + Sync)>,
    evaluate: F,
) -> Result<SearchOutcome>
where
    F: Fn(&TrialConfig) -> std::result::Result<Vec<f64>, String> + Sync,
{
    space.validate()?;
    if budget == 0 {
        return Err(Error::InvalidConfig("search budget must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut configs = Vec::with_capacity(budget);
    for _ in 0..budget {
        let mut attempts = 0;
        loop {
            let candidate = space.draw(&mut rng);
            let ok = constraint.map_or(true, |c| c(&candidate));
            if ok {
                configs.push(candidate);
                break;
            }
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::InvalidConfig(
                    "constraint rejected 10000 consecutive draws".into(),
                ));
            }
        }
    }
    let trials: Vec<TrialRecord> = configs
        .into_par_iter()
        .map(|config| match evaluate(&config) {
            Ok(fold_scores) => {
                let mean = fold_scores.iter().sum::<f64>() / fold_scores.len().max(1) as f64;
                TrialRecord {
                    config,
                    fold_scores,
                    mean_score: mean,
                    error: None,
                }
            }
            Err(message) => TrialRecord {
                config,
                fold_scores: Vec::new(),
                mean_score: f64::NEG_INFINITY,
                error: Some(message),
            },
        })
        .collect();
    let mut best = 0usize;
    for (i, t) in trials.iter().enumerate() {
        if t.mean_score > trials[best].mean_score {
            best = i;
        }
    }
    Ok(SearchOutcome {
        best: trials[best].clone(),
        trials,
    })
}

/// Serializes trials as JSON lines, one record per line.
pub fn trials_to_jsonl(trials: &[TrialRecord]) -> String {
    trials
        .iter()
        .map(|t| serde_json::to_string(t).expect("trial serializes"))
        .collect::<Vec<_>>()
        .join("\n")
}
