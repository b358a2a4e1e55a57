//! Experiment configuration and run records.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which benchmark study to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    ViewRecovery,
    KernelCls,
    NnCls,
    Clustering,
}

impl Study {
    pub fn as_str(&self) -> &'static str {
        match self {
            Study::ViewRecovery => "view_recovery",
            Study::KernelCls => "kernel_cls",
            Study::NnCls => "nn_cls",
            Study::Clustering => "clustering",
        }
    }

    pub fn metric_name(&self) -> &'static str {
        match self {
            Study::ViewRecovery | Study::Clustering => "ari",
            Study::KernelCls | Study::NnCls => "accuracy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    Ef,
    Mf,
    Lf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMethod {
    Inherent,
    Random,
    Kmeans,
    Corr,
}

impl PartitionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            PartitionMethod::Inherent => "inherent",
            PartitionMethod::Random => "random",
            PartitionMethod::Kmeans => "kmeans",
            PartitionMethod::Corr => "corr",
        }
    }

    pub(crate) fn code(&self) -> u64 {
        match self {
            PartitionMethod::Inherent => 0,
            PartitionMethod::Random => 1,
            PartitionMethod::Kmeans => 2,
            PartitionMethod::Corr => 3,
        }
    }
}

/// How an RBF bandwidth is derived from the input it is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaPolicy {
    /// gamma = 1 regardless of dimension.
    Unscaled,
    /// gamma = 1/d with d the full feature dimension.
    FullDim,
    /// gamma = 1/d_v with d_v the dimension of the block at hand.
    PerView,
}

impl GammaPolicy {
    /// Bandwidth for a block of `block_dim` features inside a `full_dim`
    /// problem.
    pub fn gamma(&self, full_dim: usize, block_dim: usize) -> f64 {
        match self {
            GammaPolicy::Unscaled => 1.0,
            GammaPolicy::FullDim => 1.0 / full_dim as f64,
            GammaPolicy::PerView => 1.0 / block_dim as f64,
        }
    }
}

/// Where performance-based fusion weights are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    /// Error covariance on the full training set (the final models).
    Train,
    /// Models fit on a stratified 75% subset, covariance on the held-out 25%.
    Holdout,
}

fn default_runs() -> usize {
    10
}
fn default_fusion() -> Vec<FusionMode> {
    vec![FusionMode::Ef, FusionMode::Mf, FusionMode::Lf]
}
fn default_partitions() -> Vec<PartitionMethod> {
    vec![
        PartitionMethod::Random,
        PartitionMethod::Kmeans,
        PartitionMethod::Corr,
    ]
}
fn default_budget() -> usize {
    30
}
fn default_view_recovery_views() -> usize {
    5
}
fn default_gamma_kernel() -> GammaPolicy {
    GammaPolicy::FullDim
}
fn default_gamma_ef_clustering() -> GammaPolicy {
    GammaPolicy::Unscaled
}
fn default_gamma_views_clustering() -> GammaPolicy {
    GammaPolicy::PerView
}
fn default_weight_source() -> WeightSource {
    WeightSource::Train
}

/// Full description of one experiment sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub study: Study,
    pub example_id: u8,
    pub d_list: Vec<usize>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// Fusion families to evaluate (EF / MF / LF).
    #[serde(default = "default_fusion")]
    pub fusion: Vec<FusionMode>,
    /// View construction methods for the MF/LF families.
    #[serde(default = "default_partitions")]
    pub partitions: Vec<PartitionMethod>,
    #[serde(default = "default_budget")]
    pub tuning_budget: usize,
    /// Number of views the view-recovery study hands each partitioner
    /// (the inherent count of Example 2).
    #[serde(default = "default_view_recovery_views")]
    pub view_recovery_views: usize,
    /// Kernel bandwidth for the (MV-)LS-SVM models: per_view (1/d_v,
    /// default) or full_dim (1/d).
    #[serde(default = "default_gamma_kernel")]
    pub kernel_gamma: GammaPolicy,
    /// Affinity bandwidth for early-fusion spectral clustering.
    #[serde(default = "default_gamma_ef_clustering")]
    pub clustering_gamma_ef: GammaPolicy,
    /// Affinity bandwidth for per-view spectral models (MF and LF).
    #[serde(default = "default_gamma_views_clustering")]
    pub clustering_gamma_views: GammaPolicy,
    /// Data used to estimate Eq.-3 performance weights.
    #[serde(default = "default_weight_source")]
    pub perf_weights_on: WeightSource,
    /// Record real wall-clock times in runs.csv. Off by default so that
    /// identical (config, seed) invocations emit byte-identical files.
    #[serde(default)]
    pub timings: bool,
}

impl ExperimentConfig {
    /// A config with protocol defaults for the given study/example.
    pub fn defaults(study: Study, example_id: u8, d_list: Vec<usize>) -> ExperimentConfig {
        let mut config = ExperimentConfig {
            study,
            example_id,
            d_list,
            runs: default_runs(),
            seed_base: 0,
            fusion: default_fusion(),
            partitions: match example_id {
                2 | 4 => vec![
                    PartitionMethod::Inherent,
                    PartitionMethod::Random,
                    PartitionMethod::Kmeans,
                    PartitionMethod::Corr,
                ],
                _ => default_partitions(),
            },
            tuning_budget: default_budget(),
            view_recovery_views: default_view_recovery_views(),
            kernel_gamma: default_gamma_kernel(),
            clustering_gamma_ef: default_gamma_ef_clustering(),
            clustering_gamma_views: default_gamma_views_clustering(),
            perf_weights_on: default_weight_source(),
            timings: false,
        };
        if study == Study::ViewRecovery {
            // the inherent partition is the reference this study scores
            // the constructed methods against
            config.partitions = default_partitions();
        }
        config
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_list.is_empty() {
            return Err(Error::InvalidConfig("d_list is empty".into()));
        }
        if self.runs == 0 || self.tuning_budget == 0 {
            return Err(Error::InvalidConfig(
                "runs and tuning_budget must be at least 1".into(),
            ));
        }
        let example_ok = match self.study {
            Study::ViewRecovery => self.example_id == 2,
            Study::KernelCls | Study::NnCls => matches!(self.example_id, 1 | 2),
            Study::Clustering => matches!(self.example_id, 3 | 4),
        };
        if !example_ok {
            return Err(Error::InvalidConfig(format!(
                "study {} cannot run on example {}",
                self.study.as_str(),
                self.example_id
            )));
        }
        if matches!(self.example_id, 2 | 4) {
            for &d in &self.d_list {
                if d % crate::synth::INHERENT_VIEWS != 0 {
                    return Err(Error::InvalidConfig(format!(
                        "example {} needs d divisible by 5, got {d}",
                        self.example_id
                    )));
                }
            }
        }
        if self.fusion.is_empty() {
            return Err(Error::InvalidConfig("no fusion modes selected".into()));
        }
        let needs_partitions = self.study == Study::ViewRecovery
            || self
                .fusion
                .iter()
                .any(|f| matches!(f, FusionMode::Mf | FusionMode::Lf));
        if needs_partitions && self.partitions.is_empty() {
            return Err(Error::InvalidConfig("no partition methods selected".into()));
        }
        if self.partitions.contains(&PartitionMethod::Inherent)
            && !matches!(self.example_id, 2 | 4)
        {
            return Err(Error::InvalidConfig(format!(
                "example {} has no inherent views",
                self.example_id
            )));
        }
        if self.study == Study::ViewRecovery
            && self.partitions.contains(&PartitionMethod::Inherent)
        {
            return Err(Error::InvalidConfig(
                "view recovery scores constructed partitions against the inherent one".into(),
            ));
        }
        if self.kernel_gamma == GammaPolicy::Unscaled {
            return Err(Error::InvalidConfig(
                "kernel_gamma must be per_view or full_dim".into(),
            ));
        }
        if self.view_recovery_views < 2 {
            return Err(Error::InvalidConfig(
                "view_recovery_views must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// The method grid implied by the fusion and partition selections.
    pub fn method_grid(&self) -> Vec<Method> {
        let mut grid = Vec::new();
        for fusion in &self.fusion {
            match fusion {
                FusionMode::Ef => grid.push(Method {
                    fusion: FusionMode::Ef,
                    partition: None,
                }),
                FusionMode::Mf | FusionMode::Lf => {
                    for &p in &self.partitions {
                        grid.push(Method {
                            fusion: *fusion,
                            partition: Some(p),
                        });
                    }
                }
            }
        }
        grid
    }
}

/// One (fusion, partition) cell of the method grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Method {
    pub fusion: FusionMode,
    pub partition: Option<PartitionMethod>,
}

impl Method {
    /// The paper's label scheme: `EF`, `MF-corr`, `LF-random`, ...
    pub fn label(&self) -> String {
        match (self.fusion, self.partition) {
            (FusionMode::Ef, _) => "EF".to_string(),
            (FusionMode::Mf, Some(p)) => format!("MF-{}", p.as_str()),
            (FusionMode::Lf, Some(p)) => format!("LF-{}", p.as_str()),
            (f, None) => panic!("{f:?} needs a partition method"),
        }
    }

    pub(crate) fn code(&self) -> u64 {
        let f = match self.fusion {
            FusionMode::Ef => 0u64,
            FusionMode::Mf => 1,
            FusionMode::Lf => 2,
        };
        f * 10 + self.partition.map_or(9, |p| p.code())
    }
}

/// One experiment trial: a single method evaluated on one sampled dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub study: Study,
    pub method: String,
    pub example: u8,
    pub d: usize,
    pub run: usize,
    pub seed: u64,
    pub metric: String,
    /// Missing when the cell failed (logged to stderr).
    pub value: Option<f64>,
    pub wall_ms: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_json() {
        let c = ExperimentConfig::defaults(Study::KernelCls, 2, vec![80, 150]);
        c.validate().unwrap();
        let s = serde_json::to_string_pretty(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn minimal_json_uses_defaults() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"study":"clustering","example_id":3,"d_list":[80,240]}"#,
        )
        .unwrap();
        assert_eq!(c.runs, 10);
        assert_eq!(c.tuning_budget, 30);
        assert_eq!(c.clustering_gamma_ef, GammaPolicy::Unscaled);
        assert_eq!(c.clustering_gamma_views, GammaPolicy::PerView);
        assert!(!c.timings);
        c.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_combinations() {
        let mut c = ExperimentConfig::defaults(Study::ViewRecovery, 2, vec![80]);
        c.example_id = 1;
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::defaults(Study::KernelCls, 2, vec![81]);
        c.partitions = vec![PartitionMethod::Corr];
        assert!(c.validate().is_err(), "81 is not divisible by 5");

        let mut c = ExperimentConfig::defaults(Study::KernelCls, 1, vec![80]);
        c.partitions = vec![PartitionMethod::Inherent];
        assert!(c.validate().is_err(), "example 1 has no inherent views");

        let mut c = ExperimentConfig::defaults(Study::KernelCls, 1, vec![80]);
        c.d_list.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn method_grid_and_labels() {
        let mut c = ExperimentConfig::defaults(Study::KernelCls, 2, vec![80]);
        c.partitions = vec![PartitionMethod::Inherent, PartitionMethod::Corr];
        let labels: Vec<String> = c.method_grid().iter().map(|m| m.label()).collect();
        assert_eq!(
            labels,
            vec!["EF", "MF-inherent", "MF-corr", "LF-inherent", "LF-corr"]
        );
    }

    #[test]
    fn gamma_policies() {
        assert_eq!(GammaPolicy::Unscaled.gamma(240, 48), 1.0);
        assert_eq!(GammaPolicy::FullDim.gamma(240, 48), 1.0 / 240.0);
        assert_eq!(GammaPolicy::PerView.gamma(240, 48), 1.0 / 48.0);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let r = serde_json::from_str::<ExperimentConfig>(
            r#"{"study":"kernel_cls","example_id":1,"d_list":[80],"bogus":1}"#,
        );
        assert!(r.is_err());
    }
}
