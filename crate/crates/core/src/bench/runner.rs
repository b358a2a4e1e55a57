//! Study runners: view recovery, kernel / NN classification, clustering.
//!
//! Seeds derive from `seed_base + run_index` so every method within a run
//! sees the same dataset; dataset, partition, tuner and model streams use
//! fixed tag offsets on top of that.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::bench::config::{
    ExperimentConfig, FusionMode, Method, PartitionMethod, RunRecord, Study,
    WeightSource,
};
use crate::clustering::{coreg_spectral, davies_bouldin, spectral_cluster};
use crate::error::{Error, Result};
use crate::fusion::{
    align_binary_assignments, error_covariance, fuse_scores, majority_vote, performance_weights,
    threshold_probability, FusionWeights,
};
use crate::kernels::{lssvm_solve, mv_lssvm_solve, rbf_gram, scores_from_gram, sign_label};
use crate::metrics::accuracy;
use crate::nn::{predict_probabilities, train as nn_train, Architecture, MlpConfig};
use crate::numerics::Matrix;
use crate::seeding::derive;
use crate::synth::{inherent_partition, sample_dataset, Dataset, ExampleSpec};
use crate::tuning::{random_search, stratified_folds, SearchSpace, TrialConfig};
use crate::views::{
    correlation_partition, kmeans_feature_partition, random_partition, split_by_partition,
    MultiViewData, ViewPartition,
};

const TAG_DATASET: u64 = 1;
const TAG_PARTITION: u64 = 2;
const TAG_TUNER: u64 = 3;
const TAG_MODEL: u64 = 4;
const TAG_CLUSTER: u64 = 5;
const TAG_HOLDOUT: u64 = 6;

const CV_FOLDS: usize = 10;
const COREG_LAMBDA: f64 = 0.02;
const CANDIDATE_VIEWS: [usize; 4] = [2, 3, 4, 5];

/// Records plus the resolved configuration they came from.
#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub records: Vec<RunRecord>,
    pub config: ExperimentConfig,
}

/// Runs the configured study over all dimensions and resamples.
pub fn run_study(config: &ExperimentConfig) -> Result<StudyOutput> {
    config.validate()?;
    let records = match config.study {
        Study::ViewRecovery => run_view_recovery(config)?,
        Study::KernelCls | Study::NnCls => run_classification(config)?,
        Study::Clustering => run_clustering(config)?,
    };
    Ok(StudyOutput {
        records,
        config: config.clone(),
    })
}

fn build_partition(
    method: PartitionMethod,
    spec: &ExampleSpec,
    x: &Matrix,
    v: usize,
    seed: u64,
) -> Result<ViewPartition> {
    match method {
        PartitionMethod::Inherent => inherent_partition(spec),
        PartitionMethod::Random => random_partition(x.cols(), v, seed),
        PartitionMethod::Kmeans => kmeans_feature_partition(x, v, seed),
        PartitionMethod::Corr => correlation_partition(x, v, seed),
    }
}

fn candidate_views(method: PartitionMethod) -> Vec<usize> {
    match method {
        PartitionMethod::Inherent => vec![crate::synth::INHERENT_VIEWS],
        _ => CANDIDATE_VIEWS.to_vec(),
    }
}

// ---------------------------------------------------------------------------
// view recovery (Table 1)
// ---------------------------------------------------------------------------

fn run_view_recovery(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let v = config.view_recovery_views;
    let cells: Vec<(usize, usize)> = config
        .d_list
        .iter()
        .flat_map(|&d| (0..config.runs).map(move |run| (d, run)))
        .collect();
    let results: Vec<Vec<RunRecord>> = cells
        .par_iter()
        .map(|&(d, run)| {
            let run_seed = config.seed_base.wrapping_add(run as u64);
            let spec = ExampleSpec::new(2, d, 120, 90, 0)?;
            let ds = sample_dataset(&spec, derive(run_seed, &[TAG_DATASET, d as u64]))?;
            let truth = inherent_partition(&spec)?.assignment_vector();
            let mut recs = Vec::new();
            for &pm in &config.partitions {
                let start = Instant::now();
                let seed = derive(run_seed, &[TAG_PARTITION, pm.code(), v as u64]);
                let value = build_partition(pm, &spec, &ds.x_train, v, seed)
                    .and_then(|p| crate::metrics::ari(&p.assignment_vector(), &truth));
                recs.push(cell_record(
                    config,
                    pm.as_str().to_string(),
                    d,
                    run,
                    run_seed,
                    value,
                    start,
                ));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().flatten().collect())
}

fn cell_record(
    config: &ExperimentConfig,
    method: String,
    d: usize,
    run: usize,
    run_seed: u64,
    value: Result<f64>,
    start: Instant,
) -> RunRecord {
    let value = match value {
        Ok(v) => Some(v),
        Err(e) => {
            eprintln!(
                "[midfuse] {} {} d={d} run={run}: cell failed: {e}",
                config.study.as_str(),
                method
            );
            None
        }
    };
    RunRecord {
        study: config.study,
        method,
        example: config.example_id,
        d,
        run,
        seed: run_seed,
        metric: config.study.metric_name().to_string(),
        value,
        wall_ms: if config.timings {
            start.elapsed().as_millis() as u64
        } else {
            0
        },
    }
}

// ---------------------------------------------------------------------------
// classification studies
// ---------------------------------------------------------------------------

fn run_classification(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let grid = config.method_grid();
    let mut records = Vec::new();
    for &d in &config.d_list {
        let spec = ExampleSpec::with_defaults(config.example_id, d)?;
        for run in 0..config.runs {
            let run_seed = config.seed_base.wrapping_add(run as u64);
            let ds = sample_dataset(&spec, derive(run_seed, &[TAG_DATASET, d as u64]))?;
            for method in &grid {
                let start = Instant::now();
                let value = match config.study {
                    Study::KernelCls => kernel_cell(config, &spec, &ds, method, run_seed),
                    Study::NnCls => nn_cell(config, &spec, &ds, method, run_seed),
                    _ => unreachable!(),
                };
                records.push(cell_record(
                    config,
                    method.label(),
                    d,
                    run,
                    run_seed,
                    value,
                    start,
                ));
            }
        }
    }
    Ok(records)
}

fn labels_i64(y: &[f64]) -> Vec<i64> {
    y.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect()
}

fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut in_fold = vec![false; n];
    for &i in fold {
        in_fold[i] = true;
    }
    (0..n).filter(|&i| !in_fold[i]).collect()
}

fn sub_gram(k: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), cols.len(), |i, j| k.get(rows[i], cols[j]))
}

fn gather(y: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| y[i]).collect()
}

struct KernelFold {
    /// Per-view train-train Gram slices.
    k_train: Vec<Matrix>,
    /// Per-view validation-train Gram slices.
    k_cross: Vec<Matrix>,
    y_train: Vec<f64>,
    y_val: Vec<f64>,
}

fn kernel_folds(grams: &[Matrix], y: &[f64], folds: &[Vec<usize>]) -> Vec<KernelFold> {
    folds
        .iter()
        .map(|val_idx| {
            let train_idx = complement(y.len(), val_idx);
            KernelFold {
                k_train: grams
                    .iter()
                    .map(|k| sub_gram(k, &train_idx, &train_idx))
                    .collect(),
                k_cross: grams
                    .iter()
                    .map(|k| sub_gram(k, val_idx, &train_idx))
                    .collect(),
                y_train: gather(y, &train_idx),
                y_val: gather(y, val_idx),
            }
        })
        .collect()
}

fn reg_space(n_gammas: usize) -> SearchSpace {
    let mut space = SearchSpace::new();
    for i in 0..n_gammas {
        space = space.log_uniform(&format!("gamma{i}"), 1e-3, 1e3);
    }
    space
}

fn trial_gammas(trial: &TrialConfig, v: usize) -> Vec<f64> {
    (0..v)
        .map(|i| trial[&format!("gamma{i}")].as_f64().expect("real dim"))
        .collect()
}

// rho = (1 - gap) * min(gamma), strictly inside the positive-definite region
fn trial_rho(trial: &TrialConfig, gammas: &[f64], v: usize) -> f64 {
    if v < 2 {
        return 0.0;
    }
    let gap = trial["rho_gap"].as_f64().expect("rho_gap dim");
    let min_gamma = gammas.iter().cloned().fold(f64::INFINITY, f64::min);
    (1.0 - gap) * min_gamma
}

fn sign_accuracy(scores: &[f64], y: &[f64]) -> std::result::Result<f64, String> {
    let labels: Vec<f64> = scores.iter().map(|&s| sign_label(s)).collect();
    accuracy(&labels, y).map_err(|e| e.to_string())
}

// fused late-fusion scores with the tuned decision rule; weights from the
// training scores when requested, falling back to average fusion when the
// error covariance is singular
fn late_fusion_weights(
    decision: &str,
    train_scores: &Matrix,
    y_train: &[f64],
) -> std::result::Result<FusionWeights, String> {
    let v = train_scores.cols();
    if decision == "average" {
        return Ok(FusionWeights::average(v));
    }
    let c = error_covariance(train_scores, y_train).map_err(|e| e.to_string())?;
    match performance_weights(&c) {
        Ok(w) => Ok(w),
        Err(_) => {
            eprintln!("[midfuse] singular error covariance; falling back to average fusion");
            Ok(FusionWeights::average(v))
        }
    }
}

fn scores_matrix(per_view: &[Vec<f64>]) -> Matrix {
    let v = per_view.len();
    let n = per_view.first().map_or(0, |s| s.len());
    Matrix::from_fn(n, v, |i, j| per_view[j][i])
}

fn kernel_cell(
    config: &ExperimentConfig,
    spec: &ExampleSpec,
    ds: &Dataset,
    method: &Method,
    run_seed: u64,
) -> Result<f64> {
    let y = ds.y_train.as_ref().expect("classification labels");
    let x = &ds.x_train;
    let x_test = ds.x_test.as_ref().expect("classification test split");
    let y_test = ds.y_test.as_ref().expect("classification test labels");
    let d = spec.d;
    let code = method.code();
    let folds = stratified_folds(
        &labels_i64(y),
        CV_FOLDS,
        derive(run_seed, &[TAG_TUNER, code, 0]),
    )?;
    let tuner_seed = derive(run_seed, &[TAG_TUNER, code, 1]);

    match method.fusion {
        FusionMode::Ef => {
            let gamma_k = config.kernel_gamma.gamma(d, d);
            let k_full = rbf_gram(x, x, gamma_k)?;
            let fold_data = kernel_folds(std::slice::from_ref(&k_full), y, &folds);
            let space = reg_space(1);
            let outcome = random_search(&space, config.tuning_budget, tuner_seed, None, |trial| {
                let gamma_reg = trial["gamma0"].as_f64().expect("real dim");
                fold_data
                    .iter()
                    .map(|f| {
                        let dual = lssvm_solve(&f.k_train[0], &f.y_train, gamma_reg)
                            .map_err(|e| e.to_string())?;
                        let scores = scores_from_gram(&dual, &f.y_train, &f.k_cross[0])
                            .map_err(|e| e.to_string())?;
                        sign_accuracy(&scores, &f.y_val)
                    })
                    .collect()
            })?;
            let gamma_reg = outcome.best.config["gamma0"].as_f64().expect("real dim");
            let dual = lssvm_solve(&k_full, y, gamma_reg)?;
            let k_cross = rbf_gram(x_test, x, gamma_k)?;
            let scores = scores_from_gram(&dual, y, &k_cross)?;
            let labels: Vec<f64> = scores.iter().map(|&s| sign_label(s)).collect();
            accuracy(&labels, y_test)
        }
        FusionMode::Mf | FusionMode::Lf => {
            let pm = method.partition.expect("partitioned method");
            let vs = candidate_views(pm);
            // per candidate V: partition, per-view grams, per-fold slices
            let mut partitions: BTreeMap<usize, ViewPartition> = BTreeMap::new();
            let mut fold_data: BTreeMap<usize, Vec<KernelFold>> = BTreeMap::new();
            let mut full_grams: BTreeMap<usize, Vec<Matrix>> = BTreeMap::new();
            for &v in &vs {
                let pseed = derive(run_seed, &[TAG_PARTITION, pm.code(), v as u64]);
                let partition = build_partition(pm, spec, x, v, pseed)?;
                let mv = split_by_partition(x, &partition)?;
                let grams: Vec<Matrix> = mv
                    .views
                    .iter()
                    .map(|xv| {
                        rbf_gram(xv, xv, config.kernel_gamma.gamma(d, xv.cols()))
                    })
                    .collect::<Result<_>>()?;
                fold_data.insert(v, kernel_folds(&grams, y, &folds));
                full_grams.insert(v, grams);
                partitions.insert(v, partition);
            }
            let is_mf = method.fusion == FusionMode::Mf;
            let views_dim: Vec<i64> = vs.iter().map(|&v| v as i64).collect();
            let space = if is_mf {
                // one shared regularization: the coupled system reaches its
                // strong-consensus regime only when the per-view values are
                // equal and rho approaches them. The coupling is sampled via
                // its gap to the positive-definiteness boundary,
                // rho = (1 - gap) * gamma, log-uniform in the gap.
                SearchSpace::new()
                    .log_uniform("gamma_shared", 1e-3, 1e3)
                    .ints("views", &views_dim)
                    .log_uniform("rho_gap", 1e-3, 1.0)
            } else {
                reg_space(5)
                    .ints("views", &views_dim)
                    .texts("decision", &["average", "performance"])
            };
            let outcome = random_search(
                &space,
                config.tuning_budget,
                tuner_seed,
                None,
                |trial| {
                    let v = trial["views"].as_i64().expect("views dim") as usize;
                    let gammas = if is_mf {
                        vec![trial["gamma_shared"].as_f64().expect("real dim"); v]
                    } else {
                        trial_gammas(trial, v)
                    };
                    let data = &fold_data[&v];
                    if is_mf {
                        let rho = trial_rho(trial, &gammas, v);
                        data.iter()
                            .map(|f| {
                                let duals = mv_lssvm_solve(&f.k_train, &f.y_train, &gammas, rho)
                                    .map_err(|e| e.to_string())?;
                                let mut fused = vec![0.0; f.y_val.len()];
                                for (dual, kc) in duals.iter().zip(&f.k_cross) {
                                    let s = scores_from_gram(dual, &f.y_train, kc)
                                        .map_err(|e| e.to_string())?;
                                    for (acc, si) in fused.iter_mut().zip(s) {
                                        *acc += si;
                                    }
                                }
                                sign_accuracy(&fused, &f.y_val)
                            })
                            .collect()
                    } else {
                        let decision = trial["decision"].as_str().expect("decision dim");
                        data.iter()
                            .map(|f| {
                                let mut val_scores = Vec::with_capacity(v);
                                let mut train_scores = Vec::with_capacity(v);
                                for vi in 0..v {
                                    let dual =
                                        lssvm_solve(&f.k_train[vi], &f.y_train, gammas[vi])
                                            .map_err(|e| e.to_string())?;
                                    val_scores.push(
                                        scores_from_gram(&dual, &f.y_train, &f.k_cross[vi])
                                            .map_err(|e| e.to_string())?,
                                    );
                                    train_scores.push(
                                        scores_from_gram(&dual, &f.y_train, &f.k_train[vi])
                                            .map_err(|e| e.to_string())?,
                                    );
                                }
                                let weights = late_fusion_weights(
                                    decision,
                                    &scores_matrix(&train_scores),
                                    &f.y_train,
                                )?;
                                let fused = fuse_scores(&scores_matrix(&val_scores), &weights)
                                    .map_err(|e| e.to_string())?;
                                sign_accuracy(&fused, &f.y_val)
                            })
                            .collect()
                    }
                },
            )?;

            // final fit on the full training set, evaluated on the test set
            let best = &outcome.best.config;
            let v = best["views"].as_i64().expect("views dim") as usize;
            let gammas = if is_mf {
                vec![best["gamma_shared"].as_f64().expect("real dim"); v]
            } else {
                trial_gammas(best, v)
            };
            let partition = &partitions[&v];
            let grams = &full_grams[&v];
            let mv_test = split_by_partition(x_test, partition)?;
            let mv_train = split_by_partition(x, partition)?;
            let cross: Vec<Matrix> = mv_test
                .views
                .iter()
                .zip(&mv_train.views)
                .map(|(xt, xr)| {
                    rbf_gram(xt, xr, config.kernel_gamma.gamma(d, xr.cols()))
                })
                .collect::<Result<_>>()?;
            if is_mf {
                let rho = trial_rho(best, &gammas, v);
                let duals = mv_lssvm_solve(grams, y, &gammas, rho)?;
                let mut fused = vec![0.0; x_test.rows()];
                for (dual, kc) in duals.iter().zip(&cross) {
                    for (acc, si) in fused.iter_mut().zip(scores_from_gram(dual, y, kc)?) {
                        *acc += si;
                    }
                }
                let labels: Vec<f64> = fused.iter().map(|&s| sign_label(s)).collect();
                accuracy(&labels, y_test)
            } else {
                let decision = best["decision"].as_str().expect("decision dim").to_string();
                let (weights, test_scores) = match config.perf_weights_on {
                    WeightSource::Train => {
                        let mut train_scores = Vec::with_capacity(v);
                        let mut test_scores = Vec::with_capacity(v);
                        for vi in 0..v {
                            let dual = lssvm_solve(&grams[vi], y, gammas[vi])?;
                            train_scores.push(scores_from_gram(&dual, y, &grams[vi])?);
                            test_scores.push(scores_from_gram(&dual, y, &cross[vi])?);
                        }
                        let weights = late_fusion_weights(
                            &decision,
                            &scores_matrix(&train_scores),
                            y,
                        )
                        .map_err(Error::InvalidConfig)?;
                        (weights, test_scores)
                    }
                    WeightSource::Holdout => {
                        // fit on a stratified 75%, estimate weights on the rest
                        let quarters = stratified_folds(
                            &labels_i64(y),
                            4,
                            derive(run_seed, &[TAG_HOLDOUT, code]),
                        )?;
                        let hold_idx = quarters[0].clone();
                        let fit_idx = complement(y.len(), &hold_idx);
                        let y_fit = gather(y, &fit_idx);
                        let y_hold = gather(y, &hold_idx);
                        let mut hold_scores = Vec::with_capacity(v);
                        let mut test_scores = Vec::with_capacity(v);
                        for vi in 0..v {
                            let k_fit = sub_gram(&grams[vi], &fit_idx, &fit_idx);
                            let k_hold = sub_gram(&grams[vi], &hold_idx, &fit_idx);
                            let dual = lssvm_solve(&k_fit, &y_fit, gammas[vi])?;
                            hold_scores.push(scores_from_gram(&dual, &y_fit, &k_hold)?);
                            let k_test = sub_gram_rows(&cross[vi], &fit_idx);
                            test_scores.push(scores_from_gram(&dual, &y_fit, &k_test)?);
                        }
                        let weights = late_fusion_weights(
                            &decision,
                            &scores_matrix(&hold_scores),
                            &y_hold,
                        )
                        .map_err(Error::InvalidConfig)?;
                        (weights, test_scores)
                    }
                };
                let fused = fuse_scores(&scores_matrix(&test_scores), &weights)?;
                let labels: Vec<f64> = fused.iter().map(|&s| sign_label(s)).collect();
                accuracy(&labels, y_test)
            }
        }
    }
}

// test-point x support-subset slice of a full cross-Gram matrix
fn sub_gram_rows(k_cross: &Matrix, support_cols: &[usize]) -> Matrix {
    Matrix::from_fn(k_cross.rows(), support_cols.len(), |i, j| {
        k_cross.get(i, support_cols[j])
    })
}

// ---------------------------------------------------------------------------
// NN study
// ---------------------------------------------------------------------------

fn y01(y: &[f64]) -> Vec<f64> {
    y.iter().map(|&v| f64::from(v > 0.0)).collect()
}

fn y01_usize(y: &[f64]) -> Vec<usize> {
    y.iter().map(|&v| usize::from(v > 0.0)).collect()
}

fn nn_space() -> SearchSpace {
    SearchSpace::new()
        .ints("epochs", &[25, 50])
        .ints("batch", &[16, 32])
        .reals("dropout", &[0.0, 0.5, 0.75])
        .ints("layers", &[1, 2])
        .ints("width", &[16, 32, 64, 256, 512])
}

fn nn_config_from_trial(
    trial: &TrialConfig,
    architecture: Architecture,
    view_dims: Vec<usize>,
) -> MlpConfig {
    MlpConfig {
        architecture,
        view_dims,
        layers_per_stack: trial["layers"].as_i64().expect("layers dim") as usize,
        width: trial["width"].as_i64().expect("width dim") as usize,
        dropout_rate: trial["dropout"].as_f64().expect("dropout dim"),
        epochs: trial["epochs"].as_i64().expect("epochs dim") as usize,
        batch_size: trial["batch"].as_i64().expect("batch dim") as usize,
        learning_rate: 0.001,
    }
}

fn select_rows_all(views: &[Matrix], idx: &[usize]) -> Result<Vec<Matrix>> {
    views.iter().map(|x| x.select_rows(idx)).collect()
}

fn prob_accuracy(probs: &[f64], truth01: &[usize]) -> std::result::Result<f64, String> {
    let labels: Vec<usize> = probs.iter().map(|&p| threshold_probability(p)).collect();
    accuracy(&labels, truth01).map_err(|e| e.to_string())
}

fn nn_cell(
    config: &ExperimentConfig,
    spec: &ExampleSpec,
    ds: &Dataset,
    method: &Method,
    run_seed: u64,
) -> Result<f64> {
    let y = ds.y_train.as_ref().expect("classification labels");
    let x = &ds.x_train;
    let x_test = ds.x_test.as_ref().expect("classification test split");
    let y_test = ds.y_test.as_ref().expect("classification test labels");
    let d = spec.d;
    let code = method.code();
    let targets = y01(y);
    let truth_test = y01_usize(y_test);
    let folds = stratified_folds(
        &labels_i64(y),
        CV_FOLDS,
        derive(run_seed, &[TAG_TUNER, code, 0]),
    )?;
    let fold_splits: Vec<(Vec<usize>, Vec<usize>)> = folds
        .iter()
        .map(|val| (complement(y.len(), val), val.clone()))
        .collect();
    let tuner_seed = derive(run_seed, &[TAG_TUNER, code, 1]);

    match method.fusion {
        FusionMode::Ef => {
            let inputs = vec![x.clone()];
            let outcome = random_search(
                &nn_space(),
                config.tuning_budget,
                tuner_seed,
                None,
                |trial| {
                    let cfg = nn_config_from_trial(trial, Architecture::Early, vec![d]);
                    fold_splits
                        .par_iter()
                        .enumerate()
                        .map(|(fi, (train_idx, val_idx))| {
                            let xt = select_rows_all(&inputs, train_idx)
                                .map_err(|e| e.to_string())?;
                            let yt = gather(&targets, train_idx);
                            let seed = derive(run_seed, &[TAG_MODEL, code, fi as u64]);
                            let model =
                                nn_train(&cfg, &xt, &yt, seed).map_err(|e| e.to_string())?;
                            let xv = select_rows_all(&inputs, val_idx)
                                .map_err(|e| e.to_string())?;
                            let probs =
                                predict_probabilities(&model, &xv).map_err(|e| e.to_string())?;
                            let truth: Vec<usize> =
                                val_idx.iter().map(|&i| usize::from(y[i] > 0.0)).collect();
                            prob_accuracy(&probs, &truth)
                        })
                        .collect()
                },
            )?;
            let cfg = nn_config_from_trial(&outcome.best.config, Architecture::Early, vec![d]);
            let model = nn_train(
                &cfg,
                &inputs,
                &targets,
                derive(run_seed, &[TAG_MODEL, code, 999]),
            )?;
            let probs = predict_probabilities(&model, &[x_test.clone()])?;
            let labels: Vec<usize> = probs.iter().map(|&p| threshold_probability(p)).collect();
            accuracy(&labels, &truth_test)
        }
        FusionMode::Mf | FusionMode::Lf => {
            let pm = method.partition.expect("partitioned method");
            let vs = candidate_views(pm);
            let mut mv_by_v: BTreeMap<usize, MultiViewData> = BTreeMap::new();
            for &v in &vs {
                let pseed = derive(run_seed, &[TAG_PARTITION, pm.code(), v as u64]);
                let partition = build_partition(pm, spec, x, v, pseed)?;
                mv_by_v.insert(v, split_by_partition(x, &partition)?);
            }
            let mut space = nn_space().ints(
                "views",
                &vs.iter().map(|&v| v as i64).collect::<Vec<_>>(),
            );
            let is_mf = method.fusion == FusionMode::Mf;
            if !is_mf {
                space = space.texts("decision", &["average", "performance"]);
            }
            let outcome = random_search(
                &space,
                config.tuning_budget,
                tuner_seed,
                None,
                |trial| {
                    let v = trial["views"].as_i64().expect("views dim") as usize;
                    let mv = &mv_by_v[&v];
                    let dims: Vec<usize> = mv.views.iter().map(|m| m.cols()).collect();
                    fold_splits
                        .par_iter()
                        .enumerate()
                        .map(|(fi, (train_idx, val_idx))| {
                            let xt = select_rows_all(&mv.views, train_idx)
                                .map_err(|e| e.to_string())?;
                            let xv = select_rows_all(&mv.views, val_idx)
                                .map_err(|e| e.to_string())?;
                            let yt = gather(&targets, train_idx);
                            let truth: Vec<usize> =
                                val_idx.iter().map(|&i| usize::from(y[i] > 0.0)).collect();
                            if is_mf {
                                let cfg = nn_config_from_trial(
                                    trial,
                                    Architecture::Mid,
                                    dims.clone(),
                                );
                                let seed = derive(run_seed, &[TAG_MODEL, code, fi as u64]);
                                let model = nn_train(&cfg, &xt, &yt, seed)
                                    .map_err(|e| e.to_string())?;
                                let probs = predict_probabilities(&model, &xv)
                                    .map_err(|e| e.to_string())?;
                                prob_accuracy(&probs, &truth)
                            } else {
                                let decision = trial["decision"].as_str().expect("decision dim");
                                let mut val_probs = Vec::with_capacity(v);
                                let mut train_probs = Vec::with_capacity(v);
                                for vi in 0..v {
                                    let cfg = nn_config_from_trial(
                                        trial,
                                        Architecture::Early,
                                        vec![dims[vi]],
                                    );
                                    let seed = derive(
                                        run_seed,
                                        &[TAG_MODEL, code, fi as u64, vi as u64],
                                    );
                                    let model = nn_train(
                                        &cfg,
                                        std::slice::from_ref(&xt[vi]),
                                        &yt,
                                        seed,
                                    )
                                    .map_err(|e| e.to_string())?;
                                    val_probs.push(
                                        predict_probabilities(
                                            &model,
                                            std::slice::from_ref(&xv[vi]),
                                        )
                                        .map_err(|e| e.to_string())?,
                                    );
                                    train_probs.push(
                                        predict_probabilities(
                                            &model,
                                            std::slice::from_ref(&xt[vi]),
                                        )
                                        .map_err(|e| e.to_string())?,
                                    );
                                }
                                let weights = late_fusion_weights(
                                    decision,
                                    &scores_matrix(&train_probs),
                                    &yt,
                                )?;
                                let fused =
                                    fuse_scores(&scores_matrix(&val_probs), &weights)
                                        .map_err(|e| e.to_string())?;
                                prob_accuracy(&fused, &truth)
                            }
                        })
                        .collect()
                },
            )?;

            let best = &outcome.best.config;
            let v = best["views"].as_i64().expect("views dim") as usize;
            let mv = &mv_by_v[&v];
            let dims: Vec<usize> = mv.views.iter().map(|m| m.cols()).collect();
            let mv_test = split_by_partition(x_test, &mv.partition)?;
            if is_mf {
                let cfg = nn_config_from_trial(best, Architecture::Mid, dims);
                let model = nn_train(
                    &cfg,
                    &mv.views,
                    &targets,
                    derive(run_seed, &[TAG_MODEL, code, 999]),
                )?;
                let probs = predict_probabilities(&model, &mv_test.views)?;
                let labels: Vec<usize> =
                    probs.iter().map(|&p| threshold_probability(p)).collect();
                accuracy(&labels, &truth_test)
            } else {
                let decision = best["decision"].as_str().expect("decision dim").to_string();
                let (fit_idx, hold_idx) = match config.perf_weights_on {
                    WeightSource::Train => ((0..y.len()).collect::<Vec<_>>(), Vec::new()),
                    WeightSource::Holdout => {
                        let quarters = stratified_folds(
                            &labels_i64(y),
                            4,
                            derive(run_seed, &[TAG_HOLDOUT, code]),
                        )?;
                        let hold = quarters[0].clone();
                        (complement(y.len(), &hold), hold)
                    }
                };
                let xt = select_rows_all(&mv.views, &fit_idx)?;
                let yt = gather(&targets, &fit_idx);
                let mut weight_probs = Vec::with_capacity(v);
                let mut test_probs = Vec::with_capacity(v);
                for vi in 0..v {
                    let cfg = nn_config_from_trial(
                        best,
                        Architecture::Early,
                        vec![dims[vi]],
                    );
                    let seed = derive(run_seed, &[TAG_MODEL, code, 999, vi as u64]);
                    let model = nn_train(&cfg, std::slice::from_ref(&xt[vi]), &yt, seed)?;
                    let weight_input = if hold_idx.is_empty() {
                        xt[vi].clone()
                    } else {
                        mv.views[vi].select_rows(&hold_idx)?
                    };
                    weight_probs
                        .push(predict_probabilities(&model, std::slice::from_ref(&weight_input))?);
                    test_probs.push(predict_probabilities(
                        &model,
                        std::slice::from_ref(&mv_test.views[vi]),
                    )?);
                }
                let weight_targets = if hold_idx.is_empty() {
                    yt.clone()
                } else {
                    gather(&targets, &hold_idx)
                };
                let weights = late_fusion_weights(
                    &decision,
                    &scores_matrix(&weight_probs),
                    &weight_targets,
                )
                .map_err(Error::InvalidConfig)?;
                let fused = fuse_scores(&scores_matrix(&test_probs), &weights)?;
                let labels: Vec<usize> =
                    fused.iter().map(|&p| threshold_probability(p)).collect();
                accuracy(&labels, &truth_test)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// clustering study
// ---------------------------------------------------------------------------

fn run_clustering(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let grid = config.method_grid();
    let cells: Vec<(usize, usize)> = config
        .d_list
        .iter()
        .flat_map(|&d| (0..config.runs).map(move |run| (d, run)))
        .collect();
    let results: Vec<Vec<RunRecord>> = cells
        .par_iter()
        .map(|&(d, run)| {
            let run_seed = config.seed_base.wrapping_add(run as u64);
            let spec = ExampleSpec::with_defaults(config.example_id, d)?;
            let ds = sample_dataset(&spec, derive(run_seed, &[TAG_DATASET, d as u64]))?;
            let mut recs = Vec::new();
            for method in &grid {
                let start = Instant::now();
                let value = clustering_cell(config, &spec, &ds, method, run_seed);
                recs.push(cell_record(
                    config,
                    method.label(),
                    d,
                    run,
                    run_seed,
                    value,
                    start,
                ));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().flatten().collect())
}

fn clustering_cell(
    config: &ExperimentConfig,
    spec: &ExampleSpec,
    ds: &Dataset,
    method: &Method,
    run_seed: u64,
) -> Result<f64> {
    let truth = ds.truth_clusters.as_ref().expect("clustering ground truth");
    let x = &ds.x_train;
    let d = spec.d;
    let code = method.code();
    match method.fusion {
        FusionMode::Ef => {
            let gamma = config.clustering_gamma_ef.gamma(d, d);
            let res = spectral_cluster(x, 2, gamma, derive(run_seed, &[TAG_CLUSTER, code]))?;
            crate::metrics::ari(&res.assignment, truth)
        }
        FusionMode::Mf | FusionMode::Lf => {
            let pm = method.partition.expect("partitioned method");
            // Davies-Bouldin tunes the view count; ties keep the smaller V
            let mut best: Option<(f64, f64)> = None; // (db, ari)
            for &v in &candidate_views(pm) {
                let pseed = derive(run_seed, &[TAG_PARTITION, pm.code(), v as u64]);
                let partition = build_partition(pm, spec, x, v, pseed)?;
                let mv = split_by_partition(x, &partition)?;
                let gammas: Vec<f64> = mv
                    .views
                    .iter()
                    .map(|xv| config.clustering_gamma_views.gamma(d, xv.cols()))
                    .collect();
                let cseed = derive(run_seed, &[TAG_CLUSTER, code, v as u64]);
                let assignment = if method.fusion == FusionMode::Mf {
                    coreg_spectral(&mv, 2, &gammas, COREG_LAMBDA, cseed)?.assignment
                } else {
                    let mut per_view = Vec::with_capacity(v);
                    for (vi, xv) in mv.views.iter().enumerate() {
                        per_view.push(
                            spectral_cluster(
                                xv,
                                2,
                                gammas[vi],
                                derive(cseed, &[vi as u64]),
                            )?
                            .assignment,
                        );
                    }
                    let reference = per_view[0].clone();
                    let aligned: Vec<Vec<usize>> = per_view
                        .iter()
                        .map(|a| align_binary_assignments(&reference, a))
                        .collect::<Result<_>>()?;
                    majority_vote(&aligned)
                };
                let db = davies_bouldin(x, &assignment).unwrap_or(f64::INFINITY);
                if best.is_none_or(|(b, _)| db < b) {
                    best = Some((db, crate::metrics::ari(&assignment, truth)?));
                }
            }
            Ok(best.expect("at least one view candidate").1)
        }
    }
}
