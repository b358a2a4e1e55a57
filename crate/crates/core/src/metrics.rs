//! Evaluation metrics shared by all experiments.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Fraction of positions where the two label sequences match exactly.
pub fn accuracy<T: PartialEq>(predicted: &[T], truth: &[T]) -> Result<f64> {
    if predicted.len() != truth.len() || predicted.is_empty() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let hits = predicted
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / predicted.len() as f64)
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand Index between two labelings of the same items.
///
/// Chance-corrected pair-counting agreement; 1 for identical partitions,
/// around 0 for independent ones. When both partitions are trivial (the
/// chance correction degenerates), returns 1 if they are identical as set
/// partitions and 0 otherwise.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    let mut a_counts: HashMap<usize, usize> = HashMap::new();
    let mut b_counts: HashMap<usize, usize> = HashMap::new();
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *a_counts.entry(x).or_insert(0) += 1;
        *b_counts.entry(y).or_insert(0) += 1;
        *joint.entry((x, y)).or_insert(0) += 1;
    }
    let sum_joint: f64 = joint.values().map(|&c| comb2(c)).sum();
    let sum_a: f64 = a_counts.values().map(|&c| comb2(c)).sum();
    let sum_b: f64 = b_counts.values().map(|&c| comb2(c)).sum();
    // scaled by the total pair count so every term is an exact integer
    // (or half-integer) in f64; only the final division rounds
    let total = comb2(n);
    let numerator = total * sum_joint - sum_a * sum_b;
    let denominator = 0.5 * total * (sum_a + sum_b) - sum_a * sum_b;
    if denominator == 0.0 {
        // both partitions trivial (all-singletons or single-cluster)
        let identical = same_set_partition(a, b);
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    Ok(numerator / denominator)
}

fn same_set_partition(a: &[usize], b: &[usize]) -> bool {
    let mut a_to_b: HashMap<usize, usize> = HashMap::new();
    let mut b_to_a: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *a_to_b.entry(x).or_insert(y) != y {
            return false;
        }
        if *b_to_a.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}

/// Per-run metric values with their summary statistics.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator); 0 for a single value.
    pub std: f64,
    pub median: f64,
}

impl RunSummary {
    pub fn from_values(values: &[f64]) -> RunSummary {
        let n = values.len();
        assert!(n > 0, "summary of an empty sequence");
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n as f64 - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        RunSummary {
            values: values.to_vec(),
            mean,
            std,
            median,
        }
    }
}
