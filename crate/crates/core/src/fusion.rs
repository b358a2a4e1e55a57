//! Late-fusion decision rules and cluster-assignment combination.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_linear, Matrix};

/// Late-fusion combination weights over V views; they sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub beta: Vec<f64>,
}

impl FusionWeights {
    /// Uniform 1/V weights (average fusion).
    pub fn average(v: usize) -> FusionWeights {
        FusionWeights {
            beta: vec![1.0 / v as f64; v],
        }
    }
}

/// Training error covariance matrix:
/// `C_vu = (1/N) sum_k (pred_kv - y_k)(pred_ku - y_k)`.
pub fn error_covariance(raw_preds: &Matrix, y: &[f64]) -> Result<Matrix> {
    let n = raw_preds.rows();
    let v = raw_preds.cols();
    if n != y.len() || n == 0 {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    let mut errors = Matrix::zeros(n, v);
    for i in 0..n {
        for j in 0..v {
            errors.set(i, j, raw_preds.get(i, j) - y[i]);
        }
    }
    let mut c = Matrix::zeros(v, v);
    for a in 0..v {
        for b in a..v {
            let mut acc = 0.0;
            for i in 0..n {
                acc += errors.get(i, a) * errors.get(i, b);
            }
            acc /= n as f64;
            c.set(a, b, acc);
            c.set(b, a, acc);
        }
    }
    Ok(c)
}

/// Performance-based weights from the inverse error covariance:
/// `beta_v = (row sum of C^-1) / (grand sum of C^-1)`. The weights minimize
/// the ensemble training error and may be negative.
pub fn performance_weights(c: &Matrix) -> Result<FusionWeights> {
    let v = c.rows();
    let ones = Matrix::from_fn(v, 1, |_, _| 1.0);
    let z = solve_linear(c, &ones)?; // z = C^-1 1
    let total: f64 = (0..v).map(|i| z.get(i, 0)).sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::SingularMatrix {
            step: 0,
            pivot: total,
        });
    }
    Ok(FusionWeights {
        beta: (0..v).map(|i| z.get(i, 0) / total).collect(),
    })
}

/// Weighted per-sample score combination: `fused_k = sum_v beta_v * score_kv`.
/// Thresholding (sign for kernel scores, 0.5 for probabilities) is applied
/// by the caller.
pub fn fuse_scores(scores: &Matrix, weights: &FusionWeights) -> Result<Vec<f64>> {
    if scores.cols() != weights.beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} score columns for {} weights",
            scores.cols(),
            weights.beta.len()
        )));
    }
    Ok((0..scores.rows())
        .map(|i| {
            weights
                .beta
                .iter()
                .enumerate()
                .map(|(v, b)| b * scores.get(i, v))
                .sum()
        })
        .collect())
}

/// Probability threshold: class 1 when `p >= 0.5` (ties go to class 1).
pub fn threshold_probability(fused: f64) -> usize {
    usize::from(fused >= 0.5)
}

/// Flips `other` when its complement is closer (Manhattan distance) to
/// `reference`; ties keep `other` unflipped.
pub fn align_binary_assignments(reference: &[usize], other: &[usize]) -> Result<Vec<usize>> {
    if reference.len() != other.len() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: other.len(),
        });
    }
    let direct = reference
        .iter()
        .zip(other)
        .filter(|(r, o)| r != o)
        .count();
    let flipped = other.len() - direct;
    if flipped < direct {
        Ok(other.iter().map(|&c| 1 - c).collect())
    } else {
        Ok(other.to_vec())
    }
}

/// Per-sample mode over aligned 0/1 assignments, one slice per view.
/// Ties go to cluster 0.
pub fn majority_vote(assignments: &[Vec<usize>]) -> Vec<usize> {
    let Some(first) = assignments.first() else {
        return Vec::new();
    };
    let n = first.len();
    (0..n)
        .map(|i| {
            let ones = assignments.iter().filter(|a| a[i] == 1).count();
            let zeros = assignments.len() - ones;
            usize::from(ones > zeros)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn error_covariance_zero_for_perfect_predictions() {
        let preds = mat(3, 2, &[1.0, 1.0, -1.0, -1.0, 1.0, 1.0]);
        let y = [1.0, -1.0, 1.0];
        let c = error_covariance(&preds, &y).unwrap();
        assert_eq!(c.to_vec(), vec![0.0; 4]);
    }

    #[test]
    fn error_covariance_single_view_mean_square() {
        // errors (1,-1): C = [(1 + 1)/2] = [1]
        let preds = mat(2, 1, &[2.0, -2.0]);
        let y = [1.0, -1.0];
        let c = error_covariance(&preds, &y).unwrap();
        assert_eq!(c.get(0, 0), 1.0);
    }

    #[test]
    fn error_covariance_orthogonal_errors() {
        // view-1 errors (1,1), view-2 errors (1,-1): direct summation gives
        // C = [[1,0],[0,1]]
        let preds = mat(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let y = [0.0, 0.0];
        let c = error_covariance(&preds, &y).unwrap();
        assert_eq!(c.to_vec(), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn performance_weights_identity_covariance() {
        for v in [1usize, 2, 4] {
            let w = performance_weights(&Matrix::identity(v)).unwrap();
            for b in &w.beta {
                assert!((b - 1.0 / v as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn performance_weights_diagonal_oracle() {
        // C = diag(1,3): C^-1 = diag(1, 1/3); row sums 1 and 1/3;
        // grand sum 4/3 -> beta = (3/4, 1/4)
        let c = mat(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let w = performance_weights(&c).unwrap();
        assert!((w.beta[0] - 0.75).abs() < 1e-12);
        assert!((w.beta[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn performance_weights_rejects_singular_covariance() {
        // identical error vectors make C rank 1
        let preds = mat(2, 2, &[1.0, 1.0, -1.0, -1.0]);
        let y = [0.0, 0.0];
        let c = error_covariance(&preds, &y).unwrap();
        assert!(matches!(
            performance_weights(&c),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn performance_weights_sum_to_one_and_scale_invariant() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let v = rng.random_range(2..=5);
            let n = 40;
            let preds = Matrix::from_fn(n, v, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let y: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let c = error_covariance(&preds, &y).unwrap();
            let w = performance_weights(&c).unwrap();
            let sum: f64 = w.beta.iter().sum();
            assert!((sum - 1.0).abs() < 1e-10, "weights sum {sum}");
            // scaling C leaves the weights unchanged
            let c_scaled = Matrix::from_fn(v, v, |i, j| 7.5 * c.get(i, j));
            let w2 = performance_weights(&c_scaled).unwrap();
            for (a, b) in w.beta.iter().zip(&w2.beta) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fuse_scores_examples() {
        // average fusion of probabilities (0.9, 0.1) -> 0.5 -> class 1
        let s = mat(1, 2, &[0.9, 0.1]);
        let fused = fuse_scores(&s, &FusionWeights::average(2)).unwrap();
        assert!((fused[0] - 0.5).abs() < 1e-15);
        assert_eq!(threshold_probability(fused[0]), 1);

        // degenerate weight (1,0) passes view 1 through
        let w = FusionWeights {
            beta: vec![1.0, 0.0],
        };
        let fused = fuse_scores(&s, &w).unwrap();
        assert_eq!(fused[0], 0.9);

        // kernel scores (2,-1) with beta (1/3, 2/3) -> 0 -> +1
        let s = mat(1, 2, &[2.0, -1.0]);
        let w = FusionWeights {
            beta: vec![1.0 / 3.0, 2.0 / 3.0],
        };
        let fused = fuse_scores(&s, &w).unwrap();
        assert!(fused[0].abs() < 1e-15);
        assert_eq!(crate::kernels::sign_label(fused[0]), 1.0);
    }

    #[test]
    fn fuse_scores_uniform_weights_equal_mean() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let s = Matrix::from_fn(9, 4, |_, _| rng.random::<f64>());
        let fused = fuse_scores(&s, &FusionWeights::average(4)).unwrap();
        for i in 0..9 {
            let mean: f64 = (0..4).map(|v| s.get(i, v)).sum::<f64>() / 4.0;
            assert!((fused[i] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn align_flips_exact_complement() {
        let aligned = align_binary_assignments(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(aligned, vec![0, 0, 1, 1]);
    }

    #[test]
    fn align_keeps_identical_and_ties() {
        assert_eq!(
            align_binary_assignments(&[0, 1, 0], &[0, 1, 0]).unwrap(),
            vec![0, 1, 0]
        );
        // distance 1 both ways: keep unflipped
        assert_eq!(
            align_binary_assignments(&[0, 1], &[0, 0]).unwrap(),
            vec![0, 0]
        );
    }

    #[test]
    fn align_never_exceeds_half_hamming() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        for _ in 0..50 {
            let n = rng.random_range(1..30);
            let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let aligned = align_binary_assignments(&a, &b).unwrap();
            let dist = a.iter().zip(&aligned).filter(|(x, y)| x != y).count();
            assert!(dist <= n / 2, "distance {dist} of {n}");
        }
    }

    #[test]
    fn majority_vote_rules() {
        // votes (0,0,1) per views -> 0
        let views = vec![vec![0], vec![0], vec![1]];
        assert_eq!(majority_vote(&views), vec![0]);
        // unanimous
        let views = vec![vec![1, 0], vec![1, 0], vec![1, 0]];
        assert_eq!(majority_vote(&views), vec![1, 0]);
        // V=2 tie -> 0
        let views = vec![vec![0], vec![1]];
        assert_eq!(majority_vote(&views), vec![0]);
    }
}
