//! Spectral clustering, pairwise co-regularized multi-view spectral
//! clustering, and the Davies-Bouldin index.

use crate::error::{Error, Result};
use crate::numerics::{kmeans, top_k_eigenpairs, Matrix};
use crate::views::MultiViewData;

/// Outcome of a clustering run.
#[derive(Debug, Clone)]
pub struct ClusterResult {
    /// Cluster id per sample.
    pub assignment: Vec<usize>,
    /// Row-normalized spectral embedding the assignment was computed from.
    pub embedding: Matrix,
    /// Co-regularization objective after initialization and after each
    /// sweep; non-decreasing. Empty for single-view runs.
    pub objective_trace: Vec<f64>,
    /// Set when some cluster ended up empty (cannot happen with the
    /// k-means backend, which repairs empty clusters).
    pub degenerate: bool,
}

/// RBF affinity matrix with zero diagonal.
pub fn affinity(x: &Matrix, gamma: f64) -> Result<Matrix> {
    let mut a = crate::kernels::rbf_gram(x, x, gamma)?;
    for i in 0..a.rows() {
        a.set(i, i, 0.0);
    }
    Ok(a)
}

/// Symmetrically normalized affinity `D^{-1/2} A D^{-1/2}`; its spectrum
/// lies in [-1, 1].
pub fn normalized_laplacian(aff: &Matrix) -> Result<Matrix> {
    let n = aff.rows();
    let mut inv_sqrt_deg = vec![0.0f64; n];
    for i in 0..n {
        let deg: f64 = (0..n).map(|j| aff.get(i, j)).sum();
        if deg <= 1e-300 {
            return Err(Error::DegenerateGraph { index: i });
        }
        inv_sqrt_deg[i] = 1.0 / deg.sqrt();
    }
    Ok(Matrix::from_fn(n, n, |i, j| {
        aff.get(i, j) * inv_sqrt_deg[i] * inv_sqrt_deg[j]
    }))
}

fn row_normalize(u: &Matrix) -> Matrix {
    Matrix::from_fn(u.rows(), u.cols(), |i, j| {
        let norm: f64 = (0..u.cols())
            .map(|c| u.get(i, c) * u.get(i, c))
            .sum::<f64>()
            .sqrt();
        if norm > 1e-300 {
            u.get(i, j) / norm
        } else {
            u.get(i, j)
        }
    })
}

fn assignment_from_embedding(u: &Matrix, k: usize, seed: u64) -> Result<(Vec<usize>, Matrix, bool)> {
    let normalized = row_normalize(u);
    let fit = kmeans(&normalized, k, seed)?;
    let mut counts = vec![0usize; k];
    for &c in &fit.assignment {
        counts[c] += 1;
    }
    let degenerate = counts.iter().any(|&c| c == 0);
    Ok((fit.assignment, normalized, degenerate))
}

/// Normalized spectral clustering: top-k eigenvectors of the normalized
/// affinity, row-normalized, clustered with k-means.
pub fn spectral_cluster(x: &Matrix, k: usize, gamma: f64, seed: u64) -> Result<ClusterResult> {
    let lap = normalized_laplacian(&affinity(x, gamma)?)?;
    let u = top_k_eigenpairs(&lap, k)?.vectors;
    let (assignment, embedding, degenerate) = assignment_from_embedding(&u, k, seed)?;
    Ok(ClusterResult {
        assignment,
        embedding,
        objective_trace: Vec::new(),
        degenerate,
    })
}

const COREG_MAX_SWEEPS: usize = 50;
const COREG_MIN_GAIN: f64 = 1e-6;

/// Pairwise co-regularized multi-view spectral clustering.
///
/// Per-view embeddings are initialized from each view's own Laplacian and
/// then updated in sequential sweeps: `U_v` becomes the top-k eigenvectors
/// of `L_v + lambda * sum_{u != v} U_u U_u^T`, which exactly maximizes the
/// terms of the objective that involve view `v`. The recorded objective
/// `sum_v tr(U_v^T L_v U_v) + lambda * sum_{v<u} ||U_v^T U_u||_F^2` is
/// therefore non-decreasing. The final assignment clusters the
/// row-normalized column concatenation of all per-view embeddings.
pub fn coreg_spectral(
    views: &MultiViewData,
    k: usize,
    gammas: &[f64],
    lambda: f64,
    seed: u64,
) -> Result<ClusterResult> {
    let v = views.views.len();
    if v < 2 {
        return Err(Error::InvalidConfig(format!(
            "co-regularized clustering needs at least 2 views, got {v}"
        )));
    }
    if gammas.len() != v {
        return Err(Error::DimensionMismatch(format!(
            "{v} views but {} kernel parameters",
            gammas.len()
        )));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "coupling lambda must be non-negative, got {lambda}"
        )));
    }
    let laps = views
        .views
        .iter()
        .zip(gammas)
        .map(|(x, &g)| normalized_laplacian(&affinity(x, g)?))
        .collect::<Result<Vec<_>>>()?;
    let mut embeddings = laps
        .iter()
        .map(|l| Ok(top_k_eigenpairs(l, k)?.vectors))
        .collect::<Result<Vec<_>>>()?;

    let mut trace = vec![coreg_objective(&laps, &embeddings, lambda)];
    for sweep in 1..=COREG_MAX_SWEEPS {
        for vi in 0..v {
            let m = if lambda == 0.0 {
                laps[vi].clone()
            } else {
                let n = laps[vi].rows();
                let mut m = laps[vi].clone();
                for (ui, u) in embeddings.iter().enumerate() {
                    if ui == vi {
                        continue;
                    }
                    // m += lambda * U U^T
                    let uu = u.matmul(&u.transpose())?;
                    for i in 0..n {
                        for j in 0..n {
                            m.set(i, j, m.get(i, j) + lambda * uu.get(i, j));
                        }
                    }
                }
                m
            };
            embeddings[vi] = top_k_eigenpairs(&m, k)?.vectors;
        }
        let obj = coreg_objective(&laps, &embeddings, lambda);
        let gain = obj - trace[sweep - 1];
        trace.push(obj);
        if gain < COREG_MIN_GAIN {
            break;
        }
    }

    let n = views.views[0].rows();
    let mut concat = Matrix::zeros(n, v * k);
    for (ui, u) in embeddings.iter().enumerate() {
        for i in 0..n {
            for c in 0..k {
                concat.set(i, ui * k + c, u.get(i, c));
            }
        }
    }
    let (assignment, embedding, degenerate) = assignment_from_embedding(&concat, k, seed)?;
    Ok(ClusterResult {
        assignment,
        embedding,
        objective_trace: trace,
        degenerate,
    })
}

// sum_v tr(U_v^T L_v U_v) + lambda * sum_{v<u} ||U_v^T U_u||_F^2
fn coreg_objective(laps: &[Matrix], embeddings: &[Matrix], lambda: f64) -> f64 {
    let mut obj = 0.0;
    for (l, u) in laps.iter().zip(embeddings) {
        let lu = l.matmul(u).expect("shape checked");
        for i in 0..u.rows() {
            for c in 0..u.cols() {
                obj += u.get(i, c) * lu.get(i, c);
            }
        }
    }
    if lambda > 0.0 {
        for a in 0..embeddings.len() {
            for b in (a + 1)..embeddings.len() {
                let cross = embeddings[a]
                    .transpose()
                    .matmul(&embeddings[b])
                    .expect("shape checked");
                obj += lambda * cross.frobenius_norm().powi(2);
            }
        }
    }
    obj
}

/// Davies-Bouldin index: mean over clusters of the worst
/// `(s_i + s_j) / d_ij` ratio, where `s` is the mean distance to the
/// centroid and `d_ij` the centroid distance. Lower is better.
pub fn davies_bouldin(x: &Matrix, assignment: &[usize]) -> Result<f64> {
    let n = x.rows();
    if assignment.len() != n {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: n,
        });
    }
    let mut ids: Vec<usize> = assignment.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::SingleCluster);
    }
    let k = ids.len();
    let p = x.cols();
    let cluster_of: Vec<usize> = assignment
        .iter()
        .map(|a| ids.binary_search(a).expect("id present"))
        .collect();
    let mut centroids = vec![0.0f64; k * p];
    let mut counts = vec![0usize; k];
    for i in 0..n {
        let c = cluster_of[i];
        counts[c] += 1;
        for j in 0..p {
            centroids[c * p + j] += x.get(i, j);
        }
    }
    for c in 0..k {
        for j in 0..p {
            centroids[c * p + j] /= counts[c] as f64;
        }
    }
    let mut spread = vec![0.0f64; k];
    for i in 0..n {
        let c = cluster_of[i];
        let mut d2 = 0.0;
        for j in 0..p {
            let d = x.get(i, j) - centroids[c * p + j];
            d2 += d * d;
        }
        spread[c] += d2.sqrt();
    }
    for c in 0..k {
        spread[c] /= counts[c] as f64;
    }
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let mut d2 = 0.0;
            for c in 0..p {
                let d = centroids[i * p + c] - centroids[j * p + c];
                d2 += d * d;
            }
            let ratio = (spread[i] + spread[j]) / d2.sqrt();
            if ratio > worst {
                worst = ratio;
            }
        }
        total += worst;
    }
    Ok(total / k as f64)
}
