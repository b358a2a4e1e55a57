//! Lloyd's k-means with k-means++ seeding and deterministic restarts.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

const RESTARTS: u64 = 10;
const MAX_ITERS: usize = 300;

/// Result of a k-means fit.
#[derive(Debug, Clone)]
pub struct KmeansFit {
    /// Cluster id per input row.
    pub assignment: Vec<usize>,
    /// k x p centroid matrix.
    pub centroids: Matrix,
    /// Within-cluster sum of squares.
    pub wcss: f64,
}

/// Clusters the rows of `points` into `k` groups.
///
/// Runs Lloyd iterations from k-means++ starts for 10 sub-seeds
/// (`seed..seed+9`) and keeps the lowest within-cluster sum of squares.
/// Deterministic given `seed`; every returned cluster is non-empty.
pub fn kmeans(points: &Matrix, k: usize, seed: u64) -> Result<KmeansFit> {
    let n = points.rows();
    if k == 0 || n < k {
        return Err(Error::TooFewPoints { n, k });
    }
    let x = points.to_vec();
    let p = points.cols();
    let mut best: Option<KmeansFit> = None;
    for offset in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(offset));
        let run = lloyd(&x, n, p, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.fit.wcss < b.wcss) {
            best = Some(run.fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub(crate) struct LloydRun {
    pub(crate) fit: KmeansFit,
    /// WCSS after each Lloyd iteration; non-increasing.
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) trace: Vec<f64>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

pub(crate) fn lloyd(x: &[f64], n: usize, p: usize, k: usize, rng: &mut ChaCha8Rng) -> LloydRun {
    let mut centroids = init_plus_plus(x, n, p, k, rng);
    let mut assign = vec![usize::MAX; n];
    let mut trace = Vec::new();
    for _ in 0..MAX_ITERS {
        let mut next = vec![0usize; n];
        for i in 0..n {
            let row = &x[i * p..(i + 1) * p];
            let mut best_c = 0usize;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = dist2(row, &centroids[c * p..(c + 1) * p]);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            next[i] = best_c;
        }
        fix_empty_clusters(x, n, p, k, &centroids, &mut next);
        let converged = next == assign;
        assign = next;
        update_centroids(x, n, p, k, &assign, &mut centroids);
        trace.push(wcss(x, n, p, &assign, &centroids));
        if converged {
            break;
        }
    }
    let fit = KmeansFit {
        wcss: *trace.last().expect("at least one iteration"),
        assignment: assign,
        centroids: Matrix::from_vec(k, p, centroids).expect("finite centroids"),
    };
    LloydRun { fit, trace }
}

fn init_plus_plus(x: &[f64], n: usize, p: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centroids = Vec::with_capacity(k * p);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(&x[first * p..(first + 1) * p]);
    let mut d2 = vec![f64::INFINITY; n];
    for c in 1..k {
        let newest = &centroids[(c - 1) * p..c * p];
        for i in 0..n {
            let d = dist2(&x[i * p..(i + 1) * p], newest);
            if d < d2[i] {
                d2[i] = d;
            }
        }
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 && total.is_finite() {
            let r = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > r {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // all remaining points coincide with chosen centroids
            rng.random_range(0..n)
        };
        centroids.extend_from_slice(&x[pick * p..(pick + 1) * p]);
    }
    centroids
}

// Reassigns the point farthest from its centroid into each empty cluster,
// never draining a cluster below one member.
fn fix_empty_clusters(
    x: &[f64],
    n: usize,
    p: usize,
    k: usize,
    centroids: &[f64],
    assign: &mut [usize],
) {
    loop {
        let mut counts = vec![0usize; k];
        for &a in assign.iter() {
            counts[a] += 1;
        }
        let Some(empty) = (0..k).find(|&c| counts[c] == 0) else {
            return;
        };
        let mut donor: Option<(usize, f64)> = None;
        for i in 0..n {
            let c = assign[i];
            if counts[c] < 2 {
                continue;
            }
            let d = dist2(&x[i * p..(i + 1) * p], &centroids[c * p..(c + 1) * p]);
            if donor.is_none_or(|(_, best)| d > best) {
                donor = Some((i, d));
            }
        }
        let (idx, _) = donor.expect("k <= n guarantees a donor cluster");
        assign[idx] = empty;
    }
}

fn update_centroids(
    x: &[f64],
    n: usize,
    p: usize,
    k: usize,
    assign: &[usize],
    centroids: &mut [f64],
) {
    centroids.fill(0.0);
    let mut counts = vec![0usize; k];
    for i in 0..n {
        let c = assign[i];
        counts[c] += 1;
        for j in 0..p {
            centroids[c * p + j] += x[i * p + j];
        }
    }
    for c in 0..k {
        let m = counts[c] as f64;
        debug_assert!(m > 0.0);
        for j in 0..p {
            centroids[c * p + j] /= m;
        }
    }
}

fn wcss(x: &[f64], n: usize, p: usize, assign: &[usize], centroids: &[f64]) -> f64 {
    (0..n)
        .map(|i| {
            let c = assign[i];
            dist2(&x[i * p..(i + 1) * p], &centroids[c * p..(c + 1) * p])
        })
        .sum()
}
