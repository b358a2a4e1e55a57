//! View construction by feature set partitioning.
//!
//! Three unsupervised partitioners: random split, Euclidean feature
//! clustering (features as points in sample space) and correlation
//! clustering (features as rows of the Pearson correlation matrix).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{kmeans, Matrix};

/// Disjoint feature index groups covering `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct ViewPartition {
    groups: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize, Clone)]
struct PartitionRepr {
    groups: Vec<Vec<usize>>,
}

impl TryFrom<PartitionRepr> for ViewPartition {
    type Error = Error;
    fn try_from(r: PartitionRepr) -> Result<ViewPartition> {
        ViewPartition::new(r.groups)
    }
}

impl From<ViewPartition> for PartitionRepr {
    fn from(p: ViewPartition) -> PartitionRepr {
        PartitionRepr { groups: p.groups }
    }
}

impl ViewPartition {
    /// Validates disjointness, full coverage of `0..d` and non-emptiness.
    /// Indices are stored ascending within each group.
    pub fn new(mut groups: Vec<Vec<usize>>) -> Result<ViewPartition> {
        if groups.is_empty() {
            return Err(Error::InvalidPartition("no groups".into()));
        }
        let d: usize = groups.iter().map(|g| g.len()).sum();
        let mut seen = vec![false; d];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidPartition("empty group".into()));
            }
            for &idx in g {
                if idx >= d {
                    return Err(Error::IndexOutOfRange { index: idx, d });
                }
                if seen[idx] {
                    return Err(Error::InvalidPartition(format!(
                        "feature {idx} appears in two groups"
                    )));
                }
                seen[idx] = true;
            }
        }
        for g in groups.iter_mut() {
            g.sort_unstable();
        }
        Ok(ViewPartition { groups })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_views(&self) -> usize {
        self.groups.len()
    }

    /// Total feature count.
    pub fn d(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }

    /// Group id per feature index; the representation compared by ARI.
    pub fn assignment_vector(&self) -> Vec<usize> {
        let mut assign = vec![0usize; self.d()];
        for (v, g) in self.groups.iter().enumerate() {
            for &idx in g {
                assign[idx] = v;
            }
        }
        assign
    }
}

/// Per-view column projections of a sample matrix.
#[derive(Debug, Clone)]
pub struct MultiViewData {
    pub views: Vec<Matrix>,
    pub partition: ViewPartition,
}

impl MultiViewData {
    /// Reassembles the original matrix from the views (column order by
    /// ascending original index).
    pub fn reassemble(&self) -> Matrix {
        let n = self.views.first().map_or(0, |v| v.rows());
        let d = self.partition.d();
        let mut out = Matrix::zeros(n, d);
        for (v, group) in self.partition.groups().iter().enumerate() {
            for (local, &orig) in group.iter().enumerate() {
                for i in 0..n {
                    out.set(i, orig, self.views[v].get(i, local));
                }
            }
        }
        out
    }
}

/// Uniformly random partition into `v` groups of near-equal size
/// (sizes differ by at most one). Deterministic given `seed`.
pub fn random_partition(d: usize, v: usize, seed: u64) -> Result<ViewPartition> {
    if v == 0 {
        return Err(Error::InvalidPartition("zero views requested".into()));
    }
    if v > d {
        return Err(Error::TooManyViews { d, v });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..d).collect();
    indices.shuffle(&mut rng);
    let base = d / v;
    let rem = d % v;
    let mut groups = Vec::with_capacity(v);
    let mut at = 0usize;
    for g in 0..v {
        let size = base + usize::from(g < rem);
        groups.push(indices[at..at + size].to_vec());
        at += size;
    }
    ViewPartition::new(groups)
}

/// Clusters features as points in N-dimensional sample space (the columns
/// of `x`) with k-means.
pub fn kmeans_feature_partition(x: &Matrix, v: usize, seed: u64) -> Result<ViewPartition> {
    let points = x.transpose();
    let fit = kmeans(&points, v, seed)?;
    groups_from_assignment(&fit.assignment, v)
}

/// Clusters features by their correlation profile: k-means on the rows of
/// the d x d Pearson correlation matrix.
pub fn correlation_partition(x: &Matrix, v: usize, seed: u64) -> Result<ViewPartition> {
    let corr = correlation_matrix(x)?;
    let fit = kmeans(&corr, v, seed)?;
    groups_from_assignment(&fit.assignment, v)
}

fn groups_from_assignment(assignment: &[usize], v: usize) -> Result<ViewPartition> {
    let mut groups = vec![Vec::new(); v];
    for (idx, &c) in assignment.iter().enumerate() {
        groups[c].push(idx);
    }
    ViewPartition::new(groups)
}

/// Pearson correlation matrix of the columns of `x`.
pub fn correlation_matrix(x: &Matrix) -> Result<Matrix> {
    let n = x.rows();
    let d = x.cols();
    if n == 0 {
        return Err(Error::InvalidConfig("empty sample matrix".into()));
    }
    // center columns
    let mut centered = x.view().to_owned();
    let mut sumsq = vec![0.0f64; d];
    for j in 0..d {
        let mut col = centered.column_mut(j);
        let mean = col.sum() / n as f64;
        let mut raw_sq = 0.0;
        for v in col.iter_mut() {
            raw_sq += *v * *v;
            *v -= mean;
        }
        let var: f64 = col.iter().map(|v| v * v).sum();
        if var <= 1e-20 * (1.0 + raw_sq) {
            return Err(Error::DegenerateFeature { index: j });
        }
        sumsq[j] = var;
    }
    let cov = centered.t().dot(&centered);
    let mut corr = cov;
    for i in 0..d {
        for j in 0..d {
            corr[(i, j)] /= (sumsq[i] * sumsq[j]).sqrt();
        }
    }
    Ok(Matrix::from_fn(d, d, |i, j| corr[(i, j)]))
}

/// Splits `x` column-wise according to `partition`.
pub fn split_by_partition(x: &Matrix, partition: &ViewPartition) -> Result<MultiViewData> {
    if partition.d() != x.cols() {
        return Err(Error::IndexOutOfRange {
            index: partition.d().saturating_sub(1),
            d: x.cols(),
        });
    }
    let views = partition
        .groups()
        .iter()
        .map(|g| x.select_columns(g))
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiViewData {
        views,
        partition: partition.clone(),
    })
}
