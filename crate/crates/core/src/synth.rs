//! Synthetic dataset generators for the four benchmark examples.
//!
//! Examples 1 and 2 are binary classification problems (with a held-out test
//! set); Examples 3 and 4 are their clustering counterparts with wider class
//! separation and no labels exposed to models.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cholesky, Matrix};
use crate::views::ViewPartition;

/// Number of feature blocks (= inherent views) in Examples 2 and 4.
pub const INHERENT_VIEWS: usize = 5;

/// Parameterization of one synthetic example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleSpec {
    /// Example family, 1 through 4.
    pub example_id: u8,
    /// Feature dimension.
    pub d: usize,
    /// Training samples in class 1.
    pub n1: usize,
    /// Training samples in class 2.
    pub n2: usize,
    /// Test samples per class; 0 for the clustering examples.
    pub n_test_per_class: usize,
}

impl ExampleSpec {
    pub fn new(
        example_id: u8,
        d: usize,
        n1: usize,
        n2: usize,
        n_test_per_class: usize,
    ) -> Result<ExampleSpec> {
        let spec = ExampleSpec {
            example_id,
            d,
            n1,
            n2,
            n_test_per_class,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The paper's protocol sizes: N1=120, N2=90, and for the classification
    /// examples a 3000-sample test set (1500 per class).
    pub fn with_defaults(example_id: u8, d: usize) -> Result<ExampleSpec> {
        let n_test = if example_id <= 2 { 1500 } else { 0 };
        ExampleSpec::new(example_id, d, 120, 90, n_test)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.example_id) {
            return Err(Error::InvalidConfig(format!(
                "unknown example id {}",
                self.example_id
            )));
        }
        if self.d == 0 || self.n1 == 0 || self.n2 == 0 {
            return Err(Error::InvalidConfig(
                "d, n1 and n2 must be at least 1".into(),
            ));
        }
        if matches!(self.example_id, 2 | 4) && self.d % INHERENT_VIEWS != 0 {
            return Err(Error::InvalidDimension(format!(
                "example {} needs d divisible by {INHERENT_VIEWS}, got {}",
                self.example_id, self.d
            )));
        }
        if self.is_clustering() && self.n_test_per_class != 0 {
            return Err(Error::InvalidConfig(format!(
                "example {} is a clustering example and takes no test set",
                self.example_id
            )));
        }
        Ok(())
    }

    pub fn is_clustering(&self) -> bool {
        matches!(self.example_id, 3 | 4)
    }

    pub fn n_train(&self) -> usize {
        self.n1 + self.n2
    }
}

/// One sampled dataset: training matrix with labels or ground-truth cluster
/// ids, plus an optional test split.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x_train: Matrix,
    /// +1 / -1 labels; present only for the classification examples.
    pub y_train: Option<Vec<f64>>,
    pub x_test: Option<Matrix>,
    pub y_test: Option<Vec<f64>>,
    /// Ground-truth cluster ids for the clustering examples. Kept for ARI
    /// evaluation only; never handed to models.
    pub truth_clusters: Option<Vec<usize>>,
    pub spec: ExampleSpec,
    pub seed: u64,
}

/// Block-diagonal equicorrelation matrix: `num_blocks` blocks of size
/// `d/num_blocks`, each with unit diagonal and `tau` off-diagonal.
pub fn block_covariance(d: usize, tau: f64, num_blocks: usize) -> Result<Matrix> {
    if num_blocks == 0 || d % num_blocks != 0 {
        return Err(Error::InvalidDimension(format!(
            "d={d} not divisible into {num_blocks} blocks"
        )));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidConfig(format!(
            "tau must lie in [0,1), got {tau}"
        )));
    }
    let block = d / num_blocks;
    Ok(Matrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else if i / block == j / block {
            tau
        } else {
            0.0
        }
    }))
}

// One equicorrelation block of the Example 2/4 covariance. The full matrix
// is block diagonal with identical blocks, so sampling only needs the
// Cholesky factor of a single block.
fn equicorrelation_block(size: usize, tau: f64) -> Result<Matrix> {
    block_covariance(size, tau, 1)
}

fn draw_standard_normal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

// x = mu + z for identity covariance.
fn sample_shifted_rows(
    rng: &mut ChaCha8Rng,
    count: usize,
    d: usize,
    shift: f64,
    out: &mut Vec<f64>,
) {
    for _ in 0..count {
        let z = draw_standard_normal(rng, d);
        out.extend(z.into_iter().map(|v| v + shift));
    }
}

// x = mu + L z applied block by block; L is the Cholesky factor of one
// equicorrelation block.
fn sample_block_rows(
    rng: &mut ChaCha8Rng,
    count: usize,
    d: usize,
    chol_block: &Matrix,
    shift: f64,
    out: &mut Vec<f64>,
) {
    let s = chol_block.rows();
    for _ in 0..count {
        let z = draw_standard_normal(rng, d);
        for b in 0..d / s {
            let zb = &z[b * s..(b + 1) * s];
            for i in 0..s {
                let mut acc = shift;
                for j in 0..=i {
                    acc += chol_block.get(i, j) * zb[j];
                }
                out.push(acc);
            }
        }
    }
}

/// Samples one dataset for `spec`. Deterministic given `seed`.
pub fn sample_dataset(spec: &ExampleSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.d;
    let (n1, n2, nt) = (spec.n1, spec.n2, spec.n_test_per_class);

    let mut train = Vec::with_capacity((n1 + n2) * d);
    let mut test = Vec::with_capacity(2 * nt * d);
    match spec.example_id {
        1 | 3 => {
            // classes from N(+a*1, I) and N(-a*1, I); Example 3 doubles the
            // Mahalanobis separation 2a*sqrt(d) from 2.7 to 5.4
            let target = if spec.example_id == 1 { 2.7 } else { 5.4 };
            let a = target / (2.0 * (d as f64).sqrt());
            sample_shifted_rows(&mut rng, n1, d, a, &mut train);
            sample_shifted_rows(&mut rng, n2, d, -a, &mut train);
            sample_shifted_rows(&mut rng, nt, d, a, &mut test);
            sample_shifted_rows(&mut rng, nt, d, -a, &mut test);
        }
        2 | 4 => {
            let block = d / INHERENT_VIEWS;
            let l1 = cholesky(&equicorrelation_block(block, 0.3)?)?;
            let l2 = cholesky(&equicorrelation_block(block, 0.7)?)?;
            // Example 2 has both means at zero; Example 4 shifts the
            // clusters to -0.5*1 and +0.5*1
            let (m1, m2) = if spec.example_id == 2 {
                (0.0, 0.0)
            } else {
                (-0.5, 0.5)
            };
            sample_block_rows(&mut rng, n1, d, &l1, m1, &mut train);
            sample_block_rows(&mut rng, n2, d, &l2, m2, &mut train);
            sample_block_rows(&mut rng, nt, d, &l1, m1, &mut test);
            sample_block_rows(&mut rng, nt, d, &l2, m2, &mut test);
        }
        _ => unreachable!("validated above"),
    }

    let x_train = Matrix::from_vec(n1 + n2, d, train)?;
    let class_labels = |a: usize, b: usize| -> Vec<f64> {
        let mut y = vec![1.0; a];
        y.extend(std::iter::repeat_n(-1.0, b));
        y
    };
    let (y_train, truth) = if spec.is_clustering() {
        let mut t = vec![0usize; n1];
        t.extend(std::iter::repeat_n(1usize, n2));
        (None, Some(t))
    } else {
        (Some(class_labels(n1, n2)), None)
    };
    let (x_test, y_test) = if nt > 0 {
        (
            Some(Matrix::from_vec(2 * nt, d, test)?),
            Some(class_labels(nt, nt)),
        )
    } else {
        (None, None)
    };
    Ok(Dataset {
        x_train,
        y_train,
        x_test,
        y_test,
        truth_clusters: truth,
        spec: *spec,
        seed,
    })
}

/// The inherent five-view partition of Examples 2 and 4: contiguous index
/// blocks of size d/5.
pub fn inherent_partition(spec: &ExampleSpec) -> Result<ViewPartition> {
    if !matches!(spec.example_id, 2 | 4) {
        return Err(Error::NoInherentViews {
            example_id: spec.example_id,
        });
    }
    let block = spec.d / INHERENT_VIEWS;
    let groups = (0..INHERENT_VIEWS)
        .map(|v| (v * block..(v + 1) * block).collect())
        .collect();
    ViewPartition::new(groups)
}

/// Which split of a dataset to serialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Dataset {
    /// CSV serialization: a `#` provenance comment, a header row, then one
    /// row per sample with the label (or ground-truth cluster id) last.
    pub fn to_csv(&self, split: Split) -> Result<String> {
        let (x, labels): (&Matrix, Vec<f64>) = match split {
            Split::Train => {
                let labels = match (&self.y_train, &self.truth_clusters) {
                    (Some(y), _) => y.clone(),
                    (None, Some(t)) => t.iter().map(|&c| c as f64).collect(),
                    (None, None) => vec![],
                };
                (&self.x_train, labels)
            }
            Split::Test => {
                let x = self.x_test.as_ref().ok_or_else(|| {
                    Error::InvalidConfig("dataset has no test split".into())
                })?;
                (x, self.y_test.clone().unwrap_or_default())
            }
        };
        let mut out = String::new();
        out.push_str(&format!(
            "# midfuse dataset example={} d={} n1={} n2={} n_test_per_class={} seed={} split={}\n",
            self.spec.example_id,
            self.spec.d,
            self.spec.n1,
            self.spec.n2,
            self.spec.n_test_per_class,
            self.seed,
            match split {
                Split::Train => "train",
                Split::Test => "test",
            }
        ));
        for j in 0..x.cols() {
            out.push_str(&format!("f{j},"));
        }
        out.push_str("label\n");
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                out.push_str(&format!("{},", x.get(i, j)));
            }
            let label = labels.get(i).copied().unwrap_or(f64::NAN);
            if label.fract() == 0.0 && label.is_finite() {
                out.push_str(&format!("{}\n", label as i64));
            } else {
                out.push_str(&format!("{label}\n"));
            }
        }
        Ok(out)
    }
}

/// Parses a feature matrix (and label column) from dataset CSV text.
/// Comment lines starting with `#` and the header row are skipped.
pub fn parse_dataset_csv(text: &str) -> Result<(Matrix, Vec<f64>)> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = line.split(',').next().unwrap_or("");
        if first.parse::<f64>().is_err() {
            continue; // header row
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("bad csv value {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::InvalidConfig("csv contains no data rows".into()));
    }
    let cols = rows[0].len();
    if cols < 2 {
        return Err(Error::InvalidConfig(
            "csv needs at least one feature column and a label column".into(),
        ));
    }
    let mut x = Vec::with_capacity(rows.len() * (cols - 1));
    let mut y = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::InvalidConfig(format!(
                "csv row {i} has {} fields, expected {cols}",
                row.len()
            )));
        }
        x.extend_from_slice(&row[..cols - 1]);
        y.push(row[cols - 1]);
    }
    Ok((Matrix::from_vec(rows.len(), cols - 1, x)?, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_covariance_matches_paper_block_layout() {
        let m = block_covariance(4, 0.3, 2).unwrap();
        let expect = [
            [1.0, 0.3, 0.0, 0.0],
            [0.3, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.3],
            [0.0, 0.0, 0.3, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.get(i, j), expect[i][j]);
            }
        }
    }

    #[test]
    fn block_covariance_zero_tau_is_identity() {
        assert_eq!(block_covariance(2, 0.0, 1).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn block_covariance_rejects_indivisible() {
        assert!(matches!(
            block_covariance(5, 0.7, 2),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn example1_scaling_and_separation() {
        let spec = ExampleSpec::new(1, 100, 120, 90, 1500).unwrap();
        // 2a*sqrt(d) = 2.7 forces a = 1.35/sqrt(d) = 0.135 at d=100
        let ds = sample_dataset(&spec, 42).unwrap();
        let d = spec.d;
        let mut mean1 = vec![0.0; d];
        let mut mean2 = vec![0.0; d];
        for i in 0..spec.n1 {
            for j in 0..d {
                mean1[j] += ds.x_train.get(i, j) / spec.n1 as f64;
            }
        }
        for i in spec.n1..spec.n_train() {
            for j in 0..d {
                mean2[j] += ds.x_train.get(i, j) / spec.n2 as f64;
            }
        }
        let sep: f64 = mean1
            .iter()
            .zip(&mean2)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        // expected 2.7; the empirical value carries an upward bias of about
        // sqrt(2.7^2 + d*(1/n1+1/n2)) - 2.7 ~= 0.34 plus sampling noise
        assert!((2.2..=3.6).contains(&sep), "separation {sep}");
        assert_eq!(ds.y_train.as_ref().unwrap().len(), 210);
        assert_eq!(ds.x_test.as_ref().unwrap().rows(), 3000);
    }

    #[test]
    fn example3_doubles_separation_and_hides_labels() {
        let spec = ExampleSpec::new(3, 100, 120, 90, 0).unwrap();
        let ds = sample_dataset(&spec, 7).unwrap();
        assert!(ds.y_train.is_none());
        assert!(ds.x_test.is_none());
        let truth = ds.truth_clusters.as_ref().unwrap();
        assert_eq!(truth.iter().filter(|&&c| c == 0).count(), 120);
        // separation target 5.4 = 2 * 2.7
        let d = spec.d;
        let mut diff = vec![0.0; d];
        for i in 0..spec.n1 {
            for j in 0..d {
                diff[j] += ds.x_train.get(i, j) / spec.n1 as f64;
            }
        }
        for i in spec.n1..spec.n_train() {
            for j in 0..d {
                diff[j] -= ds.x_train.get(i, j) / spec.n2 as f64;
            }
        }
        let sep: f64 = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((4.9..=6.1).contains(&sep), "separation {sep}");
    }

    #[test]
    fn example2_per_class_correlation_structure() {
        // large per-class sample counts tighten the sample correlation
        let spec = ExampleSpec::new(2, 80, 2000, 2000, 0).unwrap();
        let ds = sample_dataset(&spec, 3).unwrap();
        let corr = |rows: std::ops::Range<usize>, f1: usize, f2: usize| -> f64 {
            let n = rows.len() as f64;
            let (mut m1, mut m2) = (0.0, 0.0);
            for i in rows.clone() {
                m1 += ds.x_train.get(i, f1) / n;
                m2 += ds.x_train.get(i, f2) / n;
            }
            let (mut c12, mut c11, mut c22) = (0.0, 0.0, 0.0);
            for i in rows {
                let a = ds.x_train.get(i, f1) - m1;
                let b = ds.x_train.get(i, f2) - m2;
                c12 += a * b;
                c11 += a * a;
                c22 += b * b;
            }
            c12 / (c11 * c22).sqrt()
        };
        // block size d/5 = 16: features 0,1 share a block; 0,16 do not
        let r1 = corr(0..2000, 0, 1);
        let r2 = corr(2000..4000, 0, 1);
        let r_cross = corr(0..2000, 0, 16);
        assert!((r1 - 0.3).abs() < 0.1, "class-1 in-block corr {r1}");
        assert!((r2 - 0.7).abs() < 0.1, "class-2 in-block corr {r2}");
        assert!(r_cross.abs() < 0.1, "cross-block corr {r_cross}");
    }

    #[test]
    fn block_sampling_reproduces_target_covariance() {
        let d = 20;
        let tau = 0.5;
        let target = block_covariance(d, tau, 5).unwrap();
        let block = equicorrelation_block(4, tau).unwrap();
        let l = cholesky(&block).unwrap();
        let n = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut rows = Vec::with_capacity(n * d);
        sample_block_rows(&mut rng, n, d, &l, 0.0, &mut rows);
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for j in 0..d {
                mean[j] += rows[i * d + j];
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        for p in 0..d {
            for q in p..d {
                let mut cov = 0.0;
                for i in 0..n {
                    cov += (rows[i * d + p] - mean[p]) * (rows[i * d + q] - mean[q]);
                }
                cov /= n as f64 - 1.0;
                assert!(
                    (cov - target.get(p, q)).abs() <= 0.02,
                    "cov[{p},{q}] = {cov}, target {}",
                    target.get(p, q)
                );
            }
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let spec = ExampleSpec::with_defaults(2, 80).unwrap();
        let a = sample_dataset(&spec, 5).unwrap();
        let b = sample_dataset(&spec, 5).unwrap();
        assert_eq!(a.x_train, b.x_train);
        assert_eq!(a.x_test, b.x_test);
        let c = sample_dataset(&spec, 6).unwrap();
        assert_ne!(a.x_train, c.x_train);
    }

    #[test]
    fn inherent_partition_layout() {
        let spec = ExampleSpec::new(2, 10, 4, 4, 0).unwrap();
        let p = inherent_partition(&spec).unwrap();
        assert_eq!(p.groups().len(), 5);
        assert_eq!(p.groups()[0], vec![0, 1]);
        assert_eq!(p.groups()[4], vec![8, 9]);

        let spec80 = ExampleSpec::with_defaults(2, 80).unwrap();
        let p80 = inherent_partition(&spec80).unwrap();
        assert!(p80.groups().iter().all(|g| g.len() == 16));

        let spec1 = ExampleSpec::with_defaults(1, 10).unwrap();
        assert!(matches!(
            inherent_partition(&spec1),
            Err(Error::NoInherentViews { example_id: 1 })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let spec = ExampleSpec::new(1, 3, 2, 2, 0).unwrap();
        let ds = sample_dataset(&spec, 1).unwrap();
        let csv = ds.to_csv(Split::Train).unwrap();
        assert!(csv.starts_with("# midfuse dataset example=1"));
        assert!(csv.lines().nth(1).unwrap().starts_with("f0,f1,f2,label"));
        let (x, y) = parse_dataset_csv(&csv).unwrap();
        assert_eq!(x.rows(), 4);
        assert_eq!(x.cols(), 3);
        assert_eq!(y, vec![1.0, 1.0, -1.0, -1.0]);
        for i in 0..4 {
            for j in 0..3 {
                assert!((x.get(i, j) - ds.x_train.get(i, j)).abs() < 1e-15);
            }
        }
    }
}
