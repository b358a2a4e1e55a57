//! RBF kernel machinery, LS-SVM, and the coupled multi-view LS-SVM.
//!
//! Training an LS-SVM reduces to one linear KKT system. The multi-view
//! variant couples the per-view slack variables through a V x V coupling
//! matrix `Gamma` (diagonal `gamma_v`, off-diagonal `rho`) and solves the
//! resulting V(N+1)-dimensional block system directly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_linear, LuFactor, Matrix};
use crate::views::{MultiViewData, ViewPartition};

/// RBF Gram matrix: entry (i,j) = exp(-gamma * ||a_i - b_j||^2).
pub fn rbf_gram(a: &Matrix, b: &Matrix, gamma: f64) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "rbf_gram on {}-dim and {}-dim points",
            a.cols(),
            b.cols()
        )));
    }
    if gamma <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "kernel gamma must be positive, got {gamma}"
        )));
    }
    let (n, m, p) = (a.rows(), b.rows(), a.cols());
    let av = a.to_vec();
    let bv = b.to_vec();
    let mut out = vec![0.0f64; n * m];
    out.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let ai = &av[i * p..(i + 1) * p];
        for (j, slot) in row.iter_mut().enumerate() {
            let bj = &bv[j * p..(j + 1) * p];
            let mut d2 = 0.0;
            for (x, y) in ai.iter().zip(bj) {
                let d = x - y;
                d2 += d * d;
            }
            *slot = (-gamma * d2).exp();
        }
    });
    Matrix::from_vec(n, m, out)
}

/// Deterministic sign with `sign(0) := +1`.
pub fn sign_label(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Dual solution of one LS-SVM: `N` dual coefficients and a bias.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LssvmDual {
    pub alpha: Vec<f64>,
    pub b: f64,
}

/// Assembles the LS-SVM KKT system
/// `[[0, y^T], [y, Omega + I/gamma_reg]] [b; alpha] = [0; 1_N]`
/// with `Omega_kl = y_k y_l K_kl`.
pub fn lssvm_kkt_system(k: &Matrix, y: &[f64], gamma_reg: f64) -> Result<(Matrix, Vec<f64>)> {
    let n = y.len();
    if !k.is_square() || k.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "gram is {}x{} for {n} labels",
            k.rows(),
            k.cols()
        )));
    }
    if gamma_reg <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "regularization must be positive, got {gamma_reg}"
        )));
    }
    let mut m = Matrix::zeros(n + 1, n + 1);
    for i in 0..n {
        m.set(0, i + 1, y[i]);
        m.set(i + 1, 0, y[i]);
        for j in 0..n {
            let mut v = y[i] * y[j] * k.get(i, j);
            if i == j {
                v += 1.0 / gamma_reg;
            }
            m.set(i + 1, j + 1, v);
        }
    }
    let mut rhs = vec![1.0; n + 1];
    rhs[0] = 0.0;
    Ok((m, rhs))
}

/// Trains an LS-SVM from a precomputed Gram matrix.
pub fn lssvm_solve(k: &Matrix, y: &[f64], gamma_reg: f64) -> Result<LssvmDual> {
    let (m, rhs) = lssvm_kkt_system(k, y, gamma_reg)?;
    let lu = LuFactor::new(&m)?;
    let sol = lu.solve_vec(&rhs)?;
    Ok(LssvmDual {
        b: sol[0],
        alpha: sol[1..].to_vec(),
    })
}

/// Raw decision values from a cross-Gram matrix (`m` new points x `N`
/// support points): `score_i = sum_k alpha_k y_k K_cross[i,k] + b`.
pub fn scores_from_gram(dual: &LssvmDual, y: &[f64], k_cross: &Matrix) -> Result<Vec<f64>> {
    let n = y.len();
    if dual.alpha.len() != n || k_cross.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cross-gram {}x{} for {n} support points",
            k_cross.rows(),
            k_cross.cols()
        )));
    }
    let weights: Vec<f64> = dual.alpha.iter().zip(y).map(|(a, yy)| a * yy).collect();
    Ok((0..k_cross.rows())
        .map(|i| {
            let mut acc = dual.b;
            for (k, w) in weights.iter().enumerate() {
                acc += w * k_cross.get(i, k);
            }
            acc
        })
        .collect())
}

/// The V x V slack-coupling matrix: `gamma_v` on the diagonal, `rho` off it.
fn coupling_matrix(gammas: &[f64], rho: f64) -> Matrix {
    let v = gammas.len();
    Matrix::from_fn(v, v, |i, j| if i == j { gammas[i] } else { rho })
}

/// Assembles the coupled MV-LSSVM KKT system over unknowns
/// `[b_1; alpha_1; ...; b_V; alpha_V]`. For each view `v`:
/// `Omega_v alpha_v + sum_u (Gamma^-1)_{vu} alpha_u + b_v y = 1_N` and
/// `y^T alpha_v = 0`.
pub fn mv_lssvm_kkt_system(
    ks: &[Matrix],
    y: &[f64],
    gammas: &[f64],
    rho: f64,
) -> Result<(Matrix, Vec<f64>)> {
    let v = ks.len();
    let n = y.len();
    if v == 0 || gammas.len() != v {
        return Err(Error::DimensionMismatch(format!(
            "{v} gram matrices but {} regularization parameters",
            gammas.len()
        )));
    }
    for k in ks {
        if !k.is_square() || k.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "per-view gram is {}x{} for {n} labels",
                k.rows(),
                k.cols()
            )));
        }
    }
    let min_gamma = gammas.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_gamma <= 0.0 {
        return Err(Error::InvalidConfig(
            "view regularization parameters must be positive".into(),
        ));
    }
    // rho < min gamma keeps Gamma = diag(gamma) + rho*(J - I) positive
    // definite (diag(gamma) - rho*I is then PD and rho*J is PSD), so the
    // coupled primal stays convex and the system invertible
    if rho < 0.0 || (v > 1 && rho >= min_gamma) {
        return Err(Error::IllPosedCoupling { rho, min_gamma });
    }
    let gamma_inv = solve_linear(&coupling_matrix(gammas, rho), &Matrix::identity(v))?;

    let size = v * (n + 1);
    let mut m = Matrix::zeros(size, size);
    let mut rhs = vec![0.0f64; size];
    let base = |view: usize| view * (n + 1);
    for view in 0..v {
        let b0 = base(view);
        // bias constraint y^T alpha_v = 0
        for k in 0..n {
            m.set(b0, b0 + 1 + k, y[k]);
        }
        // stationarity rows
        for k in 0..n {
            let row = b0 + 1 + k;
            rhs[row] = 1.0;
            m.set(row, b0, y[k]);
            for l in 0..n {
                let omega = y[k] * y[l] * ks[view].get(k, l);
                m.set(row, b0 + 1 + l, omega);
            }
            for u in 0..v {
                let col = base(u) + 1 + k;
                m.set(row, col, m.get(row, col) + gamma_inv.get(view, u));
            }
        }
    }
    Ok((m, rhs))
}

/// Trains the coupled multi-view LS-SVM from precomputed per-view Gram
/// matrices. `rho = 0` decouples the system into independent per-view
/// LS-SVMs.
pub fn mv_lssvm_solve(
    ks: &[Matrix],
    y: &[f64],
    gammas: &[f64],
    rho: f64,
) -> Result<Vec<LssvmDual>> {
    let (m, rhs) = mv_lssvm_kkt_system(ks, y, gammas, rho)?;
    let lu = LuFactor::new(&m)?;
    let sol = lu.solve_vec(&rhs)?;
    let n = y.len();
    Ok((0..ks.len())
        .map(|view| {
            let b0 = view * (n + 1);
            LssvmDual {
                b: sol[b0],
                alpha: sol[b0 + 1..b0 + 1 + n].to_vec(),
            }
        })
        .collect())
}

/// Trained single-view LS-SVM with its support data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelModel {
    pub alpha: Vec<f64>,
    pub b: f64,
    pub gamma_reg: f64,
    pub support_x: Matrix,
    pub support_y: Vec<f64>,
    pub kernel_gamma: f64,
}

impl KernelModel {
    pub fn fit(x: &Matrix, y: &[f64], gamma_reg: f64, kernel_gamma: f64) -> Result<KernelModel> {
        if x.rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.rows(),
                right: y.len(),
            });
        }
        let k = rbf_gram(x, x, kernel_gamma)?;
        let dual = lssvm_solve(&k, y, gamma_reg)?;
        Ok(KernelModel {
            alpha: dual.alpha,
            b: dual.b,
            gamma_reg,
            support_x: x.clone(),
            support_y: y.to_vec(),
            kernel_gamma,
        })
    }

    /// Raw decision values for new points (before the sign function).
    pub fn raw_scores(&self, x_new: &Matrix) -> Result<Vec<f64>> {
        let k_cross = rbf_gram(x_new, &self.support_x, self.kernel_gamma)?;
        scores_from_gram(
            &LssvmDual {
                alpha: self.alpha.clone(),
                b: self.b,
            },
            &self.support_y,
            &k_cross,
        )
    }

    /// +1/-1 labels, `sign(0) := +1`.
    pub fn predict(&self, x_new: &Matrix) -> Result<Vec<f64>> {
        Ok(self.raw_scores(x_new)?.into_iter().map(sign_label).collect())
    }
}

/// Trained coupled multi-view LS-SVM.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MvKernelModel {
    pub duals: Vec<LssvmDual>,
    pub gammas: Vec<f64>,
    pub kernel_gammas: Vec<f64>,
    pub rho: f64,
    pub partition: ViewPartition,
    pub support_views: Vec<Matrix>,
    pub support_y: Vec<f64>,
}

impl MvKernelModel {
    pub fn fit(
        views: &MultiViewData,
        y: &[f64],
        gammas: &[f64],
        rho: f64,
        kernel_gammas: &[f64],
    ) -> Result<MvKernelModel> {
        let v = views.views.len();
        if kernel_gammas.len() != v {
            return Err(Error::DimensionMismatch(format!(
                "{v} views but {} kernel parameters",
                kernel_gammas.len()
            )));
        }
        let ks = views
            .views
            .iter()
            .zip(kernel_gammas)
            .map(|(x, &g)| rbf_gram(x, x, g))
            .collect::<Result<Vec<_>>>()?;
        let duals = mv_lssvm_solve(&ks, y, gammas, rho)?;
        Ok(MvKernelModel {
            duals,
            gammas: gammas.to_vec(),
            kernel_gammas: kernel_gammas.to_vec(),
            rho,
            partition: views.partition.clone(),
            support_views: views.views.clone(),
            support_y: y.to_vec(),
        })
    }

    /// Per-view raw decision values, one column per view.
    pub fn view_scores(&self, views_new: &MultiViewData) -> Result<Matrix> {
        if views_new.partition != self.partition {
            return Err(Error::PartitionMismatch);
        }
        let m = views_new.views.first().map_or(0, |x| x.rows());
        let mut out = Matrix::zeros(m, self.duals.len());
        for (v, dual) in self.duals.iter().enumerate() {
            let k_cross = rbf_gram(
                &views_new.views[v],
                &self.support_views[v],
                self.kernel_gammas[v],
            )?;
            let scores = scores_from_gram(dual, &self.support_y, &k_cross)?;
            for (i, s) in scores.into_iter().enumerate() {
                out.set(i, v, s);
            }
        }
        Ok(out)
    }

    /// Mid-fusion decision: sign of the unweighted per-view score sum.
    pub fn predict(&self, views_new: &MultiViewData) -> Result<Vec<f64>> {
        let scores = self.view_scores(views_new)?;
        Ok((0..scores.rows())
            .map(|i| {
                let total: f64 = (0..scores.cols()).map(|v| scores.get(i, v)).sum();
                sign_label(total)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::views::split_by_partition;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    fn kkt_residual(m: &Matrix, sol: &[f64], rhs: &[f64]) -> f64 {
        let n = m.rows();
        let mut resid = 0.0f64;
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += m.get(i, j) * sol[j];
            }
            resid += (acc - rhs[i]) * (acc - rhs[i]);
        }
        resid.sqrt()
    }

    #[test]
    fn rbf_identical_rows_give_one() {
        let a = mat(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let k = rbf_gram(&a, &a, 0.7).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(k.get(i, j), 1.0);
            }
        }
    }

    #[test]
    fn rbf_analytic_value() {
        let a = mat(1, 2, &[1.0, 0.0]);
        let b = mat(1, 2, &[0.0, 1.0]);
        let k = rbf_gram(&a, &b, 1.0).unwrap();
        assert!((k.get(0, 0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((k.get(0, 0) - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn rbf_rejects_dim_mismatch() {
        let a = mat(1, 2, &[0.0, 0.0]);
        let b = mat(1, 3, &[0.0, 0.0, 0.0]);
        assert!(matches!(
            rbf_gram(&a, &b, 1.0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rbf_gram_symmetric_unit_diagonal_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Matrix::from_fn(15, 4, |_, _| rng.random::<f64>() * 3.0);
        let k = rbf_gram(&x, &x, 0.25).unwrap();
        for i in 0..15 {
            assert_eq!(k.get(i, i), 1.0);
            for j in 0..15 {
                assert_eq!(k.get(i, j), k.get(j, i));
                assert!(k.get(i, j) > 0.0 && k.get(i, j) <= 1.0);
            }
        }
    }

    #[test]
    fn lssvm_two_point_hand_solved_system() {
        // K = I, y = (+1,-1), gamma_reg = 1 gives the 3x3 system
        //   [[0,1,-1],[1,2,0],[-1,0,2]] [b;a1;a2] = [0;1;1]
        // whose solution is b = 0, a1 = a2 = 1/2.
        let k = Matrix::identity(2);
        let y = [1.0, -1.0];
        let dual = lssvm_solve(&k, &y, 1.0).unwrap();
        assert!((dual.b).abs() < 1e-12);
        assert!((dual.alpha[0] - 0.5).abs() < 1e-12);
        assert!((dual.alpha[1] - 0.5).abs() < 1e-12);
        // bias constraint y^T alpha = 0
        let dot: f64 = dual.alpha.iter().zip(&y).map(|(a, yy)| a * yy).sum();
        assert!(dot.abs() < 1e-8);
    }

    #[test]
    fn lssvm_separable_toy_reaches_full_training_accuracy() {
        let x = mat(4, 2, &[0.0, 0.0, 0.3, 0.1, 3.0, 3.0, 3.2, 2.9]);
        let y = [1.0, 1.0, -1.0, -1.0];
        let model = KernelModel::fit(&x, &y, 100.0, 1.0).unwrap();
        // brute-force check of sign(score) on the training points
        let preds = model.predict(&x).unwrap();
        assert_eq!(preds, y.to_vec());
    }

    #[test]
    fn lssvm_bias_only_scores() {
        let model = KernelModel {
            alpha: vec![0.0, 0.0],
            b: 0.7,
            gamma_reg: 1.0,
            support_x: mat(2, 1, &[0.0, 1.0]),
            support_y: vec![1.0, -1.0],
            kernel_gamma: 1.0,
        };
        let scores = model.raw_scores(&mat(3, 1, &[5.0, -2.0, 0.3])).unwrap();
        assert!(scores.iter().all(|&s| (s - 0.7).abs() < 1e-15));
    }

    #[test]
    fn lssvm_symmetric_model_scores_midpoint_zero() {
        let x = mat(2, 1, &[-1.0, 1.0]);
        let y = [1.0, -1.0];
        let model = KernelModel::fit(&x, &y, 10.0, 1.0).unwrap();
        let score = model.raw_scores(&mat(1, 1, &[0.0])).unwrap()[0];
        assert!(score.abs() < 1e-12, "midpoint score {score}");
        // sign(0) convention
        assert_eq!(sign_label(0.0), 1.0);
        assert_eq!(sign_label(-0.1), -1.0);
    }

    #[test]
    fn lssvm_kkt_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = Matrix::from_fn(30, 3, |_, _| rng.random::<f64>());
        let y: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let k = rbf_gram(&x, &x, 1.0 / 3.0).unwrap();
        let dual = lssvm_solve(&k, &y, 3.7).unwrap();
        let (m, rhs) = lssvm_kkt_system(&k, &y, 3.7).unwrap();
        let mut sol = vec![dual.b];
        sol.extend(dual.alpha.iter());
        assert!(kkt_residual(&m, &sol, &rhs) <= 1e-8);
    }

    #[test]
    fn mv_lssvm_rho_zero_decouples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 20;
        let x1 = Matrix::from_fn(n, 2, |_, _| rng.random::<f64>());
        let x2 = Matrix::from_fn(n, 3, |_, _| rng.random::<f64>());
        let y: Vec<f64> = (0..n).map(|i| if i < 11 { 1.0 } else { -1.0 }).collect();
        let k1 = rbf_gram(&x1, &x1, 0.5).unwrap();
        let k2 = rbf_gram(&x2, &x2, 1.0 / 3.0).unwrap();
        let gammas = [2.0, 5.0];
        let coupled = mv_lssvm_solve(&[k1.clone(), k2.clone()], &y, &gammas, 0.0).unwrap();
        let solo1 = lssvm_solve(&k1, &y, 2.0).unwrap();
        let solo2 = lssvm_solve(&k2, &y, 5.0).unwrap();
        for (c, s) in [(&coupled[0], &solo1), (&coupled[1], &solo2)] {
            assert!((c.b - s.b).abs() < 1e-8);
            for (a, b) in c.alpha.iter().zip(&s.alpha) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn mv_lssvm_identical_views_symmetric_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 12;
        let x = Matrix::from_fn(n, 2, |_, _| rng.random::<f64>());
        let y: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let k = rbf_gram(&x, &x, 0.5).unwrap();
        let duals = mv_lssvm_solve(&[k.clone(), k], &y, &[3.0, 3.0], 0.4).unwrap();
        assert!((duals[0].b - duals[1].b).abs() < 1e-10);
        for (a, b) in duals[0].alpha.iter().zip(&duals[1].alpha) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn mv_lssvm_kkt_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 3;
        let x1 = Matrix::from_fn(n, 1, |_, _| rng.random::<f64>());
        let x2 = Matrix::from_fn(n, 2, |_, _| rng.random::<f64>());
        let y = [1.0, -1.0, 1.0];
        let k1 = rbf_gram(&x1, &x1, 1.0).unwrap();
        let k2 = rbf_gram(&x2, &x2, 0.5).unwrap();
        let gammas = [1.0, 2.0];
        let rho = 0.1;
        let duals = mv_lssvm_solve(&[k1.clone(), k2.clone()], &y, &gammas, rho).unwrap();
        let (m, rhs) = mv_lssvm_kkt_system(&[k1, k2], &y, &gammas, rho).unwrap();
        let mut sol = Vec::new();
        for d in &duals {
            sol.push(d.b);
            sol.extend(d.alpha.iter());
        }
        assert!(kkt_residual(&m, &sol, &rhs) < 1e-8);
        // per-view bias constraints
        for d in &duals {
            let dot: f64 = d.alpha.iter().zip(&y).map(|(a, yy)| a * yy).sum();
            assert!(dot.abs() < 1e-8);
        }
    }

    #[test]
    fn mv_lssvm_rejects_ill_posed_coupling() {
        let k = Matrix::identity(2);
        let y = [1.0, -1.0];
        // rho >= min(gamma) makes the slack-coupling matrix indefinite
        let err = mv_lssvm_solve(&[k.clone(), k.clone(), k.clone()], &y, &[1.0, 1.0, 1.0], 1.2);
        assert!(matches!(err, Err(Error::IllPosedCoupling { .. })));
        // strong but positive-definite coupling is accepted
        assert!(mv_lssvm_solve(&[k.clone(), k.clone(), k], &y, &[1.0, 1.0, 1.0], 0.95).is_ok());
    }

    #[test]
    fn mv_predict_reduces_to_single_view() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 14;
        let x = Matrix::from_fn(n, 4, |_, _| rng.random::<f64>());
        let y: Vec<f64> = (0..n).map(|i| if i < 7 { 1.0 } else { -1.0 }).collect();
        // duplicate feature block so both views carry identical columns
        let xx = Matrix::from_fn(n, 8, |i, j| x.get(i, j % 4));
        let p = ViewPartition::new(vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]).unwrap();
        let mv = split_by_partition(&xx, &p).unwrap();
        let model = MvKernelModel::fit(&mv, &y, &[2.0, 2.0], 0.0, &[0.25, 0.25]).unwrap();
        let single = KernelModel::fit(&x, &y, 2.0, 0.25).unwrap();
        // new points whose two views carry identical columns as well
        let x_new_single = Matrix::from_fn(5, 4, |_, _| rng.random::<f64>());
        let mv_new = split_by_partition(
            &Matrix::from_fn(5, 8, |i, j| x_new_single.get(i, j % 4)),
            &p,
        )
        .unwrap();
        assert_eq!(
            model.predict(&mv_new).unwrap(),
            single.predict(&x_new_single).unwrap()
        );
    }

    #[test]
    fn mv_predict_sum_rule_and_tie() {
        // scores (+2.0, -0.5) -> +1; scores (-1.0, +1.0) -> sum 0 -> +1
        assert_eq!(sign_label(2.0 + -0.5), 1.0);
        assert_eq!(sign_label(-1.0 + 1.0), 1.0);
    }

    #[test]
    fn mv_predict_rejects_partition_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Matrix::from_fn(6, 4, |_, _| rng.random::<f64>());
        let y = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        let p1 = ViewPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let p2 = ViewPartition::new(vec![vec![0, 2], vec![1, 3]]).unwrap();
        let model =
            MvKernelModel::fit(&split_by_partition(&x, &p1).unwrap(), &y, &[1.0, 1.0], 0.1, &[0.5, 0.5])
                .unwrap();
        let err = model.predict(&split_by_partition(&x, &p2).unwrap());
        assert!(matches!(err, Err(Error::PartitionMismatch)));
    }

    #[test]
    fn prediction_invariant_under_sample_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 16;
        let x = Matrix::from_fn(n, 3, |_, _| rng.random::<f64>());
        let y: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let model = KernelModel::fit(&x, &y, 5.0, 1.0 / 3.0).unwrap();
        // permute training samples and labels alike
        let perm: Vec<usize> = (0..n).rev().collect();
        let xp = x.select_rows(&perm).unwrap();
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let model_p = KernelModel::fit(&xp, &yp, 5.0, 1.0 / 3.0).unwrap();
        let x_new = Matrix::from_fn(7, 3, |_, _| rng.random::<f64>());
        let s1 = model.raw_scores(&x_new).unwrap();
        let s2 = model_p.raw_scores(&x_new).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
