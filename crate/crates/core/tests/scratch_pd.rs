use midfuse_core::kernels::{lssvm_solve, mv_lssvm_kkt_system, rbf_gram, scores_from_gram, sign_label, LssvmDual};
use midfuse_core::metrics::accuracy;
use midfuse_core::numerics::{solve_linear, LuFactor, Matrix};
use midfuse_core::synth::{sample_dataset, ExampleSpec};
use midfuse_core::views::{correlation_partition, split_by_partition};

// MV-LSSVM solve with the PD-boundary guard rho < min(gamma) instead of the
// diagonal-dominance guard, for probing only.
fn mv_solve_pd(ks: &[Matrix], y: &[f64], gammas: &[f64], rho: f64) -> Vec<LssvmDual> {
    let v = ks.len();
    let n = y.len();
    // reuse the assembled system from the library when it accepts rho;
    // otherwise assemble the same blocks here with the wider guard
    if rho * (v as f64 - 1.0) < gammas.iter().cloned().fold(f64::INFINITY, f64::min) {
        let (m, rhs) = mv_lssvm_kkt_system(ks, y, gammas, rho).unwrap();
        let lu = LuFactor::new(&m).unwrap();
        let sol = lu.solve_vec(&rhs).unwrap();
        return (0..v)
            .map(|vi| {
                let b0 = vi * (n + 1);
                LssvmDual {
                    b: sol[b0],
                    alpha: sol[b0 + 1..b0 + 1 + n].to_vec(),
                }
            })
            .collect();
    }
    let gamma_inv = {
        let g = Matrix::from_fn(v, v, |i, j| if i == j { gammas[i] } else { rho });
        solve_linear(&g, &Matrix::identity(v)).unwrap()
    };
    let size = v * (n + 1);
    let mut m = Matrix::zeros(size, size);
    let mut rhs = vec![0.0; size];
    for vi in 0..v {
        let b0 = vi * (n + 1);
        for k in 0..n {
            m.set(b0, b0 + 1 + k, y[k]);
        }
        for k in 0..n {
            let row = b0 + 1 + k;
            rhs[row] = 1.0;
            m.set(row, b0, y[k]);
            for l in 0..n {
                m.set(row, b0 + 1 + l, y[k] * y[l] * ks[vi].get(k, l));
            }
            for u in 0..v {
                let col = u * (n + 1) + 1 + k;
                m.set(row, col, m.get(row, col) + gamma_inv.get(vi, u));
            }
        }
    }
    let lu = LuFactor::new(&m).unwrap();
    let sol = lu.solve_vec(&rhs).unwrap();
    (0..v)
        .map(|vi| {
            let b0 = vi * (n + 1);
            LssvmDual {
                b: sol[b0],
                alpha: sol[b0 + 1..b0 + 1 + n].to_vec(),
            }
        })
        .collect()
}

#[test]
#[ignore]
fn pd_boundary_consensus_probe() {
    for seed in [1234u64, 4242] {
        let d = 650usize;
        let spec = ExampleSpec::with_defaults(1, d).unwrap();
        let ds = sample_dataset(&spec, seed).unwrap();
        let y = ds.y_train.clone().unwrap();
        let y_test = ds.y_test.clone().unwrap();
        let x = &ds.x_train;
        let x_test = ds.x_test.as_ref().unwrap();

        let k_full = rbf_gram(x, x, 1.0 / d as f64).unwrap();
        let kc_full = rbf_gram(x_test, x, 1.0 / d as f64).unwrap();
        let mut best_ef: (f64, f64) = (0.0, 0.0);
        for g in [1.0, 10.0, 100.0, 1000.0] {
            let dual = lssvm_solve(&k_full, &y, g).unwrap();
            let s = scores_from_gram(&dual, &y, &kc_full).unwrap();
            let labels: Vec<f64> = s.iter().map(|&v| sign_label(v)).collect();
            let acc = accuracy(&labels, &y_test).unwrap();
            if acc > best_ef.1 {
                best_ef = (g, acc);
            }
        }
        eprintln!("seed {seed}: best EF acc {:.4} (greg {})", best_ef.1, best_ef.0);

        for v in [2usize, 3, 5] {
            let part = correlation_partition(x, v, 99).unwrap();
            let mv = split_by_partition(x, &part).unwrap();
            let mv_test = split_by_partition(x_test, &part).unwrap();
            for (kname, gam) in [
                ("1/dv", mv.views.iter().map(|m| 1.0 / m.cols() as f64).collect::<Vec<_>>()),
                ("1/d", vec![1.0 / d as f64; v]),
            ] {
                let grams: Vec<_> = mv
                    .views
                    .iter()
                    .zip(&gam)
                    .map(|(xv, &g)| rbf_gram(xv, xv, g).unwrap())
                    .collect();
                let cross: Vec<_> = mv_test
                    .views
                    .iter()
                    .zip(&mv.views)
                    .zip(&gam)
                    .map(|((xt, xr), &g)| rbf_gram(xt, xr, g).unwrap())
                    .collect();
                for greg in [10.0, 100.0] {
                    let mut line = format!("seed {seed} V={v} k={kname} greg={greg:>5}: ");
                    for frac in [0.9, 0.99, 0.999] {
                        let rho = frac * greg; // PD boundary is rho < greg
                        let gammas = vec![greg; v];
                        let duals = mv_solve_pd(&grams, &y, &gammas, rho);
                        let mut fused = vec![0.0; y_test.len()];
                        for (dual, kc) in duals.iter().zip(&cross) {
                            for (a, s) in fused
                                .iter_mut()
                                .zip(scores_from_gram(dual, &y, kc).unwrap())
                            {
                                *a += s;
                            }
                        }
                        let labels: Vec<f64> = fused.iter().map(|&v| sign_label(v)).collect();
                        let acc = accuracy(&labels, &y_test).unwrap();
                        line.push_str(&format!("pdfrac{frac}:{acc:.3} "));
                    }
                    eprintln!("{line}");
                }
            }
        }
    }
}
