use midfuse_core::kernels::{lssvm_solve, mv_lssvm_solve, rbf_gram, scores_from_gram, sign_label};
use midfuse_core::metrics::accuracy;
use midfuse_core::synth::{sample_dataset, ExampleSpec};
use midfuse_core::views::{correlation_partition, split_by_partition};

#[test]
#[ignore]
fn mv_lssvm_landscape_ex1_650() {
    let d = 650usize;
    let spec = ExampleSpec::with_defaults(1, d).unwrap();
    let ds = sample_dataset(&spec, 1234).unwrap();
    let y = ds.y_train.clone().unwrap();
    let y_test = ds.y_test.clone().unwrap();
    let x = &ds.x_train;
    let x_test = ds.x_test.as_ref().unwrap();

    // EF baseline over a gamma_reg grid
    let k_full = rbf_gram(x, x, 1.0 / d as f64).unwrap();
    let k_cross = rbf_gram(x_test, x, 1.0 / d as f64).unwrap();
    let mut best_ef = 0.0f64;
    for g in [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3] {
        let dual = lssvm_solve(&k_full, &y, g).unwrap();
        let scores = scores_from_gram(&dual, &y, &k_cross).unwrap();
        let labels: Vec<f64> = scores.iter().map(|&s| sign_label(s)).collect();
        let acc = accuracy(&labels, &y_test).unwrap();
        eprintln!("EF gamma_reg={g:>8}: test acc {acc:.4}");
        best_ef = best_ef.max(acc);
    }

    for v in [2usize, 5] {
        let part = correlation_partition(x, v, 77).unwrap();
        let sizes: Vec<usize> = part.groups().iter().map(|g| g.len()).collect();
        eprintln!("V={v} corr partition sizes: {sizes:?}");
        let mv = split_by_partition(x, &part).unwrap();
        let mv_test = split_by_partition(x_test, &part).unwrap();
        let per_view: Vec<f64> = mv.views.iter().map(|m| 1.0 / m.cols() as f64).collect();
        let full: Vec<f64> = vec![1.0 / d as f64; v];
        for (name, gam) in [("1/dv", per_view), ("1/d", full)] {
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
            for greg in [1e-2, 1e-1, 1.0, 1e1, 1e2] {
                let mut line = format!("V={v} k={name} greg={greg:>6}: ");
                for rho_frac in [0.0, 0.01, 0.1, 0.5, 0.99] {
                    let rho = rho_frac * greg / (v as f64 - 1.0);
                    let gammas = vec![greg; v];
                    let duals = mv_lssvm_solve(&grams, &y, &gammas, rho).unwrap();
                    let mut fused = vec![0.0; y_test.len()];
                    for (dual, kc) in duals.iter().zip(&cross) {
                        for (acc, s) in fused
                            .iter_mut()
                            .zip(scores_from_gram(dual, &y, kc).unwrap())
                        {
                            *acc += s;
                        }
                    }
                    let labels: Vec<f64> = fused.iter().map(|&s| sign_label(s)).collect();
                    let acc = accuracy(&labels, &y_test).unwrap();
                    line.push_str(&format!("rho{rho_frac:>4}:{acc:.3} "));
                }
                eprintln!("{line}");
            }
        }
    }
    eprintln!("best EF: {best_ef:.4}");
}
