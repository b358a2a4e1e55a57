use std::time::Instant;

#[test]
#[ignore]
fn gemm_throughput() {
    for (m, k, n) in [(16usize, 650usize, 512usize), (32, 650, 512), (189, 650, 512), (512, 512, 512)] {
        let a = ndarray::Array2::<f64>::from_elem((m, k), 1.1);
        let b = ndarray::Array2::<f64>::from_elem((k, n), 0.9);
        let reps = (2e9 / (2.0 * (m * k * n) as f64)) as usize;
        let t = Instant::now();
        let mut acc = 0.0;
        for _ in 0..reps {
            let c = a.dot(&b);
            acc += c[(0, 0)];
        }
        let secs = t.elapsed().as_secs_f64();
        let gflops = (2.0 * (m * k * n * reps) as f64) / secs / 1e9;
        eprintln!("{m}x{k}x{n}: {gflops:.2} GFLOPS (acc {acc:.1})");
    }
}
