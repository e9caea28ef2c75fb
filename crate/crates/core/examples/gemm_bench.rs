use std::time::Instant;
use wolfcast_core::tensor::gemm_nn;

fn main() {
    for (m, k, n) in [(16, 515, 1024), (16, 768, 1024), (64, 256, 256), (16, 32, 64)] {
        let a = vec![0.5f64; m * k];
        let b = vec![0.25f64; k * n];
        let mut c = vec![0.0f64; m * n];
        let reps = (2e9 / (2.0 * m as f64 * k as f64 * n as f64)) as usize + 1;
        let t = Instant::now();
        for _ in 0..reps {
            gemm_nn(false, m, k, n, &a, &b, &mut c);
        }
        let el = t.elapsed().as_secs_f64();
        let gflops = 2.0 * (m * k * n * reps) as f64 / el / 1e9;
        println!("({m},{k},{n}) x{reps}: {gflops:.2} Gflop/s");
    }
}
