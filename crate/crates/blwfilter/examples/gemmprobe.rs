// Throwaway probe: isolate GEMM vs packing cost across build profiles.
use blwfilter::model::{build_model, ModelKind};
use blwfilter::tensor::Tensor;
use std::time::Instant;

fn main() {
    // Pure dgemm: M=8, K=64, N=18176, 20 reps.
    let (m, k, n) = (8usize, 64usize, 18176usize);
    let a = vec![0.5f64; m * k];
    let b = vec![0.25f64; k * n];
    let mut c = vec![0.0f64; m * n];
    let reps = 50;
    let t = Instant::now();
    for _ in 0..reps {
        unsafe {
            matrixmultiply::dgemm(
                m, k, n, 1.0, a.as_ptr(), k as isize, 1, b.as_ptr(), n as isize, 1, 1.0,
                c.as_mut_ptr(), n as isize, 1,
            );
        }
    }
    let dt = t.elapsed().as_secs_f64();
    let fl = 2.0 * (m * k * n * reps) as f64;
    println!("dgemm 8x64x18k: {:.2} GFLOP/s (ignore {})", fl / dt / 1e9, c[0]);

    let model = build_model(ModelKind::DeepFilter, 7);
    let x = Tensor::from_vec(
        32,
        1,
        512,
        (0..32 * 512).map(|i| (i as f64 * 0.01).sin()).collect(),
    );
    let up = Tensor::from_vec(32, 1, 512, vec![1.0; 32 * 512]);
    for round in 0..2 {
        let t = Instant::now();
        let cache = model.forward_train(&x).unwrap();
        let t_fwd = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let (g, _) = model.backward(&cache, &up).unwrap();
        let t_bwd = t.elapsed().as_secs_f64();
        println!(
            "round {round}: forward_train {t_fwd:.3} s  backward {t_bwd:.3} s  (ignore {})",
            g.0.len()
        );
    }
}
