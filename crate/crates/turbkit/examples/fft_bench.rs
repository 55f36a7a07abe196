use num_complex::Complex64;
use turbkit::{fft::FftEngine, WaveGrid};
use std::time::Instant;

fn main() {
    for n in [16usize, 32, 64] {
        let g = WaveGrid::new(3, n).unwrap();
        let mut eng = FftEngine::new(g);
        let mut data: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64).sin(), 0.0))
            .collect();
        // warm up
        for _ in 0..10 { eng.forward(&mut data); eng.inverse(&mut data); }
        let reps = if n <= 32 { 2000 } else { 200 };
        let t0 = Instant::now();
        for _ in 0..reps { eng.forward(&mut data); }
        let dt = t0.elapsed().as_secs_f64() / reps as f64;
        println!("N={n:3}  3d c2c: {:8.1} us", dt * 1e6);
    }
    let g = WaveGrid::new(1, 4096).unwrap();
    let mut eng = FftEngine::new(g);
    let mut data: Vec<Complex64> = (0..4096).map(|i| Complex64::new((i as f64).sin(), 0.0)).collect();
    for _ in 0..10 { eng.forward(&mut data); }
    let t0 = Instant::now();
    for _ in 0..5000 { eng.forward(&mut data); }
    println!("N=4096 1d c2c: {:8.1} us", t0.elapsed().as_secs_f64() / 5000.0 * 1e6);
}
