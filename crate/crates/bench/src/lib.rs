//! Fixed inputs shared by the benchmarks under `benches/`.

use chaoswave_core::rng::{gaussian_vec, stream_rng};
use chaoswave_core::wave::build_sphere_model;
use chaoswave_core::WaveModel;

/// Sphere model of degree `l` on the default quadrature order `2l + 4`.
pub fn sphere(l: usize) -> WaveModel {
    build_sphere_model(l, 2 * l + 4).expect("valid degree")
}

/// `count` deterministic standard Gaussian vectors in `ℝ^n`.
pub fn gaussians(n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count as u64).map(|i| gaussian_vec(&mut stream_rng(7, 0, i), n)).collect()
}
