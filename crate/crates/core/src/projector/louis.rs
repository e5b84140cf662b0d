use super::{chaos_spectrum, direct_projection_small, ChaosSpectrum, MehlerOptions};
use crate::chaos::{SymmetricTensor, TensorEstimate};
use crate::error::{Error, Result};
use crate::rng::{gaussian_vec, stream_rng, study_tag};
use crate::stats::dot;
use crate::wave::{build_torus_model, Manifold, WaveModel};

/// Outcome of the two-shell torus check.
#[derive(Debug, Clone)]
pub struct Louis2Check {
    /// `‖K̂ − ĉ D‖ / ‖K̂‖` for the estimated second-order kernel `K̂` and
    /// `D = diag(λ̄² − λ_i²)`.
    pub fit_residual: f64,
    pub fit_coefficient: f64,
    /// Residual expected from Monte Carlo noise alone.
    pub noise_floor: f64,
    pub kernel: TensorEstimate,
    /// Spectrum of the same functional on the first shell alone.
    pub monochromatic: ChaosSpectrum,
}

/// `X(γ) = ∫ F(f̃, |∇f̃|)` on the model grid.
fn integrated<'a, F>(model: &'a WaveModel, f: &'a F) -> impl Fn(&[f64]) -> f64 + Sync + 'a
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    move |g: &[f64]| {
        let inv = 1.0 / dot(g, g).sqrt();
        let n = model.dim();
        let mut acc = 0.0;
        for (i, w) in model.grid().weights.iter().enumerate() {
            let value = dot(model.basis_row(i), g) * inv;
            let grad = model.gradient_row(i).expect("torus model has gradients");
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..n {
                gx += grad[2 * j] * g[j];
                gy += grad[2 * j + 1] * g[j];
            }
            acc += w * f(value, (gx * gx + gy * gy).sqrt() * inv);
        }
        acc
    }
}

/// Estimates the second-order kernel of `∫ F(f̃, |∇f̃|)` on a two-shell torus
/// window and regresses it on `diag(λ̄² − λ_i²)`; also returns the spectrum
/// of the same functional on the first shell alone.
pub fn thm_louis2_check<F>(
    window: &WaveModel,
    f: F,
    tensor_samples: usize,
    mehler: &MehlerOptions,
) -> Result<Louis2Check>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let shells = match (window.manifold(), window.shells()) {
        (Manifold::Torus, Some(s)) if s.len() == 2 => s.to_vec(),
        _ => return Err(Error::Model("window must be a torus model with exactly two lattice shells".into())),
    };
    let n = window.dim();
    let x = integrated(window, &f);
    // Even part minus a pilot mean: same second-order kernel, less noise.
    let mut pilot_rng = stream_rng(mehler.seed, study_tag("louis2-pilot"), 0);
    let shift = (0..64).map(|_| x(&gaussian_vec(&mut pilot_rng, n))).sum::<f64>() / 64.0;
    let even = |g: &[f64]| {
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        0.5 * (x(g) + x(&neg)) - shift
    };
    let kernel = direct_projection_small(even, 2, n, tensor_samples, mehler.seed)?.estimate;
    let mean_eig = (0..n).map(|j| window.eigenvalue(j)).sum::<f64>() / n as f64;
    let mut d = SymmetricTensor::zeros(2, n);
    for j in 0..n {
        d.set(&[j, j], mean_eig - window.eigenvalue(j));
    }
    let k = &kernel.tensor;
    let c = k.inner(&d)? / d.inner(&d)?;
    let knorm = k.norm();
    let fit_residual = if knorm == 0.0 { 0.0 } else { k.sub(&d.scaled(c))?.norm() / knorm };
    let noise = kernel
        .stderr
        .values()
        .iter()
        .enumerate()
        .map(|(i, s)| kernel.stderr.layout().orbit(i) * s * s)
        .sum::<f64>()
        .sqrt();
    let res = (window.grid().len() as f64).sqrt().round() as usize;
    let mono = build_torus_model(shells[0], res)?;
    let xm = integrated(&mono, &f);
    let monochromatic = chaos_spectrum(xm, mono.dim(), mehler)?;
    Ok(Louis2Check {
        fit_residual,
        fit_coefficient: c,
        noise_floor: if knorm == 0.0 { 0.0 } else { noise / knorm },
        kernel,
        monochromatic,
    })
}
