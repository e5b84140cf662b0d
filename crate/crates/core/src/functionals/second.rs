use super::{cn_coefficient, RegionMask};
use crate::error::{Error, Result};
use crate::stats::dot;
use crate::wave::{FieldSample, WaveModel};

/// `⨍_{S^{m−1}} H₂(⟨η, w⟩) dw` for `‖η‖² = r2` and `η ∈ ℝ^m`.
pub fn sphere_average_h2(r2: f64, m: usize) -> f64 {
    (r2 - m as f64) / m as f64
}

/// `⨍_{S^{m−1}} H₄(⟨η, w⟩) dw` for `‖η‖² = r2` and `η ∈ ℝ^m`.
pub fn sphere_average_h4(r2: f64, m: usize) -> f64 {
    let m = m as f64;
    3.0 * r2 * r2 / (m * (m + 2.0)) - 6.0 * r2 / m + 3.0
}

/// `(C_N/2) (‖f|_A‖² − (N−1)⁻¹ ∫_A ‖γ_x‖²)`, the second-chaos component of
/// the excursion area over `A`. Uses the Gaussian field built from the
/// sample's coefficient vector whatever its kind.
pub fn second_chaos_exact(sample: &FieldSample<'_>, u: f64, region: &RegionMask) -> Result<f64> {
    let model = sample.model;
    if region.len() != model.grid().len() {
        return Err(Error::Shape(format!("mask has {} nodes, grid {}", region.len(), model.grid().len())));
    }
    let n = model.dim();
    let cn = cn_coefficient(n, u, model.volume())?;
    let mut f = vec![0.0; model.grid().len()];
    model.field_on_grid(&sample.gamma, crate::wave::FieldKind::Gaussian, &mut f);
    let g2 = dot(&sample.gamma, &sample.gamma);
    Ok(second_chaos_from_grid(&f, g2, &model.grid().weights, region, cn, n))
}

/// [`second_chaos_exact`] from Gaussian grid values `f`, `‖γ‖²` and a
/// precomputed `C_N(u)`.
pub fn second_chaos_from_grid(
    f: &[f64],
    gamma_norm2: f64,
    weights: &[f64],
    region: &RegionMask,
    cn: f64,
    n: usize,
) -> f64 {
    let (mut f2, mut gx2) = (0.0, 0.0);
    for (i, (fi, w)) in f.iter().zip(weights).enumerate() {
        if region.contains(i) {
            let ff = fi * fi;
            f2 += w * ff;
            gx2 += w * (gamma_norm2 - ff);
        }
    }
    0.5 * cn * (f2 - gx2 / (n as f64 - 1.0))
}

/// Closed-form variance of [`second_chaos_exact`]:
/// `(C_N/2)² N/(N−1)² [N Var(‖f|_A‖²) − 2 vol(A)²]`, with
/// `Var(‖f|_A‖²) = 2 ∬_{A×A} k²` evaluated by grid quadrature.
pub fn variance_second_chaos(model: &WaveModel, u: f64, region: &RegionMask) -> Result<f64> {
    let grid = model.grid();
    if region.len() != grid.len() {
        return Err(Error::Shape(format!("mask has {} nodes, grid {}", region.len(), grid.len())));
    }
    let n = model.dim();
    let cn = cn_coefficient(n, u, model.volume())?;
    // ∬ k² = (vol/N)² ‖G_A‖_F² with G_A = Σ_{i∈A} w_i Y_i Y_iᵀ.
    let mut g = vec![0.0; n * n];
    for (i, &w) in grid.weights.iter().enumerate() {
        if !region.contains(i) || w == 0.0 {
            continue;
        }
        let row = model.basis_row(i);
        for a in 0..n {
            let wa = w * row[a];
            for b in 0..n {
                g[a * n + b] += wa * row[b];
            }
        }
    }
    let s = model.volume() / n as f64;
    let var_q = 2.0 * s * s * dot(&g, &g);
    let vol_a = region.volume(grid);
    let nf = n as f64;
    let half = 0.5 * cn;
    Ok(half * half * nf / ((nf - 1.0) * (nf - 1.0)) * (nf * var_q - 2.0 * vol_a * vol_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::excursion_area_values;
    use crate::rng::gaussian_vec;
    use crate::special::hermite;
    use crate::stats::Ensemble;
    use crate::wave::{build_sphere_model, sample_field, FieldKind};
    use std::f64::consts::PI;

    #[test]
    fn sphere_averages_match_quadrature() {
        // m = 2: average over the unit circle.
        let eta = [1.3, -0.4];
        let r2 = dot(&eta, &eta);
        let k = 2000;
        let (mut a2, mut a4) = (0.0, 0.0);
        for j in 0..k {
            let t = 2.0 * PI * j as f64 / k as f64;
            let x = eta[0] * t.cos() + eta[1] * t.sin();
            a2 += hermite(2, x) / k as f64;
            a4 += hermite(4, x) / k as f64;
        }
        assert!((a2 - sphere_average_h2(r2, 2)).abs() < 1e-12);
        assert!((a4 - sphere_average_h4(r2, 2)).abs() < 1e-12);
    }

    #[test]
    fn full_region_vanishes() {
        let m = build_sphere_model(8, 18).unwrap();
        let full = RegionMask::full(m.grid());
        let cn = cn_coefficient(17, 0.4, 4.0 * PI).unwrap();
        for seed in 0..50 {
            let s = sample_field(&m, FieldKind::Uniform, seed);
            let x = second_chaos_exact(&s, 0.4, &full).unwrap();
            let g2 = dot(&s.gamma, &s.gamma);
            assert!(x.abs() <= 1e-9 * 4.0 * PI * cn * g2.max(1.0));
        }
        assert!(variance_second_chaos(&m, 0.4, &full).unwrap().abs() < 1e-12);
    }

    #[test]
    fn hemisphere_is_degenerate() {
        // f² is even under x → −x, so half of ‖f‖² sits in any hemisphere.
        let m = build_sphere_model(8, 18).unwrap();
        let hemi = RegionMask::hemisphere(m.grid());
        let cn = cn_coefficient(17, 0.4, 4.0 * PI).unwrap();
        assert!(variance_second_chaos(&m, 0.4, &hemi).unwrap().abs() < 1e-12 * cn * cn);
        let s = sample_field(&m, FieldKind::Gaussian, 6);
        assert!(second_chaos_exact(&s, 0.4, &hemi).unwrap().abs() < 1e-10);
    }

    #[test]
    fn zero_threshold_vanishes() {
        let m = build_sphere_model(8, 18).unwrap();
        let hemi = RegionMask::hemisphere(m.grid());
        let s = sample_field(&m, FieldKind::Gaussian, 1);
        assert_eq!(second_chaos_exact(&s, 0.0, &hemi).unwrap(), 0.0);
        assert_eq!(variance_second_chaos(&m, 0.0, &hemi).unwrap(), 0.0);
    }

    #[test]
    fn hemisphere_variance_matches_monte_carlo() {
        let m = build_sphere_model(8, 18).unwrap();
        let cap = RegionMask::polar_cap(m.grid(), PI / 3.0);
        let target = variance_second_chaos(&m, 0.4, &cap).unwrap();
        let cn = cn_coefficient(17, 0.4, 4.0 * PI).unwrap();
        let w = m.grid().weights.clone();
        let ens = Ensemble::new(11, 3);
        let mom = ens.moments(40_000, 1, |_, rng, out| {
            let g = gaussian_vec(rng, 17);
            let mut f = vec![0.0; m.grid().len()];
            m.field_on_grid(&g, FieldKind::Gaussian, &mut f);
            out[0] = second_chaos_from_grid(&f, dot(&g, &g), &w, &cap, cn, 17);
        });
        let se = (2.0f64 / 40_000.0).sqrt() * 2.0;
        assert!((mom.variance(0) / target - 1.0).abs() < 4.0 * se);
        assert!(mom.mean[0].abs() < 4.0 * mom.stderr(0));
    }

    #[test]
    fn projection_property() {
        // E[X S] = E[S²] for the area X over a cap and its component S.
        let m = build_sphere_model(5, 12).unwrap();
        let hemi = RegionMask::polar_cap(m.grid(), PI / 3.0);
        let u = 0.3;
        let cn = cn_coefficient(11, u, 4.0 * PI).unwrap();
        let w: Vec<f64> =
            m.grid().weights.iter().enumerate().map(|(i, w)| if hemi.contains(i) { *w } else { 0.0 }).collect();
        let ens = Ensemble::new(4, 9);
        let mom = ens.moments(100_000, 1, |_, rng, out| {
            let g = gaussian_vec(rng, 11);
            let mut f = vec![0.0; m.grid().len()];
            m.field_on_grid(&g, FieldKind::Gaussian, &mut f);
            let s = second_chaos_from_grid(&f, dot(&g, &g), &m.grid().weights, &hemi, cn, 11);
            let mut fu = vec![0.0; m.grid().len()];
            m.field_on_grid(&g, FieldKind::Uniform, &mut fu);
            let x = excursion_area_values(&fu, &w, u);
            out[0] = x * s;
        });
        let target = variance_second_chaos(&m, u, &hemi).unwrap();
        assert!((mom.mean[0] - target).abs() < 4.0 * mom.stderr(0), "{} vs {target} ± {}", mom.mean[0], mom.stderr(0));
    }
}
