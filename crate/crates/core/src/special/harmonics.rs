use crate::error::{Error, Result};
use std::f64::consts::{PI, SQRT_2};

const DOMAIN_SLACK: f64 = 1e-12;

/// Legendre polynomial `P_ℓ(t)` by Bonnet's recurrence.
pub fn legendre(l: usize, t: f64) -> Result<f64> {
    if t.is_nan() || t.abs() > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain(format!("Legendre argument {t} outside [-1, 1]")));
    }
    Ok(legendre_unchecked(l, t.clamp(-1.0, 1.0)))
}

pub(crate) fn legendre_unchecked(l: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if l == 0 {
        return 1.0;
    }
    for k in 1..l {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `P_0(t), ..., P_L(t)`.
pub fn legendre_all(max_l: usize, t: f64) -> Result<Vec<f64>> {
    legendre(0, t)?;
    let t = t.clamp(-1.0, 1.0);
    let mut out = Vec::with_capacity(max_l + 1);
    out.push(1.0);
    if max_l >= 1 {
        out.push(t);
    }
    for k in 1..max_l {
        let kf = k as f64;
        out.push(((2.0 * kf + 1.0) * t * out[k] - kf * out[k - 1]) / (kf + 1.0));
    }
    Ok(out)
}

/// Fully normalized associated Legendre values `P̃_ℓm(cos θ)` for a fixed
/// order `m ≥ 0` and all degrees `m..=max_l`, written to `out[ℓ − m]`.
///
/// `P̃_ℓm = √((2ℓ+1)/(4π) (ℓ−m)!/(ℓ+m)!) P_ℓm` without the Condon–Shortley
/// phase. The recurrence carries the normalization at every step, so it
/// stays in range for ℓ in the hundreds.
fn normalized_alf_column(max_l: usize, m: usize, x: f64, s: f64, out: &mut [f64]) {
    let mut pmm = 0.5 / PI.sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    out[0] = pmm;
    if max_l == m {
        return;
    }
    out[1] = x * (2.0 * m as f64 + 3.0).sqrt() * pmm;
    let mf = m as f64;
    for l in (m + 2)..=max_l {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lm1 = lf - 1.0;
        let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
        out[l - m] = a * (x * out[l - m - 1] - b * out[l - m - 2]);
    }
}

fn normalized_alf(l: usize, m: usize, x: f64, s: f64) -> f64 {
    let mut col = vec![0.0; l - m + 1];
    normalized_alf_column(l, m, x, s, &mut col);
    col[l - m]
}

/// Real spherical harmonic `Y_ℓm(θ, φ)`, orthonormal in `L²(S²)`.
///
/// `m > 0` uses `√2 P̃_ℓm cos(mφ)`, `m < 0` uses `√2 P̃_ℓ|m| sin(|m|φ)`.
pub fn real_spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> Result<f64> {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Err(Error::Index(format!("|m| = {am} exceeds degree {l}")));
    }
    let p = normalized_alf(l, am, theta.cos(), theta.sin());
    Ok(match m {
        0 => p,
        m if m > 0 => SQRT_2 * p * (m as f64 * phi).cos(),
        _ => SQRT_2 * p * (am as f64 * phi).sin(),
    })
}

/// All `2ℓ+1` real harmonics of degree `ℓ` at one point, ordered
/// `m = −ℓ, ..., ℓ`.
pub fn spherical_harmonics_degree(l: usize, theta: f64, phi: f64, out: &mut [f64]) {
    assert_eq!(out.len(), 2 * l + 1);
    let (x, s) = (theta.cos(), theta.sin());
    let mut col = vec![0.0; l + 1];
    for m in 0..=l {
        normalized_alf_column(l, m, x, s, &mut col[..l - m + 1]);
        let p = col[l - m];
        if m == 0 {
            out[l] = p;
        } else {
            let (sn, cs) = (m as f64 * phi).sin_cos();
            out[l + m] = SQRT_2 * p * cs;
            out[l - m] = SQRT_2 * p * sn;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gauss_legendre;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn legendre_examples() {
        for l in 0..30 {
            assert_relative_eq!(legendre(l, 1.0).unwrap(), 1.0, epsilon = 1e-13);
        }
        assert_relative_eq!(legendre(2, 0.0).unwrap(), -0.5, epsilon = 1e-15);
        let t: f64 = 0.3;
        let p5 = (63.0 * t.powi(5) - 70.0 * t.powi(3) + 15.0 * t) / 8.0;
        assert_relative_eq!(legendre(5, t).unwrap(), p5, epsilon = 1e-12);
        assert!(legendre(3, 1.1).is_err());
    }

    #[test]
    fn legendre_all_matches_scalar() {
        let v = legendre_all(40, -0.42).unwrap();
        for (l, &p) in v.iter().enumerate() {
            assert_relative_eq!(p, legendre(l, -0.42).unwrap(), epsilon = 1e-13);
        }
    }

    #[test]
    fn harmonic_examples() {
        let y00 = real_spherical_harmonic(0, 0, 0.4, 1.0).unwrap();
        assert_relative_eq!(y00, 1.0 / (4.0 * PI).sqrt(), epsilon = 1e-15);
        let th: f64 = 0.77;
        assert_relative_eq!(
            real_spherical_harmonic(1, 0, th, 2.0).unwrap(),
            (3.0 / (4.0 * PI)).sqrt() * th.cos(),
            epsilon = 1e-14
        );
        assert!(real_spherical_harmonic(2, 3, 0.1, 0.1).is_err());
    }

    #[test]
    fn degree_two_closed_forms() {
        let (th, ph): (f64, f64) = (1.1, 0.6);
        let (x, y, z) = (th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
        let c = (15.0 / (4.0 * PI)).sqrt();
        assert_relative_eq!(real_spherical_harmonic(2, 1, th, ph).unwrap(), c * x * z, epsilon = 1e-13);
        assert_relative_eq!(real_spherical_harmonic(2, -1, th, ph).unwrap(), c * y * z, epsilon = 1e-13);
        assert_relative_eq!(real_spherical_harmonic(2, -2, th, ph).unwrap(), c * x * y, epsilon = 1e-13);
        assert_relative_eq!(real_spherical_harmonic(2, 2, th, ph).unwrap(), 0.5 * c * (x * x - y * y), epsilon = 1e-13);
    }

    #[test]
    fn orthonormal_on_product_grid() {
        for l in [1usize, 4, 9, 20] {
            let nlat = 2 * l + 2;
            let nlon = 2 * nlat;
            let (xs, ws) = gauss_legendre(nlat);
            let n = 2 * l + 1;
            let mut gram = vec![0.0; n * n];
            let mut y = vec![0.0; n];
            for (&x, &w) in xs.iter().zip(&ws) {
                let th = x.acos();
                for j in 0..nlon {
                    let ph = 2.0 * PI * j as f64 / nlon as f64;
                    spherical_harmonics_degree(l, th, ph, &mut y);
                    let wt = w * 2.0 * PI / nlon as f64;
                    for a in 0..n {
                        for b in 0..n {
                            gram[a * n + b] += wt * y[a] * y[b];
                        }
                    }
                }
            }
            for a in 0..n {
                for b in 0..n {
                    let target = if a == b { 1.0 } else { 0.0 };
                    assert!((gram[a * n + b] - target).abs() < 1e-8, "l={l} ({a},{b}) {}", gram[a * n + b]);
                }
            }
        }
    }

    #[test]
    fn high_degree_stays_finite() {
        let mut y = vec![0.0; 513];
        spherical_harmonics_degree(256, 1.0, 0.3, &mut y);
        let s: f64 = y.iter().map(|v| v * v).sum();
        assert_relative_eq!(s, 513.0 / (4.0 * PI), max_relative = 1e-9);
    }

    proptest! {
        #[test]
        fn addition_theorem(l in 0usize..40, th in 0.0f64..PI, ph in 0.0f64..(2.0 * PI)) {
            let mut y = vec![0.0; 2 * l + 1];
            spherical_harmonics_degree(l, th, ph, &mut y);
            let s: f64 = y.iter().map(|v| v * v).sum();
            let target = (2 * l + 1) as f64 / (4.0 * PI);
            prop_assert!((s - target).abs() < 1e-10 * target);
        }

        #[test]
        fn batch_matches_single(l in 0usize..12, th in 0.0f64..PI, ph in 0.0f64..6.0) {
            let mut y = vec![0.0; 2 * l + 1];
            spherical_harmonics_degree(l, th, ph, &mut y);
            for m in -(l as i64)..=(l as i64) {
                let single = real_spherical_harmonic(l, m, th, ph).unwrap();
                prop_assert!((single - y[(m + l as i64) as usize]).abs() < 1e-13);
            }
        }

        #[test]
        fn addition_theorem_two_points(l in 1usize..15, t1 in 0.0f64..PI, p1 in 0.0f64..6.2, t2 in 0.0f64..PI, p2 in 0.0f64..6.2) {
            // Σ_m Y_ℓm(x) Y_ℓm(z) = (2ℓ+1)/(4π) P_ℓ(⟨x, z⟩)
            let mut a = vec![0.0; 2 * l + 1];
            let mut b = vec![0.0; 2 * l + 1];
            spherical_harmonics_degree(l, t1, p1, &mut a);
            spherical_harmonics_degree(l, t2, p2, &mut b);
            let dot: f64 = a.iter().zip(&b).map(|(u, v)| u * v).sum();
            let c = t1.sin() * t2.sin() * (p1 - p2).cos() + t1.cos() * t2.cos();
            let target = (2 * l + 1) as f64 / (4.0 * PI) * legendre(l, c.clamp(-1.0, 1.0)).unwrap();
            prop_assert!((dot - target).abs() < 1e-11);
        }
    }
}
