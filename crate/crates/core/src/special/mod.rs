//! Scalar special functions: Hermite polynomials, Gaussian excursion
//! coefficients, Gamma-ratio constants, Legendre polynomials and real
//! spherical harmonics.
//!
//! Hermite polynomials are the probabilists' family, orthogonal under the
//! standard Gaussian weight with `E[H_k H_j] = k! δ_kj`.

pub(crate) mod harmonics;
mod quadrature;

pub use harmonics::{legendre, legendre_all, real_spherical_harmonic, spherical_harmonics_degree};
pub use quadrature::{gauss_hermite, gauss_legendre, hermite_orthogonality_defect};

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{PI, SQRT_2};

/// Largest Hermite degree accepted by [`hermite`] and [`HermiteSequence`].
pub const MAX_HERMITE_DEGREE: usize = 64;

/// `1/√(2π)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `H_0(x), ..., H_K(x)` at one abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSequence {
    pub max_degree: usize,
    pub x: f64,
    pub values: Vec<f64>,
}

impl HermiteSequence {
    /// # Panics
    /// If `max_degree` exceeds [`MAX_HERMITE_DEGREE`].
    pub fn new(max_degree: usize, x: f64) -> Self {
        assert!(max_degree <= MAX_HERMITE_DEGREE, "Hermite degree {max_degree} above cap");
        let mut values = Vec::with_capacity(max_degree + 1);
        values.push(1.0);
        if max_degree >= 1 {
            values.push(x);
        }
        for k in 2..=max_degree {
            let next = x * values[k - 1] - (k - 1) as f64 * values[k - 2];
            values.push(next);
        }
        Self { max_degree, x, values }
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }
}

/// Probabilists' Hermite polynomial `H_k(x)` by the three-term recurrence.
///
/// # Panics
/// If `k` exceeds [`MAX_HERMITE_DEGREE`].
pub fn hermite(k: usize, x: f64) -> f64 {
    assert!(k <= MAX_HERMITE_DEGREE, "Hermite degree {k} above cap");
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut h0, mut h1) = (1.0, x);
            for j in 2..=k {
                let h2 = x * h1 - (j - 1) as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    }
}

/// Fills `out[k] = H_k(x)` for `k < out.len()`.
pub fn hermite_fill(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        out[k] = x * out[k - 1] - (k - 1) as f64 * out[k - 2];
    }
}

pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `P(g ≥ x)`, accurate far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `J_0(u) = Φ(u)` and `J_q(u) = (−1)^{q−1} H_{q−1}(u) φ(u)` for `q ≥ 1`.
///
/// These are the Hermite coefficients of `1{g ≥ −u}`, i.e.
/// `E[1{g ≥ −u} H_q(g)] = J_q(u)`. For the excursion `{g ≥ u}` use
/// [`excursion_coefficient`], which equals `J_q(−u)`.
pub fn jq_coefficient(q: usize, u: f64) -> f64 {
    if q == 0 {
        normal_cdf(u)
    } else {
        let sign = if (q - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * hermite(q - 1, u) * normal_pdf(u)
    }
}

/// `E[1{g ≥ u} H_q(g)]` for a standard Gaussian `g`:
/// `1 − Φ(u)` at `q = 0`, `H_{q−1}(u) φ(u)` otherwise.
pub fn excursion_coefficient(q: usize, u: f64) -> f64 {
    if q == 0 {
        normal_sf(u)
    } else {
        hermite(q - 1, u) * normal_pdf(u)
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn lgamma(x: f64) -> f64 {
    ln_gamma(x)
}

/// Surface measure of the unit sphere `S^d ⊂ ℝ^{d+1}`.
pub fn sphere_surface(d: usize) -> f64 {
    let a = (d as f64 + 1.0) / 2.0;
    (2f64.ln() + a * PI.ln() - ln_gamma(a)).exp()
}

/// `β(N, q) = ∫_{S^{N−1}} |v_1|^q dv = 2π^{(N−1)/2} Γ((q+1)/2) / Γ((N+q)/2)`.
pub fn beta_nq(n: usize, q: usize) -> f64 {
    let (n, q) = (n as f64, q as f64);
    (2f64.ln() + 0.5 * (n - 1.0) * PI.ln() + ln_gamma(0.5 * (q + 1.0)) - ln_gamma(0.5 * (n + q))).exp()
}

/// `ln E‖γ‖^q` for `γ` standard Gaussian in `ℝ^N` (real order allowed).
pub fn ln_chi_moment(n: usize, q: f64) -> f64 {
    let n = n as f64;
    0.5 * q * 2f64.ln() + ln_gamma(0.5 * (n + q)) - ln_gamma(0.5 * n)
}

/// `E‖γ‖^q = 2^{q/2} Γ((N+q)/2) / Γ(N/2)`.
pub fn chi_moment(n: usize, q: usize) -> f64 {
    ln_chi_moment(n, q as f64).exp()
}

/// `(c_{q,N}, ĉ_{q,N})` with `c = E‖γ‖^{2q} / E‖γ‖^q` and
/// `ĉ = Γ(N/2) Γ((N+2q)/2) / Γ((N+q)/2)²`.
pub fn cqn_constants(q: usize, n: usize) -> (f64, f64) {
    let c = (ln_chi_moment(n, 2.0 * q as f64) - ln_chi_moment(n, q as f64)).exp();
    let (nf, qf) = (n as f64, q as f64);
    let chat = (ln_gamma(0.5 * nf) + ln_gamma(0.5 * (nf + 2.0 * qf)) - 2.0 * ln_gamma(0.5 * (nf + qf))).exp();
    (c, chat)
}

/// `ln q!`.
pub fn ln_factorial(q: usize) -> f64 {
    ln_gamma(q as f64 + 1.0)
}

/// `q!` as a float; exact for `q ≤ 22`.
pub fn factorial(q: usize) -> f64 {
    (1..=q).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(2, 0.0), -1.0);
        assert_eq!(hermite(4, 0.0), 3.0);
        assert_eq!(hermite(3, 2.0), 2.0);
    }

    #[test]
    fn hermite_matches_explicit_polynomials() {
        for &x in &[-2.5, -0.3, 0.0, 0.7, 3.1] {
            let x2: f64 = x * x;
            assert_relative_eq!(hermite(4, x), x2 * x2 - 6.0 * x2 + 3.0, epsilon = 1e-12);
            assert_relative_eq!(hermite(5, x), x2 * x2 * x - 10.0 * x2 * x + 15.0 * x, epsilon = 1e-12);
            assert_relative_eq!(hermite(6, x), x2 * x2 * x2 - 15.0 * x2 * x2 + 45.0 * x2 - 15.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn sequence_agrees_with_scalar() {
        let seq = HermiteSequence::new(20, 1.3);
        for k in 0..=20 {
            assert_relative_eq!(seq.get(k), hermite(k, 1.3), max_relative = 1e-14);
        }
        let mut buf = [0.0; 21];
        hermite_fill(1.3, &mut buf);
        assert_eq!(&buf[..], &seq.values[..]);
    }

    #[test]
    fn jq_examples() {
        assert_relative_eq!(jq_coefficient(0, 0.0), 0.5, epsilon = 1e-15);
        assert_eq!(jq_coefficient(2, 0.0), 0.0);
        assert_relative_eq!(jq_coefficient(1, 0.0), 0.398942280401, epsilon = 1e-12);
    }

    #[test]
    fn excursion_coefficients_match_tail_integration() {
        // E[1{g ≥ u} H_q(g)] by substitution g = u + s, integrating the
        // tail with a fine composite Simpson rule.
        let u = 0.37;
        for q in 0..8 {
            let m = 20_000;
            let h = 12.0 / m as f64;
            let mut acc = 0.0;
            for j in 0..=m {
                let x = u + j as f64 * h;
                let w = if j == 0 || j == m {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += w * hermite(q, x) * normal_pdf(x);
            }
            acc *= h / 3.0;
            assert_relative_eq!(acc, excursion_coefficient(q, u), epsilon = 1e-10);
            assert_relative_eq!(jq_coefficient(q, -u), excursion_coefficient(q, u), epsilon = 1e-15);
        }
    }

    #[test]
    fn sphere_surfaces() {
        assert_relative_eq!(sphere_surface(1), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_surface(2), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_surface(3), 2.0 * PI * PI, max_relative = 1e-14);
        // s_d = s_{d-1} ∫_0^π sin^{d-1}, with the Wallis integral in closed form.
        for d in 2..12 {
            let wallis = PI.sqrt() * (lgamma(d as f64 / 2.0) - lgamma((d as f64 + 1.0) / 2.0)).exp();
            assert_relative_eq!(sphere_surface(d), sphere_surface(d - 1) * wallis, max_relative = 1e-12);
        }
    }

    #[test]
    fn beta_examples() {
        for n in 2..=50 {
            assert_relative_eq!(beta_nq(n, 0), sphere_surface(n - 1), max_relative = 1e-12);
            assert_relative_eq!(beta_nq(n, 2), sphere_surface(n - 1) / n as f64, max_relative = 1e-12);
        }
        assert_relative_eq!(beta_nq(3, 2), 4.0 * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn beta_matches_sphere_quadrature() {
        // ∫_{S^{N-1}} |v_1|^q dv = s_{N-2} ∫_{-1}^{1} |t|^q (1-t^2)^{(N-3)/2} dt,
        // computed with Gauss–Legendre on t = sin-substitution-free even integrand.
        for n in 2..=6 {
            for q in (0..=8).step_by(2) {
                let value = if n == 2 {
                    // S^1: ∫_0^{2π} |cos φ|^q dφ
                    let m = 4096;
                    (0..m).map(|j| (2.0 * PI * j as f64 / m as f64).cos().abs().powi(q as i32)).sum::<f64>() * 2.0 * PI
                        / m as f64
                } else {
                    // t = cos θ, dv = s_{N-2} sin^{N-2}θ dθ
                    let (x, w) = gauss_legendre(64);
                    let half = 0.5 * PI;
                    x.iter()
                        .zip(&w)
                        .map(|(&xi, &wi)| {
                            let th = half * (xi + 1.0);
                            wi * half * th.cos().abs().powi(q as i32) * th.sin().powi(n as i32 - 2)
                        })
                        .sum::<f64>()
                        * sphere_surface(n - 2)
                };
                assert_relative_eq!(value, beta_nq(n, q), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn chi_examples() {
        for n in 1..30 {
            assert_relative_eq!(chi_moment(n, 2), n as f64, max_relative = 1e-12);
            assert_relative_eq!(chi_moment(n, 0), 1.0, epsilon = 1e-15);
        }
        assert_relative_eq!(chi_moment(3, 1), 2.0 * (2.0 / PI).sqrt(), max_relative = 1e-13);
        // Even moments are rising products: E‖γ‖^{2k} = N(N+2)...(N+2k-2).
        assert_relative_eq!(chi_moment(7, 6), 7.0 * 9.0 * 11.0, max_relative = 1e-12);
    }

    #[test]
    fn cqn_examples() {
        for n in 2..40 {
            let (c, _) = cqn_constants(2, n);
            assert_relative_eq!(c, n as f64 + 2.0, max_relative = 1e-12);
        }
        let (c, _) = cqn_constants(1, 2);
        assert_relative_eq!(c, 2.0 * SQRT_2 / PI.sqrt(), max_relative = 1e-13);
        for q in 1..6 {
            for n in 2..10 {
                let (c, chat) = cqn_constants(q, n);
                assert_relative_eq!(c, chi_moment(n, 2 * q) / chi_moment(n, q), max_relative = 1e-12);
                // ĉ = E‖γ‖^{2q} / (E‖γ‖^q)², the same ratio normalized once more.
                assert_relative_eq!(chat, chi_moment(n, 2 * q) / chi_moment(n, q).powi(2), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn gamma_ratios_survive_large_dimension() {
        let (c, chat) = cqn_constants(4, 600);
        assert!(c.is_finite() && chat.is_finite());
        assert!(beta_nq(600, 4).is_finite());
    }

    proptest! {
        #[test]
        fn hermite_derivative_identity(k in 1usize..30, x in -5.0f64..5.0) {
            // H_k' = k H_{k-1} and H_{k+1} = x H_k - H_k'.
            let lhs = hermite(k + 1, x);
            let rhs = x * hermite(k, x) - k as f64 * hermite(k - 1, x);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn hermite_parity(k in 0usize..40, x in -4.0f64..4.0) {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((hermite(k, -x) - s * hermite(k, x)).abs() <= 1e-9 * (1.0 + hermite(k, x).abs()));
        }

        #[test]
        fn excursion_series_matches_mehler_smoothing(u in -1.5f64..1.5, g in -3.0f64..3.0, t in 0.1f64..0.6) {
            // Σ t^q c_q H_q(g)/q! = P(t g + √(1−t²) Z ≥ u) for the coefficients c_q of 1{· ≥ u}.
            let mut h = [0.0; 61];
            hermite_fill(g, &mut h);
            let s: f64 = (0..=60).map(|q| t.powi(q as i32) * excursion_coefficient(q, u) * h[q] / factorial(q)).sum();
            let target = normal_sf((u - t * g) / (1.0 - t * t).sqrt());
            prop_assert!((s - target).abs() < 1e-9, "series {} vs {}", s, target);
        }
    }
}
