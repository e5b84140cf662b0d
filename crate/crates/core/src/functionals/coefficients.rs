use super::ThresholdSpec;
use crate::error::{Error, Result};
use crate::special::{
    beta_nq, excursion_coefficient, gauss_legendre, hermite, lgamma, ln_chi_moment, ln_factorial, sphere_surface,
    INV_SQRT_2PI,
};
use statrs::distribution::{Beta, ContinuousCDF};
use std::sync::OnceLock;

/// `σ^{N−1}/√(2π) · E χ_{N−1}/√N`, the common factor of every exact
/// coefficient below.
fn exact_base(n: usize, t: &ThresholdSpec) -> f64 {
    let nf = n as f64;
    let e_chi = ln_chi_moment(n - 1, 1.0).exp();
    t.sigma_n.powi(n as i32 - 1) * INV_SQRT_2PI * e_chi / nf.sqrt()
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("N = {n}; need N ≥ 2")));
    }
    Ok(())
}

/// `C_N(u) = E[1{f̃(x) ≥ u} H₂(f(x))]`, exact at finite `N`.
///
/// Tends to `v φ(v)` as `N → ∞`.
pub fn cn_coefficient(n: usize, u: f64, vol: f64) -> Result<f64> {
    check_n(n)?;
    let t = ThresholdSpec::new(n, u, vol)?;
    Ok(exact_base(n, &t) * t.v)
}

/// Fourth-order coefficients of the pointwise excursion indicator.
///
/// `c44 = E[1 H₄(f)]`, `c42 = (N−1) E[1 H₂(f) H₂(η₁)]` and
/// `c40 = (N²−1)/3 · E[1 H₄(η₁)]`, where `η` are coordinates of `γ_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourthCoefficients {
    pub c44: f64,
    pub c42: f64,
    pub c40: f64,
}

fn fourth_from_base(base: f64, v: f64) -> FourthCoefficients {
    let h2 = v * v - 1.0;
    FourthCoefficients { c44: base * v * (v * v - 3.0), c42: -base * v * h2, c40: base * v * (h2 + 2.0) }
}

/// Exact finite-`N` values. Limits: `H₃(v)φ(v)`, `−H₂(v) vφ(v)`,
/// `vφ(v)(H₂(v)+2)`.
pub fn fourth_chaos_coeffs(n: usize, u: f64, vol: f64) -> Result<FourthCoefficients> {
    check_n(n)?;
    let t = ThresholdSpec::new(n, u, vol)?;
    Ok(fourth_from_base(exact_base(n, &t), t.v))
}

/// Large-`N` form that keeps `σ^{N−1}` but drops `E χ_{N−1}/√N`.
pub fn fourth_chaos_coeffs_asymptotic(n: usize, u: f64, vol: f64) -> Result<FourthCoefficients> {
    check_n(n)?;
    let t = ThresholdSpec::new(n, u, vol)?;
    Ok(fourth_from_base(t.sigma_n.powi(n as i32 - 1) * INV_SQRT_2PI, t.v))
}

/// `P(f̃(x) ≥ u)`, from `(f̃ √(vol/N))² ~ Beta(1/2, (N−1)/2)`.
pub fn uniform_exceedance(n: usize, u: f64, vol: f64) -> Result<f64> {
    check_n(n)?;
    let band = ThresholdSpec::band(n, vol);
    if u >= band {
        return Ok(0.0);
    }
    if u <= -band {
        return Ok(1.0);
    }
    let x = (u / band).powi(2);
    let beta = Beta::new(0.5, (n as f64 - 1.0) / 2.0).map_err(|e| Error::Domain(e.to_string()))?;
    let tail = 0.5 * beta.sf(x);
    Ok(if u >= 0.0 { tail } else { 1.0 - tail })
}

const RADIAL_NODES: usize = 400;
const RADIAL_MARGIN: f64 = 14.0;

fn radial_rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static COARSE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static FINE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match n {
        RADIAL_NODES => COARSE.get_or_init(|| gauss_legendre(RADIAL_NODES)),
        _ => FINE.get_or_init(|| gauss_legendre(2 * RADIAL_NODES)),
    }
}

/// `E t^{2m}` for `t` the first coordinate of a uniform point on `S^{N−2}`.
fn t_even_moment(n: usize, m: usize) -> f64 {
    if n == 2 {
        return 1.0;
    }
    let b = (n as f64 - 2.0) / 2.0;
    let mf = m as f64;
    (lgamma(mf + 0.5) - lgamma(mf + 0.5 + b) - lgamma(0.5) + lgamma(0.5 + b)).exp()
}

/// `⨍_{S^{m−1}} H_q(⟨η, w⟩) dw` for `η ∈ ℝ^m` with `‖η‖² = r2`; zero for
/// odd `q`.
pub fn sphere_average_hermite(q: usize, r2: f64, m: usize) -> f64 {
    if q % 2 == 1 {
        return 0.0;
    }
    let mono = hermite_monomials(q);
    let mut acc = 0.0;
    let mut rp = 1.0;
    for (d, c) in mono.iter().enumerate().step_by(2) {
        acc += c * rp * t_even_moment(m + 1, d / 2);
        rp *= r2;
    }
    acc
}

/// Monomial coefficients of `H_i`, lowest degree first.
fn hermite_monomials(i: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if i == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..i {
        let mut next = vec![0.0; k + 2];
        for (d, c) in cur.iter().enumerate() {
            next[d + 1] += c;
        }
        for (d, c) in prev.iter().enumerate() {
            next[d] -= k as f64 * c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

fn radial_expectation(n: usize, a: usize, i: usize, s: f64, nodes: usize) -> f64 {
    let (x, w) = radial_rule(nodes);
    let k = (n - 1) as f64;
    let r_max = (n as f64).sqrt() + RADIAL_MARGIN;
    let ln_norm = (k / 2.0 - 1.0) * 2f64.ln() + lgamma(k / 2.0);
    let mono = hermite_monomials(i);
    let t_moments: Vec<f64> = (0..=i / 2).map(|m| t_even_moment(n, m)).collect();
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let r = 0.5 * r_max * (xi + 1.0);
        if r == 0.0 {
            continue;
        }
        let dens = ((k - 1.0) * r.ln() - 0.5 * r * r - ln_norm).exp();
        let mut angular = 0.0;
        let mut rp = 1.0;
        for (d, c) in mono.iter().enumerate() {
            if d % 2 == 0 {
                angular += c * rp * t_moments[d / 2];
            }
            rp *= r;
        }
        acc += wi * dens * excursion_coefficient(a, r * s) * angular;
    }
    0.5 * r_max * acc
}

/// Coefficient of the pointwise indicator `1{f̃(x) ≥ u}` on the orthonormal
/// element of total order `q` whose `γ_x`-part has order `i`.
///
/// The `f(x)`-part has order `q − i`. `q = 0` gives `P(f̃(x) ≥ u)`; odd `i`
/// gives 0. The radial `χ_{N−1}` integral is done by Gauss–Legendre and
/// re-run with twice the nodes; a disagreement is reported as
/// non-convergence.
pub fn fraktur_coefficient(n: usize, q: usize, i: usize, u: f64, vol: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("N = {n}; need N ≥ 3")));
    }
    if i > q {
        return Err(Error::Index(format!("γ_x order {i} exceeds total order {q}")));
    }
    if i % 2 == 1 {
        return Ok(0.0);
    }
    let t = ThresholdSpec::new(n, u, vol)?;
    let s = t.v / (n as f64 - t.v * t.v).sqrt();
    let a = q - i;
    let ln_pref = 0.5 * (sphere_surface(n - 2).ln() - ln_factorial(a) - ln_factorial(i) - beta_nq(n - 1, i).ln());
    let coarse = radial_expectation(n, a, i, s, RADIAL_NODES);
    let fine = radial_expectation(n, a, i, s, 2 * RADIAL_NODES);
    let scale = (hermite(i, (n as f64).sqrt()).abs() + 1.0) * 1e-10;
    if (coarse - fine).abs() > scale.max(1e-12) {
        return Err(Error::NoConvergence(format!(
            "radial quadrature for (q={q}, i={i}) changed by {:.3e} under refinement",
            (coarse - fine).abs()
        )));
    }
    Ok(ln_pref.exp() * fine)
}
