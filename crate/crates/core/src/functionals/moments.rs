use super::fourth_chaos_coeffs;
use crate::error::{Error, Result};
use crate::special::gauss_legendre;
use crate::special::harmonics::legendre_unchecked;
use std::f64::consts::PI;

const FOUR_FACT: f64 = 24.0;

fn check_k(k: f64) -> Result<()> {
    if k.is_nan() || k.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("covariance value {k} outside [-1, 1]")));
    }
    Ok(())
}

/// Second-order covariances at correlation `k = k(x, z)`.
///
/// `hh = E H₂(f(x)) H₂(f(z))`, `ss` pairs the sphere averages of `H₂(γ_x)`
/// and `H₂(γ_z)`, `cross` pairs `H₂(f(x))` with the average at `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cov2nd {
    pub hh: f64,
    pub ss: f64,
    pub cross: f64,
}

pub fn cov2nd_formulas(n: usize, k: f64) -> Result<Cov2nd> {
    check_k(k)?;
    let nf = n as f64;
    let k2 = k * k;
    Ok(Cov2nd {
        hh: 2.0 * k2,
        ss: (2.0 * k2 + 2.0 * (nf - 2.0)) / ((nf - 1.0) * (nf - 1.0)),
        cross: (2.0 - 2.0 * k2) / (nf - 1.0),
    })
}

/// Fourth-order covariances at correlation `k`.
///
/// Terms: `h4 = H₄(f)`, `m22 = H₂(f) · ⨍H₂(γ_x)`, `s4 = ⨍H₄(γ_x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cov4th {
    pub h4_h4: f64,
    pub m22_m22: f64,
    pub s4_s4: f64,
    pub h4_m22: f64,
    pub h4_s4: f64,
    pub m22_s4: f64,
}

/// `m22_m22` is `(24k⁴ + 4(N−8)k² + 4)/(N−1)²`; it agrees with the
/// other five at `k ∈ {0, ±1}` and with Monte Carlo in between.
pub fn cov4th_formulas(n: usize, k: f64) -> Result<Cov4th> {
    check_k(k)?;
    let nf = n as f64;
    let (k2, k4) = (k * k, k.powi(4));
    let n1 = nf - 1.0;
    let nn = nf * nf - 1.0;
    Ok(Cov4th {
        h4_h4: FOUR_FACT * k4,
        m22_m22: (24.0 * k4 + 4.0 * (nf - 8.0) * k2 + 4.0) / (n1 * n1),
        s4_s4: (9.0 * FOUR_FACT * k4 + 6.0 * FOUR_FACT * (nf - 2.0) * k2 + 3.0 * FOUR_FACT * nf * (nf - 2.0))
            / (nn * nn),
        h4_m22: FOUR_FACT / n1 * (k2 - k4),
        h4_s4: 3.0 * FOUR_FACT / nn * (1.0 - 2.0 * k2 + k4),
        m22_s4: (FOUR_FACT * (nf - 2.0) - FOUR_FACT * (nf - 5.0) * k2 - 3.0 * FOUR_FACT * k4) / (nn * n1),
    })
}

fn legendre_power_sum(l: usize, q: usize, nodes: usize) -> f64 {
    let (x, w) = gauss_legendre(nodes);
    x.iter().zip(&w).map(|(t, w)| w * legendre_unchecked(l, *t).powi(q as i32)).sum()
}

/// `∬_{S²×S²} P_ℓ(⟨x, z⟩)^q dx dz = 8π² ∫_{−1}^{1} P_ℓ^q`.
///
/// Gauss–Legendre with `⌈(qℓ+1)/2⌉` nodes is exact for the polynomial
/// integrand; a second pass with twice the nodes guards against rounding.
pub fn moment_integral(l: usize, q: usize) -> Result<f64> {
    let nodes = (q * l) / 2 + 1;
    let a = legendre_power_sum(l, q, nodes);
    let b = legendre_power_sum(l, q, 2 * nodes);
    if (a - b).abs() > 1e-12 + 1e-9 * b.abs() {
        return Err(Error::NoConvergence(format!("∫P_{l}^{q}: {a} vs {b} under refinement")));
    }
    Ok(8.0 * PI * PI * b)
}

/// Variance of the fourth-order chaos of the excursion area on `S²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourthChaosVariance {
    /// `C44²/4! · I₄`.
    pub leading: f64,
    /// Absolute sum of the remaining `I₄`, `I₂` and `vol²` contributions.
    pub remainder_bound: f64,
    /// Full closed-form variance.
    pub total: f64,
}

/// `D₄ I₄ + D₂ I₂ + D₀ vol²`, where the `D` collect products of the
/// fourth-order coefficients with the [`cov4th_formulas`] polynomials in `k`.
pub fn fourth_chaos_variance(l: usize, u: f64) -> Result<FourthChaosVariance> {
    if l == 0 {
        return Err(Error::Model("degree must be at least 1".into()));
    }
    let n = 2 * l + 1;
    let vol = 4.0 * PI;
    let c = fourth_chaos_coeffs(n, u, vol)?;
    let (a44, a42, a40) = (c.c44 / FOUR_FACT, c.c42 / 4.0, c.c40 / FOUR_FACT);
    let nf = n as f64;
    let n1 = nf - 1.0;
    let nn = nf * nf - 1.0;
    let d4_lead = 24.0 * a44 * a44;
    let d4_rest = 24.0 * a42 * a42 / (n1 * n1) + 216.0 * a40 * a40 / (nn * nn) - 48.0 * a44 * a42 / n1
        + 144.0 * a44 * a40 / nn
        - 144.0 * a42 * a40 / (nn * n1);
    let d2 =
        4.0 * (nf - 8.0) * a42 * a42 / (n1 * n1) + 144.0 * (nf - 2.0) * a40 * a40 / (nn * nn) + 48.0 * a44 * a42 / n1
            - 288.0 * a44 * a40 / nn
            - 48.0 * (nf - 5.0) * a42 * a40 / (nn * n1);
    let d0 = 4.0 * a42 * a42 / (n1 * n1)
        + 72.0 * nf * (nf - 2.0) * a40 * a40 / (nn * nn)
        + 144.0 * a44 * a40 / nn
        + 48.0 * (nf - 2.0) * a42 * a40 / (nn * n1);
    let i4 = moment_integral(l, 4)?;
    let i2 = moment_integral(l, 2)?;
    let leading = d4_lead * i4;
    Ok(FourthChaosVariance {
        leading,
        remainder_bound: d4_rest.abs() * i4 + d2.abs() * i2 + d0.abs() * vol * vol,
        total: leading + d4_rest * i4 + d2 * i2 + d0 * vol * vol,
    })
}
