use crate::error::{Error, Result};
use crate::functionals::sphere_average_hermite;
use crate::rng::{fill_gaussian, study_tag};
use crate::special::{beta_nq, factorial, hermite, sphere_surface};
use crate::stats::{dot, Ensemble};

/// Normalized element `H_{q1}(γ¹)/√q1! · ∫_{S^{N−2}} H_{q2}(⟨η, v⟩) dv /
/// √(q2! β(N−1, q2) s_{N−2})` of the spherical chaos basis, `η = γ^{2..N}`.
pub fn spherical_chaos_element(gamma: &[f64], q1: usize, q2: usize) -> f64 {
    let n = gamma.len();
    let m = n - 1;
    let r2 = dot(&gamma[1..], &gamma[1..]);
    let avg = sphere_average_hermite(q2, r2, m);
    let norm = (sphere_surface(m - 1) / (factorial(q2) * beta_nq(m, q2))).sqrt();
    hermite(q1, gamma[0]) / factorial(q1).sqrt() * avg * norm
}

/// Coefficient of `X ∈ 𝒜(1, N−1)` on `H_{q1}(γ¹) ∫ H_{q2}(⟨η, v⟩) dv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AFamilyCoefficient {
    /// `E[X H_{q1}(γ¹) H_{q2}(γ²)] / (q1! q2! β(N−1, q2))`.
    pub integral: f64,
    pub integral_stderr: f64,
    /// Coefficient on `H_{q1}(γ¹) ⨍ H_{q2}(⟨η, v⟩) dv`, i.e. `s_{N−2}` times
    /// the above.
    pub averaged: f64,
    pub averaged_stderr: f64,
    pub samples: usize,
}

const MEMBERSHIP_DRAWS: usize = 64;

/// Rejects functionals that change under a random reflection of the last
/// `N − 1` coordinates.
fn check_membership<F>(x: &F, n: usize, seed: u64) -> Result<()>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let ens = Ensemble::new(seed, study_tag("a-family-membership"));
    for i in 0..MEMBERSHIP_DRAWS {
        let mut rng = ens.rng(i);
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n - 1];
        fill_gaussian(&mut rng, &mut g);
        fill_gaussian(&mut rng, &mut h);
        let hn2 = dot(&h, &h);
        let proj = 2.0 * dot(&g[1..], &h) / hn2;
        let mut r = g.clone();
        for (a, b) in r[1..].iter_mut().zip(&h) {
            *a -= proj * b;
        }
        let (a, b) = (x(&g), x(&r));
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            return Err(Error::Domain(format!(
                "functional is not invariant under rotations of coordinates 2..N: {a} vs {b}"
            )));
        }
    }
    Ok(())
}

/// Monte Carlo estimate of the coefficient of `X` on the `(q1, q2)` element.
///
/// The expectation `E[X H_{q2}(γ²)]` is replaced by the equal
/// `E[X ⨍ H_{q2}(⟨η, v⟩) dv]`, which has smaller variance for invariant `X`.
pub fn a_family_projection<F>(
    x: F,
    n: usize,
    q1: usize,
    q2: usize,
    samples: usize,
    seed: u64,
) -> Result<AFamilyCoefficient>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n < 2 {
        return Err(Error::Domain(format!("need N ≥ 2, got {n}")));
    }
    if q2 % 2 == 1 {
        return Err(Error::Domain(format!("q2 = {q2} must be even")));
    }
    check_membership(&x, n, seed)?;
    let m = n - 1;
    let ens = Ensemble::new(seed, study_tag("a-family"));
    let mom = ens.moments(samples, 1, |_, rng, out| {
        let mut g = vec![0.0; n];
        fill_gaussian(rng, &mut g);
        let r2 = dot(&g[1..], &g[1..]);
        out[0] = x(&g) * hermite(q1, g[0]) * sphere_average_hermite(q2, r2, m);
    });
    let denom = factorial(q1) * factorial(q2) * beta_nq(m, q2);
    let s = sphere_surface(m - 1);
    let (integral, integral_stderr) = (mom.mean[0] / denom, mom.stderr(0) / denom);
    Ok(AFamilyCoefficient {
        integral,
        integral_stderr,
        averaged: integral * s,
        averaged_stderr: integral_stderr * s,
        samples,
    })
}
