use super::tensor::{SymmetricTensor, TensorLayout};
use super::wick::wick_eval_counts;
use crate::error::{Error, Result};
use crate::rng::{gaussian_vec, study_tag};
use crate::special::{factorial, hermite};
use crate::stats::{dot, Ensemble};

/// Largest dimension and order for entry-wise tensor extraction.
pub const MAX_BRUTEFORCE_DIM: usize = 8;
pub const MAX_BRUTEFORCE_ORDER: usize = 4;

/// Monte Carlo estimate of a chaos kernel with per-entry standard errors.
#[derive(Debug, Clone)]
pub struct TensorEstimate {
    pub tensor: SymmetricTensor,
    pub stderr: SymmetricTensor,
    pub samples: usize,
}

impl TensorEstimate {
    /// Largest `|K̂ − K| / σ` over classes, with σ floored at `floor`.
    pub fn max_sigma_deviation(&self, target: &SymmetricTensor, floor: f64) -> f64 {
        self.tensor
            .values()
            .iter()
            .zip(target.values())
            .zip(self.stderr.values())
            .map(|((a, b), s)| (a - b).abs() / s.max(floor))
            .fold(0.0, f64::max)
    }
}

/// Estimates `K_q` of `X = E(γ)` entry-wise as `E[X :γ^α:] / q!`.
pub fn chaos_tensor_bruteforce<F>(
    functional: F,
    q: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<TensorEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n > MAX_BRUTEFORCE_DIM || q > MAX_BRUTEFORCE_ORDER || n == 0 {
        return Err(Error::Infeasible(format!(
            "entry-wise extraction limited to N ≤ {MAX_BRUTEFORCE_DIM}, q ≤ {MAX_BRUTEFORCE_ORDER}; got N={n}, q={q}"
        )));
    }
    let layout = TensorLayout::new(q, n);
    let classes = layout.len();
    let ens = Ensemble::new(seed, study_tag("chaos-tensor"));
    let m = ens.moments(samples, classes, |_, rng, out| {
        let g = gaussian_vec(rng, n);
        let x = functional(&g);
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = x * wick_eval_counts(&layout.multiplicity(c).counts, &g);
        }
    });
    let qf = factorial(q);
    let mut values = Vec::with_capacity(classes);
    let mut errs = Vec::with_capacity(classes);
    for c in 0..classes {
        let (v, e) = (m.mean[c] / qf, m.stderr(c) / qf);
        if !v.is_finite() || !e.is_finite() {
            return Err(Error::NonFinite(format!("class {:?}", layout.tuple(c))));
        }
        values.push(v);
        errs.push(e);
    }
    Ok(TensorEstimate {
        tensor: SymmetricTensor::from_layout(layout.clone(), values)?,
        stderr: SymmetricTensor::from_layout(layout, errs)?,
        samples,
    })
}

/// Estimate with standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `|value − target|` in units of the standard error (floored).
    pub fn sigmas_from(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.stderr.max(1e-300)
    }
}

/// Sphere average of `P_q(v) = E[X H_q(⟨γ, v⟩)]` over `directions` random
/// unit vectors, for a 0-homogeneous `X`.
pub fn averaging_check<F>(
    functional: F,
    q: usize,
    n: usize,
    directions: usize,
    samples: usize,
    seed: u64,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let probe = Ensemble::new(seed, study_tag("averaging-probe"));
    for i in 0..8 {
        let mut rng = probe.rng(i);
        let g = gaussian_vec(&mut rng, n);
        let t = 0.1 + 5.0 * rand::Rng::random::<f64>(&mut rng);
        let scaled: Vec<f64> = g.iter().map(|x| x * t).collect();
        let (a, b) = (functional(&g), functional(&scaled));
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            return Err(Error::Domain(format!("functional is not 0-homogeneous: X(γ)={a}, X({t:.3}γ)={b}")));
        }
    }
    let dirs: Vec<Vec<f64>> = (0..directions)
        .map(|k| {
            let v = gaussian_vec(&mut probe.rng(1000 + k), n);
            let r = crate::stats::norm(&v);
            v.into_iter().map(|x| x / r).collect()
        })
        .collect();
    let ens = Ensemble::new(seed, study_tag("averaging"));
    let m = ens.moments(samples, 1, |_, rng, out| {
        let g = gaussian_vec(rng, n);
        let x = functional(&g);
        let avg = dirs.iter().map(|v| hermite(q, dot(&g, v))).sum::<f64>() / directions as f64;
        out[0] = x * avg;
    });
    Ok(Estimate { value: m.mean[0], stderr: m.stderr(0) })
}
