//! Empirical Wiener-chaos analysis of functionals of `γ ~ N(0, I_N)`.
//!
//! [`chaos_spectrum`] estimates `Var(X[q])` from the Mehler identity
//! `Cov(X(γ), X(tγ + √(1−t²)γ')) = Σ_q t^q Var(X[q])`. Each sample also
//! evaluates `X(−γ)`: the even part `(X(γ) + X(−γ))/2` only sees even
//! orders and the odd part only odd ones, so the two polynomial fits are
//! done separately. Standard errors come from a block jackknife.

mod afamily;
mod louis;

pub use afamily::{a_family_projection, spherical_chaos_element, AFamilyCoefficient};
pub use louis::{thm_louis2_check, Louis2Check};

use crate::chaos::{chaos_tensor_bruteforce, tensor_inner_isometry, TensorEstimate};
use crate::error::{Error, Result};
use crate::functionals::{excursion_area_values, UnionFind};
use crate::rng::{fill_gaussian, stream_rng, study_tag};
use crate::wave::{FieldKind, WaveModel};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `tγ + √(1−t²) γ'` for a fresh standard Gaussian `γ'`.
pub fn mehler_coupled_pair<R: Rng + ?Sized>(gamma: &[f64], t: f64, rng: &mut R) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&t), "coupling parameter {t} outside [0, 1]");
    let mut prime = vec![0.0; gamma.len()];
    fill_gaussian(rng, &mut prime);
    let s = (1.0 - t * t).sqrt();
    gamma.iter().zip(&prime).map(|(g, p)| t * g + s * p).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MehlerOptions {
    pub q_max: usize,
    pub t_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub blocks: usize,
    pub ridge: f64,
}

impl Default for MehlerOptions {
    fn default() -> Self {
        Self {
            q_max: 6,
            t_grid: (1..=9).map(|k| k as f64 / 10.0).collect(),
            samples: 10_000,
            seed: 0,
            blocks: 50,
            ridge: 1e-8,
        }
    }
}

const MAX_CONDITION: f64 = 1e8;

/// Per-order variance estimates of one functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosSpectrum {
    /// Variances indexed by order `0..=Q`; order 0 is 0 by convention.
    pub variances: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub samples: usize,
    pub t_grid: Vec<f64>,
    pub total_variance: f64,
    pub total_stderr: f64,
    pub mean: f64,
    /// Larger of the even and odd design-matrix condition numbers.
    pub condition_number: f64,
}

impl ChaosSpectrum {
    pub fn q_max(&self) -> usize {
        self.variances.len() - 1
    }

    /// `|Var[q]| / σ_q`; zero when both vanish.
    pub fn sigmas(&self, q: usize) -> f64 {
        let (v, s) = (self.variances[q], self.stderrs[q]);
        if v == 0.0 {
            0.0
        } else if s == 0.0 {
            f64::INFINITY
        } else {
            v.abs() / s
        }
    }

    /// Bessel check `Σ_{q≥1} Var[q] ≤ Var(X) + 4σ`.
    pub fn bessel_holds(&self) -> bool {
        let sum: f64 = self.variances[1..].iter().sum();
        let se = (self.stderrs[1..].iter().map(|s| s * s).sum::<f64>() + self.total_stderr.powi(2)).sqrt();
        sum <= self.total_variance + 4.0 * se
    }
}

/// Design matrix for orders `orders` on the grid `t`, its condition number,
/// and the ridge-regularized normal-equation solver.
struct ParityFit {
    orders: Vec<usize>,
    design: DMatrix<f64>,
    condition: f64,
    ridge: f64,
}

impl ParityFit {
    fn new(orders: Vec<usize>, t_grid: &[f64], ridge: f64) -> Self {
        let design = DMatrix::from_fn(t_grid.len(), orders.len(), |i, k| t_grid[i].powi(orders[k] as i32));
        let sv = design.clone().svd(false, false).singular_values;
        let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
        let condition = if orders.is_empty() { 1.0 } else { mx / mn };
        Self { orders, design, condition, ridge }
    }

    fn solve(&self, rho: &[f64]) -> Vec<f64> {
        if self.orders.is_empty() {
            return Vec::new();
        }
        let k = self.orders.len();
        let mut normal = self.design.transpose() * &self.design;
        for d in 0..k {
            normal[(d, d)] += self.ridge;
        }
        let rhs = self.design.transpose() * DVector::from_column_slice(rho);
        normal
            .cholesky()
            .expect("ridge keeps the normal matrix positive definite")
            .solve(&rhs)
            .iter()
            .copied()
            .collect()
    }
}

/// Running sums for one functional over a block of samples.
#[derive(Debug, Clone)]
struct Sums {
    n: f64,
    // p: X(γ); e, o: even/odd parts; t: X(γ_t).
    p: f64,
    pp: f64,
    e: f64,
    ee: f64,
    o: f64,
    oo: f64,
    // Ranges of the parity parts, used to detect exact degeneracy.
    e_range: (f64, f64),
    o_range: (f64, f64),
    t: Vec<f64>,
    et: Vec<f64>,
    ot: Vec<f64>,
}

impl Sums {
    fn new(nt: usize) -> Self {
        Self {
            n: 0.0,
            p: 0.0,
            pp: 0.0,
            e: 0.0,
            ee: 0.0,
            o: 0.0,
            oo: 0.0,
            e_range: EMPTY_RANGE,
            o_range: EMPTY_RANGE,
            t: vec![0.0; nt],
            et: vec![0.0; nt],
            ot: vec![0.0; nt],
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let zip = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + sign * y).collect();
        Self {
            n: self.n + sign * other.n,
            p: self.p + sign * other.p,
            pp: self.pp + sign * other.pp,
            e: self.e + sign * other.e,
            ee: self.ee + sign * other.ee,
            o: self.o + sign * other.o,
            oo: self.oo + sign * other.oo,
            // Only meaningful for additive combination; jackknife
            // replicates reuse the degeneracy of the full ensemble.
            e_range: widen(self.e_range, other.e_range),
            o_range: widen(self.o_range, other.o_range),
            t: zip(&self.t, &other.t),
            et: zip(&self.et, &other.et),
            ot: zip(&self.ot, &other.ot),
        }
    }

    fn var(&self, s: f64, ss: f64) -> f64 {
        let m = s / self.n;
        (ss / self.n - m * m) * self.n / (self.n - 1.0)
    }
}

const EMPTY_RANGE: (f64, f64) = (f64::INFINITY, f64::NEG_INFINITY);

fn widen(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.min(b.0), a.1.max(b.1))
}

struct Estimate {
    variances: Vec<f64>,
    total: f64,
}

fn estimate(s: &Sums, q_max: usize, even: &ParityFit, odd: &ParityFit, degenerate: (bool, bool)) -> Estimate {
    let n = s.n;
    let cov = |a: f64, b: f64, ab: f64| (ab / n - (a / n) * (b / n)) * n / (n - 1.0);
    let mut variances = vec![0.0; q_max + 1];
    for (fit, sum, cross, deg) in [(even, s.e, &s.et, degenerate.0), (odd, s.o, &s.ot, degenerate.1)] {
        if deg {
            continue;
        }
        let rho: Vec<f64> = s.t.iter().zip(cross).map(|(t, c)| cov(sum, *t, *c)).collect();
        for (q, v) in fit.orders.iter().zip(fit.solve(&rho)) {
            variances[*q] = v;
        }
    }
    Estimate { variances, total: s.var(s.p, s.pp) }
}

fn validate(opts: &MehlerOptions) -> Result<()> {
    if opts.q_max == 0 {
        return Err(Error::Domain("q_max must be at least 1".into()));
    }
    if opts.t_grid.len() < opts.q_max + 1 {
        return Err(Error::Domain(format!(
            "{} coupling values cannot resolve orders up to {}; need at least {}",
            opts.t_grid.len(),
            opts.q_max,
            opts.q_max + 1
        )));
    }
    if opts.t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::Domain("coupling values must lie in [0, 1]".into()));
    }
    if opts.samples < 2 * opts.blocks.max(1) || opts.blocks < 2 {
        return Err(Error::Domain(format!(
            "need at least two samples per block; got {} for {}",
            opts.samples, opts.blocks
        )));
    }
    Ok(())
}

/// Spectra of `outputs` functionals evaluated together by
/// `x(γ, out)`, sharing one Monte Carlo ensemble.
pub fn chaos_spectrum_multi<F>(x: F, n: usize, outputs: usize, opts: &MehlerOptions) -> Result<Vec<ChaosSpectrum>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    validate(opts)?;
    let nt = opts.t_grid.len();
    let tag = study_tag("mehler");
    let draw = |i: usize, g: &mut [f64], gp: &mut [f64]| {
        let mut rng = stream_rng(opts.seed, tag, i as u64);
        fill_gaussian(&mut rng, g);
        fill_gaussian(&mut rng, gp);
    };
    // Shift by the first sample's value to keep the sums well conditioned.
    let shift = {
        let (mut g, mut gp) = (vec![0.0; n], vec![0.0; n]);
        draw(0, &mut g, &mut gp);
        let mut out = vec![0.0; outputs];
        x(&g, &mut out);
        out
    };
    let b = opts.blocks;
    let bounds: Vec<(usize, usize)> = (0..b).map(|k| (k * opts.samples / b, (k + 1) * opts.samples / b)).collect();
    let blocks: Vec<Vec<Sums>> = bounds
        .par_iter()
        .map(|&(lo, hi)| {
            let mut sums = vec![Sums::new(nt); outputs];
            let (mut g, mut gp, mut gm, mut gt) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            let (mut xp, mut xm, mut xt) = (vec![0.0; outputs], vec![0.0; outputs], vec![0.0; outputs * nt]);
            for i in lo..hi {
                draw(i, &mut g, &mut gp);
                x(&g, &mut xp);
                for (a, b) in gm.iter_mut().zip(&g) {
                    *a = -b;
                }
                x(&gm, &mut xm);
                for (j, &t) in opts.t_grid.iter().enumerate() {
                    let s = (1.0 - t * t).sqrt();
                    for ((a, b), c) in gt.iter_mut().zip(&g).zip(&gp) {
                        *a = t * b + s * c;
                    }
                    x(&gt, &mut xt[j * outputs..(j + 1) * outputs]);
                }
                for (o, acc) in sums.iter_mut().enumerate() {
                    let p = xp[o] - shift[o];
                    let m = xm[o] - shift[o];
                    let (e, od) = (0.5 * (p + m), 0.5 * (p - m));
                    acc.n += 1.0;
                    acc.p += p;
                    acc.pp += p * p;
                    acc.e += e;
                    acc.ee += e * e;
                    acc.o += od;
                    acc.oo += od * od;
                    acc.e_range = widen(acc.e_range, (e, e));
                    acc.o_range = widen(acc.o_range, (od, od));
                    for j in 0..nt {
                        let v = xt[j * outputs + o] - shift[o];
                        acc.t[j] += v;
                        acc.et[j] += e * v;
                        acc.ot[j] += od * v;
                    }
                }
            }
            sums
        })
        .collect();
    let even = ParityFit::new((2..=opts.q_max).step_by(2).collect(), &opts.t_grid, opts.ridge);
    let odd = ParityFit::new((1..=opts.q_max).step_by(2).collect(), &opts.t_grid, opts.ridge);
    let condition = even.condition.max(odd.condition);
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    let mut result = Vec::with_capacity(outputs);
    for o in 0..outputs {
        let total = blocks.iter().skip(1).fold(blocks[0][o].clone(), |acc, blk| acc.combine(&blk[o], 1.0));
        let var_p = total.var(total.p, total.pp);
        let mean = shift[o] + total.p / total.n;
        let scale = mean.abs() + var_p.max(0.0).sqrt();
        let flat = |r: (f64, f64)| r.1 - r.0 <= 1e-12 * scale;
        let degenerate = (flat(total.e_range), flat(total.o_range));
        let full = estimate(&total, opts.q_max, &even, &odd, degenerate);
        let reps: Vec<Estimate> = blocks
            .iter()
            .map(|blk| estimate(&total.combine(&blk[o], -1.0), opts.q_max, &even, &odd, degenerate))
            .collect();
        let bf = b as f64;
        let jack = |f: &dyn Fn(&Estimate) -> f64| {
            let mean = reps.iter().map(f).sum::<f64>() / bf;
            ((bf - 1.0) / bf * reps.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>()).sqrt()
        };
        let stderrs = (0..=opts.q_max).map(|q| jack(&|r: &Estimate| r.variances[q])).collect();
        result.push(ChaosSpectrum {
            variances: full.variances,
            stderrs,
            samples: opts.samples,
            t_grid: opts.t_grid.clone(),
            total_variance: full.total,
            total_stderr: jack(&|r: &Estimate| r.total),
            mean,
            condition_number: condition,
        });
    }
    Ok(result)
}

/// Spectrum of a single scalar functional.
pub fn chaos_spectrum<F>(x: F, n: usize, opts: &MehlerOptions) -> Result<ChaosSpectrum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut v = chaos_spectrum_multi(|g: &[f64], out: &mut [f64]| out[0] = x(g), n, 1, opts)?;
    Ok(v.remove(0))
}

/// Geometric functionals of the excursion sets of a wave model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Area,
    #[serde(rename = "b0")]
    Betti0,
}

impl Functional {
    pub fn name(self) -> &'static str {
        match self {
            Functional::Area => "area",
            Functional::Betti0 => "b0",
        }
    }
}

/// Evaluates every `(functional, threshold)` pair from one grid
/// evaluation. Output order: functionals outer, thresholds inner.
pub struct ExcursionFunctionals<'a> {
    model: &'a WaveModel,
    kind: FieldKind,
    thresholds: Vec<f64>,
    functionals: Vec<Functional>,
    edges: Vec<(usize, usize)>,
}

impl<'a> ExcursionFunctionals<'a> {
    pub fn new(model: &'a WaveModel, kind: FieldKind, thresholds: &[f64], functionals: &[Functional]) -> Self {
        let edges = if functionals.contains(&Functional::Betti0) { model.grid().edges() } else { Vec::new() };
        Self { model, kind, thresholds: thresholds.to_vec(), functionals: functionals.to_vec(), edges }
    }

    pub fn outputs(&self) -> usize {
        self.thresholds.len() * self.functionals.len()
    }

    pub fn labels(&self) -> Vec<(Functional, f64)> {
        self.functionals.iter().flat_map(|f| self.thresholds.iter().map(move |u| (*f, *u))).collect()
    }

    pub fn eval(&self, gamma: &[f64], out: &mut [f64]) {
        let mut values = vec![0.0; self.model.grid().len()];
        self.model.field_on_grid(gamma, self.kind, &mut values);
        let w = &self.model.grid().weights;
        let mut uf = UnionFind::default();
        let nu = self.thresholds.len();
        for (fi, f) in self.functionals.iter().enumerate() {
            for (ui, &u) in self.thresholds.iter().enumerate() {
                out[fi * nu + ui] = match f {
                    Functional::Area => excursion_area_values(&values, w, u),
                    Functional::Betti0 => uf.count_components(&values, &self.edges, u) as f64,
                };
            }
        }
    }
}

/// Kernel estimate of `X[q]` and the implied `Var(X[q]) = q! ⟨K, K⟩`.
#[derive(Debug, Clone)]
pub struct DirectProjection {
    pub estimate: TensorEstimate,
    pub variance: f64,
}

/// Entry-wise Monte Carlo projection for `N ≤ 8`, `q ≤ 4`.
pub fn direct_projection_small<F>(x: F, q: usize, n: usize, samples: usize, seed: u64) -> Result<DirectProjection>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let estimate = chaos_tensor_bruteforce(x, q, n, samples, seed)?;
    let variance = tensor_inner_isometry(&estimate.tensor, &estimate.tensor)?;
    Ok(DirectProjection { estimate, variance })
}
