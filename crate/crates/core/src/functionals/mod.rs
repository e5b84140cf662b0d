//! Excursion functionals and their closed-form chaos coefficients.
//!
//! Conventions: thresholds `u` refer to the uniform wave `f̃`; the effective
//! level is `v = u √vol(M)`; every coefficient is the Hermite coefficient of
//! the upper excursion `1{f̃ ≥ u}`.

mod coefficients;
mod moments;
mod second;

pub use coefficients::{
    cn_coefficient, fourth_chaos_coeffs, fourth_chaos_coeffs_asymptotic, fraktur_coefficient, sphere_average_hermite,
    uniform_exceedance, FourthCoefficients,
};
pub use moments::{
    cov2nd_formulas, cov4th_formulas, fourth_chaos_variance, moment_integral, Cov2nd, Cov4th, FourthChaosVariance,
};
pub use second::{
    second_chaos_exact, second_chaos_from_grid, sphere_average_h2, sphere_average_h4, variance_second_chaos,
};

use crate::error::{Error, Result};
use crate::wave::{FieldSample, QuadratureGrid, WaveModel};

/// A threshold together with the derived effective level and `σ_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub u: f64,
    pub v: f64,
    pub sigma_n: f64,
}

impl ThresholdSpec {
    pub fn new(n: usize, u: f64, vol: f64) -> Result<Self> {
        let v = u * vol.sqrt();
        let nf = n as f64;
        if v.is_nan() || v * v >= nf {
            return Err(Error::Domain(format!("v² = {} must be below N = {n}", v * v)));
        }
        Ok(Self { u, v, sigma_n: ((nf - v * v) / nf).sqrt() })
    }

    /// Half-width `√(N/vol)` of the band of nontrivial thresholds.
    pub fn band(n: usize, vol: f64) -> f64 {
        (n as f64 / vol).sqrt()
    }
}

/// Node set `A` of a quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    members: Vec<bool>,
}

impl RegionMask {
    pub fn full(grid: &QuadratureGrid) -> Self {
        Self { members: vec![true; grid.len()] }
    }

    /// Northern hemisphere `z > 0` on the sphere, `x < 1/2` on the torus.
    pub fn hemisphere(grid: &QuadratureGrid) -> Self {
        let sphere = grid.points.iter().any(|p| p[2] != 0.0);
        Self::from_fn(grid, |p| if sphere { p[2] > 0.0 } else { p[0] < 0.5 })
    }

    /// Spherical cap of polar angle `angle` around the north pole.
    pub fn polar_cap(grid: &QuadratureGrid, angle: f64) -> Self {
        let c = angle.cos();
        Self::from_fn(grid, |p| p[2] >= c)
    }

    pub fn from_fn(grid: &QuadratureGrid, f: impl Fn(&[f64; 3]) -> bool) -> Self {
        Self { members: grid.points.iter().map(f).collect() }
    }

    pub fn from_flags(members: Vec<bool>) -> Self {
        Self { members }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn volume(&self, grid: &QuadratureGrid) -> f64 {
        self.members.iter().zip(&grid.weights).filter(|(m, _)| **m).map(|(_, w)| w).sum()
    }
}

/// `Σ w_i` over nodes with `values[i] ≥ u`.
pub fn excursion_area_values(values: &[f64], weights: &[f64], u: f64) -> f64 {
    values.iter().zip(weights).filter(|(v, _)| **v >= u).map(|(_, w)| w).sum()
}

pub fn excursion_area(sample: &FieldSample<'_>, u: f64) -> f64 {
    excursion_area_values(&sample.values_on_grid(), &sample.model.grid().weights, u)
}

/// Disjoint-set forest reused across calls.
#[derive(Debug, Default, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn reset(&mut self, n: usize) {
        self.parent.clear();
        self.parent.extend(0..n as u32);
    }

    fn find(&mut self, mut a: u32) -> u32 {
        while self.parent[a as usize] != a {
            let p = self.parent[a as usize];
            self.parent[a as usize] = self.parent[p as usize];
            a = p;
        }
        a
    }

    /// Returns true when `a` and `b` were in different sets.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        true
    }

    /// Connected components of `{i : values[i] ≥ u}` in the graph `edges`.
    pub fn count_components(&mut self, values: &[f64], edges: &[(usize, usize)], u: f64) -> usize {
        self.reset(values.len());
        let mut count = values.iter().filter(|v| **v >= u).count();
        for &(a, b) in edges {
            if values[a] >= u && values[b] >= u && self.union(a as u32, b as u32) {
                count -= 1;
            }
        }
        count
    }
}

pub fn betti0_values(values: &[f64], edges: &[(usize, usize)], u: f64) -> usize {
    UnionFind::default().count_components(values, edges, u)
}

pub fn betti0_count(sample: &FieldSample<'_>, u: f64) -> usize {
    betti0_values(&sample.values_on_grid(), &sample.model.grid().edges(), u)
}

/// Admissible-band helper for a model.
pub fn threshold_band(model: &WaveModel) -> f64 {
    ThresholdSpec::band(model.dim(), model.volume())
}
