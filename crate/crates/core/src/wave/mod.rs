//! Random-wave ensembles on `S²` (degree-ℓ spherical harmonics) and `T²`
//! (arithmetic waves on one or more lattice shells).
//!
//! A model fixes an orthonormal basis `Y_1..Y_N` with constant norm
//! `‖Y(x)‖² = N / vol(M)`. A coefficient vector `γ ~ N(0, I_N)` defines the
//! Gaussian wave `f = ⟨γ, Y⟩ √(vol/N)` (unit pointwise variance) and the
//! uniform wave `f̃ = ⟨γ/‖γ‖, Y⟩` (unit `L²` norm).

mod grid;
mod torus;

pub use grid::QuadratureGrid;
pub use torus::{canonical_representatives, lattice_points};

use crate::error::{Error, Result};
use crate::rng::{gaussian_vec, stream_rng, study_tag};
use crate::special::harmonics::legendre_unchecked;
use crate::special::spherical_harmonics_degree;
use crate::stats::{dot, norm};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

const AUDIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Sphere,
    Torus,
}

impl Manifold {
    pub fn name(self) -> &'static str {
        match self {
            Manifold::Sphere => "sphere",
            Manifold::Torus => "torus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Gaussian,
    Uniform,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Gaussian => "gaussian",
            FieldKind::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone)]
enum Basis {
    Sphere { degree: usize },
    Torus { reps: Vec<[i64; 2]>, shells: Vec<u64> },
}

/// An orthonormal basis family on a manifold together with its quadrature
/// grid and the basis tabulated at the grid nodes.
#[derive(Debug, Clone)]
pub struct WaveModel {
    basis: Basis,
    n: usize,
    volume: f64,
    grid: QuadratureGrid,
    nodes: Vec<f64>,
    grads: Option<Vec<f64>>,
}

/// Degree-ℓ real spherical harmonics on a Gauss–Legendre × uniform grid.
pub fn build_sphere_model(l: usize, lat_order: usize) -> Result<WaveModel> {
    if l == 0 {
        return Err(Error::Model("degree must be at least 1".into()));
    }
    if lat_order < 2 * l + 2 {
        return Err(Error::audit("quadrature order", format!("lat_order {lat_order} below 2ℓ+2 = {}", 2 * l + 2)));
    }
    let grid = QuadratureGrid::sphere(lat_order);
    let n = 2 * l + 1;
    let mut nodes = vec![0.0; grid.len() * n];
    for (p, row) in grid.points.iter().zip(nodes.chunks_exact_mut(n)) {
        let (th, ph) = angles(p);
        spherical_harmonics_degree(l, th, ph, row);
    }
    let model = WaveModel { basis: Basis::Sphere { degree: l }, n, volume: 4.0 * PI, grid, nodes, grads: None };
    model.audit()?;
    Ok(model)
}

/// Arithmetic waves at frequency `n` (one lattice shell).
pub fn build_torus_model(n: u64, grid_res: usize) -> Result<WaveModel> {
    build_torus_window(&[n], grid_res)
}

/// Arithmetic waves over the union of the given lattice shells.
pub fn build_torus_window(shells: &[u64], grid_res: usize) -> Result<WaveModel> {
    if shells.is_empty() {
        return Err(Error::Model("empty frequency window".into()));
    }
    let mut shells = shells.to_vec();
    shells.sort_unstable();
    shells.dedup();
    let mut reps = Vec::new();
    for &s in &shells {
        reps.extend(canonical_representatives(s)?);
    }
    let n = 2 * reps.len();
    let grid = QuadratureGrid::torus(grid_res);
    let mut nodes = vec![0.0; grid.len() * n];
    let mut grads = vec![0.0; grid.len() * n * 2];
    for (i, p) in grid.points.iter().enumerate() {
        for (k, lam) in reps.iter().enumerate() {
            let w = 2.0 * PI;
            let arg = w * (lam[0] as f64 * p[0] + lam[1] as f64 * p[1]);
            let (s, c) = arg.sin_cos();
            nodes[i * n + 2 * k] = SQRT_2 * c;
            nodes[i * n + 2 * k + 1] = SQRT_2 * s;
            for d in 0..2 {
                grads[(i * n + 2 * k) * 2 + d] = -SQRT_2 * w * lam[d] as f64 * s;
                grads[(i * n + 2 * k + 1) * 2 + d] = SQRT_2 * w * lam[d] as f64 * c;
            }
        }
    }
    let model = WaveModel { basis: Basis::Torus { reps, shells }, n, volume: 1.0, grid, nodes, grads: Some(grads) };
    model.audit()?;
    model.audit_homothetic()?;
    Ok(model)
}

fn angles(p: &[f64; 3]) -> (f64, f64) {
    (p[2].clamp(-1.0, 1.0).acos(), p[1].atan2(p[0]))
}

impl WaveModel {
    pub fn manifold(&self) -> Manifold {
        match self.basis {
            Basis::Sphere { .. } => Manifold::Sphere,
            Basis::Torus { .. } => Manifold::Torus,
        }
    }

    /// Basis size `N`.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// Sphere degree ℓ, if any.
    pub fn degree(&self) -> Option<usize> {
        match self.basis {
            Basis::Sphere { degree } => Some(degree),
            Basis::Torus { .. } => None,
        }
    }

    /// Torus lattice shells, if any.
    pub fn shells(&self) -> Option<&[u64]> {
        match &self.basis {
            Basis::Torus { shells, .. } => Some(shells),
            Basis::Sphere { .. } => None,
        }
    }

    /// Short label: `ℓ` for the sphere, the shell list joined by `+` for
    /// the torus.
    pub fn param_label(&self) -> String {
        match &self.basis {
            Basis::Sphere { degree } => degree.to_string(),
            Basis::Torus { shells, .. } => shells.iter().map(u64::to_string).collect::<Vec<_>>().join("+"),
        }
    }

    /// Laplace eigenvalue of basis element `j` (`ℓ(ℓ+1)` or `4π²|λ|²`).
    pub fn eigenvalue(&self, j: usize) -> f64 {
        match &self.basis {
            Basis::Sphere { degree } => (degree * (degree + 1)) as f64,
            Basis::Torus { reps, .. } => {
                let lam = reps[j / 2];
                4.0 * PI * PI * (lam[0] * lam[0] + lam[1] * lam[1]) as f64
            }
        }
    }

    /// `√(vol/N)`: the map from `⟨γ, Y⟩` to the unit-variance field.
    pub fn gaussian_scale(&self) -> f64 {
        (self.volume / self.n as f64).sqrt()
    }

    /// Upper bound `√(N/vol)` of `|f̃|`.
    pub fn uniform_bound(&self) -> f64 {
        (self.n as f64 / self.volume).sqrt()
    }

    /// Basis values at grid node `i`.
    pub fn basis_row(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    /// Basis gradients at torus node `i`, interleaved `(∂_x, ∂_y)` per element.
    pub fn gradient_row(&self, i: usize) -> Option<&[f64]> {
        self.grads.as_ref().map(|g| &g[i * self.n * 2..(i + 1) * self.n * 2])
    }

    /// Basis values at an arbitrary point (unit vector on `S²`, or
    /// `(x, y, ·)` on `T²`).
    pub fn basis_eval(&self, p: &[f64; 3], out: &mut [f64]) {
        match &self.basis {
            Basis::Sphere { degree } => {
                let (th, ph) = angles(p);
                spherical_harmonics_degree(*degree, th, ph, out);
            }
            Basis::Torus { reps, .. } => {
                for (k, lam) in reps.iter().enumerate() {
                    let (s, c) = (2.0 * PI * (lam[0] as f64 * p[0] + lam[1] as f64 * p[1])).sin_cos();
                    out[2 * k] = SQRT_2 * c;
                    out[2 * k + 1] = SQRT_2 * s;
                }
            }
        }
    }

    pub fn basis_at(&self, p: &[f64; 3]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.basis_eval(p, &mut out);
        out
    }

    /// `⟨γ, Y(x_i)⟩` at every grid node.
    pub fn project_on_grid(&self, gamma: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.nodes.chunks_exact(self.n)) {
            *o = dot(row, gamma);
        }
    }

    /// Field values at every grid node for the given kind.
    pub fn field_on_grid(&self, gamma: &[f64], kind: FieldKind, out: &mut [f64]) {
        self.project_on_grid(gamma, out);
        let s = match kind {
            FieldKind::Gaussian => self.gaussian_scale(),
            FieldKind::Uniform => 1.0 / norm(gamma),
        };
        for v in out.iter_mut() {
            *v *= s;
        }
    }

    /// `k(x, z) = E f(x) f(z)`.
    pub fn covariance_kernel(&self, x: &[f64; 3], z: &[f64; 3]) -> f64 {
        match &self.basis {
            Basis::Sphere { degree } => {
                let c = x[0] * z[0] + x[1] * z[1] + x[2] * z[2];
                legendre_unchecked(*degree, c.clamp(-1.0, 1.0))
            }
            Basis::Torus { .. } => {
                let (a, b) = (self.basis_at(x), self.basis_at(z));
                self.volume / self.n as f64 * dot(&a, &b)
            }
        }
    }

    /// Gram matrix of the basis under grid quadrature.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        for (row, &w) in self.nodes.chunks_exact(n).zip(&self.grid.weights) {
            if w == 0.0 {
                continue;
            }
            for a in 0..n {
                let wa = w * row[a];
                for b in a..n {
                    g[a * n + b] += wa * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                g[a * n + b] = g[b * n + a];
            }
        }
        g
    }

    fn audit(&self) -> Result<()> {
        let tw = self.grid.total_weight();
        if (tw - self.volume).abs() > 1e-10 * self.volume {
            return Err(Error::audit("grid weights", format!("sum {tw} != vol {}", self.volume)));
        }
        if !self.grid.adjacency_is_symmetric() {
            return Err(Error::audit("grid adjacency", "not symmetric"));
        }
        let n = self.n;
        let g = self.gram();
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                if (g[a * n + b] - target).abs() > AUDIT_TOL {
                    return Err(Error::audit(
                        "orthonormality",
                        format!("Gram entry ({a},{b}) = {:.3e}; refine the grid", g[a * n + b]),
                    ));
                }
            }
        }
        let target = n as f64 / self.volume;
        for (i, row) in self.nodes.chunks_exact(n).enumerate() {
            let s = dot(row, row);
            if (s / target - 1.0).abs() > AUDIT_TOL {
                return Err(Error::audit("constant norm", format!("‖Y(x_{i})‖² = {s}, expected {target}")));
            }
        }
        Ok(())
    }

    /// `Σ_j ∇Y_j ∇Y_jᵀ` must be the same multiple of the identity at every
    /// node.
    fn audit_homothetic(&self) -> Result<()> {
        let Some(grads) = &self.grads else { return Ok(()) };
        let n = self.n;
        let mut reference = None;
        for i in 0..self.grid.len() {
            let g = &grads[i * n * 2..(i + 1) * n * 2];
            let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
            for j in 0..n {
                let (gx, gy) = (g[2 * j], g[2 * j + 1]);
                xx += gx * gx;
                yy += gy * gy;
                xy += gx * gy;
            }
            let scale = xx.max(yy);
            if (xx - yy).abs() > 1e-10 * scale || xy.abs() > 1e-10 * scale {
                return Err(Error::audit("homotheticity", format!("gradient Gram [{xx}, {xy}; {yy}] at node {i}")));
            }
            let c = *reference.get_or_insert(xx);
            if (xx - c).abs() > 1e-10 * c {
                return Err(Error::audit("homotheticity", format!("gradient scale varies: {xx} vs {c}")));
            }
        }
        Ok(())
    }
}

/// One realization of the coefficient vector.
#[derive(Debug, Clone)]
pub struct FieldSample<'a> {
    pub model: &'a WaveModel,
    pub gamma: Vec<f64>,
    pub kind: FieldKind,
}

/// Draws `γ ~ N(0, I_N)` from the stream `(seed, "field", 0)`.
pub fn sample_field(model: &WaveModel, kind: FieldKind, seed: u64) -> FieldSample<'_> {
    let mut rng = stream_rng(seed, study_tag("field"), 0);
    FieldSample { model, gamma: gaussian_vec(&mut rng, model.dim()), kind }
}

impl<'a> FieldSample<'a> {
    pub fn new(model: &'a WaveModel, gamma: Vec<f64>, kind: FieldKind) -> Self {
        assert_eq!(gamma.len(), model.dim(), "coefficient vector length");
        Self { model, gamma, kind }
    }

    fn scale(&self) -> f64 {
        match self.kind {
            FieldKind::Gaussian => self.model.gaussian_scale(),
            FieldKind::Uniform => 1.0 / norm(&self.gamma),
        }
    }

    /// `f(x)` or `f̃(x)` according to the kind.
    pub fn eval(&self, p: &[f64; 3]) -> f64 {
        dot(&self.model.basis_at(p), &self.gamma) * self.scale()
    }

    pub fn values_on_grid(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.model.grid().len()];
        self.model.field_on_grid(&self.gamma, self.kind, &mut out);
        out
    }

    /// `L²` norm of the field, computed in coefficient space.
    pub fn l2_norm(&self) -> f64 {
        norm(&self.gamma) * self.scale()
    }

    /// `γ_x = γ − f(x) y(x)` with `y(x) = Y(x) √(vol/N)`, where `f` is the
    /// Gaussian field built from the same `γ`.
    pub fn gamma_x(&self, p: &[f64; 3]) -> Vec<f64> {
        let s = self.model.gaussian_scale();
        let y: Vec<f64> = self.model.basis_at(p).into_iter().map(|v| v * s).collect();
        let f = dot(&y, &self.gamma);
        self.gamma.iter().zip(&y).map(|(g, yv)| g - f * yv).collect()
    }

    /// Writes `node_index,x,y,z,value` rows for every grid node.
    pub fn write_snapshot_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "node_index,x,y,z,value")?;
        for (i, (p, v)) in self.model.grid().points.iter().zip(self.values_on_grid()).enumerate() {
            writeln!(w, "{i},{},{},{},{}", p[0], p[1], p[2], v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Ensemble;
    use approx::assert_relative_eq;

    fn point(th: f64, ph: f64) -> [f64; 3] {
        [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
    }

    #[test]
    fn sphere_model_examples() {
        let m = build_sphere_model(1, 4).unwrap();
        assert_eq!(m.dim(), 3);
        for i in 0..m.grid().len() {
            let r = m.basis_row(i);
            assert_relative_eq!(dot(r, r), 3.0 / (4.0 * PI), max_relative = 1e-12);
        }
        assert_eq!(build_sphere_model(5, 12).unwrap().dim(), 11);
        let m2 = build_sphere_model(2, 6).unwrap();
        let x = point(0.3, 1.0);
        assert_relative_eq!(m2.covariance_kernel(&x, &x), 1.0, epsilon = 1e-14);
        assert!(build_sphere_model(5, 11).is_err());
        assert!(build_sphere_model(0, 4).is_err());
    }

    #[test]
    fn sphere_orthonormality_up_to_degree_twenty() {
        for l in [3, 10, 20] {
            build_sphere_model(l, 2 * l + 2).unwrap();
        }
    }

    #[test]
    fn torus_model_examples() {
        assert_eq!(build_torus_model(1, 8).unwrap().dim(), 4);
        assert_eq!(build_torus_model(5, 12).unwrap().dim(), 8);
        assert!(build_torus_model(3, 8).is_err());
        // Too coarse a grid to integrate the products exactly.
        assert!(build_torus_model(25, 6).is_err());
        let w = build_torus_window(&[2, 1], 16).unwrap();
        assert_eq!(w.dim(), 8);
        assert_eq!(w.param_label(), "1+2");
    }

    #[test]
    fn covariance_examples() {
        let m = build_sphere_model(2, 6).unwrap();
        let k = m.covariance_kernel(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        assert_relative_eq!(k, -0.5, epsilon = 1e-14);
        let t = build_torus_model(1, 8).unwrap();
        assert!(t.covariance_kernel(&[0.5, 0.0, 0.0], &[0.0, 0.0, 0.0]).abs() < 1e-14);
        assert_relative_eq!(t.covariance_kernel(&[0.3, 0.1, 0.0], &[0.3, 0.1, 0.0]), 1.0, epsilon = 1e-14);
        // Sphere kernel agrees with the basis-sum form.
        let (x, z) = (point(0.4, 0.2), point(2.0, -1.3));
        let direct = 4.0 * PI / 5.0 * dot(&m.basis_at(&x), &m.basis_at(&z));
        assert_relative_eq!(m.covariance_kernel(&x, &z), direct, epsilon = 1e-13);
    }

    #[test]
    fn uniform_field_properties() {
        let m = build_sphere_model(4, 10).unwrap();
        let s = sample_field(&m, FieldKind::Uniform, 9);
        assert_relative_eq!(s.l2_norm(), 1.0, epsilon = 1e-14);
        // Quadrature of f̃² reproduces the coefficient norm.
        let v = s.values_on_grid();
        let q: f64 = v.iter().zip(&m.grid().weights).map(|(a, w)| w * a * a).sum();
        assert_relative_eq!(q, 1.0, epsilon = 1e-10);
        let bound = m.uniform_bound();
        for k in 0..1000 {
            let p = point(0.003 * k as f64, 0.017 * k as f64);
            assert!(s.eval(&p).abs() <= bound + 1e-12);
        }
    }

    #[test]
    fn single_coefficient_uniform_field() {
        let m = build_sphere_model(3, 8).unwrap();
        let mut gamma = vec![0.0; 7];
        gamma[2] = 3.7;
        let s = FieldSample::new(&m, gamma, FieldKind::Uniform);
        let p = point(1.1, 0.4);
        assert_relative_eq!(s.eval(&p), m.basis_at(&p)[2], epsilon = 1e-14);
    }

    #[test]
    fn gamma_x_properties() {
        let m = build_sphere_model(5, 12).unwrap();
        let s = sample_field(&m, FieldKind::Gaussian, 4);
        let p = point(0.9, 2.2);
        let gx = s.gamma_x(&p);
        let y = m.basis_at(&p);
        assert!(dot(&gx, &y).abs() < 1e-10 * norm(&s.gamma));
        let f = s.eval(&p);
        let gxn2 = dot(&gx, &gx);
        let c = m.uniform_bound();
        let recon = c * f / (f * f + gxn2).sqrt();
        let uniform = FieldSample::new(&m, s.gamma.clone(), FieldKind::Uniform).eval(&p);
        assert_relative_eq!(recon, uniform, epsilon = 1e-10);
        // A coefficient vector orthogonal to Y(x) gives f(x) = 0 and γ_x = γ.
        let yn = norm(&y);
        let mut g = s.gamma.clone();
        let proj = dot(&g, &y) / (yn * yn);
        for (gi, yi) in g.iter_mut().zip(&y) {
            *gi -= proj * yi;
        }
        let s0 = FieldSample::new(&m, g.clone(), FieldKind::Gaussian);
        for (a, b) in s0.gamma_x(&p).iter().zip(&g) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_field_moments() {
        let m = build_sphere_model(5, 12).unwrap();
        let (x, z) = (point(0.5, 0.1), point(1.4, 2.0));
        let (bx, bz) = (m.basis_at(&x), m.basis_at(&z));
        let s = m.gaussian_scale();
        let kxz = m.covariance_kernel(&x, &z);
        let ens = Ensemble::new(21, 1);
        let mom = ens.moments(100_000, 6, |_, rng, out| {
            let g = gaussian_vec(rng, 11);
            let (fx, fz) = (s * dot(&bx, &g), s * dot(&bz, &g));
            let gn = norm(&g);
            let mut gx = g.clone();
            let y: Vec<f64> = bx.iter().map(|v| v * s).collect();
            for (a, b) in gx.iter_mut().zip(&y) {
                *a -= fx * b;
            }
            let gxn2 = dot(&gx, &gx);
            out[0] = fx * fx;
            out[1] = fx * fz;
            out[2] = (dot(&bx, &g) / gn).powi(2);
            out[3] = gxn2;
            out[4] = fx * (gxn2 - 10.0);
            out[5] = (g[0] / gn).powi(2);
        });
        assert!((mom.mean[0] - 1.0).abs() < 4.0 * mom.stderr(0));
        assert!((mom.mean[1] - kxz).abs() < 4.0 * mom.stderr(1));
        assert!((mom.mean[2] - 1.0 / (4.0 * PI)).abs() < 4.0 * mom.stderr(2));
        assert!((mom.mean[3] - 10.0).abs() < 4.0 * mom.stderr(3));
        assert!(mom.mean[4].abs() < 4.0 * mom.stderr(4));
        // Beta(1/2, (N-1)/2) has mean 1/N.
        assert!((mom.mean[5] - 1.0 / 11.0).abs() < 4.0 * mom.stderr(5));
    }

    #[test]
    fn snapshot_csv_shape() {
        let m = build_torus_model(1, 8).unwrap();
        let s = sample_field(&m, FieldKind::Gaussian, 1);
        let mut buf = Vec::new();
        s.write_snapshot_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "node_index,x,y,z,value");
        assert_eq!(lines.len(), 65);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 5));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = build_sphere_model(2, 6).unwrap();
        assert_eq!(sample_field(&m, FieldKind::Gaussian, 3).gamma, sample_field(&m, FieldKind::Gaussian, 3).gamma);
        assert_ne!(sample_field(&m, FieldKind::Gaussian, 3).gamma, sample_field(&m, FieldKind::Gaussian, 4).gamma);
    }
}
