use crate::special::gauss_legendre;
use std::f64::consts::PI;

/// Quadrature nodes with weights summing to the manifold volume, plus the
/// neighbour graph used for component counting.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub adjacency: Vec<Vec<usize>>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        crate::stats::pairwise_sum(&self.weights)
    }

    /// Each undirected edge once, as `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nbrs) in self.adjacency.iter().enumerate() {
            for &b in nbrs {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn adjacency_is_symmetric(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(a, nbrs)| nbrs.iter().all(|&b| self.adjacency[b].contains(&a)))
    }

    /// Gauss–Legendre rings in colatitude (north to south) times `2·lat`
    /// equispaced longitudes, followed by two zero-weight pole nodes
    /// (north, then south) joined to every node of the adjacent ring.
    pub fn sphere(lat_order: usize) -> Self {
        let nlon = 2 * lat_order;
        let (x, w) = gauss_legendre(lat_order);
        let mut points = Vec::with_capacity(lat_order * nlon + 2);
        let mut weights = Vec::with_capacity(lat_order * nlon + 2);
        for r in 0..lat_order {
            // Descending cos θ: ring 0 is nearest the north pole.
            let z = x[lat_order - 1 - r];
            let s = (1.0 - z * z).sqrt();
            let wr = w[lat_order - 1 - r] * 2.0 * PI / nlon as f64;
            for j in 0..nlon {
                let phi = 2.0 * PI * j as f64 / nlon as f64;
                points.push([s * phi.cos(), s * phi.sin(), z]);
                weights.push(wr);
            }
        }
        points.push([0.0, 0.0, 1.0]);
        points.push([0.0, 0.0, -1.0]);
        weights.push(0.0);
        weights.push(0.0);
        let north = lat_order * nlon;
        let south = north + 1;
        let idx = |r: usize, j: usize| r * nlon + (j % nlon);
        let mut adjacency = vec![Vec::with_capacity(4); lat_order * nlon + 2];
        for r in 0..lat_order {
            for j in 0..nlon {
                let a = idx(r, j);
                adjacency[a].push(idx(r, j + nlon - 1));
                adjacency[a].push(idx(r, j + 1));
                if r > 0 {
                    adjacency[a].push(idx(r - 1, j));
                }
                if r + 1 < lat_order {
                    adjacency[a].push(idx(r + 1, j));
                }
            }
        }
        for j in 0..nlon {
            adjacency[north].push(idx(0, j));
            adjacency[idx(0, j)].push(north);
            adjacency[south].push(idx(lat_order - 1, j));
            adjacency[idx(lat_order - 1, j)].push(south);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        Self { points, weights, adjacency }
    }

    /// Uniform `m × m` lattice on `[0,1)²` with periodic 4-neighbour
    /// adjacency; points carry `z = 0`.
    pub fn torus(m: usize) -> Self {
        let mut points = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                points.push([i as f64 / m as f64, j as f64 / m as f64, 0.0]);
            }
        }
        let weights = vec![1.0 / (m * m) as f64; m * m];
        let idx = |i: usize, j: usize| (i % m) * m + (j % m);
        let mut adjacency = vec![Vec::with_capacity(4); m * m];
        for i in 0..m {
            for j in 0..m {
                let a = idx(i, j);
                let mut nbrs = vec![idx(i + 1, j), idx(i + m - 1, j), idx(i, j + 1), idx(i, j + m - 1)];
                nbrs.sort_unstable();
                nbrs.dedup();
                nbrs.retain(|&b| b != a);
                adjacency[a] = nbrs;
            }
        }
        Self { points, weights, adjacency }
    }
}
