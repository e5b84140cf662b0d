use super::{factorial, hermite_fill};
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * z * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Hermite rule for the standard Gaussian weight `φ(x) dx`.
///
/// Nodes are eigenvalues of the Jacobi matrix (off-diagonal `√k`), refined
/// by Newton steps on `H_n`; weights use the Christoffel formula
/// `(n−1)! / (n H_{n−1}(x)²)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));
    let mut h = vec![0.0; n + 1];
    let nfact = factorial(n);
    let mut weights = Vec::with_capacity(n);
    for z in nodes.iter_mut() {
        for _ in 0..3 {
            hermite_fill(*z, &mut h);
            let step = h[n] / (n as f64 * h[n - 1]);
            if !step.is_finite() {
                break;
            }
            *z -= step;
        }
        hermite_fill(*z, &mut h);
        weights.push(nfact / (n as f64 * n as f64 * h[n - 1] * h[n - 1]));
    }
    // Symmetrize to remove eigen-solver asymmetry.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let a = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -a;
        nodes[j] = a;
        let wm = 0.5 * (weights[i] + weights[j]);
        weights[i] = wm;
        weights[j] = wm;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Largest deviation of `∫ H_k H_j φ / √(k! j!)` from `δ_kj` over
/// `k, j ≤ max_k`, using an exact Gauss–Hermite rule.
pub fn hermite_orthogonality_defect(max_k: usize) -> f64 {
    let (x, w) = gauss_hermite(max_k + 1);
    let mut h = vec![0.0; max_k + 1];
    let mut gram = vec![0.0; (max_k + 1) * (max_k + 1)];
    for (&xi, &wi) in x.iter().zip(&w) {
        hermite_fill(xi, &mut h);
        for k in 0..=max_k {
            for j in 0..=max_k {
                gram[k * (max_k + 1) + j] += wi * h[k] * h[j];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for k in 0..=max_k {
        for j in 0..=max_k {
            let norm = (factorial(k) * factorial(j)).sqrt();
            let target = if k == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[k * (max_k + 1) + j] / norm - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for n in 1..40 {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for p in 0..(2 * n) {
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
                assert!((got - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn large_legendre_rule() {
        let (x, w) = gauss_legendre(600);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn hermite_rule_moments() {
        // E g^{2k} = (2k-1)!!
        let (x, w) = gauss_hermite(10);
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        let mut dfact = 1.0;
        for k in 0..10 {
            if k > 0 {
                dfact *= (2 * k - 1) as f64;
            }
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(2 * k)).sum();
            assert_relative_eq!(got, dfact, max_relative = 1e-12);
        }
    }

    #[test]
    fn hermite_orthogonality() {
        assert!(hermite_orthogonality_defect(12) < 1e-10);
    }
}
