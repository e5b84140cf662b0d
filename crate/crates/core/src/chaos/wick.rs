use super::tensor::{MultiIndex, SymmetricTensor};
use crate::error::{Error, Result};
use crate::special::{cqn_constants, hermite};

/// Largest order accepted by [`product_to_wick`].
pub const MAX_PARTITION_ORDER: usize = 12;

/// Wick product `:γ^{i_1}···γ^{i_q}: = Π_ℓ H_{α_ℓ}(γ^ℓ)`.
pub fn wick_eval(indices: &[usize], gamma: &[f64]) -> Result<f64> {
    let alpha = MultiIndex::from_indices(indices, gamma.len())?;
    Ok(wick_eval_counts(&alpha.counts, gamma))
}

pub(crate) fn wick_eval_counts(counts: &[u32], gamma: &[f64]) -> f64 {
    counts.iter().zip(gamma).filter(|(&c, _)| c > 0).map(|(&c, &g)| hermite(c as usize, g)).product()
}

/// `E[:γ^{i}: :γ^{j}:]`, equal to `α!` when the multiplicity vectors agree
/// and zero otherwise.
pub fn wick_covariance(idx1: &[usize], idx2: &[usize]) -> f64 {
    let mut a = idx1.to_vec();
    let mut b = idx2.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return 0.0;
    }
    let n = a.last().map_or(0, |&m| m + 1);
    MultiIndex::from_indices(&a, n).expect("in range").factorial()
}

/// `E[XY] = q! ⟨K, H⟩` for the chaos elements with kernels `K`, `H`.
pub fn tensor_inner_isometry(k: &SymmetricTensor, h: &SymmetricTensor) -> Result<f64> {
    Ok(crate::special::factorial(k.order()) * k.inner(h)?)
}

/// Splits `K` into its traceless part and the orthogonal complement.
///
/// Orders `q ≤ 2` use `K − (Tr K / N) I`. Higher orders solve
/// `(Tr Tr*) y = Tr K` by conjugate gradients and set `Tr-part = Tr* y`,
/// which is the orthogonal projection onto the range of `Tr*`, the
/// complement of the traceless subspace.
pub fn traceless_project(k: &SymmetricTensor) -> (SymmetricTensor, SymmetricTensor) {
    let q = k.order();
    let n = k.dim();
    match q {
        0 | 1 => (k.clone(), SymmetricTensor::zeros(q, n)),
        2 => {
            let tr = k.trace().expect("order 2").values()[0];
            let part = SymmetricTensor::identity(n).scaled(tr / n as f64);
            (k.sub(&part).expect("same shape"), part)
        }
        _ => {
            let b = k.trace().expect("order ≥ 2");
            let y = conjugate_gradient(&b, |v| SymmetricTensor::trace_adjoint(v).trace().expect("order ≥ 2"));
            let part = SymmetricTensor::trace_adjoint(&y);
            (k.sub(&part).expect("same shape"), part)
        }
    }
}

fn conjugate_gradient(b: &SymmetricTensor, apply: impl Fn(&SymmetricTensor) -> SymmetricTensor) -> SymmetricTensor {
    let bnorm = b.norm();
    let mut x = b.scaled(0.0);
    if bnorm == 0.0 {
        return x;
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.inner(&r).expect("same shape");
    for _ in 0..(4 * b.values().len() + 20) {
        let ap = apply(&p);
        let alpha = rr / p.inner(&ap).expect("same shape");
        x = x.add(&p.scaled(alpha)).expect("same shape");
        r = r.sub(&ap.scaled(alpha)).expect("same shape");
        let rr_new = r.inner(&r).expect("same shape");
        if rr_new.sqrt() <= 1e-15 * bnorm {
            break;
        }
        p = r.add(&p.scaled(rr_new / rr)).expect("same shape");
        rr = rr_new;
    }
    x
}

/// Largest absolute pair contraction of `K`.
pub fn max_contraction(k: &SymmetricTensor) -> f64 {
    if k.order() < 2 {
        0.0
    } else {
        k.trace().expect("order ≥ 2").max_abs()
    }
}

/// Number of partitions of `[q]` into blocks of size one or two
/// (telephone numbers), memoized.
pub fn pair_partition_count(q: usize) -> u64 {
    let mut t = vec![1u64, 1];
    for m in 2..=q {
        let next = t[m - 1] + (m as u64 - 1) * t[m - 2];
        t.push(next);
    }
    t[q]
}

/// One partition of `[q]` into pairs and singletons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPartition {
    pub pairs: Vec<(usize, usize)>,
    pub singletons: Vec<usize>,
}

/// All partitions of `{0, ..., q−1}` with blocks of size at most two.
pub fn pair_partitions(q: usize) -> Result<Vec<PairPartition>> {
    if q > MAX_PARTITION_ORDER {
        return Err(Error::Infeasible(format!("order {q} above partition cap {MAX_PARTITION_ORDER}")));
    }
    fn rec(rest: &[usize], cur: &mut PairPartition, out: &mut Vec<PairPartition>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(cur.clone());
            return;
        };
        cur.singletons.push(first);
        rec(tail, cur, out);
        cur.singletons.pop();
        for (k, &partner) in tail.iter().enumerate() {
            let mut remaining = tail.to_vec();
            remaining.remove(k);
            cur.pairs.push((first, partner));
            rec(&remaining, cur, out);
            cur.pairs.pop();
        }
    }
    let all: Vec<usize> = (0..q).collect();
    let mut out = Vec::with_capacity(pair_partition_count(q) as usize);
    rec(&all, &mut PairPartition { pairs: vec![], singletons: vec![] }, &mut out);
    Ok(out)
}

/// Evaluates the plain product `γ_{i_1}···γ_{i_q}` through its expansion
/// `Σ_π Π_{pairs} δ · :singletons:` over pair partitions.
pub fn product_to_wick(indices: &[usize], gamma: &[f64]) -> Result<f64> {
    let q = indices.len();
    for &i in indices {
        if i >= gamma.len() {
            return Err(Error::Index(format!("index {i} out of range for dimension {}", gamma.len())));
        }
    }
    let mut total = 0.0;
    let mut single = Vec::with_capacity(q);
    for p in pair_partitions(q)? {
        if p.pairs.iter().any(|&(a, b)| indices[a] != indices[b]) {
            continue;
        }
        single.clear();
        single.extend(p.singletons.iter().map(|&s| indices[s]));
        total += wick_eval(&single, gamma)?;
    }
    Ok(total)
}

/// Both sides of `Σ K(i) :γ^i: = Σ K(i) γ^i` for a traceless `K`.
pub fn wick_identity_check(k: &SymmetricTensor, gamma: &[f64]) -> Result<(f64, f64)> {
    if gamma.len() != k.dim() {
        return Err(Error::Shape(format!("γ has length {}, tensor dimension {}", gamma.len(), k.dim())));
    }
    let defect = max_contraction(k);
    if defect > 1e-10 * k.max_abs().max(1.0) {
        return Err(Error::Domain(format!("tensor is not traceless (contraction {defect:.3e})")));
    }
    let layout = k.layout();
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (c, &v) in k.values().iter().enumerate() {
        let counts = &layout.multiplicity(c).counts;
        let w = layout.orbit(c) * v;
        lhs += w * wick_eval_counts(counts, gamma);
        rhs += w * counts.iter().zip(gamma).map(|(&a, &g)| g.powi(a as i32)).product::<f64>();
    }
    Ok((lhs, rhs))
}

/// Degree-`q` spherical-harmonic component, at the unit vector `v`, of the
/// 0-homogeneous functional whose `q`-th chaos kernel is `K`:
/// `c_{q,N} Σ K^{TL}(i) v_{i_1}···v_{i_q}`.
pub fn harmonic_correspondence(k: &SymmetricTensor, v: &[f64]) -> Result<f64> {
    if v.len() != k.dim() {
        return Err(Error::Shape(format!("v has length {}, tensor dimension {}", v.len(), k.dim())));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("direction has norm {norm}")));
    }
    let q = k.order();
    let (tl, _) = traceless_project(k);
    let layout = tl.layout();
    let mut acc = 0.0;
    for (c, &val) in tl.values().iter().enumerate() {
        let mono: f64 = layout.multiplicity(c).counts.iter().zip(v).map(|(&a, &x)| x.powi(a as i32)).product();
        acc += layout.orbit(c) * val * mono;
    }
    let cq = if q == 0 { 1.0 } else { cqn_constants(q, k.dim()).0 };
    Ok(cq * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::TensorLayout;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_tensor(q: usize, n: usize, rng: &mut ChaCha8Rng) -> SymmetricTensor {
        let layout = TensorLayout::new(q, n);
        let vals = (0..layout.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        SymmetricTensor::from_layout(layout, vals).unwrap()
    }

    #[test]
    fn wick_examples() {
        assert_eq!(wick_eval(&[0, 0], &[0.0, 0.0]).unwrap(), -1.0);
        assert_eq!(wick_eval(&[0, 1], &[1.5, -2.0, 0.3]).unwrap(), -3.0);
        let (a, b) = (0.7, -1.2);
        assert_relative_eq!(wick_eval(&[0, 0, 1], &[a, b]).unwrap(), (a * a - 1.0) * b, epsilon = 1e-15);
    }

    #[test]
    fn covariance_examples() {
        assert_eq!(wick_covariance(&[0, 0], &[0, 0]), 2.0);
        assert_eq!(wick_covariance(&[0, 1], &[1, 0]), 1.0);
        assert_eq!(wick_covariance(&[0, 0], &[1, 1]), 0.0);
        assert_eq!(wick_covariance(&[2, 2, 2, 0], &[2, 0, 2, 2]), 6.0);
    }

    #[test]
    fn isometry_examples() {
        let mut h2 = SymmetricTensor::zeros(2, 3);
        h2.set(&[0, 0], 1.0);
        assert_eq!(tensor_inner_isometry(&h2, &h2).unwrap(), 2.0);
        let mut cross = SymmetricTensor::zeros(2, 3);
        cross.set(&[0, 1], 0.5);
        assert_eq!(tensor_inner_isometry(&cross, &h2).unwrap(), 0.0);
        assert!(tensor_inner_isometry(&h2, &SymmetricTensor::zeros(2, 4)).is_err());
    }

    #[test]
    fn traceless_examples() {
        let id = SymmetricTensor::identity(4);
        let (tl, tr) = traceless_project(&id);
        assert!(tl.max_abs() < 1e-15);
        assert_eq!(tr, id);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_tensor(1, 5, &mut rng);
        let (tl, tr) = traceless_project(&v);
        assert_eq!(tl, v);
        assert_eq!(tr.max_abs(), 0.0);
        let k = random_tensor(3, 3, &mut rng);
        let (tl, _) = traceless_project(&k);
        assert!(max_contraction(&tl) <= 1e-10);
    }

    #[test]
    fn partition_counts() {
        let expected = [1u64, 1, 2, 4, 10, 26, 76, 232, 764, 2620, 9496, 35696, 140152];
        for (q, &e) in expected.iter().enumerate() {
            assert_eq!(pair_partition_count(q), e);
            assert_eq!(pair_partitions(q).unwrap().len() as u64, e);
        }
        assert!(pair_partitions(13).is_err());
    }

    #[test]
    fn product_examples() {
        let g = [0.9, -0.4, 1.7];
        assert_relative_eq!(product_to_wick(&[0, 0], &g).unwrap(), 0.81, epsilon = 1e-14);
        assert_relative_eq!(product_to_wick(&[0, 1, 2], &g).unwrap(), 0.9 * -0.4 * 1.7, epsilon = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let direct = g[0] * g[0] * g[1] * g[1];
            assert!((product_to_wick(&[0, 0, 1, 1], &g).unwrap() - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn wick_identity_examples() {
        let mut k = SymmetricTensor::zeros(2, 2);
        k.set(&[0, 0], 1.0);
        k.set(&[1, 1], -1.0);
        let (l, r) = wick_identity_check(&k, &[0.3, -1.1]).unwrap();
        assert_relative_eq!(l, r, epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (q, n) in [(3, 3), (4, 4)] {
            let (tl, _) = traceless_project(&random_tensor(q, n, &mut rng));
            for _ in 0..100 {
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let (l, r) = wick_identity_check(&tl, &g).unwrap();
                assert!((l - r).abs() <= 1e-10 * tl.norm() * (1.0 + crate::stats::norm(&g)).powi(q as i32));
            }
        }
        assert!(wick_identity_check(&SymmetricTensor::identity(3), &[0.0; 3]).is_err());
    }

    #[test]
    fn correspondence_examples() {
        // Footnote functional: K2 = diag(1/4, -1/4) at N = 2 gives cos 2t.
        let mut k = SymmetricTensor::zeros(2, 2);
        k.set(&[0, 0], 0.25);
        k.set(&[1, 1], -0.25);
        for t in [0.0, 0.4, 1.3, 2.9] {
            let got = harmonic_correspondence(&k, &[f64::cos(t), f64::sin(t)]).unwrap();
            assert_relative_eq!(got, (2.0 * t).cos(), epsilon = 1e-14);
        }
        // Pure trace: zero everywhere.
        let id = SymmetricTensor::identity(3);
        assert!(harmonic_correspondence(&id, &[0.6, 0.0, 0.8]).unwrap().abs() < 1e-14);
        assert!(harmonic_correspondence(&id, &[1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn correspondence_is_harmonic_on_traceless_input() {
        // A traceless quadratic form restricted to the sphere is a degree-2
        // harmonic: its sphere average vanishes.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (tl, _) = traceless_project(&random_tensor(2, 3, &mut rng));
        let (x, w) = crate::special::gauss_legendre(12);
        let mut avg = 0.0;
        for (&z, &wz) in x.iter().zip(&w) {
            for j in 0..24 {
                let ph = std::f64::consts::PI * j as f64 / 12.0;
                let s = (1.0 - z * z).sqrt();
                let v = [s * ph.cos(), s * ph.sin(), z];
                avg += wz * harmonic_correspondence(&tl, &v).unwrap();
            }
        }
        assert!(avg.abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn projection_is_orthogonal_and_idempotent(seed in 0u64..500, q in 2usize..5, n in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_tensor(q, n, &mut rng);
            let (tl, tr) = traceless_project(&k);
            prop_assert!(max_contraction(&tl) <= 1e-10 * (1.0 + k.norm()));
            prop_assert!(tl.inner(&tr).unwrap().abs() <= 1e-10 * (1.0 + k.norm() * k.norm()));
            let sum = tl.add(&tr).unwrap();
            for (a, b) in sum.values().iter().zip(k.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let (tl2, tr2) = traceless_project(&tl);
            prop_assert!(tr2.max_abs() <= 1e-10 * (1.0 + k.norm()));
            for (a, b) in tl2.values().iter().zip(tl.values()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn product_expansion_matches_direct(seed in 0u64..1000, q in 0usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let idx: Vec<usize> = (0..q).map(|_| rng.random_range(0..3)).collect();
            let g: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let direct: f64 = idx.iter().map(|&i| g[i]).product();
            let via = product_to_wick(&idx, &g).unwrap();
            prop_assert!((direct - via).abs() <= 1e-10 * (1.0 + direct.abs()));
        }
    }
}
