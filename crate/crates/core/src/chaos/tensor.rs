use crate::error::{Error, Result};
use crate::special::factorial;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

/// Multiplicity vector `α` of an index tuple: `α_ℓ = #{r : i_r = ℓ}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub counts: Vec<u32>,
}

impl MultiIndex {
    /// Indices are zero-based.
    pub fn from_indices(indices: &[usize], n: usize) -> Result<Self> {
        let mut counts = vec![0u32; n];
        for &i in indices {
            if i >= n {
                return Err(Error::Index(format!("index {i} out of range for dimension {n}")));
            }
            counts[i] += 1;
        }
        Ok(Self { counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    /// `α! = Π α_ℓ!`.
    pub fn factorial(&self) -> f64 {
        self.counts.iter().map(|&c| factorial(c as usize)).product()
    }

    /// Number of index tuples sharing this multiplicity vector, `q!/α!`.
    pub fn orbit_size(&self) -> f64 {
        factorial(self.total()) / self.factorial()
    }

    /// The non-decreasing index tuple with these multiplicities.
    pub fn sorted_tuple(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total());
        for (l, &c) in self.counts.iter().enumerate() {
            out.extend(std::iter::repeat_n(l, c as usize));
        }
        out
    }
}

/// See [`MultiIndex::from_indices`].
pub fn multiplicity_vector(indices: &[usize], n: usize) -> Result<MultiIndex> {
    MultiIndex::from_indices(indices, n)
}

/// Enumeration of the symmetry classes of `[N]^q`, one sorted tuple per
/// class, in lexicographic order.
#[derive(Debug)]
pub struct TensorLayout {
    pub q: usize,
    pub n: usize,
    tuples: Vec<Vec<usize>>,
    counts: Vec<MultiIndex>,
    orbit: Vec<f64>,
    index: HashMap<Vec<usize>, usize>,
}

impl TensorLayout {
    pub fn new(q: usize, n: usize) -> Arc<Self> {
        assert!(n >= 1, "tensor dimension must be positive");
        let mut tuples = Vec::new();
        let mut cur = Vec::with_capacity(q);
        fn rec(q: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == q {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(q, n, i, cur, out);
                cur.pop();
            }
        }
        rec(q, n, 0, &mut cur, &mut tuples);
        let counts: Vec<MultiIndex> =
            tuples.iter().map(|t| MultiIndex::from_indices(t, n).expect("in range")).collect();
        let orbit = counts.iter().map(MultiIndex::orbit_size).collect();
        let index = tuples.iter().cloned().enumerate().map(|(k, t)| (t, k)).collect();
        Arc::new(Self { q, n, tuples, counts, orbit, index })
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuple(&self, k: usize) -> &[usize] {
        &self.tuples[k]
    }

    pub fn multiplicity(&self, k: usize) -> &MultiIndex {
        &self.counts[k]
    }

    pub fn orbit(&self, k: usize) -> f64 {
        self.orbit[k]
    }

    /// Position of the class of an arbitrary (unsorted) tuple.
    pub fn position(&self, indices: &[usize]) -> Option<usize> {
        let mut key = indices.to_vec();
        key.sort_unstable();
        self.index.get(&key).copied()
    }

    fn position_of_counts(&self, counts: &[u32]) -> usize {
        let mut key = Vec::with_capacity(self.q);
        for (l, &c) in counts.iter().enumerate() {
            key.extend(std::iter::repeat_n(l, c as usize));
        }
        self.index[&key]
    }
}

/// Symmetric `q`-tensor over `ℝ^N`, one stored value per symmetry class.
#[derive(Debug, Clone)]
pub struct SymmetricTensor {
    layout: Arc<TensorLayout>,
    values: Vec<f64>,
}

impl PartialEq for SymmetricTensor {
    fn eq(&self, other: &Self) -> bool {
        self.order() == other.order() && self.dim() == other.dim() && self.values == other.values
    }
}

impl SymmetricTensor {
    pub fn zeros(q: usize, n: usize) -> Self {
        let layout = TensorLayout::new(q, n);
        let values = vec![0.0; layout.len()];
        Self { layout, values }
    }

    pub fn from_layout(layout: Arc<TensorLayout>, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::Shape(format!("{} values for {} classes", values.len(), layout.len())));
        }
        Ok(Self { layout, values })
    }

    /// Identity matrix as a 2-tensor.
    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(2, n);
        for i in 0..n {
            t.set(&[i, i], 1.0);
        }
        t
    }

    pub fn order(&self) -> usize {
        self.layout.q
    }

    pub fn dim(&self) -> usize {
        self.layout.n
    }

    pub fn layout(&self) -> &Arc<TensorLayout> {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Entry at any index tuple (order-insensitive).
    pub fn get(&self, indices: &[usize]) -> f64 {
        self.layout.position(indices).map_or(0.0, |k| self.values[k])
    }

    /// # Panics
    /// If the tuple has the wrong length or an index is out of range.
    pub fn set(&mut self, indices: &[usize], value: f64) {
        let k = self.layout.position(indices).expect("tuple must match tensor shape");
        self.values[k] = value;
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() || self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "(q={}, N={}) vs (q={}, N={})",
                self.order(),
                self.dim(),
                other.order(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// Full contraction `Σ_{[N]^q} K H`, expanding each class by its orbit.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.values.iter().zip(&other.values).enumerate().map(|(k, (a, b))| self.layout.orbit(k) * a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).expect("same shape").sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { layout: self.layout.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { layout: self.layout.clone(), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Contraction of one pair of slots, `(Tr K)(β) = Σ_j K(β + 2e_j)`.
    /// By symmetry every pair of slots gives the same result.
    pub fn trace(&self) -> Result<Self> {
        let q = self.order();
        if q < 2 {
            return Err(Error::Shape("trace needs order at least 2".into()));
        }
        let n = self.dim();
        let out_layout = TensorLayout::new(q - 2, n);
        let mut out = vec![0.0; out_layout.len()];
        let mut counts = vec![0u32; n];
        for (k, slot) in out.iter_mut().enumerate() {
            counts.copy_from_slice(&out_layout.multiplicity(k).counts);
            let mut acc = 0.0;
            for j in 0..n {
                counts[j] += 2;
                acc += self.values[self.layout.position_of_counts(&counts)];
                counts[j] -= 2;
            }
            *slot = acc;
        }
        Self::from_layout(out_layout, out)
    }

    /// Adjoint of [`trace`](Self::trace) under [`inner`](Self::inner):
    /// the symmetrization of `I ⊗ y`.
    pub fn trace_adjoint(y: &Self) -> Self {
        let q = y.order() + 2;
        let n = y.dim();
        let layout = TensorLayout::new(q, n);
        let norm = 1.0 / (q * (q - 1)) as f64;
        let mut values = vec![0.0; layout.len()];
        let mut counts = vec![0u32; n];
        for (k, slot) in values.iter_mut().enumerate() {
            counts.copy_from_slice(&layout.multiplicity(k).counts);
            let mut acc = 0.0;
            for j in 0..n {
                let a = counts[j];
                if a >= 2 {
                    counts[j] -= 2;
                    acc += (a * (a - 1)) as f64 * y.values[y.layout.position_of_counts(&counts)];
                    counts[j] += 2;
                }
            }
            *slot = norm * acc;
        }
        Self { layout, values }
    }

    /// Deterministic text dump: header `q N`, then one line per class with
    /// the sorted tuple followed by the value.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.order(), self.dim());
        for k in 0..self.layout.len() {
            for i in self.layout.tuple(k) {
                write!(s, "{i} ").expect("string write");
            }
            writeln!(s, "{:e}", self.values[k]).expect("string write");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty tensor text".into()))?;
        let hv: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header token `{t}`"))))
            .collect::<Result<_>>()?;
        let [q, n] = hv[..] else {
            return Err(Error::Parse(format!("header must be `q N`, got `{header}`")));
        };
        if n == 0 {
            return Err(Error::Parse("dimension must be positive".into()));
        }
        let mut t = Self::zeros(q, n);
        let mut seen = vec![false; t.layout.len()];
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != q + 1 {
                return Err(Error::Parse(format!("line `{line}` does not have {} fields", q + 1)));
            }
            let idx: Vec<usize> = toks[..q]
                .iter()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad index `{t}`"))))
                .collect::<Result<_>>()?;
            if idx.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Parse(format!("tuple in `{line}` is not sorted")));
            }
            let value: f64 = toks[q].parse().map_err(|_| Error::Parse(format!("bad value `{}`", toks[q])))?;
            let k = t.layout.position(&idx).ok_or_else(|| Error::Parse(format!("index out of range in `{line}`")))?;
            if seen[k] {
                return Err(Error::Parse(format!("duplicate class in `{line}`")));
            }
            seen[k] = true;
            t.values[k] = value;
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn multiplicity_examples() {
        // Zero-based versions of (1,2) and (4,2,4,1,3) with N = 4.
        assert_eq!(multiplicity_vector(&[0, 1], 4).unwrap().counts, vec![1, 1, 0, 0]);
        assert_eq!(multiplicity_vector(&[3, 1, 3, 0, 2], 4).unwrap().counts, vec![1, 1, 1, 2]);
        assert_eq!(multiplicity_vector(&[0, 0, 0], 3).unwrap().counts, vec![3, 0, 0]);
        assert!(multiplicity_vector(&[4], 4).is_err());
    }

    #[test]
    fn class_counts_are_weak_compositions() {
        for q in 0..6 {
            for n in 1..7 {
                assert_eq!(TensorLayout::new(q, n).len(), binom(n + q - 1, q));
            }
        }
    }

    #[test]
    fn orbits_cover_all_tuples() {
        for q in 1..5 {
            for n in 1..5 {
                let l = TensorLayout::new(q, n);
                let total: f64 = (0..l.len()).map(|k| l.orbit(k)).sum();
                assert_eq!(total, (n as f64).powi(q as i32));
            }
        }
    }

    #[test]
    fn trace_of_identity() {
        let tr = SymmetricTensor::identity(5).trace().unwrap();
        assert_eq!(tr.values(), &[5.0]);
    }

    #[test]
    fn text_round_trip_and_order() {
        let mut t = SymmetricTensor::zeros(2, 3);
        t.set(&[2, 0], 0.25);
        t.set(&[1, 1], -1.5);
        let txt = t.to_text();
        assert_eq!(txt, "2 3\n0 0 0e0\n0 1 0e0\n0 2 2.5e-1\n1 1 -1.5e0\n1 2 0e0\n2 2 0e0\n");
        assert_eq!(SymmetricTensor::from_text(&txt).unwrap(), t);
        assert!(SymmetricTensor::from_text("2 3\n1 0 1.0\n").is_err());
        assert!(SymmetricTensor::from_text("2 3\n0 0 1.0\n0 0 2.0\n").is_err());
        assert!(SymmetricTensor::from_text("2\n").is_err());
    }

    fn tensor_strategy(q: usize, n: usize) -> impl Strategy<Value = SymmetricTensor> {
        let len = TensorLayout::new(q, n).len();
        proptest::collection::vec(-1.0f64..1.0, len)
            .prop_map(move |v| SymmetricTensor::from_layout(TensorLayout::new(q, n), v).unwrap())
    }

    proptest! {
        #[test]
        fn trace_adjoint_identity(k in tensor_strategy(4, 3), y in tensor_strategy(2, 3)) {
            let lhs = k.trace().unwrap().inner(&y).unwrap();
            let rhs = k.inner(&SymmetricTensor::trace_adjoint(&y)).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn inner_matches_full_expansion(k in tensor_strategy(3, 3), h in tensor_strategy(3, 3)) {
            let mut full = 0.0;
            for i in 0..3 { for j in 0..3 { for l in 0..3 {
                full += k.get(&[i, j, l]) * h.get(&[l, i, j]);
            }}}
            prop_assert!((full - k.inner(&h).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn text_round_trip(k in tensor_strategy(3, 4)) {
            prop_assert_eq!(SymmetricTensor::from_text(&k.to_text()).unwrap(), k);
        }
    }
}
