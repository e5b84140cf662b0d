//! Order-stable reductions for Monte Carlo ensembles.

use crate::rng::stream_rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::ops::Range;

/// Samples per work unit. Fixed so that the reduction tree depends only on
/// the sample count.
pub const CHUNK: usize = 256;

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Combines items along a fixed balanced binary tree.
pub fn tree_reduce<A>(mut items: Vec<A>, merge: impl Fn(A, A) -> A) -> Option<A> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(merge(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

/// Running mean and centered second moment of a vector of statistics
/// (Chan et al. merge).
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Self { n: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let nf = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / nf;
            *s += d * (v - *m);
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for k in 0..self.mean.len() {
            let d = other.mean[k] - self.mean[k];
            self.mean[k] += d * nb / n;
            self.m2[k] += other.m2[k] + d * d * na * nb / n;
        }
        self.n += other.n;
        self
    }

    pub fn variance(&self, k: usize) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2[k] / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean of component `k`.
    pub fn stderr(&self, k: usize) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance(k) / self.n as f64).sqrt()
        }
    }
}

/// A family of per-sample random streams.
#[derive(Debug, Clone, Copy)]
pub struct Ensemble {
    pub seed: u64,
    pub tag: u64,
}

impl Ensemble {
    pub fn new(seed: u64, tag: u64) -> Self {
        Self { seed, tag }
    }

    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        stream_rng(self.seed, self.tag, index as u64)
    }

    /// Applies `f` to consecutive sample ranges of length [`CHUNK`] in
    /// parallel and returns the results in range order.
    pub fn map_chunks<A, F>(&self, samples: usize, f: F) -> Vec<A>
    where
        A: Send,
        F: Fn(Range<usize>) -> A + Sync,
    {
        chunk_ranges(0..samples).into_par_iter().map(&f).collect()
    }

    /// Mean and standard error of `dim` per-sample statistics written by
    /// `stat(index, rng, out)`.
    pub fn moments<F>(&self, samples: usize, dim: usize, stat: F) -> Moments
    where
        F: Fn(usize, &mut ChaCha8Rng, &mut [f64]) + Sync,
    {
        let parts = self.map_chunks(samples, |range| {
            let mut m = Moments::new(dim);
            let mut buf = vec![0.0; dim];
            for i in range {
                let mut rng = self.rng(i);
                stat(i, &mut rng, &mut buf);
                m.push(&buf);
            }
            m
        });
        tree_reduce(parts, Moments::merge).unwrap_or_else(|| Moments::new(dim))
    }
}

pub fn chunk_ranges(range: Range<usize>) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = range.start;
    while start < range.end {
        let end = (start + CHUNK).min(range.end);
        out.push(start..end);
        start = end;
    }
    out
}
