//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use semaxis::io::{EmbeddingMatrix, Vocabulary};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    Array2::from_shape_simple_fn((n, d), || StandardNormal.sample(&mut r))
}

pub fn numbered_vocab(n: usize) -> Arc<Vocabulary> {
    Arc::new(Vocabulary::new((0..n).map(|i| format!("w{i}")).collect()).unwrap())
}

pub fn matrix(data: Array2<f64>) -> EmbeddingMatrix {
    let n = data.nrows();
    EmbeddingMatrix::new(numbered_vocab(n), data, "synthetic").unwrap()
}

/// Embeddings generated from `d` independent sparse, positively skewed
/// "topics" plus Gaussian noise, then mixed by a random matrix.
///
/// Word `i` is active on topic `t` with probability `density`; active
/// strengths are `1 + 3·Exp(1)`. `topics[i]` lists the active topics.
pub struct SparseWorld {
    pub sources: Array2<f64>,
    /// `sources` without the Gaussian noise.
    pub clean: Array2<f64>,
    pub mixing: Array2<f64>,
    pub embeddings: EmbeddingMatrix,
    pub topics: Vec<Vec<usize>>,
}

pub fn sparse_world(n: usize, d: usize, density: f64, noise: f64, seed: u64) -> SparseWorld {
    let mut r = rng(seed);
    let mut topics = vec![Vec::new(); n];
    let mut sources = Array2::<f64>::zeros((n, d));
    let mut clean = Array2::<f64>::zeros((n, d));
    for i in 0..n {
        for t in 0..d {
            let g: f64 = StandardNormal.sample(&mut r);
            let mut v = noise * g;
            if r.random_bool(density) {
                let e: f64 = Exp1.sample(&mut r);
                v += 1.0 + 3.0 * e;
                clean[[i, t]] = 1.0 + 3.0 * e;
                topics[i].push(t);
            }
            sources[[i, t]] = v;
        }
    }
    let mixing = Array2::from_shape_simple_fn((d, d), || StandardNormal.sample(&mut r));
    let x = sources.dot(&mixing);
    SparseWorld {
        sources,
        clean,
        mixing,
        embeddings: matrix(x),
        topics,
    }
}
