//! Sampled similarity statistics compared with their large-`d` limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::bessel::{product_cdf, product_density};
use crate::decomposition::{serial_dot, NormalizedEmbeddings};
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const NUM_BINS: usize = 101;
/// Histogram half-width in empirical standard deviations.
pub const BIN_SPAN: f64 = 5.0;

/// Reference density a sample is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reference {
    /// `N(0, 1/d)`.
    Normal { d: usize },
    /// `(d/π)·K0(d·|z|)`.
    Product { d: usize },
}

impl Reference {
    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Reference::Normal { d } => Normal::new(0.0, (1.0 / d as f64).sqrt())
                .expect("valid normal")
                .cdf(x),
            Reference::Product { d } => product_cdf(x, d),
        }
    }

    fn density(&self, x: f64) -> f64 {
        match *self {
            Reference::Normal { d } => {
                let var = 1.0 / d as f64;
                (-(x * x) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
            }
            Reference::Product { d } => product_density(x, d).unwrap_or(f64::INFINITY),
        }
    }

    fn dim(&self) -> usize {
        match *self {
            Reference::Normal { d } | Reference::Product { d } => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub empirical_density: f64,
    /// Reference mass of the bin divided by its width.
    pub theoretical_density: f64,
    /// Reference density at the bin centre.
    pub density_at_center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub reference: Reference,
    pub sample_size: usize,
    pub mean: f64,
    pub variance: f64,
    pub inverse_variance: f64,
    pub bins: Vec<Bin>,
    /// `Σ |empirical − theoretical| · width` over the bins.
    pub discrepancy: f64,
}

impl DistributionReport {
    pub fn histogram_mass(&self) -> f64 {
        self.bins
            .iter()
            .map(|b| b.empirical_density * (b.hi - b.lo))
            .sum()
    }

    /// Reference value for the inverse variance (`d`, or `d²` for products).
    pub fn expected_inverse_variance(&self) -> f64 {
        let d = self.reference.dim() as f64;
        match self.reference {
            Reference::Normal { .. } => d,
            Reference::Product { .. } => d * d,
        }
    }
}

/// Bins `samples` and compares them with `reference`.
///
/// Bins span `mean ± 5σ` in 101 equal widths; values outside are counted in
/// the end bins and the end bins likewise carry the reference tail mass. For
/// the product reference, a bin containing 0 is split there.
pub fn report_from_samples(samples: &[f64], reference: Reference) -> Result<DistributionReport> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    if reference.dim() == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if !(variance > 0.0) {
        return Err(Error::Numeric("samples have zero variance".into()));
    }
    let sigma = variance.sqrt();
    let lo = mean - BIN_SPAN * sigma;
    let hi = mean + BIN_SPAN * sigma;
    let width = (hi - lo) / NUM_BINS as f64;
    let mut edges: Vec<f64> = (0..=NUM_BINS).map(|k| lo + k as f64 * width).collect();
    edges[NUM_BINS] = hi;
    if matches!(reference, Reference::Product { .. }) && lo < 0.0 && hi > 0.0 {
        let k = edges.partition_point(|&e| e < 0.0);
        if edges[k] != 0.0 {
            edges.insert(k, 0.0);
        }
    }
    let nb = edges.len() - 1;

    let mut counts = vec![0usize; nb];
    for &x in samples {
        let k = edges[1..nb].partition_point(|&e| e <= x);
        counts[k] += 1;
    }

    let cdf: Vec<f64> = edges.iter().map(|&e| reference.cdf(e)).collect();
    let mut bins = Vec::with_capacity(nb);
    let mut discrepancy = 0.0;
    for k in 0..nb {
        let (a, b) = (edges[k], edges[k + 1]);
        let w = b - a;
        let lower = if k == 0 { 0.0 } else { cdf[k] };
        let upper = if k + 1 == nb { 1.0 } else { cdf[k + 1] };
        let theo_mass = (upper - lower).max(0.0);
        let emp_mass = counts[k] as f64 / n as f64;
        discrepancy += (emp_mass - theo_mass).abs();
        bins.push(Bin {
            lo: a,
            hi: b,
            empirical_density: emp_mass / w,
            theoretical_density: theo_mass / w,
            density_at_center: reference.density(0.5 * (a + b)),
        });
    }
    Ok(DistributionReport {
        reference,
        sample_size: n,
        mean,
        variance,
        inverse_variance: 1.0 / variance,
        bins,
        discrepancy,
    })
}

/// Independent generator for sample `k`, so results do not depend on
/// scheduling.
fn sample_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

fn distinct_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

fn check_sampling(n: &NormalizedEmbeddings, count: usize) -> Result<()> {
    if n.n() < 2 {
        return Err(Error::invalid("need at least two words to sample pairs"));
    }
    if count < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    Ok(())
}

/// Cosine similarities of `num_pairs` random pairs of distinct words.
pub fn pair_cosines(n: &NormalizedEmbeddings, num_pairs: usize, seed: u64) -> Result<Vec<f64>> {
    check_sampling(n, num_pairs)?;
    Ok((0..num_pairs)
        .into_par_iter()
        .map(|k| {
            let (i, j) = distinct_pair(&mut sample_rng(seed, k), n.n());
            serial_dot(n.row(i), n.row(j))
        })
        .collect())
}

pub fn sample_pair_cosines(
    n: &NormalizedEmbeddings,
    num_pairs: usize,
    seed: u64,
) -> Result<DistributionReport> {
    let s = pair_cosines(n, num_pairs, seed)?;
    report_from_samples(&s, Reference::Normal { d: n.dim() })
}

/// Entries `ŝ_i^(ℓ)` at uniformly random `(i, ℓ)`.
pub fn component_samples(n: &NormalizedEmbeddings, num_samples: usize, seed: u64) -> Result<Vec<f64>> {
    check_sampling(n, num_samples)?;
    Ok((0..num_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k);
            let i = rng.random_range(0..n.n());
            let l = rng.random_range(0..n.dim());
            n.row(i)[l]
        })
        .collect())
}

pub fn component_distribution(
    n: &NormalizedEmbeddings,
    num_samples: usize,
    seed: u64,
) -> Result<DistributionReport> {
    let s = component_samples(n, num_samples, seed)?;
    report_from_samples(&s, Reference::Normal { d: n.dim() })
}

/// `ŝ_i^(ℓ)·ŝ_j^(ℓ)` for a random pair of distinct words and one random axis
/// per pair.
pub fn product_samples(n: &NormalizedEmbeddings, num_pairs: usize, seed: u64) -> Result<Vec<f64>> {
    check_sampling(n, num_pairs)?;
    Ok((0..num_pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k);
            let (i, j) = distinct_pair(&mut rng, n.n());
            let l = rng.random_range(0..n.dim());
            n.row(i)[l] * n.row(j)[l]
        })
        .collect())
}

pub fn product_distribution(
    n: &NormalizedEmbeddings,
    num_pairs: usize,
    seed: u64,
) -> Result<DistributionReport> {
    let s = product_samples(n, num_pairs, seed)?;
    report_from_samples(&s, Reference::Product { d: n.dim() })
}
