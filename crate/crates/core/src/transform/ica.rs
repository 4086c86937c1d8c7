//! Symmetric (parallel) FastICA with the log-cosh contrast.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{skew::canonicalize_axes, Space, TransformedEmbeddings};
use crate::error::{Error, Result};
use crate::linalg::symmetric_decorrelation;

/// Rows per partial sum; fixed so reductions do not depend on thread count.
const REDUCE_CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcaParams {
    pub max_iter: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for IcaParams {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

/// Fitted rotation `R` with `S = Z·R`.
#[derive(Debug, Clone, PartialEq)]
pub struct IcaModel {
    pub rotation: Array2<f64>,
    pub axis_skewness: Array1<f64>,
    pub n_iterations_used: usize,
    pub converged: bool,
    pub seed: u64,
    pub max_iter: usize,
    pub tolerance: f64,
}

/// Runs FastICA on whitened embeddings.
///
/// Each step maps every unmixing row `w` to `E[z·tanh(wᵀz)] − E[1 − tanh²(wᵀz)]·w`
/// and then applies `W ← (WWᵀ)^{-1/2}W`. Iteration stops once
/// `max_i |1 − |⟨w_i^new, w_i^old⟩|| < tolerance`; hitting `max_iter` leaves
/// `converged == false` but still returns an orthogonal rotation.
///
/// The returned `axis_skewness` describes the raw (not yet canonicalized)
/// columns of `Z·R`.
pub fn fast_ica(z: &TransformedEmbeddings, params: IcaParams) -> Result<IcaModel> {
    if params.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if !(params.tolerance > 0.0) || !params.tolerance.is_finite() {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if z.space() != Space::Pca {
        return Err(Error::invalid("fast_ica expects whitened PCA-space input"));
    }
    let data = z.data().view();
    let d = data.ncols();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let init = Array2::from_shape_simple_fn((d, d), || StandardNormal.sample(&mut rng));
    let mut w = symmetric_decorrelation(&init)?;

    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=params.max_iter {
        iterations = it;
        let w_new = symmetric_decorrelation(&fixed_point_step(data, &w))?;
        let lim = w_new
            .outer_iter()
            .zip(w.outer_iter())
            .map(|(a, b)| (a.dot(&b).abs() - 1.0).abs())
            .fold(0.0f64, f64::max);
        w = w_new;
        if lim < params.tolerance {
            converged = true;
            break;
        }
    }

    let rotation = w.t().to_owned();
    let s = data.dot(&rotation);
    let axis_skewness = s
        .axis_iter(Axis(1))
        .map(super::skewness)
        .collect::<Result<Array1<f64>>>()?;
    Ok(IcaModel {
        rotation,
        axis_skewness,
        n_iterations_used: iterations,
        converged,
        seed: params.seed,
        max_iter: params.max_iter,
        tolerance: params.tolerance,
    })
}

/// One un-decorrelated fixed-point update of the unmixing matrix `w` (rows are
/// components).
fn fixed_point_step(z: ArrayView2<'_, f64>, w: &Array2<f64>) -> Array2<f64> {
    let n = z.nrows();
    let d = z.ncols();
    let mut g = z.dot(&w.t());
    g.par_mapv_inplace(f64::tanh);

    let partials: Vec<Array1<f64>> = g
        .axis_chunks_iter(Axis(0), REDUCE_CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|chunk| {
            let mut acc = Array1::<f64>::zeros(d);
            for row in chunk.outer_iter() {
                acc.zip_mut_with(&row, |a, &t| *a += 1.0 - t * t);
            }
            acc
        })
        .collect();
    let mut g_prime = Array1::<f64>::zeros(d);
    for p in &partials {
        g_prime += p;
    }
    g_prime /= n as f64;

    let mut next = g.t().dot(&z) / n as f64;
    for (mut row, (w_row, gp)) in next
        .outer_iter_mut()
        .zip(w.outer_iter().zip(g_prime.iter()))
    {
        row.scaled_add(-gp, &w_row);
    }
    next
}

/// Applies a rotation to PCA-space embeddings, yielding ICA-space embeddings
/// with the ICA fingerprint recorded.
pub fn rotate(z: &TransformedEmbeddings, model: &IcaModel) -> Result<TransformedEmbeddings> {
    if z.space() != Space::Pca {
        return Err(Error::invalid("rotation expects PCA-space input"));
    }
    if model.rotation.nrows() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            found: model.rotation.nrows(),
        });
    }
    let s = z.data().dot(&model.rotation);
    let mut provenance = z.provenance().clone();
    provenance.ica = Some(model.fingerprint());
    TransformedEmbeddings::new(Space::Ica, s, z.shared_vocab(), provenance)
}

/// FastICA followed by sign/order canonicalization.
pub fn fit_ica(
    z: &TransformedEmbeddings,
    params: IcaParams,
) -> Result<(IcaModel, TransformedEmbeddings)> {
    let raw = fast_ica(z, params)?;
    let s = rotate(z, &raw)?;
    let (s, model) = canonicalize_axes(&s, &raw)?;
    Ok((model, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{EmbeddingMatrix, Vocabulary};
    use crate::linalg::{max_abs_from_identity, orthogonality_error, sample_covariance};
    use crate::transform::{apply_transform, Pipeline};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::Exp1;
    use std::sync::Arc;

    fn matrix(data: Array2<f64>) -> EmbeddingMatrix {
        let words = (0..data.nrows()).map(|i| format!("w{i}")).collect();
        EmbeddingMatrix::new(Arc::new(Vocabulary::new(words).unwrap()), data, "t").unwrap()
    }

    fn correlation(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
        let ma = a.mean().unwrap();
        let mb = b.mean().unwrap();
        let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            ab += (x - ma) * (y - mb);
            aa += (x - ma).powi(2);
            bb += (y - mb).powi(2);
        }
        ab / (aa * bb).sqrt()
    }

    /// Normalized Amari index of a square matrix; 0 for a scaled permutation.
    fn amari(t: &Array2<f64>) -> f64 {
        let k = t.nrows();
        let a = t.mapv(f64::abs);
        let rows: f64 = a
            .outer_iter()
            .map(|r| r.sum() / r.fold(0.0f64, |m, &v| m.max(v)) - 1.0)
            .sum();
        let cols: f64 = a
            .axis_iter(Axis(1))
            .map(|c| c.sum() / c.fold(0.0f64, |m, &v| m.max(v)) - 1.0)
            .sum();
        (rows + cols) / (2.0 * k as f64 * (k as f64 - 1.0))
    }

    /// Two independent sources mixed by a 30° rotation and unequal scales.
    fn mixed(n: usize, skewed: bool, seed: u64) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sources = Array2::from_shape_fn((n, 2), |(_, j)| {
            if skewed && j == 0 {
                let e: f64 = Exp1.sample(&mut rng);
                e - 1.0
            } else {
                rng.random_range(-1.0..1.0)
            }
        });
        let (s, c) = (30f64.to_radians().sin(), 30f64.to_radians().cos());
        let mixing = ndarray::array![[3.0 * c, 3.0 * s], [-s, c]];
        (sources.dot(&mixing), sources, mixing)
    }

    #[test]
    fn recovers_rotated_uniform_sources() {
        let (x, sources, mixing) = mixed(50_000, false, 7);
        let p = Pipeline::fit(&matrix(x), IcaParams::default()).unwrap();
        assert!(p.ica.converged);
        let s = p.ica_space.data();
        for src in sources.axis_iter(Axis(1)) {
            let best = s
                .axis_iter(Axis(1))
                .map(|est| correlation(est, src).abs())
                .fold(0.0, f64::max);
            assert!(best >= 0.99, "best |corr| {best}");
        }
        let total = mixing.dot(&p.whitening.transform).dot(&p.ica.rotation);
        assert!(amari(&total) <= 0.05, "amari {}", amari(&total));
    }

    #[test]
    fn skewed_source_comes_first_with_positive_sign() {
        let (x, sources, _) = mixed(50_000, true, 8);
        let p = Pipeline::fit(&matrix(x), IcaParams::default()).unwrap();
        assert!(p.ica.axis_skewness[0] > 1.5);
        assert!(p.ica.axis_skewness.iter().all(|&k| k >= 0.0));
        let r = correlation(p.ica_space.data().column(0), sources.column(0));
        assert!(r > 0.99, "{r}");
    }

    #[test]
    fn independent_input_gives_signed_permutation() {
        let (_, sources, _) = mixed(50_000, true, 9);
        let p = Pipeline::fit(&matrix(sources), IcaParams::default()).unwrap();
        let total = p.whitening.transform.dot(&p.ica.rotation);
        assert!(amari(&total) <= 0.05, "amari {}", amari(&total));
    }

    #[test]
    fn rotation_stays_orthogonal_on_gaussian_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = Array2::from_shape_simple_fn((5_000, 4), || StandardNormal.sample(&mut rng));
        let p = Pipeline::fit(
            &matrix(x),
            IcaParams {
                max_iter: 200,
                ..IcaParams::default()
            },
        )
        .unwrap();
        assert!(orthogonality_error(p.ica.rotation.view()) < 1e-8);
        assert!(max_abs_from_identity(sample_covariance(p.ica_space.data().view()).view()) < 1e-8);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let (x, _, _) = mixed(5_000, true, 11);
        let e = matrix(x);
        let a = Pipeline::fit(&e, IcaParams::default()).unwrap();
        let b = Pipeline::fit(&e, IcaParams::default()).unwrap();
        assert_eq!(a.ica, b.ica);
        assert_eq!(a.ica_space, b.ica_space);
    }

    #[test]
    fn canonical_rotation_reproduces_ica_space() {
        let (x, _, _) = mixed(5_000, true, 12);
        let p = Pipeline::fit(&matrix(x), IcaParams::default()).unwrap();
        let s = p.pca_space.data().dot(&p.ica.rotation);
        for (a, b) in s.iter().zip(p.ica_space.data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for (k, col) in p.ica_space.data().axis_iter(Axis(1)).enumerate() {
            assert_abs_diff_eq!(
                super::super::skewness(col).unwrap(),
                p.ica.axis_skewness[k],
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn apply_matches_stored_rows() {
        let (x, _, _) = mixed(2_000, true, 13);
        let e = matrix(x);
        let p = Pipeline::fit(&e, IcaParams::default()).unwrap();
        let ica = p.transform(Space::Ica);
        for i in [0, 17, 1999] {
            let v = ica.apply(e.row(i)).unwrap();
            for (a, b) in v.iter().zip(p.ica_space.row(i)) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
        let mean = apply_transform(p.centering.mean.view(), &p.centering, &p.whitening, Some(&p.ica)).unwrap();
        assert!(mean.iter().all(|v| v.abs() < 1e-12));
        assert!(ica.apply(ndarray::array![1.0, 2.0, 3.0].view()).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let (x, _, _) = mixed(5_000, true, 14);
        let p = Pipeline::fit(
            &matrix(x),
            IcaParams {
                max_iter: 1,
                tolerance: 1e-300,
                seed: 0,
            },
        )
        .unwrap();
        assert!(!p.ica.converged);
        assert_eq!(p.ica.n_iterations_used, 1);
        assert!(orthogonality_error(p.ica.rotation.view()) < 1e-10);
    }

    #[test]
    fn invalid_params() {
        let (x, _, _) = mixed(100, true, 15);
        let e = matrix(x);
        let bad = [
            IcaParams { max_iter: 0, ..IcaParams::default() },
            IcaParams { tolerance: 0.0, ..IcaParams::default() },
            IcaParams { tolerance: f64::NAN, ..IcaParams::default() },
        ];
        for params in bad {
            assert!(matches!(Pipeline::fit(&e, params), Err(Error::InvalidArgument(_))));
        }
    }
}
