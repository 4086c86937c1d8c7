//! Dense helpers bridging `ndarray` storage and `nalgebra` factorizations.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows per block for the streamed QR. Fixed so results do not depend on the
/// thread count.
const QR_BLOCK_ROWS: usize = 4096;

pub(crate) fn to_nalgebra(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

fn r_factor(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().r()
}

fn stack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let d = top.ncols();
    let rows = top.nrows() + bottom.nrows();
    DMatrix::from_fn(rows, d, |i, j| {
        if i < top.nrows() {
            top[(i, j)]
        } else {
            bottom[(i - top.nrows(), j)]
        }
    })
}

/// Upper-triangular `R` (d×d, zero-padded when n < d) with `CᵀC = RᵀR`.
///
/// Blocks of rows are factored in parallel and their `R` factors are merged
/// in block order, so the result is independent of scheduling.
pub(crate) fn tall_r_factor(c: ArrayView2<'_, f64>) -> DMatrix<f64> {
    let d = c.ncols();
    let blocks: Vec<DMatrix<f64>> = c
        .axis_chunks_iter(Axis(0), QR_BLOCK_ROWS)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|block| r_factor(to_nalgebra(block)))
        .collect();
    let mut acc: Option<DMatrix<f64>> = None;
    for r in blocks {
        acc = Some(match acc {
            None => r,
            Some(prev) => r_factor(stack(&prev, &r)),
        });
    }
    let r = acc.unwrap_or_else(|| DMatrix::zeros(0, d));
    if r.nrows() == d {
        r
    } else {
        let mut padded = DMatrix::zeros(d, d);
        padded.rows_mut(0, r.nrows()).copy_from(&r);
        padded
    }
}

/// `(W Wᵀ)^{-1/2} W`, the symmetric decorrelation used by parallel FastICA.
pub(crate) fn symmetric_decorrelation(w: &Array2<f64>) -> Result<Array2<f64>> {
    let wm = to_nalgebra(w.view());
    let gram = &wm * wm.transpose();
    let eig = SymmetricEigen::new(gram);
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Numeric(format!(
                "symmetric decorrelation hit eigenvalue {lambda:e}"
            )));
        }
        let s = 1.0 / lambda.sqrt();
        scaled.column_mut(j).scale_mut(s);
    }
    let inv_sqrt = scaled * eig.eigenvectors.transpose();
    Ok(from_nalgebra(&(inv_sqrt * wm)))
}

/// Largest entrywise deviation of `m` from the identity.
pub fn max_abs_from_identity(m: ArrayView2<'_, f64>) -> f64 {
    m.indexed_iter()
        .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

/// Sample covariance with n−1 normalization.
pub fn sample_covariance(z: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = z.nrows();
    let mean: Array1<f64> = z.mean_axis(Axis(0)).expect("non-empty");
    let centered = &z - &mean;
    centered.t().dot(&centered) / (n as f64 - 1.0)
}

/// `‖RᵀR − I‖_max`.
pub fn orthogonality_error(r: ArrayView2<'_, f64>) -> f64 {
    max_abs_from_identity(r.t().dot(&r).view())
}
