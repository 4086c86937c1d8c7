use nalgebra::SVD;
use ndarray::{Array1, Array2, Axis};

use super::{Provenance, Space, TransformedEmbeddings};
use crate::error::{Error, Result};
use crate::io::EmbeddingMatrix;
use crate::linalg::tall_r_factor;

/// Smallest accepted ratio σ_min/σ_max.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// PCA whitening `Z = C·A`.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningModel {
    /// d×d matrix `A = V·diag(√(n−1)/σ)`.
    pub transform: Array2<f64>,
    /// Singular values of the centered matrix, descending.
    pub singular_values: Array1<f64>,
    pub fitted_n: usize,
}

/// Whitens centered embeddings via the thin SVD of the centered matrix.
///
/// Principal components come out ordered by descending variance, each with
/// unit sample variance (n−1 normalization). The sign of each principal
/// direction is fixed so that its largest-magnitude loading is positive.
pub fn pca_whiten(c: &EmbeddingMatrix) -> Result<(WhiteningModel, TransformedEmbeddings)> {
    let n = c.n();
    let d = c.dim();
    if n < 2 {
        return Err(Error::invalid("whitening needs at least 2 rows"));
    }
    let data = c.data();
    let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mean = data.mean_axis(Axis(0)).expect("n >= 2");
    if let Some((j, m)) = mean.iter().enumerate().find(|(_, m)| m.abs() > 1e-9 * scale) {
        return Err(Error::invalid(format!(
            "input is not centered: column {j} has mean {m:e}"
        )));
    }

    let r = tall_r_factor(data.view());
    let svd = SVD::new(r, false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let sigma: Array1<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();

    let largest = sigma[0];
    if !(largest > 0.0) {
        return Err(Error::RankDeficient {
            index: 0,
            ratio: 0.0,
        });
    }
    if let Some(j) = sigma.iter().position(|&s| s < RANK_TOLERANCE * largest) {
        return Err(Error::RankDeficient {
            index: j,
            ratio: sigma[j] / largest,
        });
    }

    let dof = ((n - 1) as f64).sqrt();
    let mut a = Array2::<f64>::zeros((d, d));
    for (col, &k) in order.iter().enumerate() {
        let v = v_t.row(k);
        let pivot = v
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |(bi, bv), (i, x)| {
                if x.abs() > bv {
                    (i, x.abs())
                } else {
                    (bi, bv)
                }
            })
            .0;
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        let s = sign * dof / sigma[col];
        for i in 0..d {
            a[[i, col]] = v[i] * s;
        }
    }

    let z = data.dot(&a);
    let model = WhiteningModel {
        transform: a,
        singular_values: sigma,
        fitted_n: n,
    };
    let provenance = Provenance {
        centering: 0,
        whitening: model.fingerprint(),
        ica: None,
    };
    let t = TransformedEmbeddings::new(Space::Pca, z, c.shared_vocab(), provenance)?;
    Ok((model, t))
}
