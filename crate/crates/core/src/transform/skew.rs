use ndarray::{Array1, ArrayView1, Axis};

use super::{IcaModel, Space, TransformedEmbeddings};
use crate::error::{Error, Result};

/// Population skewness `m3 / m2^{3/2}` with `m_k = mean((x − x̄)^k)`.
pub fn skewness(values: ArrayView1<'_, f64>) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(Error::invalid(format!(
            "skewness needs at least 3 values, got {n}"
        )));
    }
    let mean = values.sum() / n as f64;
    let (m2, m3) = values.iter().fold((0.0, 0.0), |(m2, m3), &x| {
        let c = x - mean;
        let c2 = c * c;
        (m2 + c2, m3 + c2 * c)
    });
    let m2 = m2 / n as f64;
    let m3 = m3 / n as f64;
    if !(m2 > 0.0) {
        return Err(Error::invalid("skewness of a zero-variance sample"));
    }
    Ok(m3 / m2.powf(1.5))
}

/// Flips every axis to non-negative skewness and orders axes by descending
/// skewness (stable). The same signed permutation is applied to the columns
/// of `R`, so `S = Z·R` keeps holding.
pub fn canonicalize_axes(
    s: &TransformedEmbeddings,
    model: &IcaModel,
) -> Result<(TransformedEmbeddings, IcaModel)> {
    if s.space() != Space::Ica {
        return Err(Error::invalid("canonicalize_axes expects ICA-space embeddings"));
    }
    let d = s.dim();
    if model.rotation.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: model.rotation.ncols(),
        });
    }
    let raw: Vec<f64> = s
        .data()
        .axis_iter(Axis(1))
        .map(skewness)
        .collect::<Result<_>>()?;
    let signs: Vec<f64> = raw.iter().map(|&k| if k < 0.0 { -1.0 } else { 1.0 }).collect();
    let flipped: Vec<f64> = raw.iter().map(|k| k.abs()).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| flipped[b].total_cmp(&flipped[a]));

    let mut data = s.data().clone();
    let mut rotation = model.rotation.clone();
    for (dst, &src) in order.iter().enumerate() {
        let sign = signs[src];
        data.column_mut(dst)
            .assign(&s.data().column(src).mapv(|v| sign * v));
        rotation
            .column_mut(dst)
            .assign(&model.rotation.column(src).mapv(|v| sign * v));
    }
    let axis_skewness: Array1<f64> = order.iter().map(|&k| flipped[k]).collect();

    let mut canon = model.clone();
    canon.rotation = rotation;
    canon.axis_skewness = axis_skewness;
    let mut provenance = s.provenance().clone();
    provenance.ica = Some(canon.fingerprint());
    let out = TransformedEmbeddings::new(Space::Ica, data, s.shared_vocab(), provenance)?;
    Ok((out, canon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn symmetric_sample_has_zero_skew() {
        assert_eq!(skewness(array![-1.0, 0.0, 1.0].view()).unwrap(), 0.0);
    }

    #[test]
    fn moment_formula() {
        // m2 = 0.1875, m3 = 0.09375 → 0.09375 / 0.1875^1.5
        let k = skewness(array![0.0, 0.0, 0.0, 1.0].view()).unwrap();
        assert_abs_diff_eq!(k, 1.1547, epsilon = 1e-4);
        assert_abs_diff_eq!(k, 0.09375 / 0.1875f64.powf(1.5), epsilon = 1e-15);
    }

    #[test]
    fn odd_symmetry() {
        let x = array![0.3, -1.2, 4.0, 0.1, 2.2];
        let a = skewness(x.view()).unwrap();
        let b = skewness(x.mapv(|v| -v).view()).unwrap();
        assert_abs_diff_eq!(a, -b, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(skewness(array![1.0, 1.0, 1.0].view()).is_err());
        assert!(skewness(array![1.0, 2.0].view()).is_err());
    }
}
