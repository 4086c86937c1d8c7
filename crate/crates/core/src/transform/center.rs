use ndarray::{Array1, Axis};

use crate::error::{Error, Result};
use crate::io::EmbeddingMatrix;

/// Column means subtracted from the raw embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringModel {
    pub mean: Array1<f64>,
}

/// Subtracts column means. Requires at least two rows.
pub fn center(e: &EmbeddingMatrix) -> Result<(EmbeddingMatrix, CenteringModel)> {
    if e.n() < 2 {
        return Err(Error::invalid(format!(
            "centering needs at least 2 rows, got {}",
            e.n()
        )));
    }
    let mean = e.data().mean_axis(Axis(0)).expect("n >= 2");
    let centered = e.data() - &mean;
    let out = EmbeddingMatrix::new(e.shared_vocab(), centered, e.label())?;
    Ok((out, CenteringModel { mean }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::Vocabulary;
    use ndarray::{array, Array2};
    use std::sync::Arc;

    fn matrix(data: Array2<f64>) -> EmbeddingMatrix {
        let words = (0..data.nrows()).map(|i| format!("w{i}")).collect();
        EmbeddingMatrix::new(Arc::new(Vocabulary::new(words).unwrap()), data, "t").unwrap()
    }

    #[test]
    fn two_rows() {
        let (c, m) = center(&matrix(array![[1.0, 3.0], [3.0, 1.0]])).unwrap();
        assert_eq!(m.mean, array![2.0, 2.0]);
        assert_eq!(c.data(), &array![[-1.0, 1.0], [1.0, -1.0]]);
    }

    #[test]
    fn idempotent_on_centered() {
        let x = array![[-1.0, 2.0], [0.5, -1.0], [0.5, -1.0]];
        let (c, m) = center(&matrix(x.clone())).unwrap();
        assert!(m.mean.iter().all(|v| v.abs() < 1e-12));
        for (a, b) in c.data().iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_row_rejected() {
        assert!(center(&matrix(array![[1.0, 2.0]])).is_err());
    }
}
