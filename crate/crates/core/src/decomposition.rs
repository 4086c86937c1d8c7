//! Row normalization and the per-axis decomposition of cosine similarity.
//!
//! For unit rows `ŝ_i`, `ŝ_j` the cosine is `Σ_ℓ ŝ_i^(ℓ)·ŝ_j^(ℓ)`; each term is
//! the similarity contributed by axis `ℓ`. Sums always run over axes in
//! ascending order, so a decomposition's total and the cosine agree bit for bit.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1};
use serde::Serialize;

use crate::error::{check_index, Error, Result};
use crate::io::Vocabulary;
use crate::select::{desc_then_index, top_k_desc};
use crate::transform::{Space, TransformedEmbeddings};

/// Rows below this norm cannot be normalized.
pub const MIN_NORM: f64 = 1e-12;

/// Unit-length rows plus the norms they had before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedEmbeddings {
    space: Space,
    data: Array2<f64>,
    vocab: Arc<Vocabulary>,
    original_norms: Array1<f64>,
}

impl NormalizedEmbeddings {
    pub fn space(&self) -> Space {
        self.space
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn original_norms(&self) -> &Array1<f64> {
        &self.original_norms
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn lookup(&self, word: &str) -> Result<usize> {
        self.vocab.lookup(word)
    }

    pub(crate) fn check_row(&self, i: usize) -> Result<()> {
        check_index("word", i, self.n())
    }

    pub(crate) fn check_axis(&self, axis: usize) -> Result<()> {
        check_index("axis", axis, self.dim())
    }
}

/// Divides every row by its Euclidean norm.
pub fn normalize_rows(t: &TransformedEmbeddings) -> Result<NormalizedEmbeddings> {
    let mut data = t.data().clone();
    let mut norms = Array1::<f64>::zeros(t.n());
    for (i, mut row) in data.outer_iter_mut().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm >= MIN_NORM) {
            return Err(Error::ZeroNorm {
                word: t.vocab().word(i).to_owned(),
            });
        }
        row.mapv_inplace(|v| v / norm);
        norms[i] = norm;
    }
    Ok(NormalizedEmbeddings {
        space: t.space(),
        data,
        vocab: t.shared_vocab(),
        original_norms: norms,
    })
}

/// Ascending-axis inner product; the single definition of "cosine" here.
#[inline]
pub(crate) fn serial_dot(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// Per-axis products of two normalized embeddings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemanticDecomposition {
    pub word_i: usize,
    pub word_j: usize,
    pub products: Vec<f64>,
    pub total: f64,
}

pub fn sem_decompose(n: &NormalizedEmbeddings, i: usize, j: usize) -> Result<SemanticDecomposition> {
    n.check_row(i)?;
    n.check_row(j)?;
    let products: Vec<f64> = n
        .row(i)
        .iter()
        .zip(n.row(j).iter())
        .map(|(a, b)| a * b)
        .collect();
    let total = products.iter().fold(0.0, |acc, p| acc + p);
    Ok(SemanticDecomposition {
        word_i: i,
        word_j: j,
        products,
        total,
    })
}

/// Cosine similarity; identical to `sem_decompose(..).total`.
pub fn cosine(n: &NormalizedEmbeddings, i: usize, j: usize) -> Result<f64> {
    n.check_row(i)?;
    n.check_row(j)?;
    Ok(serial_dot(n.row(i), n.row(j)))
}

fn check_p(p: usize, d: usize) -> Result<()> {
    if (1..=d).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("p must lie in 1..={d}, got {p}")))
    }
}

/// Axes of the `p` largest products, largest first.
pub fn top_p_indices(dec: &SemanticDecomposition, p: usize) -> Result<Vec<usize>> {
    check_p(p, dec.products.len())?;
    Ok(top_k_desc(&dec.products, p))
}

/// Sum of the `p` largest products, accumulated in ascending axis order.
pub fn top_p_sum(dec: &SemanticDecomposition, p: usize) -> Result<f64> {
    check_p(p, dec.products.len())?;
    Ok(top_p_sum_unchecked(&dec.products, p))
}

/// `top_p_sum` over a bare product slice; `p` must be in `1..=len`.
pub(crate) fn top_p_sum_unchecked(products: &[f64], p: usize) -> f64 {
    let d = products.len();
    if p >= d {
        return products.iter().fold(0.0, |acc, v| acc + v);
    }
    if p <= SMALL_P {
        return small_top_p_sum(products, p);
    }
    let mut idx: Vec<usize> = (0..d).collect();
    idx.select_nth_unstable_by(p - 1, |&a, &b| desc_then_index(products, a, b));
    let mut keep = idx[..p].to_vec();
    keep.sort_unstable();
    keep.iter().fold(0.0, |acc, &l| acc + products[l])
}

const SMALL_P: usize = 16;

/// Single pass keeping the best `p` in a sorted buffer. Scanning in axis
/// order with a strict comparison keeps the lower axis on ties.
fn small_top_p_sum(products: &[f64], p: usize) -> f64 {
    let mut best = [(0.0f64, 0usize); SMALL_P];
    let mut len = 0;
    for (l, &v) in products.iter().enumerate() {
        if len == p && v <= best[p - 1].0 {
            continue;
        }
        let mut k = if len < p { len } else { p - 1 };
        while k > 0 && best[k - 1].0 < v {
            best[k] = best[k - 1];
            k -= 1;
        }
        best[k] = (v, l);
        if len < p {
            len += 1;
        }
    }
    let mut axes: Vec<usize> = best[..p].iter().map(|b| b.1).collect();
    axes.sort_unstable();
    axes.iter().fold(0.0, |acc, &l| acc + products[l])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisEntry {
    pub index: usize,
    pub word: String,
    pub value: f64,
}

/// Top words on one axis. The label is supplied by a human, never inferred.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisReport {
    pub axis: usize,
    pub top_entries: Vec<AxisEntry>,
    pub label: Option<String>,
}

impl AxisReport {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.top_entries.iter().map(|e| e.word.as_str())
    }
}

/// The `k` words with the largest component on `axis`.
pub fn axis_top_words(n: &NormalizedEmbeddings, axis: usize, k: usize) -> Result<AxisReport> {
    n.check_axis(axis)?;
    if k == 0 || k > n.n() {
        return Err(Error::invalid(format!("k must lie in 1..={}, got {k}", n.n())));
    }
    let column: Vec<f64> = n.data.column(axis).to_vec();
    let top_entries = top_k_desc(&column, k)
        .into_iter()
        .map(|i| AxisEntry {
            index: i,
            word: n.vocab.word(i).to_owned(),
            value: column[i],
        })
        .collect();
    Ok(AxisReport {
        axis,
        top_entries,
        label: None,
    })
}

/// The `k` largest components of word `i` as `(axis, value)`.
pub fn word_profile(n: &NormalizedEmbeddings, i: usize, k: usize) -> Result<Vec<(usize, f64)>> {
    n.check_row(i)?;
    if k == 0 || k > n.dim() {
        return Err(Error::invalid(format!(
            "k must lie in 1..={}, got {k}",
            n.dim()
        )));
    }
    let row: Vec<f64> = n.row(i).to_vec();
    Ok(top_k_desc(&row, k).into_iter().map(|l| (l, row[l])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::Provenance;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    pub(crate) fn transformed(data: Array2<f64>) -> TransformedEmbeddings {
        let words = (0..data.nrows()).map(|i| format!("w{i}")).collect();
        TransformedEmbeddings::new(
            Space::Ica,
            data,
            Arc::new(Vocabulary::new(words).unwrap()),
            Provenance::default(),
        )
        .unwrap()
    }

    #[test]
    fn normalize_three_four() {
        let n = normalize_rows(&transformed(array![[3.0, 4.0], [1.0, 0.0]])).unwrap();
        assert_eq!(n.row(0).to_vec(), vec![0.6, 0.8]);
        assert_eq!(n.original_norms()[0], 5.0);
        assert_eq!(n.row(1).to_vec(), vec![1.0, 0.0]);
        assert_eq!(n.original_norms()[1], 1.0);
    }

    #[test]
    fn zero_row_rejected() {
        let err = normalize_rows(&transformed(array![[1.0, 0.0], [0.0, 0.0]])).unwrap_err();
        match err {
            Error::ZeroNorm { word } => assert_eq!(word, "w1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn self_decomposition() {
        let n = normalize_rows(&transformed(array![[3.0, 4.0], [1.0, 2.0]])).unwrap();
        let dec = sem_decompose(&n, 0, 0).unwrap();
        assert_abs_diff_eq!(dec.products[0], 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(dec.products[1], 0.64, epsilon = 1e-15);
        assert!((dec.total - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&n, 0, 0).unwrap(), dec.total);
    }

    #[test]
    fn orthogonal_one_hot() {
        let n = normalize_rows(&transformed(array![[1.0, 0.0], [0.0, 1.0]])).unwrap();
        let dec = sem_decompose(&n, 0, 1).unwrap();
        assert_eq!(dec.products, vec![0.0, 0.0]);
        assert_eq!(dec.total, 0.0);
    }

    #[test]
    fn out_of_range() {
        let n = normalize_rows(&transformed(array![[1.0, 0.0], [0.0, 1.0]])).unwrap();
        assert!(matches!(
            sem_decompose(&n, 0, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(cosine(&n, 5, 0).is_err());
        assert!(axis_top_words(&n, 2, 1).is_err());
        assert!(word_profile(&n, 3, 1).is_err());
    }

    #[test]
    fn top_p_bounds_and_full() {
        let dec = SemanticDecomposition {
            word_i: 0,
            word_j: 1,
            products: vec![0.1, -0.2, 0.3, 0.05],
            total: 0.1 + -0.2 + 0.3 + 0.05,
        };
        assert!(top_p_indices(&dec, 0).is_err());
        assert!(top_p_indices(&dec, 5).is_err());
        assert_eq!(top_p_indices(&dec, 4).unwrap(), vec![2, 0, 3, 1]);
        assert_eq!(top_p_sum(&dec, 4).unwrap(), dec.total);
        assert_eq!(top_p_sum(&dec, 1).unwrap(), 0.3);
        assert_eq!(top_p_sum(&dec, 2).unwrap(), 0.1 + 0.3);
    }

    #[test]
    fn one_hot_axis_report() {
        let n = normalize_rows(&transformed(array![[0.0, 1.0], [1.0, 0.0], [0.6, 0.8]])).unwrap();
        let r = axis_top_words(&n, 0, 2).unwrap();
        assert_eq!(r.top_entries[0].word, "w1");
        assert_eq!(r.top_entries[0].value, 1.0);
        assert_eq!(r.top_entries[1].word, "w2");
        assert!(r.label.is_none());
        assert_eq!(r.with_label("[x]").label.as_deref(), Some("[x]"));
    }

    #[test]
    fn one_hot_profile() {
        let n = normalize_rows(&transformed(array![[0.0, 0.0, 2.0], [1.0, 1.0, 1.0]])).unwrap();
        let prof = word_profile(&n, 0, 3).unwrap();
        assert_eq!(prof[0], (2, 1.0));
        assert_eq!(prof.iter().filter(|(_, v)| *v != 0.0).count(), 1);
        // ties broken by lower axis
        let prof = word_profile(&n, 1, 3).unwrap();
        assert_eq!(prof.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1, 2]);
    }
}
