use std::collections::HashMap;

use ndarray::{Array2, ArrayView1};

use crate::error::{check_index, Error, Result};

/// Ordered list of unique words with a reverse index.
///
/// Words compare byte-wise; no Unicode normalization is applied.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from distinct words. Fails on the first duplicate.
    pub fn new(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate word {w:?}")));
            }
        }
        Ok(Self { words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn lookup(&self, word: &str) -> Result<usize> {
        self.get(word)
            .ok_or_else(|| Error::UnknownWord(word.to_owned()))
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn try_word(&self, i: usize) -> Result<&str> {
        check_index("word", i, self.len())?;
        Ok(&self.words[i])
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Keeps the first occurrence of each word when pushing; returns false for
    /// a duplicate.
    pub(crate) fn push_unique(&mut self, word: &str) -> bool {
        if self.index.contains_key(word) {
            return false;
        }
        self.index.insert(word.to_owned(), self.words.len());
        self.words.push(word.to_owned());
        true
    }
}

/// Raw embeddings `X`: one row per vocabulary word.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    vocab: std::sync::Arc<Vocabulary>,
    data: Array2<f64>,
    label: String,
}

impl EmbeddingMatrix {
    pub fn new(
        vocab: impl Into<std::sync::Arc<Vocabulary>>,
        data: Array2<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let vocab = vocab.into();
        if data.nrows() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                found: data.nrows(),
            });
        }
        if data.ncols() < 2 {
            return Err(Error::invalid(format!(
                "embedding dimension must be at least 2, got {}",
                data.ncols()
            )));
        }
        if let Some(((r, c), v)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite value {v} at row {r} ({:?}), column {c}",
                vocab.word(r)
            )));
        }
        Ok(Self {
            vocab,
            data,
            label: label.into(),
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn shared_vocab(&self) -> std::sync::Arc<Vocabulary> {
        self.vocab.clone()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn label(&self) -> &str {
        &self.label
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
}
