//! Loading, validating and caching embeddings and benchmark datasets.

mod cache;
mod datasets;
mod text;
mod vocab;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub use cache::{
    read_cache, write_cache, CacheContainer, Precision, Section, FLAG_F64, FLAG_SECTIONS, MAGIC,
    VERSION,
};
pub(crate) use cache::{PayloadReader, PayloadWriter};
pub use datasets::{
    load_analogy, load_wordsim, AnalogyCategory, AnalogyDataset, WordSimDataset, DEFAULT_CATEGORY,
};
pub use text::{parse_embedding_text, ParsedEmbeddings};
pub use vocab::{EmbeddingMatrix, Vocabulary};

use crate::error::Result;

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Parses a text embedding file from disk.
pub fn read_embedding_text(
    path: impl AsRef<Path>,
    expected_dim: Option<usize>,
) -> Result<ParsedEmbeddings> {
    let path = path.as_ref();
    let label = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_embedding_text(BufReader::new(File::open(path)?), expected_dim, &label)
}

pub fn read_wordsim(path: impl AsRef<Path>) -> Result<WordSimDataset> {
    let path = path.as_ref();
    load_wordsim(BufReader::new(File::open(path)?), &file_stem(path))
}

pub fn read_analogy(path: impl AsRef<Path>) -> Result<AnalogyDataset> {
    let path = path.as_ref();
    load_analogy(BufReader::new(File::open(path)?), &file_stem(path))
}
