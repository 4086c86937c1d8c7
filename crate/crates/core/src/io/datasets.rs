//! Word-similarity and analogy benchmark files.

use std::io::BufRead;

use crate::error::{Error, Result};

/// Human-rated word pairs (`a b score` per line).
#[derive(Debug, Clone, PartialEq)]
pub struct WordSimDataset {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

/// Analogy quadruples grouped by `: category` headers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyDataset {
    pub name: String,
    pub categories: Vec<AnalogyCategory>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyCategory {
    pub name: String,
    pub quadruples: Vec<[String; 4]>,
}

impl AnalogyDataset {
    pub fn len(&self) -> usize {
        self.categories.iter().map(|c| c.quadruples.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Category used for quadruples that appear before any header.
pub const DEFAULT_CATEGORY: &str = "default";

fn content_lines<R: BufRead>(source: R) -> impl Iterator<Item = Result<(usize, String)>> {
    source.lines().enumerate().filter_map(|(i, line)| {
        let lineno = i + 1;
        match line {
            Err(e) => Some(Err(Error::parse(lineno, e.to_string()))),
            Ok(l) => {
                let t = l.trim();
                if t.is_empty() || t.starts_with('#') {
                    None
                } else {
                    Some(Ok((lineno, t.to_owned())))
                }
            }
        }
    })
}

/// Reads whitespace-separated `word_a word_b score` lines. Blank lines and
/// `#` comments are ignored.
pub fn load_wordsim<R: BufRead>(source: R, name: &str) -> Result<WordSimDataset> {
    let mut pairs = Vec::new();
    for item in content_lines(source) {
        let (lineno, line) = item?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                lineno,
                format!("expected `word word score`, found {} fields", fields.len()),
            ));
        }
        let score: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad score {:?}", fields[2])))?;
        if !score.is_finite() {
            return Err(Error::parse(lineno, "score is not finite"));
        }
        pairs.push((fields[0].to_owned(), fields[1].to_owned(), score));
    }
    if pairs.len() < 2 {
        return Err(Error::invalid(format!(
            "word-similarity dataset {name:?} needs at least 2 pairs, found {}",
            pairs.len()
        )));
    }
    Ok(WordSimDataset {
        name: name.to_owned(),
        pairs,
    })
}

/// Reads `w1 w2 w3 w4` lines grouped under `: name` headers.
pub fn load_analogy<R: BufRead>(source: R, name: &str) -> Result<AnalogyDataset> {
    let mut categories: Vec<AnalogyCategory> = Vec::new();
    for item in content_lines(source) {
        let (lineno, line) = item?;
        if let Some(header) = line.strip_prefix(':') {
            let header = header.trim();
            if header.is_empty() {
                return Err(Error::parse(lineno, "empty category name"));
            }
            categories.push(AnalogyCategory {
                name: header.to_owned(),
                quadruples: Vec::new(),
            });
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let quad: [&str; 4] = fields.as_slice().try_into().map_err(|_| {
            Error::parse(
                lineno,
                format!("expected 4 words, found {}", fields.len()),
            )
        })?;
        if categories.is_empty() {
            categories.push(AnalogyCategory {
                name: DEFAULT_CATEGORY.to_owned(),
                quadruples: Vec::new(),
            });
        }
        categories
            .last_mut()
            .expect("category exists")
            .quadruples
            .push(quad.map(str::to_owned));
    }
    Ok(AnalogyDataset {
        name: name.to_owned(),
        categories,
    })
}
