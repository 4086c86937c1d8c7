//! Reader for the GloVe text layout: `word f1 f2 ... fd` per line.

use std::io::BufRead;
use std::sync::Arc;

use ndarray::Array2;

use super::{EmbeddingMatrix, Vocabulary};
use crate::error::{Error, Result};

/// Result of parsing a text embedding file.
#[derive(Debug, Clone)]
pub struct ParsedEmbeddings {
    pub embeddings: EmbeddingMatrix,
    /// Lines skipped because their word already appeared earlier.
    pub duplicates: usize,
}

/// Parses `word v1 ... vd` lines separated by single spaces.
///
/// Duplicate words keep their first occurrence. Blank lines are skipped.
/// Line numbers in errors are 1-based.
pub fn parse_embedding_text<R: BufRead>(
    source: R,
    expected_dim: Option<usize>,
    label: &str,
) -> Result<ParsedEmbeddings> {
    let mut vocab = Vocabulary::default();
    let mut values: Vec<f64> = Vec::new();
    let mut dim = expected_dim;
    let mut duplicates = 0usize;

    for (lineno, line) in source.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n', ' ']);
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let word = fields.next().unwrap_or_default();
        if word.is_empty() {
            return Err(Error::parse(lineno, "line starts with a separator"));
        }
        let start = values.len();
        for tok in fields {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("cannot parse {tok:?} as a number")))?;
            if !v.is_finite() {
                return Err(Error::parse(lineno, format!("non-finite value {tok:?}")));
            }
            values.push(v);
        }
        let found = values.len() - start;
        match dim {
            Some(d) if d != found => {
                values.truncate(start);
                return Err(Error::parse(
                    lineno,
                    format!("dimension mismatch: expected {d} values, found {found}"),
                ));
            }
            None => dim = Some(found),
            _ => {}
        }
        if !vocab.push_unique(word) {
            values.truncate(start);
            duplicates += 1;
        }
    }

    let d = match dim {
        Some(d) if !vocab.is_empty() => d,
        _ => return Err(Error::EmptyInput),
    };
    let data = Array2::from_shape_vec((vocab.len(), d), values)
        .map_err(|e| Error::Numeric(e.to_string()))?;
    let embeddings = EmbeddingMatrix::new(Arc::new(vocab), data, label)?;
    Ok(ParsedEmbeddings {
        embeddings,
        duplicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ParsedEmbeddings> {
        parse_embedding_text(s.as_bytes(), None, "test")
    }

    #[test]
    fn identity_two_by_two() {
        let p = parse("a 1 0\nb 0 1\n").unwrap();
        let e = &p.embeddings;
        assert_eq!(e.n(), 2);
        assert_eq!(e.dim(), 2);
        assert_eq!(e.data(), &ndarray::array![[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(e.vocab().words(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn malformed_float_reports_line() {
        match parse("a 1 x\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_reports_line() {
        match parse("a 1 0\nb 0 1\nc 1 2 3\n") {
            Err(Error::Parse { line: 3, message }) => assert!(message.contains("dimension")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expected_dim_is_enforced() {
        let err = parse_embedding_text("a 1 0 0\n".as_bytes(), Some(2), "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(parse(""), Err(Error::EmptyInput)));
        assert!(matches!(parse("\n\n"), Err(Error::EmptyInput)));
    }

    #[test]
    fn duplicates_keep_first() {
        let p = parse("a 1 0\nb 0 1\na 5 5\n").unwrap();
        assert_eq!(p.duplicates, 1);
        assert_eq!(p.embeddings.n(), 2);
        assert_eq!(p.embeddings.row(0).to_vec(), vec![1.0, 0.0]);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(parse("a 1 NaN\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("a inf 1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn one_dimensional_rejected() {
        assert!(parse("a 1\nb 2\n").is_err());
    }

    #[test]
    fn crlf_tolerated() {
        let p = parse("a 1 0\r\nb 0 1\r\n").unwrap();
        assert_eq!(p.embeddings.dim(), 2);
    }

    #[test]
    fn vocabulary_bijection() {
        let p = parse("x 1 2\ny 3 4\nz 5 6\n").unwrap();
        let v = p.embeddings.vocab();
        for (i, w) in v.words().iter().enumerate() {
            assert_eq!(v.get(w), Some(i));
            assert_eq!(v.word(i), w);
        }
    }
}
