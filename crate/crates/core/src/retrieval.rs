//! Queries over normalized embeddings: ideal-axis search, component ablation
//! and analogy prediction.

use std::collections::BTreeSet;
use std::fmt;

use ndarray::{Array1, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{axis_top_words, serial_dot, top_p_sum_unchecked, NormalizedEmbeddings};
use crate::error::{check_index, Error, Result};
use crate::select::top_k_among;
use crate::transform::{Space, TransformedEmbeddings};

/// Unit vector with weight `1/√m` on each of `m` axes.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealEmbedding {
    pub axes: Vec<usize>,
    pub weight: f64,
    pub vector: Array1<f64>,
}

pub fn make_ideal(axes: &[usize], d: usize) -> Result<IdealEmbedding> {
    if axes.is_empty() {
        return Err(Error::invalid("ideal embedding needs at least one axis"));
    }
    let mut seen = BTreeSet::new();
    for &a in axes {
        check_index("axis", a, d)?;
        if !seen.insert(a) {
            return Err(Error::invalid(format!("axis {a} listed twice")));
        }
    }
    let weight = 1.0 / (axes.len() as f64).sqrt();
    let mut vector = Array1::zeros(d);
    for &a in axes {
        vector[a] = weight;
    }
    Ok(IdealEmbedding {
        axes: axes.to_vec(),
        weight,
        vector,
    })
}

/// A normalized embedding with one component set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AblatedEmbedding {
    pub base_word: usize,
    pub zeroed_axis: usize,
    pub vector: Array1<f64>,
}

pub fn ablate(n: &NormalizedEmbeddings, word: usize, axis: usize) -> Result<AblatedEmbedding> {
    n.check_row(word)?;
    n.check_axis(axis)?;
    let mut vector = n.row(word).to_owned();
    vector[axis] = 0.0;
    Ok(AblatedEmbedding {
        base_word: word,
        zeroed_axis: axis,
        vector,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub index: usize,
    pub word: String,
    pub score: f64,
}

/// Inner products of `query` with every normalized row.
pub fn scores(query: ArrayView1<'_, f64>, n: &NormalizedEmbeddings) -> Result<Vec<f64>> {
    if query.len() != n.dim() {
        return Err(Error::DimensionMismatch {
            expected: n.dim(),
            found: query.len(),
        });
    }
    let data = n.data();
    Ok((0..n.n())
        .into_par_iter()
        .map(|i| serial_dot(data.row(i), query))
        .collect())
}

/// Top `k` words by inner product with `query`, skipping `exclude`.
pub fn search_topk(
    query: ArrayView1<'_, f64>,
    n: &NormalizedEmbeddings,
    k: usize,
    exclude: &[usize],
) -> Result<Vec<Hit>> {
    let excluded: BTreeSet<usize> = exclude.iter().copied().collect();
    for &i in &excluded {
        n.check_row(i)?;
    }
    let available = n.n() - excluded.len();
    if k == 0 || k > available {
        return Err(Error::invalid(format!(
            "k must lie in 1..={available}, got {k}"
        )));
    }
    let s = scores(query, n)?;
    let candidates = (0..n.n()).filter(|i| !excluded.contains(i)).collect();
    Ok(top_k_among(&s, candidates, k)
        .into_iter()
        .map(|i| Hit {
            index: i,
            word: n.vocab().word(i).to_owned(),
            score: s[i],
        })
        .collect())
}

/// `normalize(s₂ − s₁ + s₃)` built from unnormalized rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyQuery {
    pub i1: usize,
    pub i2: usize,
    pub i3: usize,
    pub combined: Array1<f64>,
}

/// Builds the query for `w1 : w2 :: w3 : ?`. Repeated indices are allowed.
pub fn analogy_query(
    t: &TransformedEmbeddings,
    i1: usize,
    i2: usize,
    i3: usize,
) -> Result<AnalogyQuery> {
    for i in [i1, i2, i3] {
        check_index("word", i, t.n())?;
    }
    let mut v = &t.row(i2) - &t.row(i1);
    v += &t.row(i3);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm >= crate::decomposition::MIN_NORM) {
        return Err(Error::Numeric(format!(
            "analogy vector for ({}, {}, {}) is zero",
            t.vocab().word(i1),
            t.vocab().word(i2),
            t.vocab().word(i3)
        )));
    }
    v.mapv_inplace(|x| x / norm);
    Ok(AnalogyQuery {
        i1,
        i2,
        i3,
        combined: v,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExcludePolicy {
    None,
    #[default]
    ExcludeQueryWords,
}

impl fmt::Display for ExcludePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExcludePolicy::None => "none",
            ExcludePolicy::ExcludeQueryWords => "exclude-query-words",
        })
    }
}

impl std::str::FromStr for ExcludePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ExcludePolicy::None),
            "exclude-query-words" => Ok(ExcludePolicy::ExcludeQueryWords),
            other => Err(Error::invalid(format!("unknown exclude policy {other:?}"))),
        }
    }
}

/// Scores every candidate by the sum of its `p` largest component-wise
/// products with the query and returns the best one.
pub fn analogy_search_topp(
    q: &AnalogyQuery,
    n: &NormalizedEmbeddings,
    p: usize,
    policy: ExcludePolicy,
) -> Result<Hit> {
    let d = n.dim();
    if !(1..=d).contains(&p) {
        return Err(Error::invalid(format!("p must lie in 1..={d}, got {p}")));
    }
    if q.combined.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: q.combined.len(),
        });
    }
    let skip = |i: usize| policy == ExcludePolicy::ExcludeQueryWords && (i == q.i1 || i == q.i2 || i == q.i3);
    let data = n.data();
    let query = q.combined.view();
    let best = (0..n.n())
        .into_par_iter()
        .filter(|&i| !skip(i))
        .map_init(
            || vec![0.0; d],
            |buf, i| {
                for ((b, s), qv) in buf.iter_mut().zip(data.row(i)).zip(query) {
                    *b = qv * s;
                }
                (i, top_p_sum_unchecked(buf, p))
            },
        )
        .reduce_with(|a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| Error::invalid("no candidates left after exclusion"))?;
    Ok(Hit {
        index: best.0,
        word: n.vocab().word(best.0).to_owned(),
        score: best.1,
    })
}

/// Plain cosine argmax for an analogy query.
pub fn analogy_search(q: &AnalogyQuery, n: &NormalizedEmbeddings, policy: ExcludePolicy) -> Result<Hit> {
    let exclude = match policy {
        ExcludePolicy::None => vec![],
        ExcludePolicy::ExcludeQueryWords => vec![q.i1, q.i2, q.i3],
    };
    search_topk(q.combined.view(), n, 1, &exclude).map(|mut v| v.remove(0))
}

/// Finds an axis among the `within` largest components of `word` whose top
/// `k` words include any of `cues`. Returns the first such axis in component
/// order, or `None`.
pub fn find_axis_by_cues(
    n: &NormalizedEmbeddings,
    word: usize,
    cues: &[&str],
    within: usize,
    k: usize,
) -> Result<Option<usize>> {
    if n.space() != Space::Ica {
        return Err(Error::invalid("axis lookup is meaningful only in ICA space"));
    }
    let profile = crate::decomposition::word_profile(n, word, within.min(n.dim()))?;
    for (axis, _) in profile {
        let report = axis_top_words(n, axis, k.min(n.n()))?;
        if report.words().any(|w| cues.contains(&w)) {
            return Ok(Some(axis));
        }
    }
    Ok(None)
}
