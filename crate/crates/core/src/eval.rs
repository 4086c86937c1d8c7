//! Word-similarity and analogy benchmarks with top-`p` truncation.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decomposition::{normalize_rows, serial_dot, top_p_sum_unchecked, NormalizedEmbeddings};
use crate::error::{Error, Result};
use crate::io::{read_analogy, read_wordsim, AnalogyDataset, Vocabulary, WordSimDataset};
use crate::retrieval::{analogy_query, analogy_search_topp, ExcludePolicy};
use crate::transform::{Space, TransformedEmbeddings};

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && xs[idx[end]] == xs[idx[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::invalid("correlation needs at least two points"));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::Numeric("correlation of a constant sequence".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Case-insensitive word lookup: both sides are lowercased and the first
/// vocabulary entry wins.
#[derive(Debug, Clone)]
pub struct WordIndex {
    map: HashMap<String, usize>,
}

impl WordIndex {
    pub fn new(vocab: &Vocabulary) -> Self {
        let mut map = HashMap::with_capacity(vocab.len());
        for (i, w) in vocab.words().iter().enumerate() {
            map.entry(w.to_lowercase()).or_insert(i);
        }
        Self { map }
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.map.get(&word.to_lowercase()).copied()
    }
}

/// Word-similarity pairs mapped to vocabulary indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPairs {
    pub pairs: Vec<(usize, usize, f64)>,
    pub skipped: usize,
}

pub fn resolve_pairs(d: &WordSimDataset, index: &WordIndex) -> ResolvedPairs {
    let mut pairs = Vec::with_capacity(d.pairs.len());
    let mut skipped = 0;
    for (a, b, score) in &d.pairs {
        match (index.get(a), index.get(b)) {
            (Some(i), Some(j)) => pairs.push((i, j, *score)),
            _ => skipped += 1,
        }
    }
    ResolvedPairs { pairs, skipped }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordSimScore {
    pub rho: f64,
    pub used: usize,
    pub skipped: usize,
}

fn check_p(p: usize, d: usize) -> Result<()> {
    if (1..=d).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("p must lie in 1..={d}, got {p}")))
    }
}

fn pair_products(n: &NormalizedEmbeddings, i: usize, j: usize, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(n.row(i).iter().zip(n.row(j).iter()).map(|(a, b)| a * b));
}

fn topp_scores(r: &ResolvedPairs, n: &NormalizedEmbeddings, p: usize) -> Vec<f64> {
    let mut buf = Vec::with_capacity(n.dim());
    r.pairs
        .iter()
        .map(|&(i, j, _)| {
            pair_products(n, i, j, &mut buf);
            top_p_sum_unchecked(&buf, p)
        })
        .collect()
}

pub fn score_pairs(r: &ResolvedPairs, n: &NormalizedEmbeddings, p: usize) -> Result<WordSimScore> {
    check_p(p, n.dim())?;
    if r.pairs.len() < 2 {
        return Err(Error::invalid(format!(
            "only {} in-vocabulary pairs; need at least 2",
            r.pairs.len()
        )));
    }
    let predicted = topp_scores(r, n, p);
    let gold: Vec<f64> = r.pairs.iter().map(|p| p.2).collect();
    Ok(WordSimScore {
        rho: spearman(&gold, &predicted)?,
        used: r.pairs.len(),
        skipped: r.skipped,
    })
}

/// Spearman correlation between gold scores and top-`p` similarities.
pub fn wordsim_eval(d: &WordSimDataset, n: &NormalizedEmbeddings, p: usize) -> Result<WordSimScore> {
    let r = resolve_pairs(d, &WordIndex::new(n.vocab()));
    score_pairs(&r, n, p)
}

/// Pearson correlation between top-`p` similarity and cosine, per `p`.
pub fn topp_correlation_curve(
    d: &WordSimDataset,
    n: &NormalizedEmbeddings,
    p_grid: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let r = resolve_pairs(d, &WordIndex::new(n.vocab()));
    if r.pairs.len() < 2 {
        return Err(Error::invalid("fewer than 2 in-vocabulary pairs"));
    }
    let cosines: Vec<f64> = r
        .pairs
        .iter()
        .map(|&(i, j, _)| serial_dot(n.row(i), n.row(j)))
        .collect();
    p_grid
        .iter()
        .map(|&p| {
            check_p(p, n.dim())?;
            Ok((p, pearson(&topp_scores(&r, n, p), &cosines)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCategory {
    pub name: String,
    pub quadruples: Vec<[usize; 4]>,
    pub skipped: usize,
}

pub fn resolve_analogies(d: &AnalogyDataset, index: &WordIndex) -> Vec<ResolvedCategory> {
    d.categories
        .iter()
        .map(|c| {
            let mut quadruples = Vec::with_capacity(c.quadruples.len());
            let mut skipped = 0;
            for q in &c.quadruples {
                match [0, 1, 2, 3].map(|k| index.get(&q[k])) {
                    [Some(a), Some(b), Some(c), Some(e)] => quadruples.push([a, b, c, e]),
                    _ => skipped += 1,
                }
            }
            ResolvedCategory {
                name: c.name.clone(),
                quadruples,
                skipped,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryScore {
    pub name: String,
    /// `None` when every quadruple in the category was out of vocabulary.
    pub accuracy: Option<f64>,
    pub correct: usize,
    pub used: usize,
    pub skipped: usize,
}

pub fn score_analogies(
    categories: &[ResolvedCategory],
    t: &TransformedEmbeddings,
    n: &NormalizedEmbeddings,
    p: usize,
    policy: ExcludePolicy,
) -> Result<Vec<CategoryScore>> {
    check_p(p, n.dim())?;
    if t.n() != n.n() || t.dim() != n.dim() {
        return Err(Error::DimensionMismatch {
            expected: n.n(),
            found: t.n(),
        });
    }
    if categories.iter().all(|c| c.quadruples.is_empty()) {
        return Err(Error::invalid("no in-vocabulary analogy quadruples"));
    }
    categories
        .iter()
        .map(|c| {
            let mut correct = 0;
            for &[a, b, x, answer] in &c.quadruples {
                let q = analogy_query(t, a, b, x)?;
                if analogy_search_topp(&q, n, p, policy)?.index == answer {
                    correct += 1;
                }
            }
            let used = c.quadruples.len();
            Ok(CategoryScore {
                name: c.name.clone(),
                accuracy: (used > 0).then(|| correct as f64 / used as f64),
                correct,
                used,
                skipped: c.skipped,
            })
        })
        .collect()
}

/// Top-1 accuracy per category. `t` supplies the unnormalized rows for the
/// query vector, `n` the normalized rows of the same space.
pub fn analogy_eval(
    d: &AnalogyDataset,
    t: &TransformedEmbeddings,
    n: &NormalizedEmbeddings,
    p: usize,
    policy: ExcludePolicy,
) -> Result<Vec<CategoryScore>> {
    let resolved = resolve_analogies(d, &WordIndex::new(n.vocab()));
    score_analogies(&resolved, t, n, p, policy)
}

fn default_spaces() -> Vec<Space> {
    vec![Space::Pca, Space::Ica]
}

/// Benchmark suite description, read from TOML:
///
/// ```toml
/// wordsim = ["MEN.txt", "WS353.txt"]
/// analogy = ["questions-words.txt"]
/// p_grid = [1, 5, 10, 50, 100, 300]
/// spaces = ["pca", "ica"]
/// exclude_policy = "exclude-query-words"
/// ```
///
/// Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub wordsim: Vec<PathBuf>,
    #[serde(default)]
    pub analogy: Vec<PathBuf>,
    pub p_grid: Vec<usize>,
    #[serde(default = "default_spaces")]
    pub spaces: Vec<Space>,
    #[serde(default)]
    pub exclude_policy: ExcludePolicy,
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("suite config: {e}")))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let Some(base) = path.parent() {
            for p in cfg.wordsim.iter_mut().chain(cfg.analogy.iter_mut()) {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Similarity,
    Analogy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub task: String,
    pub kind: TaskKind,
    pub p: usize,
    pub space: Space,
    pub score: f64,
    pub used: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalAverage {
    pub kind: TaskKind,
    pub p: usize,
    pub space: Space,
    pub mean: f64,
    pub tasks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub exclude_policy: ExcludePolicy,
    pub rows: Vec<EvalRow>,
    pub averages: Vec<EvalAverage>,
}

impl EvalReport {
    pub fn score(&self, task: &str, p: usize, space: Space) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.task == task && r.p == p && r.space == space)
            .map(|r| r.score)
    }

    pub fn average(&self, kind: TaskKind, p: usize, space: Space) -> Option<f64> {
        self.averages
            .iter()
            .find(|a| a.kind == kind && a.p == p && a.space == space)
            .map(|a| a.mean)
    }
}

/// Runs every task for every `p` and requested space. `embeddings` must
/// contain one matrix per requested space; all share one vocabulary.
pub fn run_suite(cfg: &SuiteConfig, embeddings: &[TransformedEmbeddings]) -> Result<EvalReport> {
    if cfg.p_grid.is_empty() {
        return Err(Error::invalid("p grid is empty"));
    }
    if cfg.spaces.is_empty() {
        return Err(Error::invalid("no spaces requested"));
    }
    if cfg.wordsim.is_empty() && cfg.analogy.is_empty() {
        return Err(Error::invalid("suite lists no datasets"));
    }
    let mut spaces = Vec::new();
    for &s in &cfg.spaces {
        let t = embeddings
            .iter()
            .find(|t| t.space() == s)
            .ok_or_else(|| Error::invalid(format!("no {s} embeddings supplied")))?;
        spaces.push((s, t, normalize_rows(t)?));
    }
    let d = spaces[0].2.dim();
    for &p in &cfg.p_grid {
        check_p(p, d)?;
    }
    let index = WordIndex::new(spaces[0].2.vocab());

    let mut rows = Vec::new();
    for path in &cfg.wordsim {
        let ds = read_wordsim(path)?;
        let resolved = resolve_pairs(&ds, &index);
        for &p in &cfg.p_grid {
            for (space, _, n) in &spaces {
                let s = score_pairs(&resolved, n, p)?;
                rows.push(EvalRow {
                    task: ds.name.clone(),
                    kind: TaskKind::Similarity,
                    p,
                    space: *space,
                    score: s.rho,
                    used: s.used,
                    skipped: s.skipped,
                });
            }
        }
    }
    for path in &cfg.analogy {
        let ds = read_analogy(path)?;
        let resolved = resolve_analogies(&ds, &index);
        for &p in &cfg.p_grid {
            for (space, t, n) in &spaces {
                for c in score_analogies(&resolved, t, n, p, cfg.exclude_policy)? {
                    if let Some(acc) = c.accuracy {
                        rows.push(EvalRow {
                            task: c.name,
                            kind: TaskKind::Analogy,
                            p,
                            space: *space,
                            score: acc,
                            used: c.used,
                            skipped: c.skipped,
                        });
                    }
                }
            }
        }
    }

    let mut averages = Vec::new();
    for kind in [TaskKind::Similarity, TaskKind::Analogy] {
        for &p in &cfg.p_grid {
            for (space, _, _) in &spaces {
                let scores: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.kind == kind && r.p == p && r.space == *space)
                    .map(|r| r.score)
                    .collect();
                if !scores.is_empty() {
                    averages.push(EvalAverage {
                        kind,
                        p,
                        space: *space,
                        mean: scores.iter().sum::<f64>() / scores.len() as f64,
                        tasks: scores.len(),
                    });
                }
            }
        }
    }
    Ok(EvalReport {
        exclude_policy: cfg.exclude_policy,
        rows,
        averages,
    })
}
