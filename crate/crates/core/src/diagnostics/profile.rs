//! Component ranks and sorted component profiles.

use ndarray::{Array1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};
use crate::select::order_desc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankRecord {
    pub word: usize,
    pub norm: f64,
    /// 1 for the word with the largest value on the axis.
    pub rank_in_axis: usize,
    /// 1 when the axis is the word's largest component.
    pub rank_in_embedding: usize,
}

/// Ranks of every word's component on `axis`, both across words and within
/// the word's own vector. Ties go to the lower index.
pub fn rank_analysis(e: ArrayView2<'_, f64>, axis: usize, norms: &[f64]) -> Result<Vec<RankRecord>> {
    check_index("axis", axis, e.ncols())?;
    if norms.len() != e.nrows() {
        return Err(Error::DimensionMismatch {
            expected: e.nrows(),
            found: norms.len(),
        });
    }
    let column: Vec<f64> = e.column(axis).to_vec();
    let mut rank_in_axis = vec![0; e.nrows()];
    for (r, i) in order_desc(&column).into_iter().enumerate() {
        rank_in_axis[i] = r + 1;
    }
    Ok(e
        .axis_iter(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(i, row)| {
            let v = row[axis];
            let ahead = row
                .iter()
                .enumerate()
                .filter(|&(l, &x)| x > v || (x == v && l < axis))
                .count();
            RankRecord {
                word: i,
                norm: norms[i],
                rank_in_axis: rank_in_axis[i],
                rank_in_embedding: ahead + 1,
            }
        })
        .collect())
}

/// Spearman correlation between norm and within-embedding rank among the
/// words ranked `1..=top` on the axis.
pub fn norm_rank_correlation(records: &[RankRecord], top: usize) -> Result<f64> {
    let (norms, ranks): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.rank_in_axis <= top)
        .map(|r| (r.norm, r.rank_in_embedding as f64))
        .unzip();
    crate::eval::spearman(&norms, &ranks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileMode {
    /// Sort each axis over words; curve length `n`.
    PerAxis,
    /// Sort each word over axes; curve length `d`.
    PerEmbedding,
}

impl std::str::FromStr for ProfileMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-axis" | "axis" => Ok(ProfileMode::PerAxis),
            "per-embedding" | "embedding" => Ok(ProfileMode::PerEmbedding),
            other => Err(Error::invalid(format!("unknown profile mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SortedProfile {
    pub mode: ProfileMode,
    pub mean: Vec<f64>,
    /// Population standard deviation at each position.
    pub sigma: Vec<f64>,
}

/// Sorts every axis (or every word) in descending order and summarizes each
/// sorted position by mean and standard deviation.
pub fn sorted_profiles(e: ArrayView2<'_, f64>, mode: ProfileMode) -> Result<SortedProfile> {
    if e.is_empty() {
        return Err(Error::EmptyInput);
    }
    let lanes = match mode {
        ProfileMode::PerAxis => e.axis_iter(Axis(1)),
        ProfileMode::PerEmbedding => e.axis_iter(Axis(0)),
    };
    let sorted: Vec<Vec<f64>> = lanes
        .into_par_iter()
        .map(|lane| {
            let mut v = lane.to_vec();
            v.sort_unstable_by(|a, b| b.total_cmp(a));
            v
        })
        .collect();

    let len = sorted[0].len();
    let mut mean = Array1::<f64>::zeros(len);
    let mut m2 = Array1::<f64>::zeros(len);
    for (count, v) in sorted.iter().enumerate() {
        let c = (count + 1) as f64;
        for ((m, s), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(v) {
            let delta = x - *m;
            *m += delta / c;
            *s += delta * (x - *m);
        }
    }
    let total = sorted.len() as f64;
    let sigma = m2.iter().map(|s| (s / total).max(0.0).sqrt()).collect();
    Ok(SortedProfile {
        mode,
        mean: mean.to_vec(),
        sigma,
    })
}
