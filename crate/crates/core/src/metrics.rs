//! Bicluster comparison metrics and link-prediction scores.
//!
//! Clustering error (CE) and consensus score (CS) match estimated to true biclusters
//! one-to-one with the Hungarian algorithm on an overlap confusion matrix. Relevance and
//! recovery average best Jaccard similarities in either direction.

mod hungarian;

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use hungarian::max_weight_assignment;

use crate::error::{Error, Result};
use crate::model::{BinaryMatrix, FactorPair};

/// A bicluster as a (row set, column set) pair, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bicluster {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Bicluster {
    /// Sorts and deduplicates both index lists.
    pub fn new(mut rows: Vec<usize>, mut cols: Vec<usize>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        Bicluster { rows, cols }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() || self.cols.is_empty()
    }

    pub fn cells(&self) -> CellSet {
        CellSet::from_product(&self.rows, &self.cols)
    }
}

/// Sorted, duplicate-free set of `(row, col)` cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellSet(Vec<(usize, usize)>);

impl CellSet {
    pub fn from_cells(cells: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut v: Vec<_> = cells.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        CellSet(v)
    }

    pub fn from_product(rows: &[usize], cols: &[usize]) -> Self {
        Self::from_cells(rows.iter().flat_map(|&i| cols.iter().map(move |&j| (i, j))))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.0
    }

    /// Size of the intersection by a linear merge.
    pub fn intersection_len(&self, other: &CellSet) -> usize {
        let (mut p, mut q, mut n) = (0, 0, 0);
        let (a, b) = (&self.0, &other.0);
        while p < a.len() && q < b.len() {
            match a[p].cmp(&b[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    p += 1;
                    q += 1;
                }
            }
        }
        n
    }
}

/// An ordered list of biclusters. Empty biclusters are dropped on construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BiclusterSet {
    clusters: Vec<Bicluster>,
}

impl BiclusterSet {
    pub fn new(clusters: Vec<Bicluster>) -> Self {
        let before = clusters.len();
        let clusters: Vec<_> = clusters.into_iter().filter(|c| !c.is_empty()).collect();
        if clusters.len() < before {
            log::warn!("dropped {} empty bicluster(s)", before - clusters.len());
        }
        BiclusterSet { clusters }
    }

    pub fn clusters(&self) -> &[Bicluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cell_sets(&self) -> Vec<CellSet> {
        self.clusters.iter().map(Bicluster::cells).collect()
    }

    /// Removes biclusters identical to an earlier one.
    pub fn dedup(&mut self) {
        let mut seen = BTreeSet::new();
        self.clusters
            .retain(|c| seen.insert((c.rows.clone(), c.cols.clone())));
    }

    /// Checks every index against the matrix shape.
    pub fn check_bounds(&self, rows: usize, cols: usize) -> Result<()> {
        for (k, c) in self.clusters.iter().enumerate() {
            if c.rows.iter().any(|&i| i >= rows) || c.cols.iter().any(|&j| j >= cols) {
                return Err(Error::InvalidArgument(format!(
                    "bicluster {k} has indices outside {rows}x{cols}"
                )));
            }
        }
        Ok(())
    }
}

/// Biclusters read off the supports of the factor columns: rows `{i: a_ik != 0}` times cols `{j: b_jk != 0}`.
pub fn extract_biclusters(fp: &FactorPair, dedup: bool) -> BiclusterSet {
    let clusters = (0..fp.k())
        .map(|k| {
            let rows =
                fp.a.column(k)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(i, _)| i)
                    .collect();
            let cols =
                fp.b.column(k)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, _)| j)
                    .collect();
            Bicluster { rows, cols }
        })
        .filter(|c: &Bicluster| !c.is_empty())
        .collect();
    let mut set = BiclusterSet { clusters };
    if dedup {
        set.dedup();
    }
    set
}

/// Jaccard index `|A ∩ B| / |A ∪ B|`; two empty sets score 1.
pub fn jaccard(a: &CellSet, b: &CellSet) -> f64 {
    let inter = a.intersection_len(b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// Clustering error: intersection counts.
    Ce,
    /// Consensus score: Jaccard indices.
    Cs,
}

/// Normalizer for the CE score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CeNorm {
    /// Multiset union of the cells covered by either set; keeps CE in `[0, 1]`.
    #[default]
    Union,
    /// `max(|C|, |C'|)`, the bicluster count.
    Count,
}

/// Confusion matrix between two bicluster collections.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub m: Array2<f64>,
    /// The entries of `m` as exact fractions.
    pub fractions: Array2<Fraction>,
    pub kind: ScoreKind,
}

impl ConfusionMatrix {
    pub fn build(truth: &[CellSet], est: &[CellSet], kind: ScoreKind) -> Self {
        let fractions = Array2::from_shape_fn((truth.len(), est.len()), |(i, j)| {
            let inter = truth[i].intersection_len(&est[j]) as u128;
            match kind {
                ScoreKind::Ce => Fraction::new(inter, 1),
                ScoreKind::Cs => {
                    let union = (truth[i].len() + est[j].len()) as u128 - inter;
                    if union == 0 {
                        Fraction::new(1, 1)
                    } else {
                        Fraction::new(inter, union)
                    }
                }
            }
        });
        let m = fractions.mapv(Fraction::to_f64);
        ConfusionMatrix { m, fractions, kind }
    }

    /// Best one-to-one matched total after zero-padding to square.
    ///
    /// The matched entries are summed as exact fractions, so tied optimal
    /// assignments always produce the same float.
    pub fn matched_total(&self) -> f64 {
        let (r, c) = self.m.dim();
        let n = r.max(c);
        let mut square = Array2::zeros((n, n));
        square.slice_mut(ndarray::s![..r, ..c]).assign(&self.m);
        let assignment = max_weight_assignment(&square);
        let matched: Vec<(usize, usize)> = assignment
            .iter()
            .enumerate()
            .filter(|&(i, &j)| i < r && j < c)
            .map(|(i, &j)| (i, j))
            .collect();
        let exact = matched.iter().try_fold(Fraction::ZERO, |acc, &(i, j)| {
            acc.checked_add(self.fractions[[i, j]])
        });
        match exact {
            Some(f) => f.to_f64(),
            None => {
                let mut values: Vec<f64> = matched.iter().map(|&(i, j)| self.m[[i, j]]).collect();
                values.sort_by(f64::total_cmp);
                values.iter().sum()
            }
        }
    }
}

/// Non-negative fraction in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    pub num: u128,
    pub den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };

    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Fraction {
            num: num / g,
            den: den / g,
        }
    }

    /// `None` on overflow.
    pub fn checked_add(self, other: Fraction) -> Option<Fraction> {
        let g = gcd(self.den, other.den);
        let lhs = self.num.checked_mul(other.den / g)?;
        let rhs = other.num.checked_mul(self.den / g)?;
        let den = (self.den / g).checked_mul(other.den)?;
        Some(Fraction::new(lhs.checked_add(rhs)?, den))
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn coverage(sets: &[CellSet]) -> BTreeMap<(usize, usize), usize> {
    let mut counts = BTreeMap::new();
    for cell in sets.iter().flat_map(|c| c.cells().iter().copied()) {
        *counts.entry(cell).or_insert(0) += 1;
    }
    counts
}

/// Size of the multiset union: every covered cell counts `max(coverage in truth, coverage in est)` times.
fn union_cells(truth: &[CellSet], est: &[CellSet]) -> usize {
    let t = coverage(truth);
    let mut e = coverage(est);
    let mut total = 0;
    for (cell, n) in t {
        total += n.max(e.remove(&cell).unwrap_or(0));
    }
    total + e.values().sum::<usize>()
}

/// CE or CS between cell-set collections.
pub fn match_and_score_cells(
    truth: &[CellSet],
    est: &[CellSet],
    kind: ScoreKind,
    ce_norm: CeNorm,
) -> f64 {
    match (truth.is_empty(), est.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let total = ConfusionMatrix::build(truth, est, kind).matched_total();
    let normalizer = match (kind, ce_norm) {
        (ScoreKind::Ce, CeNorm::Union) => union_cells(truth, est) as f64,
        _ => truth.len().max(est.len()) as f64,
    };
    total / normalizer
}

/// CE or CS between two bicluster sets; 1 if both are empty, 0 if exactly one is.
pub fn match_and_score(
    truth: &BiclusterSet,
    est: &BiclusterSet,
    kind: ScoreKind,
    ce_norm: CeNorm,
) -> f64 {
    match_and_score_cells(&truth.cell_sets(), &est.cell_sets(), kind, ce_norm)
}

/// `(relevance, recovery)` between cell-set collections.
pub fn relevance_recovery_cells(truth: &[CellSet], est: &[CellSet]) -> (f64, f64) {
    match (truth.is_empty(), est.is_empty()) {
        (true, true) => return (1.0, 1.0),
        (true, false) | (false, true) => return (0.0, 0.0),
        _ => {}
    }
    let m = ConfusionMatrix::build(truth, est, ScoreKind::Cs).m;
    let best = |it: ndarray::ArrayView1<'_, f64>| it.iter().copied().fold(0.0, f64::max);
    let relevance = m.columns().into_iter().map(best).sum::<f64>() / est.len() as f64;
    let recovery = m.rows().into_iter().map(best).sum::<f64>() / truth.len() as f64;
    (relevance, recovery)
}

/// Relevance (estimates against truth) and recovery (truth against estimates).
pub fn relevance_recovery(truth: &BiclusterSet, est: &BiclusterSet) -> (f64, f64) {
    relevance_recovery_cells(&truth.cell_sets(), &est.cell_sets())
}

/// All four bicluster scores at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub ce: f64,
    pub cs: f64,
    pub relevance: f64,
    pub recovery: f64,
}

pub fn score_all(truth: &BiclusterSet, est: &BiclusterSet, ce_norm: CeNorm) -> Scores {
    let t = truth.cell_sets();
    let e = est.cell_sets();
    let (relevance, recovery) = relevance_recovery_cells(&t, &e);
    Scores {
        ce: match_and_score_cells(&t, &e, ScoreKind::Ce, ce_norm),
        cs: match_and_score_cells(&t, &e, ScoreKind::Cs, ce_norm),
        relevance,
        recovery,
    }
}

fn check_labels(labels: &[bool]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "need at least one positive and one negative label, got {pos} and {neg}"
        )));
    }
    Ok((pos, neg))
}

/// Indices sorted by descending score.
fn descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&p, &q| scores[q].total_cmp(&scores[p]));
    idx
}

/// ROC AUC as the Mann-Whitney statistic with midranks for ties.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(
            "scores and labels differ in length".into(),
        ));
    }
    let (pos, neg) = check_labels(labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&p, &q| scores[p].total_cmp(&scores[q]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start;
        while end + 1 < idx.len() && scores[idx[end + 1]] == scores[idx[start]] {
            end += 1;
        }
        // ranks start..=end (1-based start+1..=end+1) share their mean
        let midrank = (start + end + 2) as f64 / 2.0;
        let positives = idx[start..=end].iter().filter(|&&i| labels[i]).count();
        rank_sum += midrank * positives as f64;
        start = end + 1;
    }
    let pos_f = pos as f64;
    Ok((rank_sum - pos_f * (pos_f + 1.0) / 2.0) / (pos_f * neg as f64))
}

/// Average precision: precision at each distinct threshold weighted by the recall gained there.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(
            "scores and labels differ in length".into(),
        ));
    }
    let (pos, _) = check_labels(labels)?;
    let idx = descending(scores);
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut ap = 0.0;
    let mut last_recall = 0.0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start;
        while end + 1 < idx.len() && scores[idx[end + 1]] == scores[idx[start]] {
            end += 1;
        }
        for &i in &idx[start..=end] {
            if labels[i] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - last_recall) * precision;
        last_recall = recall;
        start = end + 1;
    }
    Ok(ap)
}

/// AUC and AUPR of the fitted probabilities against the observed cells.
///
/// `mask`, when given, selects the cells that are scored (e.g. a held-out set).
pub fn auc_aupr(
    y: &BinaryMatrix,
    fp: &FactorPair,
    mask: Option<&Array2<bool>>,
) -> Result<(f64, f64)> {
    fp.check_against(y)?;
    if let Some(m) = mask {
        if m.dim() != y.dim() {
            return Err(Error::DimensionMismatch("mask shape differs from Y".into()));
        }
    }
    let probs = fp.probabilities();
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for ((i, j), &p) in probs.indexed_iter() {
        if mask.is_none_or(|m| m[[i, j]]) {
            scores.push(p);
            labels.push(y.get(i, j));
        }
    }
    Ok((
        roc_auc(&scores, &labels)?,
        average_precision(&scores, &labels)?,
    ))
}
