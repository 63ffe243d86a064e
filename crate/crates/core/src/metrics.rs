//! Pairwise manifold metrics and metaclass pooling.
//!
//! * Cosine similarity of centroids: `<c1/|c1|, c2/|c2|>`.
//! * Squared Mahalanobis distance with a pooled diagonal covariance:
//!   `sum_i (c1_i - c2_i)^2 / ((var1_i + var2_i) / 2 + eps)`.
//!
//! Pooling averages a metric over every qualifying pair of classes in each
//! metaclass cell (TG-TG, TG-BG, BG-BG). Both metrics are symmetric, so the
//! 2×2 matrix is symmetric and three cells describe it.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Metaclass;
use crate::manifold::{ClassKey, FinalizedManifold, VarianceMode};

pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "cosine")]
    Cosine,
    #[serde(rename = "mahalanobis_sq")]
    MahalanobisSq,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Cosine, Metric::MahalanobisSq];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::MahalanobisSq => "mahalanobis_sq",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How TG-BG pairs are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PoolingMode {
    /// Every ordered `(TG_i, BG_j)`, including `i == j`.
    #[default]
    #[serde(rename = "all-pairs")]
    AllPairs,
    /// Only `(TG_i, BG_i)`.
    #[serde(rename = "same-sequence")]
    SameSequenceOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Variance floor added to each pooled variance.
    pub epsilon: f64,
    pub pooling: PoolingMode,
    pub variance: VarianceMode,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { epsilon: DEFAULT_EPSILON, pooling: PoolingMode::AllPairs, variance: VarianceMode::Sample }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.epsilon > 0.0 && self.epsilon.is_finite() {
            Ok(())
        } else {
            Err(MetricError::Epsilon)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("degenerate centroid {0}: zero L2 norm")]
    DegenerateCentroid(ClassKey),
    #[error("dimension mismatch between {left} and {right}")]
    DimensionMismatch { left: ClassKey, right: ClassKey },
    #[error("at least 2 sequences are needed for within-metaclass pairs, got {0}")]
    TooFewSequences(usize),
    #[error("sequence {0:?} lacks a {1} manifold")]
    MissingClass(String, Metaclass),
    #[error("class {0} appears more than once")]
    DuplicateClass(ClassKey),
    #[error("variance floor must be positive and finite")]
    Epsilon,
}

fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine from precomputed squared norms; `sqrt(|a|^2 |b|^2)` keeps
/// self-similarity exactly 1.
fn cosine_with_norms(a: &[f64], b: &[f64], na: f64, nb: f64) -> f64 {
    (dot(a, b) / libm::sqrt(na * nb)).clamp(-1.0, 1.0)
}

/// Cosine similarity of two raw vectors; `None` if either has zero norm or
/// the lengths differ.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (squared_norm(a), squared_norm(b));
    if a.len() != b.len() || na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(cosine_with_norms(a, b, na, nb))
}

pub fn cosine_similarity(a: &FinalizedManifold, b: &FinalizedManifold) -> Result<f64, MetricError> {
    if a.dimension() != b.dimension() {
        return Err(MetricError::DimensionMismatch { left: a.key.clone(), right: b.key.clone() });
    }
    let (na, nb) = (squared_norm(&a.centroid), squared_norm(&b.centroid));
    if na == 0.0 {
        return Err(MetricError::DegenerateCentroid(a.key.clone()));
    }
    if nb == 0.0 {
        return Err(MetricError::DegenerateCentroid(b.key.clone()));
    }
    Ok(cosine_with_norms(&a.centroid, &b.centroid, na, nb))
}

/// Squared Mahalanobis distance over raw centroid/variance slices.
pub fn mahalanobis_sq_raw(c1: &[f64], v1: &[f64], c2: &[f64], v2: &[f64], epsilon: f64) -> f64 {
    c1.iter()
        .zip(c2)
        .zip(v1.iter().zip(v2))
        .map(|((a, b), (va, vb))| {
            let d = a - b;
            d * d / (0.5 * (va + vb) + epsilon)
        })
        .sum()
}

pub fn mahalanobis_sq(a: &FinalizedManifold, b: &FinalizedManifold, config: &MetricConfig) -> Result<f64, MetricError> {
    config.validate()?;
    if a.dimension() != b.dimension() || a.variance.len() != b.variance.len() {
        return Err(MetricError::DimensionMismatch { left: a.key.clone(), right: b.key.clone() });
    }
    Ok(mahalanobis_sq_raw(&a.centroid, &a.variance, &b.centroid, &b.variance, config.epsilon))
}

/// Pooled means keyed by metaclass cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cells<T> {
    #[serde(rename = "TG-TG")]
    pub tg_tg: T,
    #[serde(rename = "TG-BG")]
    pub tg_bg: T,
    #[serde(rename = "BG-BG")]
    pub bg_bg: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cell {
    #[serde(rename = "TG-TG")]
    TgTg,
    #[serde(rename = "TG-BG")]
    TgBg,
    #[serde(rename = "BG-BG")]
    BgBg,
}

impl Cell {
    pub const ALL: [Cell; 3] = [Cell::TgTg, Cell::TgBg, Cell::BgBg];

    pub fn label(self) -> &'static str {
        match self {
            Cell::TgTg => "TG-TG",
            Cell::TgBg => "TG-BG",
            Cell::BgBg => "BG-BG",
        }
    }

    /// Cell at row/column of the 2×2 matrix (0 = TG, 1 = BG).
    pub fn at(row: usize, col: usize) -> Cell {
        match (row.min(col), row.max(col)) {
            (0, 0) => Cell::TgTg,
            (0, _) => Cell::TgBg,
            _ => Cell::BgBg,
        }
    }
}

impl<T: Copy> Cells<T> {
    pub fn get(&self, cell: Cell) -> T {
        match cell {
            Cell::TgTg => self.tg_tg,
            Cell::TgBg => self.tg_bg,
            Cell::BgBg => self.bg_bg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub a: ClassKey,
    pub b: ClassKey,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaclassMatrix {
    pub network: String,
    pub metric: Metric,
    pub cells: Cells<f64>,
    pub pair_counts: Cells<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_pair_values: Option<Vec<PairValue>>,
}

/// TG and BG manifold of one sequence.
#[derive(Debug, Clone, Copy)]
pub struct SequencePair<'a> {
    pub target: &'a FinalizedManifold,
    pub background: &'a FinalizedManifold,
}

/// Group manifolds by sequence (first-appearance order), requiring exactly
/// one TG and one BG per sequence.
pub fn pair_by_sequence(manifolds: &[FinalizedManifold]) -> Result<Vec<SequencePair<'_>>, MetricError> {
    let mut names: Vec<&str> = Vec::new();
    let mut slots: Vec<[Option<&FinalizedManifold>; 2]> = Vec::new();
    for m in manifolds {
        let i = match names.iter().position(|n| *n == m.key.sequence) {
            Some(i) => i,
            None => {
                names.push(&m.key.sequence);
                slots.push([None, None]);
                names.len() - 1
            }
        };
        let slot = &mut slots[i][m.key.metaclass.code() as usize];
        if slot.is_some() {
            return Err(MetricError::DuplicateClass(m.key.clone()));
        }
        *slot = Some(m);
    }
    names
        .iter()
        .zip(slots)
        .map(|(name, [tg, bg])| {
            Ok(SequencePair {
                target: tg.ok_or_else(|| MetricError::MissingClass(String::from(*name), Metaclass::Target))?,
                background: bg.ok_or_else(|| MetricError::MissingClass(String::from(*name), Metaclass::Background))?,
            })
        })
        .collect()
}

struct Pooler<'a> {
    metric: Metric,
    config: &'a MetricConfig,
    norms: Vec<[f64; 2]>,
    keep: Option<Vec<PairValue>>,
}

impl Pooler<'_> {
    fn value(&mut self, pairs: &[SequencePair<'_>], (i, mi): (usize, Metaclass), (j, mj): (usize, Metaclass)) -> f64 {
        let pick = |k: usize, m: Metaclass| match m {
            Metaclass::Target => pairs[k].target,
            Metaclass::Background => pairs[k].background,
        };
        let (a, b) = (pick(i, mi), pick(j, mj));
        let v = match self.metric {
            Metric::Cosine => cosine_with_norms(
                &a.centroid,
                &b.centroid,
                self.norms[i][mi.code() as usize],
                self.norms[j][mj.code() as usize],
            ),
            Metric::MahalanobisSq => {
                mahalanobis_sq_raw(&a.centroid, &a.variance, &b.centroid, &b.variance, self.config.epsilon)
            }
        };
        if let Some(keep) = self.keep.as_mut() {
            keep.push(PairValue { a: a.key.clone(), b: b.key.clone(), value: v });
        }
        v
    }
}

/// Pool one metric over all classes of one network.
///
/// TG-TG and BG-BG average over unordered pairs of distinct sequences;
/// TG-BG follows `config.pooling`.
pub fn pool_metaclass_matrix(
    network: &str,
    manifolds: &[FinalizedManifold],
    metric: Metric,
    config: &MetricConfig,
    keep_pairs: bool,
) -> Result<MetaclassMatrix, MetricError> {
    config.validate()?;
    let pairs = pair_by_sequence(manifolds)?;
    let s = pairs.len();
    if s < 2 {
        return Err(MetricError::TooFewSequences(s));
    }
    let dim = pairs[0].target.dimension();
    for p in &pairs {
        for m in [p.target, p.background] {
            if m.dimension() != dim || m.variance.len() != dim {
                return Err(MetricError::DimensionMismatch { left: pairs[0].target.key.clone(), right: m.key.clone() });
            }
        }
    }
    let norms: Vec<[f64; 2]> = pairs
        .iter()
        .map(|p| [squared_norm(&p.target.centroid), squared_norm(&p.background.centroid)])
        .collect();
    if metric == Metric::Cosine {
        for (p, n) in pairs.iter().zip(&norms) {
            if n[0] == 0.0 {
                return Err(MetricError::DegenerateCentroid(p.target.key.clone()));
            }
            if n[1] == 0.0 {
                return Err(MetricError::DegenerateCentroid(p.background.key.clone()));
            }
        }
    }
    let mut pooler = Pooler { metric, config, norms, keep: keep_pairs.then(Vec::new) };
    let (tg, bg) = (Metaclass::Target, Metaclass::Background);

    let within = |m: Metaclass, pooler: &mut Pooler<'_>| {
        let mut sum = 0.0;
        let mut count = 0u64;
        for i in 0..s {
            for j in i + 1..s {
                sum += pooler.value(&pairs, (i, m), (j, m));
                count += 1;
            }
        }
        (sum / count as f64, count)
    };
    let (tg_tg, n_tg_tg) = within(tg, &mut pooler);
    let (bg_bg, n_bg_bg) = within(bg, &mut pooler);

    let mut sum = 0.0;
    let mut n_tg_bg = 0u64;
    for i in 0..s {
        match config.pooling {
            PoolingMode::AllPairs => {
                for j in 0..s {
                    sum += pooler.value(&pairs, (i, tg), (j, bg));
                    n_tg_bg += 1;
                }
            }
            PoolingMode::SameSequenceOnly => {
                sum += pooler.value(&pairs, (i, tg), (i, bg));
                n_tg_bg += 1;
            }
        }
    }
    Ok(MetaclassMatrix {
        network: String::from(network),
        metric,
        cells: Cells { tg_tg, tg_bg: sum / n_tg_bg as f64, bg_bg },
        pair_counts: Cells { tg_tg: n_tg_tg, tg_bg: n_tg_bg, bg_bg: n_bg_bg },
        per_pair_values: pooler.keep,
    })
}
