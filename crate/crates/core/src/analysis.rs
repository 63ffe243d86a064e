//! Streaming embedding records into per-class statistics and pooled matrices.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::embedding::{EmbeddingRecord, HeaderInfo, Metaclass};
use crate::manifold::{ClassKey, FinalizedManifold, ManifoldError, ManifoldStats, VarianceMode};
use crate::metrics::{pool_metaclass_matrix, Metric, MetricConfig, MetricError};
use crate::report::NetworkResult;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("network {network:?}: sequence {sequence:?} from the catalog has no embeddings")]
    MissingSequence { network: String, sequence: String },
    #[error("network {network:?}: embedding dimension {found} differs from {expected}")]
    Dimension { network: String, expected: u32, found: u32 },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl AnalysisError {
    /// True when the failure is a degenerate class manifold rather than bad input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            AnalysisError::Manifold(ManifoldError::Degenerate { .. })
                | AnalysisError::Metric(MetricError::DegenerateCentroid(_))
        )
    }
}

/// Accumulates one network's records against the catalog's sequence list.
/// Alignment is by sequence name; memory is `2 × sequences × dimension`.
#[derive(Debug, Clone)]
pub struct NetworkAccumulator {
    network: String,
    dimension: u32,
    /// File sequence index to catalog position.
    mapping: Vec<Option<usize>>,
    stats: Vec<[ManifoldStats; 2]>,
    unknown: BTreeSet<String>,
    records: u64,
}

impl NetworkAccumulator {
    pub fn new(header: &HeaderInfo, dimension: u32, catalog_sequences: &[String]) -> Result<Self, AnalysisError> {
        let stats = catalog_sequences
            .iter()
            .map(|name| {
                Ok([
                    ManifoldStats::new(ClassKey::new(name.clone(), Metaclass::Target), dimension as usize)?,
                    ManifoldStats::new(ClassKey::new(name.clone(), Metaclass::Background), dimension as usize)?,
                ])
            })
            .collect::<Result<Vec<_>, ManifoldError>>()?;
        let mut unknown = BTreeSet::new();
        let mapping = header
            .sequences
            .iter()
            .map(|name| {
                let pos = catalog_sequences.iter().position(|c| c == name);
                if pos.is_none() {
                    unknown.insert(name.clone());
                }
                pos
            })
            .collect();
        Ok(Self { network: header.network.clone(), dimension, mapping, stats, unknown, records: 0 })
    }

    pub fn network(&self) -> &str {
        &self.network
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    /// Sequence names present in the file but absent from the catalog.
    pub fn unknown_sequences(&self) -> impl Iterator<Item = &str> {
        self.unknown.iter().map(String::as_str)
    }

    pub fn records_seen(&self) -> u64 {
        self.records
    }

    /// Fold one record in. Records of sequences outside the catalog are ignored.
    pub fn push(&mut self, record: &EmbeddingRecord) -> Result<(), AnalysisError> {
        self.records += 1;
        match self.mapping.get(record.sequence_index as usize).copied().flatten() {
            Some(pos) => {
                self.stats[pos][record.metaclass.code() as usize].update(&record.vector)?;
                Ok(())
            }
            None => Ok(()),
        }
    }

    /// Combine with a partial accumulator over other records of the same file.
    pub fn merge(&mut self, other: &NetworkAccumulator) -> Result<(), AnalysisError> {
        for (mine, theirs) in self.stats.iter_mut().zip(&other.stats) {
            for k in 0..2 {
                mine[k] = mine[k].merge(&theirs[k])?;
            }
        }
        self.records += other.records;
        Ok(())
    }

    /// Finalize all classes. With `allow_missing`, catalog sequences with no
    /// records at all are dropped and returned by name instead of failing.
    pub fn finish(
        self,
        mode: VarianceMode,
        allow_missing: bool,
    ) -> Result<(Vec<FinalizedManifold>, Vec<String>), AnalysisError> {
        let mut manifolds = Vec::with_capacity(self.stats.len() * 2);
        let mut missing = Vec::new();
        for [tg, bg] in self.stats {
            if tg.n == 0 && bg.n == 0 {
                if allow_missing {
                    missing.push(tg.key.sequence);
                    continue;
                }
                return Err(AnalysisError::MissingSequence { network: self.network, sequence: tg.key.sequence });
            }
            manifolds.push(tg.finalize(mode)?);
            manifolds.push(bg.finalize(mode)?);
        }
        Ok((manifolds, missing))
    }
}

/// Both pooled matrices for one network.
pub fn analyze_network(
    network: &str,
    manifolds: &[FinalizedManifold],
    config: &MetricConfig,
    keep_pairs: bool,
) -> Result<NetworkResult, AnalysisError> {
    Ok(NetworkResult {
        network: String::from(network),
        cosine: pool_metaclass_matrix(network, manifolds, Metric::Cosine, config, keep_pairs)?,
        mahalanobis_sq: pool_metaclass_matrix(network, manifolds, Metric::MahalanobisSq, config, keep_pairs)?,
    })
}
