//! Analysis reports and cell-level report comparison.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifold::VarianceMode;
use crate::metrics::{Cell, MetaclassMatrix, Metric, MetricConfig, PoolingMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkResult {
    pub network: String,
    pub cosine: MetaclassMatrix,
    pub mahalanobis_sq: MetaclassMatrix,
}

impl NetworkResult {
    pub fn matrix(&self, metric: Metric) -> &MetaclassMatrix {
        match metric {
            Metric::Cosine => &self.cosine,
            Metric::MahalanobisSq => &self.mahalanobis_sq,
        }
    }
}

/// Configuration echoed into a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub epsilon: f64,
    pub pooling: PoolingMode,
    pub variance: VarianceMode,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ReportConfig {
    pub fn new(metric: &MetricConfig, seed: Option<u64>) -> Self {
        Self { epsilon: metric.epsilon, pooling: metric.pooling, variance: metric.variance, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub dataset: String,
    pub plan: String,
    pub networks: Vec<NetworkResult>,
    pub config: ReportConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("report has no networks")]
    NoNetworks,
    #[error("network {0:?} appears more than once")]
    DuplicateNetwork(String),
}

impl AnalysisReport {
    pub fn validate(&self) -> Result<(), ReportError> {
        if self.networks.is_empty() {
            return Err(ReportError::NoNetworks);
        }
        for (i, n) in self.networks.iter().enumerate() {
            if self.networks[..i].iter().any(|m| m.network == n.network) {
                return Err(ReportError::DuplicateNetwork(n.network.clone()));
            }
        }
        Ok(())
    }

    pub fn network(&self, name: &str) -> Option<&NetworkResult> {
        self.networks.iter().find(|n| n.network == name)
    }

    /// Every `(network, metric, cell, value, pair_count)` in report order.
    pub fn rows(&self) -> impl Iterator<Item = (&str, Metric, Cell, f64, u64)> + '_ {
        self.networks.iter().flat_map(|n| {
            Metric::ALL.into_iter().flat_map(move |metric| {
                let m = n.matrix(metric);
                Cell::ALL
                    .into_iter()
                    .map(move |cell| (n.network.as_str(), metric, cell, m.cells.get(cell), m.pair_counts.get(cell)))
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDiff {
    pub network: String,
    pub metric: Metric,
    pub cell: Cell,
    pub left: f64,
    pub right: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Comparison {
    pub max_relative: f64,
    /// Cells exceeding the tolerance.
    pub failures: Vec<CellDiff>,
    /// Networks present on only one side.
    pub structural: Vec<String>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.structural.is_empty()
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both are zero.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn compare_reports(left: &AnalysisReport, right: &AnalysisReport, tolerance: f64) -> Comparison {
    let mut out = Comparison::default();
    for n in &left.networks {
        if right.network(&n.network).is_none() {
            out.structural.push(format!("network {:?} only in first report", n.network));
        }
    }
    for n in &right.networks {
        if left.network(&n.network).is_none() {
            out.structural.push(format!("network {:?} only in second report", n.network));
        }
    }
    for a in &left.networks {
        let Some(b) = right.network(&a.network) else { continue };
        for metric in Metric::ALL {
            let (ma, mb) = (a.matrix(metric), b.matrix(metric));
            for cell in Cell::ALL {
                let (x, y) = (ma.cells.get(cell), mb.cells.get(cell));
                let relative = relative_difference(x, y);
                out.max_relative = out.max_relative.max(relative);
                if !(relative <= tolerance) {
                    out.failures.push(CellDiff {
                        network: a.network.clone(),
                        metric,
                        cell,
                        left: x,
                        right: y,
                        relative,
                    });
                }
            }
        }
    }
    out
}
