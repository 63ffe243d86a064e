//! Analysis core for measuring how separable class manifolds are in the
//! feature spaces of competing embedding networks.
//!
//! Each annotated video sequence contributes two classes: the tracked target
//! (TG) and its surrounding background (BG). Every class is summarised by a
//! streaming mean and diagonal variance, and pairs of classes are compared
//! with cosine similarity of centroids and a diagonal-covariance Mahalanobis
//! distance. Pairwise values are pooled into a 2×2 TG/BG matrix per network.
//!
//! The crate is `no_std` and only needs `alloc`. File formats that are pure
//! byte layouts (the DCF1 embedding interchange) live here; everything that
//! touches a filesystem, image codec or process lives in the `decafbench`
//! companion crate.
//!
//! Module map:
//!
//! * [`rng`]: SplitMix64 streams and FNV-1a keying.
//! * [`geometry`]: [`BoundingBox`] and polygon reduction.
//! * [`dataset`]: sequence and catalog model, annotation line parsing.
//! * [`sampling`]: sampling plans and bounding-box noise.
//! * [`patches`]: background regions, raster crops, manifest ordering.
//! * [`embedding`]: records and the DCF1 binary codec.
//! * [`synthetic`]: deterministic Gaussian embedding provider.
//! * [`manifold`]: Welford accumulation and pairwise merge.
//! * [`metrics`]: cosine, Mahalanobis and metaclass pooling.
//! * [`analysis`]: streaming records into per-class statistics.
//! * [`report`]: analysis reports and report comparison.
//! * [`render`]: SVG heatmap grids.
//! * [`numfmt`]: `%g`-style significant-digit formatting.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod dataset;
pub mod embedding;
pub mod geometry;
pub mod manifold;
pub mod metrics;
pub mod numfmt;
pub mod patches;
pub mod render;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod synthetic;

pub use dataset::{AnnotatedSequence, DatasetCatalog, Frame, SourceFormat};
pub use embedding::{EmbeddingFile, EmbeddingRecord, Metaclass};
pub use geometry::BoundingBox;
pub use manifold::{ClassKey, FinalizedManifold, ManifoldStats, VarianceMode};
pub use metrics::{MetaclassMatrix, Metric, MetricConfig, PoolingMode};
pub use report::AnalysisReport;
pub use sampling::{SamplePlan, SampleSet};
