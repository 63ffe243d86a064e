//! Streaming analysis over embedding files and the experiment suite.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::thread;

use decafbench_core::analysis::{analyze_network, NetworkAccumulator};
use decafbench_core::dataset::DatasetCatalog;
use decafbench_core::manifold::FinalizedManifold;
use decafbench_core::metrics::{Metric, MetricConfig};
use decafbench_core::render::{render_heatmap_svg, RenderOptions};
use decafbench_core::report::{AnalysisReport, NetworkResult, ReportConfig};
use decafbench_core::sampling::SamplePlan;
use decafbench_core::synthetic::{generate_synthetic_file, SyntheticSpec};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::dcf::{write_embeddings, EmbeddingReader};
use crate::error::{Error, Result};
use crate::ingest::read_catalog;
use crate::samples::{plan_catalog, write_samples, SamplesFile};
use crate::{jsonio, report_io};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub catalog: PathBuf,
    /// One interchange file per network.
    pub embeddings: Vec<PathBuf>,
    pub metric: MetricConfig,
    /// Plan description echoed into the report.
    pub plan: String,
    pub seed: Option<u64>,
    pub keep_pair_values: bool,
    pub allow_missing: bool,
}

impl RunConfig {
    pub fn new(catalog: PathBuf, embeddings: Vec<PathBuf>) -> Self {
        Self {
            catalog,
            embeddings,
            metric: MetricConfig::default(),
            plan: "unspecified".into(),
            seed: None,
            keep_pair_values: false,
            allow_missing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embeddings.is_empty() {
            return Err(Error::invalid("at least one embedding file is required"));
        }
        self.metric.validate().map_err(|e| Error::invalid(e.to_string()))?;
        for path in std::iter::once(&self.catalog).chain(&self.embeddings) {
            if !path.is_file() {
                return Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found")));
            }
        }
        Ok(())
    }
}

/// A report plus the finalized manifolds behind each network.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOutput {
    pub report: AnalysisReport,
    pub manifolds: Vec<(String, Vec<FinalizedManifold>)>,
}

struct NetworkOutput {
    dataset: String,
    result: NetworkResult,
    manifolds: Vec<FinalizedManifold>,
}

fn analyze_file(path: &Path, names: &[String], config: &RunConfig) -> Result<NetworkOutput> {
    let wrap = |source| Error::Dcf { path: path.to_path_buf(), source };
    let mut reader = EmbeddingReader::open(path).map_err(wrap)?;
    let header = reader.header().clone();
    let mut acc = NetworkAccumulator::new(&header, reader.dimension(), names)?;
    for name in acc.unknown_sequences() {
        warn!("{}: sequence {name:?} is not in the catalog, ignored", path.display());
    }
    while let Some(record) = reader.next_record().map_err(wrap)? {
        acc.push(&record)?;
    }
    info!("{}: network {:?}, {} records", path.display(), header.network, acc.records_seen());
    let (manifolds, missing) = acc.finish(config.metric.variance, config.allow_missing)?;
    for name in missing {
        warn!("network {:?}: sequence {name:?} has no embeddings, skipped", header.network);
    }
    let result = analyze_network(&header.network, &manifolds, &config.metric, config.keep_pair_values)?;
    Ok(NetworkOutput { dataset: header.dataset, result, manifolds })
}

/// Analyze every embedding file against an already loaded catalog. Files
/// are processed concurrently, each in a single streaming pass.
pub fn analyze_catalog(catalog: &DatasetCatalog, config: &RunConfig) -> Result<AnalysisOutput> {
    let names: Vec<String> = catalog.sequences.iter().map(|s| s.name.clone()).collect();
    let outputs: Vec<Result<NetworkOutput>> = thread::scope(|scope| {
        let handles: Vec<_> = config
            .embeddings
            .iter()
            .map(|path| scope.spawn(|| analyze_file(path, &names, config)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("analysis worker panicked")).collect()
    });

    let mut networks = Vec::new();
    let mut manifolds = Vec::new();
    for (path, output) in config.embeddings.iter().zip(outputs) {
        let output = output?;
        if output.dataset != catalog.dataset_name {
            return Err(Error::invalid(format!(
                "{}: dataset {:?} does not match catalog dataset {:?}",
                path.display(),
                output.dataset,
                catalog.dataset_name
            )));
        }
        if networks.iter().any(|n: &NetworkResult| n.network == output.result.network) {
            return Err(Error::invalid(format!(
                "{}: network {:?} appears in more than one embedding file",
                path.display(),
                output.result.network
            )));
        }
        manifolds.push((output.result.network.clone(), output.manifolds));
        networks.push(output.result);
    }
    let report = AnalysisReport {
        dataset: catalog.dataset_name.clone(),
        plan: config.plan.clone(),
        networks,
        config: ReportConfig::new(&config.metric, config.seed),
    };
    Ok(AnalysisOutput { report, manifolds })
}

pub fn analyze(config: &RunConfig) -> Result<AnalysisOutput> {
    config.validate()?;
    let catalog = read_catalog(&config.catalog)?;
    analyze_catalog(&catalog, config)
}

/// `synth.json`: the generator parameters plus file-level labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub network: String,
    #[serde(flatten)]
    pub spec: SyntheticSpec,
    #[serde(default = "default_bg_patches")]
    pub bg_patches_per_sample: u32,
}

fn default_bg_patches() -> u32 {
    4
}

pub fn synth_embed(config: &SynthConfig, samples: &[SamplesFile], out: &Path) -> Result<u64> {
    let dataset = match samples.first() {
        Some(f) if samples.iter().all(|s| s.dataset == f.dataset) => f.dataset.clone(),
        Some(_) => return Err(Error::invalid("sample files come from different datasets")),
        None => return Err(Error::invalid("no sample files given")),
    };
    let sets = crate::samples::merge_sample_files(samples)?;
    let file = generate_synthetic_file(&config.spec, &config.network, &dataset, &sets, config.bg_patches_per_sample)
        .map_err(|e| Error::invalid(e.to_string()))?;
    write_embeddings(&file, out)?;
    Ok(file.records.len() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticNetworks {
    pub networks: Vec<SynthConfig>,
}

/// Experiment suite description; relative paths are resolved against the
/// directory of the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub catalog: PathBuf,
    pub out_dir: PathBuf,
    /// `full`, `first:N` or `random:N`.
    pub plans: Vec<String>,
    #[serde(default)]
    pub noise_px: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub window_start: u32,
    #[serde(default)]
    pub metric: MetricConfig,
    /// Embedding files per plan label, for externally produced embeddings.
    #[serde(default)]
    pub embeddings: BTreeMap<String, Vec<PathBuf>>,
    /// Synthetic networks embedded for every plan.
    #[serde(default)]
    pub synthetic: Option<SyntheticNetworks>,
    #[serde(default)]
    pub allow_missing: bool,
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut config: SuiteConfig = jsonio::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.catalog = base.join(&config.catalog);
        config.out_dir = base.join(&config.out_dir);
        for files in config.embeddings.values_mut() {
            files.iter_mut().for_each(|f| *f = base.join(&*f));
        }
        Ok(config)
    }
}

/// Files written for one suite case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteCase {
    pub label: String,
    pub report: PathBuf,
    pub figures: Vec<PathBuf>,
}

/// One report (JSON, CSV and both figures) per plan.
pub fn run_experiment_suite(config: &SuiteConfig) -> Result<Vec<SuiteCase>> {
    if config.plans.is_empty() {
        return Err(Error::invalid("suite has no plans"));
    }
    let catalog = read_catalog(&config.catalog)?;
    let plans = config
        .plans
        .iter()
        .map(|p| SamplePlan::parse(p, config.noise_px, config.seed, config.window_start).map_err(|e| Error::invalid(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let mut labels: Vec<String> = plans.iter().map(SamplePlan::label).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != plans.len() {
        return Err(Error::invalid("suite plans must be distinct"));
    }
    let synthetic = config.synthetic.as_ref().map_or(&[][..], |s| &s.networks[..]);

    let mut cases = Vec::new();
    for plan in plans {
        let label = plan.label();
        let stem = format!("{}_{label}", catalog.dataset_name);
        let samples = plan_catalog(&catalog, &config.catalog, plan)?;
        write_samples(&samples, &config.out_dir.join(format!("{stem}.samples.json")))?;

        let mut embeddings = config.embeddings.get(&label).cloned().unwrap_or_default();
        for net in synthetic {
            let path = config.out_dir.join(format!("{stem}_{}.dcf", net.network));
            synth_embed(net, std::slice::from_ref(&samples), &path)?;
            embeddings.push(path);
        }
        if embeddings.is_empty() {
            return Err(Error::invalid(format!("plan {label}: no embedding files")));
        }

        let seed = matches!(plan, SamplePlan::RandomWithNoise { .. }).then_some(config.seed);
        let run = RunConfig {
            catalog: config.catalog.clone(),
            embeddings,
            metric: config.metric,
            plan: plan.describe(),
            seed,
            keep_pair_values: false,
            allow_missing: config.allow_missing,
        };
        let output = analyze_catalog(&catalog, &run)?;
        let report_path = config.out_dir.join(format!("{stem}.report.json"));
        report_io::emit_report_json(&output.report, &report_path)?;
        report_io::emit_report_csv(&output.report, &config.out_dir.join(format!("{stem}.report.csv")))?;
        let mut figures = Vec::new();
        for metric in Metric::ALL {
            let path = config.out_dir.join(format!("{stem}.{}.svg", metric.label()));
            if let Some(svg) = render_figure(&output.report, metric, RenderOptions::default())? {
                jsonio::write_file(&path, svg.as_bytes())?;
                figures.push(path);
            }
        }
        info!("suite case {label}: {}", report_path.display());
        cases.push(SuiteCase { label, report: report_path, figures });
    }
    Ok(cases)
}

/// The SVG for a report, or `None` when it has more networks than the grid holds.
pub fn render_figure(report: &AnalysisReport, metric: Metric, options: RenderOptions) -> Result<Option<String>> {
    match render_heatmap_svg(report, metric, options) {
        Ok(svg) => Ok(Some(svg)),
        Err(e @ decafbench_core::render::RenderError::TooManyNetworks(_)) => {
            warn!("{e}; figure not written");
            Ok(None)
        }
        Err(e) => Err(Error::invalid(e.to_string())),
    }
}
