use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use decafbench::analyze::{analyze, run_experiment_suite, synth_embed, RunConfig, SuiteConfig, SynthConfig};
use decafbench::crops::{build_crop_manifest, verify_manifest};
use decafbench::error::{exit, Error, Result};
use decafbench::ingest::{load_dataset, read_catalog, write_catalog, IngestOptions};
use decafbench::report_io::{emit_report_csv, emit_report_json, read_report};
use decafbench::samples::{merge_sample_files, plan_catalog, read_samples, write_samples, SamplesFile};
use decafbench::{analyze::render_figure, jsonio};
use decafbench_core::dataset::SourceFormat;
use decafbench_core::manifold::VarianceMode;
use decafbench_core::metrics::{Metric, MetricConfig, PoolingMode, DEFAULT_EPSILON};
use decafbench_core::render::RenderOptions;
use decafbench_core::report::compare_reports;
use decafbench_core::sampling::SamplePlan;
use log::info;
use serde_json::json;

/// Exit status for a completed comparison or verification that found differences.
const VERDICT_FAILED: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "decafbench", version, about = "Class-manifold discriminability of deep feature embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DatasetType {
    Vot2015,
    Uav123,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PoolingArg {
    AllPairs,
    SameSequence,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VarianceArg {
    Sample,
    Population,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Cosine,
    Mahalanobis,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a benchmark directory into a catalog
    Ingest {
        #[arg(long, value_enum)]
        dataset_type: DatasetType,
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fail on any malformed sequence instead of skipping it
        #[arg(long)]
        strict: bool,
    },
    /// Plan sample sets for every catalog sequence
    Sample {
        #[arg(long)]
        catalog: PathBuf,
        /// full, first:N or random:N
        #[arg(long)]
        plan: String,
        #[arg(long, default_value_t = 0)]
        noise_px: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip this many sampleable frames before a first:N window
        #[arg(long, default_value_t = 0)]
        window_start: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write target and background crops plus manifest.json
    Crops {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, required = true)]
        samples: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a crop manifest against the files on disk
    VerifyManifest {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Write a synthetic Gaussian embedding file for sample sets
    SynthEmbed {
        #[arg(long, required = true)]
        samples: Vec<PathBuf>,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute pooled metaclass matrices for each embedding file
    Analyze {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, required = true)]
        embeddings: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "all-pairs")]
        pooling: PoolingArg,
        #[arg(long, value_enum, default_value = "sample")]
        variance: VarianceArg,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        /// Sample file whose plan is recorded in the report
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Plan description recorded in the report
        #[arg(long, conflicts_with = "samples")]
        plan_label: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Keep every pairwise value in the report
        #[arg(long)]
        pair_values: bool,
        /// Skip catalog sequences missing from an embedding file
        #[arg(long)]
        allow_missing: bool,
        /// Also write finalized class statistics
        #[arg(long)]
        stats_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a report as an SVG heatmap grid
    Render {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// Light-high grayscale for cosine figures
        #[arg(long)]
        invert: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a report as CSV
    ExportCsv {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two reports cell by cell
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Largest accepted relative difference
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Run every plan of a suite configuration
    Suite {
        #[arg(long)]
        config: PathBuf,
    },
}

fn samples_files(paths: &[PathBuf]) -> Result<Vec<SamplesFile>> {
    paths.iter().map(|p| read_samples(p)).collect()
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Ingest { dataset_type, root, out, strict } => {
            let format = match dataset_type {
                DatasetType::Vot2015 => SourceFormat::Vot2015,
                DatasetType::Uav123 => SourceFormat::Uav123,
            };
            let catalog = load_dataset(&root, format, IngestOptions { strict })?;
            write_catalog(&catalog, &out)?;
            info!("{} sequences, {} classes", catalog.sequences.len(), catalog.class_count());
        }
        Command::Sample { catalog, plan, noise_px, seed, window_start, out } => {
            let plan = SamplePlan::parse(&plan, noise_px, seed, window_start).map_err(|e| Error::invalid(e.to_string()))?;
            let samples = plan_catalog(&read_catalog(&catalog)?, &catalog, plan)?;
            write_samples(&samples, &out)?;
        }
        Command::Crops { catalog, samples, out } => {
            let sets = merge_sample_files(&samples_files(&samples)?)?;
            build_crop_manifest(&read_catalog(&catalog)?, &catalog.to_string_lossy(), &sets, &out)?;
        }
        Command::VerifyManifest { manifest } => {
            let report = verify_manifest(&manifest)?;
            for v in &report.violations {
                println!("{v}");
            }
            if report.passed() {
                println!("pass: {} entries", report.checked);
            } else {
                println!("fail: {} violations in {} entries", report.violation_count, report.checked);
                return Ok(VERDICT_FAILED);
            }
        }
        Command::SynthEmbed { samples, spec, out } => {
            let config: SynthConfig = jsonio::read_json(&spec)?;
            let n = synth_embed(&config, &samples_files(&samples)?, &out)?;
            info!("{}: {n} records", out.display());
        }
        Command::Analyze {
            catalog,
            embeddings,
            pooling,
            variance,
            epsilon,
            samples,
            plan_label,
            seed,
            pair_values,
            allow_missing,
            stats_out,
            out,
        } => {
            let metric = MetricConfig {
                epsilon,
                pooling: match pooling {
                    PoolingArg::AllPairs => PoolingMode::AllPairs,
                    PoolingArg::SameSequence => PoolingMode::SameSequenceOnly,
                },
                variance: match variance {
                    VarianceArg::Sample => VarianceMode::Sample,
                    VarianceArg::Population => VarianceMode::Population,
                },
            };
            let mut config = RunConfig::new(catalog, embeddings);
            config.metric = metric;
            config.seed = seed;
            config.keep_pair_values = pair_values;
            config.allow_missing = allow_missing;
            if let Some(label) = plan_label {
                config.plan = label;
            } else if let Some(path) = samples {
                let plan = read_samples(&path)?
                    .plan()
                    .ok_or_else(|| Error::invalid(format!("{}: sample sets use different plans", path.display())))?;
                config.plan = plan.describe();
                if let (None, SamplePlan::RandomWithNoise { seed, .. }) = (config.seed, plan) {
                    config.seed = Some(seed);
                }
            }
            let output = analyze(&config)?;
            emit_report_json(&output.report, &out)?;
            if let Some(path) = stats_out {
                let dump: Vec<_> = output
                    .manifolds
                    .iter()
                    .map(|(network, classes)| json!({"network": network, "classes": classes}))
                    .collect();
                jsonio::write_file(&path, &jsonio::to_canonical(&dump))?;
            }
        }
        Command::Render { report, metric, invert, out } => {
            let metric = match metric {
                MetricArg::Cosine => Metric::Cosine,
                MetricArg::Mahalanobis => Metric::MahalanobisSq,
            };
            let report = read_report(&report)?;
            let svg = render_figure(&report, metric, RenderOptions { invert })?
                .ok_or_else(|| Error::invalid(format!("report has {} networks; the grid holds 6", report.networks.len())))?;
            jsonio::write_file(&out, svg.as_bytes())?;
        }
        Command::ExportCsv { report, out } => emit_report_csv(&read_report(&report)?, &out)?,
        Command::Compare { a, b, tolerance } => {
            let cmp = compare_reports(&read_report(&a)?, &read_report(&b)?, tolerance);
            for s in &cmp.structural {
                println!("structural: {s}");
            }
            for f in &cmp.failures {
                println!(
                    "{} {} {}: {} vs {} (relative {:e})",
                    f.network,
                    f.metric,
                    f.cell.label(),
                    f.left,
                    f.right,
                    f.relative
                );
            }
            println!("{}: max relative difference {:e}", if cmp.passed() { "pass" } else { "fail" }, cmp.max_relative);
            if !cmp.passed() {
                return Ok(VERDICT_FAILED);
            }
        }
        Command::Suite { config } => {
            for case in run_experiment_suite(&SuiteConfig::load(&config)?)? {
                info!("{}: {}", case.label, case.report.display());
            }
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DECAFBENCH_LOG", "warn")).init();
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
