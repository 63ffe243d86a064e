//! Benchmark directory layouts to [`DatasetCatalog`].
//!
//! VOT2015: `ROOT/<sequence>/groundtruth.txt` with frame images beside it.
//! UAV123: `ROOT/anno/UAV123/<sequence>.txt` (or `ROOT/anno/<sequence>.txt`)
//! with frames in `ROOT/data_seq/UAV123/<sequence>/` (or `ROOT/data_seq/<sequence>/`).

use std::fs;
use std::path::{Path, PathBuf};

use decafbench_core::dataset::{
    parse_uav_line, parse_vot_line, AbsentReason, AnnotatedSequence, Annotation, DatasetCatalog, DatasetError, Frame,
    SkippedSequence, SourceFormat,
};
use decafbench_core::geometry::FrameSize;
use log::{info, warn};

use crate::error::{Error, Result};

pub const VOT_GROUNDTRUTH: &str = "groundtruth.txt";
const IMAGE_EXTENSIONS: &[&str] = &["jpg", "jpeg", "png", "bmp"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IngestOptions {
    /// Fail on any inconsistency instead of skipping or truncating.
    pub strict: bool,
}

/// Image files of a directory, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut images: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    images.sort();
    Ok(images)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn assemble(
    name: &str,
    annotation_file: &Path,
    lines: &[String],
    images: Vec<PathBuf>,
    parse: fn(&str) -> Result<Annotation, DatasetError>,
    options: IngestOptions,
) -> Result<AnnotatedSequence> {
    let mut count = lines.len();
    if lines.len() != images.len() {
        let message = format!(
            "sequence {name:?}: {} annotation lines but {} images",
            lines.len(),
            images.len()
        );
        if options.strict {
            return Err(Error::invalid(message));
        }
        count = count.min(images.len());
        warn!("{message}; truncating to {count} frames");
    }
    let first = images.first().ok_or_else(|| Error::invalid(format!("sequence {name:?}: no frame images")))?;
    let (width, height) = image::image_dimensions(first).map_err(|source| Error::Image { path: first.clone(), source })?;
    let mut frames = Vec::with_capacity(count);
    for (i, (line, image)) in lines.iter().zip(images).take(count).enumerate() {
        let annotation = parse(line).map_err(|source| Error::Parse {
            path: annotation_file.to_path_buf(),
            line: i + 1,
            source,
        })?;
        if annotation == Annotation::Absent(AbsentReason::ZeroArea) {
            warn!("{}:{}: zero-area box, frame left unannotated", annotation_file.display(), i + 1);
        }
        frames.push(Frame {
            index: i as u32,
            image: image.to_string_lossy().into_owned(),
            bbox: annotation.into_box(),
        });
    }
    AnnotatedSequence::new(name.to_string(), FrameSize::new(width, height), frames).map_err(|e| Error::invalid(e.to_string()))
}

/// One VOT2015 sequence directory.
pub fn parse_vot_sequence(sequence_dir: &Path, options: IngestOptions) -> Result<AnnotatedSequence> {
    let name = sequence_dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::invalid(format!("{}: not a sequence directory", sequence_dir.display())))?;
    let gt = sequence_dir.join(VOT_GROUNDTRUTH);
    let lines = read_lines(&gt)?;
    let images = list_images(sequence_dir)?;
    assemble(name, &gt, &lines, images, parse_vot_line, options)
}

/// One UAV123 sequence from its annotation file and frame directory.
pub fn parse_uav123_sequence(
    annotation_file: &Path,
    frames_dir: &Path,
    name: &str,
    options: IngestOptions,
) -> Result<AnnotatedSequence> {
    let lines = read_lines(annotation_file)?;
    let images = list_images(frames_dir)?;
    assemble(name, annotation_file, &lines, images, parse_uav_line, options)
}

fn first_existing(candidates: [PathBuf; 2]) -> Option<PathBuf> {
    candidates.into_iter().find(|p| p.is_dir())
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    Ok(entries)
}

/// Parse every sequence under `root`. In lenient mode failing sequences are
/// recorded in the catalog's skip list; in strict mode the first failure is
/// returned.
pub fn load_dataset(root: &Path, format: SourceFormat, options: IngestOptions) -> Result<DatasetCatalog> {
    if !root.is_dir() {
        return Err(Error::io(root, std::io::Error::new(std::io::ErrorKind::NotFound, "dataset root not found")));
    }
    let mut attempts: Vec<(String, Result<AnnotatedSequence>)> = Vec::new();
    match format {
        SourceFormat::Vot2015 => {
            for dir in sorted_entries(root)?.into_iter().filter(|p| p.join(VOT_GROUNDTRUTH).is_file()) {
                let name = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
                attempts.push((name, parse_vot_sequence(&dir, options)));
            }
        }
        SourceFormat::Uav123 => {
            if let Some(anno) = first_existing([root.join("anno").join("UAV123"), root.join("anno")]) {
                let data = first_existing([root.join("data_seq").join("UAV123"), root.join("data_seq")]);
                let files = sorted_entries(&anno)?
                    .into_iter()
                    .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"));
                for file in files {
                    let name = file.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    let result = match &data {
                        Some(data) => parse_uav123_sequence(&file, &data.join(&name), &name, options),
                        None => Err(Error::invalid(format!("{}: no data_seq directory", root.display()))),
                    };
                    attempts.push((name, result));
                }
            }
        }
    }

    let mut sequences = Vec::new();
    let mut skipped = Vec::new();
    for (name, result) in attempts {
        match result {
            Ok(seq) => sequences.push(seq),
            Err(e) if !options.strict => {
                warn!("skipping sequence {name:?}: {e}");
                skipped.push(SkippedSequence { name, reason: e.to_string() });
            }
            Err(e) => return Err(e),
        }
    }
    info!("{}: {} sequences, {} skipped", root.display(), sequences.len(), skipped.len());
    DatasetCatalog::new(format.as_str().to_string(), format, sequences, skipped).map_err(|e| Error::invalid(e.to_string()))
}

pub fn write_catalog(catalog: &DatasetCatalog, path: &Path) -> Result<()> {
    crate::jsonio::write_file(path, &crate::jsonio::to_pretty(catalog))
}

pub fn read_catalog(path: &Path) -> Result<DatasetCatalog> {
    let catalog: DatasetCatalog = crate::jsonio::read_json(path)?;
    catalog
        .validate()
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    Ok(catalog)
}
