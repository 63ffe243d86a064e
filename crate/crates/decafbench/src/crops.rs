//! Crop staging: PNG patches plus `manifest.json` for an embedding provider.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use decafbench_core::dataset::DatasetCatalog;
use decafbench_core::embedding::Metaclass;
use decafbench_core::geometry::BoundingBox;
use decafbench_core::patches::{crop_file_name, extract_crop, ordering_violations, patch_specs, EntryKey, PatchError, Raster};
use decafbench_core::sampling::{SamplePlan, SampleSet};
use image::RgbImage;
use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonio;

pub const MANIFEST_NAME: &str = "manifest.json";
pub const MAX_REPORTED_VIOLATIONS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreatedFrom {
    pub catalog: String,
    pub plans: Vec<SamplePlan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: u32,
    pub seq: String,
    pub frame: u32,
    pub metaclass: String,
    pub patch: u8,
    pub file: String,
    pub bbox: BoundingBox,
    pub size: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropManifest {
    pub dataset: String,
    pub created_from: CreatedFrom,
    pub entries: Vec<ManifestEntry>,
}

fn metaclass_from_label(label: &str) -> Option<Metaclass> {
    [Metaclass::Target, Metaclass::Background].into_iter().find(|m| m.label() == label)
}

fn to_raster(image: RgbImage) -> Raster {
    let (w, h) = image.dimensions();
    Raster::new(w, h, 3, image.into_raw()).expect("RGB buffer matches its dimensions")
}

fn decode(path: &Path) -> Result<RgbImage> {
    Ok(image::open(path)
        .map_err(|source| Error::Image { path: path.to_path_buf(), source })?
        .to_rgb8())
}

/// Write one TG crop and up to four BG crops per sample into `out_dir`,
/// then `manifest.json`. Each frame image is decoded once per sample set.
pub fn build_crop_manifest(
    catalog: &DatasetCatalog,
    catalog_path: &str,
    sample_sets: &[SampleSet],
    out_dir: &Path,
) -> Result<CropManifest> {
    if sample_sets.is_empty() {
        return Err(Error::invalid("no sample sets given"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut entries = Vec::new();
    let mut plans: Vec<SamplePlan> = Vec::new();
    for set in sample_sets {
        if !plans.contains(&set.plan) {
            plans.push(set.plan);
        }
        let seq = catalog
            .sequence(&set.sequence)
            .ok_or_else(|| Error::invalid(PatchError::UnknownSequence(set.sequence.clone()).to_string()))?;
        let specs = patch_specs(seq, set).map_err(|e| Error::invalid(e.to_string()))?;

        let mut repeats: HashMap<String, u32> = HashMap::new();
        let names: Vec<String> = specs
            .iter()
            .map(|s| {
                let base = crop_file_name(&s.sequence, s.frame, s.metaclass, s.patch, 0);
                let k = repeats.entry(base).or_insert(0);
                *k += 1;
                crop_file_name(&s.sequence, s.frame, s.metaclass, s.patch, *k - 1)
            })
            .collect();

        let mut by_frame: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, s) in specs.iter().enumerate() {
            by_frame.entry(s.frame).or_default().push(i);
        }
        let mut sizes = vec![[0u32; 2]; specs.len()];
        for (frame, indices) in by_frame {
            let source = seq.frame(frame).expect("patch specs only name catalog frames");
            let raster = to_raster(decode(Path::new(&source.image))?);
            for i in indices {
                let spec = &specs[i];
                let crop = extract_crop(&raster, &spec.region).map_err(|e| {
                    Error::invalid(format!("sequence {:?} sample {}: {e}", spec.sequence, spec.sample_id))
                })?;
                let path = out_dir.join(&names[i]);
                RgbImage::from_raw(crop.width, crop.height, crop.data)
                    .expect("crop buffer matches its dimensions")
                    .save(&path)
                    .map_err(|source| Error::Image { path: path.clone(), source })?;
                sizes[i] = [crop.width, crop.height];
            }
        }
        entries.extend(specs.into_iter().zip(names).zip(sizes).map(|((s, file), size)| ManifestEntry {
            id: s.sample_id,
            seq: s.sequence,
            frame: s.frame,
            metaclass: s.metaclass.label().to_string(),
            patch: s.patch,
            file,
            bbox: s.region,
            size,
        }));
    }
    let manifest = CropManifest {
        dataset: catalog.dataset_name.clone(),
        created_from: CreatedFrom { catalog: catalog_path.to_string(), plans },
        entries,
    };
    jsonio::write_file(&out_dir.join(MANIFEST_NAME), &jsonio::to_pretty(&manifest))?;
    info!("{}: {} crops", out_dir.display(), manifest.entries.len());
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub checked: usize,
    pub violation_count: usize,
    /// The first [`MAX_REPORTED_VIOLATIONS`] violations.
    pub violations: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    fn push(&mut self, message: String) {
        self.violation_count += 1;
        if self.violations.len() < MAX_REPORTED_VIOLATIONS {
            self.violations.push(message);
        }
    }
}

/// Check every entry's file for existence, decodability and size, and the
/// entry ordering. Only an unreadable manifest is an error.
pub fn verify_manifest(manifest_path: &Path) -> Result<VerifyReport> {
    let manifest: CropManifest = jsonio::read_json(manifest_path)?;
    let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let mut report = VerifyReport { checked: manifest.entries.len(), ..VerifyReport::default() };
    let mut keys = Vec::with_capacity(manifest.entries.len());
    for (i, e) in manifest.entries.iter().enumerate() {
        let Some(metaclass) = metaclass_from_label(&e.metaclass) else {
            report.push(format!("entry {i} ({}): unknown metaclass {:?}", e.file, e.metaclass));
            continue;
        };
        keys.push((i, EntryKey { sequence: &e.seq, sample_id: e.id, metaclass, patch: e.patch }));
        let path = dir.join(&e.file);
        if !path.is_file() {
            report.push(format!("entry {i} ({}): file missing", e.file));
            continue;
        }
        match image::open(&path) {
            Err(err) => report.push(format!("entry {i} ({}): cannot decode: {err}", e.file)),
            Ok(img) if [img.width(), img.height()] != e.size => report.push(format!(
                "entry {i} ({}): decoded size {}x{} differs from recorded {}x{}",
                e.file,
                img.width(),
                img.height(),
                e.size[0],
                e.size[1]
            )),
            Ok(_) => {}
        }
    }
    for v in ordering_violations(keys.iter().map(|(_, k)| *k)) {
        let (i, _) = keys[v];
        let e = &manifest.entries[i];
        report.push(format!(
            "entry {i} ({}): out of order (seq {:?}, id {}, {}, patch {})",
            e.file, e.seq, e.id, e.metaclass, e.patch
        ));
    }
    Ok(report)
}
