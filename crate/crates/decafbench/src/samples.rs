//! Sample-set files: one plan applied to every sequence of a catalog.

use std::path::Path;

use decafbench_core::dataset::DatasetCatalog;
use decafbench_core::sampling::{plan_samples, SamplePlan, SampleSet};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplesFile {
    /// Catalog the sets were planned from.
    pub catalog: String,
    pub dataset: String,
    pub sample_sets: Vec<SampleSet>,
}

impl SamplesFile {
    /// The shared plan, when every set used the same one.
    pub fn plan(&self) -> Option<SamplePlan> {
        let first = self.sample_sets.first()?.plan;
        self.sample_sets.iter().all(|s| s.plan == first).then_some(first)
    }
}

pub fn plan_catalog(catalog: &DatasetCatalog, catalog_path: &Path, plan: SamplePlan) -> Result<SamplesFile> {
    let sample_sets = catalog
        .sequences
        .iter()
        .map(|seq| {
            let set = plan_samples(seq, plan).map_err(|e| Error::invalid(e.to_string()))?;
            if set.is_truncated() {
                warn!(
                    "sequence {:?}: window truncated to {} of {} requested frames",
                    seq.name,
                    set.samples.len(),
                    plan.requested().unwrap_or(0)
                );
            }
            Ok(set)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SamplesFile {
        catalog: catalog_path.to_string_lossy().into_owned(),
        dataset: catalog.dataset_name.clone(),
        sample_sets,
    })
}

pub fn write_samples(samples: &SamplesFile, path: &Path) -> Result<()> {
    jsonio::write_file(path, &jsonio::to_pretty(samples))
}

pub fn read_samples(path: &Path) -> Result<SamplesFile> {
    let file: SamplesFile = jsonio::read_json(path)?;
    for set in &file.sample_sets {
        if set.samples.iter().zip(0u32..).any(|(s, i)| s.id != i) {
            return Err(Error::invalid(format!(
                "{}: sample ids of {:?} are not dense from 0",
                path.display(),
                set.sequence
            )));
        }
    }
    Ok(file)
}

/// Sample sets of several files, refusing a sequence that appears twice.
pub fn merge_sample_files(files: &[SamplesFile]) -> Result<Vec<SampleSet>> {
    let mut sets: Vec<SampleSet> = Vec::new();
    for set in files.iter().flat_map(|f| &f.sample_sets) {
        if sets.iter().any(|s| s.sequence == set.sequence) {
            return Err(Error::invalid(format!("sequence {:?} appears in more than one sample set", set.sequence)));
        }
        sets.push(set.clone());
    }
    Ok(sets)
}
