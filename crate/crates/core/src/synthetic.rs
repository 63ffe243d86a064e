//! Deterministic Gaussian embedding provider.
//!
//! Every class `(sequence, metaclass)` gets a centroid `centroid_scale · u`
//! where `u` is a uniformly random unit direction; each sample is the
//! centroid plus isotropic noise of standard deviation `within_class_sigma`.
//! Class statistics are therefore known exactly, which makes the provider a
//! ground-truth oracle for the analysis pipeline.
//!
//! Keys: the class stream seed is `combine(combine(seed, fnv1a64(name)),
//! metaclass_code + 1)`; the direction is read from that stream, and the
//! noise for a sample is read from the stream seeded with
//! `combine(class_seed, frame << 8 | patch)`. Normals come from Box–Muller.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbeddingFile, EmbeddingRecord, Metaclass};
use crate::rng::{combine, fnv1a64, SplitMix64};
use crate::sampling::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dimension: u32,
    pub seed: u64,
    pub centroid_scale: f64,
    pub within_class_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntheticError {
    #[error("synthetic dimension must be at least 2")]
    Dimension,
    #[error("within_class_sigma must be finite and non-negative")]
    Sigma,
    #[error("centroid_scale must be finite")]
    Scale,
    #[error("no sample sets given")]
    NoSamples,
    #[error("at most 255 background patches per sample are representable")]
    TooManyPatches,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        if self.dimension < 2 {
            return Err(SyntheticError::Dimension);
        }
        if !(self.within_class_sigma.is_finite() && self.within_class_sigma >= 0.0) {
            return Err(SyntheticError::Sigma);
        }
        if !self.centroid_scale.is_finite() {
            return Err(SyntheticError::Scale);
        }
        Ok(())
    }

    pub fn class_seed(&self, sequence_name: &str, metaclass: Metaclass) -> u64 {
        combine(combine(self.seed, fnv1a64(sequence_name.as_bytes())), u64::from(metaclass.code()) + 1)
    }

    /// Unit-norm class direction.
    pub fn class_direction(&self, sequence_name: &str, metaclass: Metaclass) -> Vec<f64> {
        let mut dir = alloc::vec![0.0; self.dimension as usize];
        SplitMix64::new(self.class_seed(sequence_name, metaclass)).fill_gaussian(&mut dir);
        let norm = libm::sqrt(dir.iter().map(|v| v * v).sum::<f64>());
        if norm > 0.0 {
            dir.iter_mut().for_each(|v| *v /= norm);
        } else {
            dir[0] = 1.0;
        }
        dir
    }

    pub fn class_centroid(&self, sequence_name: &str, metaclass: Metaclass) -> Vec<f64> {
        let mut c = self.class_direction(sequence_name, metaclass);
        c.iter_mut().for_each(|v| *v *= self.centroid_scale);
        c
    }

    fn noise_into(&self, class_seed: u64, frame_index: u32, patch_index: u8, out: &mut [f64]) {
        let key = (u64::from(frame_index) << 8) | u64::from(patch_index);
        SplitMix64::new(combine(class_seed, key)).fill_gaussian(out);
    }

    fn sample_from_centroid(&self, centroid: &[f64], class_seed: u64, frame_index: u32, patch_index: u8) -> Vec<f32> {
        let mut noise = alloc::vec![0.0; centroid.len()];
        self.noise_into(class_seed, frame_index, patch_index, &mut noise);
        centroid
            .iter()
            .zip(&noise)
            .map(|(c, g)| (c + self.within_class_sigma * g) as f32)
            .collect()
    }
}

/// One synthetic embedding vector.
pub fn synthetic_embed(
    spec: &SyntheticSpec,
    sequence_name: &str,
    metaclass: Metaclass,
    frame_index: u32,
    patch_index: u8,
) -> Vec<f32> {
    let centroid = spec.class_centroid(sequence_name, metaclass);
    spec.sample_from_centroid(&centroid, spec.class_seed(sequence_name, metaclass), frame_index, patch_index)
}

/// Caches class centroids while generating many vectors.
#[derive(Debug, Clone)]
pub struct SyntheticProvider {
    spec: SyntheticSpec,
    classes: BTreeMap<(String, Metaclass), (u64, Vec<f64>)>,
}

impl SyntheticProvider {
    pub fn new(spec: SyntheticSpec) -> Result<Self, SyntheticError> {
        spec.validate()?;
        Ok(Self { spec, classes: BTreeMap::new() })
    }

    pub fn spec(&self) -> &SyntheticSpec {
        &self.spec
    }

    pub fn embed(&mut self, sequence_name: &str, metaclass: Metaclass, frame_index: u32, patch_index: u8) -> Vec<f32> {
        let spec = self.spec;
        let (seed, centroid) = self
            .classes
            .entry((String::from(sequence_name), metaclass))
            .or_insert_with(|| (spec.class_seed(sequence_name, metaclass), spec.class_centroid(sequence_name, metaclass)));
        spec.sample_from_centroid(centroid, *seed, frame_index, patch_index)
    }
}

/// Records for every sample: the target vector, then `bg_patches_per_sample`
/// background vectors with patch indices `0..bg_patches_per_sample`.
pub fn generate_synthetic_file(
    spec: &SyntheticSpec,
    network: &str,
    dataset: &str,
    sample_sets: &[SampleSet],
    bg_patches_per_sample: u32,
) -> Result<EmbeddingFile, SyntheticError> {
    if sample_sets.is_empty() {
        return Err(SyntheticError::NoSamples);
    }
    let bg = u8::try_from(bg_patches_per_sample).map_err(|_| SyntheticError::TooManyPatches)?;
    let mut provider = SyntheticProvider::new(*spec)?;
    let mut sequences: Vec<String> = Vec::new();
    let mut records = Vec::new();
    for set in sample_sets {
        let sequence_index = match sequences.iter().position(|s| *s == set.sequence) {
            Some(i) => i,
            None => {
                sequences.push(set.sequence.clone());
                sequences.len() - 1
            }
        } as u32;
        for sample in &set.samples {
            let patches = core::iter::once((Metaclass::Target, 0u8)).chain((0..bg).map(|p| (Metaclass::Background, p)));
            for (metaclass, patch_index) in patches {
                records.push(EmbeddingRecord {
                    sequence_index,
                    frame_index: sample.frame,
                    metaclass,
                    patch_index,
                    vector: provider.embed(&set.sequence, metaclass, sample.frame, patch_index),
                });
            }
        }
    }
    Ok(EmbeddingFile {
        network: String::from(network),
        dataset: String::from(dataset),
        dimension: spec.dimension,
        sequences,
        records,
    })
}
