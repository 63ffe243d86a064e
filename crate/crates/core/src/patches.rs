//! Target and background patch geometry, pixel crops, and crop-manifest
//! ordering rules.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dataset::AnnotatedSequence;
use crate::embedding::Metaclass;
use crate::geometry::{BoundingBox, FrameSize};
use crate::sampling::SampleSet;

/// Flanking direction of a background patch; the discriminant is its
/// patch index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Flank {
    Left = 0,
    Right = 1,
    Up = 2,
    Down = 3,
}

impl Flank {
    pub const ALL: [Flank; 4] = [Flank::Left, Flank::Right, Flank::Up, Flank::Down];

    pub fn patch_index(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundRegion {
    pub flank: Flank,
    pub region: BoundingBox,
}

/// Target-sized boxes one box-width to the left/right and one box-height
/// above/below the target. Candidates leaving the frame are dropped.
pub fn background_regions(target: BoundingBox, frame: FrameSize) -> Vec<BackgroundRegion> {
    Flank::ALL
        .iter()
        .map(|&flank| {
            let (dx, dy) = match flank {
                Flank::Left => (-target.w, 0.0),
                Flank::Right => (target.w, 0.0),
                Flank::Up => (0.0, -target.h),
                Flank::Down => (0.0, target.h),
            };
            BackgroundRegion {
                flank,
                region: BoundingBox::new(target.x + dx, target.y + dy, target.w, target.h),
            }
        })
        .filter(|c| c.region.fits_in(frame))
        .collect()
}

/// Row-major interleaved 8-bit raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self, CropError> {
        let expected = width as usize * height as usize * channels as usize;
        if channels == 0 || data.len() != expected {
            return Err(CropError::BufferSize { expected, found: data.len() });
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels as usize;
        let start = (y as usize * self.width as usize + x as usize) * c;
        &self.data[start..start + c]
    }
}

/// Integer pixel rectangle, half-open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CropError {
    #[error("crop region has zero area")]
    ZeroArea,
    #[error("crop region lies outside the {width}x{height} image")]
    OutsideImage { width: u32, height: u32 },
    #[error("raster buffer holds {found} bytes, expected {expected}")]
    BufferSize { expected: usize, found: usize },
}

/// Round a continuous box to pixel edges and clip it to the image.
pub fn pixel_rect(region: &BoundingBox, width: u32, height: u32) -> Result<PixelRect, CropError> {
    if !region.has_area() || !region.is_finite() {
        return Err(CropError::ZeroArea);
    }
    let (fw, fh) = (f64::from(width), f64::from(height));
    let x0 = libm::round(region.x).clamp(0.0, fw);
    let y0 = libm::round(region.y).clamp(0.0, fh);
    let x1 = libm::round(region.right()).clamp(0.0, fw);
    let y1 = libm::round(region.bottom()).clamp(0.0, fh);
    if x1 <= x0 || y1 <= y0 {
        return Err(CropError::OutsideImage { width, height });
    }
    Ok(PixelRect { x: x0 as u32, y: y0 as u32, w: (x1 - x0) as u32, h: (y1 - y0) as u32 })
}

/// Pixel-exact sub-raster; no resampling.
pub fn extract_crop(image: &Raster, region: &BoundingBox) -> Result<Raster, CropError> {
    let rect = pixel_rect(region, image.width, image.height)?;
    let c = image.channels as usize;
    let row_bytes = rect.w as usize * c;
    let mut data = Vec::with_capacity(row_bytes * rect.h as usize);
    for y in rect.y..rect.y + rect.h {
        let start = (y as usize * image.width as usize + rect.x as usize) * c;
        data.extend_from_slice(&image.data[start..start + row_bytes]);
    }
    Ok(Raster { width: rect.w, height: rect.h, channels: image.channels, data })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpec {
    pub sample_id: u32,
    pub sequence: String,
    pub frame: u32,
    pub metaclass: Metaclass,
    pub patch: u8,
    pub region: BoundingBox,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatchError {
    #[error("sample set for {0:?} is empty")]
    EmptySampleSet(String),
    #[error("sequence {0:?} yields no background patches; its BG manifold would be undefined")]
    NoBackground(String),
    #[error("sample {sample_id} of {sequence:?} refers to unannotated frame {frame}")]
    UnannotatedFrame { sequence: String, sample_id: u32, frame: u32 },
    #[error("sample set names sequence {0:?}, which is not in the catalog")]
    UnknownSequence(String),
}

/// Patch specs for one sample set: per sample, the target patch followed by
/// its background patches. Backgrounds flank the unperturbed annotation.
pub fn patch_specs(sequence: &AnnotatedSequence, set: &SampleSet) -> Result<Vec<PatchSpec>, PatchError> {
    if set.samples.is_empty() {
        return Err(PatchError::EmptySampleSet(set.sequence.clone()));
    }
    let mut specs = Vec::with_capacity(set.samples.len() * 5);
    let mut background_count = 0usize;
    for sample in &set.samples {
        let annotation = sequence
            .frame(sample.frame)
            .and_then(|f| f.bbox)
            .filter(BoundingBox::has_area)
            .ok_or_else(|| PatchError::UnannotatedFrame {
                sequence: set.sequence.clone(),
                sample_id: sample.id,
                frame: sample.frame,
            })?;
        specs.push(PatchSpec {
            sample_id: sample.id,
            sequence: set.sequence.clone(),
            frame: sample.frame,
            metaclass: Metaclass::Target,
            patch: 0,
            region: sample.bbox,
        });
        for bg in background_regions(annotation.clip_to(sequence.frame_size), sequence.frame_size) {
            background_count += 1;
            specs.push(PatchSpec {
                sample_id: sample.id,
                sequence: set.sequence.clone(),
                frame: sample.frame,
                metaclass: Metaclass::Background,
                patch: bg.flank.patch_index(),
                region: bg.region,
            });
        }
    }
    if background_count == 0 {
        return Err(PatchError::NoBackground(set.sequence.clone()));
    }
    Ok(specs)
}

/// `{seq}_{frame:06}_{metaclass}_{patch}.png`; the `k`-th repeat of a name
/// (random plans draw frames with replacement) gets an `_r{k}` suffix.
pub fn crop_file_name(sequence: &str, frame: u32, metaclass: Metaclass, patch: u8, repeat: u32) -> String {
    if repeat == 0 {
        format!("{sequence}_{frame:06}_{}_{patch}.png", metaclass.label())
    } else {
        format!("{sequence}_{frame:06}_{}_{patch}_r{repeat}.png", metaclass.label())
    }
}

/// Ordering key of a manifest entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntryKey<'a> {
    pub sequence: &'a str,
    pub sample_id: u32,
    pub metaclass: Metaclass,
    pub patch: u8,
}

/// Indices of entries that break the manifest ordering: within each
/// sequence block `(sample_id, metaclass, patch)` strictly increases, and a
/// sequence block never resumes once another sequence has started.
pub fn ordering_violations<'a>(entries: impl IntoIterator<Item = EntryKey<'a>>) -> Vec<usize> {
    let mut violations = Vec::new();
    let mut finished: BTreeSet<&str> = BTreeSet::new();
    let mut prev: Option<EntryKey<'a>> = None;
    for (i, key) in entries.into_iter().enumerate() {
        if let Some(p) = prev {
            if p.sequence == key.sequence {
                if (key.sample_id, key.metaclass, key.patch) <= (p.sample_id, p.metaclass, p.patch) {
                    violations.push(i);
                }
            } else {
                finished.insert(p.sequence);
                if finished.contains(key.sequence) {
                    violations.push(i);
                }
            }
        }
        prev = Some(key);
    }
    violations
}
